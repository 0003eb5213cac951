use pseudosphere::catalog;
use pseudosphere::verify::{Check, Verifier};

#[test]
fn catalog_entries_meet_their_expected_verdicts() {
    for entry in catalog::entries()
        .unwrap()
        .into_iter()
        .chain(catalog::fixtures().unwrap())
    {
        let report = Verifier::default().verify_problem(&entry.problem, &Check::ALL);
        for (check, label) in &entry.expected {
            let got = report
                .get(check)
                .unwrap_or_else(|| panic!("{}: no `{check}` entry", entry.name));
            assert_eq!(
                &got.outcome.label(),
                label,
                "{} {check}\n{}",
                entry.name,
                report.to_text()
            );
        }
    }
}
