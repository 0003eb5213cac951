use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pseudosphere::catalog;

fn pss(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pss"))
        .args(args)
        .current_dir(dir)
        .env_remove(catalog::CATALOG_DIR_ENV)
        .output()
        .expect("run pss")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const FOURTH_ORDER_PARAMS: [&str; 10] = [
    "--param", "m0=3/100", "--param", "m1=0", "--param", "m2=0", "--param", "gamma=1", "--param",
    "l=3",
];

#[test]
fn verify_passes_the_catalog_entries() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["sine-gordon-8", "fourth-order-45"] {
        let o = pss(&["verify", name], dir.path());
        assert_eq!(code(&o), 0, "{name}\n{}", stdout(&o));
    }
    let text = stdout(&pss(&["verify", "sine-gordon-8"], dir.path()));
    for check in [
        "structure.1",
        "structure.2",
        "structure.3",
        "gauss",
        "codazzi.1",
        "codazzi.2",
    ] {
        let line = text.lines().find(|l| l.contains(check)).unwrap();
        assert!(line.starts_with("ok") && line.contains("zero"), "{line}");
    }
}

#[test]
fn verify_of_a_broken_file_fails_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.pssp");
    fs::write(
        &path,
        catalog::get("sine-gordon-7-broken-f22").unwrap().source,
    )
    .unwrap();
    let o = pss(&["verify", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("FAIL structure.1"), "{text}");
    assert!(text.contains("     at z1="), "{text}");
}

#[test]
fn verify_rejects_bad_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pssp");
    fs::write(
        &bad,
        "pss-problem v1\nname = bad\n\n[equation]\nscheme = hyperbolic\nrhs = sin(\n",
    )
    .unwrap();
    let cases: [&[&str]; 5] = [
        &["verify", bad.to_str().unwrap()],
        &["verify", "no-such-entry"],
        &["verify", "sine-gordon-8", "--checks", "structure,bogus"],
        &["verify", "sine-gordon-8", "--checks", "lemma"],
        &["verify", "sine-gordon-7", "--param", "nope=1"],
    ];
    for args in cases {
        assert_eq!(code(&pss(args, dir.path())), 2, "{args:?}");
    }
}

#[test]
fn default_checks_announce_what_they_skip() {
    let dir = tempfile::tempdir().unwrap();
    let o = pss(&["verify", "sine-gordon-7"], dir.path());
    assert_eq!(code(&o), 0);
    let err = String::from_utf8_lossy(&o.stderr);
    for check in ["lemma", "gauss", "codazzi", "universality"] {
        assert!(err.contains(&format!("skipping {check}:")), "{err}");
    }
}

#[test]
fn reports_are_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fourth-order-45", "sine-gordon-7-broken-f22"] {
        let mut seen = Vec::new();
        for file in ["a.tsv", "b.tsv"] {
            pss(
                &["verify", name, "--seed", "11", "--report", file],
                dir.path(),
            );
            seen.push(fs::read(dir.path().join(file)).unwrap());
        }
        assert!(!seen[0].is_empty());
        assert_eq!(seen[0], seen[1], "{name}");
    }
}

#[test]
fn report_merge_keeps_every_line_and_empty_merge_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    pss(
        &["verify", "sine-gordon-8", "--report", "a.tsv"],
        dir.path(),
    );
    pss(
        &["verify", "fourth-order-45", "--report", "b.tsv"],
        dir.path(),
    );
    let o = pss(
        &["report", "a.tsv", "b.tsv", "--out", "merged.tsv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let merged = fs::read_to_string(dir.path().join("merged.tsv")).unwrap();
    let lines = |f: &str| {
        fs::read_to_string(dir.path().join(f))
            .unwrap()
            .lines()
            .map(String::from)
            .collect::<Vec<_>>()
    };
    for line in lines("a.tsv").iter().chain(&lines("b.tsv")) {
        assert!(merged.lines().any(|m| m == line), "{line}");
    }
    assert_eq!(
        merged.lines().count(),
        lines("a.tsv").len() + lines("b.tsv").len()
    );

    let empty = pss(&["report"], dir.path());
    assert_eq!(code(&empty), 0);
    assert!(empty.stdout.is_empty());
}

#[test]
fn catalog_lists_three_entries() {
    let dir = tempfile::tempdir().unwrap();
    let o = pss(&["catalog"], dir.path());
    assert_eq!(code(&o), 0);
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect();
    assert_eq!(names, ["sine-gordon-7", "sine-gordon-8", "fourth-order-45"]);
}

#[test]
fn soliton_immersion_passes_the_curvature_audit() {
    let dir = tempfile::tempdir().unwrap();
    let o = pss(
        &[
            "immerse",
            "sine-gordon-8",
            "--soliton",
            "alpha=1",
            "--nx",
            "201",
            "--nt",
            "201",
            "--out",
            "kink.obj",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    let obj = fs::read_to_string(dir.path().join("kink.obj")).unwrap();
    assert_eq!(
        obj.lines().filter(|l| l.starts_with("v ")).count(),
        201 * 201
    );
    let csv = fs::read_to_string(dir.path().join("kink.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201 * 201 + 1);
}

#[test]
fn constant_zero_solution_is_fully_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let o = pss(
        &["immerse", "sine-gordon-8", "--constant", "u=0"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
    assert!(
        stdout(&o).contains("mask report: 10201 of 10201 nodes are degenerate"),
        "{}",
        stdout(&o)
    );
    assert!(!dir.path().join("sine-gordon-8.obj").exists());
}

#[test]
fn numeric_immersion_writes_a_mesh_and_an_audit() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "immerse",
        "fourth-order-45",
        "--numeric",
        "--nx",
        "41",
        "--nt",
        "41",
    ];
    args.extend(FOURTH_ORDER_PARAMS);
    let o = pss(&args, dir.path());
    assert!(
        matches!(code(&o), 0 | 1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(text.contains("marching      Backward"), "{text}");
    assert!(text.contains("max |K+1|"), "{text}");
    assert!(dir.path().join("fourth-order-45.obj").exists());
    assert!(dir.path().join("fourth-order-45.csv").exists());
}

#[test]
fn immerse_configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["immerse", "fourth-order-45", "--numeric"],
        &["immerse", "sine-gordon-7", "--soliton", "alpha=1"],
        &[
            "immerse",
            "sine-gordon-8",
            "--soliton",
            "alpha=1",
            "--nx",
            "0",
        ],
        &["immerse", "sine-gordon-8"],
    ];
    for args in cases {
        assert_eq!(code(&pss(args, dir.path())), 2, "{args:?}");
    }
}
