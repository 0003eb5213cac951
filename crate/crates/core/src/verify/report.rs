use std::fmt::Write as _;
use std::time::Duration;

use crate::jetexpr::{Expr, Verdict, Witness};

use super::Universality;

/// What a single check produced.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Verdict(Verdict),
    Class(Universality),
    /// The check could not be carried out.
    Error(String),
}

impl Outcome {
    pub fn label(&self) -> String {
        match self {
            Outcome::Verdict(v) => v.label().to_string(),
            Outcome::Class(u) => u.to_string(),
            Outcome::Error(_) => "error".to_string(),
        }
    }

    /// Witness point, or the error message.
    pub fn detail(&self) -> Option<String> {
        match self {
            Outcome::Verdict(v) => v.witness().map(|w| w.to_string()),
            Outcome::Class(_) => None,
            Outcome::Error(e) => Some(e.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckEntry {
    pub problem: String,
    pub name: String,
    pub outcome: Outcome,
    pub passed: bool,
    /// Normalized residual, when one was computed.
    pub residual: Option<Expr>,
    pub elapsed: Duration,
}

impl CheckEntry {
    fn key(&self) -> (&str, &str) {
        (&self.problem, &self.name)
    }

    fn summary_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.problem,
            self.name,
            self.outcome.label(),
            if self.passed { "pass" } else { "fail" },
            self.outcome
                .detail()
                .unwrap_or_else(|| "-".into())
                .replace(['\t', '\n'], " ")
        )
    }
}

/// Ordered collection of check results.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    entries: Vec<CheckEntry>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.retain(|e| e.key() != entry.key());
        self.entries.push(entry);
        self.entries.sort_by(|a, b| a.key().cmp(&b.key()));
    }

    pub fn entries(&self) -> &[CheckEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn has_errors(&self) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e.outcome, Outcome::Error(_)))
    }

    /// Union of both reports; on a name clash the entry from `other` wins.
    pub fn merge(mut self, other: Report) -> Report {
        for e in other.entries {
            self.push(e);
        }
        self
    }

    /// Human-readable text with residuals and timings.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut current = None;
        for e in &self.entries {
            if current != Some(&e.problem) {
                let _ = writeln!(out, "== {}", e.problem);
                current = Some(&e.problem);
            }
            let _ = writeln!(
                out,
                "{:<4} {:<40} {:<22} {:>9.3}s",
                if e.passed { "ok" } else { "FAIL" },
                e.name,
                e.outcome.label(),
                e.elapsed.as_secs_f64()
            );
            if let Some(d) = e.outcome.detail() {
                let _ = writeln!(out, "     at {d}");
            }
            if !e.passed {
                if let Some(r) = &e.residual {
                    let _ = writeln!(out, "     residual = {r}");
                }
            }
        }
        let passed = self.entries.iter().filter(|e| e.passed).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.entries.len());
        out
    }

    /// One tab-separated line per check:
    /// `problem  check  verdict  pass|fail  witness`. Stable for a fixed seed.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.summary_line());
            out.push('\n');
        }
        out
    }

    /// Read back a file written by [`Report::summary`]. Residuals and
    /// timings are not part of the summary and come back empty.
    pub fn parse_summary(text: &str) -> Result<Report, String> {
        let mut report = Report::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(format!("line {}: expected 5 tab-separated fields", i + 1));
            }
            let passed = match cols[3] {
                "pass" => true,
                "fail" => false,
                other => return Err(format!("line {}: bad status `{other}`", i + 1)),
            };
            report.push(CheckEntry {
                problem: cols[0].to_string(),
                name: cols[1].to_string(),
                outcome: decode_outcome(cols[2], cols[4]),
                passed,
                residual: None,
                elapsed: Duration::ZERO,
            });
        }
        Ok(report)
    }
}

fn decode_outcome(label: &str, detail: &str) -> Outcome {
    match label {
        "zero" => Outcome::Verdict(Verdict::Zero),
        "probably-zero" => Outcome::Verdict(Verdict::ProbablyZero),
        "nonzero" => {
            let mut point = Vec::new();
            let mut value = f64::NAN;
            let (coords, val) = detail.split_once(";value=").unwrap_or((detail, ""));
            for kv in coords.split(',') {
                if let Some((k, v)) = kv.split_once('=') {
                    point.push((k.to_string(), v.parse().unwrap_or(f64::NAN)));
                }
            }
            if let Ok(v) = val.parse() {
                value = v;
            }
            Outcome::Verdict(Verdict::NonZero(Witness { point, value }))
        }
        "universal" => Outcome::Class(Universality::Universal),
        other => match other
            .strip_prefix("jet-dependent(l=")
            .and_then(|s| s.strip_suffix(')'))
            .and_then(|s| s.parse().ok())
        {
            Some(order) => Outcome::Class(Universality::JetDependent { order }),
            None => Outcome::Error(detail.to_string()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(problem: &str, name: &str, outcome: Outcome, passed: bool) -> CheckEntry {
        CheckEntry {
            problem: problem.into(),
            name: name.into(),
            outcome,
            passed,
            residual: None,
            elapsed: Duration::from_millis(3),
        }
    }

    #[test]
    fn merge_is_sorted_and_right_biased() {
        let mut a = Report::new();
        a.push(entry("p", "z", Outcome::Verdict(Verdict::Zero), true));
        a.push(entry("p", "a", Outcome::Verdict(Verdict::Zero), true));
        let mut b = Report::new();
        b.push(entry("p", "z", Outcome::Error("boom".into()), false));
        let m = a.merge(b);
        let names: Vec<_> = m.entries().iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["a", "z"]);
        assert!(m.has_errors());
        assert!(!m.all_passed());
    }

    #[test]
    fn summary_round_trip() {
        let mut r = Report::new();
        r.push(entry("p", "gauss", Outcome::Verdict(Verdict::Zero), true));
        r.push(entry(
            "p",
            "structure.2",
            Outcome::Verdict(Verdict::NonZero(Witness {
                point: vec![("z0".into(), 0.5), ("eta".into(), -1.25)],
                value: 0.125,
            })),
            false,
        ));
        r.push(entry(
            "q",
            "universality",
            Outcome::Class(Universality::JetDependent { order: 0 }),
            true,
        ));
        let text = r.summary();
        let back = Report::parse_summary(&text).unwrap();
        assert_eq!(back.summary(), text);
        assert!(text.contains("p\tstructure.2\tnonzero\tfail\tz0=0.5,eta=-1.25;value=0.125"));
    }
}
