//! Shipped problem files, closed-form solutions and expected verdicts.
//!
//! The files are compiled into the library. Setting `PSS_CATALOG_DIR` to a
//! directory of `*.pssp` files adds entries and replaces built-in entries
//! of the same name.

use std::path::Path;

use crate::jetexpr::Expr;
use crate::parser::{parse_expr, parse_problem, ParseError, ProblemDef};

const BUILTIN: [(&str, &str); 3] = [
    (
        "sine-gordon-7",
        include_str!("../catalog/sine-gordon-7.pssp"),
    ),
    (
        "sine-gordon-8",
        include_str!("../catalog/sine-gordon-8.pssp"),
    ),
    (
        "fourth-order-45",
        include_str!("../catalog/fourth-order-45.pssp"),
    ),
];

const FIXTURES: [(&str, &str); 4] = [
    (
        "sine-gordon-7-broken-f22",
        include_str!("../catalog/fixtures/sine-gordon-7-broken-f22.pssp"),
    ),
    (
        "sine-gordon-8-perturbed-a",
        include_str!("../catalog/fixtures/sine-gordon-8-perturbed-a.pssp"),
    ),
    (
        "lemma-f22-order-k-1",
        include_str!("../catalog/fixtures/lemma-f22-order-k-1.pssp"),
    ),
    (
        "lemma-constant-f11-f31",
        include_str!("../catalog/fixtures/lemma-constant-f11-f31.pssp"),
    ),
];

/// Environment variable naming an extra catalog directory.
pub const CATALOG_DIR_ENV: &str = "PSS_CATALOG_DIR";

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub source: String,
    pub problem: ProblemDef,
    /// Closed-form solutions `u(x, t)`, possibly with free parameters.
    pub solutions: Vec<(String, Expr)>,
    /// `(check, verdict label)` pairs the entry is expected to produce.
    pub expected: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("catalog entry `{name}`: {source}")]
    Parse {
        name: String,
        #[source]
        source: ParseError,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no catalog entry named `{0}`")]
    Unknown(String),
}

/// `u = 4 arctan(exp(αx + t/α))`, a kink of `u_xt = sin u`.
pub fn sine_gordon_kink() -> Expr {
    parse_expr("4*arctan(exp(alpha*x + t/alpha))").expect("valid expression")
}

fn expected_for(name: &str) -> Vec<(String, String)> {
    let pairs: &[(&str, &str)] = match name {
        "sine-gordon-7" => &[
            ("structure.1", "zero"),
            ("structure.2", "zero"),
            ("structure.3", "zero"),
        ],
        "sine-gordon-8" => &[
            ("structure.1", "zero"),
            ("structure.2", "zero"),
            ("structure.3", "zero"),
            ("gauss", "zero"),
            ("codazzi.1", "zero"),
            ("codazzi.2", "zero"),
            ("universality", "jet-dependent(l=0)"),
        ],
        "fourth-order-45" => &[
            ("structure.1", "zero"),
            ("structure.2", "zero"),
            ("structure.3", "zero"),
            ("gauss", "zero"),
            ("codazzi.1", "zero"),
            ("codazzi.2", "zero"),
            ("universality", "universal"),
        ],
        "sine-gordon-7-broken-f22" => &[
            ("structure.1", "nonzero"),
            ("structure.2", "zero"),
            ("structure.3", "zero"),
        ],
        "sine-gordon-8-perturbed-a" => &[("codazzi.1", "nonzero"), ("gauss", "nonzero")],
        _ => &[],
    };
    let mut out: Vec<(String, String)> = pairs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let failing_lemma = match name {
        "fourth-order-45" => Some(None),
        "lemma-f22-order-k-1" => Some(Some("lemma.f22-free-of-zk-zk-1")),
        "lemma-constant-f11-f31" => Some(Some("lemma.f11z0-f31z0-nonvanishing")),
        _ => None,
    };
    if let Some(failing) = failing_lemma {
        for check in LEMMA_CHECKS {
            // The nonvanishing condition passes on a nonzero verdict.
            let vanishing = check != "lemma.f11z0-f31z0-nonvanishing";
            let holds = failing != Some(check);
            let label = if vanishing == holds {
                "zero"
            } else {
                "nonzero"
            };
            out.push((check.to_string(), label.to_string()));
        }
    }
    out
}

/// Names of the lemma checks, in report order.
pub const LEMMA_CHECKS: [&str; 7] = [
    "lemma.f11-depends-on-z0-only",
    "lemma.f11z0-f31z0-nonvanishing",
    "lemma.f12-free-of-zk",
    "lemma.f21-is-eta",
    "lemma.f22-free-of-zk-zk-1",
    "lemma.f31-depends-on-z0-only",
    "lemma.f32-free-of-zk",
];

fn solutions_for(name: &str) -> Vec<(String, Expr)> {
    if name.starts_with("sine-gordon") {
        vec![("kink".to_string(), sine_gordon_kink())]
    } else {
        Vec::new()
    }
}

fn build(name: &str, source: &str) -> Result<CatalogEntry, CatalogError> {
    let problem = parse_problem(source).map_err(|source| CatalogError::Parse {
        name: name.to_string(),
        source,
    })?;
    Ok(CatalogEntry {
        name: name.to_string(),
        source: source.to_string(),
        problem,
        solutions: solutions_for(name),
        expected: expected_for(name),
    })
}

fn load_dir(dir: &Path) -> Result<Vec<CatalogEntry>, CatalogError> {
    let io = |source| CatalogError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pssp"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push(build(&stem, &text)?);
    }
    Ok(out)
}

/// Built-in entries, merged with `PSS_CATALOG_DIR` when it is set.
pub fn entries() -> Result<Vec<CatalogEntry>, CatalogError> {
    let mut out: Vec<CatalogEntry> = BUILTIN
        .iter()
        .map(|(name, src)| build(name, src))
        .collect::<Result<_, _>>()?;
    if let Ok(dir) = std::env::var(CATALOG_DIR_ENV) {
        for extra in load_dir(Path::new(&dir))? {
            out.retain(|e| e.name != extra.name);
            out.push(extra);
        }
    }
    Ok(out)
}

/// Counter-examples used by the test suites.
pub fn fixtures() -> Result<Vec<CatalogEntry>, CatalogError> {
    FIXTURES
        .iter()
        .map(|(name, src)| build(name, src))
        .collect()
}

/// Look up a catalog entry or fixture by name.
pub fn get(name: &str) -> Result<CatalogEntry, CatalogError> {
    entries()?
        .into_iter()
        .chain(fixtures()?)
        .find(|e| e.name == name)
        .ok_or_else(|| CatalogError::Unknown(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::Scheme;

    #[test]
    fn every_file_parses() {
        for e in entries().unwrap().iter().chain(fixtures().unwrap().iter()) {
            assert_eq!(e.problem.name, e.name);
        }
    }

    #[test]
    fn schemes_and_orders() {
        let sg8 = get("sine-gordon-8").unwrap();
        assert_eq!(sg8.problem.equation.scheme(), Scheme::Hyperbolic);
        assert!(sg8.problem.sff.is_some());
        let ex = get("fourth-order-45").unwrap();
        assert_eq!(ex.problem.equation.scheme(), Scheme::Evolution);
        assert_eq!(ex.problem.equation.order(), 4);
        assert!(matches!(get("nope"), Err(CatalogError::Unknown(_))));
    }
}
