use std::collections::{BTreeMap, BTreeSet};

use super::expr::{parse_at, parse_rational_literal, resolve_var, Symbols};
use super::ParseError;
use crate::jetexpr::{
    Constraint, EquationDef, Expr, Func, JetError, Rational, Relation, SampleDomain, Scheme,
};
use crate::verify::{Coefficient, OneFormTriple, SecondFundamentalForm};

const HEADER: &str = "pss-problem v1";

/// How a declared parameter is treated.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamBinding {
    /// Symbolic; sampled by the numeric zero test.
    Free,
    /// Fixed to an exact value.
    Value(Rational),
}

/// A parsed and fully resolved problem file.
#[derive(Clone, Debug)]
pub struct ProblemDef {
    pub name: String,
    pub equation: EquationDef,
    pub forms: OneFormTriple,
    pub sff: Option<SecondFundamentalForm>,
    pub params: BTreeMap<String, ParamBinding>,
    /// Named definitions from `[params]`, already expanded in every expression.
    pub definitions: Vec<(String, Expr)>,
    pub constraints: Vec<Constraint>,
    /// Coefficient declared as the spectral parameter, normally `f21`.
    pub spectral: Option<Coefficient>,
}

impl ProblemDef {
    /// The spectral parameter expression, if one is declared.
    pub fn eta(&self) -> Option<&Expr> {
        self.spectral.map(|c| self.forms.get(c))
    }

    pub fn free_params(&self) -> Vec<String> {
        self.params
            .iter()
            .filter(|(_, b)| **b == ParamBinding::Free)
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Fix a declared parameter to a value.
    pub fn bind(&mut self, name: &str, value: Rational) -> Result<(), ParseError> {
        match self.params.get_mut(name) {
            Some(b) => {
                *b = ParamBinding::Value(value);
                Ok(())
            }
            None => Err(ParseError::Invalid {
                line: 0,
                message: format!("`{name}` is not a declared parameter"),
            }),
        }
    }

    /// Copy with every bound parameter replaced by its value.
    pub fn instantiate(&self) -> ProblemDef {
        let values: BTreeMap<String, Expr> = self
            .params
            .iter()
            .filter_map(|(k, b)| match b {
                ParamBinding::Value(q) => Some((k.clone(), Expr::constant(q.clone()))),
                ParamBinding::Free => None,
            })
            .collect();
        if values.is_empty() {
            return self.clone();
        }
        let lookup = |name: &str| values.get(name).cloned();
        ProblemDef {
            name: self.name.clone(),
            equation: self.equation.substitute(&lookup),
            forms: self.forms.map(|e| e.substitute(&lookup)),
            sff: self.sff.as_ref().map(|s| s.map(|e| e.substitute(&lookup))),
            params: self.params.clone(),
            definitions: self
                .definitions
                .iter()
                .map(|(k, e)| (k.clone(), e.substitute(&lookup)))
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| c.substitute(&lookup))
                .collect(),
            spectral: self.spectral,
        }
    }

    /// Sampling domain given by the declared constraints.
    pub fn sample_domain(&self) -> SampleDomain {
        SampleDomain {
            constraints: self.constraints.clone(),
            fixed: Default::default(),
        }
    }
}

#[derive(Clone, Debug)]
struct Line {
    number: usize,
    text: String,
}

#[derive(Clone, Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    /// 1-based column where `value` starts.
    column: usize,
}

#[derive(Debug, Default)]
struct Section {
    lines: Vec<Line>,
}

fn split_entry(l: &Line) -> Result<Entry, ParseError> {
    let Some(eq) = l.text.find('=') else {
        return Err(ParseError::Invalid {
            line: l.number,
            message: format!("expected `key = value`, found `{}`", l.text.trim()),
        });
    };
    let key = l.text[..eq].trim().to_string();
    let rest = &l.text[eq + 1..];
    let lead = rest.len() - rest.trim_start().len();
    let column = l.text[..eq + 1 + lead].chars().count() + 1;
    Ok(Entry {
        key,
        value: rest.trim().to_string(),
        line: l.number,
        column,
    })
}

fn entries(section: &Section) -> Result<Vec<Entry>, ParseError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for l in &section.lines {
        let e = split_entry(l)?;
        if !seen.insert(e.key.clone()) {
            return Err(ParseError::Invalid {
                line: e.line,
                message: format!("duplicate key `{}`", e.key),
            });
        }
        out.push(e);
    }
    Ok(out)
}

struct Table<'a> {
    params: &'a BTreeMap<String, ParamBinding>,
    defs: &'a BTreeMap<String, Expr>,
}

impl Symbols for Table<'_> {
    fn lookup(&self, name: &str) -> Option<Expr> {
        if self.params.contains_key(name) {
            return Some(Expr::param(name));
        }
        self.defs.get(name).cloned()
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn find_relation(text: &str) -> Option<(usize, usize, Relation)> {
    for (op, rel) in [
        ("!=", Relation::NotEqual),
        ("<=", Relation::LessEq),
        (">=", Relation::GreaterEq),
    ] {
        if let Some(p) = text.find(op) {
            return Some((p, 2, rel));
        }
    }
    for (op, rel) in [("<", Relation::Less), (">", Relation::Greater)] {
        if let Some(p) = text.find(op) {
            return Some((p, 1, rel));
        }
    }
    None
}

/// Parse a `pss-problem v1` file.
pub fn parse_problem(src: &str) -> Result<ProblemDef, ParseError> {
    let mut header_seen = false;
    let mut name: Option<String> = None;
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;

    for (idx, raw) in src.lines().enumerate() {
        let number = idx + 1;
        let text = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !header_seen {
            if trimmed == HEADER {
                header_seen = true;
                continue;
            }
            if trimmed.starts_with("pss-problem") {
                return Err(ParseError::Invalid {
                    line: number,
                    message: format!("unsupported format version `{trimmed}`"),
                });
            }
            return Err(ParseError::Missing(format!("header line `{HEADER}`")));
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(sec) = inner.strip_suffix(']') else {
                return Err(ParseError::Invalid {
                    line: number,
                    message: format!("malformed section header `{trimmed}`"),
                });
            };
            let sec = sec.trim().to_string();
            if !["equation", "params", "constraints", "forms", "sff"].contains(&sec.as_str()) {
                return Err(ParseError::Invalid {
                    line: number,
                    message: format!("unknown section [{sec}]"),
                });
            }
            if sections.contains_key(&sec) {
                return Err(ParseError::DuplicateSection {
                    name: sec,
                    line: number,
                });
            }
            sections.insert(sec.clone(), Section { lines: Vec::new() });
            current = Some(sec);
            continue;
        }
        let line = Line {
            number,
            text: text.to_string(),
        };
        match &current {
            Some(sec) => sections
                .get_mut(sec)
                .expect("section exists")
                .lines
                .push(line),
            None => {
                let e = split_entry(&line)?;
                if e.key != "name" || name.is_some() {
                    return Err(ParseError::Invalid {
                        line: number,
                        message: format!("unexpected `{}` outside a section", e.key),
                    });
                }
                name = Some(e.value);
            }
        }
    }
    if !header_seen {
        return Err(ParseError::Missing(format!("header line `{HEADER}`")));
    }

    // [params]
    let mut params: BTreeMap<String, ParamBinding> = BTreeMap::new();
    let mut defs: BTreeMap<String, Expr> = BTreeMap::new();
    let mut definitions = Vec::new();
    if let Some(sec) = sections.get("params") {
        for e in entries(sec)? {
            if !is_identifier(&e.key)
                || resolve_var(&e.key).is_some()
                || Func::from_name(&e.key).is_some()
                || e.key.starts_with("u_")
            {
                return Err(ParseError::Invalid {
                    line: e.line,
                    message: format!("`{}` cannot be used as a parameter name", e.key),
                });
            }
            if e.value == "free" {
                params.insert(e.key, ParamBinding::Free);
            } else if let Some(q) = parse_rational_literal(&e.value) {
                params.insert(e.key, ParamBinding::Value(q));
            } else {
                let table = Table {
                    params: &params,
                    defs: &defs,
                };
                let value = parse_at(&e.value, e.line, e.column, &table)?;
                definitions.push((e.key.clone(), value.clone()));
                defs.insert(e.key, value);
            }
        }
    }
    let table = Table {
        params: &params,
        defs: &defs,
    };
    let expr_of = |e: &Entry| parse_at(&e.value, e.line, e.column, &table);

    // [equation]
    let eq_sec = sections
        .get("equation")
        .ok_or_else(|| ParseError::Missing("equation".into()))?;
    let eq_entries = entries(eq_sec)?;
    let mut scheme = None;
    let mut order: Option<(u32, usize)> = None;
    let mut rhs: Option<(Expr, usize)> = None;
    for e in &eq_entries {
        match e.key.as_str() {
            "scheme" => {
                scheme = Some(match e.value.as_str() {
                    "evolution" => Scheme::Evolution,
                    "hyperbolic" => Scheme::Hyperbolic,
                    other => {
                        return Err(ParseError::Invalid {
                            line: e.line,
                            message: format!("unknown scheme `{other}`"),
                        })
                    }
                })
            }
            "order" => {
                let k = e.value.parse::<u32>().map_err(|_| ParseError::Invalid {
                    line: e.line,
                    message: format!("order must be a positive integer, found `{}`", e.value),
                })?;
                order = Some((k, e.line));
            }
            "rhs" => rhs = Some((expr_of(e)?, e.line)),
            other => {
                return Err(ParseError::Invalid {
                    line: e.line,
                    message: format!("unknown key `{other}` in [equation]"),
                })
            }
        }
    }
    let scheme = scheme.ok_or_else(|| ParseError::Missing("equation scheme".into()))?;
    let (rhs, rhs_line) = rhs.ok_or_else(|| ParseError::Missing("equation rhs".into()))?;
    let equation = match scheme {
        Scheme::Evolution => {
            let (k, _) = order.ok_or_else(|| ParseError::Missing("equation order".into()))?;
            EquationDef::evolution(k, rhs)
        }
        Scheme::Hyperbolic => {
            if let Some((k, line)) = order {
                if k != 2 {
                    return Err(ParseError::Invalid {
                        line,
                        message: "a hyperbolic equation has order 2".into(),
                    });
                }
            }
            EquationDef::hyperbolic(rhs)
        }
    }
    .map_err(|err| match err {
        JetError::SchemeBound { .. } => ParseError::SchemeMismatch {
            line: rhs_line,
            source: err,
        },
        other => ParseError::Invalid {
            line: rhs_line,
            message: other.to_string(),
        },
    })?;

    let bounded = |e: &Entry, value: Expr| -> Result<Expr, ParseError> {
        equation
            .check_bound(&value)
            .map_err(|source| ParseError::SchemeMismatch {
                line: e.line,
                source,
            })?;
        Ok(value)
    };

    // [forms]
    let forms_sec = sections
        .get("forms")
        .ok_or_else(|| ParseError::Missing("forms".into()))?;
    let mut coefs: BTreeMap<Coefficient, Expr> = BTreeMap::new();
    let mut spectral = None;
    for e in entries(forms_sec)? {
        if e.key == "spectral" {
            let c = Coefficient::from_name(&e.value).ok_or_else(|| ParseError::Invalid {
                line: e.line,
                message: format!("`{}` is not a coefficient", e.value),
            })?;
            spectral = Some((c, e.line));
            continue;
        }
        let c = Coefficient::from_name(&e.key).ok_or_else(|| ParseError::Invalid {
            line: e.line,
            message: format!("unknown key `{}` in [forms]", e.key),
        })?;
        let value = bounded(&e, expr_of(&e)?)?;
        coefs.insert(c, value);
    }
    let mut take = |c: Coefficient| {
        coefs
            .remove(&c)
            .ok_or_else(|| ParseError::Missing(format!("forms coefficient {c}")))
    };
    let forms = OneFormTriple::new(
        take(Coefficient::F11)?,
        take(Coefficient::F12)?,
        take(Coefficient::F21)?,
        take(Coefficient::F22)?,
        take(Coefficient::F31)?,
        take(Coefficient::F32)?,
    );
    let spectral = match spectral {
        Some((c, line)) => {
            if !forms.get(c).variables().is_empty() {
                return Err(ParseError::Invalid {
                    line,
                    message: format!("spectral coefficient {c} must not depend on x, t or jets"),
                });
            }
            Some(c)
        }
        None => None,
    };

    // [sff]
    let sff = match sections.get("sff") {
        None => None,
        Some(sec) => {
            let mut abc: BTreeMap<String, Expr> = BTreeMap::new();
            for e in entries(sec)? {
                if !["a", "b", "c"].contains(&e.key.as_str()) {
                    return Err(ParseError::Invalid {
                        line: e.line,
                        message: format!("unknown key `{}` in [sff]", e.key),
                    });
                }
                let value = bounded(&e, expr_of(&e)?)?;
                abc.insert(e.key, value);
            }
            let mut get = |k: &str| {
                abc.remove(k)
                    .ok_or_else(|| ParseError::Missing(format!("sff coefficient {k}")))
            };
            Some(SecondFundamentalForm::new(get("a")?, get("b")?, get("c")?))
        }
    };

    // [constraints]
    let mut constraints = Vec::new();
    if let Some(sec) = sections.get("constraints") {
        for l in &sec.lines {
            let (pos, width, relation) =
                find_relation(&l.text).ok_or_else(|| ParseError::Invalid {
                    line: l.number,
                    message: format!("expected a relation, found `{}`", l.text.trim()),
                })?;
            let lhs = parse_at(&l.text[..pos], l.number, 1, &table)?;
            let rhs_col = l.text[..pos + width].chars().count() + 1;
            let rhs = parse_at(&l.text[pos + width..], l.number, rhs_col, &table)?;
            constraints.push(Constraint::new(lhs, relation, rhs));
        }
    }

    Ok(ProblemDef {
        name: name.unwrap_or_else(|| "unnamed".into()),
        equation,
        forms,
        sff,
        params,
        definitions,
        constraints,
        spectral,
    })
}
