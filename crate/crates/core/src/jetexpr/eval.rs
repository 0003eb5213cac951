//! Floating-point evaluation of canonical forms.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::canon::{Atom, Canon, Poly};
use super::expr::{Rational, Var};

/// Why a point could not be evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    /// A symbol has no value at this point.
    Missing(String),
    /// A function was applied outside its domain, or a denominator vanished.
    Domain,
}

/// Thresholds for what counts as a domain violation.
#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    /// `sqrt` and `ln` arguments must exceed this.
    pub min_argument: f64,
    /// Denominators must exceed this in magnitude.
    pub min_divisor: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            min_argument: 0.0,
            min_divisor: 0.0,
        }
    }
}

impl EvalOptions {
    /// Conservative domain used by the random zero test.
    pub fn sampling() -> Self {
        EvalOptions {
            min_argument: 1e-6,
            min_divisor: 1e-9,
        }
    }
}

/// Values for coordinates, jet variables and parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    pub vars: BTreeMap<Var, f64>,
    pub params: BTreeMap<String, f64>,
}

impl Point {
    pub fn new() -> Point {
        Point::default()
    }

    pub fn with_var(mut self, v: Var, value: f64) -> Point {
        self.vars.insert(v, value);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Point {
        self.params.insert(name.to_string(), value);
        self
    }

    /// `name=value` pairs, variables first, in a stable order.
    pub fn describe(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .vars
            .iter()
            .map(|(v, x)| (v.short_name(), *x))
            .collect();
        out.extend(self.params.iter().map(|(k, x)| (k.clone(), *x)));
        out
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn eval_canon(c: &Canon, at: &Point, opts: &EvalOptions) -> Result<f64, EvalError> {
    let mut value = eval_poly(c.num(), at, opts)?;
    if c.num().is_zero() {
        return Ok(0.0);
    }
    for (f, k) in c.den() {
        let d = eval_poly(f, at, opts)?;
        if !(d.abs() > opts.min_divisor) || !d.is_finite() {
            return Err(EvalError::Domain);
        }
        value /= d.powi(*k as i32);
    }
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::Domain)
    }
}

pub fn eval_poly(p: &Poly, at: &Point, opts: &EvalOptions) -> Result<f64, EvalError> {
    let mut sum = 0.0;
    for (m, c) in p.terms() {
        let mut term = rational_to_f64(c);
        for (a, k) in m.powers() {
            term *= eval_atom(a, at, opts)?.powi(*k as i32);
        }
        if let Some(arg) = m.exp_arg() {
            term *= eval_canon(arg, at, opts)?.exp();
        }
        sum += term;
    }
    Ok(sum)
}

fn eval_atom(a: &Atom, at: &Point, opts: &EvalOptions) -> Result<f64, EvalError> {
    match a {
        Atom::Var(v) => at
            .vars
            .get(v)
            .copied()
            .ok_or_else(|| EvalError::Missing(v.short_name())),
        Atom::Param(p) => at
            .params
            .get(p.as_ref())
            .copied()
            .ok_or_else(|| EvalError::Missing(p.to_string())),
        Atom::Sin(arg) => Ok(eval_canon(arg, at, opts)?.sin()),
        Atom::Cos(arg) => Ok(eval_canon(arg, at, opts)?.cos()),
        Atom::Atan(arg) => Ok(eval_canon(arg, at, opts)?.atan()),
        Atom::Ln(arg) => {
            let x = eval_canon(arg, at, opts)?;
            if x > opts.min_argument {
                Ok(x.ln())
            } else {
                Err(EvalError::Domain)
            }
        }
        Atom::Sqrt(p) => {
            let x = eval_poly(p, at, opts)?;
            if x > opts.min_argument || (opts.min_argument == 0.0 && x == 0.0) {
                Ok(x.sqrt())
            } else {
                Err(EvalError::Domain)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::convert::to_canon;
    use crate::jetexpr::expr::Expr;

    #[test]
    fn evaluates_mixed_expression() {
        let e = Expr::sin(Expr::z(0)) * Expr::param("eta") + Expr::exp(Expr::x());
        let p = Point::new()
            .with_var(Var::Z(0), 0.5)
            .with_var(Var::X, 1.0)
            .with_param("eta", 2.0);
        let v = eval_canon(&to_canon(&e), &p, &EvalOptions::default()).unwrap();
        assert!((v - (2.0 * 0.5f64.sin() + 1f64.exp())).abs() < 1e-14);
    }

    #[test]
    fn reports_domain_and_missing() {
        let e = to_canon(&Expr::sqrt(Expr::z(0)));
        let p = Point::new().with_var(Var::Z(0), -1.0);
        assert_eq!(
            eval_canon(&e, &p, &EvalOptions::default()),
            Err(EvalError::Domain)
        );
        assert_eq!(
            eval_canon(&e, &Point::new(), &EvalOptions::default()),
            Err(EvalError::Missing("z0".into()))
        );
        let q = to_canon(&(Expr::one() / Expr::z(1)));
        let p = Point::new().with_var(Var::Z(1), 0.0);
        assert_eq!(
            eval_canon(&q, &p, &EvalOptions::default()),
            Err(EvalError::Domain)
        );
    }
}
