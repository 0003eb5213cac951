//! Two-tier zero decision: exact normal form, then random evaluation.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::canon::Canon;
use super::convert::to_canon;
use super::eval::{eval_canon, EvalError, EvalOptions, Point};
use super::expr::{Expr, Var};
use super::JetError;

/// Outcome of a zero test.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// The canonical form is literally zero.
    Zero,
    /// Every sampled value was below the tolerance.
    ProbablyZero,
    /// A sampled value exceeded the tolerance.
    NonZero(Witness),
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, Verdict::NonZero(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Zero => "zero",
            Verdict::ProbablyZero => "probably-zero",
            Verdict::NonZero(_) => "nonzero",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::NonZero(w) => Some(w),
            _ => None,
        }
    }
}

/// A point where an expression was evaluated to a nonzero value.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub point: Vec<(String, f64)>,
    pub value: f64,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, v)) in self.point.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{name}={v}")?;
        }
        write!(f, ";value={}", self.value)
    }
}

/// Comparison used in sampling constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    NotEqual,
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::NotEqual => "!=",
            Relation::Less => "<",
            Relation::LessEq => "<=",
            Relation::Greater => ">",
            Relation::GreaterEq => ">=",
        }
    }
}

/// Side condition on parameters or coordinates, e.g. `eta != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

/// Margin by which a sampled point must clear a `!=` constraint.
const NOT_EQUAL_MARGIN: f64 = 1e-2;

impl Constraint {
    pub fn new(lhs: Expr, relation: Relation, rhs: Expr) -> Constraint {
        Constraint { lhs, relation, rhs }
    }

    pub fn holds(&self, at: &Point) -> Result<bool, EvalError> {
        let opts = EvalOptions::sampling();
        let l = eval_canon(&to_canon(&self.lhs), at, &opts)?;
        let r = eval_canon(&to_canon(&self.rhs), at, &opts)?;
        Ok(match self.relation {
            Relation::NotEqual => (l - r).abs() > NOT_EQUAL_MARGIN,
            Relation::Less => l < r,
            Relation::LessEq => l <= r,
            Relation::Greater => l > r,
            Relation::GreaterEq => l >= r,
        })
    }

    pub fn substitute(&self, lookup: &dyn Fn(&str) -> Option<Expr>) -> Constraint {
        Constraint {
            lhs: self.lhs.substitute(lookup),
            relation: self.relation,
            rhs: self.rhs.substitute(lookup),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation.symbol(), self.rhs)
    }
}

/// Where random points are drawn from.
#[derive(Clone, Debug, Default)]
pub struct SampleDomain {
    pub constraints: Vec<Constraint>,
    /// Parameters with fixed numeric values.
    pub fixed: Point,
}

impl SampleDomain {
    pub fn new() -> SampleDomain {
        SampleDomain::default()
    }

    pub fn with_constraint(mut self, c: Constraint) -> SampleDomain {
        self.constraints.push(c);
        self
    }
}

/// Configuration of the numeric tier.
#[derive(Clone, Copy, Debug)]
pub struct ZeroTest {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    /// Samples are uniform in `[-half_width, half_width]`.
    pub half_width: f64,
    /// Give up after `samples * attempts_per_sample` draws.
    pub attempts_per_sample: usize,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest {
            samples: 20,
            tol: 1e-9,
            seed: 0x5eed,
            half_width: 2.0,
            attempts_per_sample: 500,
        }
    }
}

impl ZeroTest {
    pub fn with_seed(mut self, seed: u64) -> ZeroTest {
        self.seed = seed;
        self
    }

    pub fn is_zero(&self, e: &Expr, domain: &SampleDomain) -> Result<Verdict, JetError> {
        self.is_zero_canon(&to_canon(e), domain)
    }

    pub fn is_zero_canon(&self, c: &Canon, domain: &SampleDomain) -> Result<Verdict, JetError> {
        let c = c.harmonize();
        if c.is_zero() {
            return Ok(Verdict::Zero);
        }
        self.sample(&c, domain)
    }

    /// Numeric tier only.
    pub fn sample(&self, c: &Canon, domain: &SampleDomain) -> Result<Verdict, JetError> {
        let mut vars: BTreeSet<Var> = c.variables();
        let mut params: BTreeSet<String> = c.params();
        for k in &domain.constraints {
            for e in [&k.lhs, &k.rhs] {
                vars.extend(to_canon(e).variables());
                params.extend(to_canon(e).params());
            }
        }
        params.retain(|p| !domain.fixed.params.contains_key(p));
        vars.retain(|v| !domain.fixed.vars.contains_key(v));

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let opts = EvalOptions::sampling();
        let mut accepted = 0usize;
        let budget = self.samples * self.attempts_per_sample;
        for _ in 0..budget {
            let mut at = domain.fixed.clone();
            for v in &vars {
                at.vars
                    .insert(*v, rng.gen_range(-self.half_width..=self.half_width));
            }
            for p in &params {
                at.params
                    .insert(p.clone(), rng.gen_range(-self.half_width..=self.half_width));
            }
            let admissible = domain
                .constraints
                .iter()
                .all(|k| matches!(k.holds(&at), Ok(true)));
            if !admissible {
                continue;
            }
            let value = match eval_canon(c, &at, &opts) {
                Ok(v) => v,
                Err(EvalError::Domain) => continue,
                Err(EvalError::Missing(name)) => return Err(JetError::UnboundSymbol(name)),
            };
            if value.abs() >= self.tol {
                return Ok(Verdict::NonZero(Witness {
                    point: at.describe(),
                    value,
                }));
            }
            accepted += 1;
            if accepted == self.samples {
                return Ok(Verdict::ProbablyZero);
            }
        }
        Err(JetError::DomainExhausted {
            wanted: self.samples,
            found: accepted,
        })
    }
}

/// Zero test with the default configuration and an unconstrained domain.
pub fn is_zero(e: &Expr) -> Result<Verdict, JetError> {
    ZeroTest::default().is_zero(e, &SampleDomain::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagorean_identity_is_exact_zero() {
        let z0 = Expr::z(0);
        let e = Expr::pow(Expr::sin(z0.clone()), 2) + Expr::pow(Expr::cos(z0), 2) - Expr::one();
        assert_eq!(is_zero(&e).unwrap(), Verdict::Zero);
    }

    #[test]
    fn small_perturbation_has_witness() {
        let e = Expr::z(1) - Expr::z(1) + Expr::ratio(1, 1000) * Expr::z(0);
        match is_zero(&e).unwrap() {
            Verdict::NonZero(w) => {
                let z0 = w.point.iter().find(|(n, _)| n == "z0").unwrap().1;
                assert!(z0 != 0.0);
                assert!((w.value - 1e-3 * z0).abs() < 1e-15);
            }
            other => panic!("expected nonzero, got {other:?}"),
        }
    }

    #[test]
    fn identity_outside_normal_form_is_probably_zero() {
        // arctan(x) + arctan(1/x) = pi/2 for x > 0; not visible to the
        // rewrite rules, so the numeric tier decides.
        let x = Expr::z(0);
        let e = Expr::arctan(x.clone()) + Expr::arctan(Expr::one() / x.clone());
        let c = to_canon(&e);
        let dom = SampleDomain::new().with_constraint(Constraint::new(
            x,
            Relation::Greater,
            Expr::zero(),
        ));
        let d = crate::jetexpr::deriv::partial_canon(&c, Var::Z(0));
        assert_eq!(
            ZeroTest::default().sample(&d, &dom).unwrap(),
            Verdict::ProbablyZero
        );
    }

    #[test]
    fn constraints_are_respected() {
        let eta = Expr::param("eta");
        let e = Expr::one() / eta.clone();
        let dom = SampleDomain::new().with_constraint(Constraint::new(
            eta,
            Relation::Greater,
            Expr::int(1),
        ));
        match ZeroTest::default().is_zero(&e, &dom).unwrap() {
            Verdict::NonZero(w) => assert!(w.point[0].1 > 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn impossible_domain_is_exhausted() {
        let x = Expr::z(0);
        let dom = SampleDomain::new().with_constraint(Constraint::new(
            x.clone(),
            Relation::Greater,
            Expr::int(5),
        ));
        let err = ZeroTest::default().is_zero(&x, &dom).unwrap_err();
        assert!(matches!(err, JetError::DomainExhausted { found: 0, .. }));
    }

    #[test]
    fn same_seed_same_witness() {
        let e = Expr::z(0) * Expr::z(1) + Expr::x();
        let a = ZeroTest::default()
            .with_seed(7)
            .is_zero(&e, &SampleDomain::new())
            .unwrap();
        let b = ZeroTest::default()
            .with_seed(7)
            .is_zero(&e, &SampleDomain::new())
            .unwrap();
        assert_eq!(a, b);
    }
}
