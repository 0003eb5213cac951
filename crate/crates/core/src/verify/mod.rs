//! Symbolic verdicts on concrete data: structure equations, the necessary
//! conditions on the coefficients of an evolution equation, the Gauss and
//! Codazzi equations, universality of the second fundamental form and the
//! associated linear problem.
//!
//! Every check reduces to "is this residual zero modulo the equation" and
//! is decided by [`ZeroTest`]. Results are collected in a [`Report`].

mod forms;
mod report;

use std::fmt;
use std::time::Instant;

use thiserror::Error;

pub use forms::{Coefficient, OneFormTriple, SecondFundamentalForm};
pub use report::{CheckEntry, Outcome, Report};

use crate::jetexpr::{
    partial_canon, to_canon, to_expr, Canon, EquationDef, Expr, JetError, SampleDomain, Scheme,
    Var, Verdict, ZeroTest,
};
use crate::parser::ProblemDef;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("this check needs an evolution equation, found a {0} equation")]
    WrongScheme(&'static str),
    #[error("no spectral parameter is declared")]
    MissingSpectral,
    #[error("no second fundamental form is given")]
    MissingSff,
}

/// `Δ₁₂, Δ₁₃, Δ₂₃` for `f₂₁ = η`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTriple {
    pub d12: Expr,
    pub d13: Expr,
    pub d23: Expr,
}

/// Dependence of `a, b, c` on the jet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Universality {
    /// Functions of `x` and `t` only.
    Universal,
    /// Depends on `z₀ … z_order` (or on time derivatives).
    JetDependent { order: u32 },
}

impl fmt::Display for Universality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universality::Universal => f.write_str("universal"),
            Universality::JetDependent { order } => write!(f, "jet-dependent(l={order})"),
        }
    }
}

/// 2×2 matrix of expressions.
pub type Mat2 = [[Expr; 2]; 2];

/// Selectable check families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Structure,
    Lemma,
    Gauss,
    Codazzi,
    Universality,
    ZeroCurvature,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::Structure,
        Check::Lemma,
        Check::Gauss,
        Check::Codazzi,
        Check::Universality,
        Check::ZeroCurvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Structure => "structure",
            Check::Lemma => "lemma",
            Check::Gauss => "gauss",
            Check::Codazzi => "codazzi",
            Check::Universality => "universality",
            Check::ZeroCurvature => "zero-curvature",
        }
    }

    pub fn from_name(name: &str) -> Option<Check> {
        Check::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl Check {
    /// Why the check cannot run on `problem`, if it cannot.
    pub fn inapplicable(self, problem: &ProblemDef) -> Option<&'static str> {
        match self {
            Check::Lemma if problem.equation.scheme() != Scheme::Evolution => {
                Some("needs an evolution equation")
            }
            Check::Gauss | Check::Codazzi | Check::Universality if problem.sff.is_none() => {
                Some("needs a second fundamental form")
            }
            _ => None,
        }
    }
}

fn c(e: &Expr) -> Canon {
    to_canon(e)
}

/// `Δ₁₂ = f₁₁f₂₂ − ηf₁₂`, `Δ₁₃ = f₁₁f₃₂ − f₃₁f₁₂`, `Δ₂₃ = ηf₃₂ − f₃₁f₂₂`.
pub fn delta(forms: &OneFormTriple, eta: &Expr) -> DeltaTriple {
    let f = forms.canon();
    let eta = c(eta);
    let d12 = f.f11.mul(&f.f22).sub(&eta.mul(&f.f12));
    let d13 = f.f11.mul(&f.f32).sub(&f.f31.mul(&f.f12));
    let d23 = eta.mul(&f.f32).sub(&f.f31.mul(&f.f22));
    DeltaTriple {
        d12: to_expr(&d12.harmonize()),
        d13: to_expr(&d13.harmonize()),
        d23: to_expr(&d23.harmonize()),
    }
}

struct CanonForms {
    f11: Canon,
    f12: Canon,
    f21: Canon,
    f22: Canon,
    f31: Canon,
    f32: Canon,
}

impl OneFormTriple {
    fn canon(&self) -> CanonForms {
        CanonForms {
            f11: c(&self.f11),
            f12: c(&self.f12),
            f21: c(&self.f21),
            f22: c(&self.f22),
            f31: c(&self.f31),
            f32: c(&self.f32),
        }
    }
}

/// Residuals of the structure equations in determinant form:
/// `D_t f₁₁ − D_x f₁₂ − Δ̂₂₃`, `D_x f₂₂ − D_t f₂₁ − Δ̂₁₃`,
/// `D_t f₃₁ − D_x f₃₂ + Δ̂₁₂`.
pub fn structure_residuals(
    forms: &OneFormTriple,
    eq: &EquationDef,
) -> Result<[Canon; 3], JetError> {
    let f = forms.canon();
    let d12 = f.f11.mul(&f.f22).sub(&f.f21.mul(&f.f12));
    let d13 = f.f11.mul(&f.f32).sub(&f.f31.mul(&f.f12));
    let d23 = f.f21.mul(&f.f32).sub(&f.f31.mul(&f.f22));
    let r1 = eq
        .total_t_canon(&f.f11)?
        .sub(&eq.total_x_canon(&f.f12)?)
        .sub(&d23);
    let r2 = eq
        .total_x_canon(&f.f22)?
        .sub(&eq.total_t_canon(&f.f21)?)
        .sub(&d13);
    let r3 = eq
        .total_t_canon(&f.f31)?
        .sub(&eq.total_x_canon(&f.f32)?)
        .add(&d12);
    Ok([r1, r2, r3])
}

/// Residuals of both Codazzi equations in general determinant form.
pub fn codazzi_residuals(
    forms: &OneFormTriple,
    eq: &EquationDef,
    sff: &SecondFundamentalForm,
) -> Result<[Canon; 2], JetError> {
    let f = forms.canon();
    let (a, b, cc) = (c(&sff.a), c(&sff.b), c(&sff.c));
    let d13 = f.f11.mul(&f.f32).sub(&f.f12.mul(&f.f31));
    let d23 = f.f21.mul(&f.f32).sub(&f.f22.mul(&f.f31));
    let (at, bt, ct) = (
        eq.total_t_canon(&a)?,
        eq.total_t_canon(&b)?,
        eq.total_t_canon(&cc)?,
    );
    let (ax, bx, cx) = (
        eq.total_x_canon(&a)?,
        eq.total_x_canon(&b)?,
        eq.total_x_canon(&cc)?,
    );
    let two = Canon::int(2);
    let amc = a.sub(&cc);
    let e1 = f
        .f11
        .mul(&at)
        .add(&f.f21.mul(&bt))
        .sub(&f.f12.mul(&ax))
        .sub(&f.f22.mul(&bx))
        .sub(&two.mul(&b).mul(&d13))
        .add(&amc.mul(&d23));
    let e2 = f
        .f11
        .mul(&bt)
        .add(&f.f21.mul(&ct))
        .sub(&f.f12.mul(&bx))
        .sub(&f.f22.mul(&cx))
        .add(&amc.mul(&d13))
        .add(&two.mul(&b).mul(&d23));
    Ok([e1, e2])
}

/// `M_x`, `M_t` with `dv = (M_x dx + M_t dt) v`,
/// `M = ½[[ω², ω¹ − ω³], [ω¹ + ω³, −ω²]]`.
pub fn linear_problem(forms: &OneFormTriple) -> (Mat2, Mat2) {
    let half = Expr::ratio(1, 2);
    let build = |w1: &Expr, w2: &Expr, w3: &Expr| -> Mat2 {
        let n = |e: Expr| crate::jetexpr::normalize(&(half.clone() * e));
        [
            [n(w2.clone()), n(w1.clone() - w3.clone())],
            [n(w1.clone() + w3.clone()), n(w2.clone().neg())],
        ]
    };
    (
        build(&forms.f11, &forms.f21, &forms.f31),
        build(&forms.f12, &forms.f22, &forms.f32),
    )
}

/// Entries of `D_x M_t − D_t M_x − [M_x, M_t]`.
pub fn zero_curvature_residuals(
    forms: &OneFormTriple,
    eq: &EquationDef,
) -> Result<[[Canon; 2]; 2], JetError> {
    let (mx, mt) = linear_problem(forms);
    let mx = mx.map(|r| r.map(|e| c(&e)));
    let mt = mt.map(|r| r.map(|e| c(&e)));
    let mut out: [[Canon; 2]; 2] = Default::default();
    for i in 0..2 {
        for j in 0..2 {
            let mut comm = Canon::zero();
            for k in 0..2 {
                comm = comm
                    .add(&mx[i][k].mul(&mt[k][j]))
                    .sub(&mt[i][k].mul(&mx[k][j]));
            }
            out[i][j] = eq
                .total_x_canon(&mt[i][j])?
                .sub(&eq.total_t_canon(&mx[i][j])?)
                .sub(&comm);
        }
    }
    Ok(out)
}

/// The two candidate second fundamental forms of the degenerate case
/// `c + (f₁₁/η)²a + 2(f₁₁/η)b = 0`: `b = ±1 − (f₁₁/η)a`,
/// `c = (f₁₁/η)²a ∓ 2f₁₁/η`. The first element takes the upper sign.
pub fn degenerate_case_candidates(f11: &Expr, eta: &Expr, a: &Expr) -> [SecondFundamentalForm; 2] {
    let r = f11.clone() / eta.clone();
    [Expr::one(), Expr::int(-1)].map(|s| {
        let b = s.clone() - r.clone() * a.clone();
        let cc = Expr::pow(r.clone(), 2) * a.clone() - Expr::int(2) * s * r.clone();
        SecondFundamentalForm::new(a.clone(), b, cc)
    })
}

pub fn classify_universality(sff: &SecondFundamentalForm) -> Universality {
    match sff.jet_order() {
        None => Universality::Universal,
        Some(order) => Universality::JetDependent { order },
    }
}

/// Runs checks with a fixed zero-test configuration and sampling domain.
#[derive(Clone, Debug, Default)]
pub struct Verifier {
    pub zero: ZeroTest,
    pub domain: SampleDomain,
    /// Label put on every entry.
    pub problem: String,
}

impl Verifier {
    pub fn new(problem: &str) -> Verifier {
        Verifier {
            problem: problem.to_string(),
            ..Verifier::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Verifier {
        self.zero.seed = seed;
        self
    }

    pub fn with_domain(mut self, domain: SampleDomain) -> Verifier {
        self.domain = domain;
        self
    }

    fn entry(
        &self,
        name: &str,
        outcome: Outcome,
        passed: bool,
        residual: Option<Expr>,
        start: Instant,
    ) -> CheckEntry {
        CheckEntry {
            problem: self.problem.clone(),
            name: name.to_string(),
            outcome,
            passed,
            residual,
            elapsed: start.elapsed(),
        }
    }

    /// Zero-test `residual`; the entry passes when the verdict matches
    /// `want_zero`.
    fn decide(&self, name: &str, residual: &Canon, want_zero: bool, start: Instant) -> CheckEntry {
        let r = residual.harmonize();
        match self.zero.is_zero_canon(&r, &self.domain) {
            Ok(v) => {
                let passed = v.is_zero() == want_zero;
                self.entry(name, Outcome::Verdict(v), passed, Some(to_expr(&r)), start)
            }
            Err(e) => self.entry(
                name,
                Outcome::Error(e.to_string()),
                false,
                Some(to_expr(&r)),
                start,
            ),
        }
    }

    fn error_entry(&self, name: &str, err: impl ToString, start: Instant) -> CheckEntry {
        self.entry(name, Outcome::Error(err.to_string()), false, None, start)
    }

    pub fn check_structure(&self, forms: &OneFormTriple, eq: &EquationDef) -> Report {
        let start = Instant::now();
        let mut report = Report::new();
        match structure_residuals(forms, eq) {
            Ok(rs) => {
                for (i, r) in rs.iter().enumerate() {
                    let t = Instant::now();
                    let mut e = self.decide(&format!("structure.{}", i + 1), r, true, t);
                    if i == 0 {
                        e.elapsed = start.elapsed();
                    }
                    report.push(e);
                }
            }
            Err(err) => {
                for i in 1..=3 {
                    report.push(self.error_entry(&format!("structure.{i}"), &err, start));
                }
            }
        }
        report
    }

    /// Necessary conditions on the coefficients of an `η`-pseudo-spherical
    /// evolution equation of order `k`. `f₁₁` and `f₃₁` are required to be
    /// free of `z₁ … z_k`.
    pub fn check_lemma_conditions(
        &self,
        forms: &OneFormTriple,
        eq: &EquationDef,
        eta: Option<&Expr>,
    ) -> Result<Report, VerifyError> {
        if eq.scheme() != Scheme::Evolution {
            return Err(VerifyError::WrongScheme(eq.scheme().name()));
        }
        let eta = eta.ok_or(VerifyError::MissingSpectral)?;
        let k = eq.order();
        let f = forms.canon();
        let mut report = Report::new();

        let free_of = |name: &str, e: &Canon, vars: &[u32]| -> CheckEntry {
            let start = Instant::now();
            let mut worst: Option<CheckEntry> = None;
            for &i in vars {
                let d = partial_canon(e, Var::Z(i));
                let entry = self.decide(name, &d, true, start);
                if !entry.passed {
                    return entry;
                }
                if worst.is_none()
                    || matches!(entry.outcome, Outcome::Verdict(Verdict::ProbablyZero))
                {
                    worst = Some(entry);
                }
            }
            let mut e = worst.unwrap_or_else(|| {
                self.entry(name, Outcome::Verdict(Verdict::Zero), true, None, start)
            });
            e.elapsed = start.elapsed();
            e
        };
        let upper: Vec<u32> = (1..=k).collect();
        report.push(free_of("lemma.f11-depends-on-z0-only", &f.f11, &upper));
        report.push(free_of("lemma.f31-depends-on-z0-only", &f.f31, &upper));
        report.push(free_of("lemma.f12-free-of-zk", &f.f12, &[k]));
        report.push(free_of("lemma.f22-free-of-zk-zk-1", &f.f22, &[k, k - 1]));
        report.push(free_of("lemma.f32-free-of-zk", &f.f32, &[k]));

        // f21 = η: equal to the spectral parameter, free of x, t and the jet,
        // and not identically zero.
        {
            let start = Instant::now();
            let name = "lemma.f21-is-eta";
            let mut residual = f.f21.sub(&c(eta));
            for v in f.f21.variables() {
                let d = partial_canon(&f.f21, v);
                residual = residual.add(&d.mul(&d));
            }
            let mut entry = self.decide(name, &residual, true, start);
            if entry.passed && f.f21.harmonize().is_zero() {
                entry.passed = false;
                entry.outcome = Outcome::Error("f21 vanishes identically".into());
            }
            report.push(entry);
        }
        {
            let start = Instant::now();
            let a = partial_canon(&f.f11, Var::Z(0));
            let b = partial_canon(&f.f31, Var::Z(0));
            let s = a.mul(&a).add(&b.mul(&b));
            report.push(self.decide("lemma.f11z0-f31z0-nonvanishing", &s, false, start));
        }
        Ok(report)
    }

    pub fn check_gauss(&self, sff: &SecondFundamentalForm) -> Report {
        let start = Instant::now();
        let (a, b, cc) = (c(&sff.a), c(&sff.b), c(&sff.c));
        let r = a.mul(&cc).sub(&b.mul(&b)).add(&Canon::one());
        let mut report = Report::new();
        report.push(self.decide("gauss", &r, true, start));
        report
    }

    pub fn check_codazzi(
        &self,
        forms: &OneFormTriple,
        eq: &EquationDef,
        sff: &SecondFundamentalForm,
    ) -> Report {
        let start = Instant::now();
        let mut report = Report::new();
        match codazzi_residuals(forms, eq, sff) {
            Ok(rs) => {
                for (i, r) in rs.iter().enumerate() {
                    report.push(self.decide(&format!("codazzi.{}", i + 1), r, true, start));
                }
            }
            Err(err) => {
                for i in 1..=2 {
                    report.push(self.error_entry(&format!("codazzi.{i}"), &err, start));
                }
            }
        }
        report
    }

    pub fn universality_entry(&self, sff: &SecondFundamentalForm) -> CheckEntry {
        let start = Instant::now();
        let u = classify_universality(sff);
        self.entry("universality", Outcome::Class(u), true, None, start)
    }

    /// The linear problem's curvature, entry by entry.
    pub fn check_zero_curvature(&self, forms: &OneFormTriple, eq: &EquationDef) -> Report {
        let start = Instant::now();
        let mut report = Report::new();
        match zero_curvature_residuals(forms, eq) {
            Ok(rs) => {
                for i in 0..2 {
                    for j in 0..2 {
                        let name = format!("zero-curvature.{}{}", i + 1, j + 1);
                        report.push(self.decide(&name, &rs[i][j], true, start));
                    }
                }
            }
            Err(err) => report.push(self.error_entry("zero-curvature", err, start)),
        }
        report
    }

    /// Run the selected checks on a problem with its bound parameters
    /// substituted. Checks whose inputs are absent are skipped.
    pub fn verify_problem(&self, problem: &ProblemDef, checks: &[Check]) -> Report {
        let p = problem.instantiate();
        let v = Verifier {
            zero: self.zero,
            domain: SampleDomain {
                constraints: [self.domain.constraints.clone(), p.constraints.clone()].concat(),
                fixed: self.domain.fixed.clone(),
            },
            problem: p.name.clone(),
        };
        let mut report = Report::new();
        for check in checks {
            if check.inapplicable(&p).is_some() {
                continue;
            }
            let part = match check {
                Check::Structure => v.check_structure(&p.forms, &p.equation),
                Check::Lemma => match v.check_lemma_conditions(&p.forms, &p.equation, p.eta()) {
                    Ok(r) => r,
                    Err(e) => {
                        let mut r = Report::new();
                        r.push(v.error_entry("lemma", e, Instant::now()));
                        r
                    }
                },
                Check::Gauss => v.check_gauss(p.sff.as_ref().expect("applicable")),
                Check::Codazzi => {
                    v.check_codazzi(&p.forms, &p.equation, p.sff.as_ref().expect("applicable"))
                }
                Check::Universality => {
                    let mut r = Report::new();
                    r.push(v.universality_entry(p.sff.as_ref().expect("applicable")));
                    r
                }
                Check::ZeroCurvature => v.check_zero_curvature(&p.forms, &p.equation),
            };
            report = report.merge(part);
        }
        report
    }
}

pub fn check_structure(forms: &OneFormTriple, eq: &EquationDef) -> Report {
    Verifier::default().check_structure(forms, eq)
}

pub fn check_gauss(sff: &SecondFundamentalForm) -> Report {
    Verifier::default().check_gauss(sff)
}

pub fn check_codazzi(
    forms: &OneFormTriple,
    eq: &EquationDef,
    sff: &SecondFundamentalForm,
) -> Report {
    Verifier::default().check_codazzi(forms, eq, sff)
}

pub fn check_lemma_conditions(
    forms: &OneFormTriple,
    eq: &EquationDef,
    eta: Option<&Expr>,
) -> Result<Report, VerifyError> {
    Verifier::default().check_lemma_conditions(forms, eq, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::normalize;
    use crate::parser::parse_expr;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    fn sg() -> EquationDef {
        EquationDef::hyperbolic(p("sin(u)")).unwrap()
    }

    fn sg7() -> OneFormTriple {
        OneFormTriple::new(
            p("0"),
            p("sin(u)/eta"),
            p("eta"),
            p("cos(u)/eta"),
            p("u_x"),
            p("0"),
        )
    }

    fn sg8() -> OneFormTriple {
        OneFormTriple::new(
            p("cos(u/2)"),
            p("cos(u/2)"),
            p("sin(u/2)"),
            p("-sin(u/2)"),
            p("u_x/2"),
            p("-u_t/2"),
        )
    }

    fn same(a: &Expr, b: &str) -> bool {
        normalize(&(a.clone() - p(b))).is_literal_zero()
    }

    #[test]
    fn delta_of_first_sine_gordon_forms() {
        let d = delta(&sg7(), &p("eta"));
        assert!(same(&d.d12, "-sin(u)"));
        assert!(same(&d.d13, "-u_x*sin(u)/eta"));
        assert!(same(&d.d23, "-u_x*cos(u)/eta"));
        let z = delta(&OneFormTriple::zero(), &p("eta"));
        assert!(z.d12.is_literal_zero() && z.d13.is_literal_zero() && z.d23.is_literal_zero());
    }

    #[test]
    fn sine_gordon_structure_is_exact() {
        for forms in [sg7(), sg8()] {
            let r = check_structure(&forms, &sg());
            assert_eq!(r.len(), 3);
            for e in r.entries() {
                assert_eq!(e.outcome, Outcome::Verdict(Verdict::Zero), "{}", e.name);
            }
        }
    }

    #[test]
    fn perturbed_f22_is_caught_by_first_residual() {
        let mut forms = sg7();
        forms.f22 = p("(cos(u) + 1/10)/eta");
        let r = check_structure(&forms, &sg());
        let e = r.get("structure.1").unwrap();
        assert!(!e.passed);
        assert!(e.outcome.detail().is_some());
        assert!(same(e.residual.as_ref().unwrap(), "u_x/(10*eta)"));
        // A constant shift of f22 drops out of D_x f22 - Δ13.
        assert!(r.get("structure.2").unwrap().passed);
        assert!(r.get("structure.3").unwrap().passed);
    }

    #[test]
    fn gauss_examples() {
        let sgf = SecondFundamentalForm::new(p("tan(u/2)"), p("0"), p("-cot(u/2)"));
        assert!(check_gauss(&sgf).all_passed());
        assert!(check_gauss(&SecondFundamentalForm::new(p("1"), p("0"), p("-1"))).all_passed());
        let bad = check_gauss(&SecondFundamentalForm::new(p("1"), p("0"), p("1")));
        let e = bad.get("gauss").unwrap();
        assert!(!e.passed);
        assert!(same(e.residual.as_ref().unwrap(), "2"));
    }

    #[test]
    fn codazzi_for_second_sine_gordon_forms() {
        let sgf = SecondFundamentalForm::new(p("tan(u/2)"), p("0"), p("-cot(u/2)"));
        let r = check_codazzi(&sg8(), &sg(), &sgf);
        for e in r.entries() {
            assert_eq!(e.outcome, Outcome::Verdict(Verdict::Zero), "{}", e.name);
        }
        let zero = SecondFundamentalForm::new(p("0"), p("0"), p("0"));
        let r = check_codazzi(&sg8(), &sg(), &zero);
        // Both residuals are linear in (a, b, c).
        assert!(r.all_passed());
        assert!(!check_gauss(&zero).all_passed());
    }

    #[test]
    fn universality_examples() {
        let s = |a: &str, b: &str, cc: &str| SecondFundamentalForm::new(p(a), p(b), p(cc));
        assert_eq!(
            classify_universality(&s("x^2 + t", "1", "x")),
            Universality::Universal
        );
        assert_eq!(
            classify_universality(&s("tan(u/2)", "0", "-cot(u/2)")),
            Universality::JetDependent { order: 0 }
        );
        assert_eq!(
            classify_universality(&s("u_xx", "0", "u_x")),
            Universality::JetDependent { order: 2 }
        );
        // Cancels after normalization.
        assert_eq!(
            classify_universality(&s("u - u + x", "1", "1")),
            Universality::Universal
        );
    }

    #[test]
    fn linear_problem_examples() {
        let (mx, mt) = linear_problem(&sg7());
        assert!(same(&mx[0][0], "eta/2"));
        assert!(same(&mx[0][1], "-u_x/2"));
        assert!(same(&mx[1][0], "u_x/2"));
        assert!(same(&mx[1][1], "-eta/2"));
        for m in [&mx, &mt] {
            assert!(normalize(&(m[0][0].clone() + m[1][1].clone())).is_literal_zero());
        }
        let (zx, zt) = linear_problem(&OneFormTriple::zero());
        assert!(zx
            .iter()
            .chain(zt.iter())
            .flatten()
            .all(|e| e.is_literal_zero()));
    }

    #[test]
    fn zero_curvature_matches_structure() {
        for forms in [sg7(), sg8()] {
            assert!(Verifier::default()
                .check_zero_curvature(&forms, &sg())
                .all_passed());
        }
        let mut bad = sg7();
        bad.f22 = p("(cos(u) + 1/10)/eta");
        assert!(!Verifier::default()
            .check_zero_curvature(&bad, &sg())
            .all_passed());
    }

    #[test]
    fn degenerate_case_candidates_satisfy_gauss() {
        let [plus, minus] = degenerate_case_candidates(&p("u"), &p("eta"), &p("exp(x)*u_x"));
        for s in [&plus, &minus] {
            assert!(check_gauss(s).all_passed());
            let rel = s.c.clone()
                + Expr::pow(p("u/eta"), 2) * s.a.clone()
                + Expr::int(2) * p("u/eta") * s.b.clone();
            assert!(normalize(&rel).is_literal_zero());
        }
        assert_ne!(normalize(&plus.b), normalize(&minus.b));
    }

    #[test]
    fn lemma_rejects_hyperbolic() {
        let err = check_lemma_conditions(&sg7(), &sg(), Some(&p("eta"))).unwrap_err();
        assert_eq!(err, VerifyError::WrongScheme("hyperbolic"));
    }
}
