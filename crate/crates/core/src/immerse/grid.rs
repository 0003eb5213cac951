use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::ImmerseError;
use crate::jetexpr::{
    canonical, partial_canon, to_expr, Canon, Compiled, EquationDef, Expr, Scheme, Slot, Var,
};

/// Uniform rectangular grid over `[x0, x1] × [t0, t1]`, both ends included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub t0: f64,
    pub t1: f64,
    pub nx: usize,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(
        x: (f64, f64),
        t: (f64, f64),
        nx: usize,
        nt: usize,
    ) -> Result<GridSpec, ImmerseError> {
        let spec = GridSpec {
            x0: x.0,
            x1: x.1,
            t0: t.0,
            t1: t.1,
            nx,
            nt,
        };
        if nx == 0 || nt == 0 {
            return Err(ImmerseError::InvalidGrid(
                "at least one node per direction".into(),
            ));
        }
        if !(x.0.is_finite() && x.1.is_finite() && t.0.is_finite() && t.1.is_finite()) {
            return Err(ImmerseError::InvalidGrid("non-finite bounds".into()));
        }
        if (nx > 1 && x.1 <= x.0) || (nt > 1 && t.1 <= t.0) {
            return Err(ImmerseError::InvalidGrid("empty rectangle".into()));
        }
        Ok(spec)
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hx(&self) -> f64 {
        if self.nx > 1 {
            (self.x1 - self.x0) / (self.nx - 1) as f64
        } else {
            0.0
        }
    }

    pub fn ht(&self) -> f64 {
        if self.nt > 1 {
            (self.t1 - self.t0) / (self.nt - 1) as f64
        } else {
            0.0
        }
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + ix as f64 * self.hx()
    }

    pub fn t(&self, it: usize) -> f64 {
        self.t0 + it as f64 * self.ht()
    }

    /// Row-major index, `t` slowest.
    pub fn idx(&self, ix: usize, it: usize) -> usize {
        it * self.nx + ix
    }

    /// Same rectangle with every cell halved.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            nx: 2 * self.nx - 1,
            nt: 2 * self.nt - 1,
            ..*self
        }
    }

    /// Inverse of [`GridSpec::refined`]; requires odd node counts.
    pub fn coarsened(&self) -> Option<GridSpec> {
        (self.nx % 2 == 1 && self.nt % 2 == 1).then(|| GridSpec {
            nx: self.nx.div_ceil(2),
            nt: self.nt.div_ceil(2),
            ..*self
        })
    }
}

/// Where the samples came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    FiniteDifference,
}

/// Samples of a solution and its jet on a grid.
#[derive(Clone, Debug)]
pub struct SolutionGrid {
    pub spec: GridSpec,
    pub provenance: Provenance,
    /// Jet variable values per node, including `z0 = u`.
    pub jets: BTreeMap<Var, Vec<f64>>,
    /// Largest PDE residual over the audited nodes.
    pub residual: f64,
}

impl SolutionGrid {
    pub fn u(&self) -> &[f64] {
        &self.jets[&Var::Z(0)]
    }

    pub fn value(&self, v: Var, ix: usize, it: usize) -> Option<f64> {
        match v {
            Var::X => Some(self.spec.x(ix)),
            Var::T => Some(self.spec.t(it)),
            _ => self.jets.get(&v).map(|s| s[self.spec.idx(ix, it)]),
        }
    }
}

/// Evaluate a canonical expression in `x`, `t` and sampled jets at every node.
pub(crate) fn evaluate_on_grid(
    c: &Canon,
    spec: &GridSpec,
    jets: &BTreeMap<Var, Vec<f64>>,
) -> Result<Vec<f64>, ImmerseError> {
    let prog = Compiled::new(c);
    let mut sources: Vec<Option<&Vec<f64>>> = Vec::new();
    let mut coord: Vec<Option<Var>> = Vec::new();
    for s in prog.slots() {
        match s {
            Slot::Var(v @ (Var::X | Var::T)) => {
                sources.push(None);
                coord.push(Some(*v));
            }
            Slot::Var(v) => {
                let data = jets
                    .get(v)
                    .ok_or_else(|| ImmerseError::MissingSymbol(v.name()))?;
                sources.push(Some(data));
                coord.push(None);
            }
            Slot::Param(p) => return Err(ImmerseError::MissingSymbol(p.clone())),
        }
    }
    let out: Vec<f64> = (0..spec.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; sources.len()],
            |inputs, k| {
                let (ix, it) = (k % spec.nx, k / spec.nx);
                for (slot, (src, cv)) in sources.iter().zip(&coord).enumerate() {
                    inputs[slot] = match (src, cv) {
                        (Some(data), _) => data[k],
                        (None, Some(Var::X)) => spec.x(ix),
                        (None, _) => spec.t(it),
                    };
                }
                prog.eval(inputs)
            },
        )
        .collect();
    Ok(out)
}

/// Jet variables a set of expressions needs.
pub fn needed_jets<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    out.insert(Var::Z(0));
    for e in exprs {
        out.extend(e.variables().into_iter().filter(|v| v.is_jet()));
    }
    out
}

/// Sample a closed-form solution `u(x, t)` with exact derivatives, and
/// audit the PDE residual at every node.
pub fn sample_closed_form(
    u: &Expr,
    eq: &EquationDef,
    jets: &BTreeSet<Var>,
    spec: &GridSpec,
    tol: f64,
) -> Result<SolutionGrid, ImmerseError> {
    if let Some(p) = u.params().into_iter().next() {
        return Err(ImmerseError::MissingSymbol(p));
    }
    if let Some(v) = u.variables().into_iter().find(|v| v.is_jet()) {
        return Err(ImmerseError::InvalidSolution(format!(
            "closed-form solution may only use x and t, found {}",
            v.name()
        )));
    }
    let uc = canonical(u);
    let dx = |n: u32| (0..n).fold(uc.clone(), |acc, _| partial_canon(&acc, Var::X));
    let dt = |c: &Canon, n: u32| (0..n).fold(c.clone(), |acc, _| partial_canon(&acc, Var::T));
    let symbolic = |v: Var| -> Result<Canon, ImmerseError> {
        match (eq.scheme(), v) {
            (_, Var::Z(i)) => Ok(dx(i)),
            (Scheme::Hyperbolic, Var::W(j)) => Ok(dt(&uc, j)),
            (Scheme::Evolution, Var::W(_)) => Err(ImmerseError::InvalidSolution(
                "evolution equations have no time-derivative jets".into(),
            )),
            _ => unreachable!("coordinates are not jets"),
        }
    };
    let empty = BTreeMap::new();
    let mut samples = BTreeMap::new();
    for v in jets {
        samples.insert(*v, evaluate_on_grid(&symbolic(*v)?, spec, &empty)?);
    }

    // Residual: the equation with u and its derivatives substituted.
    let mut rhs_subs = BTreeMap::new();
    for v in eq.rhs().variables().into_iter().filter(|v| v.is_jet()) {
        rhs_subs.insert(v, to_expr(&symbolic(v)?));
    }
    let rhs = canonical(&eq.rhs().substitute_vars(&|v| rhs_subs.get(&v).cloned()));
    let lhs = match eq.scheme() {
        Scheme::Hyperbolic => dt(&dx(1), 1),
        Scheme::Evolution => dt(&uc, 1),
    };
    let residual_c = lhs.sub(&rhs);
    let residual = evaluate_on_grid(&residual_c, spec, &empty)?
        .into_iter()
        .fold(0.0f64, |m, r| {
            if r.is_finite() {
                m.max(r.abs())
            } else {
                f64::INFINITY
            }
        });
    if !(residual <= tol) {
        return Err(ImmerseError::ResidualTooLarge { residual, tol });
    }
    Ok(SolutionGrid {
        spec: *spec,
        provenance: Provenance::ClosedForm,
        jets: samples,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::sine_gordon_kink;
    use crate::parser::parse_expr;

    fn kink(alpha: i64) -> Expr {
        sine_gordon_kink().substitute(&|p| (p == "alpha").then(|| Expr::int(alpha)))
    }

    fn sg() -> EquationDef {
        EquationDef::hyperbolic(parse_expr("sin(u)").unwrap()).unwrap()
    }

    #[test]
    fn kink_passes_through_pi_at_origin() {
        let spec = GridSpec::new((0.0, 0.0), (0.0, 0.0), 1, 1).unwrap();
        let jets = needed_jets([]);
        let g = sample_closed_form(&kink(1), &sg(), &jets, &spec, 1e-10).unwrap();
        assert!((g.u()[0] - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn kink_solves_sine_gordon_on_grid() {
        let spec = GridSpec::new((-3.0, 3.0), (-3.0, 3.0), 101, 101).unwrap();
        let jets = needed_jets([&Expr::z(1), &Expr::w(1)]);
        let g = sample_closed_form(&kink(1), &sg(), &jets, &spec, 1e-10).unwrap();
        assert!(g.residual < 1e-10);
        // u_x = 2α sech(αx + t/α)
        let (ix, it) = (70, 40);
        let s = spec.x(ix) + spec.t(it);
        let want = 2.0 / s.cosh();
        assert!((g.value(Var::Z(1), ix, it).unwrap() - want).abs() < 1e-12);
        assert!((g.value(Var::W(1), ix, it).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn non_solution_is_rejected() {
        let spec = GridSpec::new((0.0, 1.0), (0.0, 1.0), 5, 5).unwrap();
        let u = parse_expr("x*t").unwrap();
        let err = sample_closed_form(&u, &sg(), &needed_jets([]), &spec, 1e-8).unwrap_err();
        assert!(matches!(err, ImmerseError::ResidualTooLarge { .. }));
    }

    #[test]
    fn refinement_round_trip() {
        let spec = GridSpec::new((0.0, 1.0), (2.0, 3.0), 11, 6).unwrap();
        let fine = spec.refined();
        assert_eq!((fine.nx, fine.nt), (21, 11));
        assert!((fine.x(2) - spec.x(1)).abs() < 1e-15);
        assert_eq!(fine.coarsened(), Some(spec));
    }
}
