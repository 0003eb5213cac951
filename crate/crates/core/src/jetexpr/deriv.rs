//! Partial derivatives and the total derivative operators `D_x`, `D_t`.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use super::canon::{Atom, Canon, Poly};
use super::convert::{canonical, to_canon, to_expr};
use super::expr::{Expr, Rational, Var};
use super::JetError;

/// Default bound on the jet order any derivative may reach.
pub const DEFAULT_MAX_ORDER: u32 = 12;

/// Apply a derivation to `c`. `field` gives the derivative of each
/// coordinate or jet variable; kernels follow the chain rule.
pub fn derive(
    c: &Canon,
    field: &mut dyn FnMut(Var) -> Result<Canon, JetError>,
) -> Result<Canon, JetError> {
    let mut memo: BTreeMap<Atom, Canon> = BTreeMap::new();
    derive_memo(c, field, &mut memo)
}

fn derive_memo(
    c: &Canon,
    field: &mut dyn FnMut(Var) -> Result<Canon, JetError>,
    memo: &mut BTreeMap<Atom, Canon>,
) -> Result<Canon, JetError> {
    // d(N / Π f^k) = (dN − N Σ k f'/f) / Π f^k
    let num = Canon::from_poly(c.num().clone());
    let den_inv = Canon::one().div(&den_canon(c));
    let mut out = derive_poly(c.num(), field, memo)?.mul(&den_inv);
    for (f, k) in c.den() {
        let df = derive_poly(f, field, memo)?;
        if df.is_zero() {
            continue;
        }
        let fk = Canon::from_poly(f.clone());
        let term = num
            .mul(&df)
            .scale(&Rational::from_integer((*k).into()))
            .mul(&den_inv)
            .div(&fk);
        out = out.sub(&term);
    }
    Ok(out)
}

fn den_canon(c: &Canon) -> Canon {
    let mut d = Canon::one();
    for (f, k) in c.den() {
        d = d.mul(&Canon::from_poly(f.clone()).pow(*k));
    }
    d
}

fn derive_poly(
    p: &Poly,
    field: &mut dyn FnMut(Var) -> Result<Canon, JetError>,
    memo: &mut BTreeMap<Atom, Canon>,
) -> Result<Canon, JetError> {
    let mut out = Canon::zero();
    for (m, coef) in p.terms() {
        // Product rule over the factors of the monomial.
        let factors: Vec<(&Atom, u32)> = m.powers().iter().map(|(a, e)| (a, *e)).collect();
        for (idx, (a, e)) in factors.iter().enumerate() {
            let da = derive_atom(a, field, memo)?;
            if da.is_zero() {
                continue;
            }
            let mut term = Canon::constant(coef * Rational::from_integer((*e).into()));
            for (jdx, (b, f)) in factors.iter().enumerate() {
                let power = if jdx == idx { f - 1 } else { *f };
                if power > 0 {
                    term = term.mul(&Canon::atom((*b).clone()).pow(power));
                }
            }
            if let Some(arg) = m.exp_arg() {
                term = term.mul(&Canon::exp_of(arg.clone()));
            }
            out = out.add(&term.mul(&da));
        }
        if let Some(arg) = m.exp_arg() {
            let darg = derive_memo(arg, field, memo)?;
            if !darg.is_zero() {
                let mut term = Canon::constant(coef.clone());
                for (b, f) in &factors {
                    term = term.mul(&Canon::atom((*b).clone()).pow(*f));
                }
                term = term.mul(&Canon::exp_of(arg.clone()));
                out = out.add(&term.mul(&darg));
            }
        }
    }
    Ok(out)
}

fn derive_atom(
    a: &Atom,
    field: &mut dyn FnMut(Var) -> Result<Canon, JetError>,
    memo: &mut BTreeMap<Atom, Canon>,
) -> Result<Canon, JetError> {
    if let Some(d) = memo.get(a) {
        return Ok(d.clone());
    }
    let d = match a {
        Atom::Var(v) => field(*v)?,
        Atom::Param(_) => Canon::zero(),
        Atom::Sin(arg) => {
            let da = derive_memo(arg, field, memo)?;
            Canon::cos_of(arg.as_ref().clone()).mul(&da)
        }
        Atom::Cos(arg) => {
            let da = derive_memo(arg, field, memo)?;
            Canon::sin_of(arg.as_ref().clone()).mul(&da).neg()
        }
        Atom::Ln(arg) => {
            let da = derive_memo(arg, field, memo)?;
            da.div(arg)
        }
        Atom::Atan(arg) => {
            let da = derive_memo(arg, field, memo)?;
            da.div(&Canon::one().add(&arg.pow(2)))
        }
        Atom::Sqrt(p) => {
            let dp = derive_poly(p, field, memo)?;
            // d sqrt(p) = dp / (2 sqrt(p))
            let root = Canon::atom(a.clone());
            dp.div(&root.scale(&Rational::from_integer(2.into())))
        }
    };
    memo.insert(a.clone(), d.clone());
    Ok(d)
}

/// Partial derivative of a canonical form with respect to one variable.
pub fn partial_canon(c: &Canon, v: Var) -> Canon {
    derive(c, &mut |w| {
        Ok(if w == v { Canon::one() } else { Canon::zero() })
    })
    .expect("partial derivatives cannot overflow")
}

/// Exact partial derivative, normalized.
pub fn partial(e: &Expr, v: Var) -> Expr {
    to_expr(&partial_canon(&canonical(e), v).harmonize())
}

/// Partial derivative with the variable given by name (`u`, `u_xx`, `z3`,
/// `u_t`, `x`, `t`).
pub fn partial_by_name(e: &Expr, name: &str) -> Result<Expr, JetError> {
    let v = crate::parser::resolve_var(name)
        .ok_or_else(|| JetError::UnknownVariable(name.to_string()))?;
    Ok(partial(e, v))
}

/// How the unknown's time derivatives are eliminated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// `u_t = F(z₀, …, z_k)`.
    Evolution,
    /// `u_xt = F(z₀, z₁, w₁)`; coordinates are `z_i` and `w_j`.
    Hyperbolic,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Evolution => "evolution",
            Scheme::Hyperbolic => "hyperbolic",
        }
    }
}

/// A PDE in reduced form with its jet-order bookkeeping.
#[derive(Clone, Debug)]
pub struct EquationDef {
    scheme: Scheme,
    order: u32,
    rhs: Expr,
    rhs_canon: Canon,
    max_order: u32,
    // D_x^i F (evolution) or D_t^j F (hyperbolic), filled on demand.
    prolongations: Arc<Mutex<Vec<Canon>>>,
    // D_x^i F for the hyperbolic scheme.
    x_prolongations: Arc<Mutex<Vec<Canon>>>,
}

impl EquationDef {
    /// Evolution equation `u_t = F(z₀…z_k)`; requires `F_{z_k} ≢ 0`.
    pub fn evolution(order: u32, rhs: Expr) -> Result<EquationDef, JetError> {
        let eq = EquationDef::build(Scheme::Evolution, order, rhs);
        for v in eq.rhs_canon.variables() {
            match v {
                Var::Z(i) if i <= order => {}
                other => {
                    return Err(JetError::SchemeBound {
                        var: other.short_name(),
                        scheme: "evolution",
                        bound: order,
                    })
                }
            }
        }
        if partial_canon(&eq.rhs_canon, Var::Z(order))
            .harmonize()
            .is_zero()
        {
            return Err(JetError::DegenerateOrder(order));
        }
        Ok(eq)
    }

    /// Hyperbolic equation `u_xt = F(z₀, z₁, w₁)`.
    pub fn hyperbolic(rhs: Expr) -> Result<EquationDef, JetError> {
        let eq = EquationDef::build(Scheme::Hyperbolic, 2, rhs);
        for v in eq.rhs_canon.variables() {
            if !matches!(v, Var::Z(0) | Var::Z(1) | Var::W(1)) {
                return Err(JetError::SchemeBound {
                    var: v.short_name(),
                    scheme: "hyperbolic",
                    bound: 1,
                });
            }
        }
        Ok(eq)
    }

    fn build(scheme: Scheme, order: u32, rhs: Expr) -> EquationDef {
        let rhs_canon = to_canon(&rhs);
        EquationDef {
            scheme,
            order,
            rhs_canon: rhs_canon.clone(),
            rhs,
            max_order: DEFAULT_MAX_ORDER,
            prolongations: Arc::new(Mutex::new(vec![rhs_canon.clone()])),
            x_prolongations: Arc::new(Mutex::new(vec![rhs_canon])),
        }
    }

    pub fn with_max_order(mut self, max_order: u32) -> EquationDef {
        self.max_order = max_order;
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn rhs_canon(&self) -> &Canon {
        &self.rhs_canon
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// Largest jet order the scheme admits in user-supplied coefficients.
    pub fn coefficient_bound(&self) -> u32 {
        match self.scheme {
            Scheme::Evolution => self.order,
            Scheme::Hyperbolic => 1,
        }
    }

    /// Check that `e` only uses variables the scheme admits.
    pub fn check_bound(&self, e: &Expr) -> Result<(), JetError> {
        for v in e.variables() {
            let ok = match (self.scheme, v) {
                (_, Var::X | Var::T) => true,
                (Scheme::Evolution, Var::Z(i)) => i <= self.order,
                (Scheme::Evolution, Var::W(_)) => false,
                (Scheme::Hyperbolic, Var::Z(i)) => i <= 1,
                (Scheme::Hyperbolic, Var::W(j)) => j <= 1,
            };
            if !ok {
                return Err(JetError::SchemeBound {
                    var: v.short_name(),
                    scheme: self.scheme.name(),
                    bound: self.coefficient_bound(),
                });
            }
        }
        Ok(())
    }

    fn overflow(&self, order: u32) -> JetError {
        JetError::OrderOverflow {
            order,
            max: self.max_order,
        }
    }

    /// `D_x^i F`.
    fn x_prolongation(&self, i: u32) -> Result<Canon, JetError> {
        let cache = match self.scheme {
            Scheme::Evolution => &self.prolongations,
            Scheme::Hyperbolic => &self.x_prolongations,
        };
        if let Some(c) = cache.lock().unwrap().get(i as usize) {
            return Ok(c.clone());
        }
        let prev = self.x_prolongation(i - 1)?;
        let next = self.total_x_canon(&prev)?;
        let mut guard = cache.lock().unwrap();
        if guard.len() == i as usize {
            guard.push(next.clone());
        }
        Ok(next)
    }

    /// `D_t^j F` in the hyperbolic scheme.
    fn t_prolongation(&self, j: u32) -> Result<Canon, JetError> {
        if let Some(c) = self.prolongations.lock().unwrap().get(j as usize) {
            return Ok(c.clone());
        }
        let prev = self.t_prolongation(j - 1)?;
        let next = self.total_t_canon(&prev)?;
        let mut guard = self.prolongations.lock().unwrap();
        if guard.len() == j as usize {
            guard.push(next.clone());
        }
        Ok(next)
    }

    fn dx_var(&self, v: Var) -> Result<Canon, JetError> {
        match (self.scheme, v) {
            (_, Var::X) => Ok(Canon::one()),
            (_, Var::T) => Ok(Canon::zero()),
            (_, Var::Z(i)) => {
                if i + 1 > self.max_order {
                    Err(self.overflow(i + 1))
                } else {
                    Ok(Canon::var(Var::Z(i + 1)))
                }
            }
            (Scheme::Evolution, Var::W(_)) => Err(JetError::SchemeBound {
                var: v.short_name(),
                scheme: "evolution",
                bound: self.order,
            }),
            // u_{x t^j} = D_t^{j-1} F
            (Scheme::Hyperbolic, Var::W(j)) => self.t_prolongation(j - 1),
        }
    }

    fn dt_var(&self, v: Var) -> Result<Canon, JetError> {
        match (self.scheme, v) {
            (_, Var::X) => Ok(Canon::zero()),
            (_, Var::T) => Ok(Canon::one()),
            (Scheme::Evolution, Var::Z(i)) => {
                if i + self.order > self.max_order {
                    Err(self.overflow(i + self.order))
                } else {
                    self.x_prolongation(i)
                }
            }
            (Scheme::Evolution, Var::W(_)) => Err(JetError::SchemeBound {
                var: v.short_name(),
                scheme: "evolution",
                bound: self.order,
            }),
            (Scheme::Hyperbolic, Var::Z(0)) => Ok(Canon::var(Var::W(1))),
            // u_{x^i t} = D_x^{i-1} F
            (Scheme::Hyperbolic, Var::Z(i)) => {
                if i + 1 > self.max_order {
                    Err(self.overflow(i + 1))
                } else {
                    self.x_prolongation(i - 1)
                }
            }
            (Scheme::Hyperbolic, Var::W(j)) => {
                if j + 1 > self.max_order {
                    Err(self.overflow(j + 1))
                } else {
                    Ok(Canon::var(Var::W(j + 1)))
                }
            }
        }
    }

    pub fn total_x_canon(&self, c: &Canon) -> Result<Canon, JetError> {
        derive(c, &mut |v| self.dx_var(v))
    }

    pub fn total_t_canon(&self, c: &Canon) -> Result<Canon, JetError> {
        derive(c, &mut |v| self.dt_var(v))
    }

    /// `D_x e`, normalized.
    pub fn total_x(&self, e: &Expr) -> Result<Expr, JetError> {
        Ok(to_expr(&self.total_x_canon(&canonical(e))?.harmonize()))
    }

    /// `D_t e` with time derivatives eliminated through the equation.
    pub fn total_t(&self, e: &Expr) -> Result<Expr, JetError> {
        Ok(to_expr(&self.total_t_canon(&canonical(e))?.harmonize()))
    }

    /// Substitute parameter values into the right-hand side.
    pub fn substitute(&self, lookup: &dyn Fn(&str) -> Option<Expr>) -> EquationDef {
        let rhs = self.rhs.substitute(lookup);
        let mut eq = EquationDef::build(self.scheme, self.order, rhs);
        eq.max_order = self.max_order;
        eq
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::convert::normalize;

    fn heat() -> EquationDef {
        EquationDef::evolution(2, Expr::z(2)).unwrap()
    }

    fn sine_gordon() -> EquationDef {
        EquationDef::hyperbolic(Expr::sin(Expr::z(0))).unwrap()
    }

    #[test]
    fn partial_examples() {
        let z0 = Expr::z(0);
        assert_eq!(
            partial(&Expr::sin(z0.clone()), Var::Z(0)),
            normalize(&Expr::cos(z0.clone()))
        );
        let e = Expr::pow(Expr::z(1), 2) / Expr::int(2);
        assert_eq!(partial(&e, Var::Z(1)), Expr::z(1));
        let e = Expr::param("eta") * z0 + Expr::z(2) * Expr::z(1);
        assert_eq!(partial(&e, Var::Z(2)), Expr::z(1));
    }

    #[test]
    fn partial_by_name_rejects_unknown() {
        assert!(matches!(
            partial_by_name(&Expr::z(0), "q7"),
            Err(JetError::UnknownVariable(_))
        ));
        assert_eq!(partial_by_name(&Expr::z(2), "u_xx").unwrap(), Expr::one());
    }

    #[test]
    fn total_x_examples() {
        let eq = heat();
        assert_eq!(eq.total_x(&Expr::z(0)).unwrap(), Expr::z(1));
        let got = eq.total_x(&Expr::sin(Expr::z(0))).unwrap();
        assert_eq!(got, normalize(&(Expr::z(1) * Expr::cos(Expr::z(0)))));
    }

    #[test]
    fn total_t_evolution() {
        let eq = heat();
        assert_eq!(eq.total_t(&Expr::z(0)).unwrap(), Expr::z(2));
        assert_eq!(eq.total_t(&Expr::z(1)).unwrap(), Expr::z(3));
    }

    #[test]
    fn total_t_hyperbolic_uses_equation() {
        let eq = sine_gordon();
        assert_eq!(
            eq.total_t(&Expr::z(1)).unwrap(),
            normalize(&Expr::sin(Expr::z(0)))
        );
        assert_eq!(eq.total_t(&Expr::z(0)).unwrap(), Expr::w(1));
        assert_eq!(
            eq.total_x(&Expr::w(1)).unwrap(),
            normalize(&Expr::sin(Expr::z(0)))
        );
    }

    #[test]
    fn order_overflow_is_reported() {
        let eq = heat().with_max_order(4);
        assert!(matches!(
            eq.total_t(&Expr::z(3)),
            Err(JetError::OrderOverflow { order: 5, max: 4 })
        ));
        assert!(eq.total_x(&Expr::z(4)).is_err());
    }

    #[test]
    fn evolution_requires_top_order_dependence() {
        assert!(matches!(
            EquationDef::evolution(3, Expr::z(2)),
            Err(JetError::DegenerateOrder(3))
        ));
        assert!(EquationDef::evolution(2, Expr::z(3)).is_err());
    }

    #[test]
    fn sine_gordon_delta13_example() {
        // D_x (cos u / eta) = -u_x sin u / eta
        let eq = sine_gordon();
        let eta = Expr::param("eta");
        let f22 = Expr::cos(Expr::z(0)) / eta.clone();
        let want = normalize(&(Expr::z(1) * Expr::sin(Expr::z(0)) / eta).neg());
        assert_eq!(eq.total_x(&f22).unwrap(), want);
    }
}
