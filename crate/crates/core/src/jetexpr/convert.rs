//! Conversion between expression trees and canonical form.

use num_traits::{One, Signed};

use super::canon::{Atom, Canon, Monomial, Poly};
use super::expr::{Expr, Func, Node};

/// Canonical form of an expression (no multiple-angle harmonization).
pub fn to_canon(e: &Expr) -> Canon {
    match e.node() {
        Node::Const(c) => Canon::constant(c.clone()),
        Node::Var(v) => Canon::var(*v),
        Node::Param(p) => Canon::param(p),
        Node::Apply(f, a) => apply(*f, to_canon(a)),
        Node::Add(items) => items
            .iter()
            .fold(Canon::zero(), |acc, x| acc.add(&to_canon(x))),
        Node::Mul(items) => {
            let mut acc = Canon::one();
            for x in items {
                acc = acc.mul(&to_canon(x));
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        Node::Div(a, b) => to_canon(a).mul(&reciprocal(b)),
        Node::Pow(a, n) if *n >= 0 => to_canon(a).pow(*n as u32),
        Node::Pow(a, n) => reciprocal(a).pow(n.unsigned_abs()),
    }
}

/// Reciprocal that follows the multiplicative structure of `e`, so a
/// printed denominator `f^2*g` re-enters as the factors `f` and `g`.
fn reciprocal(e: &Expr) -> Canon {
    match e.node() {
        Node::Mul(items) => items
            .iter()
            .fold(Canon::one(), |acc, x| acc.mul(&reciprocal(x))),
        Node::Pow(a, n) if *n >= 0 => reciprocal(a).pow(*n as u32),
        Node::Pow(a, n) => to_canon(a).pow(n.unsigned_abs()),
        Node::Div(a, b) => to_canon(b).mul(&reciprocal(a)),
        _ => to_canon(e).recip(),
    }
}

pub fn apply(f: Func, arg: Canon) -> Canon {
    match f {
        Func::Sin => Canon::sin_of(arg),
        Func::Cos => Canon::cos_of(arg),
        Func::Tan => Canon::tan_of(arg),
        Func::Cot => Canon::cot_of(arg),
        Func::Exp => Canon::exp_of(arg),
        Func::Ln => Canon::ln_of(arg),
        Func::Sqrt => Canon::sqrt_of(arg),
        Func::Arctan => Canon::atan_of(arg),
    }
}

/// Expression tree for a canonical form. Converting the result back with
/// [`to_canon`] reproduces `c` exactly.
pub fn to_expr(c: &Canon) -> Expr {
    let num = poly_to_expr(c.num());
    if c.den().is_empty() {
        return num;
    }
    let factors: Vec<Expr> = c
        .den()
        .iter()
        .map(|(p, k)| {
            let f = poly_to_expr(p);
            if *k == 1 {
                f
            } else {
                Expr::pow(f, *k as i32)
            }
        })
        .collect();
    Expr::div(num, Expr::product(factors))
}

pub fn poly_to_expr(p: &Poly) -> Expr {
    // Leading (largest) monomial first.
    let terms: Vec<Expr> = p
        .terms()
        .iter()
        .rev()
        .map(|(m, c)| {
            let mut factors = Vec::new();
            let mono = monomial_to_expr(m);
            if mono.is_empty() {
                return Expr::constant(c.clone());
            }
            if c.is_negative() && (-c.clone()).is_one() {
                factors.push(Expr::int(-1));
            } else if !c.is_one() {
                factors.push(Expr::constant(c.clone()));
            }
            factors.extend(mono);
            Expr::product(factors)
        })
        .collect();
    Expr::sum(terms)
}

fn monomial_to_expr(m: &Monomial) -> Vec<Expr> {
    let mut out = Vec::new();
    for (a, &k) in m.powers().iter() {
        let base = atom_to_expr(a);
        out.push(if k == 1 {
            base
        } else {
            Expr::pow(base, k as i32)
        });
    }
    if let Some(arg) = m.exp_arg() {
        out.push(Expr::exp(to_expr(arg)));
    }
    out
}

fn atom_to_expr(a: &Atom) -> Expr {
    match a {
        Atom::Var(v) => Expr::var(*v),
        Atom::Param(p) => Expr::param(p),
        Atom::Sin(arg) => Expr::sin(to_expr(arg)),
        Atom::Cos(arg) => Expr::cos(to_expr(arg)),
        Atom::Ln(arg) => Expr::ln(to_expr(arg)),
        Atom::Atan(arg) => Expr::arctan(to_expr(arg)),
        Atom::Sqrt(p) => Expr::sqrt(poly_to_expr(p)),
    }
}

/// Canonical form followed by multiple-angle harmonization.
pub fn canonical(e: &Expr) -> Canon {
    to_canon(e).harmonize()
}

/// Idempotent canonical form as an expression tree.
pub fn normalize(e: &Expr) -> Expr {
    to_expr(&canonical(e))
}
