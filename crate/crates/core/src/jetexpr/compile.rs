//! Compilation of canonical forms to a flat `f64` stack program, for
//! evaluating the same expression at many grid nodes.

use std::collections::BTreeMap;

use super::canon::{Atom, Canon, Poly};
use super::eval::rational_to_f64;
use super::expr::Var;

/// An input the program reads.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    Var(Var),
    Param(String),
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    Load(usize),
    Reg(usize),
    Tee(usize),
    Add,
    Mul,
    Div,
    PowI(i32),
    Sin,
    Cos,
    Atan,
    Ln,
    Exp,
    Sqrt,
}

/// Stack program equivalent to a [`Canon`]. Domain violations surface as
/// non-finite results.
#[derive(Clone, Debug)]
pub struct Compiled {
    code: Vec<Op>,
    slots: Vec<Slot>,
    registers: usize,
}

struct Builder {
    code: Vec<Op>,
    slots: BTreeMap<Slot, usize>,
    cache: BTreeMap<Atom, usize>,
}

impl Builder {
    fn slot(&mut self, s: Slot) -> usize {
        let n = self.slots.len();
        *self.slots.entry(s).or_insert(n)
    }

    fn canon(&mut self, c: &Canon) {
        self.poly(c.num());
        for (f, k) in c.den() {
            self.poly(f);
            if *k > 1 {
                self.code.push(Op::PowI(*k as i32));
            }
            self.code.push(Op::Div);
        }
    }

    fn poly(&mut self, p: &Poly) {
        if p.is_zero() {
            self.code.push(Op::Const(0.0));
            return;
        }
        for (i, (m, coef)) in p.terms().iter().enumerate() {
            self.code.push(Op::Const(rational_to_f64(coef)));
            for (a, k) in m.powers() {
                self.atom(a);
                if *k > 1 {
                    self.code.push(Op::PowI(*k as i32));
                }
                self.code.push(Op::Mul);
            }
            if let Some(arg) = m.exp_arg() {
                self.canon(arg);
                self.code.push(Op::Exp);
                self.code.push(Op::Mul);
            }
            if i > 0 {
                self.code.push(Op::Add);
            }
        }
    }

    fn atom(&mut self, a: &Atom) {
        if let Some(&r) = self.cache.get(a) {
            self.code.push(Op::Reg(r));
            return;
        }
        match a {
            Atom::Var(v) => {
                let s = self.slot(Slot::Var(*v));
                self.code.push(Op::Load(s));
                return;
            }
            Atom::Param(p) => {
                let s = self.slot(Slot::Param(p.to_string()));
                self.code.push(Op::Load(s));
                return;
            }
            Atom::Sin(c) => {
                self.canon(c);
                self.code.push(Op::Sin);
            }
            Atom::Cos(c) => {
                self.canon(c);
                self.code.push(Op::Cos);
            }
            Atom::Atan(c) => {
                self.canon(c);
                self.code.push(Op::Atan);
            }
            Atom::Ln(c) => {
                self.canon(c);
                self.code.push(Op::Ln);
            }
            Atom::Sqrt(p) => {
                self.poly(p);
                self.code.push(Op::Sqrt);
            }
        }
        let r = self.cache.len();
        self.cache.insert(a.clone(), r);
        self.code.push(Op::Tee(r));
    }
}

impl Compiled {
    pub fn new(c: &Canon) -> Compiled {
        let mut b = Builder {
            code: Vec::new(),
            slots: BTreeMap::new(),
            cache: BTreeMap::new(),
        };
        b.canon(c);
        let mut slots = vec![Slot::Param(String::new()); b.slots.len()];
        for (s, i) in b.slots {
            slots[i] = s;
        }
        Compiled {
            code: b.code,
            slots,
            registers: b.cache.len(),
        }
    }

    /// Inputs in the order [`Compiled::eval`] expects them.
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn eval(&self, inputs: &[f64]) -> f64 {
        let mut stack: Vec<f64> = Vec::with_capacity(16);
        let mut regs = vec![0.0; self.registers];
        for op in &self.code {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::Load(i) => stack.push(inputs[i]),
                Op::Reg(r) => stack.push(regs[r]),
                Op::Tee(r) => regs[r] = *stack.last().expect("stack"),
                Op::Add => {
                    let b = stack.pop().expect("stack");
                    *stack.last_mut().expect("stack") += b;
                }
                Op::Mul => {
                    let b = stack.pop().expect("stack");
                    *stack.last_mut().expect("stack") *= b;
                }
                Op::Div => {
                    let b = stack.pop().expect("stack");
                    *stack.last_mut().expect("stack") /= b;
                }
                Op::PowI(k) => {
                    let a = stack.last_mut().expect("stack");
                    *a = a.powi(k);
                }
                Op::Sin => map_top(&mut stack, f64::sin),
                Op::Cos => map_top(&mut stack, f64::cos),
                Op::Atan => map_top(&mut stack, f64::atan),
                Op::Ln => map_top(&mut stack, f64::ln),
                Op::Exp => map_top(&mut stack, f64::exp),
                Op::Sqrt => map_top(&mut stack, f64::sqrt),
            }
        }
        stack.pop().unwrap_or(f64::NAN)
    }
}

fn map_top(stack: &mut [f64], f: fn(f64) -> f64) {
    let a = stack.last_mut().expect("stack");
    *a = f(*a);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::{eval_canon, to_canon, EvalOptions, Expr, Point};

    #[test]
    fn agrees_with_reference_evaluator() {
        let e = Expr::div(
            Expr::sin(Expr::z(0) / Expr::int(2)) * Expr::exp(Expr::x() * Expr::param("k"))
                + Expr::pow(Expr::cos(Expr::z(0) / Expr::int(2)), 3)
                + Expr::sqrt(Expr::z(1) + Expr::int(3)),
            Expr::int(1)
                + Expr::pow(Expr::arctan(Expr::w(1)), 2)
                + Expr::ln(Expr::int(2) + Expr::t()),
        );
        let c = to_canon(&e);
        let prog = Compiled::new(&c);
        let values = [
            (Var::Z(0), 0.7),
            (Var::Z(1), 0.4),
            (Var::W(1), -1.3),
            (Var::X, 0.25),
            (Var::T, 0.5),
        ];
        let mut point = Point::new().with_param("k", 1.5);
        for (v, x) in values {
            point = point.with_var(v, x);
        }
        let inputs: Vec<f64> = prog
            .slots()
            .iter()
            .map(|s| match s {
                Slot::Var(v) => point.vars[v],
                Slot::Param(p) => point.params[p],
            })
            .collect();
        let want = eval_canon(&c, &point, &EvalOptions::default()).unwrap();
        let got = prog.eval(&inputs);
        assert!(
            (want - got).abs() < 1e-12 * want.abs().max(1.0),
            "{want} {got}"
        );
    }

    #[test]
    fn zero_and_domain() {
        assert_eq!(Compiled::new(&Canon::zero()).eval(&[]), 0.0);
        let c = to_canon(&Expr::sqrt(Expr::z(0)));
        assert!(Compiled::new(&c).eval(&[-1.0]).is_nan());
    }
}
