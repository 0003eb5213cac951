//! The immutable expression tree.
//!
//! An [`Expr`] is a cheaply clonable handle to a shared node. Trees are never
//! mutated after construction; every transformation builds a new tree.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number used for every constant.
pub type Rational = BigRational;

/// Independent coordinates and jet variables.
///
/// `Z(i)` is the i-th pure x-derivative of the unknown, `W(j)` the j-th pure
/// t-derivative (only used by the hyperbolic scheme).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    T,
    Z(u32),
    W(u32),
}

impl Var {
    pub fn is_jet(self) -> bool {
        matches!(self, Var::Z(_) | Var::W(_))
    }

    /// Canonical text name, parseable by the expression grammar.
    pub fn name(self) -> String {
        match self {
            Var::X => "x".to_string(),
            Var::T => "t".to_string(),
            Var::Z(0) => "u".to_string(),
            Var::Z(i) if i <= 9 => format!("u_{}", "x".repeat(i as usize)),
            Var::Z(i) => format!("z{i}"),
            Var::W(j) if j <= 2 => format!("u_{}", "t".repeat(j as usize)),
            Var::W(j) => format!("w{j}"),
        }
    }

    /// Short positional name (`z3`, `w1`) used in witnesses and tables.
    pub fn short_name(self) -> String {
        match self {
            Var::X => "x".into(),
            Var::T => "t".into(),
            Var::Z(i) => format!("z{i}"),
            Var::W(j) => format!("w{j}"),
        }
    }
}

/// Elementary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Cot,
    Exp,
    Ln,
    Sqrt,
    Arctan,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Cot,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Arctan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Arctan => "arctan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "cot" => Some(Func::Cot),
            "exp" => Some(Func::Exp),
            "ln" | "log" => Some(Func::Ln),
            "sqrt" => Some(Func::Sqrt),
            "arctan" | "atan" => Some(Func::Arctan),
            _ => None,
        }
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Var(Var),
    Param(Arc<str>),
    Apply(Func, Expr),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    Pow(Expr, i32),
}

/// Immutable symbolic expression.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: Rational) -> Expr {
        Expr(Arc::new(Node::Const(value)))
    }

    pub fn int(value: i64) -> Expr {
        Expr::constant(Rational::from_integer(BigInt::from(value)))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::constant(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr(Arc::new(Node::Var(v)))
    }

    pub fn x() -> Expr {
        Expr::var(Var::X)
    }

    pub fn t() -> Expr {
        Expr::var(Var::T)
    }

    pub fn z(i: u32) -> Expr {
        Expr::var(Var::Z(i))
    }

    pub fn w(j: u32) -> Expr {
        Expr::var(Var::W(j))
    }

    pub fn param(name: &str) -> Expr {
        Expr(Arc::new(Node::Param(Arc::from(name))))
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        Expr(Arc::new(Node::Apply(f, arg)))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::apply(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::apply(Func::Cos, arg)
    }

    pub fn tan(arg: Expr) -> Expr {
        Expr::apply(Func::Tan, arg)
    }

    pub fn cot(arg: Expr) -> Expr {
        Expr::apply(Func::Cot, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::apply(Func::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::apply(Func::Ln, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::apply(Func::Sqrt, arg)
    }

    pub fn arctan(arg: Expr) -> Expr {
        Expr::apply(Func::Arctan, arg)
    }

    /// Sum node; a single term is returned as is and an empty sum is zero.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr(Arc::new(Node::Add(terms))),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Expr {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr(Arc::new(Node::Mul(factors))),
        }
    }

    pub fn div(num: Expr, den: Expr) -> Expr {
        Expr(Arc::new(Node::Div(num, den)))
    }

    pub fn pow(base: Expr, exponent: i32) -> Expr {
        Expr(Arc::new(Node::Pow(base, exponent)))
    }

    pub fn neg(self) -> Expr {
        Expr::product(vec![Expr::int(-1), self])
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_literal_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    /// All coordinates and jet variables occurring anywhere in the tree.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |n| {
            if let Node::Var(v) = n {
                out.insert(*v);
            }
        });
        out
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |n| {
            if let Node::Param(p) = n {
                out.insert(p.to_string());
            }
        });
        out
    }

    fn visit(&self, f: &mut dyn FnMut(&Node)) {
        f(self.node());
        match self.node() {
            Node::Const(_) | Node::Var(_) | Node::Param(_) => {}
            Node::Apply(_, a) | Node::Pow(a, _) => a.visit(f),
            Node::Add(items) | Node::Mul(items) => items.iter().for_each(|e| e.visit(f)),
            Node::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Replace parameters by expressions. Unlisted parameters are kept.
    pub fn substitute(&self, lookup: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Param(p) => lookup(p).unwrap_or_else(|| self.clone()),
            Node::Apply(f, a) => Expr::apply(*f, a.substitute(lookup)),
            Node::Add(items) => Expr::sum(items.iter().map(|e| e.substitute(lookup)).collect()),
            Node::Mul(items) => Expr::product(items.iter().map(|e| e.substitute(lookup)).collect()),
            Node::Div(a, b) => Expr::div(a.substitute(lookup), b.substitute(lookup)),
            Node::Pow(a, n) => Expr::pow(a.substitute(lookup), *n),
        }
    }

    /// Replace coordinates or jet variables by expressions.
    pub fn substitute_vars(&self, lookup: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Param(_) => self.clone(),
            Node::Var(v) => lookup(*v).unwrap_or_else(|| self.clone()),
            Node::Apply(f, a) => Expr::apply(*f, a.substitute_vars(lookup)),
            Node::Add(items) => {
                Expr::sum(items.iter().map(|e| e.substitute_vars(lookup)).collect())
            }
            Node::Mul(items) => {
                Expr::product(items.iter().map(|e| e.substitute_vars(lookup)).collect())
            }
            Node::Div(a, b) => Expr::div(a.substitute_vars(lookup), b.substitute_vars(lookup)),
            Node::Pow(a, n) => Expr::pow(a.substitute_vars(lookup), *n),
        }
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs.neg()])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

// Binding strength used by the printer: sums < products < unary minus < powers.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

fn const_precedence(c: &Rational) -> u8 {
    if c.is_negative() {
        PREC_NEG
    } else if c.is_integer() {
        PREC_ATOM
    } else {
        PREC_PRODUCT
    }
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self.node() {
            Node::Const(c) => const_precedence(c),
            Node::Var(_) | Node::Param(_) | Node::Apply(..) => PREC_ATOM,
            Node::Add(_) => PREC_SUM,
            Node::Mul(items) => {
                if leading_negative(items).is_some() {
                    PREC_NEG
                } else {
                    PREC_PRODUCT
                }
            }
            Node::Div(..) => PREC_PRODUCT,
            Node::Pow(..) => PREC_POWER,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_bare(f)?;
            write!(f, ")")
        } else {
            self.write_bare(f)
        }
    }

    fn write_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_rational(f, c),
            Node::Var(v) => write!(f, "{}", v.name()),
            Node::Param(p) => write!(f, "{p}"),
            Node::Apply(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_prec(f, 0)?;
                write!(f, ")")
            }
            Node::Add(items) => {
                for (k, item) in items.iter().enumerate() {
                    if k == 0 {
                        item.write_prec(f, PREC_SUM)?;
                    } else if let Some(abs) = negated_term(item) {
                        write!(f, " - ")?;
                        abs.write_prec(f, PREC_PRODUCT)?;
                    } else {
                        write!(f, " + ")?;
                        item.write_prec(f, PREC_PRODUCT)?;
                    }
                }
                Ok(())
            }
            Node::Mul(items) => {
                if let Some(rest) = leading_negative(items) {
                    write!(f, "-")?;
                    return rest.write_prec(f, PREC_POWER);
                }
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    // Left operand of a product chain may be a product itself.
                    let min = if k == 0 { PREC_PRODUCT } else { PREC_POWER };
                    item.write_prec(f, min)?;
                }
                Ok(())
            }
            Node::Div(a, b) => {
                a.write_prec(f, PREC_PRODUCT)?;
                write!(f, "/")?;
                b.write_prec(f, PREC_POWER)
            }
            Node::Pow(a, n) => {
                a.write_prec(f, PREC_ATOM)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
        }
    }
}

/// For a product starting with a negative constant, the remaining product
/// with the sign flipped.
fn leading_negative(items: &[Expr]) -> Option<Expr> {
    let c = items.first()?.as_const()?;
    if !c.is_negative() {
        return None;
    }
    let abs = -c.clone();
    let mut rest: Vec<Expr> = Vec::with_capacity(items.len());
    if !abs.is_one() {
        rest.push(Expr::constant(abs));
    }
    rest.extend(items[1..].iter().cloned());
    Some(Expr::product(rest))
}

fn negated_term(e: &Expr) -> Option<Expr> {
    match e.node() {
        Node::Mul(items) => leading_negative(items),
        Node::Const(c) if c.is_negative() => Some(Expr::constant(-c.clone())),
        _ => None,
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printer_uses_subscript_aliases() {
        assert_eq!(Expr::z(0).to_string(), "u");
        assert_eq!(Expr::z(3).to_string(), "u_xxx");
        assert_eq!(Expr::z(10).to_string(), "z10");
        assert_eq!(Expr::w(1).to_string(), "u_t");
    }

    #[test]
    fn printer_parenthesizes_by_precedence() {
        let e = (Expr::z(0) + Expr::int(1)) * Expr::param("eta");
        assert_eq!(e.to_string(), "(u + 1)*eta");
        let e = Expr::z(1) - Expr::sin(Expr::z(0)) * Expr::int(2);
        assert_eq!(e.to_string(), "u_x - sin(u)*2");
        let e = Expr::pow(Expr::ratio(-1, 2), 2);
        assert_eq!(e.to_string(), "(-1/2)^2");
        let e = Expr::div(Expr::one(), Expr::x() * Expr::t());
        assert_eq!(e.to_string(), "1/(x*t)");
    }

    #[test]
    fn variables_and_params_are_collected() {
        let e = Expr::sin(Expr::z(2)) * Expr::param("m0") + Expr::x();
        assert_eq!(e.variables(), [Var::X, Var::Z(2)].into_iter().collect());
        assert_eq!(e.params(), ["m0".to_string()].into_iter().collect());
    }
}
