//! Symbolic expressions over jet space.
//!
//! [`Expr`] is the user-facing immutable tree. Algebra happens on
//! [`Canon`], a rational-function normal form in which trigonometric,
//! exponential and radical kernels are adjoined indeterminates subject to a
//! small set of rewrite relations. Total derivatives are reduced modulo an
//! [`EquationDef`], and [`ZeroTest`] decides whether a residual vanishes.

mod canon;
mod compile;
mod convert;
mod deriv;
mod eval;
mod expr;
mod zero;

pub use canon::{Atom, Canon, Monomial, Poly};
pub use compile::{Compiled, Slot};
pub use convert::{apply, canonical, normalize, poly_to_expr, to_canon, to_expr};
pub use deriv::{
    derive, partial, partial_by_name, partial_canon, EquationDef, Scheme, DEFAULT_MAX_ORDER,
};
pub use eval::{eval_canon, eval_poly, rational_to_f64, EvalError, EvalOptions, Point};
pub use expr::{Expr, Func, Node, Rational, Var};
pub use zero::{is_zero, Constraint, Relation, SampleDomain, Verdict, Witness, ZeroTest};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("jet order {order} exceeds the configured maximum {max}")]
    OrderOverflow { order: u32, max: u32 },
    #[error("`{var}` is outside the {scheme} scheme (bound {bound})")]
    SchemeBound {
        var: String,
        scheme: &'static str,
        bound: u32,
    },
    #[error("right-hand side does not depend on the top-order jet z{0}")]
    DegenerateOrder(u32),
    #[error("symbol `{0}` has no value")]
    UnboundSymbol(String),
    #[error("found only {found} of {wanted} evaluable sample points")]
    DomainExhausted { wanted: usize, found: usize },
}
