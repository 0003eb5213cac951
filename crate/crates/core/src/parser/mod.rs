//! Expression grammar and the `pss-problem v1` file format.
//!
//! A problem file starts with the header line `pss-problem v1`, followed by
//! an optional `name = ...` line and bracketed sections. `#` starts a
//! comment.
//!
//! ```text
//! pss-problem v1
//! name = sine-gordon-8
//!
//! [equation]
//! scheme = hyperbolic          # or: evolution
//! rhs = sin(u)                 # u_xt = rhs, or u_t = rhs
//! order = 4                    # evolution only
//!
//! [params]
//! eta = free                   # sampled symbol
//! m0 = 1/2                     # bound rational
//! h = exp(2*(-2*m0*x + r0*t))  # definition, expanded where used
//!
//! [constraints]
//! eta != 0                     # one of != < <= > >=
//!
//! [forms]
//! f11 = ...                    # all six of f11 f12 f21 f22 f31 f32
//! spectral = f21               # optional: marks the spectral parameter
//!
//! [sff]
//! a = ...                      # a, b and c
//! ```
//!
//! Identifiers in expressions are coordinates (`x`, `t`), jet variables
//! (`u`, `u_x`…`u_xxxxxxxxx`, `z<i>`, `u_t`, `u_tt`, `w<j>`), the functions
//! `sin cos tan cot exp ln log sqrt arctan atan`, or declared parameters.

mod expr;
mod problem;

pub use expr::{parse_expr, resolve_var};
pub use problem::{parse_problem, ParamBinding, ProblemDef};

use thiserror::Error;

use crate::jetexpr::JetError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("missing {0}")]
    Missing(String),
    #[error("line {line}: duplicate section [{name}]")]
    DuplicateSection { name: String, line: usize },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("line {line}: scheme mismatch: {source}")]
    SchemeMismatch {
        line: usize,
        #[source]
        source: JetError,
    },
}
