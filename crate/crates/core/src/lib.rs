//! Symbolic and numeric tools for partial differential equations that
//! describe pseudo-spherical surfaces.

pub mod catalog;
pub mod immerse;
pub mod jetexpr;
pub mod parser;
pub mod verify;
