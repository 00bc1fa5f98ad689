//! Taylor-in-time series solutions of evolution PDE systems and lattice
//! differential-difference equations, computed by direct recursion about
//! `t = 0`, together with a checker that verifies or falsifies claimed
//! closed-form solutions.
//!
//! The crate is `no_std` (it needs `alloc`). File IO, the command-line
//! front end and report serialization live in the companion `taylorcheck`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod expr;
pub mod float;
pub mod numeric;
pub mod parse;
pub mod poly;
pub mod ratform;
pub mod residual;
pub mod series;
pub mod verify;
pub mod zero;

pub use expr::{Bindings, Expr, ExprError, F64Bindings, Func, Node, Rational, SpaceOp, Symbol};
pub use float::BigFloat;
