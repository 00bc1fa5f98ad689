//! Substituting candidate solutions into a problem's equations.

use alloc::vec::Vec;

use crate::expr::{Expr, ExprError};
use crate::parse::{ProblemSpec, TIME};
use crate::Symbol;

/// Replaces every field by its candidate and resolves spatial operators.
pub fn substitute_fields(spec: &ProblemSpec, rhs: &Expr, candidates: &[Expr]) -> Result<Expr, ExprError> {
    let mut out = rhs.clone();
    for (f, c) in spec.fields.iter().zip(candidates) {
        out = out.substitute(f, c)?;
    }
    out.resolve_operators(&spec.space)
}

/// `dt(candidate_i) - rhs_i(candidates)` for every equation, in field order.
pub fn residuals(spec: &ProblemSpec, candidates: &[Expr]) -> Result<Vec<Expr>, ExprError> {
    assert_eq!(candidates.len(), spec.fields.len(), "one candidate per field");
    let t = Symbol::new(TIME);
    spec.equations
        .iter()
        .zip(candidates)
        .map(|(rhs, c)| {
            let applied = substitute_fields(spec, rhs, candidates)?;
            Ok(c.differentiate(&t)? - applied)
        })
        .collect()
}

/// Candidates at `t = 0` minus the initial conditions, in field order.
pub fn initial_deviations(spec: &ProblemSpec, candidates: &[Expr]) -> Result<Vec<Expr>, ExprError> {
    let t = Symbol::new(TIME);
    spec.initial
        .iter()
        .zip(candidates)
        .map(|(ic, c)| Ok(c.substitute(&t, &Expr::zero())? - ic.clone()))
        .collect()
}
