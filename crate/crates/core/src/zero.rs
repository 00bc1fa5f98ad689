//! Zero testing: exact proof through the exp-atom normal form, falsification
//! through high-precision sampling.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Bindings, Expr, ExprError, Rational, Symbol};
use crate::float::BigFloat;
use crate::ratform::numerator_vanishes;

/// A sample magnitude above this counts as evidence of a nonzero value.
pub const NONZERO_THRESHOLD: f64 = 1e-6;
/// Default working precision in significant decimal digits.
pub const DEFAULT_DIGITS: u32 = 30;
/// Lowest precision at which a nonzero verdict is issued.
pub const MIN_WITNESS_DIGITS: u32 = 25;
/// Extra digits used to confirm a witness.
const CONFIRM_DIGITS: u32 = 10;

/// A sample point at which an expression is demonstrably nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub bindings: Bindings,
    pub value: BigFloat,
    pub digits: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    ProvenZero,
    ProvenNonZero(Witness),
    Unknown,
}

impl ZeroVerdict {
    pub fn is_proven_zero(&self) -> bool {
        matches!(self, ZeroVerdict::ProvenZero)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            ZeroVerdict::ProvenNonZero(w) => Some(w),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::ProvenZero => "ProvenZero",
            ZeroVerdict::ProvenNonZero(_) => "ProvenNonZero",
            ZeroVerdict::Unknown => "Unknown",
        }
    }
}

/// Symbolic half of the test: `Ok(true)` only if `e` is identically zero.
pub fn prove_zero(e: &Expr) -> Result<bool, ExprError> {
    let e = e.simplify()?;
    if e.is_zero() {
        return Ok(true);
    }
    numerator_vanishes(&e)
}

/// Outcome of evaluating one sample.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleValue {
    Value(BigFloat),
    /// Pole, overflow or another evaluation failure; the sample is skipped.
    Skipped(ExprError),
}

/// Evaluates `e` at `bindings`; a magnitude above the threshold is
/// confirmed at higher precision before being returned as a witness.
pub fn witness_at(e: &Expr, bindings: &Bindings, digits: u32) -> (SampleValue, Option<Witness>) {
    let digits = digits.max(MIN_WITNESS_DIGITS);
    let v = match e.eval(bindings, digits) {
        Ok(v) => v,
        Err(err) => return (SampleValue::Skipped(err), None),
    };
    let threshold = BigFloat::from_f64(NONZERO_THRESHOLD);
    if v.cmp_abs(&threshold).is_le() {
        return (SampleValue::Value(v), None);
    }
    let confirm = match e.eval(bindings, digits + CONFIRM_DIGITS) {
        Ok(c) => c,
        Err(_) => return (SampleValue::Value(v), None),
    };
    let bits = crate::float::bits_for_digits(digits);
    let tol = libm::pow(10.0, -f64::from(digits) + 5.0) * v.to_f64().abs().max(1.0);
    if crate::float::abs_diff_le(&v, &confirm, tol, bits) {
        let w = Witness { bindings: bindings.clone(), value: confirm, digits };
        (SampleValue::Value(v), Some(w))
    } else {
        (SampleValue::Value(v), None)
    }
}

/// Full test of `e` over an explicit sample list.
///
/// Exact proof comes first; when it fails the samples are scanned for a
/// confirmed witness, and otherwise the verdict is `Unknown`.
pub fn is_zero_on(e: &Expr, samples: &[Bindings], digits: u32) -> ZeroVerdict {
    if let Ok(true) = prove_zero(e) {
        return ZeroVerdict::ProvenZero;
    }
    for b in samples {
        if let (_, Some(w)) = witness_at(e, b, digits) {
            return ZeroVerdict::ProvenNonZero(w);
        }
    }
    ZeroVerdict::Unknown
}

/// Zero test with the default sample schedule at [`DEFAULT_DIGITS`].
pub fn is_zero(e: &Expr) -> ZeroVerdict {
    let samples = default_samples(&e.free_symbols(), 16);
    is_zero_on(e, &samples, DEFAULT_DIGITS)
}

/// Deterministic sample points: all symbols at 1 first, then small
/// pseudo-random nonzero rationals `p/8` with `|p/8| <= 2`.
pub fn default_samples(symbols: &BTreeSet<Symbol>, count: usize) -> Vec<Bindings> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(symbols.iter().map(|s| (s.clone(), Rational::from_integer(1.into()))).collect());
    while out.len() < count {
        let b = symbols
            .iter()
            .map(|s| {
                let p = loop {
                    let p = (rng.next_u32() % 33) as i64 - 16;
                    if p != 0 {
                        break p;
                    }
                };
                (s.clone(), Rational::new(p.into(), 8.into()))
            })
            .collect();
        out.push(b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expression;

    fn p(s: &str) -> Expr {
        parse_expression(s).unwrap()
    }

    #[test]
    fn hyperbolic_identities_are_proven() {
        assert_eq!(is_zero(&p("tanh(x)^2 + sech(x)^2 - 1")), ZeroVerdict::ProvenZero);
        assert_eq!(is_zero(&p("cosh(x)^2 - sinh(x)^2 - 1")), ZeroVerdict::ProvenZero);
        assert_eq!(is_zero(&p("2*sinh(x)*cosh(x) - sinh(2*x)")), ZeroVerdict::ProvenZero);
    }

    #[test]
    fn exp_minus_one_has_unit_witness() {
        let ZeroVerdict::ProvenNonZero(w) = is_zero(&p("exp(x) - 1")) else { panic!() };
        assert_eq!(w.bindings, Bindings::new().with_int("x", 1));
        assert!((w.value.to_f64() - 1.718281828459045).abs() < 1e-12);
    }

    #[test]
    fn tiny_nonzero_values_stay_unknown() {
        assert_eq!(is_zero(&p("x/10^9")), ZeroVerdict::Unknown);
    }

    #[test]
    fn poles_are_skipped() {
        // every default sample keeps x - 1 nonzero except the first
        let e = p("1/(x - 1) + 1");
        assert!(matches!(is_zero(&e), ZeroVerdict::ProvenNonZero(_)));
    }

    #[test]
    fn samples_are_deterministic() {
        let syms: BTreeSet<Symbol> = ["a", "b"].into_iter().map(Symbol::new).collect();
        assert_eq!(default_samples(&syms, 8), default_samples(&syms, 8));
        assert_eq!(default_samples(&syms, 8).len(), 8);
    }
}
