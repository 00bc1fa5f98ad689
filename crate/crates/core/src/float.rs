//! Arbitrary-precision binary floating point used for high-precision
//! evaluation of expressions.
//!
//! Values are `(-1)^neg * mag * 2^exp` with an unbounded magnitude. Every
//! operation takes the working precision in bits and rounds its result to
//! that many significant bits (round half away from zero).

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::expr::Rational;

/// Largest argument magnitude accepted by [`BigFloat::exp`].
const EXP_ARG_LIMIT_BITS: i64 = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloat {
    neg: bool,
    mag: BigUint,
    exp: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FloatError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponential overflow")]
    Overflow,
}

/// Number of bits needed to carry `digits` significant decimal digits, plus guard bits.
pub fn bits_for_digits(digits: u32) -> u64 {
    // log2(10) = 3.3219...
    (u64::from(digits) * 33220).div_ceil(10000) + 8
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { neg: false, mag: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        BigFloat { neg: false, mag: BigUint::one(), exp: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg && !self.is_zero()
    }

    fn from_parts(neg: bool, mag: BigUint, exp: i64) -> Self {
        if mag.is_zero() {
            return Self::zero();
        }
        // strip trailing zero bits so equal values share one representation
        let tz = mag.trailing_zeros().unwrap_or(0);
        BigFloat { neg, mag: mag >> tz, exp: exp + tz as i64 }
    }

    fn rounded(neg: bool, mag: BigUint, exp: i64, bits: u64) -> Self {
        let len = mag.bits();
        if len <= bits {
            return Self::from_parts(neg, mag, exp);
        }
        let shift = len - bits;
        let half = BigUint::one() << (shift - 1);
        let mag = (mag + half) >> shift;
        Self::from_parts(neg, mag, exp + shift as i64)
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        Self::from_parts(v.sign() == Sign::Minus, v.magnitude().clone(), 0)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 || !v.is_finite() {
            return Self::zero();
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Self::from_parts(neg, BigUint::from(mant), exp)
    }

    pub fn from_rational(q: &Rational, bits: u64) -> Self {
        let num = Self::from_bigint(q.numer());
        if q.denom().is_one() {
            return num;
        }
        let den = Self::from_bigint(q.denom());
        num.div(&den, bits).expect("rational denominators are nonzero")
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        if !out.is_zero() {
            out.neg = !out.neg;
        }
        out
    }

    pub fn abs(&self) -> Self {
        let mut out = self.clone();
        out.neg = false;
        out
    }

    /// Position of the most significant bit: `|self|` lies in `[2^(m-1), 2^m)`.
    fn msb(&self) -> i64 {
        self.exp + self.mag.bits() as i64
    }

    pub fn add(&self, other: &Self, bits: u64) -> Self {
        if self.is_zero() {
            return Self::rounded(other.neg, other.mag.clone(), other.exp, bits);
        }
        if other.is_zero() {
            return Self::rounded(self.neg, self.mag.clone(), self.exp, bits);
        }
        // an addend entirely below the rounding position cannot change the result
        let gap = self.msb() - other.msb();
        if gap > bits as i64 + 2 {
            return Self::rounded(self.neg, self.mag.clone(), self.exp, bits);
        }
        if -gap > bits as i64 + 2 {
            return Self::rounded(other.neg, other.mag.clone(), other.exp, bits);
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mag << (self.exp - exp) as u64;
        let b = &other.mag << (other.exp - exp) as u64;
        if self.neg == other.neg {
            Self::rounded(self.neg, a + b, exp, bits)
        } else {
            match a.cmp(&b) {
                Ordering::Equal => Self::zero(),
                Ordering::Greater => Self::rounded(self.neg, a - b, exp, bits),
                Ordering::Less => Self::rounded(other.neg, b - a, exp, bits),
            }
        }
    }

    pub fn sub(&self, other: &Self, bits: u64) -> Self {
        self.add(&other.neg(), bits)
    }

    pub fn mul(&self, other: &Self, bits: u64) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::rounded(
            self.neg != other.neg,
            &self.mag * &other.mag,
            self.exp + other.exp,
            bits,
        )
    }

    pub fn div(&self, other: &Self, bits: u64) -> Result<Self, FloatError> {
        if other.is_zero() {
            return Err(FloatError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let want = bits as i64 + 2;
        let shift = (want + other.mag.bits() as i64 - self.mag.bits() as i64).max(0) as u64;
        let q = (&self.mag << shift) / &other.mag;
        Ok(Self::rounded(
            self.neg != other.neg,
            q,
            self.exp - other.exp - shift as i64,
            bits,
        ))
    }

    pub fn recip(&self, bits: u64) -> Result<Self, FloatError> {
        Self::one().div(self, bits)
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        BigFloat { neg: self.neg, mag: self.mag.clone(), exp: self.exp + k }
    }

    pub fn powi(&self, n: i64, bits: u64) -> Result<Self, FloatError> {
        if n == 0 {
            return Ok(Self::one());
        }
        let work = bits + 2 * (64 - n.unsigned_abs().leading_zeros() as u64) + 4;
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, work);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, work);
            }
        }
        if n < 0 {
            acc.recip(bits)
        } else {
            Ok(Self::rounded(acc.neg, acc.mag, acc.exp, bits))
        }
    }

    pub fn exp(&self, bits: u64) -> Result<Self, FloatError> {
        if self.is_zero() {
            return Ok(Self::one());
        }
        let msb = self.msb();
        if msb > EXP_ARG_LIMIT_BITS {
            return Err(FloatError::Overflow);
        }
        // scale the argument below 2^-10, sum the series, then square back up
        let squarings = (msb + 10).max(0) as u64;
        let work = bits + squarings + 16;
        let r = self.mul_pow2(-(squarings as i64));
        let mut sum = Self::one();
        let mut term = Self::one();
        let mut i = 1i64;
        loop {
            term = term.mul(&r, work).div(&Self::from_i64(i), work)?;
            if term.is_zero() || term.msb() < -(work as i64) - 2 {
                break;
            }
            sum = sum.add(&term, work);
            i += 1;
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum, work);
        }
        Ok(Self::rounded(sum.neg, sum.mag, sum.exp, bits))
    }

    /// Extra bits that protect `e^x - e^-x` style differences near zero.
    fn cancellation_guard(&self) -> u64 {
        if self.is_zero() {
            0
        } else {
            (-self.msb()).max(0) as u64 + 8
        }
    }

    pub fn tanh(&self, bits: u64) -> Result<Self, FloatError> {
        if self.is_zero() {
            return Ok(Self::zero());
        }
        if self.msb() > 16 {
            // |x| > 2^15: tanh is +-1 to far beyond any supported precision
            let one = Self::one();
            return Ok(if self.is_negative() { one.neg() } else { one });
        }
        let work = bits + self.cancellation_guard() + 8;
        let e2 = self.mul_pow2(1).exp(work)?;
        let num = e2.sub(&Self::one(), work);
        let den = e2.add(&Self::one(), work);
        num.div(&den, bits)
    }

    pub fn sech(&self, bits: u64) -> Result<Self, FloatError> {
        let work = bits + 8;
        let a = self.abs();
        // 2 e^-|x| / (1 + e^-2|x|) avoids overflow for large |x|
        let em = a.neg().exp(work)?;
        let num = em.mul_pow2(1);
        let den = Self::one().add(&em.mul(&em, work), work);
        num.div(&den, bits)
    }

    pub fn cosh(&self, bits: u64) -> Result<Self, FloatError> {
        let work = bits + 8;
        let e = self.exp(work)?;
        let sum = e.add(&e.recip(work)?, work);
        Ok(Self::rounded(sum.neg, sum.mag, sum.exp - 1, bits))
    }

    pub fn sinh(&self, bits: u64) -> Result<Self, FloatError> {
        let work = bits + self.cancellation_guard() + 8;
        let e = self.exp(work)?;
        let diff = e.sub(&e.recip(work)?, work);
        Ok(Self::rounded(diff.neg, diff.mag, diff.exp - 1, bits))
    }

    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.msb().cmp(&other.msb()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mag << (self.exp - exp) as u64;
        let b = &other.mag << (other.exp - exp) as u64;
        a.cmp(&b)
    }

    /// Nearest double; saturates to infinity or flushes to zero outside the
    /// double range.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let len = self.mag.bits();
        let (top, exp) = if len > 64 {
            let shift = len - 64;
            ((&self.mag >> shift).to_u64().unwrap_or(u64::MAX), self.exp + shift as i64)
        } else {
            (self.mag.to_u64().unwrap_or(u64::MAX), self.exp)
        };
        let clamped = exp.clamp(-2200, 2200) as i32;
        let v = libm::scalbn(top as f64, clamped);
        if self.neg {
            -v
        } else {
            v
        }
    }

    /// Approximate `log10 |self|`; `None` for zero.
    pub fn log10_abs(&self) -> Option<f64> {
        if self.is_zero() {
            return None;
        }
        let len = self.mag.bits();
        let shift = len.saturating_sub(53);
        let top = (&self.mag >> shift).to_f64().unwrap_or(f64::MAX);
        let e2 = self.exp + shift as i64;
        Some(libm::log10(top) + e2 as f64 * core::f64::consts::LOG10_2)
    }

    /// Scientific notation with `digits` significant decimal digits, e.g.
    /// `-1.2345e-3`. Zero renders as `0`.
    pub fn to_sci_string(&self, digits: u32) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let digits = digits.max(1);
        let mut dexp = libm::floor(self.log10_abs().unwrap_or(0.0)) as i64;
        let mut scaled;
        loop {
            scaled = self.scaled_decimal(i64::from(digits) - 1 - dexp);
            let len = scaled.to_str_radix(10).len() as i64;
            if len > i64::from(digits) {
                dexp += 1;
            } else if len < i64::from(digits) {
                dexp -= 1;
            } else {
                break;
            }
        }
        let s = scaled.to_str_radix(10);
        let mut out = String::new();
        if self.neg {
            out.push('-');
        }
        out.push_str(&s[..1]);
        if s.len() > 1 {
            out.push('.');
            out.push_str(&s[1..]);
        }
        let _ = write!(out, "e{dexp}");
        out
    }

    /// `round(|self| * 10^k)` as an integer.
    fn scaled_decimal(&self, k: i64) -> BigUint {
        let ten = BigUint::from(10u32);
        let mut num = self.mag.clone();
        let mut den = BigUint::one();
        if k >= 0 {
            num *= ten.pow(k as u32);
        } else {
            den *= ten.pow((-k) as u32);
        }
        if self.exp >= 0 {
            num <<= self.exp as u64;
        } else {
            den <<= (-self.exp) as u64;
        }
        let (q, r) = num.div_rem(&den);
        if r * 2u32 >= den {
            q + 1u32
        } else {
            q
        }
    }

    /// Exact rational value of this float.
    pub fn to_rational(&self) -> Rational {
        let mut num = BigInt::from_biguint(if self.neg { Sign::Minus } else { Sign::Plus }, self.mag.clone());
        let mut den = BigInt::one();
        if self.exp >= 0 {
            num <<= self.exp as u64;
        } else {
            den <<= (-self.exp) as u64;
        }
        Rational::new(num, den)
    }
}

/// Relative agreement check used by the zero tests: `|a - b| <= tol`.
pub fn abs_diff_le(a: &BigFloat, b: &BigFloat, tol: f64, bits: u64) -> bool {
    a.sub(b, bits).abs().to_f64() <= tol
}

/// Parses a decimal literal such as `-1.25e-3` into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).collect();
    if !digits.iter().all(u8::is_ascii_digit) {
        return None;
    }
    let digits = core::str::from_utf8(&digits).ok()?;
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(num * ten.pow(scale as u32))
    } else {
        Rational::new(num, ten.pow((-scale) as u32))
    })
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    BigFloat::from_rational(q, 64).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u64 = 120;

    fn f(v: f64) -> BigFloat {
        BigFloat::from_f64(v)
    }

    #[test]
    fn exp_of_one_matches_e() {
        let e = f(1.0).exp(bits_for_digits(40)).unwrap();
        assert_eq!(e.to_sci_string(35), "2.7182818284590452353602874713526625e0");
    }

    #[test]
    fn exp_negative_and_large() {
        let v = f(-3.5).exp(P).unwrap().to_f64();
        assert!((v - libm::exp(-3.5)).abs() < 1e-17);
        let v = f(40.0).exp(P).unwrap().to_f64();
        assert!((v / libm::exp(40.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_overflow_is_reported() {
        assert_eq!(f(1e12).exp(P), Err(FloatError::Overflow));
    }

    #[test]
    fn hyperbolics_against_libm() {
        for &x in &[-7.0, -1.0, -1e-9, 0.3, 2.0, 25.0] {
            assert!((f(x).tanh(P).unwrap().to_f64() - libm::tanh(x)).abs() < 1e-15);
            assert!((f(x).sech(P).unwrap().to_f64() - 1.0 / libm::cosh(x)).abs() < 1e-15);
            let c = f(x).cosh(P).unwrap().to_f64();
            assert!((c / libm::cosh(x) - 1.0).abs() < 1e-15);
            let s = f(x).sinh(P).unwrap().to_f64();
            assert!((s - libm::sinh(x)).abs() <= 1e-15 * libm::sinh(x).abs().max(1e-300));
        }
    }

    #[test]
    fn tanh_small_argument_keeps_relative_precision() {
        let t = f(1e-20).tanh(bits_for_digits(30)).unwrap();
        // tanh(x) = x - x^3/3 + ...; the cubic term is far below 30 digits
        assert_eq!(t.to_sci_string(25), BigFloat::from_f64(1e-20).to_sci_string(25));
    }

    #[test]
    fn division_and_rounding() {
        let third = BigFloat::one().div(&BigFloat::from_i64(3), P).unwrap();
        assert_eq!(third.to_sci_string(20), "3.3333333333333333333e-1");
        assert_eq!(BigFloat::one().div(&BigFloat::zero(), P), Err(FloatError::DivisionByZero));
    }

    #[test]
    fn sci_string_rounds_and_handles_sign() {
        assert_eq!(f(-0.0012345).to_sci_string(3), "-1.23e-3");
        assert_eq!(f(999.96).to_sci_string(4), "1.000e3");
        assert_eq!(f(1.0).to_sci_string(1), "1e0");
        assert_eq!(BigFloat::zero().to_sci_string(5), "0");
    }

    #[test]
    fn powi_negative_exponent() {
        let v = f(2.0).powi(-3, P).unwrap().to_f64();
        assert_eq!(v, 0.125);
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal("0.1"), Some(Rational::new(1.into(), 10.into())));
        assert_eq!(parse_decimal("-2.5e2"), Some(Rational::from_integer((-250).into())));
        assert_eq!(parse_decimal("1e-3"), Some(Rational::new(1.into(), 1000.into())));
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1x"), None);
    }

    #[test]
    fn rational_round_trip() {
        let q = Rational::new(7.into(), 8.into());
        assert_eq!(BigFloat::from_rational(&q, P).to_rational(), q);
    }
}
