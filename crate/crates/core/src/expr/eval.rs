use alloc::collections::BTreeMap;
use alloc::string::ToString;

use super::{Expr, ExprError, Func, Node, Rational, Symbol};
use crate::float::{bits_for_digits, BigFloat, FloatError};

/// Exact rational values for symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bindings(BTreeMap<Symbol, Rational>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: Rational) -> Self {
        self.insert(Symbol::new(name), value);
        self
    }

    pub fn with_int(self, name: &str, value: i64) -> Self {
        self.with(name, Rational::from_integer(value.into()))
    }

    pub fn with_ratio(self, name: &str, num: i64, den: i64) -> Self {
        self.with(name, Rational::new(num.into(), den.into()))
    }

    pub fn insert(&mut self, s: Symbol, value: Rational) {
        self.0.insert(s, value);
    }

    pub fn get(&self, s: &Symbol) -> Option<&Rational> {
        self.0.get(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Rational)> {
        self.0.iter()
    }

    pub fn to_f64(&self) -> F64Bindings {
        let mut out = F64Bindings::new();
        for (s, v) in &self.0 {
            out.insert(s.clone(), crate::float::rational_to_f64(v));
        }
        out
    }
}

impl FromIterator<(Symbol, Rational)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (Symbol, Rational)>>(iter: I) -> Self {
        Bindings(iter.into_iter().collect())
    }
}

/// Double-precision values for symbols.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct F64Bindings(BTreeMap<Symbol, f64>);

impl F64Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(Symbol::new(name), value);
        self
    }

    pub fn insert(&mut self, s: Symbol, value: f64) {
        self.0.insert(s, value);
    }

    pub fn get(&self, s: &Symbol) -> Option<f64> {
        self.0.get(s).copied()
    }
}

fn float_err(e: FloatError) -> ExprError {
    match e {
        FloatError::DivisionByZero => ExprError::PoleEvaluation,
        FloatError::Overflow => ExprError::Overflow,
    }
}

pub(super) fn eval(e: &Expr, bindings: &Bindings, digits: u32) -> Result<BigFloat, ExprError> {
    if digits < 15 {
        return Err(ExprError::PrecisionTooLow(digits));
    }
    let target = bits_for_digits(digits);
    let mut ev = Evaluator {
        bindings,
        bits: target + 32,
        memo: BTreeMap::new(),
    };
    let v = ev.eval(e)?;
    Ok(v.add(&BigFloat::zero(), target))
}

struct Evaluator<'a> {
    bindings: &'a Bindings,
    bits: u64,
    memo: BTreeMap<usize, BigFloat>,
}

impl Evaluator<'_> {
    fn eval(&mut self, e: &Expr) -> Result<BigFloat, ExprError> {
        if let Some(v) = self.memo.get(&e.ptr_id()) {
            return Ok(v.clone());
        }
        let bits = self.bits;
        let v = match e.node() {
            Node::Const(q) => BigFloat::from_rational(q, bits),
            Node::Symbol(s) => {
                let q = self
                    .bindings
                    .get(s)
                    .ok_or_else(|| ExprError::UnboundSymbol(s.as_str().to_string()))?;
                BigFloat::from_rational(q, bits)
            }
            Node::Sum(xs) => {
                let mut acc = BigFloat::zero();
                for x in xs {
                    acc = acc.add(&self.eval(x)?, bits);
                }
                acc
            }
            Node::Product(xs) => {
                let mut acc = BigFloat::one();
                for x in xs {
                    acc = acc.mul(&self.eval(x)?, bits);
                }
                acc
            }
            Node::Pow(b, n) => {
                let b = self.eval(b)?;
                if b.is_zero() && *n < 0 {
                    return Err(ExprError::PoleEvaluation);
                }
                b.powi(*n, bits).map_err(float_err)?
            }
            Node::Func(f, a) => {
                let a = self.eval(a)?;
                match f {
                    Func::Exp => a.exp(bits),
                    Func::Tanh => a.tanh(bits),
                    Func::Sech => a.sech(bits),
                    Func::Cosh => a.cosh(bits),
                    Func::Sinh => a.sinh(bits),
                }
                .map_err(float_err)?
            }
            Node::Op(op, _) => return Err(ExprError::UnresolvedOperator(alloc::format!("{op:?}"))),
        };
        self.memo.insert(e.ptr_id(), v.clone());
        Ok(v)
    }
}

pub(super) fn eval_f64(e: &Expr, bindings: &F64Bindings) -> Result<f64, ExprError> {
    let v = match e.node() {
        Node::Const(q) => crate::float::rational_to_f64(q),
        Node::Symbol(s) => bindings
            .get(s)
            .ok_or_else(|| ExprError::UnboundSymbol(s.as_str().to_string()))?,
        Node::Sum(xs) => {
            let mut acc = 0.0;
            for x in xs {
                acc += eval_f64(x, bindings)?;
            }
            acc
        }
        Node::Product(xs) => {
            let mut acc = 1.0;
            for x in xs {
                acc *= eval_f64(x, bindings)?;
            }
            acc
        }
        Node::Pow(b, n) => {
            let b = eval_f64(b, bindings)?;
            if b == 0.0 && *n < 0 {
                return Err(ExprError::PoleEvaluation);
            }
            libm::pow(b, *n as f64)
        }
        Node::Func(f, a) => {
            let a = eval_f64(a, bindings)?;
            match f {
                Func::Exp => libm::exp(a),
                Func::Tanh => libm::tanh(a),
                Func::Sech => 1.0 / libm::cosh(a),
                Func::Cosh => libm::cosh(a),
                Func::Sinh => libm::sinh(a),
            }
        }
        Node::Op(op, _) => return Err(ExprError::UnresolvedOperator(alloc::format!("{op:?}"))),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExprError::Overflow)
    }
}
