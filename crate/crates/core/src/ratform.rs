//! Rational-function normal form over exponential atoms.
//!
//! Every exponential argument is expanded into terms `q * m * C` where `q`
//! is rational, `m` a monomial in plain symbols and `C` a product of the
//! remaining (transcendental) factors. Terms sharing `(m, C)` form a group
//! with one atom `exp(u * m * C)`, where `u` is the gcd of all multipliers
//! seen for the group. Each exponential is then a Laurent monomial in atoms
//! and each hyperbolic function a ratio of polynomials in them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::{Bindings, Expr, ExprError, Func, Node, Rational, Symbol};
use crate::float::{bits_for_digits, BigFloat};
use crate::poly::{DegreeOverflow, Mono, Poly, MAX_VARS};

/// Largest atom exponent accepted when merging arguments.
const MAX_ATOM_POWER: i64 = 4096;
/// Cap on the number of monomials produced while expanding an argument.
const MAX_ARG_TERMS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct GroupKey {
    monomial: Vec<(Symbol, u32)>,
    cofactor: Expr,
}

impl GroupKey {
    fn to_expr(&self, scale: &Rational) -> Expr {
        let mut fs = alloc::vec![Expr::constant(scale.clone())];
        for (s, e) in &self.monomial {
            fs.push(Expr::raw_pow(Expr::from_symbol(s), i64::from(*e)));
        }
        fs.push(self.cofactor.clone());
        Expr::product(fs)
    }
}

/// A variable of the polynomial ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingVar {
    Symbol(Symbol),
    /// `exp(argument)`.
    Atom(Expr),
}

impl RingVar {
    pub fn to_expr(&self) -> Expr {
        match self {
            RingVar::Symbol(s) => Expr::from_symbol(s),
            RingVar::Atom(a) => Expr::exp(a.clone()),
        }
    }
}

fn merge_failure(what: impl Into<String>) -> ExprError {
    ExprError::AtomMergeFailure(what.into())
}

fn overflow(_: DegreeOverflow) -> ExprError {
    merge_failure("polynomial degree overflow")
}

type ArgTerm = (Rational, BTreeMap<Symbol, u32>, Vec<Expr>);

fn expand(e: &Expr) -> Result<Vec<ArgTerm>, ExprError> {
    Ok(match e.node() {
        Node::Const(q) => alloc::vec![(q.clone(), BTreeMap::new(), Vec::new())],
        Node::Symbol(s) => {
            let mut m = BTreeMap::new();
            m.insert(s.clone(), 1);
            alloc::vec![(Rational::one(), m, Vec::new())]
        }
        Node::Sum(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(expand(x)?);
            }
            out
        }
        Node::Product(xs) => {
            let mut acc = alloc::vec![(Rational::one(), BTreeMap::new(), Vec::new())];
            for x in xs {
                acc = cartesian(&acc, &expand(x)?)?;
            }
            acc
        }
        Node::Pow(b, n) if *n > 0 && matches!(b.node(), Node::Sum(_) | Node::Symbol(_)) => {
            let base = expand(b)?;
            let mut acc = alloc::vec![(Rational::one(), BTreeMap::new(), Vec::new())];
            for _ in 0..*n {
                acc = cartesian(&acc, &base)?;
            }
            acc
        }
        _ => alloc::vec![(Rational::one(), BTreeMap::new(), alloc::vec![e.clone()])],
    })
}

fn cartesian(a: &[ArgTerm], b: &[ArgTerm]) -> Result<Vec<ArgTerm>, ExprError> {
    if a.len() * b.len() > MAX_ARG_TERMS {
        return Err(merge_failure("exponential argument too large to expand"));
    }
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (qa, ma, ca) in a {
        for (qb, mb, cb) in b {
            let mut m = ma.clone();
            for (s, e) in mb {
                *m.entry(s.clone()).or_insert(0) += e;
            }
            let mut c = ca.clone();
            c.extend(cb.iter().cloned());
            out.push((qa * qb, m, c));
        }
    }
    Ok(out)
}

/// Groups an exponential argument by (monomial, cofactor).
fn argument_groups(arg: &Expr) -> Result<BTreeMap<GroupKey, Rational>, ExprError> {
    let mut groups: BTreeMap<GroupKey, Rational> = BTreeMap::new();
    for (q, m, cof) in expand(arg)? {
        let key = GroupKey { monomial: m.into_iter().collect(), cofactor: Expr::product(cof) };
        *groups.entry(key).or_insert_with(Rational::zero) += q;
    }
    groups.retain(|_, q| !q.is_zero());
    Ok(groups)
}

fn rational_gcd(a: &Rational, b: &Rational) -> Rational {
    let num = a.numer().gcd(b.numer());
    let den = a.denom().lcm(b.denom());
    Rational::new(num, den)
}

/// Polynomial ring whose variables are the plain symbols and exp atoms of a
/// set of expressions.
pub(crate) struct AtomRing {
    vars: Vec<RingVar>,
    symbol_index: BTreeMap<Symbol, usize>,
    groups: BTreeMap<GroupKey, (usize, Rational)>,
}

#[derive(Default)]
struct Registry {
    symbols: BTreeSet<Symbol>,
    units: BTreeMap<GroupKey, Rational>,
    seen: BTreeSet<usize>,
}

impl Registry {
    fn visit(&mut self, e: &Expr) -> Result<(), ExprError> {
        if !self.seen.insert(e.ptr_id()) {
            return Ok(());
        }
        match e.node() {
            Node::Const(_) => {}
            Node::Symbol(s) => {
                self.symbols.insert(s.clone());
            }
            Node::Sum(xs) | Node::Product(xs) => {
                for x in xs {
                    self.visit(x)?;
                }
            }
            Node::Pow(b, _) => self.visit(b)?,
            Node::Func(_, a) => {
                // hyperbolics use E = exp(a) and E^2, so the multiplier of a suffices
                for (key, q) in argument_groups(a)? {
                    let unit = q.abs();
                    self.units
                        .entry(key)
                        .and_modify(|u| *u = rational_gcd(u, &unit))
                        .or_insert(unit);
                }
                self.visit(a)?;
            }
            Node::Op(..) => return Err(ExprError::UnresolvedOperator(e.to_string())),
        }
        Ok(())
    }
}

impl AtomRing {
    pub(crate) fn for_exprs<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> Result<AtomRing, ExprError> {
        let mut reg = Registry::default();
        // hold the roots so pointer identities stay unique during the walk
        let roots: Vec<&Expr> = exprs.into_iter().collect();
        for e in &roots {
            reg.visit(e)?;
        }
        if reg.symbols.len() + reg.units.len() > MAX_VARS {
            return Err(merge_failure(alloc::format!(
                "{} symbols and {} exponential atoms exceed the ring size {MAX_VARS}",
                reg.symbols.len(),
                reg.units.len()
            )));
        }
        let mut vars = Vec::new();
        let mut symbol_index = BTreeMap::new();
        for s in reg.symbols {
            symbol_index.insert(s.clone(), vars.len());
            vars.push(RingVar::Symbol(s));
        }
        let mut groups = BTreeMap::new();
        for (key, unit) in reg.units {
            groups.insert(key.clone(), (vars.len(), unit.clone()));
            vars.push(RingVar::Atom(key.to_expr(&unit)));
        }
        Ok(AtomRing { vars, symbol_index, groups })
    }

    pub(crate) fn vars(&self) -> &[RingVar] {
        &self.vars
    }

    /// `exp(scale * arg)` as a Laurent monomial split into (positive, negative) parts.
    fn exp_monomials(&self, arg: &Expr, scale: i64) -> Result<(Mono, Mono), ExprError> {
        let mut pos = Mono::ONE;
        let mut neg = Mono::ONE;
        for (key, q) in argument_groups(arg)? {
            let (idx, unit) = self
                .groups
                .get(&key)
                .ok_or_else(|| merge_failure(alloc::format!("unregistered exponential argument in {arg}")))?;
            let k = q * Rational::from_integer(scale.into()) / unit;
            if !k.is_integer() {
                return Err(merge_failure(alloc::format!("non-integral atom power in exp({arg})")));
            }
            let k = k.to_integer().to_i64().filter(|k| k.abs() <= MAX_ATOM_POWER).ok_or_else(|| {
                merge_failure(alloc::format!("atom power too large in exp({arg})"))
            })?;
            let m = Mono::var(*idx, k.unsigned_abs() as u16);
            if k > 0 {
                pos = pos.mul(&m).ok_or_else(|| overflow(DegreeOverflow))?;
            } else {
                neg = neg.mul(&m).ok_or_else(|| overflow(DegreeOverflow))?;
            }
        }
        Ok((pos, neg))
    }

}

fn var_values(vars: &[RingVar], bindings: &Bindings, digits: u32) -> Result<Vec<BigFloat>, ExprError> {
    vars.iter().map(|v| v.to_expr().eval(bindings, digits)).collect()
}

/// `num / (coeff * prod factors[id]^e)` with the factor polynomials held by
/// the converter.
#[derive(Clone, Debug)]
pub(crate) struct Fraction {
    pub(crate) num: Poly,
    coeff: BigInt,
    factors: BTreeMap<usize, u32>,
}

impl Fraction {
    fn from_poly(p: Poly) -> Fraction {
        Fraction { num: p, coeff: BigInt::one(), factors: BTreeMap::new() }
    }

    fn constant(q: &Rational) -> Fraction {
        Fraction { num: Poly::constant(q.numer().clone()), coeff: q.denom().clone(), factors: BTreeMap::new() }
    }

    fn zero() -> Fraction {
        Fraction::from_poly(Poly::zero())
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// Converts expressions into fractions over one ring.
pub(crate) struct Converter<'r> {
    ring: &'r AtomRing,
    factors: Vec<Poly>,
    factor_index: BTreeMap<Poly, usize>,
    power_cache: BTreeMap<(usize, u32), Poly>,
    memo: BTreeMap<usize, Fraction>,
}

impl<'r> Converter<'r> {
    pub(crate) fn new(ring: &'r AtomRing) -> Self {
        Converter {
            ring,
            factors: Vec::new(),
            factor_index: BTreeMap::new(),
            power_cache: BTreeMap::new(),
            memo: BTreeMap::new(),
        }
    }

    fn intern(&mut self, p: Poly) -> usize {
        if let Some(&i) = self.factor_index.get(&p) {
            return i;
        }
        let i = self.factors.len();
        self.factors.push(p.clone());
        self.factor_index.insert(p, i);
        i
    }

    fn factor_power(&mut self, id: usize, e: u32) -> Result<Poly, ExprError> {
        if e == 0 {
            return Ok(Poly::one());
        }
        if let Some(p) = self.power_cache.get(&(id, e)) {
            return Ok(p.clone());
        }
        let p = self.factors[id].pow(e).map_err(overflow)?;
        self.power_cache.insert((id, e), p.clone());
        Ok(p)
    }

    fn normalize(&self, mut f: Fraction) -> Fraction {
        if f.num.is_zero() {
            return Fraction::zero();
        }
        let g = f.num.content().gcd(&f.coeff);
        if !g.is_one() {
            f.num = f.num.div_integer(&g).expect("gcd divides");
            f.coeff /= g;
        }
        f.factors.retain(|_, e| *e > 0);
        f
    }

    /// Removes denominator factors that divide the numerator exactly.
    fn cancel(&self, mut f: Fraction) -> Fraction {
        let ids: Vec<usize> = f.factors.keys().copied().collect();
        for id in ids {
            let fp = &self.factors[id];
            while f.factors[&id] > 0 {
                match f.num.div_exact(fp) {
                    Some(q) => {
                        f.num = q;
                        *f.factors.get_mut(&id).expect("present") -= 1;
                    }
                    None => break,
                }
            }
        }
        self.normalize(f)
    }

    pub(crate) fn add(&mut self, a: &Fraction, b: &Fraction) -> Result<Fraction, ExprError> {
        if a.is_zero() {
            return Ok(b.clone());
        }
        if b.is_zero() {
            return Ok(a.clone());
        }
        let coeff = a.coeff.lcm(&b.coeff);
        let mut factors = a.factors.clone();
        for (&id, &e) in &b.factors {
            let slot = factors.entry(id).or_insert(0);
            *slot = (*slot).max(e);
        }
        let mut ma = Poly::constant(&coeff / &a.coeff);
        let mut mb = Poly::constant(&coeff / &b.coeff);
        for (&id, &e) in &factors {
            let ea = a.factors.get(&id).copied().unwrap_or(0);
            let eb = b.factors.get(&id).copied().unwrap_or(0);
            ma = ma.mul(&self.factor_power(id, e - ea)?).map_err(overflow)?;
            mb = mb.mul(&self.factor_power(id, e - eb)?).map_err(overflow)?;
        }
        let num = a.num.mul(&ma).map_err(overflow)?.add(&b.num.mul(&mb).map_err(overflow)?);
        Ok(self.normalize(Fraction { num, coeff, factors }))
    }

    pub(crate) fn mul(&mut self, a: &Fraction, b: &Fraction) -> Result<Fraction, ExprError> {
        if a.is_zero() || b.is_zero() {
            return Ok(Fraction::zero());
        }
        let num = a.num.mul(&b.num).map_err(overflow)?;
        let mut factors = a.factors.clone();
        for (&id, &e) in &b.factors {
            *factors.entry(id).or_insert(0) += e;
        }
        let cancel_needed = !a.factors.is_empty() || !b.factors.is_empty();
        let f = Fraction { num, coeff: &a.coeff * &b.coeff, factors };
        Ok(if cancel_needed { self.cancel(f) } else { self.normalize(f) })
    }

    pub(crate) fn inverse(&mut self, a: &Fraction) -> Result<Fraction, ExprError> {
        if a.is_zero() {
            return Err(ExprError::DegenerateExpression("division by zero".to_string()));
        }
        let mut num = Poly::constant(a.coeff.clone());
        for (&id, &e) in &a.factors {
            num = num.mul(&self.factor_power(id, e)?).map_err(overflow)?;
        }
        let lead_negative = a.num.leading().map(|(_, c)| c.is_negative()).unwrap_or(false);
        let content = a.num.content();
        let mono = a.num.mono_content();
        let rest = a
            .num
            .div_mono(&mono)
            .and_then(|p| p.div_integer(&content))
            .expect("contents divide");
        let rest = if lead_negative { rest.neg() } else { rest };
        if lead_negative {
            num = num.neg();
        }
        let mut factors = BTreeMap::new();
        for (v, &e) in mono.exponents().iter().enumerate() {
            if e > 0 {
                let id = self.intern(Poly::var(v));
                factors.insert(id, u32::from(e));
            }
        }
        if !rest.is_one() {
            let id = self.intern(rest);
            *factors.entry(id).or_insert(0) += 1;
        }
        Ok(self.normalize(Fraction { num, coeff: content, factors }))
    }

    pub(crate) fn pow(&mut self, a: &Fraction, n: i64) -> Result<Fraction, ExprError> {
        let base = if n < 0 { self.inverse(a)? } else { a.clone() };
        let n = u32::try_from(n.unsigned_abs()).map_err(|_| merge_failure("exponent too large"))?;
        if n == 0 {
            return Ok(Fraction::from_poly(Poly::one()));
        }
        let num = base.num.pow(n).map_err(overflow)?;
        let coeff = num_traits::pow(base.coeff.clone(), n as usize);
        let factors = base.factors.iter().map(|(&id, &e)| (id, e * n)).collect();
        Ok(self.normalize(Fraction { num, coeff, factors }))
    }

    fn ratio(&mut self, num: Poly, den: Poly) -> Result<Fraction, ExprError> {
        let inv = self.inverse(&Fraction::from_poly(den))?;
        self.mul(&Fraction::from_poly(num), &inv)
    }

    pub(crate) fn convert(&mut self, e: &Expr) -> Result<Fraction, ExprError> {
        if let Some(f) = self.memo.get(&e.ptr_id()) {
            return Ok(f.clone());
        }
        let out = match e.node() {
            Node::Const(q) => Fraction::constant(q),
            Node::Symbol(s) => {
                let idx = *self
                    .ring
                    .symbol_index
                    .get(s)
                    .ok_or_else(|| merge_failure(alloc::format!("unregistered symbol {s}")))?;
                Fraction::from_poly(Poly::var(idx))
            }
            Node::Sum(xs) => {
                let mut acc = Fraction::zero();
                for x in xs {
                    let fx = self.convert(x)?;
                    acc = self.add(&acc, &fx)?;
                }
                acc
            }
            Node::Product(xs) => {
                let mut acc = Fraction::from_poly(Poly::one());
                for x in xs {
                    let fx = self.convert(x)?;
                    acc = self.mul(&acc, &fx)?;
                }
                acc
            }
            Node::Pow(b, n) => {
                let fb = self.convert(b)?;
                self.pow(&fb, *n)?
            }
            Node::Func(f, a) => self.function(*f, a)?,
            Node::Op(..) => return Err(ExprError::UnresolvedOperator(e.to_string())),
        };
        self.memo.insert(e.ptr_id(), out.clone());
        Ok(out)
    }

    fn function(&mut self, f: Func, arg: &Expr) -> Result<Fraction, ExprError> {
        let (p, q) = self.ring.exp_monomials(arg, 1)?;
        let one = BigInt::one();
        let two = BigInt::from(2);
        if f == Func::Exp {
            let num = Poly::monomial(p, one);
            let den = Poly::monomial(q, BigInt::one());
            return self.ratio(num, den);
        }
        // E = p/q, so E^2 = p^2/q^2 and E = pq/q^2
        let p2 = Poly::monomial(p.mul(&p).ok_or_else(|| overflow(DegreeOverflow))?, one.clone());
        let q2 = Poly::monomial(q.mul(&q).ok_or_else(|| overflow(DegreeOverflow))?, one.clone());
        let pq2 = Poly::monomial(p.mul(&q).ok_or_else(|| overflow(DegreeOverflow))?, two);
        let (num, den) = match f {
            Func::Tanh => (p2.sub(&q2), p2.add(&q2)),
            Func::Sech => (pq2, p2.add(&q2)),
            Func::Cosh => (p2.add(&q2), pq2),
            Func::Sinh => (p2.sub(&q2), pq2),
            Func::Exp => unreachable!("handled above"),
        };
        self.ratio(num, den)
    }

    fn factor_list(&self, f: &Fraction) -> Vec<(Poly, u32)> {
        f.factors.iter().map(|(&id, &e)| (self.factors[id].clone(), e)).collect()
    }
}

/// A fully cancelled quotient of polynomials over symbols and exp atoms.
#[derive(Clone, Debug)]
pub struct RationalFunctionForm {
    vars: Vec<RingVar>,
    numerator: Poly,
    denominator: Poly,
}

impl RationalFunctionForm {
    /// Ring variables; index `i` is variable `i` of the polynomials.
    pub fn variables(&self) -> &[RingVar] {
        &self.vars
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Expr> {
        self.vars.iter().filter_map(|v| match v {
            RingVar::Atom(a) => Some(a),
            RingVar::Symbol(_) => None,
        })
    }

    pub fn numerator(&self) -> &Poly {
        &self.numerator
    }

    pub fn denominator(&self) -> &Poly {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        let n = self.numerator.as_constant()?;
        let d = self.denominator.as_constant()?;
        Some(Rational::new(n, d))
    }

    fn poly_to_expr(&self, p: &Poly) -> Expr {
        let terms = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let mut fs = alloc::vec![Expr::constant(Rational::from_integer(c.clone()))];
                for (v, &e) in m.exponents().iter().enumerate() {
                    if e > 0 {
                        fs.push(Expr::raw_pow(self.vars[v].to_expr(), i64::from(e)));
                    }
                }
                Expr::product(fs)
            })
            .collect();
        Expr::sum(terms)
    }

    /// The form as an expression in the atoms.
    pub fn to_expr(&self) -> Expr {
        let num = self.poly_to_expr(&self.numerator);
        let den = self.poly_to_expr(&self.denominator);
        Expr::product(alloc::vec![num, Expr::raw_pow(den, -1)])
    }

    pub fn eval(&self, bindings: &Bindings, digits: u32) -> Result<BigFloat, ExprError> {
        let bits = bits_for_digits(digits) + 32;
        let values = var_values(&self.vars, bindings, digits + 10)?;
        let n = self.numerator.eval(&values, bits);
        let d = self.denominator.eval(&values, bits);
        n.div(&d, bits).map_err(|_| ExprError::PoleEvaluation)
    }
}

/// Rewrites `e` as a cancelled rational function over exp atoms.
pub fn to_exp_atoms(e: &Expr) -> Result<RationalFunctionForm, ExprError> {
    let e = e.simplify()?;
    let ring = AtomRing::for_exprs([&e])?;
    let mut conv = Converter::new(&ring);
    let f = conv.convert(&e)?;
    let factors = conv.factor_list(&f);
    let coeff = f.coeff.clone();
    let mut num = f.num;
    drop(conv);

    let mut pending = factors;
    let mut done: Vec<(Poly, u32)> = Vec::new();
    while let Some((fp, e)) = pending.pop() {
        if e == 0 || fp.as_constant().is_some() {
            continue;
        }
        if num.is_zero() {
            break;
        }
        let g = num.gcd(&fp).map_err(overflow)?;
        if g.as_constant().is_some() {
            done.push((fp, e));
            continue;
        }
        num = num.div_exact(&g).expect("gcd divides");
        let h = fp.div_exact(&g).expect("gcd divides");
        pending.push((g, e - 1));
        pending.push((h, e));
    }

    let mut den = Poly::constant(coeff);
    if num.is_zero() {
        den = Poly::one();
    } else {
        for (fp, e) in &done {
            den = den.mul(&fp.pow(*e).map_err(overflow)?).map_err(overflow)?;
        }
    }
    let g = num.content().gcd(&den.content());
    if !g.is_zero() && !g.is_one() {
        num = num.div_integer(&g).expect("gcd divides");
        den = den.div_integer(&g).expect("gcd divides");
    }
    if den.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
        num = num.neg();
        den = den.neg();
    }
    Ok(RationalFunctionForm { vars: ring.vars().to_vec(), numerator: num, denominator: den })
}

/// Whether `e` is identically zero as a rational function over exp atoms.
///
/// The numerator test needs no gcd: a sum over a common denominator is the
/// zero function exactly when its numerator polynomial vanishes.
pub(crate) fn numerator_vanishes(e: &Expr) -> Result<bool, ExprError> {
    let ring = AtomRing::for_exprs([e])?;
    let mut conv = Converter::new(&ring);
    Ok(conv.convert(e)?.is_zero())
}
