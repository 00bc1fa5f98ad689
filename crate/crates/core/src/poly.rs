//! Sparse multivariate polynomials with integer coefficients.
//!
//! Variables are small indices. Terms are kept sorted by lexicographic
//! monomial order, largest first, so the leading term is `terms[0]`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::float::BigFloat;

/// Most variables a polynomial ring may have.
pub const MAX_VARS: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mono([u16; MAX_VARS]);

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl core::fmt::Debug for Mono {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                write!(f, "x{i}")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

impl Mono {
    pub const ONE: Mono = Mono([0; MAX_VARS]);

    pub fn var(v: usize, e: u16) -> Mono {
        let mut m = Mono::ONE;
        m.0[v] = e;
        m
    }

    pub fn exponent(&self, v: usize) -> u16 {
        self.0[v]
    }

    pub fn exponents(&self) -> &[u16; MAX_VARS] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| u32::from(e)).sum()
    }

    pub fn mul(&self, other: &Mono) -> Option<Mono> {
        let mut out = Mono::ONE;
        for i in 0..MAX_VARS {
            out.0[i] = self.0[i].checked_add(other.0[i])?;
        }
        Some(out)
    }

    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = Mono::ONE;
        for i in 0..MAX_VARS {
            out.0[i] = self.0[i].checked_sub(other.0[i])?;
        }
        Some(out)
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Componentwise minimum.
    pub fn gcd(&self, other: &Mono) -> Mono {
        let mut out = Mono::ONE;
        for i in 0..MAX_VARS {
            out.0[i] = self.0[i].min(other.0[i]);
        }
        out
    }

    fn with(&self, v: usize, e: u16) -> Mono {
        let mut m = *self;
        m.0[v] = e;
        m
    }
}

/// Raised when a product would exceed the exponent range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeOverflow;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    terms: Vec<(Mono, BigInt)>,
}

impl core::fmt::Debug for Poly {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{m:?}")?;
        }
        Ok(())
    }
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn constant(c: BigInt) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: alloc::vec![(Mono::ONE, c)] }
        }
    }

    pub fn one() -> Poly {
        Poly::constant(BigInt::one())
    }

    pub fn var(v: usize) -> Poly {
        Poly::monomial(Mono::var(v, 1), BigInt::one())
    }

    pub fn monomial(m: Mono, c: BigInt) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: alloc::vec![(m, c)] }
        }
    }

    fn from_map(map: BTreeMap<Mono, BigInt>) -> Poly {
        let mut terms: Vec<(Mono, BigInt)> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.reverse();
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Mono, BigInt)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.as_slice() {
            [] => Some(BigInt::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.terms.as_slice(), [(m, c)] if m.is_one() && c.is_one())
    }

    pub fn leading(&self) -> Option<&(Mono, BigInt)> {
        self.terms.first()
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect() }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly, DegreeOverflow> {
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero());
        }
        if let Some(c) = self.as_constant() {
            return Ok(other.scale(&c));
        }
        if let Some(c) = other.as_constant() {
            return Ok(self.scale(&c));
        }
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        if small.len() == 1 {
            let (m, c) = &small.terms[0];
            let mut terms = Vec::with_capacity(large.len());
            for (lm, lc) in &large.terms {
                terms.push((lm.mul(m).ok_or(DegreeOverflow)?, lc * c));
            }
            return Ok(Poly { terms });
        }
        let mut acc: BTreeMap<Mono, BigInt> = BTreeMap::new();
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let m = ma.mul(mb).ok_or(DegreeOverflow)?;
                let prod = ca * cb;
                match acc.entry(m) {
                    alloc::collections::btree_map::Entry::Occupied(mut e) => *e.get_mut() += prod,
                    alloc::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        Ok(Poly::from_map(acc))
    }

    pub fn mul_mono(&self, m: &Mono) -> Result<Poly, DegreeOverflow> {
        let mut terms = Vec::with_capacity(self.len());
        for (tm, c) in &self.terms {
            terms.push((tm.mul(m).ok_or(DegreeOverflow)?, c.clone()));
        }
        Ok(Poly { terms })
    }

    pub fn pow(&self, n: u32) -> Result<Poly, DegreeOverflow> {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Greatest common divisor of the integer coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Largest monomial dividing every term.
    pub fn mono_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else { return Mono::ONE };
        it.fold(*first, |g, (m, _)| g.gcd(m))
    }

    /// Divides by the content and makes the leading coefficient positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.content();
        if self.terms[0].1.is_negative() {
            c = -c;
        }
        if c.is_one() {
            return self.clone();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (*m, k / &c)).collect() }
    }

    pub fn div_mono(&self, m: &Mono) -> Option<Poly> {
        let mut terms = Vec::with_capacity(self.len());
        for (tm, c) in &self.terms {
            terms.push((tm.div(m)?, c.clone()));
        }
        Some(Poly { terms })
    }

    pub fn div_integer(&self, k: &BigInt) -> Option<Poly> {
        let mut terms = Vec::with_capacity(self.len());
        for (m, c) in &self.terms {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            terms.push((*m, q));
        }
        Some(Poly { terms })
    }

    pub fn max_degree(&self, v: usize) -> u16 {
        self.terms.iter().map(|(m, _)| m.0[v]).max().unwrap_or(0)
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.terms.iter().any(|(m, _)| m.0[v] > 0)
    }

    /// Variables occurring in some term.
    pub fn variables(&self) -> Vec<usize> {
        (0..MAX_VARS).filter(|&v| self.contains_var(v)).collect()
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (dm, dc) = d.terms.first()?;
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if d.len() == 1 {
            let q = self.div_mono(dm)?;
            return q.div_integer(dc);
        }
        // cheap necessary conditions before the full division
        let (sm, sc) = &self.terms[0];
        if !dm.divides(sm) || !(sc % dc).is_zero() {
            return None;
        }
        let (tm, tc) = &self.terms[self.len() - 1];
        let (dtm, dtc) = &d.terms[d.len() - 1];
        if !dtm.divides(tm) || !(tc % dtc).is_zero() {
            return None;
        }
        for v in 0..MAX_VARS {
            if d.max_degree(v) > self.max_degree(v) {
                return None;
            }
        }
        let mut rem: BTreeMap<Mono, BigInt> = self.terms.iter().cloned().collect();
        let mut quot: Vec<(Mono, BigInt)> = Vec::new();
        while let Some((rm, rc)) = rem.pop_last() {
            let qm = rm.div(dm)?;
            let (qc, r) = rc.div_rem(dc);
            if !r.is_zero() {
                return None;
            }
            for (m, c) in d.terms.iter().skip(1) {
                let key = m.mul(&qm)?;
                let delta = c * &qc;
                match rem.entry(key) {
                    alloc::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                    alloc::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                }
            }
            quot.push((qm, qc));
        }
        Some(Poly { terms: quot })
    }

    /// Partial derivative with respect to variable `v`.
    pub fn derivative(&self, v: usize) -> Poly {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let e = m.0[v];
            if e > 0 {
                terms.push((m.with(v, e - 1), c * BigInt::from(e)));
            }
        }
        terms.sort_by_key(|t| core::cmp::Reverse(t.0));
        Poly { terms }
    }

    /// Evaluates with `values[v]` bound to variable `v`.
    pub fn eval(&self, values: &[BigFloat], bits: u64) -> BigFloat {
        let mut powers: BTreeMap<(usize, u16), BigFloat> = BTreeMap::new();
        let mut total = BigFloat::zero();
        for (m, c) in &self.terms {
            let mut term = BigFloat::from_bigint(c);
            for (v, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers
                    .entry((v, e))
                    .or_insert_with(|| values[v].powi(i64::from(e), bits).unwrap_or_else(|_| BigFloat::zero()));
                term = term.mul(p, bits);
            }
            total = total.add(&term, bits);
        }
        total
    }

    /// Coefficients of `self` seen as a univariate polynomial in `v`,
    /// keyed by degree.
    fn coefficients_in(&self, v: usize) -> BTreeMap<u16, Poly> {
        let mut groups: BTreeMap<u16, BTreeMap<Mono, BigInt>> = BTreeMap::new();
        for (m, c) in &self.terms {
            groups.entry(m.0[v]).or_default().insert(m.with(v, 0), c.clone());
        }
        groups.into_iter().map(|(d, map)| (d, Poly::from_map(map))).collect()
    }

    /// Greatest common divisor, primitive with positive leading coefficient
    /// times the gcd of the integer contents.
    pub fn gcd(&self, other: &Poly) -> Result<Poly, DegreeOverflow> {
        if self.is_zero() {
            return Ok(other.primitive().scale(&other.content()).normalized_sign());
        }
        if other.is_zero() {
            return Ok(self.primitive().scale(&self.content()).normalized_sign());
        }
        let mono = self.mono_content().gcd(&other.mono_content());
        let a = self.div_mono(&self.mono_content()).expect("content divides");
        let b = other.div_mono(&other.mono_content()).expect("content divides");
        let g = gcd_rec(&a, &b)?;
        g.mul_mono(&mono)
    }

    fn normalized_sign(self) -> Poly {
        match self.terms.first() {
            Some((_, c)) if c.is_negative() => self.neg(),
            _ => self,
        }
    }

    /// Substitutes `var -> var + shift` for a plain variable.
    pub fn translate(&self, v: usize, shift: &BigInt) -> Result<Poly, DegreeOverflow> {
        if shift.is_zero() || !self.contains_var(v) {
            return Ok(self.clone());
        }
        let coeffs = self.coefficients_in(v);
        let base = Poly::var(v).add(&Poly::constant(shift.clone()));
        let mut out = Poly::zero();
        // Horner in v
        for d in (0..=*coeffs.keys().next_back().unwrap_or(&0)).rev() {
            out = out.mul(&base)?;
            if let Some(c) = coeffs.get(&d) {
                out = out.add(c);
            }
        }
        Ok(out)
    }
}

fn gcd_rec(a: &Poly, b: &Poly) -> Result<Poly, DegreeOverflow> {
    if a.is_zero() {
        return Ok(b.primitive().scale(&b.content()));
    }
    if b.is_zero() {
        return Ok(a.primitive().scale(&a.content()));
    }
    if let Some(ca) = a.as_constant() {
        return Ok(Poly::constant(ca.gcd(&b.content())));
    }
    if let Some(cb) = b.as_constant() {
        return Ok(Poly::constant(cb.gcd(&a.content())));
    }
    if a == b {
        return Ok(a.clone().normalized_sign());
    }
    let in_a = a.variables();
    let in_b = b.variables();
    let Some(&v) = in_a.iter().find(|v| in_b.contains(v)) else {
        // no common variable: only the contents can be shared
        return Ok(Poly::constant(a.content().gcd(&b.content())));
    };
    if let Some(&w) = in_a.iter().find(|w| !in_b.contains(w)) {
        return gcd_rec(&content_in(a, w)?, b);
    }
    if let Some(&w) = in_b.iter().find(|w| !in_a.contains(w)) {
        return gcd_rec(a, &content_in(b, w)?);
    }
    let ca = content_in(a, v)?;
    let cb = content_in(b, v)?;
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let gc = gcd_rec(&ca, &cb)?;
    let gp = primitive_prs(pa, pb, v)?;
    Ok(gc.mul(&gp)?.normalized_sign())
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content_in(p: &Poly, v: usize) -> Result<Poly, DegreeOverflow> {
    let coeffs = p.coefficients_in(v);
    let mut g = Poly::zero();
    for c in coeffs.values() {
        g = gcd_rec(&g, c)?;
        if g.is_one() {
            break;
        }
    }
    Ok(g.normalized_sign())
}

fn primitive_in(p: &Poly, v: usize) -> Result<Poly, DegreeOverflow> {
    if p.is_zero() {
        return Ok(Poly::zero());
    }
    let c = content_in(p, v)?;
    Ok(p.div_exact(&c).expect("content divides").normalized_sign())
}

fn pseudo_remainder(a: &Poly, b: &Poly, v: usize) -> Result<Poly, DegreeOverflow> {
    let db = b.max_degree(v);
    let bc = b.coefficients_in(v);
    let lc_b = bc.get(&db).cloned().unwrap_or_else(Poly::zero);
    let mut r = a.clone();
    while !r.is_zero() && r.max_degree(v) >= db {
        let dr = r.max_degree(v);
        let rc = r.coefficients_in(v);
        let lc_r = rc.get(&dr).cloned().unwrap_or_else(Poly::zero);
        let shift = Mono::var(v, dr - db);
        r = r.mul(&lc_b)?.sub(&b.mul(&lc_r)?.mul_mono(&shift)?);
    }
    Ok(r)
}

fn primitive_prs(a: Poly, b: Poly, v: usize) -> Result<Poly, DegreeOverflow> {
    let (mut a, mut b) = if a.max_degree(v) >= b.max_degree(v) { (a, b) } else { (b, a) };
    while !b.is_zero() {
        if b.max_degree(v) == 0 {
            // b is free of v and primitive in v, so the gcd is 1
            return Ok(Poly::one());
        }
        let r = pseudo_remainder(&a, &b, v)?;
        a = b;
        b = primitive_in(&r, v)?;
    }
    primitive_in(&a, v)
}
