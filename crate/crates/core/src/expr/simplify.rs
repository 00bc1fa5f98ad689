//! Canonicalization.
//!
//! Canonical form: sums and products are flat, like terms and like bases are
//! collected, a product carries at most one (leading) constant factor and
//! none at all when it has a sum factor, integer
//! powers have exponents other than 0 and 1 and never a constant or product
//! base, and children are sorted by the total order on [`Node`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{Expr, ExprError, Func, Node, Rational, SpaceOp};

pub(super) fn strict(e: &Expr) -> Result<Expr, ExprError> {
    Simplifier::new(true).run(e)
}

pub(super) fn lenient(e: &Expr) -> Expr {
    Simplifier::new(false)
        .run(e)
        .expect("lenient simplification never fails")
}

/// Canonicalizes a node whose children are already canonical.
pub(crate) fn canonicalize_node(node: Node, strict: bool) -> Result<Expr, ExprError> {
    Simplifier::new(strict).node(node)
}

pub(super) struct Simplifier {
    strict: bool,
    memo: BTreeMap<usize, Expr>,
}

impl Simplifier {
    fn new(strict: bool) -> Self {
        Simplifier { strict, memo: BTreeMap::new() }
    }

    fn run(&mut self, e: &Expr) -> Result<Expr, ExprError> {
        if e.is_canonical() {
            return Ok(e.clone());
        }
        if let Some(done) = self.memo.get(&e.ptr_id()) {
            return Ok(done.clone());
        }
        let node = match e.node() {
            Node::Const(_) | Node::Symbol(_) => e.node().clone(),
            Node::Sum(xs) => Node::Sum(xs.iter().map(|x| self.run(x)).collect::<Result<_, _>>()?),
            Node::Product(xs) => {
                Node::Product(xs.iter().map(|x| self.run(x)).collect::<Result<_, _>>()?)
            }
            Node::Pow(b, n) => Node::Pow(self.run(b)?, *n),
            Node::Func(f, a) => Node::Func(*f, self.run(a)?),
            Node::Op(op, a) => Node::Op(*op, self.run(a)?),
        };
        let out = self.node(node)?;
        self.memo.insert(e.ptr_id(), out.clone());
        Ok(out)
    }

    fn node(&mut self, node: Node) -> Result<Expr, ExprError> {
        match node {
            Node::Const(_) | Node::Symbol(_) => Ok(Expr::canonical_node(node)),
            Node::Sum(xs) => Ok(sum(xs)),
            Node::Product(xs) => Ok(product(xs)),
            Node::Pow(b, n) => self.pow(b, n),
            Node::Func(f, a) => Ok(func(f, a)),
            Node::Op(SpaceOp::Shift(0), a) => Ok(a),
            Node::Op(op, a) => Ok(Expr::canonical_node(Node::Op(op, a))),
        }
    }

    fn pow(&mut self, base: Expr, n: i64) -> Result<Expr, ExprError> {
        if n == 0 {
            return Ok(Expr::one());
        }
        if n == 1 {
            return Ok(base);
        }
        match base.node() {
            Node::Const(q) => {
                if q.is_zero() {
                    if n < 0 {
                        if self.strict {
                            return Err(ExprError::DegenerateExpression(alloc::format!(
                                "0^{n} in constant folding"
                            )));
                        }
                        return Ok(Expr::canonical_node(Node::Pow(base.clone(), n)));
                    }
                    return Ok(Expr::zero());
                }
                match i32::try_from(n) {
                    Ok(n32) if q.abs().is_one() || n.unsigned_abs() <= 4096 => Ok(Expr::constant(q.pow(n32))),
                    _ => Ok(Expr::canonical_node(Node::Pow(base.clone(), n))),
                }
            }
            Node::Pow(inner, m) => match m.checked_mul(n) {
                Some(mn) => self.pow(inner.clone(), mn),
                None => Ok(Expr::canonical_node(Node::Pow(base.clone(), n))),
            },
            Node::Product(fs) => {
                let powered = fs
                    .iter()
                    .map(|f| self.pow(f.clone(), n))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(product(powered))
            }
            _ => Ok(Expr::canonical_node(Node::Pow(base, n))),
        }
    }
}

pub(super) fn split_coefficient(e: &Expr) -> (Rational, Expr) {
    match e.node() {
        Node::Const(q) => (q.clone(), Expr::one()),
        Node::Product(fs) => match fs[0].node() {
            Node::Const(c) => {
                let rest = if fs.len() == 2 {
                    fs[1].clone()
                } else {
                    Expr::canonical_node(Node::Product(fs[1..].to_vec()))
                };
                (c.clone(), rest)
            }
            _ => (Rational::one(), e.clone()),
        },
        _ => (Rational::one(), e.clone()),
    }
}

fn with_coefficient(c: Rational, rest: Expr) -> Expr {
    if c.is_one() {
        return rest;
    }
    if rest.is_one() {
        return Expr::constant(c);
    }
    let mut fs = Vec::new();
    fs.push(Expr::constant(c));
    match rest.node() {
        Node::Product(xs) => fs.extend(xs.iter().cloned()),
        _ => fs.push(rest),
    }
    Expr::canonical_node(Node::Product(fs))
}

fn sum(terms: Vec<Expr>) -> Expr {
    let mut constant = Rational::zero();
    let mut collected: BTreeMap<Expr, Rational> = BTreeMap::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        match t.node() {
            Node::Const(q) => constant += q,
            Node::Sum(xs) => stack.extend(xs.iter().cloned()),
            _ => {
                let (c, rest) = split_coefficient(&t);
                *collected.entry(rest).or_insert_with(Rational::zero) += c;
            }
        }
    }
    let mut out: Vec<Expr> = collected
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(rest, c)| with_coefficient(c, rest))
        .collect();
    if !constant.is_zero() {
        out.push(Expr::constant(constant));
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().expect("one term"),
        _ => {
            out.sort();
            Expr::canonical_node(Node::Sum(out))
        }
    }
}

fn product(factors: Vec<Expr>) -> Expr {
    let mut coeff = Rational::one();
    let mut powers: BTreeMap<Expr, i64> = BTreeMap::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Const(q) => coeff *= q,
            Node::Product(xs) => stack.extend(xs.iter().cloned()),
            Node::Pow(b, n) if !matches!(b.node(), Node::Const(_)) => {
                let slot = powers.entry(b.clone()).or_insert(0);
                *slot = slot.saturating_add(*n);
            }
            _ => {
                let slot = powers.entry(f.clone()).or_insert(0);
                *slot = slot.saturating_add(1);
            }
        }
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    let mut out: Vec<Expr> = powers
        .into_iter()
        .filter(|(_, n)| *n != 0)
        .map(|(b, n)| {
            if n == 1 {
                b
            } else {
                Expr::canonical_node(Node::Pow(b, n))
            }
        })
        .collect();
    out.sort();
    if out.is_empty() {
        return Expr::constant(coeff);
    }
    if coeff.is_one() && out.len() == 1 {
        return out.pop().expect("one factor");
    }
    if !coeff.is_one() {
        // a numeric coefficient is absorbed by the first linear sum factor
        if let Some(i) = out.iter().position(|f| matches!(f.node(), Node::Sum(_))) {
            let Node::Sum(terms) = out[i].node() else { unreachable!() };
            let scaled = terms
                .iter()
                .map(|t| {
                    let (c, rest) = split_coefficient(t);
                    with_coefficient(c * &coeff, rest)
                })
                .collect();
            out[i] = sum(scaled);
            return product(out);
        }
    }
    if !coeff.is_one() {
        out.insert(0, Expr::constant(coeff));
    }
    Expr::canonical_node(Node::Product(out))
}

fn func(f: Func, arg: Expr) -> Expr {
    if arg.is_zero() {
        return match f {
            Func::Exp | Func::Sech | Func::Cosh => Expr::one(),
            Func::Tanh | Func::Sinh => Expr::zero(),
        };
    }
    Expr::canonical_node(Node::Func(f, expand(&arg).unwrap_or(arg)))
}

/// Largest number of terms an expanded function argument may have.
const MAX_EXPANDED_TERMS: usize = 256;

/// Distributes products over sums and expands positive powers of sums.
/// Returns `None` when the result would be too large.
fn expand(e: &Expr) -> Option<Expr> {
    Some(match e.node() {
        Node::Sum(xs) => sum(xs.iter().map(expand).collect::<Option<Vec<_>>>()?),
        Node::Product(xs) => {
            let mut acc: Vec<Expr> = alloc::vec![Expr::one()];
            for x in xs {
                let x = expand(x)?;
                let parts: Vec<Expr> = match x.node() {
                    Node::Sum(ts) => ts.clone(),
                    _ => alloc::vec![x.clone()],
                };
                if acc.len() * parts.len() > MAX_EXPANDED_TERMS {
                    return None;
                }
                acc = acc
                    .iter()
                    .flat_map(|a| parts.iter().map(move |p| product(alloc::vec![a.clone(), p.clone()])))
                    .collect();
            }
            sum(acc)
        }
        Node::Pow(b, n) if *n > 1 && matches!(b.node(), Node::Sum(_)) => {
            let factors = alloc::vec![b.clone(); usize::try_from(*n).ok()?];
            expand(&Expr::canonical_node(Node::Product(factors)))?
        }
        _ => e.clone(),
    })
}
