use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::simplify::canonicalize_node;
use super::{Expr, ExprError, Func, Node, SpaceOp, Symbol};

pub(super) fn differentiate(e: &Expr, s: &Symbol) -> Result<Expr, ExprError> {
    let e = e.simplify()?;
    let mut memo = BTreeMap::new();
    Ok(deriv(&e, s, &mut memo))
}

fn deriv(e: &Expr, s: &Symbol, memo: &mut BTreeMap<usize, Expr>) -> Expr {
    if let Some(d) = memo.get(&e.ptr_id()) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Symbol(t) => {
            if t == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(xs) => Expr::sum(xs.iter().map(|x| deriv(x, s, memo)).collect()),
        Node::Product(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = deriv(f, s, memo);
                if df.is_zero() {
                    continue;
                }
                let mut factors = fs.clone();
                factors[i] = df;
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Pow(b, n) => {
            let db = deriv(b, s, memo);
            if db.is_zero() {
                Expr::zero()
            } else {
                let lowered = Expr::product(alloc::vec![Expr::raw_pow(b.clone(), n - 1)]);
                Expr::product(alloc::vec![Expr::int(*n), lowered, db])
            }
        }
        Node::Func(f, a) => {
            let da = deriv(a, s, memo);
            if da.is_zero() {
                Expr::zero()
            } else {
                let outer = match f {
                    Func::Exp => e.clone(),
                    Func::Tanh => Expr::product(alloc::vec![Expr::raw_pow(Expr::sech(a.clone()), 2)]),
                    Func::Sech => Expr::product(alloc::vec![
                        Expr::int(-1),
                        e.clone(),
                        Expr::tanh(a.clone())
                    ]),
                    Func::Cosh => Expr::sinh(a.clone()),
                    Func::Sinh => Expr::cosh(a.clone()),
                };
                Expr::product(alloc::vec![outer, da])
            }
        }
        Node::Op(op, a) => {
            let da = deriv(a, s, memo);
            if da.is_zero() {
                Expr::zero()
            } else {
                Expr::product(alloc::vec![Expr::raw_op(*op, da)])
            }
        }
    };
    memo.insert(e.ptr_id(), d.clone());
    d
}

pub(super) fn substitute(e: &Expr, s: &Symbol, r: &Expr) -> Result<Expr, ExprError> {
    let e = e.simplify()?;
    let r = r.simplify()?;
    let mut memo = BTreeMap::new();
    Ok(subst(&e, s, &r, &mut memo)?.0)
}

/// Returns the substituted expression and whether anything changed.
fn subst(
    e: &Expr,
    s: &Symbol,
    r: &Expr,
    memo: &mut BTreeMap<usize, (Expr, bool)>,
) -> Result<(Expr, bool), ExprError> {
    if let Some(done) = memo.get(&e.ptr_id()) {
        return Ok(done.clone());
    }
    let out = match e.node() {
        Node::Const(_) => (e.clone(), false),
        Node::Symbol(t) => {
            if t == s {
                (r.clone(), true)
            } else {
                (e.clone(), false)
            }
        }
        Node::Sum(xs) | Node::Product(xs) => {
            let mut changed = false;
            let mut ys = Vec::with_capacity(xs.len());
            for x in xs {
                let (y, c) = subst(x, s, r, memo)?;
                changed |= c;
                ys.push(y);
            }
            if !changed {
                (e.clone(), false)
            } else if matches!(e.node(), Node::Sum(_)) {
                (canonicalize_node(Node::Sum(ys), true)?, true)
            } else {
                (canonicalize_node(Node::Product(ys), true)?, true)
            }
        }
        Node::Pow(b, n) => {
            let (y, c) = subst(b, s, r, memo)?;
            if c {
                (canonicalize_node(Node::Pow(y, *n), true)?, true)
            } else {
                (e.clone(), false)
            }
        }
        Node::Func(f, a) => {
            let (y, c) = subst(a, s, r, memo)?;
            if c {
                (canonicalize_node(Node::Func(*f, y), true)?, true)
            } else {
                (e.clone(), false)
            }
        }
        Node::Op(op, a) => {
            let (y, c) = subst(a, s, r, memo)?;
            if c {
                (canonicalize_node(Node::Op(*op, y), true)?, true)
            } else {
                (e.clone(), false)
            }
        }
    };
    memo.insert(e.ptr_id(), out.clone());
    Ok(out)
}

pub(super) fn resolve_operators(e: &Expr, space: &Symbol) -> Result<Expr, ExprError> {
    let e = e.simplify()?;
    let mut memo = BTreeMap::new();
    resolve(&e, space, &mut memo)
}

fn resolve(e: &Expr, space: &Symbol, memo: &mut BTreeMap<usize, Expr>) -> Result<Expr, ExprError> {
    if !e.contains_operator() {
        return Ok(e.clone());
    }
    if let Some(done) = memo.get(&e.ptr_id()) {
        return Ok(done.clone());
    }
    let out = match e.node() {
        Node::Const(_) | Node::Symbol(_) => e.clone(),
        Node::Sum(xs) => canonicalize_node(
            Node::Sum(xs.iter().map(|x| resolve(x, space, memo)).collect::<Result<_, _>>()?),
            true,
        )?,
        Node::Product(xs) => canonicalize_node(
            Node::Product(xs.iter().map(|x| resolve(x, space, memo)).collect::<Result<_, _>>()?),
            true,
        )?,
        Node::Pow(b, n) => canonicalize_node(Node::Pow(resolve(b, space, memo)?, *n), true)?,
        Node::Func(f, a) => canonicalize_node(Node::Func(*f, resolve(a, space, memo)?), true)?,
        Node::Op(op, a) => {
            let inner = resolve(a, space, memo)?;
            match op {
                SpaceOp::Dx => inner.differentiate(space)?,
                SpaceOp::Dxx => inner.differentiate(space)?.differentiate(space)?,
                SpaceOp::Shift(k) => {
                    let shifted = Expr::from_symbol(space) + Expr::int(*k);
                    inner.substitute(space, &shifted)?
                }
            }
        }
    };
    memo.insert(e.ptr_id(), out.clone());
    Ok(out)
}
