//! Re-parsable text rendering.

use alloc::vec::Vec;
use core::fmt::{self, Write};

use num_traits::{One, Signed};

use super::{format_rational, Expr, Node, Rational, SpaceOp};

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f, 0)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
    match e.node() {
        Node::Const(q) => {
            let needs_parens = (q.is_negative() && parent >= PREC_NEG)
                || (!q.is_integer() && parent >= PREC_PRODUCT);
            paren(f, needs_parens, |f| f.write_str(&format_rational(q)))
        }
        Node::Symbol(s) => f.write_str(s.as_str()),
        Node::Sum(terms) => paren(f, parent >= PREC_SUM, |f| {
            for (i, t) in terms.iter().enumerate() {
                let (negative, body) = signed_parts(t);
                match (i, negative) {
                    (0, true) => f.write_char('-')?,
                    (0, false) => {}
                    (_, true) => f.write_str(" - ")?,
                    (_, false) => f.write_str(" + ")?,
                }
                write_unsigned(&body, f, PREC_SUM)?;
            }
            Ok(())
        }),
        Node::Product(_) | Node::Pow(..) => {
            let (negative, body) = signed_parts(e);
            if negative {
                paren(f, parent >= PREC_NEG, |f| {
                    f.write_char('-')?;
                    write_unsigned(&body, f, PREC_NEG)
                })
            } else {
                write_unsigned(&body, f, parent)
            }
        }
        Node::Func(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(a, f, 0)?;
            f.write_char(')')
        }
        Node::Op(op, a) => match op {
            SpaceOp::Dx | SpaceOp::Dxx => {
                f.write_str(if *op == SpaceOp::Dx { "dx(" } else { "dxx(" })?;
                write_expr(a, f, 0)?;
                f.write_char(')')
            }
            SpaceOp::Shift(k) => {
                f.write_str("shift(")?;
                write_expr(a, f, 0)?;
                write!(f, ", {k})")
            }
        },
    }
}

/// A product or power split into a sign, a positive rational coefficient,
/// numerator factors and denominator factors (with positive exponents).
struct Fraction {
    coeff: Rational,
    num: Vec<Expr>,
    den: Vec<Expr>,
}

fn fraction_of(e: &Expr) -> (bool, Fraction) {
    let mut coeff = Rational::one();
    let mut num = Vec::new();
    let mut den = Vec::new();
    let factors: Vec<Expr> = match e.node() {
        Node::Product(fs) => fs.clone(),
        _ => alloc::vec![e.clone()],
    };
    for x in factors {
        match x.node() {
            Node::Const(q) => coeff *= q,
            Node::Pow(b, n) if *n < 0 => {
                den.push(if *n == -1 { b.clone() } else { Expr::from_node(Node::Pow(b.clone(), -n)) })
            }
            _ => num.push(x),
        }
    }
    let negative = coeff.is_negative();
    (negative, Fraction { coeff: coeff.abs(), num, den })
}

/// Sign of a term as displayed, and the term itself with the sign removed.
fn signed_parts(e: &Expr) -> (bool, Expr) {
    match e.node() {
        Node::Const(q) if q.is_negative() => (true, Expr::constant(-q)),
        Node::Product(_) => {
            let (negative, _) = fraction_of(e);
            if negative {
                (true, -e)
            } else {
                (false, e.clone())
            }
        }
        _ => (false, e.clone()),
    }
}

/// Writes a nonnegative term.
fn write_unsigned(e: &Expr, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
    match e.node() {
        Node::Product(_) | Node::Pow(..) => {}
        _ => return write_expr(e, f, parent),
    }
    let (_, frac) = fraction_of(e);
    let num_coeff = Expr::constant(Rational::from_integer(frac.coeff.numer().clone()));
    let den_coeff = Expr::constant(Rational::from_integer(frac.coeff.denom().clone()));
    let mut num: Vec<Expr> = Vec::new();
    if !frac.coeff.numer().is_one() {
        num.push(num_coeff);
    }
    num.extend(frac.num);
    let mut den: Vec<Expr> = Vec::new();
    // `1/(2*(a + b))` would reparse with the 2 absorbed by the sum
    let split_den = frac.den.iter().any(|x| matches!(x.node(), Node::Sum(_)));
    let lone_den = (!frac.coeff.denom().is_one() && split_den).then_some(den_coeff.clone());
    if !frac.coeff.denom().is_one() && !split_den {
        den.push(den_coeff);
    }
    den.extend(frac.den);

    let simple_power = num.len() == 1 && den.is_empty() && matches!(num[0].node(), Node::Pow(..));
    if simple_power {
        return paren(f, parent >= PREC_POW, |f| write_power(&num[0], f));
    }
    paren(f, parent >= PREC_PRODUCT, |f| {
        if num.is_empty() {
            f.write_char('1')?;
        }
        for (i, x) in num.iter().enumerate() {
            if i > 0 {
                f.write_char('*')?;
            }
            write_factor(x, f)?;
        }
        if let Some(k) = &lone_den {
            f.write_char('/')?;
            write_factor(k, f)?;
        }
        if !den.is_empty() {
            f.write_char('/')?;
            let group = den.len() > 1;
            paren(f, group, |f| {
                for (i, x) in den.iter().enumerate() {
                    if i > 0 {
                        f.write_char('*')?;
                    }
                    write_factor(x, f)?;
                }
                Ok(())
            })?;
        }
        Ok(())
    })
}

fn write_factor(x: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match x.node() {
        Node::Pow(..) => write_power(x, f),
        _ => write_expr(x, f, PREC_PRODUCT),
    }
}

fn write_power(x: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if let Node::Pow(b, n) = x.node() {
        if *n < 0 {
            f.write_str("1/")?;
            write_atom(b, f)?;
            if *n != -1 {
                write!(f, "^{}", -n)?;
            }
            return Ok(());
        }
        write_atom(b, f)?;
        write!(f, "^{n}")
    } else {
        write_expr(x, f, PREC_POW)
    }
}

fn write_atom(b: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let atomic = match b.node() {
        Node::Symbol(_) | Node::Func(..) | Node::Op(..) => true,
        Node::Const(q) => q.is_integer() && !q.is_negative(),
        _ => false,
    };
    paren(f, !atomic, |f| write_expr(b, f, 0))
}

fn paren(
    f: &mut fmt::Formatter<'_>,
    wrap: bool,
    body: impl FnOnce(&mut fmt::Formatter<'_>) -> fmt::Result,
) -> fmt::Result {
    if wrap {
        f.write_char('(')?;
        body(f)?;
        f.write_char(')')
    } else {
        body(f)
    }
}
