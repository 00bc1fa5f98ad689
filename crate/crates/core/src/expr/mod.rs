//! Immutable symbolic expressions with exact rational constants.
//!
//! An [`Expr`] is a reference-counted tree. Structural equality and the
//! total order are defined on the tree shape, so two canonical forms (the
//! output of [`Expr::simplify`]) are the same expression exactly when they
//! compare equal.

mod calculus;
mod display;
mod eval;
mod simplify;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use eval::{Bindings, F64Bindings};

/// Exact rational constant.
pub type Rational = num_rational::BigRational;

/// Variable name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Elementary functions supported inside expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Tanh,
    Sech,
    Cosh,
    Sinh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "tanh" => Func::Tanh,
            "sech" => Func::Sech,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            _ => return None,
        })
    }
}

/// Spatial operators that appear on right-hand sides of evolution
/// equations. They are resolved by the consumer: symbolically
/// (differentiation or lattice shift), on a truncated series, or on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpaceOp {
    /// First derivative in the continuous space variable.
    Dx,
    /// Second derivative in the continuous space variable.
    Dxx,
    /// Lattice shift `n -> n + s`.
    Shift(i64),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Symbol(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, i64),
    Func(Func, Expr),
    Op(SpaceOp, Expr),
}

struct Inner {
    node: Node,
    canonical: bool,
    size: usize,
}

/// Immutable symbolic expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("degenerate expression: {0}")]
    DegenerateExpression(String),
    #[error("unbound symbol: {0}")]
    UnboundSymbol(String),
    #[error("pole: a denominator evaluates to zero")]
    PoleEvaluation,
    #[error("numeric overflow during evaluation")]
    Overflow,
    #[error("spatial operator {0} must be resolved before this operation")]
    UnresolvedOperator(String),
    #[error("exponential atoms cannot be merged: {0}")]
    AtomMergeFailure(String),
    #[error("precision must be at least 15 digits, got {0}")]
    PrecisionTooLow(u32),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.node.cmp(&other.0.node)
        }
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.node.hash(state)
    }
}

fn tree_size(node: &Node) -> usize {
    let children = match node {
        Node::Const(_) | Node::Symbol(_) => 0,
        Node::Sum(xs) | Node::Product(xs) => xs.iter().fold(0usize, |a, x| a.saturating_add(x.size())),
        Node::Pow(b, _) => b.size(),
        Node::Func(_, a) | Node::Op(_, a) => a.size(),
    };
    children.saturating_add(1)
}

impl Expr {
    fn build(node: Node, canonical: bool) -> Self {
        let size = tree_size(&node);
        Expr(Arc::new(Inner { node, canonical, size }))
    }

    /// Wraps a node without canonicalizing it.
    pub fn from_node(node: Node) -> Self {
        Self::build(node, false)
    }

    pub(crate) fn canonical_node(node: Node) -> Self {
        Self::build(node, true)
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn is_canonical(&self) -> bool {
        self.0.canonical
    }

    /// Number of nodes in the tree (shared subtrees counted per use).
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as *const () as usize
    }

    pub fn constant(q: Rational) -> Self {
        Self::canonical_node(Node::Const(q))
    }

    pub fn int(v: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::constant(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn symbol(name: &str) -> Self {
        Self::canonical_node(Node::Symbol(Symbol::new(name)))
    }

    pub fn from_symbol(s: &Symbol) -> Self {
        Self::canonical_node(Node::Symbol(s.clone()))
    }

    pub fn raw_sum(terms: Vec<Expr>) -> Self {
        Self::from_node(Node::Sum(terms))
    }

    pub fn raw_product(factors: Vec<Expr>) -> Self {
        Self::from_node(Node::Product(factors))
    }

    pub fn raw_pow(base: Expr, exponent: i64) -> Self {
        Self::from_node(Node::Pow(base, exponent))
    }

    pub fn raw_func(f: Func, arg: Expr) -> Self {
        Self::from_node(Node::Func(f, arg))
    }

    pub fn raw_op(op: SpaceOp, arg: Expr) -> Self {
        Self::from_node(Node::Op(op, arg))
    }

    /// Canonical sum of the given terms.
    pub fn sum(terms: Vec<Expr>) -> Self {
        simplify::lenient(&Self::raw_sum(terms))
    }

    /// Canonical product of the given factors.
    pub fn product(factors: Vec<Expr>) -> Self {
        simplify::lenient(&Self::raw_product(factors))
    }

    /// Canonical integer power. Raising an exact zero to a negative power is
    /// an error.
    pub fn pow(&self, exponent: i64) -> Result<Self, ExprError> {
        Self::raw_pow(self.clone(), exponent).simplify()
    }

    pub fn apply(f: Func, arg: Expr) -> Self {
        simplify::lenient(&Self::raw_func(f, arg))
    }

    pub fn exp(arg: Expr) -> Self {
        Self::apply(Func::Exp, arg)
    }

    pub fn tanh(arg: Expr) -> Self {
        Self::apply(Func::Tanh, arg)
    }

    pub fn sech(arg: Expr) -> Self {
        Self::apply(Func::Sech, arg)
    }

    pub fn cosh(arg: Expr) -> Self {
        Self::apply(Func::Cosh, arg)
    }

    pub fn sinh(arg: Expr) -> Self {
        Self::apply(Func::Sinh, arg)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    /// Canonical form. Fails only when constant folding meets an exact
    /// division by zero.
    pub fn simplify(&self) -> Result<Self, ExprError> {
        simplify::strict(self)
    }

    /// Exact derivative with respect to `s`, in canonical form.
    ///
    /// Spatial operator nodes are treated as commuting with the derivative,
    /// which holds for time derivatives of space operators.
    pub fn differentiate(&self, s: &Symbol) -> Result<Self, ExprError> {
        calculus::differentiate(self, s)
    }

    /// Replaces every occurrence of `s` by `replacement` and canonicalizes.
    pub fn substitute(&self, s: &Symbol, replacement: &Expr) -> Result<Self, ExprError> {
        calculus::substitute(self, s, replacement)
    }

    /// Resolves spatial operators symbolically: `dx`/`dxx` differentiate in
    /// `space`, `shift(f, s)` substitutes `space -> space + s`.
    pub fn resolve_operators(&self, space: &Symbol) -> Result<Self, ExprError> {
        calculus::resolve_operators(self, space)
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Symbol(t) => t == s,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(|x| x.contains_symbol(s)),
            Node::Pow(b, _) => b.contains_symbol(s),
            Node::Func(_, a) | Node::Op(_, a) => a.contains_symbol(s),
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Symbol(t) => {
                out.insert(t.clone());
            }
            Node::Sum(xs) | Node::Product(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Func(_, a) | Node::Op(_, a) => a.collect_symbols(out),
        }
    }

    pub fn contains_operator(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Symbol(_) => false,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(Expr::contains_operator),
            Node::Pow(b, _) => b.contains_operator(),
            Node::Func(_, a) => a.contains_operator(),
            Node::Op(..) => true,
        }
    }

    /// Every spatial operator occurring in the tree, in tree order.
    pub fn operators(&self) -> Vec<(SpaceOp, Expr)> {
        let mut out = Vec::new();
        self.collect_ops(&mut out);
        out
    }

    fn collect_ops(&self, out: &mut Vec<(SpaceOp, Expr)>) {
        match self.node() {
            Node::Const(_) | Node::Symbol(_) => {}
            Node::Sum(xs) | Node::Product(xs) => xs.iter().for_each(|x| x.collect_ops(out)),
            Node::Pow(b, _) => b.collect_ops(out),
            Node::Func(_, a) => a.collect_ops(out),
            Node::Op(op, a) => {
                out.push((*op, a.clone()));
                a.collect_ops(out);
            }
        }
    }

    /// High-precision evaluation with `digits` significant decimal digits.
    pub fn eval(&self, bindings: &Bindings, digits: u32) -> Result<crate::float::BigFloat, ExprError> {
        eval::eval(self, bindings, digits)
    }

    /// Double-precision evaluation.
    pub fn eval_f64(&self, bindings: &F64Bindings) -> Result<f64, ExprError> {
        eval::eval_f64(self, bindings)
    }

    /// Splits a canonical term into its rational coefficient and the rest.
    pub fn split_coefficient(&self) -> (Rational, Expr) {
        simplify::split_coefficient(self)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl core::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum(alloc::vec![self.clone(), rhs.clone()])
    }
}

impl core::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sum(alloc::vec![self.clone(), -rhs])
    }
}

impl core::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::product(alloc::vec![self.clone(), rhs.clone()])
    }
}

impl core::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product(alloc::vec![Expr::int(-1), self.clone()])
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl core::ops::$tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

/// Formats a rational as `p` or `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        alloc::format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests;
