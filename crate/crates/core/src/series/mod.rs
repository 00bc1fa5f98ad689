//! Taylor-in-time series about `t = 0` by direct coefficient recursion.
//!
//! The right-hand sides are compiled into a DAG whose nodes carry truncated
//! power series in `t` with expression coefficients. Coefficient `k` of every
//! node depends only on coefficients `<= k` of its children, and the field
//! update is `c_{k+1} = rhs_k / (k + 1)`. Products use Cauchy sums,
//! reciprocals and elementary functions use their standard recurrences, and
//! spatial operators act on each coefficient separately.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::expr::{Bindings, Expr, ExprError, Func, Node, Rational, SpaceOp, Symbol};
use crate::float::{bits_for_digits, BigFloat};
use crate::parse::{ProblemKind, ProblemSpec, TIME};
use crate::residual::residuals;

/// Truncation order used when none is given.
pub const DEFAULT_ORDER: usize = 3;
/// Largest coefficient size, in tree nodes, before the recursion gives up.
pub const DEFAULT_NODE_BUDGET: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("expected a {expected} problem, got {found}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("order overflow: coefficient {order} of {node} has {size} nodes (budget {budget})")]
    OrderOverflow { node: String, order: usize, size: usize, budget: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Truncated Taylor series of one field: `sum_j coefficients[j] * t^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeSeries {
    pub field: Symbol,
    pub kind: ProblemKind,
    pub space: Symbol,
    pub coefficients: Vec<Expr>,
}

impl TimeSeries {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// The truncated series as an expression in `t`.
    pub fn truncated(&self) -> Expr {
        let t = Expr::symbol(TIME);
        let terms = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| Expr::product(alloc::vec![c.clone(), Expr::raw_pow(t.clone(), j as i64)]))
            .collect();
        Expr::sum(terms)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub node_budget: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { node_budget: DEFAULT_NODE_BUDGET }
    }
}

/// Series for a PDE system, one per field in field order.
pub fn pde_taylor(spec: &ProblemSpec, order: usize) -> Result<Vec<TimeSeries>, SeriesError> {
    expect_kind(spec, ProblemKind::Pde)?;
    taylor(spec, order, &SeriesOptions::default())
}

/// Series for a lattice system, one per field in field order.
pub fn dde_taylor(spec: &ProblemSpec, order: usize) -> Result<Vec<TimeSeries>, SeriesError> {
    expect_kind(spec, ProblemKind::Dde)?;
    taylor(spec, order, &SeriesOptions::default())
}

fn expect_kind(spec: &ProblemSpec, kind: ProblemKind) -> Result<(), SeriesError> {
    if spec.kind == kind {
        Ok(())
    } else {
        Err(SeriesError::WrongKind { expected: kind.as_str(), found: spec.kind.as_str() })
    }
}

/// Series for either kind with explicit options.
pub fn taylor(spec: &ProblemSpec, order: usize, options: &SeriesOptions) -> Result<Vec<TimeSeries>, SeriesError> {
    let mut graph = Graph::compile(spec)?;
    let mut fields: Vec<Vec<Expr>> = spec.initial.iter().map(|ic| alloc::vec![ic.clone()]).collect();
    for k in 0..order {
        graph.advance(k, &fields, options.node_budget)?;
        for (i, root) in graph.roots.iter().enumerate() {
            let rhs = graph.coefficient(*root, k);
            let next = scale(&rhs, &Rational::new(1.into(), ((k + 1) as i64).into()));
            check_budget(&next, spec.fields[i].as_str(), k + 1, options.node_budget)?;
            fields[i].push(next);
        }
    }
    Ok(spec
        .fields
        .iter()
        .zip(fields)
        .map(|(f, coefficients)| TimeSeries {
            field: f.clone(),
            kind: spec.kind,
            space: spec.space.clone(),
            coefficients,
        })
        .collect())
}

fn check_budget(e: &Expr, node: &str, order: usize, budget: usize) -> Result<(), SeriesError> {
    if e.size() > budget {
        return Err(SeriesError::OrderOverflow { node: node.to_string(), order, size: e.size(), budget });
    }
    Ok(())
}

fn scale(e: &Expr, q: &Rational) -> Expr {
    Expr::product(alloc::vec![Expr::constant(q.clone()), e.clone()])
}

fn is_zero(e: &Expr) -> bool {
    e.is_zero()
}

/// `sum_{i=0..k} a_i b_{k-i}`.
fn cauchy(a: &[Expr], b: &[Expr], k: usize) -> Expr {
    let terms = (0..=k)
        .filter(|&i| !is_zero(&a[i]) && !is_zero(&b[k - i]))
        .map(|i| Expr::product(alloc::vec![a[i].clone(), b[k - i].clone()]))
        .collect();
    Expr::sum(terms)
}

/// `(1/k) sum_{i=1..k} i a_i s_{k-i}`, the coefficient recurrence of
/// `f' = s * a'`.
fn chain(a: &[Expr], s: &[Expr], k: usize) -> Expr {
    let terms = (1..=k)
        .filter(|&i| !is_zero(&a[i]) && !is_zero(&s[k - i]))
        .map(|i| {
            Expr::product(alloc::vec![
                Expr::constant(Rational::new((i as i64).into(), (k as i64).into())),
                a[i].clone(),
                s[k - i].clone(),
            ])
        })
        .collect();
    Expr::sum(terms)
}

enum Kind {
    /// Free of fields: coefficient 0 is the expression, the rest vanish.
    Constant(Expr),
    Field(usize),
    Sum(Vec<usize>),
    Mul(usize, usize),
    Recip(usize),
    Exp(usize),
    /// tanh with auxiliary `1 - tanh^2`.
    Tanh(usize, Vec<Expr>),
    /// sech with auxiliaries tanh, sech^2 and sech*tanh.
    Sech(usize, [Vec<Expr>; 3]),
    /// cosh (or sinh when the flag is set) with its partner function.
    CoshSinh(usize, bool, Vec<Expr>),
    Space(SpaceOp, usize),
}

struct GNode {
    kind: Kind,
    coeffs: Vec<Expr>,
}

struct Graph {
    nodes: Vec<GNode>,
    roots: Vec<usize>,
    space: Symbol,
    memo: BTreeMap<usize, usize>,
    field_index: BTreeMap<Symbol, usize>,
}

impl Graph {
    fn compile(spec: &ProblemSpec) -> Result<Graph, SeriesError> {
        let mut g = Graph {
            nodes: Vec::new(),
            roots: Vec::new(),
            space: spec.space.clone(),
            memo: BTreeMap::new(),
            field_index: spec.fields.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect(),
        };
        for rhs in &spec.equations {
            let r = g.node(rhs)?;
            g.roots.push(r);
        }
        Ok(g)
    }

    fn push(&mut self, kind: Kind) -> usize {
        self.nodes.push(GNode { kind, coeffs: Vec::new() });
        self.nodes.len() - 1
    }

    fn depends_on_fields(&self, e: &Expr) -> bool {
        self.field_index.keys().any(|f| e.contains_symbol(f))
    }

    fn node(&mut self, e: &Expr) -> Result<usize, SeriesError> {
        if let Some(&id) = self.memo.get(&e.ptr_id()) {
            return Ok(id);
        }
        let id = if !self.depends_on_fields(e) {
            self.push(Kind::Constant(e.resolve_operators(&self.space)?))
        } else {
            match e.node() {
                Node::Symbol(s) => {
                    let i = self.field_index[s];
                    self.push(Kind::Field(i))
                }
                Node::Sum(xs) => {
                    let ids = xs.iter().map(|x| self.node(x)).collect::<Result<Vec<_>, _>>()?;
                    self.push(Kind::Sum(ids))
                }
                Node::Product(xs) => {
                    let mut acc = self.node(&xs[0])?;
                    for x in &xs[1..] {
                        let b = self.node(x)?;
                        acc = self.push(Kind::Mul(acc, b));
                    }
                    acc
                }
                Node::Pow(b, n) => {
                    let mut base = self.node(b)?;
                    if *n < 0 {
                        base = self.push(Kind::Recip(base));
                    }
                    self.power(base, n.unsigned_abs())
                }
                Node::Func(f, a) => {
                    let a = self.node(a)?;
                    self.push(match f {
                        Func::Exp => Kind::Exp(a),
                        Func::Tanh => Kind::Tanh(a, Vec::new()),
                        Func::Sech => Kind::Sech(a, [Vec::new(), Vec::new(), Vec::new()]),
                        Func::Cosh => Kind::CoshSinh(a, false, Vec::new()),
                        Func::Sinh => Kind::CoshSinh(a, true, Vec::new()),
                    })
                }
                Node::Op(op, a) => {
                    let a = self.node(a)?;
                    self.push(Kind::Space(*op, a))
                }
                Node::Const(_) => unreachable!("constants are field-free"),
            }
        };
        self.memo.insert(e.ptr_id(), id);
        Ok(id)
    }

    /// `base^n` for `n >= 1` by binary powering.
    fn power(&mut self, base: usize, n: u64) -> usize {
        let mut result: Option<usize> = None;
        let mut sq = base;
        let mut n = n;
        loop {
            if n & 1 == 1 {
                result = Some(match result {
                    Some(r) => self.push(Kind::Mul(r, sq)),
                    None => sq,
                });
            }
            n >>= 1;
            if n == 0 {
                break;
            }
            sq = self.push(Kind::Mul(sq, sq));
        }
        result.expect("exponent is nonzero")
    }

    fn coefficient(&self, id: usize, k: usize) -> Expr {
        self.nodes[id].coeffs[k].clone()
    }

    /// Computes coefficient `k` of every node. Nodes are stored in
    /// topological order because children are compiled first.
    fn advance(&mut self, k: usize, fields: &[Vec<Expr>], budget: usize) -> Result<(), SeriesError> {
        for id in 0..self.nodes.len() {
            let c = self.next_coefficient(id, k, fields)?;
            check_budget(&c, "an intermediate term", k, budget)?;
            self.nodes[id].coeffs.push(c);
        }
        Ok(())
    }

    fn next_coefficient(&mut self, id: usize, k: usize, fields: &[Vec<Expr>]) -> Result<Expr, SeriesError> {
        let space = self.space.clone();
        let (before, rest) = self.nodes.split_at_mut(id);
        let node = &mut rest[0];
        let co = |i: usize| -> &[Expr] { &before[i].coeffs };
        Ok(match &mut node.kind {
            Kind::Constant(e) => {
                if k == 0 {
                    e.clone()
                } else {
                    Expr::zero()
                }
            }
            Kind::Field(i) => fields[*i][k].clone(),
            Kind::Sum(ids) => Expr::sum(ids.iter().map(|&i| co(i)[k].clone()).collect()),
            Kind::Mul(a, b) => cauchy(co(*a), co(*b), k),
            Kind::Recip(b) => {
                let b = co(*b);
                if k == 0 {
                    b[0].pow(-1)?
                } else {
                    let r = &node.coeffs;
                    let terms = (1..=k)
                        .filter(|&i| !is_zero(&b[i]))
                        .map(|i| Expr::product(alloc::vec![b[i].clone(), r[k - i].clone()]))
                        .collect();
                    Expr::product(alloc::vec![Expr::int(-1), r[0].clone(), Expr::sum(terms)])
                }
            }
            Kind::Exp(a) => {
                let a = co(*a);
                if k == 0 {
                    Expr::exp(a[0].clone())
                } else {
                    chain(a, &node.coeffs, k)
                }
            }
            Kind::Tanh(a, s) => {
                let a = co(*a);
                let t = &node.coeffs;
                let tk = if k == 0 { Expr::tanh(a[0].clone()) } else { chain(a, s, k) };
                let mut t_ext: Vec<Expr> = t.clone();
                t_ext.push(tk.clone());
                let sq = cauchy(&t_ext, &t_ext, k);
                let sk = if k == 0 { Expr::one() - sq } else { -sq };
                s.push(sk);
                tk
            }
            Kind::Sech(a, [t, p, q]) => {
                let a = co(*a);
                let (hk, tk) = if k == 0 {
                    (Expr::sech(a[0].clone()), Expr::tanh(a[0].clone()))
                } else {
                    (-chain(a, q, k), chain(a, p, k))
                };
                t.push(tk);
                let mut h_ext: Vec<Expr> = node.coeffs.clone();
                h_ext.push(hk.clone());
                p.push(cauchy(&h_ext, &h_ext, k));
                q.push(cauchy(&h_ext, t, k));
                hk
            }
            Kind::CoshSinh(a, is_sinh, partner) => {
                let a = co(*a);
                let (own, other) = if k == 0 {
                    let (c, s) = (Expr::cosh(a[0].clone()), Expr::sinh(a[0].clone()));
                    if *is_sinh {
                        (s, c)
                    } else {
                        (c, s)
                    }
                } else {
                    (chain(a, partner, k), chain(a, &node.coeffs, k))
                };
                partner.push(other);
                own
            }
            Kind::Space(op, a) => {
                let c = &co(*a)[k];
                apply_space_op(*op, c, &space)?
            }
        })
    }
}

fn apply_space_op(op: SpaceOp, c: &Expr, space: &Symbol) -> Result<Expr, ExprError> {
    match op {
        SpaceOp::Dx => c.differentiate(space),
        SpaceOp::Dxx => c.differentiate(space)?.differentiate(space),
        SpaceOp::Shift(s) => {
            let shifted = Expr::from_symbol(space) + Expr::int(s);
            c.substitute(space, &shifted)
        }
    }
}

/// Evaluates the truncated series at one space point and time.
pub fn series_eval(
    ts: &TimeSeries,
    point: &Rational,
    t: &Rational,
    params: &Bindings,
    digits: u32,
) -> Result<BigFloat, ExprError> {
    let bindings = params.clone().with(ts.space.as_str(), point.clone());
    let bits = bits_for_digits(digits) + 16;
    let tf = BigFloat::from_rational(t, bits);
    let mut total = BigFloat::zero();
    let mut power = BigFloat::one();
    for (j, c) in ts.coefficients.iter().enumerate() {
        if j > 0 {
            power = power.mul(&tf, bits);
        }
        if t.is_zero() && j > 0 {
            break;
        }
        let v = c.eval(&bindings, digits + 5)?;
        total = total.add(&v.mul(&power, bits), bits);
    }
    Ok(total)
}

/// Coefficients of `t^0 .. t^{n-1}` of `dt(series) - rhs(series)`, per
/// equation, obtained by differentiating the substituted residual in `t`.
pub fn defect_coefficients(spec: &ProblemSpec, series: &[TimeSeries], n: usize) -> Result<Vec<Vec<Expr>>, ExprError> {
    let truncated: Vec<Expr> = series.iter().map(TimeSeries::truncated).collect();
    let t = Symbol::new(TIME);
    let mut out = Vec::new();
    for r in residuals(spec, &truncated)? {
        let mut coeffs = Vec::with_capacity(n);
        let mut d = r;
        let mut factorial = Rational::from_integer(1.into());
        for m in 0..n {
            if m > 0 {
                d = d.differentiate(&t)?;
                factorial *= Rational::from_integer((m as i64).into());
            }
            let at0 = d.substitute(&t, &Expr::zero())?;
            coeffs.push(scale(&at0, &(Rational::from_integer(1.into()) / &factorial)));
        }
        out.push(coeffs);
    }
    Ok(out)
}

/// Whether the low-order defect coefficients are all provably zero.
pub fn defect_vanishes(spec: &ProblemSpec, series: &[TimeSeries]) -> Result<bool, ExprError> {
    let n = series.iter().map(TimeSeries::order).min().unwrap_or(0);
    for coeffs in defect_coefficients(spec, series, n)? {
        for c in coeffs {
            if !crate::zero::prove_zero(&c)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Residual samples for [`residual_order`].
#[derive(Clone, Debug)]
pub struct ResidualSamples {
    /// Decreasing sample times.
    pub times: Vec<Rational>,
    pub points: Vec<Rational>,
    pub params: Bindings,
    pub digits: u32,
}

/// Magnitudes at or below this count as exact zeros.
pub const EXACTNESS_FLOOR: f64 = 1e-25;

impl ResidualSamples {
    /// Times `1e-1, 5e-2, 2e-2, ... , 1e-4`, a few interior space points
    /// and the parameter defaults.
    pub fn for_spec(spec: &ProblemSpec) -> ResidualSamples {
        let times = [10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000]
            .iter()
            .map(|&d| Rational::new(1.into(), d.into()))
            .collect();
        let points = match spec.kind {
            ProblemKind::Pde => [(-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1)]
                .iter()
                .map(|&(p, q)| Rational::new(p.into(), q.into()))
                .collect(),
            ProblemKind::Dde => (-2..=2).map(|n: i64| Rational::from_integer(n.into())).collect(),
        };
        let params = spec.params.iter().map(|p| (p.name.clone(), p.default.clone())).collect();
        ResidualSamples { times, points, params, digits: 40 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrderEstimate {
    /// Least-squares slope of `log |residual|` against `log t`.
    Slope(f64),
    /// The residual stays below the exactness floor.
    Exact,
}

/// Measured order of the residual left by candidate solutions (series
/// truncations or closed forms), maximised over the space points.
pub fn residual_order(
    spec: &ProblemSpec,
    candidates: &[Expr],
    samples: &ResidualSamples,
) -> Result<OrderEstimate, ExprError> {
    let res = residuals(spec, candidates)?;
    let floor = BigFloat::from_f64(EXACTNESS_FLOOR);
    let mut logs: Vec<(f64, f64)> = Vec::new();
    for t in &samples.times {
        let mut worst = BigFloat::zero();
        for x in &samples.points {
            let b = samples.params.clone().with(spec.space.as_str(), x.clone()).with(TIME, t.clone());
            for r in &res {
                let v = r.eval(&b, samples.digits)?;
                if v.cmp_abs(&worst).is_gt() {
                    worst = v.abs();
                }
            }
        }
        if worst.cmp_abs(&floor).is_gt() {
            let lt = libm::log10(crate::float::rational_to_f64(t));
            logs.push((lt, worst.log10_abs().unwrap_or(f64::NEG_INFINITY)));
        }
    }
    if logs.len() < 2 {
        return Ok(OrderEstimate::Exact);
    }
    Ok(OrderEstimate::Slope(least_squares_slope(&logs)))
}

/// Convenience wrapper over truncated series.
pub fn series_residual_order(
    spec: &ProblemSpec,
    series: &[TimeSeries],
    samples: &ResidualSamples,
) -> Result<OrderEstimate, ExprError> {
    let candidates: Vec<Expr> = series.iter().map(TimeSeries::truncated).collect();
    residual_order(spec, &candidates, samples)
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests;
