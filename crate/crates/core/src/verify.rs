//! Checking claimed closed-form solutions against a problem's equations and
//! initial data.
//!
//! A residual is first tested symbolically; sampling over the plan then
//! either produces a confirmed witness or leaves the verdict open. A claim is
//! `Satisfied` only on symbolic proof.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Bindings, Expr, ExprError, Rational, Symbol};
use crate::float::BigFloat;
use crate::parse::{Claim, Parameter, ProblemKind, ProblemSpec, TIME};
use crate::residual::{initial_deviations, residuals};
use crate::zero::{prove_zero, witness_at, SampleValue, Witness, ZeroVerdict, DEFAULT_DIGITS, NONZERO_THRESHOLD};

/// Seed of the parameter perturbations when none is given.
pub const DEFAULT_SEED: u64 = 0x5eed;
/// Number of perturbed parameter sets added to the defaults.
pub const PERTURBATIONS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("expected a {expected} problem, got {found}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("unknown parameter: {0}")]
    UnknownParameter(String),
    #[error("empty scan grid")]
    EmptyGrid,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Where residuals and deviations are sampled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePlan {
    pub space: Vec<Rational>,
    pub times: Vec<Rational>,
    /// Parameter sets; the first holds the defaults.
    pub params: Vec<Bindings>,
    pub seed: u64,
    pub digits: u32,
}

impl SamplePlan {
    /// Default plan: `x` in `{-2, -1, -1/2, 1/2, 1, 2}` or `n` in `-3..=3`,
    /// `t` in `{1/10, 1/2, 1}`, the parameter defaults and
    /// [`PERTURBATIONS`] seeded perturbations of them.
    pub fn new(spec: &ProblemSpec, params: &[Parameter], seed: u64, digits: u32) -> SamplePlan {
        let space = match spec.kind {
            ProblemKind::Pde => [(-2, 1), (-1, 1), (-1, 2), (1, 2), (1, 1), (2, 1)].iter().map(|&(p, q)| ratio(p, q)).collect(),
            ProblemKind::Dde => (-3..=3).map(|n| ratio(n, 1)).collect(),
        };
        let times = [(1, 10), (1, 2), (1, 1)].iter().map(|&(p, q)| ratio(p, q)).collect();
        SamplePlan { space, times, params: perturbed_parameters(params, seed), seed, digits }
    }

    /// Default plan for a claim, covering the claim's extra parameters.
    pub fn for_claim(spec: &ProblemSpec, claim: &Claim, seed: u64, digits: u32) -> SamplePlan {
        SamplePlan::new(spec, &spec.claim_parameters(claim), seed, digits)
    }

    /// Residual sample points: space x time x parameter set.
    pub fn residual_points(&self, space: &Symbol) -> Vec<Bindings> {
        let mut out = Vec::with_capacity(self.params.len() * self.space.len() * self.times.len());
        for p in &self.params {
            for x in &self.space {
                for t in &self.times {
                    out.push(p.clone().with(space.as_str(), x.clone()).with(TIME, t.clone()));
                }
            }
        }
        out
    }

    /// Initial-data sample points: space x parameter set.
    pub fn initial_points(&self, space: &Symbol) -> Vec<Bindings> {
        let mut out = Vec::with_capacity(self.params.len() * self.space.len());
        for p in &self.params {
            for x in &self.space {
                out.push(p.clone().with(space.as_str(), x.clone()));
            }
        }
        out
    }
}

fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

/// Defaults followed by sets where every parameter moves by a nonzero
/// multiple of 1/8 of magnitude at most one.
fn perturbed_parameters(params: &[Parameter], seed: u64) -> Vec<Bindings> {
    let defaults: Bindings = params.iter().map(|p| (p.name.clone(), p.default.clone())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = alloc::vec![defaults];
    for _ in 0..PERTURBATIONS {
        let set = params
            .iter()
            .map(|p| {
                let step = loop {
                    let s = i64::from(rng.next_u32() % 17) - 8;
                    if s != 0 {
                        break s;
                    }
                };
                (p.name.clone(), &p.default + ratio(step, 8))
            })
            .collect();
        out.push(set);
    }
    out
}

/// One evaluated sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub bindings: Bindings,
    pub value: SampleValue,
}

/// Verdict and evidence for one expression that should vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub field: Symbol,
    pub verdict: ZeroVerdict,
    /// Largest sampled magnitude, `None` when every sample was skipped.
    pub max_abs: Option<BigFloat>,
    pub samples: Vec<SampleRecord>,
}

impl Check {
    pub fn skipped(&self) -> usize {
        self.samples.iter().filter(|s| matches!(s.value, SampleValue::Skipped(_))).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Satisfied,
    Violated,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Satisfied => "Satisfied",
            Status::Violated => "Violated",
            Status::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClaimReport {
    pub claim: String,
    pub kind: ProblemKind,
    pub status: Status,
    /// One residual check per equation, in field order.
    pub equations: Vec<Check>,
    /// One initial-data check per field.
    pub initial: Vec<Check>,
    pub seed: u64,
    pub digits: u32,
    pub scan: Option<ScanTable>,
}

impl ClaimReport {
    pub fn evaluated(&self) -> usize {
        self.checks().map(|c| c.samples.len() - c.skipped()).sum()
    }

    pub fn skipped(&self) -> usize {
        self.checks().map(Check::skipped).sum()
    }

    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.equations.iter().chain(&self.initial)
    }

    /// Confirmed witness with the largest magnitude.
    pub fn worst_witness(&self) -> Option<&Witness> {
        self.checks()
            .filter_map(|c| c.verdict.witness())
            .max_by(|a, b| a.value.cmp_abs(&b.value))
    }
}

/// Aggregated status: `Satisfied` needs every check proven zero,
/// `Violated` needs one confirmed witness.
pub fn status_of<'a>(checks: impl IntoIterator<Item = &'a Check>) -> Status {
    let mut all_zero = true;
    for c in checks {
        match c.verdict {
            ZeroVerdict::ProvenNonZero(_) => return Status::Violated,
            ZeroVerdict::Unknown => all_zero = false,
            ZeroVerdict::ProvenZero => {}
        }
    }
    if all_zero {
        Status::Satisfied
    } else {
        Status::Inconclusive
    }
}

fn check(field: &Symbol, e: &Expr, points: Vec<Bindings>, digits: u32) -> Check {
    let proven = matches!(prove_zero(e), Ok(true));
    let mut best: Option<Witness> = None;
    let mut max_abs: Option<BigFloat> = None;
    let mut samples = Vec::with_capacity(points.len());
    for b in points {
        let (value, witness) = witness_at(e, &b, digits);
        if let SampleValue::Value(v) = &value {
            if max_abs.as_ref().is_none_or(|m| v.cmp_abs(m).is_gt()) {
                max_abs = Some(v.abs());
            }
        }
        if let Some(w) = witness {
            if best.as_ref().is_none_or(|cur| w.value.cmp_abs(&cur.value).is_gt()) {
                best = Some(w);
            }
        }
        samples.push(SampleRecord { bindings: b, value });
    }
    let verdict = match (proven, best) {
        (true, _) => ZeroVerdict::ProvenZero,
        (false, Some(w)) => ZeroVerdict::ProvenNonZero(w),
        (false, None) => ZeroVerdict::Unknown,
    };
    Check { field: field.clone(), verdict, max_abs, samples }
}

/// Checks a claim against a PDE system.
pub fn check_pde_claim(spec: &ProblemSpec, claim: &Claim, plan: &SamplePlan) -> Result<ClaimReport, VerifyError> {
    expect_kind(spec, ProblemKind::Pde)?;
    check_claim(spec, claim, plan)
}

/// Checks a claim against a lattice system.
pub fn check_dde_claim(spec: &ProblemSpec, claim: &Claim, plan: &SamplePlan) -> Result<ClaimReport, VerifyError> {
    expect_kind(spec, ProblemKind::Dde)?;
    check_claim(spec, claim, plan)
}

fn expect_kind(spec: &ProblemSpec, kind: ProblemKind) -> Result<(), VerifyError> {
    if spec.kind == kind {
        Ok(())
    } else {
        Err(VerifyError::WrongKind { expected: kind.as_str(), found: spec.kind.as_str() })
    }
}

/// Residual and initial-data checks for either kind.
pub fn check_claim(spec: &ProblemSpec, claim: &Claim, plan: &SamplePlan) -> Result<ClaimReport, VerifyError> {
    let res = residuals(spec, &claim.solutions)?;
    let equations = spec
        .fields
        .iter()
        .zip(&res)
        .map(|(f, r)| check(f, r, plan.residual_points(&spec.space), plan.digits))
        .collect();
    let initial = check_initial_condition(spec, claim, plan)?;
    let mut report = ClaimReport {
        claim: claim.name.clone(),
        kind: spec.kind,
        status: Status::Inconclusive,
        equations,
        initial,
        seed: plan.seed,
        digits: plan.digits,
        scan: None,
    };
    report.status = status_of(report.checks());
    Ok(report)
}

/// Per-field checks of `claim(t = 0) - initial condition`.
pub fn check_initial_condition(spec: &ProblemSpec, claim: &Claim, plan: &SamplePlan) -> Result<Vec<Check>, VerifyError> {
    let devs = initial_deviations(spec, &claim.solutions)?;
    Ok(spec
        .fields
        .iter()
        .zip(&devs)
        .map(|(f, d)| check(f, d, plan.initial_points(&spec.space), plan.digits))
        .collect())
}

/// One grid value of a parameter scan. Magnitudes are `None` when every
/// sample hit a pole.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub value: Rational,
    /// Largest initial-data deviation per field.
    pub initial: Vec<Option<f64>>,
    /// Largest residual over all equations.
    pub residual: Option<f64>,
    /// Signed initial-data deviation per field at the first sample point,
    /// used to bracket sign changes.
    pub reference: Vec<Option<f64>>,
}

impl ScanRow {
    pub fn max_initial(&self) -> Option<f64> {
        self.initial.iter().flatten().copied().reduce(f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable {
    pub symbol: Symbol,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    /// Grid values where the initial deviation of `field` stays at or below
    /// the nonzero threshold.
    pub fn initial_zeros(&self, field: usize) -> Vec<Rational> {
        self.rows
            .iter()
            .filter(|r| r.initial.get(field).copied().flatten().is_some_and(|m| m <= NONZERO_THRESHOLD))
            .map(|r| r.value.clone())
            .collect()
    }

    /// Grid values where every residual stays at or below the threshold.
    pub fn residual_zeros(&self) -> Vec<Rational> {
        self.rows
            .iter()
            .filter(|r| r.residual.is_some_and(|m| m <= NONZERO_THRESHOLD))
            .map(|r| r.value.clone())
            .collect()
    }

    /// Adjacent grid values between which the reference deviation of
    /// `field` changes sign.
    pub fn sign_changes(&self, field: usize) -> Vec<(Rational, Rational)> {
        let defined: Vec<(&Rational, f64)> = self
            .rows
            .iter()
            .filter_map(|r| r.reference.get(field).copied().flatten().map(|v| (&r.value, v)))
            .collect();
        defined
            .windows(2)
            .filter(|w| (w[0].1 < 0.0 && w[1].1 > 0.0) || (w[0].1 > 0.0 && w[1].1 < 0.0))
            .map(|w| (w[0].0.clone(), w[1].0.clone()))
            .collect()
    }

    /// Grid values whose largest deviation (initial or residual) is a
    /// strict local minimum of the table.
    pub fn local_minima(&self) -> Vec<Rational> {
        let worst: Vec<Option<f64>> = self
            .rows
            .iter()
            .map(|r| match (r.max_initial(), r.residual) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            })
            .collect();
        (0..worst.len())
            .filter(|&i| {
                let Some(here) = worst[i] else { return false };
                let left = i.checked_sub(1).and_then(|j| worst[j]);
                let right = worst.get(i + 1).copied().flatten();
                left.is_none_or(|l| here < l) && right.is_none_or(|r| here < r) && (left.is_some() || right.is_some())
            })
            .map(|i| self.rows[i].value.clone())
            .collect()
    }
}

/// Evenly spaced grid `lo, ..., hi` with `count` points.
pub fn linear_grid(lo: &Rational, hi: &Rational, count: usize) -> Vec<Rational> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo.clone()],
        _ => {
            let step = (hi - lo) / Rational::from_integer(((count - 1) as i64).into());
            (0..count).map(|i| lo + &step * Rational::from_integer((i as i64).into())).collect()
        }
    }
}

/// Largest initial deviation and residual for each value of `symbol`, over
/// the plan's space and time samples and every parameter set with `symbol`
/// overridden.
pub fn parameter_scan(
    spec: &ProblemSpec,
    claim: &Claim,
    symbol: &Symbol,
    grid: &[Rational],
    plan: &SamplePlan,
) -> Result<ScanTable, VerifyError> {
    if grid.is_empty() {
        return Err(VerifyError::EmptyGrid);
    }
    if !spec.claim_parameters(claim).iter().any(|p| &p.name == symbol) {
        return Err(VerifyError::UnknownParameter(symbol.to_string()));
    }
    let devs = initial_deviations(spec, &claim.solutions)?;
    let res = residuals(spec, &claim.solutions)?;
    let mut rows = Vec::with_capacity(grid.len());
    for value in grid {
        let mut sets: Vec<Bindings> = plan
            .params
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.insert(symbol.clone(), value.clone());
                b
            })
            .collect();
        sets.dedup();
        let scoped = SamplePlan { params: sets, ..plan.clone() };
        let ic_points = scoped.initial_points(&spec.space);
        let res_points = scoped.residual_points(&spec.space);
        let initial = devs.iter().map(|d| max_magnitude(d, &ic_points, plan.digits)).collect();
        let residual = res.iter().filter_map(|r| max_magnitude(r, &res_points, plan.digits)).reduce(f64::max);
        let reference = devs.iter().map(|d| d.eval(&ic_points[0], plan.digits).ok().map(|v| v.to_f64())).collect();
        rows.push(ScanRow { value: value.clone(), initial, residual, reference });
    }
    Ok(ScanTable { symbol: symbol.clone(), rows })
}

fn max_magnitude(e: &Expr, points: &[Bindings], digits: u32) -> Option<f64> {
    points
        .iter()
        .filter_map(|b| e.eval(b, digits).ok())
        .map(|v| v.to_f64().abs())
        .reduce(f64::max)
}

/// Plan with default seed and precision.
pub fn default_plan(spec: &ProblemSpec, claim: &Claim) -> SamplePlan {
    SamplePlan::for_claim(spec, claim, DEFAULT_SEED, DEFAULT_DIGITS)
}

#[cfg(test)]
mod tests;
