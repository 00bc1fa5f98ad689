//! Serializable reports. Exact numbers (rationals, high-precision floats)
//! are strings; double-precision measurements are JSON numbers, with
//! non-finite values written as `null`.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;
use taylorcheck_core::numeric::{GridSolution, ValidityWindow};
use taylorcheck_core::series::{OrderEstimate, TimeSeries};
use taylorcheck_core::verify::{Check, ClaimReport, ScanTable};
use taylorcheck_core::zero::{SampleValue, Witness};
use taylorcheck_core::Bindings;

/// Provenance shared by every report.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub problem: String,
    pub problem_sha256: String,
    pub seed: u64,
    pub precision: u32,
    /// Effective parameter defaults after overrides.
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<T> {
    pub meta: Meta,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveBody {
    pub kind: &'static str,
    pub space: String,
    pub order: usize,
    pub fields: Vec<FieldSeries>,
    /// Whether the coefficient of `t^j` of `dt(series) - rhs(series)` is
    /// provably zero, per power `j < order` and field.
    pub defect: Vec<DefectRow>,
    pub residual_order: ResidualOrder,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldSeries {
    pub field: String,
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectRow {
    pub power: usize,
    pub proven_zero: Vec<bool>,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResidualOrder {
    Slope { value: f64 },
    Exact,
}

impl From<OrderEstimate> for ResidualOrder {
    fn from(e: OrderEstimate) -> Self {
        match e {
            OrderEstimate::Slope(value) => ResidualOrder::Slope { value },
            OrderEstimate::Exact => ResidualOrder::Exact,
        }
    }
}

impl FieldSeries {
    pub fn from_series(ts: &TimeSeries) -> FieldSeries {
        FieldSeries { field: ts.field.to_string(), coefficients: ts.coefficients.iter().map(ToString::to_string).collect() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyBody {
    pub claim: String,
    pub kind: &'static str,
    pub status: &'static str,
    pub evaluated: usize,
    pub skipped: usize,
    /// Largest confirmed nonzero sample over all checks.
    pub witness: Option<WitnessJson>,
    pub equations: Vec<CheckJson>,
    pub initial: Vec<CheckJson>,
    pub scan: Option<ScanJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckJson {
    pub field: String,
    pub verdict: &'static str,
    pub max_abs: Option<String>,
    pub witness: Option<WitnessJson>,
    pub evaluated: usize,
    pub skipped: usize,
    pub samples: Vec<SampleJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessJson {
    pub at: BTreeMap<String, String>,
    pub value: String,
    pub digits: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleJson {
    pub at: BTreeMap<String, String>,
    pub value: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanJson {
    pub symbol: String,
    pub fields: Vec<String>,
    pub rows: Vec<ScanRowJson>,
    /// Grid values where the initial deviation of each field is below the
    /// zero threshold.
    pub initial_zeros: Vec<Vec<String>>,
    pub residual_zeros: Vec<String>,
    pub sign_changes: Vec<Vec<[String; 2]>>,
    pub local_minima: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRowJson {
    pub value: String,
    pub initial: Vec<Option<f64>>,
    pub residual: Option<f64>,
}

fn bindings(b: &Bindings) -> BTreeMap<String, String> {
    b.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn witness(w: &Witness, digits: u32) -> WitnessJson {
    WitnessJson { at: bindings(&w.bindings), value: w.value.to_sci_string(digits), digits: w.digits }
}

fn check(c: &Check, digits: u32) -> CheckJson {
    let samples: Vec<SampleJson> = c
        .samples
        .iter()
        .map(|s| match &s.value {
            SampleValue::Value(v) => SampleJson { at: bindings(&s.bindings), value: Some(v.to_sci_string(digits)), error: None },
            SampleValue::Skipped(e) => SampleJson { at: bindings(&s.bindings), value: None, error: Some(e.to_string()) },
        })
        .collect();
    CheckJson {
        field: c.field.to_string(),
        verdict: c.verdict.label(),
        max_abs: c.max_abs.as_ref().map(|v| v.to_sci_string(digits)),
        witness: c.verdict.witness().map(|w| witness(w, digits)),
        evaluated: c.samples.len() - c.skipped(),
        skipped: c.skipped(),
        samples,
    }
}

/// Digits printed for sampled values.
const PRINT_DIGITS: u32 = 20;

impl VerifyBody {
    pub fn new(r: &ClaimReport, fields: &[String]) -> VerifyBody {
        VerifyBody {
            claim: r.claim.clone(),
            kind: r.kind.as_str(),
            status: r.status.as_str(),
            evaluated: r.evaluated(),
            skipped: r.skipped(),
            witness: r.worst_witness().map(|w| witness(w, PRINT_DIGITS)),
            equations: r.equations.iter().map(|c| check(c, PRINT_DIGITS)).collect(),
            initial: r.initial.iter().map(|c| check(c, PRINT_DIGITS)).collect(),
            scan: r.scan.as_ref().map(|s| ScanJson::new(s, fields)),
        }
    }
}

impl ScanJson {
    fn new(s: &ScanTable, fields: &[String]) -> ScanJson {
        let q = |v: &taylorcheck_core::Rational| v.to_string();
        ScanJson {
            symbol: s.symbol.to_string(),
            fields: fields.to_vec(),
            rows: s
                .rows
                .iter()
                .map(|r| ScanRowJson { value: q(&r.value), initial: r.initial.clone(), residual: r.residual })
                .collect(),
            initial_zeros: (0..fields.len()).map(|f| s.initial_zeros(f).iter().map(q).collect()).collect(),
            residual_zeros: s.residual_zeros().iter().map(q).collect(),
            sign_changes: (0..fields.len())
                .map(|f| s.sign_changes(f).iter().map(|(a, b)| [q(a), q(b)]).collect())
                .collect(),
            local_minima: s.local_minima().iter().map(q).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareBody {
    pub kind: &'static str,
    pub order: usize,
    pub t_max: f64,
    /// `null` when infinite.
    pub tol: Option<f64>,
    pub reference: SchemeJson,
    pub t_star: f64,
    pub per_field: Vec<FieldWindow>,
    /// Whether the largest error never decreases after `t_star`.
    pub monotone_after_t_star: bool,
    pub errors: Vec<ErrorRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemeJson {
    pub method: &'static str,
    pub h: f64,
    pub dt: f64,
    pub stability_bound: Option<f64>,
    pub boundary: &'static str,
    pub trust_radius: f64,
    pub points: usize,
    pub params: BTreeMap<String, f64>,
}

impl SchemeJson {
    pub fn new(g: &GridSolution) -> SchemeJson {
        let s = &g.scheme;
        SchemeJson {
            method: s.method,
            h: s.h,
            dt: s.dt,
            stability_bound: s.stability_bound,
            boundary: s.boundary,
            trust_radius: s.trust_radius,
            points: g.points.len(),
            params: s.params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldWindow {
    pub field: String,
    pub t_star: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorRow {
    pub t: f64,
    pub max: f64,
    pub per_field: Vec<f64>,
}

impl CompareBody {
    pub fn new(order: usize, t_max: f64, tol: f64, reference: &GridSolution, w: &ValidityWindow) -> CompareBody {
        let errors: Vec<ErrorRow> = w
            .errors
            .iter()
            .map(|(t, e)| ErrorRow { t: *t, max: e.iter().copied().fold(0.0, f64::max), per_field: e.clone() })
            .collect();
        let after: Vec<f64> = errors.iter().filter(|r| r.t > w.t_star).map(|r| r.max).collect();
        CompareBody {
            kind: reference.kind.as_str(),
            order,
            t_max,
            tol: tol.is_finite().then_some(tol),
            reference: SchemeJson::new(reference),
            t_star: w.t_star,
            per_field: reference
                .fields
                .iter()
                .zip(&w.per_field)
                .map(|(f, t)| FieldWindow { field: f.to_string(), t_star: *t })
                .collect(),
            monotone_after_t_star: after.windows(2).all(|p| p[1] >= p[0]),
            errors,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportBody {
    pub solve: SolveBody,
    pub claims: Vec<VerifyBody>,
    pub compare: Option<CompareBody>,
    /// Why the comparison did not complete, when it did not.
    pub compare_error: Option<String>,
}

/// Serialized with a trailing newline.
pub fn to_json<T: Serialize>(report: &Report<T>) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

fn meta_text(out: &mut String, m: &Meta) {
    let _ = writeln!(out, "{} {} {} {}", m.tool, m.version, m.command, m.problem);
    let _ = writeln!(out, "sha256 {}", m.problem_sha256);
    let params: Vec<String> = m.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let _ = writeln!(out, "seed {} precision {} params [{}]", m.seed, m.precision, params.join(", "));
}

pub fn solve_text(out: &mut String, b: &SolveBody) {
    let _ = writeln!(out, "{} series to order {} in {}", b.kind, b.order, b.space);
    for f in &b.fields {
        for (j, c) in f.coefficients.iter().enumerate() {
            let _ = writeln!(out, "  {}[{j}] = {c}", f.field);
        }
    }
    for d in &b.defect {
        let flags: Vec<&str> = d.proven_zero.iter().map(|&z| if z { "zero" } else { "NONZERO" }).collect();
        let _ = writeln!(out, "  defect t^{}: {}", d.power, flags.join(" "));
    }
    match b.residual_order {
        ResidualOrder::Slope { value } => {
            let _ = writeln!(out, "  residual order {value:.3}");
        }
        ResidualOrder::Exact => {
            let _ = writeln!(out, "  residual order: exact");
        }
    }
}

fn check_text(out: &mut String, what: &str, c: &CheckJson) {
    let _ = write!(out, "  {what} {}: {}", c.field, c.verdict);
    if let Some(m) = &c.max_abs {
        let _ = write!(out, ", max |value| {m}");
    }
    if let Some(w) = &c.witness {
        let at: Vec<String> = w.at.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = write!(out, ", witness {} at {}", w.value, at.join(" "));
    }
    let _ = writeln!(out, " ({} samples, {} skipped)", c.evaluated, c.skipped);
}

pub fn verify_text(out: &mut String, b: &VerifyBody) {
    let _ = writeln!(out, "claim {}: {}", b.claim, b.status);
    for c in &b.equations {
        check_text(out, "equation", c);
    }
    for c in &b.initial {
        check_text(out, "initial", c);
    }
    if let Some(s) = &b.scan {
        let _ = writeln!(out, "  scan over {}", s.symbol);
        let opt = |v: Option<f64>| v.map_or_else(|| "pole".to_string(), |v| format!("{v:.6e}"));
        for r in &s.rows {
            let ic: Vec<String> = r.initial.iter().map(|v| opt(*v)).collect();
            let _ = writeln!(out, "    {} = {:>8}  initial [{}]  residual {}", s.symbol, r.value, ic.join(", "), opt(r.residual));
        }
        for (f, z) in s.fields.iter().zip(&s.initial_zeros) {
            let _ = writeln!(out, "    initial {f} vanishes at [{}]", z.join(", "));
        }
        let _ = writeln!(out, "    residual vanishes at [{}]", s.residual_zeros.join(", "));
    }
}

/// Rows printed in the text error table.
const TEXT_ROWS: usize = 20;

pub fn compare_text(out: &mut String, b: &CompareBody) {
    let tol = b.tol.map_or_else(|| "inf".to_string(), |t| format!("{t:e}"));
    let _ = writeln!(out, "order {} against {} (h {}, dt {}), tol {tol}", b.order, b.reference.method, b.reference.h, b.reference.dt);
    let _ = writeln!(out, "  t* = {}", b.t_star);
    for f in &b.per_field {
        let _ = writeln!(out, "  t*({}) = {}", f.field, f.t_star);
    }
    let stride = b.errors.len().div_ceil(TEXT_ROWS).max(1);
    let _ = writeln!(out, "  {:>10}  {:>12}", "t", "max error");
    for (i, r) in b.errors.iter().enumerate() {
        if i % stride == 0 || i + 1 == b.errors.len() {
            let _ = writeln!(out, "  {:>10.6}  {:>12.4e}", r.t, r.max);
        }
    }
}

pub fn text<T>(report: &Report<T>, body: impl FnOnce(&mut String, &T)) -> String {
    let mut out = String::new();
    meta_text(&mut out, &report.meta);
    body(&mut out, &report.body);
    out
}

pub fn report_text(out: &mut String, b: &ReportBody) {
    solve_text(out, &b.solve);
    for c in &b.claims {
        verify_text(out, c);
    }
    match (&b.compare, &b.compare_error) {
        (Some(c), _) => compare_text(out, c),
        (None, Some(e)) => {
            let _ = writeln!(out, "compare failed: {e}");
        }
        (None, None) => {}
    }
}
