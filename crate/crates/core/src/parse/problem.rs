//! Problem files.
//!
//! ```text
//! # comment
//! [problem]
//! name = reaction-diffusion
//! kind = pde                 # pde | dde
//! space = x                  # default x (pde) or n (dde)
//! fields = u, v
//! params = k                 # NAME or NAME=VALUE; default value 1
//!
//! [equations]
//! dt(u) = u*(1 - u - v) + dxx(u)
//!
//! [initial]
//! u = exp(-k*x)/(1 + exp(-k*x/2))^2
//!
//! [claim.NAME]
//! params = c                 # parameters used only by this claim
//! let z = x + c*t            # applies to the lines that follow
//! u = exp(k*z)/(1 + exp(k*z/2))^2
//! ```

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::One;

use super::expression::{parse_at, Origin};
use super::{ParseError, SourceError, ValidationError};
use crate::expr::{Expr, Rational, SpaceOp, Symbol};

/// The time variable of every problem.
pub const TIME: &str = "t";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProblemKind {
    /// Evolution PDE in one continuous space variable.
    Pde,
    /// Differential-difference equation on an integer lattice.
    Dde,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Pde => "pde",
            ProblemKind::Dde => "dde",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parameter {
    pub name: Symbol,
    pub default: Rational,
}

/// A claimed closed-form solution, one expression per field in field order.
#[derive(Clone, Debug)]
pub struct Claim {
    pub name: String,
    pub extra_params: Vec<Parameter>,
    pub solutions: Vec<Expr>,
}

/// A validated evolution system `dt(field) = rhs` with initial data.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: Option<String>,
    pub kind: ProblemKind,
    pub space: Symbol,
    pub fields: Vec<Symbol>,
    pub params: Vec<Parameter>,
    /// Right-hand sides in field order.
    pub equations: Vec<Expr>,
    /// Initial conditions in field order.
    pub initial: Vec<Expr>,
    pub claims: Vec<Claim>,
}

impl ProblemSpec {
    pub fn time(&self) -> Symbol {
        Symbol::new(TIME)
    }

    pub fn field_index(&self, field: &Symbol) -> Option<usize> {
        self.fields.iter().position(|f| f == field)
    }

    pub fn claim(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }

    pub fn parameter(&self, name: &Symbol) -> Option<&Parameter> {
        self.params.iter().find(|p| &p.name == name)
    }

    /// Problem parameters followed by the claim's own parameters.
    pub fn claim_parameters(&self, claim: &Claim) -> Vec<Parameter> {
        let mut out = self.params.clone();
        out.extend(claim.extra_params.iter().cloned());
        out
    }

    /// Spatial shifts used by the right-hand sides, sorted and deduplicated.
    pub fn shifts(&self) -> Vec<i64> {
        let set: BTreeSet<i64> = self
            .equations
            .iter()
            .flat_map(|e| e.operators())
            .filter_map(|(op, _)| match op {
                SpaceOp::Shift(s) => Some(s),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    }
}

#[derive(PartialEq)]
enum Section {
    None,
    Problem,
    Equations,
    Initial,
    Claim(usize),
}

struct RawClaim {
    name: String,
    line: usize,
    params: Vec<Parameter>,
    lets: Vec<(Symbol, Expr)>,
    solutions: Vec<(Symbol, Expr, usize)>,
}

struct Builder {
    name: Option<String>,
    kind: Option<ProblemKind>,
    space: Option<Symbol>,
    fields: Option<(Vec<Symbol>, usize)>,
    params: Vec<Parameter>,
    equations: Vec<(Symbol, Expr, usize)>,
    initial: Vec<(Symbol, Expr, usize)>,
    claims: Vec<RawClaim>,
    seen_problem: bool,
}

fn source(line: usize, column: usize, token: &str, message: String) -> ParseError {
    ParseError::Source(SourceError { line, column, message, token: token.to_string() })
}

fn invalid(line: Option<usize>, message: String) -> ParseError {
    ParseError::Validation(ValidationError { message, line })
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// One `key = value` line split into trimmed parts with the 1-based column
/// at which the value starts.
struct KeyValue<'a> {
    key: &'a str,
    key_col: usize,
    value: &'a str,
    value_col: usize,
}

fn split_key_value(line: &str, line_no: usize) -> Result<KeyValue<'_>, ParseError> {
    let Some(eq) = line.find('=') else {
        let col = line.chars().take_while(|c| c.is_whitespace()).count() + 1;
        return Err(source(line_no, col, line.trim(), "expected 'key = value'".to_string()));
    };
    let (lhs, rest) = (&line[..eq], &line[eq + 1..]);
    let key = lhs.trim();
    let key_col = lhs.chars().take_while(|c| c.is_whitespace()).count() + 1;
    let lead = rest.chars().take_while(|c| c.is_whitespace()).count();
    let value = rest.trim();
    let value_col = line[..eq].chars().count() + 2 + lead;
    Ok(KeyValue { key, key_col, value, value_col })
}

fn expr_at(text: &str, line: usize, column: usize) -> Result<Expr, ParseError> {
    if text.is_empty() {
        return Err(source(line, column.saturating_sub(1).max(1), "=", "missing expression".to_string()));
    }
    Ok(parse_at(text, Origin { line, column })?)
}

/// Parses `a, b=2, c=1/2` into parameters with defaults.
fn parse_params(kv: &KeyValue<'_>, line: usize) -> Result<Vec<Parameter>, ParseError> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for item in kv.value.split(',') {
        let item_col = kv.value_col + offset + item.chars().take_while(|c| c.is_whitespace()).count();
        offset += item.chars().count() + 1;
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (name, default) = match item.split_once('=') {
            Some((n, v)) => {
                let v_col = item_col + n.chars().count() + 1 + v.chars().take_while(|c| c.is_whitespace()).count();
                let value = expr_at(v.trim(), line, v_col)?;
                let q = value.as_const().cloned().ok_or_else(|| {
                    source(line, v_col, v.trim(), "parameter value must be a rational constant".to_string())
                })?;
                (n.trim(), q)
            }
            None => (item, Rational::one()),
        };
        if !is_ident(name) {
            return Err(source(line, item_col, name, alloc::format!("invalid parameter name '{name}'")));
        }
        out.push(Parameter { name: Symbol::new(name), default });
    }
    Ok(out)
}

fn parse_names(kv: &KeyValue<'_>, line: usize) -> Result<Vec<Symbol>, ParseError> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for item in kv.value.split(',') {
        let col = kv.value_col + offset + item.chars().take_while(|c| c.is_whitespace()).count();
        offset += item.chars().count() + 1;
        let name = item.trim();
        if name.is_empty() {
            continue;
        }
        if !is_ident(name) {
            return Err(source(line, col, name, alloc::format!("invalid name '{name}'")));
        }
        out.push(Symbol::new(name));
    }
    Ok(out)
}

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemSpec, ParseError> {
    let mut b = Builder {
        name: None,
        kind: None,
        space: None,
        fields: None,
        params: Vec::new(),
        equations: Vec::new(),
        initial: Vec::new(),
        claims: Vec::new(),
        seen_problem: false,
    };
    let mut section = Section::None;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.chars().take_while(|c| c.is_whitespace()).count() + 1;
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                return Err(source(line_no, indent, trimmed, "unterminated section header".to_string()));
            };
            let name = name.trim();
            section = match name {
                "problem" => {
                    b.seen_problem = true;
                    Section::Problem
                }
                "equations" => Section::Equations,
                "initial" => Section::Initial,
                _ => match name.strip_prefix("claim.") {
                    Some(claim) if !claim.is_empty() && claim.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') => {
                        if b.claims.iter().any(|c| c.name == claim) {
                            return Err(invalid(Some(line_no), alloc::format!("duplicate claim: {claim}")));
                        }
                        b.claims.push(RawClaim {
                            name: claim.to_string(),
                            line: line_no,
                            params: Vec::new(),
                            lets: Vec::new(),
                            solutions: Vec::new(),
                        });
                        Section::Claim(b.claims.len() - 1)
                    }
                    _ => {
                        return Err(source(line_no, indent, trimmed, alloc::format!("unknown section '{name}'")))
                    }
                },
            };
            continue;
        }

        match section {
            Section::None => {
                return Err(source(line_no, indent, trimmed, "content outside of a section".to_string()))
            }
            Section::Problem => {
                let kv = split_key_value(line, line_no)?;
                match kv.key {
                    "name" => b.name = Some(kv.value.to_string()),
                    "kind" => {
                        b.kind = Some(match kv.value {
                            "pde" => ProblemKind::Pde,
                            "dde" => ProblemKind::Dde,
                            other => {
                                return Err(source(
                                    line_no,
                                    kv.value_col,
                                    other,
                                    alloc::format!("kind must be 'pde' or 'dde', got '{other}'"),
                                ))
                            }
                        })
                    }
                    "space" => {
                        if !is_ident(kv.value) {
                            return Err(source(line_no, kv.value_col, kv.value, "invalid space symbol".to_string()));
                        }
                        b.space = Some(Symbol::new(kv.value));
                    }
                    "fields" => b.fields = Some((parse_names(&kv, line_no)?, line_no)),
                    "params" => b.params.extend(parse_params(&kv, line_no)?),
                    other => {
                        return Err(source(line_no, kv.key_col, other, alloc::format!("unknown key '{other}' in [problem]")))
                    }
                }
            }
            Section::Equations => {
                let kv = split_key_value(line, line_no)?;
                let field = kv
                    .key
                    .strip_prefix("dt")
                    .map(str::trim_start)
                    .and_then(|r| r.strip_prefix('('))
                    .and_then(|r| r.strip_suffix(')'))
                    .map(str::trim)
                    .filter(|f| is_ident(f))
                    .ok_or_else(|| {
                        source(
                            line_no,
                            kv.key_col,
                            kv.key,
                            "equation must have the form dt(FIELD) = EXPR".to_string(),
                        )
                    })?;
                let rhs = expr_at(kv.value, line_no, kv.value_col)?;
                b.equations.push((Symbol::new(field), rhs, line_no));
            }
            Section::Initial => {
                let kv = split_key_value(line, line_no)?;
                if !is_ident(kv.key) {
                    return Err(source(line_no, kv.key_col, kv.key, "expected FIELD = EXPR".to_string()));
                }
                let e = expr_at(kv.value, line_no, kv.value_col)?;
                b.initial.push((Symbol::new(kv.key), e, line_no));
            }
            Section::Claim(ci) => {
                let kv = split_key_value(line, line_no)?;
                if let Some(name) = kv.key.strip_prefix("let ").map(str::trim) {
                    if !is_ident(name) {
                        return Err(source(line_no, kv.key_col, kv.key, "expected 'let NAME = EXPR'".to_string()));
                    }
                    let e = expr_at(kv.value, line_no, kv.value_col)?;
                    let e = apply_lets(&e, &b.claims[ci].lets, line_no)?;
                    b.claims[ci].lets.push((Symbol::new(name), e));
                } else if kv.key == "params" {
                    let ps = parse_params(&kv, line_no)?;
                    b.claims[ci].params.extend(ps);
                } else if is_ident(kv.key) {
                    let e = expr_at(kv.value, line_no, kv.value_col)?;
                    let e = apply_lets(&e, &b.claims[ci].lets, line_no)?;
                    b.claims[ci].solutions.push((Symbol::new(kv.key), e, line_no));
                } else {
                    return Err(source(line_no, kv.key_col, kv.key, "expected FIELD = EXPR or let NAME = EXPR".to_string()));
                }
            }
        }
    }
    b.finish()
}

fn apply_lets(e: &Expr, lets: &[(Symbol, Expr)], line: usize) -> Result<Expr, ParseError> {
    let mut out = e.clone();
    for (name, value) in lets.iter().rev() {
        out = out
            .substitute(name, value)
            .map_err(|err| invalid(Some(line), alloc::format!("substituting let {name}: {err}")))?;
    }
    Ok(out)
}

impl Builder {
    fn finish(self) -> Result<ProblemSpec, ParseError> {
        if !self.seen_problem {
            return Err(invalid(None, "missing [problem] section".to_string()));
        }
        let kind = self.kind.ok_or_else(|| invalid(None, "missing key: kind".to_string()))?;
        let space = self.space.unwrap_or_else(|| {
            Symbol::new(match kind {
                ProblemKind::Pde => "x",
                ProblemKind::Dde => "n",
            })
        });
        let (fields, fields_line) = self.fields.ok_or_else(|| invalid(None, "missing key: fields".to_string()))?;
        if fields.is_empty() {
            return Err(invalid(Some(fields_line), "at least one field is required".to_string()));
        }
        let time = Symbol::new(TIME);

        let mut declared: BTreeSet<Symbol> = BTreeSet::new();
        let reserved = |s: &Symbol| s == &space || s == &time;
        for f in &fields {
            if reserved(f) || !declared.insert(f.clone()) {
                return Err(invalid(Some(fields_line), alloc::format!("duplicate or reserved name: {f}")));
            }
        }
        for p in &self.params {
            if reserved(&p.name) || !declared.insert(p.name.clone()) {
                return Err(invalid(None, alloc::format!("duplicate or reserved name: {}", p.name)));
            }
        }
        let param_set: BTreeSet<Symbol> = self.params.iter().map(|p| p.name.clone()).collect();
        let field_set: BTreeSet<Symbol> = fields.iter().cloned().collect();

        let equations = collect_per_field(&fields, &self.equations, "equation")?;
        let initial = collect_per_field(&fields, &self.initial, "initial condition")?;

        for (f, rhs, line) in &self.equations {
            for s in rhs.free_symbols() {
                if s == time {
                    return Err(invalid(
                        Some(*line),
                        alloc::format!("time symbol {time} must not appear in the right-hand side of dt({f})"),
                    ));
                }
                if !(field_set.contains(&s) || param_set.contains(&s) || s == space) {
                    return Err(invalid(Some(*line), alloc::format!("unknown symbol '{s}' in equation for {f}")));
                }
            }
            for (op, arg) in rhs.operators() {
                if arg.contains_operator() {
                    return Err(invalid(Some(*line), "nested spatial operators are not supported".to_string()));
                }
                match (kind, op) {
                    (ProblemKind::Pde, SpaceOp::Shift(_)) => {
                        return Err(invalid(Some(*line), "shift used in a PDE".to_string()))
                    }
                    (ProblemKind::Dde, SpaceOp::Dx | SpaceOp::Dxx) => {
                        return Err(invalid(Some(*line), "dx/dxx used in a DDE".to_string()))
                    }
                    _ => {}
                }
            }
        }
        for (f, ic, line) in &self.initial {
            check_plain(ic, *line, &alloc::format!("initial condition for {f}"))?;
            for s in ic.free_symbols() {
                if !(param_set.contains(&s) || s == space) {
                    return Err(invalid(
                        Some(*line),
                        alloc::format!("unknown symbol '{s}' in initial condition for {f}"),
                    ));
                }
            }
        }

        let mut claims = Vec::new();
        for raw in self.claims {
            let mut allowed = param_set.clone();
            for p in &raw.params {
                if reserved(&p.name) || field_set.contains(&p.name) || !allowed.insert(p.name.clone()) {
                    return Err(invalid(
                        Some(raw.line),
                        alloc::format!("claim {}: duplicate or reserved parameter {}", raw.name, p.name),
                    ));
                }
            }
            for (name, _) in &raw.lets {
                if reserved(name) || field_set.contains(name) || allowed.contains(name) {
                    return Err(invalid(
                        Some(raw.line),
                        alloc::format!("claim {}: let {name} shadows a declared name", raw.name),
                    ));
                }
            }
            for (f, e, line) in &raw.solutions {
                check_plain(e, *line, &alloc::format!("claim {} for {f}", raw.name))?;
                for s in e.free_symbols() {
                    if !(allowed.contains(&s) || s == space || s == time) {
                        return Err(invalid(
                            Some(*line),
                            alloc::format!("unknown symbol '{s}' in claim {} for {f}", raw.name),
                        ));
                    }
                }
            }
            let what = alloc::format!("claimed solution in claim {}", raw.name);
            let solutions = collect_per_field(&fields, &raw.solutions, &what)?;
            claims.push(Claim { name: raw.name, extra_params: raw.params, solutions });
        }

        Ok(ProblemSpec {
            name: self.name,
            kind,
            space,
            fields,
            params: self.params,
            equations,
            initial,
            claims,
        })
    }
}

fn check_plain(e: &Expr, line: usize, what: &str) -> Result<(), ParseError> {
    if e.contains_operator() {
        return Err(invalid(Some(line), alloc::format!("spatial operators are not allowed in {what}")));
    }
    Ok(())
}

fn collect_per_field(
    fields: &[Symbol],
    entries: &[(Symbol, Expr, usize)],
    what: &str,
) -> Result<Vec<Expr>, ParseError> {
    for (f, _, line) in entries {
        if !fields.contains(f) {
            return Err(invalid(Some(*line), alloc::format!("{what} for undeclared field {f}")));
        }
        if entries.iter().filter(|(g, _, _)| g == f).count() > 1 {
            return Err(invalid(Some(*line), alloc::format!("duplicate {what}: {f}")));
        }
    }
    fields
        .iter()
        .map(|f| {
            entries
                .iter()
                .find(|(g, _, _)| g == f)
                .map(|(_, e, _)| e.clone())
                .ok_or_else(|| invalid(None, alloc::format!("missing {what}: {f}")))
        })
        .collect()
}
