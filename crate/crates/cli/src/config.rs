//! Command-line arguments.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use taylorcheck_core::float::parse_decimal;
use taylorcheck_core::series::DEFAULT_ORDER;
use taylorcheck_core::verify::DEFAULT_SEED;
use taylorcheck_core::zero::DEFAULT_DIGITS;
use taylorcheck_core::Rational;

/// Environment variable overriding the default working precision.
pub const PRECISION_ENV: &str = "TAYLORCHECK_PRECISION";
/// Default `--t-max` of `compare`.
pub const DEFAULT_T_MAX: f64 = 0.5;
/// Default `--tol` of `compare`.
pub const DEFAULT_TOL: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "taylorcheck", version, about = "Taylor-in-time series, exact-solution checks and validity windows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Taylor coefficients c_0 .. c_N of every field.
    Solve(SolveArgs),
    /// Check a named claim against the equations and the initial data.
    Verify(VerifyArgs),
    /// Validity window of the truncated series against a numeric reference.
    Compare(CompareArgs),
    /// Series, every claim and the comparison in one report.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Verify(_) => "verify",
            Command::Compare(_) => "compare",
            Command::Report(_) => "report",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Solve(a) => &a.common,
            Command::Verify(a) => &a.common,
            Command::Compare(a) => &a.common,
            Command::Report(a) => &a.common,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem file.
    pub problem: PathBuf,
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Working precision in significant decimal digits.
    #[arg(long, env = PRECISION_ENV, default_value_t = DEFAULT_DIGITS, value_parser = clap::value_parser!(u32).range(16..=2000))]
    pub precision: u32,
    /// Seed of the parameter perturbations.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Override a parameter default, e.g. `--param k=1/2`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<ParamOverride>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub claim: String,
    /// Parameter scan, e.g. `--scan alpha=-2..2:9`.
    #[arg(long, value_name = "NAME=LO..HI:COUNT")]
    pub scan: Option<ScanSpec>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Write the reference grid as CSV (`t,<space>,field,value`).
    #[arg(long, value_name = "PATH")]
    pub grid_csv: Option<PathBuf>,
    /// Write the reference grid as JSON.
    #[arg(long, value_name = "PATH")]
    pub grid_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    #[arg(long, default_value_t = DEFAULT_T_MAX)]
    pub t_max: f64,
    /// Absolute tolerance; `inf` accepts every time.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamOverride {
    pub name: String,
    pub value: Rational,
}

impl FromStr for ParamOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
        Ok(ParamOverride { name: identifier(name)?, value: parse_rational(value)? })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub name: String,
    pub lo: Rational,
    pub hi: Rational,
    pub count: usize,
}

impl FromStr for ScanSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected NAME=LO..HI:COUNT, got `{s}`");
        let (name, range) = s.split_once('=').ok_or_else(bad)?;
        let (range, count) = range.rsplit_once(':').ok_or_else(bad)?;
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if count == 0 {
            return Err("scan count must be positive".into());
        }
        Ok(ScanSpec { name: identifier(name)?, lo: parse_rational(lo)?, hi: parse_rational(hi)?, count })
    }
}

fn identifier(name: &str) -> Result<String, String> {
    let name = name.trim();
    let mut chars = name.chars();
    let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(name.to_string())
    } else {
        Err(format!("invalid parameter name `{name}`"))
    }
}

/// Decimal (`-1.5e-2`) or fraction (`-3/2`) literal.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    let bad = || format!("invalid rational `{text}`");
    match text.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (parse_decimal(p).ok_or_else(bad)?, parse_decimal(q).ok_or_else(bad)?);
            if q == Rational::from_integer(0.into()) {
                return Err(format!("zero denominator in `{text}`"));
            }
            Ok(p / q)
        }
        None => parse_decimal(text).ok_or_else(bad),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/2"), Ok(q(-3, 2)));
        assert_eq!(parse_rational("0.25"), Ok(q(1, 4)));
        assert_eq!(parse_rational("1e-2"), Ok(q(1, 100)));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn scan_specs() {
        let s: ScanSpec = "alpha=-2..2:9".parse().unwrap();
        assert_eq!(s, ScanSpec { name: "alpha".into(), lo: q(-2, 1), hi: q(2, 1), count: 9 });
        let s: ScanSpec = "k=-1/2..3/2:5".parse().unwrap();
        assert_eq!((s.lo, s.hi), (q(-1, 2), q(3, 2)));
        assert!("k=0..1".parse::<ScanSpec>().is_err());
        assert!("k=0..1:0".parse::<ScanSpec>().is_err());
        assert!("=0..1:3".parse::<ScanSpec>().is_err());
    }

    #[test]
    fn overrides() {
        let p: ParamOverride = "k=1/2".parse().unwrap();
        assert_eq!(p, ParamOverride { name: "k".into(), value: q(1, 2) });
        assert!("k".parse::<ParamOverride>().is_err());
        assert!("2k=1".parse::<ParamOverride>().is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
