//! The `indefsl` command line.
//!
//! Data goes to stdout (or `--output`), diagnostics to stderr. Exit codes:
//! 0 success, 2 invalid input, 3 numerical failure, 4 violated certificate
//! hypothesis. A certificate that is merely invalid still exits 0.
//! `SL_THREADS` caps the worker pool used by scans.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::certificates::{
    bound_one_turning_point, certify_application, certify_prop3, certify_prop4, certify_prop5, suggest_prop3_mus,
    BoundCertificate,
};
use crate::classify::{classify_definiteness, Classification};
use crate::coefficients::{ProblemSpec, QProfile};
use crate::contour::{find_complex_eigenvalues, Rect};
use crate::error::{invalid, Result, SlError};
use crate::io::{num, read_problem, records_csv, records_with_drift_csv, table_csv};
use crate::richardson::{richardson_numbers, zero_drift, zero_drift_formula, zero_position, RichardsonReport};
use crate::spectrum::{find_real_eigenvalues, EigenRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CertKind {
    #[value(name = "one_tp")]
    OneTp,
    Prop3,
    Prop4,
    Prop5,
    Application,
}

#[derive(Debug, Parser)]
#[command(name = "indefsl", version, about = "Spectra of Sturm-Liouville problems with sign-changing weight")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; tables default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ProblemArg {
    /// Problem file (JSON).
    #[arg(long)]
    pub problem: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Right-definite, left-definite or neither.
    Classify(ProblemArg),
    /// Real eigenvalues in a window.
    Scan {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, required = true)]
        window: Vec<f64>,
    },
    /// λ⁺ and λ⁻ from the sign of the weighted norms.
    Richardson {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, required = true)]
        window: Vec<f64>,
        /// Add dx/dλ of the first interior zero to every row.
        #[arg(long)]
        drift: bool,
    },
    /// All eigenvalues in a rectangle of the complex plane.
    ComplexScan {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, required = true)]
        re: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, required = true)]
        im: Vec<f64>,
    },
    /// Check the hypotheses of a bound on λ⁺ or λ⁻.
    Certify(CertifyArgs),
    /// Position and λ-derivative of an interior zero of the eigenfunction.
    Drift {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// 1-based index of the zero, counted from a.
        #[arg(long, default_value_t = 1)]
        index: usize,
    },
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_enum)]
    pub kind: CertKind,
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// one_tp: the constant potential.
    #[arg(long, allow_negative_numbers = true)]
    pub q0: Option<f64>,
    /// prop3: the eigenvalue.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// prop3: one value per zero gap; searched for when absent. prop4/prop5: a single value.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub mu: Vec<f64>,
    /// prop3: bound λ⁻ from below instead of λ⁺ from above.
    #[arg(long)]
    pub dual: bool,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_star: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub e: Option<f64>,
    /// application: the bound on |q|.
    #[arg(long)]
    pub m: Option<f64>,
    /// application: constant potential.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    pub q: f64,
}

/// Output of `complex-scan`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexScan {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub records: Vec<EigenRecord>,
}

/// Output of `richardson`; `drift` is present with `--drift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RichardsonOutput {
    #[serde(flatten)]
    pub report: RichardsonReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<Option<f64>>>,
}

/// Output of `drift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftOutput {
    pub lambda: f64,
    pub index: usize,
    pub zero: f64,
    pub drift: f64,
    pub drift_formula: Option<f64>,
}

pub fn exit_code(err: &SlError) -> i32 {
    match err {
        SlError::InvalidInput(_) | SlError::OutOfRange { .. } => 2,
        SlError::HypothesisViolation(_) => 4,
        SlError::NumericalFailure(_)
        | SlError::ContourResolution(_)
        | SlError::DriftUndefined(_)
        | SlError::EmptyReport { .. } => 3,
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs always serialize");
    s.push('\n');
    s
}

fn pair(v: &[f64], what: &str) -> Result<(f64, f64)> {
    match *v {
        [lo, hi] if lo.is_finite() && hi.is_finite() && lo < hi => Ok((lo, hi)),
        _ => Err(invalid(format!("--{what} needs LO < HI, got {v:?}"))),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| invalid(format!("certify --kind {kind} needs --{flag}")))
}

fn certificate_rows(certs: &[BoundCertificate]) -> Result<String> {
    let mut rows = Vec::new();
    for c in certs {
        let kind = serde_json::to_value(c.kind).expect("enum serializes");
        let dir = serde_json::to_value(c.direction).expect("enum serializes");
        for t in &c.hypothesis_trail {
            rows.push(vec![
                kind.as_str().unwrap_or_default().to_string(),
                dir.as_str().unwrap_or_default().to_string(),
                num(c.bound),
                c.valid.to_string(),
                t.condition.clone(),
                num(t.value),
                t.passed.to_string(),
            ]);
        }
    }
    table_csv(&["kind", "direction", "bound", "valid", "condition", "value", "passed"], &rows)
}

fn problem(path: &Option<PathBuf>, kind: &str) -> Result<ProblemSpec<f64>> {
    let path = path.as_ref().ok_or_else(|| invalid(format!("certify --kind {kind} needs --problem")))?;
    read_problem(path)
}

fn certify(args: &CertifyArgs, tol: f64) -> Result<Vec<BoundCertificate>> {
    let name = args.kind.to_possible_value().expect("no skipped variants").get_name().to_string();
    let kind = name.as_str();
    let single_mu = || match args.mu[..] {
        [mu] => Ok(mu),
        _ => Err(invalid(format!("certify --kind {kind} needs exactly one --mu"))),
    };
    match args.kind {
        CertKind::OneTp => {
            let (upper, lower) = bound_one_turning_point(need(args.q0, "q0", kind)?)?;
            Ok(vec![upper, lower])
        }
        CertKind::Prop3 => {
            let spec = problem(&args.problem, kind)?;
            let lambda = need(args.lambda, "lambda", kind)?;
            let mus = if args.mu.is_empty() {
                let found = suggest_prop3_mus(&spec, lambda, args.dual)?;
                match found.iter().position(Option::is_none) {
                    Some(j) => {
                        return Err(SlError::HypothesisViolation(format!(
                            "no admissible μ found for zero gap {j} at λ = {lambda}"
                        )))
                    }
                    None => found.into_iter().flatten().collect(),
                }
            } else {
                args.mu.clone()
            };
            Ok(vec![certify_prop3(&spec, lambda, &mus, args.dual, tol)?])
        }
        CertKind::Prop4 | CertKind::Prop5 => {
            let spec = problem(&args.problem, kind)?;
            let mu = single_mu()?;
            let ls = need(args.lambda_star, "lambda-star", kind)?;
            let (c, d, e) = (need(args.c, "c", kind)?, need(args.d, "d", kind)?, need(args.e, "e", kind)?);
            let cert = if args.kind == CertKind::Prop4 {
                certify_prop4(&spec, mu, ls, c, d, e)?
            } else {
                certify_prop5(&spec, mu, ls, c, d, e)?
            };
            Ok(vec![cert])
        }
        CertKind::Application => {
            if !args.q.is_finite() {
                return Err(invalid("--q must be finite"));
            }
            Ok(vec![certify_application(need(args.m, "m", kind)?, &QProfile::Const(args.q))?])
        }
    }
}

fn classification_csv(c: &Classification) -> Result<String> {
    let kind = serde_json::to_value(c.kind).expect("enum serializes");
    let row = vec![
        kind.as_str().unwrap_or_default().to_string(),
        c.orthogonal.to_string(),
        c.polar.to_string(),
        c.weight_sign.map_or(String::new(), |s| s.to_string()),
        num(c.lambda0),
    ];
    table_csv(&["kind", "orthogonal", "polar", "weight_sign", "lambda0"], &[row])
}

/// Run the command and return what it would write.
pub fn execute(config: &RunConfig) -> Result<String> {
    if !(config.tol > 0.0 && config.tol.is_finite()) {
        return Err(invalid(format!("--tol must be positive, got {}", config.tol)));
    }
    let tol = config.tol;
    let fmt = |table: Format| config.format.unwrap_or(table);
    match &config.command {
        Command::Classify(p) => {
            let c = classify_definiteness(&read_problem(&p.problem)?)?;
            match fmt(Format::Json) {
                Format::Json => Ok(json(&c)),
                Format::Csv => classification_csv(&c),
            }
        }
        Command::Scan { problem, window } => {
            let window = pair(window, "window")?;
            let scan = find_real_eigenvalues(&read_problem(&problem.problem)?, window, tol)?;
            for w in &scan.warnings {
                eprintln!("warning: {w}");
            }
            match fmt(Format::Csv) {
                Format::Json => Ok(json(&scan)),
                Format::Csv => records_csv(&scan.records),
            }
        }
        Command::Richardson { problem, window, drift } => {
            let spec = read_problem(&problem.problem)?;
            let report = richardson_numbers(&spec, pair(window, "window")?, tol)?;
            for w in &report.scan.warnings {
                eprintln!("warning: {w}");
            }
            let drift = drift.then(|| report.scan.records.iter().map(|r| zero_drift(&spec, r.re, 1).ok()).collect::<Vec<_>>());
            match fmt(Format::Csv) {
                Format::Json => Ok(json(&RichardsonOutput { report, drift })),
                Format::Csv => match drift {
                    Some(d) => records_with_drift_csv(&report.scan.records, &d),
                    None => records_csv(&report.scan.records),
                },
            }
        }
        Command::ComplexScan { problem, re, im } => {
            let (re, im) = (pair(re, "re")?, pair(im, "im")?);
            let records = find_complex_eigenvalues(&read_problem(&problem.problem)?, &Rect::new(re, im), tol)?;
            match fmt(Format::Csv) {
                Format::Json => Ok(json(&ComplexScan { re, im, records })),
                Format::Csv => records_csv(&records),
            }
        }
        Command::Certify(args) => {
            let certs = certify(args, tol)?;
            for c in &certs {
                for t in c.failures() {
                    eprintln!("condition failed: {} (value {})", t.condition, t.value);
                }
            }
            match fmt(Format::Json) {
                Format::Json if certs.len() == 1 => Ok(json(&certs[0])),
                Format::Json => Ok(json(&certs)),
                Format::Csv => certificate_rows(&certs),
            }
        }
        Command::Drift { problem, lambda, index } => {
            let spec = read_problem(&problem.problem)?;
            let out = DriftOutput {
                lambda: *lambda,
                index: *index,
                zero: zero_position(&spec, *lambda, *index)?,
                drift: zero_drift(&spec, *lambda, *index)?,
                drift_formula: zero_drift_formula(&spec, *lambda, *index).ok(),
            };
            match fmt(Format::Json) {
                Format::Json => Ok(json(&out)),
                Format::Csv => table_csv(
                    &["lambda", "index", "zero", "drift", "drift_formula"],
                    &[vec![
                        num(out.lambda),
                        out.index.to_string(),
                        num(out.zero),
                        num(out.drift),
                        out.drift_formula.map_or(String::new(), num),
                    ]],
                ),
            }
        }
    }
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("SL_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(invalid(format!("SL_THREADS = {s:?} is not a positive integer"))),
        },
    }
}

pub fn run(config: RunConfig) -> i32 {
    let result = threads().and_then(|n| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| SlError::NumericalFailure(format!("thread pool: {e}")))?;
        pool.install(|| execute(&config))
    });
    let text = match result {
        Ok(t) => t,
        Err(e) => {
            eprintln!("indefsl: {e}");
            return exit_code(&e);
        }
    };
    let written = match &config.output {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("indefsl: cannot write output: {e}");
            2
        }
    }
}

/// Parse `args` (program name first) and run.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => run(config),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
