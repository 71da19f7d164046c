//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure,
//! 4 verification failure.

mod output;
mod verify;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use crate::continuous::{f_eval, g_eval, ModelParams};
use crate::critical::{critical_constant, critical_report, ln_t2_lower_bound, solve_kc_in};
use crate::discrete::{log_identity_quotient, recursion_trace, w_sequence};
use crate::error::Error;
use crate::shooting::solve_w;

pub use output::{Cell, Table};

/// k values used when `--k` is not given.
pub const DEFAULT_KS: [f64; 3] = [0.001, 0.01, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// f, g and f/g on a t grid.
    Eval,
    /// Shooting slope w(k).
    SolveW,
    /// Headline constants.
    Critical,
    /// Crossing points t1, t2 per k.
    Crossings,
    /// Raw recursion trace V_j and differences.
    Recursion,
    /// V_j against W_j with the log-identity quotient.
    Compare,
    /// Run every check and emit a JSON report.
    Verify,
    /// Full critical report per k, computed in parallel.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

#[derive(Debug, Parser)]
#[command(
    name = "emden",
    version,
    about = "Emden-Fowler f'' = k/f: solutions, critical constants and the discrete recursion"
)]
pub struct RunConfig {
    #[arg(long, value_enum)]
    pub command: Command,
    /// Coefficient k (repeatable).
    #[arg(long = "k", allow_negative_numbers = true)]
    pub k: Vec<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = 500.0, allow_negative_numbers = true)]
    pub t_max: f64,
    /// Number of grid points in [t-min, t-max], endpoints included.
    #[arg(long, default_value_t = 500)]
    pub t_steps: usize,
    #[arg(long, default_value_t = 100)]
    pub j_max: usize,
    /// Residual tolerance for the shooting solve.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Reserved. Nothing here is random; the flag is rejected.
    #[arg(long)]
    pub seedless: bool,
    /// Override the k_c bisection bracket.
    #[arg(long, value_parser = parse_bracket, allow_hyphen_values = true)]
    pub kc_bracket: Option<(f64, f64)>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(Error),
    Io(io::Error),
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::VerificationFailed => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "output error: {e}"),
            CliError::VerificationFailed => write!(f, "verification failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.seedless {
            return usage("--seedless is reserved; no command uses randomness".into());
        }
        if let Some(k) = self.k.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return usage(format!("--k must be finite and positive, got {k}"));
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite() && 1.0 <= self.t_min && self.t_min <= self.t_max) {
            return usage(format!(
                "need 1 <= t-min <= t-max, got [{}, {}]",
                self.t_min, self.t_max
            ));
        }
        if self.t_steps == 0 {
            return usage("--t-steps must be at least 1".into());
        }
        if self.t_steps == 1 && self.t_min != self.t_max {
            return usage("--t-steps 1 needs t-min = t-max".into());
        }
        if self.j_max == 0 {
            return usage("--j-max must be at least 1".into());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return usage(format!("--tol must be positive, got {}", self.tol));
        }
        if let Some((lo, hi)) = self.kc_bracket {
            if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
                return usage(format!("--kc-bracket needs 0 < LO < HI, got {lo},{hi}"));
            }
        }
        Ok(())
    }

    fn ks(&self) -> Vec<f64> {
        if self.k.is_empty() {
            DEFAULT_KS.to_vec()
        } else {
            self.k.clone()
        }
    }

    fn t_grid(&self) -> Vec<f64> {
        if self.t_steps == 1 {
            return vec![self.t_min];
        }
        let n = self.t_steps - 1;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.t_max
                } else {
                    self.t_min + (self.t_max - self.t_min) * i as f64 / n as f64
                }
            })
            .collect()
    }
}

/// Parses `args` and runs the command; the error carries the exit code.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    cfg.validate()?;
    execute(&cfg)
}

fn execute(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.command == Command::Verify {
        let report = verify::run(cfg.kc_bracket);
        let text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
        emit_text(cfg, &text)?;
        return if report.passed() {
            Ok(())
        } else {
            Err(CliError::VerificationFailed)
        };
    }
    let table = match cfg.command {
        Command::Eval => cmd_eval(cfg)?,
        Command::SolveW => cmd_solve_w(cfg)?,
        Command::Critical => cmd_critical(cfg)?,
        Command::Crossings => cmd_crossings(cfg)?,
        Command::Recursion => cmd_recursion(cfg)?,
        Command::Compare => cmd_compare(cfg)?,
        Command::Sweep => cmd_sweep(cfg)?,
        Command::Verify => unreachable!(),
    };
    match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            table
                .write_csv(&mut buf)
                .map_err(|e| CliError::Io(io::Error::other(e)))?;
            emit_bytes(cfg, &buf)
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(&table.to_json()).expect("table serializes");
            emit_text(cfg, &text)
        }
    }
}

fn emit_text(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    let mut bytes = text.as_bytes().to_vec();
    bytes.push(b'\n');
    emit_bytes(cfg, &bytes)
}

fn emit_bytes(cfg: &RunConfig, bytes: &[u8]) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Runs `f` over the k list in parallel and concatenates the rows in k order.
fn per_k<F>(ks: &[f64], f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    F: Fn(f64) -> Result<Vec<Vec<Cell>>, Error> + Sync,
{
    let blocks: Result<Vec<_>, Error> = ks.par_iter().map(|&k| f(k)).collect();
    Ok(blocks?.into_iter().flatten().collect())
}

fn ratio_cell(num: f64, den: f64) -> Cell {
    if den == 0.0 {
        Cell::Null
    } else {
        (num / den).into()
    }
}

fn cmd_eval(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&["k", "w", "t", "f", "g", "f_over_g"]);
    let ts = cfg.t_grid();
    table.rows = per_k(&cfg.ks(), |k| {
        let w = solve_w(k, cfg.tol)?.w;
        let p = ModelParams::new(k, 1.0, w)?;
        ts.iter()
            .map(|&t| {
                let f = f_eval(t, &p)?;
                let g = g_eval(t, k)?;
                Ok(vec![k.into(), w.into(), t.into(), f.into(), g.into(), ratio_cell(f, g)])
            })
            .collect()
    })?;
    Ok(table)
}

fn cmd_solve_w(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&["k", "w", "residual", "iterations"]);
    table.rows = per_k(&cfg.ks(), |k| {
        let r = solve_w(k, cfg.tol)?;
        Ok(vec![vec![
            k.into(),
            r.w.into(),
            r.residual.into(),
            (r.iterations as u64).into(),
        ]])
    })?;
    Ok(table)
}

fn cmd_critical(cfg: &RunConfig) -> Result<Table, CliError> {
    let kc = match cfg.kc_bracket {
        Some((lo, hi)) => solve_kc_in(lo, hi, 1e-13)?,
        None => critical_constant()?,
    };
    let mut table = Table::new(&["quantity", "value"]);
    for (name, value) in verify::headline_constants(kc)? {
        table.push(vec![name.into(), value.into()]);
    }
    Ok(table)
}

fn cmd_crossings(cfg: &RunConfig) -> Result<Table, CliError> {
    let kc = critical_constant()?;
    let mut table = Table::new(&[
        "k",
        "w",
        "regime",
        "t0",
        "t1",
        "t2",
        "ln_t1",
        "ln_t2",
        "ln_t2_lower_bound",
        "t2_bound_holds",
    ]);
    table.rows = per_k(&cfg.ks(), |k| {
        let r = critical_report(k)?;
        let below = r.t1.is_some();
        Ok(vec![vec![
            k.into(),
            r.w.into(),
            r.regime.as_str().into(),
            r.t0.into(),
            r.t1.into(),
            r.t2.into(),
            r.ln_t1.into(),
            r.ln_t2.into(),
            below.then(|| ln_t2_lower_bound(k, kc)).into(),
            r.t2_bound_holds.into(),
        ]])
    })?;
    Ok(table)
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&[
        "k",
        "w",
        "t0",
        "f_at_t0",
        "regime",
        "t1",
        "t2",
        "lower_ratio_bound",
        "upper_ratio_bound",
    ]);
    table.rows = per_k(&cfg.ks(), |k| {
        let r = critical_report(k)?;
        Ok(vec![vec![
            k.into(),
            r.w.into(),
            r.t0.into(),
            r.f_at_t0.into(),
            r.regime.as_str().into(),
            r.t1.into(),
            r.t2.into(),
            r.lower_ratio_bound.into(),
            r.upper_ratio_bound.into(),
        ]])
    })?;
    Ok(table)
}

fn cmd_recursion(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&["k", "j", "v", "first_difference"]);
    let j_max = cfg.j_max;
    table.rows = per_k(&cfg.ks(), |k| {
        let trace = recursion_trace(k, j_max + 1)?;
        Ok((0..=j_max)
            .map(|j| {
                vec![
                    k.into(),
                    (j as u64).into(),
                    trace.values[j].into(),
                    trace.first_differences[j].into(),
                ]
            })
            .collect())
    })?;
    Ok(table)
}

fn cmd_compare(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new(&["k", "j", "v", "w", "v_over_w", "log_identity_quotient"]);
    let j_max = cfg.j_max;
    table.rows = per_k(&cfg.ks(), |k| {
        let trace = recursion_trace(k, j_max + 1)?;
        (1..=j_max)
            .map(|j| {
                let v = trace.values[j];
                let w = w_sequence(j as u64, k)?;
                let q = if j >= 2 {
                    Some(log_identity_quotient(&trace, j)?)
                } else {
                    None
                };
                Ok(vec![
                    k.into(),
                    (j as u64).into(),
                    v.into(),
                    w.into(),
                    ratio_cell(v, w),
                    q.into(),
                ])
            })
            .collect()
    })?;
    Ok(table)
}
