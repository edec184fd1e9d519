//! The `walsh` command line.
//!
//! Exit status: 0 on success, 1 when a verified bound fails, 2 for bad flags
//! or inputs.

pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use walsh_core::badic::KExpansion;
use walsh_core::bernoulli::walsh_coeff_bernoulli;
use walsh_core::bounds::{bound_bernoulli, BernoulliBound, CArg};
use walsh_core::coefficients::{CoeffEngine, DEFAULT_NODES};
use walsh_core::error::WalshError;
use walsh_core::exec::{configure_threads, Execution};
use walsh_core::functions::{Family, ProductFunction};
use walsh_core::sweep::{verify_sweep, BoundReport, Exponent, SweepConfig, SweepSummary, Theorem, Tolerances};
use walsh_core::walsh::wal_eval;
use walsh_core::wfunc::build_w_tower;

use crate::table::{format_float, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_BOUND: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable overriding the default quadrature nodes per cell.
pub const ENV_NODES: &str = "WALSH_NODES";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(WalshError),
    Io(io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => f.write_str(s),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<WalshError> for CliError {
    fn from(e: WalshError) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("config: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "walsh", version, about = "b-adic Walsh coefficients, weight functions and decay bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// b-adic digits of k as (kappa, a) pairs.
    Expand(ExpandArgs),
    /// Values of wal_k.
    Wal(WalArgs),
    /// W^(j)_k: integral, sup norm and point values.
    Wfun(WfunArgs),
    /// One Walsh coefficient of a function.
    Coeff(CoeffArgs),
    /// Walsh coefficient of the normalised Bernoulli polynomial b_r.
    Bernoulli(BernoulliArgs),
    /// Check a decay bound over a range of k.
    Verify(SweepArgs),
    /// Per-k table of coefficient, bound and weight exponents.
    DecayTable(SweepArgs),
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[arg(long)]
    pub b: u32,
    #[arg(long)]
    pub k: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct WalArgs {
    #[arg(long)]
    pub b: u32,
    #[arg(long)]
    pub k: u64,
    /// Points in [0,1); defaults to the cell midpoints of wal_k.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct WfunArgs {
    #[arg(long)]
    pub b: u32,
    #[arg(long)]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Evaluate at `i / grid` for `i = 0..=grid`.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Quadrature,
    Formula,
    Accurate,
    HigherOrder,
    Sobolev,
}

#[derive(Args, Debug)]
pub struct CoeffArgs {
    #[arg(long)]
    pub b: u32,
    /// One index per coordinate.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u64>,
    /// Function spec (`bernoulli:r`, `exp:l`, `sin:f,phi`, `poly:c0,c1,..`);
    /// repeat once per coordinate.
    #[arg(long = "f", required = true, allow_hyphen_values = true)]
    pub f: Vec<String>,
    #[arg(long, value_enum, default_value = "quadrature")]
    pub method: MethodArg,
    /// Order for `formula` (one per coordinate); defaults to min(v, 1).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Order for `higher-order`.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    /// Order for `sobolev`.
    #[arg(long, default_value_t = 1)]
    pub alpha: usize,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BernoulliArgs {
    #[arg(long)]
    pub b: u32,
    #[arg(long)]
    pub k: u64,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CArgFlag {
    MinAlphaV,
    V,
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    /// Load the whole run from a JSON RunConfig; other sweep flags must be absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the effective RunConfig as JSON.
    #[arg(long)]
    pub save_config: Option<PathBuf>,
    #[arg(long)]
    pub theorem: Option<String>,
    #[arg(long)]
    pub b: Option<u32>,
    #[arg(long)]
    pub kmin: Option<u64>,
    /// Exclusive upper end of the k range.
    #[arg(long)]
    pub kmax: Option<u64>,
    /// Explicit k values instead of a range.
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<usize>,
    /// Shorthand for `--alpha 1,..,rmax`.
    #[arg(long)]
    pub rmax: Option<usize>,
    /// Shorthand for `--alpha 0,..,jmax`.
    #[arg(long)]
    pub jmax: Option<usize>,
    /// Function spec; repeatable.
    #[arg(long = "f", allow_hyphen_values = true)]
    pub f: Vec<String>,
    /// Norm exponents; `inf` allowed.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<Exponent>,
    /// Conjugate exponents for `sobolev-norm`.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<Exponent>,
    #[arg(long, value_enum)]
    pub c_arg: Option<CArgFlag>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCommand {
    Verify,
    DecayTable,
}

/// Everything that determines the output of `verify` and `decay-table`.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: SweepCommand,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self).map_err(io::Error::from)?;
        writeln!(w)?;
        Ok(())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn default_nodes() -> CliResult<usize> {
    match std::env::var(ENV_NODES) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("{ENV_NODES}={v} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_NODES),
    }
}

impl SweepArgs {
    fn has_sweep_flags(&self) -> bool {
        self.theorem.is_some()
            || self.b.is_some()
            || self.kmin.is_some()
            || self.kmax.is_some()
            || !self.k.is_empty()
            || !self.alpha.is_empty()
            || self.rmax.is_some()
            || self.jmax.is_some()
            || !self.f.is_empty()
            || !self.p.is_empty()
            || !self.q.is_empty()
            || self.c_arg.is_some()
            || self.nodes.is_some()
            || self.threads.is_some()
            || self.sequential
            || self.out.is_some()
            || self.format.is_some()
    }

    /// Resolves the flags (or the `--config` file) into a RunConfig.
    pub fn to_run_config(&self, command: SweepCommand) -> CliResult<RunConfig> {
        if let Some(path) = &self.config {
            if self.has_sweep_flags() {
                return Err(usage("--config cannot be combined with other sweep flags"));
            }
            let cfg = RunConfig::load(path)?;
            if cfg.command != command {
                return Err(usage(format!("{} holds a {:?} run", path.display(), cfg.command)));
            }
            return Ok(cfg);
        }
        let theorem: Theorem = match (&self.theorem, command) {
            (Some(t), _) => t.parse()?,
            (None, SweepCommand::DecayTable) => Theorem::Smooth,
            (None, SweepCommand::Verify) => return Err(usage("--theorem is required")),
        };
        let b = self.b.ok_or_else(|| usage("--b is required"))?;
        if self.kmax.is_none() && self.k.is_empty() {
            return Err(usage("give --kmax or --k"));
        }
        let shorthand = [self.rmax.is_some(), self.jmax.is_some(), !self.alpha.is_empty()];
        if shorthand.iter().filter(|&&x| x).count() > 1 {
            return Err(usage("use only one of --alpha, --rmax, --jmax"));
        }
        let orders: Vec<usize> = if let Some(r) = self.rmax {
            (1..=r).collect()
        } else if let Some(j) = self.jmax {
            (0..=j).collect()
        } else {
            self.alpha.clone()
        };
        if !self.p.is_empty() && !self.q.is_empty() {
            return Err(usage("use only one of --p, --q"));
        }
        let mut exponents = if self.q.is_empty() { self.p.clone() } else { self.q.clone() };
        if exponents.is_empty() {
            exponents.push(if theorem == Theorem::SobolevNorm {
                Exponent::INF
            } else {
                Exponent::ONE
            });
        }
        let sweep = SweepConfig {
            theorem,
            base: b,
            k_start: self.kmin.unwrap_or(0),
            k_end: self.kmax.unwrap_or(0),
            k_list: self.k.clone(),
            orders,
            functions: self.f.clone(),
            exponents,
            c_arg: match self.c_arg {
                Some(CArgFlag::V) => CArg::V,
                _ => CArg::MinAlphaV,
            },
            nodes: match self.nodes {
                Some(n) => n,
                None => default_nodes()?,
            },
            execution: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
            tolerances: Tolerances::from_env()?,
        };
        Ok(RunConfig {
            command,
            sweep,
            output: self.out.clone(),
            format: self.format.unwrap_or_default(),
            threads: self.threads,
        })
    }
}

/// Column layout of the `verify` report.
pub const VERIFY_COLUMNS: [&str; 15] = [
    "b", "k", "alpha", "theorem", "function", "exponent", "c_arg", "coeff_re", "coeff_im", "abs", "bound",
    "exact_zero", "ratio", "pass", "tolerance",
];

/// Column layout of `decay-table`.
pub const DECAY_COLUMNS: [&str; 12] = [
    "b", "k", "v", "mu", "mu_alpha", "mu_per", "coeff_re", "coeff_im", "abs", "bound", "ratio", "theorem",
];

fn join_k(ks: &[u64]) -> String {
    ks.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

fn c_arg_tag(c: CArg) -> &'static str {
    match c {
        CArg::MinAlphaV => "min-alpha-v",
        CArg::V => "v",
    }
}

pub fn verify_table(reports: &[BoundReport]) -> Table {
    let mut t = Table::new(VERIFY_COLUMNS.to_vec());
    for r in reports {
        t.push(vec![
            r.b.into(),
            join_k(&r.k).into(),
            r.alpha.into(),
            r.theorem.tag().into(),
            r.function.clone().into(),
            r.exponent.map(|e| e.to_string()).unwrap_or_default().into(),
            r.c_arg.map(c_arg_tag).unwrap_or("").into(),
            r.coeff.re.into(),
            r.coeff.im.into(),
            r.coeff_abs.into(),
            r.bound.into(),
            r.exact_zero.into(),
            r.ratio.into(),
            r.pass.into(),
            r.tolerance.into(),
        ]);
    }
    t
}

pub fn decay_table(reports: &[BoundReport]) -> CliResult<Table> {
    let mut t = Table::new(DECAY_COLUMNS.to_vec());
    for r in reports {
        let k = r.k[0];
        let e = KExpansion::new(r.b, k)?;
        t.push(vec![
            r.b.into(),
            k.into(),
            e.v().into(),
            e.mu().into(),
            e.mu_alpha(r.alpha).into(),
            e.mu_per(r.alpha).into(),
            r.coeff.re.into(),
            r.coeff.im.into(),
            r.coeff_abs.into(),
            r.bound.into(),
            r.ratio.into(),
            r.theorem.tag().into(),
        ]);
    }
    Ok(t)
}

fn write_table(t: &Table, format: Format, out: &mut dyn Write) -> CliResult<()> {
    match format {
        Format::Csv => t.write_csv(out)?,
        Format::Json => t.write_json(out)?,
    }
    Ok(())
}

fn emit_table(t: &Table, format: Format, path: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_table(t, format, &mut w)?;
            w.flush()?;
            Ok(())
        }
        None => write_table(t, format, stdout),
    }
}

/// Runs a sweep command; returns the exit status.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> CliResult<i32> {
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        configure_threads(n);
    }
    let reports = verify_sweep(&cfg.sweep)?;
    match cfg.command {
        SweepCommand::Verify => {
            let summary = SweepSummary::new(&cfg.sweep, &reports);
            if let Some(p) = &cfg.output {
                emit_table(&verify_table(&reports), cfg.format, Some(p), stdout)?;
            }
            serde_json::to_writer(&mut *stdout, &summary).map_err(io::Error::from)?;
            writeln!(stdout)?;
            Ok(if summary.pass { EXIT_OK } else { EXIT_FAILED_BOUND })
        }
        SweepCommand::DecayTable => {
            if matches!(cfg.sweep.theorem, Theorem::WSup | Theorem::WExtra | Theorem::SmoothMulti) {
                return Err(usage(format!("decay-table does not support `{}`", cfg.sweep.theorem)));
            }
            emit_table(&decay_table(&reports)?, cfg.format, cfg.output.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn complex_pair(z: Complex64) -> String {
    format!("{} {}", format_float(z.re), format_float(z.im))
}

fn print_json(stdout: &mut dyn Write, v: &serde_json::Value) -> CliResult<()> {
    serde_json::to_writer(&mut *stdout, v).map_err(io::Error::from)?;
    writeln!(stdout)?;
    Ok(())
}

fn cmd_expand(a: &ExpandArgs, out: &mut dyn Write) -> CliResult<i32> {
    let e = KExpansion::new(a.b, a.k)?;
    let pairs: Vec<(u32, u32)> = e.digits().iter().map(|d| (d.kappa, d.a)).collect();
    if a.json {
        print_json(
            out,
            &serde_json::json!({
                "b": a.b, "k": a.k, "digits": pairs, "v": e.v(), "mu": e.mu(),
            }),
        )?;
    } else {
        let body = pairs
            .iter()
            .map(|(k, p)| format!("({k},{p})"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "digits [{body}]")?;
        writeln!(out, "v {}", e.v())?;
        writeln!(out, "mu {}", e.mu())?;
    }
    Ok(EXIT_OK)
}

fn points_table(xs: &[f64], f: impl Fn(f64) -> walsh_core::error::Result<Complex64>) -> CliResult<Table> {
    let mut t = Table::new(vec!["x", "re", "im"]);
    for &x in xs {
        let z = f(x)?;
        t.push(vec![x.into(), z.re.into(), z.im.into()]);
    }
    Ok(t)
}

fn cmd_wal(a: &WalArgs, out: &mut dyn Write) -> CliResult<i32> {
    let e = KExpansion::new(a.b, a.k)?;
    let xs = if a.x.is_empty() {
        let g = (a.b as f64).powi(e.a_first() as i32);
        let n = g as usize;
        if n > 1 << 16 {
            return Err(usage("wal_k has too many cells to list; pass --x"));
        }
        (0..n).map(|m| (m as f64 + 0.5) / g).collect()
    } else {
        a.x.clone()
    };
    let t = points_table(&xs, |x| wal_eval(a.b, a.k, x))?;
    write_table(&t, if a.json { Format::Json } else { Format::Csv }, out)?;
    Ok(EXIT_OK)
}

fn cmd_wfun(a: &WfunArgs, out: &mut dyn Write) -> CliResult<i32> {
    let w = build_w_tower(a.b, a.k, a.j)?.pop().expect("non-empty tower");
    let mut xs = a.x.clone();
    if let Some(g) = a.grid {
        if g == 0 {
            return Err(usage("--grid must be positive"));
        }
        xs.extend((0..=g).map(|i| i as f64 / g as f64));
    }
    let sup = w.poly().norm(f64::INFINITY)?;
    let t = points_table(&xs, |x| w.eval(x))?;
    let i = w.integral();
    if a.json {
        print_json(
            out,
            &serde_json::json!({
                "b": a.b, "k": a.k, "j": a.j,
                "integral_re": i.re, "integral_im": i.im, "sup": sup,
                "values": t,
            }),
        )?;
    } else {
        writeln!(out, "integral {}", complex_pair(i))?;
        writeln!(out, "sup {}", format_float(sup))?;
        if !xs.is_empty() {
            t.write_csv(&mut *out)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_coeff(a: &CoeffArgs, out: &mut dyn Write) -> CliResult<i32> {
    let nodes = match a.nodes {
        Some(n) => n,
        None => default_nodes()?,
    };
    let engine = CoeffEngine::new(nodes);
    let fams: Vec<Family> = a.f.iter().map(|s| Family::parse(s)).collect::<Result<_, _>>()?;
    if fams.len() != a.k.len() {
        return Err(usage(format!("{} indices but {} functions", a.k.len(), fams.len())));
    }
    let res = if a.k.len() > 1 {
        if a.method != MethodArg::Formula && a.method != MethodArg::Quadrature {
            return Err(usage("several coordinates support only --method formula or quadrature"));
        }
        let ns = if a.method == MethodArg::Quadrature {
            vec![0; a.k.len()]
        } else if a.n.is_empty() {
            a.k.iter()
                .map(|&k| KExpansion::new(a.b, k).map(|e| e.v().min(1)))
                .collect::<Result<_, _>>()?
        } else {
            a.n.clone()
        };
        engine.formula_multi(&ProductFunction::from_families(fams), a.b, &a.k, &ns)?
    } else {
        let (f, k) = (&fams[0], a.k[0]);
        match a.method {
            MethodArg::Quadrature => engine.quadrature(f, a.b, k)?,
            MethodArg::Formula => {
                let n = match a.n.first() {
                    Some(&n) => n,
                    None => KExpansion::new(a.b, k)?.v().min(1),
                };
                engine.formula(f, a.b, k, n)?
            }
            MethodArg::Accurate => engine.accurate(f, a.b, k)?,
            MethodArg::HigherOrder => engine.higher_order(f, a.b, k, a.r)?,
            MethodArg::Sobolev => engine.sobolev(f, a.b, k, a.alpha)?,
        }
    };
    if a.json {
        print_json(out, &serde_json::to_value(&res).map_err(io::Error::from)?)?;
    } else {
        writeln!(out, "value {}", complex_pair(res.value))?;
        writeln!(out, "abs {}", format_float(res.value.norm()))?;
    }
    Ok(EXIT_OK)
}

fn cmd_bernoulli(a: &BernoulliArgs, out: &mut dyn Write) -> CliResult<i32> {
    let z = walsh_coeff_bernoulli(a.b, a.k, a.r)?;
    let bound = if a.k == 0 { None } else { Some(bound_bernoulli(a.b, a.k, a.r)?) };
    let bound_text = match bound {
        None => "none".to_string(),
        Some(BernoulliBound::ExactZero) => "exact-zero".to_string(),
        Some(BernoulliBound::Bound(x)) => format_float(x),
    };
    if a.json {
        print_json(
            out,
            &serde_json::json!({
                "b": a.b, "k": a.k, "r": a.r, "re": z.re, "im": z.im, "bound": bound_text,
            }),
        )?;
    } else {
        writeln!(out, "value {}", complex_pair(z))?;
        writeln!(out, "bound {bound_text}")?;
    }
    Ok(EXIT_OK)
}

/// Dispatches a parsed command line.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Expand(a) => cmd_expand(a, out),
        Command::Wal(a) => cmd_wal(a, out),
        Command::Wfun(a) => cmd_wfun(a, out),
        Command::Coeff(a) => cmd_coeff(a, out),
        Command::Bernoulli(a) => cmd_bernoulli(a, out),
        Command::Verify(a) | Command::DecayTable(a) => {
            let kind = if matches!(cli.command, Command::Verify(_)) {
                SweepCommand::Verify
            } else {
                SweepCommand::DecayTable
            };
            let cfg = a.to_run_config(kind)?;
            if let Some(p) = &a.save_config {
                cfg.save(p)?;
            }
            execute(&cfg, out)
        }
    }
}

/// Parses `args` and runs; errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(code) => {
            let _ = lock.flush();
            code
        }
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("walsh").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = match run(&cli, &mut buf) {
            Ok(c) => c,
            Err(_) => EXIT_USAGE,
        };
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn expand_text() {
        let (code, out) = run_args(&["expand", "--b", "3", "--k", "7"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("digits [(2,2),(1,1)]\n"), "{out}");
    }

    #[test]
    fn run_config_round_trip() {
        let a = SweepArgs {
            theorem: Some("sobolev-norm".into()),
            b: Some(3),
            kmax: Some(10),
            alpha: vec![1, 2],
            f: vec!["exp:1".into()],
            ..Default::default()
        };
        let cfg = a.to_run_config(SweepCommand::Verify).unwrap();
        assert_eq!(cfg.sweep.exponents, vec![Exponent::INF]);
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), cfg);
    }

    #[test]
    fn flag_conflicts_are_usage_errors() {
        let a = SweepArgs {
            theorem: Some("bernoulli".into()),
            b: Some(2),
            kmax: Some(8),
            rmax: Some(3),
            alpha: vec![1],
            ..Default::default()
        };
        assert!(matches!(a.to_run_config(SweepCommand::Verify), Err(CliError::Usage(_))));
        let a = SweepArgs {
            b: Some(2),
            kmax: Some(8),
            ..Default::default()
        };
        assert!(matches!(a.to_run_config(SweepCommand::Verify), Err(CliError::Usage(_))));
    }

    #[test]
    fn decay_rows_carry_weights() {
        let (code, out) = run_args(&[
            "decay-table", "--b", "2", "--kmax", "8", "--alpha", "2", "--f", "exp:1",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines[0], DECAY_COLUMNS.join(","));
        assert_eq!(lines.len(), 9);
        // k = 6 = 2^2 + 2^1: v = 2, mu = 5
        assert!(lines[7].starts_with("2,6,2,5,5,5,"), "{}", lines[7]);
    }
}
