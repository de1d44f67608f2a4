//! The `zitau` command-line tool.
//!
//! ```text
//! zitau estimate  --input data.csv [--header] [--format json]
//! zitau bounds    --zip-x 0.8,2 --zip-y 0.8,2 [--exact | --denuit]
//! zitau bounds    --p1 0.3 --p2 0.4 --denuit
//! zitau bounds    --input data.csv [--header]
//! zitau true-tau  --zip-x 0.8,2 --zip-y 0.8,8 --rho 0.5
//! zitau simulate  --config configs/study.toml --out results [--threads 4]
//! zitau sample    --zip-x 0.8,2 --zip-y 0.8,2 --rho 0.5 --n 150 --seed 1
//! ```
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 invalid input
//! data, 4 numeric or degenerate failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{denuit_bounds, estimate_bounds_with, exact_tau_a_bounds, BoundsReport, TieFrequency};
use crate::distributions::sample_pairs;
use crate::estimators::{estimate_with, EstimateReport, Tau11Method};
use crate::montecarlo::{
    replication_rng, run_scenarios_detailed, table1_scenarios, table2_scenarios, ReplicationRecord, SimOptions,
    SimResult, SimScenario, TABLE2_INDEX_OFFSET,
};
use crate::oracle::{decompose, true_tau, TauDecomposition};
use crate::{Error, FrechetCopula, JointPmfGrid, PairedSample, ZipMargin, DEFAULT_TAIL_TOL};

/// Stream offset for scenarios listed explicitly in a config file.
const CUSTOM_INDEX_OFFSET: u32 = 2 << 16;

#[derive(Debug, Parser)]
#[command(name = "zitau", version, about = "Kendall's tau for zero-inflated count pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate tau, tau_b, tau_H and tau_A from a two-column CSV.
    Estimate(EstimateArgs),
    /// Attainable range of tau_A (exact or estimated) or of tau_H.
    Bounds(BoundsArgs),
    /// Exact tau of two ZIP margins joined by a Fréchet copula.
    TrueTau(TrueTauArgs),
    /// Run a simulation campaign described by a TOML config.
    Simulate(SimulateArgs),
    /// Draw a sample and write it as CSV.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Tau11Arg {
    TauB,
    TauA,
}

impl From<Tau11Arg> for Tau11Method {
    fn from(a: Tau11Arg) -> Self {
        match a {
            Tau11Arg::TauB => Tau11Method::TauB,
            Tau11Arg::TauA => Tau11Method::TauA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TiesArg {
    PositivePairs,
    AllPairs,
}

impl From<TiesArg> for TieFrequency {
    fn from(a: TiesArg) -> Self {
        match a {
            TiesArg::PositivePairs => TieFrequency::PositivePairs,
            TiesArg::AllPairs => TieFrequency::AllPairs,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file with two non-negative integer columns.
    #[arg(long)]
    input: Option<PathBuf>,
    /// The first line of the input is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Estimator of tau_11 on the both-positive rows.
    #[arg(long, value_enum, default_value = "tau-b")]
    tau11: Tau11Arg,
    /// Tie frequency used in the estimated bounds.
    #[arg(long, value_enum, default_value = "positive-pairs")]
    ties: TiesArg,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// First margin as PI,LAMBDA.
    #[arg(long, value_parser = parse_zip)]
    zip_x: Option<(f64, f64)>,
    /// Second margin as PI,LAMBDA.
    #[arg(long, value_parser = parse_zip)]
    zip_y: Option<(f64, f64)>,
    /// P(X = 0), for the tau_H range.
    #[arg(long)]
    p1: Option<f64>,
    /// P(Y = 0), for the tau_H range.
    #[arg(long)]
    p2: Option<f64>,
    /// Exact tau_A range for the given margins (the default for margins).
    #[arg(long, conflicts_with = "denuit")]
    exact: bool,
    /// tau_H range instead of tau_A.
    #[arg(long)]
    denuit: bool,
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "positive-pairs")]
    ties: TiesArg,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct TrueTauArgs {
    #[arg(long, value_parser = parse_zip)]
    zip_x: (f64, f64),
    #[arg(long, value_parser = parse_zip)]
    zip_y: (f64, f64),
    /// Fréchet copula weight on the comonotone part.
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    /// Also print the zero-pattern decomposition.
    #[arg(long)]
    decompose: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// TOML campaign description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_parser = parse_zip)]
    zip_x: (f64, f64),
    #[arg(long, value_parser = parse_zip)]
    zip_y: (f64, f64),
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an `x,y` header line.
    #[arg(long)]
    header: bool,
}

fn parse_zip(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected PI,LAMBDA, got {s:?}"))?;
    let pi = a.trim().parse().map_err(|_| format!("invalid pi {a:?}"))?;
    let lambda = b.trim().parse().map_err(|_| format!("invalid lambda {b:?}"))?;
    Ok((pi, lambda))
}

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
    /// The reader of standard output went away; not reported.
    BrokenPipe,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BrokenPipe => 0,
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
            CliError::BrokenPipe => "broken pipe",
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) => CliError::Usage(e.to_string()),
            Error::InsufficientData { .. } => CliError::Data(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return CliError::BrokenPipe;
        }
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(&a, out, err),
        Command::Bounds(a) => cmd_bounds(&a, out, err),
        Command::TrueTau(a) => cmd_true_tau(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Sample(a) => cmd_sample(&a, out),
    };
    match result {
        Ok(()) | Err(CliError::BrokenPipe) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

/// At least 12 significant digits, fixed notation where sensible.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-8..=12).contains(&mag) {
        let decimals = (11 - mag).max(12) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
}

fn fmt_opt_num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_else(|| "-".into())
}

/// Reads two-column integer CSV data. Rows are numbered from 1, excluding
/// the header.
pub fn read_pairs<R: Read>(reader: R, header: bool) -> CliResult<PairedSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut pairs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        if rec.len() != 2 {
            return Err(CliError::Data(format!(
                "row {row}: expected 2 fields, found {}",
                rec.len()
            )));
        }
        let field = |j: usize| -> CliResult<u64> {
            let s = &rec[j];
            s.parse::<u64>().map_err(|_| {
                let what = if s.starts_with('-') || s.starts_with('\u{2212}') {
                    "negative value"
                } else {
                    "not a non-negative integer"
                };
                CliError::Data(format!("row {row}, column {}: {what}: {s:?}", j + 1))
            })
        };
        pairs.push((field(0)?, field(1)?));
    }
    PairedSample::new(pairs).map_err(|_| CliError::Data("input has no data rows".into()))
}

fn load_input(input: &InputArgs) -> CliResult<PairedSample> {
    let path = input
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let file = fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    read_pairs(file, input.header)
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    estimate: &'a EstimateReport,
    bounds: &'a BoundsReport,
}

fn cmd_estimate(a: &EstimateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let sample = load_input(&a.input)?;
    let report = estimate_with(&sample, a.tau11.into())?;
    let bounds = estimate_bounds_with(&sample, a.ties.into())?;
    if bounds.fallback {
        writeln!(
            err,
            "warning: no row with both values positive; bounds are the tau_H range"
        )?;
    }
    match a.format {
        Format::Json => {
            let v = EstimateOutput {
                estimate: &report,
                bounds: &bounds,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))?;
        }
        Format::Text => {
            write_estimate_text(out, &report)?;
            write_bounds_text(out, &bounds)?;
        }
    }
    Ok(())
}

fn write_estimate_text(out: &mut dyn Write, r: &EstimateReport) -> io::Result<()> {
    let s = &r.stats;
    let counts = [s.p00, s.p01, s.p10, s.p11].map(|p| (p * s.n as f64).round() as u64);
    writeln!(out, "n            {}", r.n)?;
    writeln!(out, "tau_hat      {}", fmt_num(r.tau_hat))?;
    writeln!(out, "tau_b        {}", fmt_opt_num(r.tau_b))?;
    writeln!(out, "tau_11_hat   {}", fmt_num(r.tau_11_hat))?;
    writeln!(out, "tau_h_hat    {}", fmt_num(r.tau_h_hat))?;
    writeln!(out, "tau_a_hat    {}", fmt_num(r.tau_a_hat))?;
    writeln!(
        out,
        "n00 n01 n10 n11  {} {} {} {}",
        counts[0], counts[1], counts[2], counts[3]
    )?;
    writeln!(out, "p1_star      {}", fmt_num(r.cross.p1_star))?;
    writeln!(out, "p1_dagger    {}", fmt_num(r.cross.p1_dagger))?;
    writeln!(out, "p2_star      {}", fmt_num(r.cross.p2_star))?;
    writeln!(out, "p2_dagger    {}", fmt_num(r.cross.p2_dagger))?;
    let warnings: Vec<String> = r
        .warnings
        .iter()
        .map(|w| {
            serde_json::to_value(w)
                .expect("serializable")
                .as_str()
                .unwrap_or_default()
                .to_string()
        })
        .collect();
    let warnings = if warnings.is_empty() {
        "none".to_string()
    } else {
        warnings.join(", ")
    };
    writeln!(out, "warnings     {warnings}")
}

fn write_bounds_text(out: &mut dyn Write, b: &BoundsReport) -> io::Result<()> {
    let kind = serde_json::to_value(b.kind).expect("serializable");
    writeln!(out, "bounds_kind  {}", kind.as_str().unwrap_or_default())?;
    writeln!(out, "lower        {}", fmt_num(b.lower))?;
    writeln!(out, "upper        {}", fmt_num(b.upper))?;
    writeln!(out, "p1           {}", fmt_num(b.p1))?;
    writeln!(out, "p2           {}", fmt_num(b.p2))?;
    writeln!(out, "s_tilde      {}", fmt_opt(b.s_tilde))?;
    writeln!(out, "t_tilde      {}", fmt_opt(b.t_tilde))?;
    writeln!(out, "s_tilde'     {}", fmt_opt(b.s_tilde_prime))?;
    writeln!(out, "t_tilde'     {}", fmt_opt(b.t_tilde_prime))?;
    writeln!(out, "pu_t11       {}", fmt_opt_num(b.pu_t11))?;
    writeln!(out, "pl_t11       {}", fmt_opt_num(b.pl_t11))?;
    writeln!(out, "fallback     {}", b.fallback)
}

fn margins(x: (f64, f64), y: (f64, f64)) -> CliResult<(ZipMargin, ZipMargin)> {
    Ok((ZipMargin::new(x.0, x.1)?, ZipMargin::new(y.0, y.1)?))
}

fn cmd_bounds(a: &BoundsArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let by_margins = a.zip_x.is_some() || a.zip_y.is_some();
    let by_probs = a.p1.is_some() || a.p2.is_some();
    let by_input = a.input.input.is_some();
    let sources = [by_margins, by_probs, by_input].iter().filter(|&&s| s).count();
    if sources != 1 {
        return Err(CliError::Usage(
            "give exactly one source: --zip-x/--zip-y, --p1/--p2 or --input".into(),
        ));
    }
    let report = if by_margins {
        let (Some(x), Some(y)) = (a.zip_x, a.zip_y) else {
            return Err(CliError::Usage("--zip-x and --zip-y must be given together".into()));
        };
        let (fx, fy) = margins(x, y)?;
        if a.denuit {
            denuit_bounds(fx.zero_prob(), fy.zero_prob())?
        } else {
            exact_tau_a_bounds(&fx, &fy, a.tail_tol)?
        }
    } else if by_probs {
        let (Some(p1), Some(p2)) = (a.p1, a.p2) else {
            return Err(CliError::Usage("--p1 and --p2 must be given together".into()));
        };
        if a.exact {
            return Err(CliError::Usage(
                "exact bounds need margins, not just zero probabilities".into(),
            ));
        }
        denuit_bounds(p1, p2)?
    } else {
        if a.exact {
            return Err(CliError::Usage(
                "exact bounds need margins; --input gives estimated bounds".into(),
            ));
        }
        let sample = load_input(&a.input)?;
        if a.denuit {
            let s = crate::estimators::zero_pattern_stats(&sample);
            denuit_bounds(s.p00 + s.p01, s.p00 + s.p10)?
        } else {
            let r = estimate_bounds_with(&sample, a.ties.into())?;
            if r.fallback {
                writeln!(
                    err,
                    "warning: no row with both values positive; bounds are the tau_H range"
                )?;
            }
            r
        }
    };
    match a.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?,
        Format::Text => write_bounds_text(out, &report)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct TrueTauOutput {
    tau: f64,
    tail_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<TauDecomposition>,
}

fn cmd_true_tau(a: &TrueTauArgs, out: &mut dyn Write) -> CliResult<()> {
    let (fx, fy) = margins(a.zip_x, a.zip_y)?;
    let copula = FrechetCopula::new(a.rho)?;
    let grid = JointPmfGrid::from_copula(&fx, &fy, &copula, a.tail_tol)?;
    let tau = true_tau(&grid)?;
    let decomposition = if a.decompose { Some(decompose(&grid)?) } else { None };
    match a.format {
        Format::Json => {
            let v = TrueTauOutput {
                tau,
                tail_tol: a.tail_tol,
                decomposition,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"))?;
        }
        Format::Text => {
            writeln!(out, "tau          {}", fmt_num(tau))?;
            if let Some(d) = decomposition {
                for (k, v) in [
                    ("p00", d.p00),
                    ("p01", d.p01),
                    ("p10", d.p10),
                    ("p11", d.p11),
                    ("tau11", d.tau11),
                    ("p1_star", d.p1_star),
                    ("p1_dagger", d.p1_dagger),
                    ("p2_star", d.p2_star),
                    ("p2_dagger", d.p2_dagger),
                    ("tau_a", d.tau_a_assembled),
                    ("tau_h", d.tau_h_assembled),
                ] {
                    writeln!(out, "{k:<12} {}", fmt_num(v))?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_sample(a: &SampleArgs, out: &mut dyn Write) -> CliResult<()> {
    let (fx, fy) = margins(a.zip_x, a.zip_y)?;
    let copula = FrechetCopula::new(a.rho)?;
    let mut rng = replication_rng(a.seed, 0, 0);
    let sample = sample_pairs(&fx, &fy, &copula, a.n, &mut rng)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        if a.header {
            w.write_record(["x", "y"]).map_err(csv_err)?;
        }
        for &(x, y) in sample.pairs() {
            w.write_record([x.to_string(), y.to_string()]).map_err(csv_err)?;
        }
        w.flush()?;
    }
    match &a.out {
        Some(path) => fs::write(path, buf)?,
        None => out.write_all(&buf)?,
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Data(e.to_string())
}

/// Campaign description read by `zitau simulate`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    #[serde(default)]
    pub tau11: Tau11Method,
    #[serde(default)]
    pub ties: TieFrequency,
    /// Also write every replication to `replications.csv`.
    #[serde(default)]
    pub replications: bool,
    pub table1: Option<TableSection>,
    pub table2: Option<TableSection>,
    #[serde(default)]
    pub scenarios: Vec<ScenarioSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct TableSection {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ScenarioSection {
    pub pi_f: f64,
    pub pi_g: f64,
    pub lambda_f: f64,
    pub lambda_g: f64,
    pub rho: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
}

fn default_n() -> usize {
    150
}

fn default_reps() -> usize {
    1000
}

const TOP_KEYS: &[&str] = &["seed", "tau11", "ties", "replications", "table1", "table2", "scenarios"];
const TABLE_KEYS: &[&str] = &["n", "reps"];
const SCENARIO_KEYS: &[&str] = &["pi_f", "pi_g", "lambda_f", "lambda_g", "rho", "n", "reps"];

fn unknown_keys(table: &toml::Table, allowed: &[&str], prefix: &str, found: &mut Vec<String>) {
    for k in table.keys() {
        if !allowed.contains(&k.as_str()) {
            found.push(format!("{prefix}{k}"));
        }
    }
}

impl SimConfig {
    /// Parses a config, reporting every unknown key at once.
    pub fn parse(text: &str) -> CliResult<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("config: {e}")))?;
        let mut unknown = Vec::new();
        unknown_keys(&table, TOP_KEYS, "", &mut unknown);
        for section in ["table1", "table2"] {
            if let Some(toml::Value::Table(t)) = table.get(section) {
                unknown_keys(t, TABLE_KEYS, &format!("{section}."), &mut unknown);
            }
        }
        if let Some(toml::Value::Array(items)) = table.get("scenarios") {
            for (i, item) in items.iter().enumerate() {
                if let toml::Value::Table(t) = item {
                    unknown_keys(t, SCENARIO_KEYS, &format!("scenarios[{i}]."), &mut unknown);
                }
            }
        }
        if !unknown.is_empty() {
            return Err(CliError::Usage(format!("unknown config keys: {}", unknown.join(", "))));
        }
        let cfg: SimConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("config: {e}")))?;
        if cfg.table1.is_none() && cfg.table2.is_none() && cfg.scenarios.is_empty() {
            return Err(CliError::Usage("config selects nothing to run".into()));
        }
        for s in cfg.custom_scenarios() {
            s.validate().map_err(|e| CliError::Usage(format!("config: {e}")))?;
        }
        for t in [cfg.table1, cfg.table2].into_iter().flatten() {
            if t.reps == 0 || t.n < 2 {
                return Err(CliError::Usage("config: tables need n >= 2 and reps >= 1".into()));
            }
        }
        Ok(cfg)
    }

    fn custom_scenarios(&self) -> Vec<SimScenario> {
        self.scenarios
            .iter()
            .map(|s| SimScenario {
                pi_f: s.pi_f,
                pi_g: s.pi_g,
                lambda_f: s.lambda_f,
                lambda_g: s.lambda_g,
                rho: s.rho,
                n: s.n,
                reps: s.reps,
                base_seed: self.seed,
            })
            .collect()
    }

    fn options(&self) -> SimOptions {
        SimOptions {
            tau11: self.tau11,
            ties: self.ties,
        }
    }
}

const SCENARIO_COLUMNS: &[&str] = &["lambda_f", "lambda_g", "pi_f", "pi_g", "rho", "n", "reps", "seed"];
const TABLE1_COLUMNS: &[&str] = &[
    "true_tau",
    "mean_tau_h",
    "mse100_tau_h",
    "mean_tau_a",
    "mse100_tau_a",
    "mean_tau_b",
    "mse100_tau_b",
    "flagged_reps",
];
const TABLE2_COLUMNS: &[&str] = &[
    "mean_bounds_h_lower",
    "mean_bounds_h_upper",
    "mean_bounds_a_lower",
    "mean_bounds_a_upper",
    "exact_bounds_a_lower",
    "exact_bounds_a_upper",
    "bounds_fallback_reps",
];

fn scenario_fields(s: &SimScenario) -> Vec<String> {
    vec![
        fmt_num(s.lambda_f),
        fmt_num(s.lambda_g),
        fmt_num(s.pi_f),
        fmt_num(s.pi_g),
        fmt_num(s.rho),
        s.n.to_string(),
        s.reps.to_string(),
        s.base_seed.to_string(),
    ]
}

fn table1_fields(r: &SimResult) -> Vec<String> {
    vec![
        fmt_num(r.true_tau),
        fmt_num(r.mean_tau_h),
        fmt_num(r.mse100_tau_h),
        fmt_num(r.mean_tau_a),
        fmt_num(r.mse100_tau_a),
        fmt_num(r.mean_tau_b),
        fmt_num(r.mse100_tau_b),
        r.flagged_reps.to_string(),
    ]
}

fn table2_fields(r: &SimResult) -> Vec<String> {
    vec![
        fmt_num(r.mean_bounds_h.lower),
        fmt_num(r.mean_bounds_h.upper),
        fmt_num(r.mean_bounds_a.lower),
        fmt_num(r.mean_bounds_a.upper),
        fmt_num(r.exact_bounds_a.lower),
        fmt_num(r.exact_bounds_a.upper),
        r.bounds_fallback_reps.to_string(),
    ]
}

fn write_table(path: &Path, header: &[&[&str]], rows: impl Iterator<Item = Vec<String>>) -> CliResult<usize> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header.iter().flat_map(|h| h.iter())).map_err(csv_err)?;
    let mut count = 0;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
        count += 1;
    }
    w.flush()?;
    Ok(count)
}

fn write_replications(path: &Path, runs: &BTreeMap<&str, Vec<(SimResult, Vec<ReplicationRecord>)>>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "table",
        "scenario_index",
        "rep",
        "tau_hat",
        "tau_b",
        "tau_h",
        "tau_a",
        "bounds_h_lower",
        "bounds_h_upper",
        "bounds_a_lower",
        "bounds_a_upper",
        "flagged",
        "bounds_fallback",
    ])
    .map_err(csv_err)?;
    for (table, results) in runs {
        for (_, recs) in results {
            for r in recs {
                w.write_record([
                    table.to_string(),
                    r.scenario_index.to_string(),
                    r.rep.to_string(),
                    fmt_num(r.tau_hat),
                    fmt_num(r.tau_b),
                    fmt_num(r.tau_h),
                    fmt_num(r.tau_a),
                    fmt_num(r.bounds_h.lower),
                    fmt_num(r.bounds_h.upper),
                    fmt_num(r.bounds_a.lower),
                    fmt_num(r.bounds_a.upper),
                    r.flagged.to_string(),
                    r.bounds_fallback.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs a parsed campaign and writes its CSV files into `out_dir`. Returns
/// the names of the files written.
pub fn simulate(cfg: &SimConfig, out_dir: &Path) -> CliResult<Vec<String>> {
    fs::create_dir_all(out_dir)?;
    let opts = cfg.options();
    let mut runs = BTreeMap::new();
    if let Some(t) = cfg.table1 {
        runs.insert(
            "table1",
            run_scenarios_detailed(&table1_scenarios(cfg.seed, t.n, t.reps), 0, opts)?,
        );
    }
    if let Some(t) = cfg.table2 {
        let scenarios = table2_scenarios(cfg.seed, t.n, t.reps);
        runs.insert("table2", run_scenarios_detailed(&scenarios, TABLE2_INDEX_OFFSET, opts)?);
    }
    if !cfg.scenarios.is_empty() {
        let scenarios = cfg.custom_scenarios();
        runs.insert(
            "scenarios",
            run_scenarios_detailed(&scenarios, CUSTOM_INDEX_OFFSET, opts)?,
        );
    }

    let mut written = Vec::new();
    for (name, results) in &runs {
        let file = format!("{name}.csv");
        let path = out_dir.join(&file);
        match *name {
            "table1" => write_table(
                &path,
                &[SCENARIO_COLUMNS, TABLE1_COLUMNS],
                results
                    .iter()
                    .map(|(r, _)| [scenario_fields(&r.scenario), table1_fields(r)].concat()),
            )?,
            "table2" => write_table(
                &path,
                &[SCENARIO_COLUMNS, TABLE2_COLUMNS],
                results
                    .iter()
                    .map(|(r, _)| [scenario_fields(&r.scenario), table2_fields(r)].concat()),
            )?,
            _ => write_table(
                &path,
                &[SCENARIO_COLUMNS, TABLE1_COLUMNS, TABLE2_COLUMNS],
                results
                    .iter()
                    .map(|(r, _)| [scenario_fields(&r.scenario), table1_fields(r), table2_fields(r)].concat()),
            )?,
        };
        written.push(file);
    }
    if cfg.replications {
        write_replications(&out_dir.join("replications.csv"), &runs)?;
        written.push("replications.csv".into());
    }
    Ok(written)
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let text = fs::read_to_string(&a.config).map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    let cfg = SimConfig::parse(&text)?;
    let written = match a.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            pool.install(|| simulate(&cfg, &a.out))?
        }
        None => simulate(&cfg, &a.out)?,
    };
    for f in written {
        writeln!(out, "wrote {}", a.out.join(f).display())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("zitau").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn number_format_has_enough_digits() {
        assert_eq!(fmt_num(0.5), "0.500000000000");
        assert_eq!(fmt_num(-0.0001234), "-0.000123400000000");
        assert_eq!(fmt_num(0.0), "0");
        assert!(fmt_num(1e-12).contains('e'));
    }

    #[test]
    fn csv_validation_names_the_row() {
        let e = read_pairs("-1,2\n".as_bytes(), false).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.message().contains("row 1"), "{}", e.message());
        let e = read_pairs("x,y\n1,2\n3\n".as_bytes(), true).unwrap_err();
        assert!(e.message().contains("row 2"), "{}", e.message());
        let e = read_pairs("1,2.5\n".as_bytes(), false).unwrap_err();
        assert!(e.message().contains("column 2"));
        assert_eq!(read_pairs("".as_bytes(), false).unwrap_err().exit_code(), 3);
        let s = read_pairs("x,y\n 0, 1\n2,3\n".as_bytes(), true).unwrap();
        assert_eq!(s.pairs(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn config_lists_all_unknown_keys() {
        let e = SimConfig::parse("seed = 1\nsede = 2\n[table1]\nrpes = 3\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(
            e.message().contains("sede") && e.message().contains("table1.rpes"),
            "{}",
            e.message()
        );
        let c = SimConfig::parse("seed = 1\n[table2]\nreps = 3\n").unwrap();
        assert_eq!(c.table2, Some(TableSection { n: 150, reps: 3 }));
        assert!(SimConfig::parse("seed = 1\n").is_err());
    }

    #[test]
    fn bounds_source_rules() {
        assert_eq!(run_args(&["bounds"]).0, 2);
        assert_eq!(
            run_args(&["bounds", "--zip-x", "0.8,2", "--zip-y", "0.8,2", "--p1", "0", "--p2", "0"]).0,
            2
        );
        let (code, out, _) = run_args(&["bounds", "--p1", "0", "--p2", "0", "--denuit"]);
        assert_eq!(code, 0);
        assert!(out.contains("lower        -1.000000000000"), "{out}");
        assert_eq!(run_args(&["bounds", "--zip-x", "1.5,2", "--zip-y", "0.8,2"]).0, 2);
    }

    #[test]
    fn true_tau_of_independence_is_zero() {
        let (code, out, _) = run_args(&["true-tau", "--zip-x", "0.8,2", "--zip-y", "0.8,2", "--rho", "0"]);
        assert_eq!(code, 0);
        let v: f64 = out.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!(v.abs() < 1e-12);
    }
}
