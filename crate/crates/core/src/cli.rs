//! Command-line front end: argument parsing, file codecs and the
//! experiment drivers behind each subcommand.
//!
//! Data goes to stdout (JSON records, CSV tables); diagnostics go to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::broadcast::{bc_error_exact, bc_error_mc, BcCode, BcDecoder, BcProblem, ReceiverCode, DEFAULT_EXACT_CAP};
use crate::ensemble::{
    alpha_beta_from_spectrum, generate_sparse, spectrum_table, uniform_spectrum, verify_strong_hash, Ensemble, EnsembleProfile, Family,
    TypeFilter,
};
use crate::error::Error;
use crate::gf::FieldMatrix;
use crate::lp_md::{md_via_lp, MdLpOptions, DEFAULT_DEGREE_CAP};
use crate::mc::{trial_rng, Estimate};
use crate::slepian_wolf::{sw_error_exact, sw_error_mc, SwCode, SwDecoder, DEFAULT_SEARCH_CAP};
use crate::types::Distribution;

pub const CSV_HEADER: &str = "R_X,R_Y,n,error,ci_lo,ci_hi";
const ENUMERATION_CAP: u128 = 1 << 22;

/// Parses the matrix text format: a header `q l n`, then one `r c v` line
/// per nonzero entry. Blank lines and `#` comments are skipped.
pub fn parse_matrix(text: &str) -> crate::Result<FieldMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let nums = |line: usize, s: &str| -> crate::Result<Vec<usize>> {
        let v: Vec<usize> = s
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("'{t}' is not a nonnegative integer") }))
            .collect::<crate::Result<_>>()?;
        if v.len() != 3 {
            return Err(Error::Parse { line, msg: format!("expected 3 fields, found {}", v.len()) });
        }
        Ok(v)
    };
    let h = nums(hl, header)?;
    let (q, rows, cols) = (h[0], h[1], h[2]);
    let mut entries: Vec<(usize, usize, usize)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (line, l) in lines {
        let v = nums(line, l)?;
        let (r, c, x) = (v[0], v[1], v[2]);
        if r >= rows || c >= cols {
            return Err(Error::Parse { line, msg: format!("entry ({r}, {c}) outside a {rows} x {cols} matrix") });
        }
        if x == 0 || x >= q {
            return Err(Error::Parse { line, msg: format!("value {x} is not a nonzero element of GF({q})") });
        }
        if !seen.insert((r, c)) {
            return Err(Error::Parse { line, msg: format!("duplicate entry ({r}, {c})") });
        }
        entries.push((r, c, x));
    }
    FieldMatrix::new(q, rows, cols, entries).map_err(|e| Error::Parse { line: hl, msg: e.to_string() })
}

pub fn emit_matrix(a: &FieldMatrix) -> String {
    let mut out = format!("{} {} {}\n", a.q(), a.rows(), a.cols());
    for (r, c, v) in a.entries() {
        let _ = writeln!(out, "{r} {c} {v}");
    }
    out
}

/// Parses a vector written as digits (`0110`) or comma-separated values.
pub fn parse_vector(s: &str) -> crate::Result<Vec<usize>> {
    let bad = |t: &str| Error::InvalidParameter(format!("'{t}' is not a vector"));
    if s.contains(',') {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad(s))).collect()
    } else {
        s.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| bad(s))).collect()
    }
}

/// One machine-readable result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub params: Value,
    pub metrics: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl ResultRecord {
    fn new(command: &str, params: Value, metrics: Value) -> Self {
        Self { command: command.into(), params, metrics, timing_ms: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data") + "\n"
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs.
    Config(String),
    /// Valid inputs that failed during computation.
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Compute(m) => write!(f, "compute error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::TooLarge { .. } | Error::Lp(_) | Error::SearchExhausted(_) | Error::InverseOfZero => CliError::Compute(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn read_matrix(path: &Path) -> CliResult<FieldMatrix> {
    let text = read(path)?;
    in_file(path, parse_matrix(&text))
}

fn read_dist(path: &Path) -> CliResult<Distribution> {
    let text = read(path)?;
    in_file(path, Distribution::from_json(&text))
}

fn write_out(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Parser, Debug)]
#[command(name = "hashprop", version, about = "Hash-property code constructions at desk scale")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a sparse matrix and write it in the matrix text format.
    GenMatrix(GenMatrixArgs),
    /// Compute (alpha, beta) of an ensemble and check the strong hash inequality.
    HashAudit(EnsembleArgs),
    /// Average kernel spectrum of an ensemble against the uniform one.
    Spectrum(EnsembleArgs),
    /// Slepian-Wolf error of fixed matrices.
    SwSim(SwSimArgs),
    /// Broadcast code error.
    BcSim(BcSimArgs),
    /// Minimum-divergence decoding through per-type linear programs.
    LpMd(LpMdArgs),
    /// Grids of experiments.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct GenMatrixArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 2)]
    pub tau: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Uniform,
    Sparse,
    Binning,
}

/// JSON ensemble descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDescriptor {
    pub family: String,
    pub q: usize,
    pub l: usize,
    pub n: usize,
    #[serde(default)]
    pub tau: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub w_min: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EnsembleArgs {
    /// Read the ensemble from a JSON descriptor instead of flags.
    #[arg(long, conflicts_with_all = ["family", "q", "l", "n"])]
    pub descriptor: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tau: Option<usize>,
    /// Minimum weight of the types that define alpha.
    #[arg(long)]
    pub w_min: Option<usize>,
    /// Enumerate the support exactly (the only supported mode).
    #[arg(long)]
    pub exhaustive: bool,
}

impl EnsembleArgs {
    fn descriptor(&self) -> CliResult<EnsembleDescriptor> {
        if let Some(path) = &self.descriptor {
            let text = read(path)?;
            return serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
        }
        let missing = |f: &str| CliError::Config(format!("--{f} is required without --descriptor"));
        let family = match self.family.ok_or_else(|| missing("family"))? {
            FamilyArg::Uniform => "uniform",
            FamilyArg::Sparse => "sparse",
            FamilyArg::Binning => "binning",
        };
        Ok(EnsembleDescriptor {
            family: family.into(),
            q: self.q.ok_or_else(|| missing("q"))?,
            l: self.l.ok_or_else(|| missing("l"))?,
            n: self.n.ok_or_else(|| missing("n"))?,
            tau: self.tau,
            seed: None,
            w_min: self.w_min,
        })
    }
}

fn build_ensemble(d: &EnsembleDescriptor) -> CliResult<Ensemble> {
    let family = match d.family.as_str() {
        "uniform" => Family::Uniform,
        "sparse" => Family::Sparse { tau: d.tau.unwrap_or(2) },
        "binning" => Family::Binning,
        other => return Err(CliError::Config(format!("unknown family '{other}'"))),
    };
    Ok(Ensemble::new(family, d.q, d.l, d.n)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SwDecoderArg {
    Md,
    Ml,
}

#[derive(Args, Debug)]
pub struct SwSimArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// `NAME=FILE`, once per source in source order.
    #[arg(long = "matrix", required = true)]
    pub matrices: Vec<String>,
    #[arg(long, value_enum, default_value_t = SwDecoderArg::Md)]
    pub decoder: SwDecoderArg,
    /// Typicality radius for `--decoder ml`; omit for unrestricted ML.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BcDecoderArg {
    Ml,
    Md,
}

#[derive(Args, Debug)]
pub struct BcSimArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = BcDecoderArg::Ml)]
    pub decoder: BcDecoderArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Code file for `bc-sim`; matrix paths are relative to the code file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeFile {
    pub receivers: Vec<ReceiverFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceiverFile {
    pub shared: PathBuf,
    pub message: PathBuf,
    pub shared_vector: Vec<usize>,
}

#[derive(Args, Debug)]
pub struct LpMdArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// `NAME=FILE,NAME=FILE,..` stacked top to bottom; once per terminal.
    #[arg(long = "stack", required = true)]
    pub stacks: Vec<String>,
    /// `NAME=VECTOR,..` matching the stack; once per terminal.
    #[arg(long = "syndrome", required = true)]
    pub syndromes: Vec<String>,
    #[arg(long, value_enum)]
    pub fallback: Option<Fallback>,
    #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
    pub degree_cap: usize,
    /// Include the per-type log in the output.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fallback {
    Exhaustive,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(subcommand)]
    pub target: SweepTarget,
}

#[derive(Subcommand, Debug)]
pub enum SweepTarget {
    /// Slepian-Wolf error over a symmetric rate grid and a list of block lengths.
    Sw(SwSweepArgs),
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct RateGrid(pub Vec<f64>);

impl FromStr for RateGrid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad grid '{s}'"))).collect::<std::result::Result<_, _>>()?;
        let [a, b, st] = parts[..] else { return Err(format!("grid '{s}' must be start:stop:step")) };
        if st <= 0.0 || b < a {
            return Err(format!("grid '{s}' is empty"));
        }
        let steps = ((b - a) / st + 1e-9).floor() as usize;
        Ok(RateGrid((0..=steps).map(|i| ((a + i as f64 * st) * 1e9).round() / 1e9).collect()))
    }
}

#[derive(Args, Debug)]
pub struct SwSweepArgs {
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long)]
    pub rates: RateGrid,
    /// Comma-separated block lengths.
    #[arg(long, value_delimiter = ',', default_value = "6")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 4)]
    pub tau: usize,
    /// Codes drawn per grid point; the best exact error is kept.
    #[arg(long, default_value_t = 1)]
    pub tries: usize,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Write the CSV here; the JSON summary then goes to stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Applies `HASHPROP_THREADS` to the global pool, once.
pub fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("HASHPROP_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Config(format!("HASHPROP_THREADS='{v}' is not a count")))?;
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs one parsed command and returns what it writes to stdout.
pub fn run_command(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::GenMatrix(a) => gen_matrix(a),
        Command::HashAudit(a) => hash_audit(a),
        Command::Spectrum(a) => spectrum(a),
        Command::SwSim(a) => sw_sim(a),
        Command::BcSim(a) => bc_sim(a),
        Command::LpMd(a) => lp_md(a),
        Command::Sweep(SweepArgs { target: SweepTarget::Sw(a) }) => sweep_sw(a),
    }
}

/// Parses `args` (program name first) and runs it; returns `(exit code,
/// stdout, stderr)`.
pub fn run_from_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (code, if code == 0 { e.to_string() } else { String::new() }, if code == 0 { String::new() } else { e.to_string() });
        }
    };
    if let Err(e) = configure_threads() {
        return (e.exit_code(), String::new(), format!("{e}\n"));
    }
    match run_command(&cli) {
        Ok(out) => (0, out, String::new()),
        Err(e) => (e.exit_code(), String::new(), format!("{e}\n")),
    }
}

fn need_seed(seed: Option<u64>, what: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Config(format!("{what} is randomized and needs --seed")))
}

fn gen_matrix(a: &GenMatrixArgs) -> CliResult<String> {
    let m = generate_sparse(a.q, a.rows, a.cols, a.tau, a.seed)?;
    let text = emit_matrix(&m);
    match &a.out {
        Some(path) => {
            write_out(path, &text)?;
            let (rank, image) = m.rank_and_image_size();
            Ok(ResultRecord::new(
                "gen-matrix",
                json!({"q": a.q, "rows": a.rows, "cols": a.cols, "tau": a.tau, "seed": a.seed}),
                json!({"path": path, "nnz": m.nnz(), "rank": rank, "image_size": image.to_string()}),
            )
            .to_json())
        }
        None => Ok(text),
    }
}

fn ensemble_profile(d: &EnsembleDescriptor) -> CliResult<(crate::ensemble::EnumeratedEnsemble, EnsembleProfile)> {
    let e = build_ensemble(d)?.enumerate(ENUMERATION_CAP)?;
    let profile = if e.ensemble.is_linear() {
        let filter = d.w_min.map_or_else(|| TypeFilter::default_for(d.n), TypeFilter::MinWeight);
        alpha_beta_from_spectrum(&e, &filter)?
    } else {
        EnsembleProfile::universal(e.image_size())
    };
    Ok((e, profile))
}

fn hash_audit(a: &EnsembleArgs) -> CliResult<String> {
    let d = a.descriptor()?;
    let (e, profile) = ensemble_profile(&d)?;
    let report = verify_strong_hash(&e, &profile)?;
    Ok(ResultRecord::new(
        "hash-audit",
        serde_json::to_value(&d).expect("plain data"),
        json!({
            "alpha": profile.alpha,
            "beta": profile.beta,
            "image_size": profile.image_size.to_string(),
            "support_size": e.support.len(),
            "holds": report.holds,
            "max_lhs": report.max_lhs,
        }),
    )
    .to_json())
}

fn spectrum(a: &EnsembleArgs) -> CliResult<String> {
    let d = a.descriptor()?;
    let e = build_ensemble(&d)?.enumerate(ENUMERATION_CAP)?;
    let table = spectrum_table(&e)?;
    let rows: Vec<Value> = table
        .iter()
        .map(|(t, s)| json!({"type": t, "spectrum": s, "uniform": uniform_spectrum(d.q, d.l, t)}))
        .collect();
    Ok(ResultRecord::new("spectrum", serde_json::to_value(&d).expect("plain data"), json!({"types": rows})).to_json())
}

fn named_path(entry: &str) -> CliResult<(String, PathBuf)> {
    match entry.split_once('=') {
        Some((name, path)) if !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(CliError::Config(format!("'{entry}' must be NAME=FILE"))),
    }
}

fn sw_decoder(kind: SwDecoderArg, gamma: Option<f64>) -> SwDecoder {
    match (kind, gamma) {
        (SwDecoderArg::Md, _) => SwDecoder::MinDivergence,
        (SwDecoderArg::Ml, Some(gamma)) => SwDecoder::TypicalMl { gamma },
        (SwDecoderArg::Ml, None) => SwDecoder::Ml,
    }
}

fn estimate_json(e: &Estimate) -> Value {
    json!({"errors": e.errors, "trials": e.trials, "estimate": e.estimate, "ci": [e.ci_lo, e.ci_hi]})
}

fn sw_sim(a: &SwSimArgs) -> CliResult<String> {
    let dist = read_dist(&a.dist)?;
    let mut names = Vec::new();
    let mut matrices = Vec::new();
    for entry in &a.matrices {
        let (name, path) = named_path(entry)?;
        matrices.push(read_matrix(&path)?);
        names.push(name);
    }
    let code = SwCode::new(matrices, dist)?;
    let decoder = sw_decoder(a.decoder, a.gamma);
    let (error, ci, estimate) = match a.mode {
        Mode::Exact => {
            let e = sw_error_exact(&code, decoder, DEFAULT_SEARCH_CAP)?;
            (e, [e, e], None)
        }
        Mode::Mc => {
            let est = sw_error_mc(&code, decoder, a.trials, need_seed(a.seed, "--mode mc")?)?;
            (est.estimate, [est.ci_lo, est.ci_hi], Some(est))
        }
    };
    let rates = code.rates();
    if let Some(path) = &a.csv {
        let mut csv = String::from("source,rate\n");
        for (n, r) in names.iter().zip(&rates) {
            let _ = writeln!(csv, "{n},{r}");
        }
        let _ = writeln!(csv, "error,{error}");
        write_out(path, &csv)?;
    }
    let mut metrics = json!({"rates": rates, "error": error, "ci": ci, "decoder": decoder, "n": code.n()});
    if let Some(e) = estimate {
        metrics["mc"] = estimate_json(&e);
    }
    Ok(ResultRecord::new(
        "sw-sim",
        json!({"sources": names, "mode": format!("{:?}", a.mode).to_lowercase(), "trials": a.trials, "seed": a.seed}),
        metrics,
    )
    .to_json())
}

fn bc_sim(a: &BcSimArgs) -> CliResult<String> {
    let problem = {
        let text = read(&a.problem)?;
        in_file(&a.problem, BcProblem::from_json(&text))?
    };
    let code_file: CodeFile = {
        let text = read(&a.code)?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", a.code.display())))?
    };
    let base = a.code.parent().unwrap_or(Path::new("."));
    let mut receivers = Vec::new();
    for r in &code_file.receivers {
        receivers.push(ReceiverCode {
            shared: read_matrix(&base.join(&r.shared))?,
            message: read_matrix(&base.join(&r.message))?,
            shared_vector: r.shared_vector.clone(),
        });
    }
    let code = in_file(&a.code, BcCode::new(receivers))?;
    let decoder = match a.decoder {
        BcDecoderArg::Ml => BcDecoder::Ml,
        BcDecoderArg::Md => BcDecoder::Md,
    };
    let metrics = match a.mode {
        Mode::Exact => {
            let e = bc_error_exact(&code, &problem, decoder, DEFAULT_EXACT_CAP)?;
            json!({"error": e, "ci": [e, e]})
        }
        Mode::Mc => {
            let est = bc_error_mc(&code, &problem, decoder, a.trials, need_seed(a.seed, "--mode mc")?)?;
            json!({"error": est.estimate, "ci": [est.ci_lo, est.ci_hi], "mc": estimate_json(&est)})
        }
    };
    let mut metrics = metrics;
    metrics["shared_rates"] = json!(code.shared_rates());
    metrics["message_rates"] = json!(code.message_rates());
    metrics["n"] = json!(code.n());
    Ok(ResultRecord::new(
        "bc-sim",
        json!({"decoder": decoder, "mode": format!("{:?}", a.mode).to_lowercase(), "trials": a.trials, "seed": a.seed}),
        metrics,
    )
    .to_json())
}

fn lp_md(a: &LpMdArgs) -> CliResult<String> {
    let dist = read_dist(&a.dist)?;
    if a.stacks.len() != a.syndromes.len() {
        return Err(CliError::Config(format!("{} --stack but {} --syndrome", a.stacks.len(), a.syndromes.len())));
    }
    let mut matrices = Vec::new();
    let mut syndromes = Vec::new();
    for (stack, syn) in a.stacks.iter().zip(&a.syndromes) {
        let mut m: Option<FieldMatrix> = None;
        for entry in stack.split(',') {
            let (_, path) = named_path(entry)?;
            let part = read_matrix(&path)?;
            m = Some(match m {
                None => part,
                Some(top) => top.stack(&part).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            });
        }
        let mut s = Vec::new();
        for entry in syn.split(',') {
            let (_, v) = entry.split_once('=').ok_or_else(|| CliError::Config(format!("'{entry}' must be NAME=VECTOR")))?;
            s.extend(parse_vector(v)?);
        }
        matrices.push(m.expect("split yields at least one entry"));
        syndromes.push(s);
    }
    let options = MdLpOptions { degree_cap: a.degree_cap, fallback_cap: a.fallback.map(|_| DEFAULT_SEARCH_CAP) };
    let r = md_via_lp(&matrices, &syndromes, &dist, options)?;
    let fractional = r.types.iter().filter(|t| t.fractional_point.is_some()).count();
    let mut metrics = json!({
        "best": r.best,
        "divergence": if r.divergence.is_finite() { json!(r.divergence) } else { json!("inf") },
        "all_integral": r.all_integral,
        "types": r.types.len(),
        "fractional_types": fractional,
    });
    if a.json {
        metrics["per_type"] = serde_json::to_value(&r.types).expect("plain data");
    }
    Ok(ResultRecord::new("lp-md", json!({"terminals": matrices.len(), "fallback": a.fallback.is_some()}), metrics).to_json())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rate_x: f64,
    pub rate_y: f64,
    pub n: usize,
    pub error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

fn sweep_sw(a: &SwSweepArgs) -> CliResult<String> {
    let dist = read_dist(&a.dist)?;
    if dist.arity() != 2 {
        return Err(CliError::Config(format!("{}: sweep sw needs a two-source law", a.dist.display())));
    }
    if a.n.is_empty() || a.tries == 0 {
        return Err(CliError::Config("sweep needs at least one n and one try".into()));
    }
    let grid: Vec<(usize, f64, f64)> = a
        .n
        .iter()
        .flat_map(|&n| a.rates.0.iter().flat_map(move |&rx| a.rates.0.iter().map(move |&ry| (n, rx, ry))))
        .collect();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &(n, rx, ry))| -> crate::Result<SweepRow> {
            let mut rng = trial_rng(a.seed, idx as u64);
            let mut best: Option<SweepRow> = None;
            for _ in 0..a.tries {
                let mats = [rx, ry]
                    .iter()
                    .map(|&r| {
                        let l = crate::broadcast::rows_for_rate(r, n, a.q);
                        if l == 0 {
                            FieldMatrix::zeros(a.q, 0, n)
                        } else {
                            generate_sparse(a.q, l, n, a.tau, rng.next_u64())
                        }
                    })
                    .collect::<crate::Result<Vec<_>>>()?;
                let code = SwCode::new(mats, dist.clone())?;
                let row = match a.mode {
                    Mode::Exact => {
                        let e = sw_error_exact(&code, SwDecoder::MinDivergence, DEFAULT_SEARCH_CAP)?;
                        SweepRow { rate_x: rx, rate_y: ry, n, error: e, ci_lo: e, ci_hi: e }
                    }
                    Mode::Mc => {
                        let est = sw_error_mc(&code, SwDecoder::MinDivergence, a.trials, rng.next_u64())?;
                        SweepRow { rate_x: rx, rate_y: ry, n, error: est.estimate, ci_lo: est.ci_lo, ci_hi: est.ci_hi }
                    }
                };
                if best.as_ref().is_none_or(|b| row.error < b.error) {
                    best = Some(row);
                }
            }
            Ok(best.expect("at least one try"))
        })
        .collect::<crate::Result<_>>()?;
    let mut csv = format!("{CSV_HEADER}\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{},{},{}", r.rate_x, r.rate_y, r.n, r.error, r.ci_lo, r.ci_hi);
    }
    let summary = ResultRecord::new(
        "sweep-sw",
        json!({"rates": a.rates.0, "n": a.n, "q": a.q, "tau": a.tau, "tries": a.tries, "seed": a.seed}),
        json!({
            "points": rows.len(),
            "min_error": rows.iter().map(|r| r.error).fold(f64::INFINITY, f64::min),
            "max_error": rows.iter().map(|r| r.error).fold(0.0, f64::max),
        }),
    );
    match &a.csv {
        Some(path) => {
            write_out(path, &csv)?;
            Ok(summary.to_json())
        }
        None => {
            eprint!("{}", summary.to_json());
            Ok(csv)
        }
    }
}
