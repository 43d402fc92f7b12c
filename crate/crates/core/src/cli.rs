//! Command-line front end.
//!
//! Exit codes: 0 when every gated result passes, 1 on any violation or
//! degenerate verdict, 2 on usage or configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{
    mutation_selftest, run_campaign, run_identity_campaign, search_counterexample, variants_for, BlockSpec,
    CampaignSummary, FloatRange, IntRange, ReadingName, SearchBudget, SearchTarget, SelftestEntry, TrialConfig,
    RNG_VERSION,
};
use crate::identities::{ConstraintMode, IdentityId};
use crate::inequalities::{Claim, InequalityReport, Tolerance, Verdict};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TRACELAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "tracelab", version, about = "Randomized verification of trace inequalities on block-diagonal matrix algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run campaigns for one or more claims and write a report.
    Verify(VerifyArgs),
    /// Search for the smallest instance violating a claim or identity.
    Counterexample(CounterexampleArgs),
    /// Measure identity residuals over a campaign.
    Identity(IdentityArgs),
    /// Flip every relation and check that violations are detected.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Detail {
    /// Every report.
    All,
    /// Only reports that did not pass.
    Failures,
    /// Summaries only.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Expect {
    Found,
    None,
}

/// Generation flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
struct GenArgs {
    /// JSON file with the same field names as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trials per claim variant.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Block dimension range, `a..b`.
    #[arg(long)]
    dims: Option<String>,
    /// Number of blocks.
    #[arg(long)]
    blocks: Option<usize>,
    /// Block weight range, `a..b`.
    #[arg(long)]
    weights: Option<String>,
    /// Number of elements per tuple.
    #[arg(long)]
    tuple_size: Option<usize>,
    /// Comma-separated function ids (`power:<p>`, `expsq`, `log1p`, `id`, `psi:<id>`).
    #[arg(long, value_delimiter = ',')]
    functions: Option<Vec<String>>,
    /// Comma-separated exponents for the p-norm claims.
    #[arg(long, value_delimiter = ',')]
    p_values: Option<Vec<f64>>,
    /// Absolute tolerance.
    #[arg(long)]
    tol_abs: Option<f64>,
    /// Relative tolerance, scaled by the larger side.
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Weight normalization replacing the one the claim or identity requires.
    #[arg(long)]
    constraint: Option<String>,
    /// Forced direction for the literal parallelogram inequality.
    #[arg(long)]
    reading: Option<String>,
}

#[derive(Debug, Clone, Args)]
struct VerifyArgs {
    /// Claim id or `all`; repeatable.
    #[arg(long, value_delimiter = ',')]
    claim: Vec<String>,
    #[command(flatten)]
    gen: GenArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format (default json).
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    detail: Option<Detail>,
    /// Manifest path; defaults to `<out>.manifest.json` when `--out` is given.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Gate on probe claims too when running `all`.
    #[arg(long)]
    include_probes: bool,
}

#[derive(Debug, Clone, Args)]
struct CounterexampleArgs {
    /// Claim or identity id.
    #[arg(long)]
    claim: Option<String>,
    #[command(flatten)]
    gen: GenArgs,
    /// Largest total dimension searched.
    #[arg(long)]
    max_dim: Option<usize>,
    /// Largest tuple size searched.
    #[arg(long)]
    max_n: Option<usize>,
    /// Expected outcome; the exit code is 0 when it matches.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct IdentityArgs {
    /// Identity id: id1, ibk, mo1 or mo2.
    #[arg(long)]
    identity: Option<String>,
    #[command(flatten)]
    gen: GenArgs,
    /// Largest allowed residual relative to the identity's scale.
    #[arg(long)]
    tol: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SelftestArgs {
    /// Claim id or `all` (the default); repeatable.
    #[arg(long, value_delimiter = ',')]
    claim: Vec<String>,
    #[command(flatten)]
    gen: GenArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gate on probe claims too when running `all`.
    #[arg(long)]
    include_probes: bool,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    claim: Option<OneOrMany>,
    identity: Option<String>,
    trials: Option<usize>,
    seed: Option<u64>,
    dims: Option<String>,
    blocks: Option<usize>,
    weights: Option<String>,
    tuple_size: Option<usize>,
    functions: Option<Vec<String>>,
    p_values: Option<Vec<f64>>,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
    tol: Option<f64>,
    constraint: Option<String>,
    reading: Option<String>,
    format: Option<Format>,
    detail: Option<Detail>,
    out: Option<PathBuf>,
    manifest: Option<PathBuf>,
    include_probes: Option<bool>,
    max_dim: Option<usize>,
    max_n: Option<usize>,
    expect: Option<Expect>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

/// Builds a campaign configuration from flags over file values over defaults.
fn trial_config(gen: &GenArgs, file: &FileConfig, scope: &[String], default_trials: usize) -> Result<TrialConfig> {
    let mut c = TrialConfig {
        trials: default_trials,
        ..TrialConfig::default()
    };
    if let Some(t) = gen.trials.or(file.trials) {
        c.trials = t;
    }
    if let Some(s) = gen.seed.or(file.seed) {
        c.master_seed = s;
    }
    let dims: IntRange = match gen.dims.as_ref().or(file.dims.as_ref()) {
        Some(s) => s.parse()?,
        None => c.block_spec[0].dims,
    };
    let weights: FloatRange = match gen.weights.as_ref().or(file.weights.as_ref()) {
        Some(s) => s.parse()?,
        None => c.block_spec[0].weights,
    };
    let blocks = gen.blocks.or(file.blocks).unwrap_or(c.block_spec.len());
    c.block_spec = vec![BlockSpec { dims, weights }; blocks];
    if let Some(n) = gen.tuple_size.or(file.tuple_size) {
        c.tuple_size = n;
    }
    if let Some(f) = gen.functions.clone().or_else(|| file.functions.clone()) {
        c.functions = f;
    }
    if let Some(p) = gen.p_values.clone().or_else(|| file.p_values.clone()) {
        c.p_values = p;
    }
    let atol = gen.tol_abs.or(file.tol_abs);
    let rtol = gen.tol_rel.or(file.tol_rel);
    if atol.is_some() || rtol.is_some() {
        c.tolerance = Some(Tolerance {
            atol: atol.unwrap_or(Tolerance::DEFAULT.atol),
            rtol: rtol.unwrap_or(Tolerance::DEFAULT.rtol),
        });
    }
    if let Some(mode) = gen.constraint.as_ref().or(file.constraint.as_ref()) {
        let mode: ConstraintMode = mode.parse()?;
        for id in scope {
            c.constraint_modes.insert(id.clone(), mode);
        }
    }
    if let Some(r) = gen.reading.as_ref().or(file.reading.as_ref()) {
        let reading: crate::inequalities::Reading = r.parse()?;
        c.reading = Some(ReadingName::from(reading));
    }
    c.validate()?;
    Ok(c)
}

/// Resolves claim arguments; `all` expands to every claim.
fn resolve_claims(args: &[String]) -> Result<(Vec<Claim>, bool)> {
    if args.is_empty() {
        return Err(Error::InvalidConfig("no claim given".into()));
    }
    let mut claims = Vec::new();
    let mut all = false;
    for a in args {
        if a.trim() == "all" {
            all = true;
            claims.extend(Claim::ALL);
        } else {
            claims.push(a.parse()?);
        }
    }
    let mut seen = std::collections::HashSet::new();
    claims.retain(|c| seen.insert(*c));
    Ok((claims, all))
}

/// Writes through a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidConfig(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    // Temp files are created owner-only; reports are ordinary files.
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::InvalidConfig(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    bytes
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    tool: &'static str,
    version: &'static str,
    rng: &'static str,
    config: &'a TrialConfig,
    claims: Vec<&'static str>,
    gated: Vec<&'static str>,
    passed: bool,
    summaries: &'a [CampaignSummary],
    reports: Vec<&'a InequalityReport>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    rng: &'static str,
    command: &'static str,
    config: &'a TrialConfig,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    exit_code: i32,
    summaries: &'a [CampaignSummary],
    outputs: Vec<String>,
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Flat projection of the report fields, one row per report.
fn reports_csv(reports: &[&InequalityReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidConfig(format!("csv: {e}"));
    w.write_record([
        "claim", "verdict", "sides", "direction", "margin", "tolerance", "seed", "master_seed", "trial_index", "variant",
        "dims", "weights", "n", "alphas", "function", "p", "note",
    ])
    .map_err(err)?;
    for r in reports {
        let c = &r.context;
        let verdict = match r.verdict {
            Verdict::Pass => "Pass",
            Verdict::Violation => "Violation",
            Verdict::Degenerate => "Degenerate",
        };
        w.write_record([
            r.claim.clone(),
            verdict.to_string(),
            join(&r.side_values()),
            join(&r.direction),
            r.margin.to_string(),
            r.tolerance.to_string(),
            c.seed.clone(),
            opt(c.master_seed),
            opt(c.trial_index),
            c.variant.clone().unwrap_or_default(),
            join(&c.dims),
            join(&c.weights),
            c.n.to_string(),
            join(&c.alphas),
            c.function.clone(),
            opt(c.p),
            r.note.clone().unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::InvalidConfig(format!("csv: {e}")))
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let started = unix_ms();
    let file = load_file_config(args.gen.config.as_deref())?;
    let claim_args = if args.claim.is_empty() {
        file.claim.clone().map(OneOrMany::into_vec).unwrap_or_default()
    } else {
        args.claim.clone()
    };
    let (claims, all) = resolve_claims(&claim_args)?;
    let scope: Vec<String> = claims.iter().map(|c| c.to_string()).collect();
    let config = trial_config(&args.gen, &file, &scope, 100)?;
    let include_probes = args.include_probes || file.include_probes.unwrap_or(false);
    if !all {
        for &c in &claims {
            if variants_for(c, &config)?.is_empty() {
                return Err(Error::InvalidConfig(format!("no configured function satisfies the hypotheses of `{c}`")));
            }
        }
    }
    let result = run_campaign(&config, &claims)?;
    let gate_probes = include_probes || !all;
    let passed = result.gate_passes(gate_probes);
    let gated: Vec<&'static str> = claims
        .iter()
        .filter(|c| gate_probes || !c.is_probe())
        .map(|c| c.as_str())
        .collect();
    let detail = args.detail.or(file.detail).unwrap_or(Detail::All);
    let reports: Vec<&InequalityReport> = match detail {
        Detail::All => result.reports.iter().collect(),
        Detail::Failures => result.reports.iter().filter(|r| r.verdict != Verdict::Pass).collect(),
        Detail::None => Vec::new(),
    };
    let format = args.format.or(file.format).unwrap_or(Format::Json);
    let out = args.out.clone().or(file.out.clone());
    let bytes = match format {
        Format::Json => to_json(&VerifyReport {
            tool: "tracelab",
            version: env!("CARGO_PKG_VERSION"),
            rng: RNG_VERSION,
            config: &config,
            claims: claims.iter().map(|c| c.as_str()).collect(),
            gated,
            passed,
            summaries: &result.summaries,
            reports,
        }),
        Format::Csv => reports_csv(&reports)?,
    };
    emit(out.as_deref(), &bytes)?;
    let code = if passed { EXIT_PASS } else { EXIT_FAIL };
    let manifest_path = args
        .manifest
        .clone()
        .or(file.manifest.clone())
        .or_else(|| out.as_ref().map(|p| PathBuf::from(format!("{}.manifest.json", p.display()))));
    if let Some(path) = manifest_path {
        let manifest = Manifest {
            tool: "tracelab",
            version: env!("CARGO_PKG_VERSION"),
            rng: RNG_VERSION,
            command: "verify",
            config: &config,
            started_unix_ms: started,
            finished_unix_ms: unix_ms(),
            exit_code: code,
            summaries: &result.summaries,
            outputs: out.iter().map(|p| p.display().to_string()).collect(),
        };
        write_atomic(&path, &to_json(&manifest))?;
    }
    for s in &result.summaries {
        if !s.all_pass() {
            eprintln!(
                "{} [{}]: {} violation(s), {} degenerate of {}",
                s.claim, s.variant, s.violation, s.degenerate, s.trials
            );
        }
    }
    Ok(code)
}

#[derive(Debug, Serialize)]
struct SearchOutput<'a> {
    target: String,
    budget: SearchBudget,
    expect: Expect,
    found: bool,
    counterexample: Option<&'a crate::harness::Counterexample>,
}

fn cmd_counterexample(args: CounterexampleArgs) -> Result<i32> {
    let file = load_file_config(args.gen.config.as_deref())?;
    let id = args
        .claim
        .clone()
        .or_else(|| file.claim.clone().and_then(|c| c.into_vec().into_iter().next()))
        .ok_or_else(|| Error::InvalidConfig("no claim given".into()))?;
    let target: SearchTarget = id.parse()?;
    let config = trial_config(&args.gen, &file, &[id.clone()], 50)?;
    let budget = SearchBudget {
        trials: config.trials,
        max_dim: args.max_dim.or(file.max_dim).unwrap_or(4),
        max_n: args.max_n.or(file.max_n).unwrap_or(4),
    };
    let expect = args.expect.or(file.expect).unwrap_or(Expect::Found);
    let found = search_counterexample(target, &config, budget)?;
    let output = SearchOutput {
        target: target.to_string(),
        budget,
        expect,
        found: found.is_some(),
        counterexample: found.as_ref(),
    };
    emit(args.out.as_deref().or(file.out.as_deref()), &to_json(&output))?;
    let matched = found.is_some() == (expect == Expect::Found);
    Ok(if matched { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Debug, Serialize)]
struct IdentityOutput<'a> {
    config: &'a TrialConfig,
    tolerance: f64,
    passed: bool,
    summary: &'a crate::harness::IdentitySummary,
}

fn cmd_identity(args: IdentityArgs) -> Result<i32> {
    let file = load_file_config(args.gen.config.as_deref())?;
    let name = args
        .identity
        .clone()
        .or(file.identity.clone())
        .ok_or_else(|| Error::InvalidConfig("no identity given".into()))?;
    let id: IdentityId = name.parse()?;
    let config = trial_config(&args.gen, &file, &[id.to_string()], 100)?;
    let tol = args.tol.or(file.tol).unwrap_or(1e-10);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidConfig("tolerance must be finite and nonnegative".into()));
    }
    let (summary, _) = run_identity_campaign(id, &config)?;
    let passed = summary.max_relative_residual <= tol;
    emit(
        args.out.as_deref().or(file.out.as_deref()),
        &to_json(&IdentityOutput {
            config: &config,
            tolerance: tol,
            passed,
            summary: &summary,
        }),
    )?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Debug, Serialize)]
struct SelftestOutput<'a> {
    config: &'a TrialConfig,
    passed: bool,
    entries: &'a [SelftestEntry],
}

fn cmd_selftest(args: SelftestArgs) -> Result<i32> {
    let file = load_file_config(args.gen.config.as_deref())?;
    let claim_args = if args.claim.is_empty() {
        file.claim.clone().map(OneOrMany::into_vec).unwrap_or_else(|| vec!["all".into()])
    } else {
        args.claim.clone()
    };
    let (claims, all) = resolve_claims(&claim_args)?;
    let scope: Vec<String> = claims.iter().map(|c| c.to_string()).collect();
    let config = trial_config(&args.gen, &file, &scope, 100)?;
    let gate_probes = args.include_probes || file.include_probes.unwrap_or(false) || !all;
    let mut entries = Vec::new();
    for claim in claims {
        entries.extend(mutation_selftest(claim, &config)?);
    }
    let passed = entries.iter().filter(|e| gate_probes || !e.probe).all(SelftestEntry::ok);
    for e in entries.iter().filter(|e| !e.ok()) {
        eprintln!("{} [{}]: flipped relation never violated", e.claim, e.variant);
    }
    emit(
        args.out.as_deref().or(file.out.as_deref()),
        &to_json(&SelftestOutput {
            config: &config,
            passed,
            entries: &entries,
        }),
    )?;
    Ok(if passed { EXIT_PASS } else { EXIT_FAIL })
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::InvalidConfig(format!("{THREADS_ENV} must be positive")));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

/// Parses `args` (including the program name) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let outcome = thread_pool().and_then(|pool| {
        pool.install(|| match cli.command {
            Command::Verify(a) => cmd_verify(a),
            Command::Counterexample(a) => cmd_counterexample(a),
            Command::Identity(a) => cmd_identity(a),
            Command::Selftest(a) => cmd_selftest(a),
        })
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tracelab: {e}");
            EXIT_USAGE
        }
    }
}
