use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use nbmlc::analysis::{self, ComplexityParams, ComplexityReport};
use nbmlc::channel_sim::{self, SimConfig, StopRule};
use nbmlc::codes::{load_alist, save_alist, Code};
use nbmlc::mlc::{self, Scheme, SchemeSpec};
use nbmlc::qspa::{DecoderOptions, DEFAULT_MAX_ITERATIONS};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] nbmlc::Error),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.kind(),
            CliError::Config(_) => "config",
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "nbmlc", version, about = "Non-binary LDPC and multilevel coding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the parity-check matrices of a scheme and write them as alist files.
    Construct(ConstructArgs),
    /// Monte-Carlo BLER/BER sweep over an Eb/N0 grid, written as CSV.
    Simulate(SimulateArgs),
    /// Shannon limit of uniform square QAM at a given total rate.
    Capacity(CapacityArgs),
    /// Per-iteration decoding complexity.
    Complexity(ComplexityArgs),
    /// List the built-in scheme presets.
    Presets,
}

#[derive(Args, Default)]
struct SchemeArgs {
    /// Preset name (see `nbmlc presets`).
    #[arg(long)]
    scheme: Option<String>,
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Block length in channel symbols; code dimensions scale with it.
    #[arg(long)]
    block_symbols: Option<usize>,
    /// Use the mixed 3:1 weight-2/weight-3 column profile for non-binary codes.
    #[arg(long)]
    mixed_weights: bool,
    /// Seed for construction and simulation.
    #[arg(long)]
    seed: Option<u64>,
    /// Parity-check matrix (alist) for the next coded level; repeatable.
    #[arg(long = "matrix")]
    matrices: Vec<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Output alist path; schemes with several codes get `.l<level>` inserted
    /// before the extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Eb/N0 grid in dB: `start:stop:step` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    ebn0: Option<String>,
    /// Block errors after which a point stops.
    #[arg(long)]
    stop_errors: Option<u64>,
    /// Blocks after which a point stops.
    #[arg(long)]
    max_trials: Option<u64>,
    /// QSPA iteration cap.
    #[arg(long)]
    iters: Option<usize>,
    /// Always run the full iteration cap.
    #[arg(long)]
    full_iterations: bool,
    /// Demap each level with the true lower-level symbols.
    #[arg(long)]
    genie: bool,
    /// CSV output path (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CapacityArgs {
    /// Constellation: qam4, qam16, qam64 or qam256.
    #[arg(long, default_value = "qam64")]
    constellation: String,
    /// Total code rate.
    #[arg(long, default_value_t = 0.8)]
    rate: f64,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Preset whose published parameters (or, with --measured, built codes)
    /// are evaluated.
    #[arg(long)]
    scheme: Option<String>,
    /// Evaluate the PEG-built codes of the preset instead of reference parameters.
    #[arg(long)]
    measured: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    q: Option<usize>,
    /// Mean check-node degree.
    #[arg(long)]
    dbar: Option<f64>,
    /// Mean variable-node degree.
    #[arg(long)]
    lbar: Option<f64>,
    /// Largest check-node degree.
    #[arg(long)]
    dmax: Option<usize>,
    /// Print CSV instead of a table.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SchemeRef {
    Preset(String),
    Inline(SchemeSpec),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridConfig {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

/// JSON run configuration; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    scheme: Option<SchemeRef>,
    block_symbols: Option<usize>,
    mixed_weights: Option<bool>,
    seed: Option<u64>,
    matrices: Option<Vec<PathBuf>>,
    ebn0: Option<GridConfig>,
    stop_errors: Option<u64>,
    max_trials: Option<u64>,
    iters: Option<usize>,
    full_iterations: Option<bool>,
    genie: Option<bool>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

fn read_config(path: Option<&Path>) -> CliResult<RunConfig> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn resolve_spec(args: &SchemeArgs, config: &mut RunConfig) -> CliResult<SchemeSpec> {
    let mut spec = match (&args.scheme, config.scheme.take()) {
        (Some(name), _) => SchemeSpec::preset(name)?,
        (None, Some(SchemeRef::Preset(name))) => SchemeSpec::preset(&name)?,
        (None, Some(SchemeRef::Inline(spec))) => spec,
        (None, None) => return Err(CliError::Config("no scheme given (--scheme or config `scheme`)".into())),
    };
    if let Some(ns) = args.block_symbols.or(config.block_symbols) {
        spec = spec.with_block_symbols(ns)?;
    }
    if args.mixed_weights || config.mixed_weights.unwrap_or(false) {
        spec = spec.with_nonbinary_weights(&mlc::nonbinary_mixed());
    }
    Ok(spec)
}

fn require_seed(flag: Option<u64>, config: &RunConfig) -> CliResult<u64> {
    flag.or(config.seed).ok_or_else(|| CliError::Config("a seed is required (--seed or config `seed`)".into()))
}

fn build_scheme(args: &SchemeArgs, config: &mut RunConfig) -> CliResult<(Scheme, u64)> {
    let spec = resolve_spec(args, config)?;
    let seed = require_seed(args.seed, config)?;
    let paths =
        if args.matrices.is_empty() { config.matrices.clone().unwrap_or_default() } else { args.matrices.clone() };
    let codes = paths.iter().map(load_alist).collect::<nbmlc::Result<Vec<Code>>>()?;
    Ok((spec.build_with(seed, codes)?, seed))
}

fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("bad Eb/N0 grid `{text}`"));
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<CliResult<_>>()?;
        return Ok(channel_sim::ebn0_grid(v[0], v[1], v[2])?);
    }
    if parts.len() != 1 {
        return Err(bad());
    }
    text.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn level_path(base: &Path, level: usize) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.l{level}.{}", ext.to_string_lossy()),
        None => format!("{stem}.l{level}"),
    };
    base.with_file_name(name)
}

fn cmd_construct(args: &ConstructArgs) -> CliResult<()> {
    let mut config = read_config(args.scheme.config.as_deref())?;
    let out = args.out.clone().or(config.out.take()).ok_or_else(|| CliError::Config("--out is required".into()))?;
    let (scheme, _) = build_scheme(&args.scheme, &mut config)?;
    let codes = scheme.codes();
    for (l, code) in codes.iter().enumerate() {
        let path = if codes.len() == 1 { out.clone() } else { level_path(&out, l) };
        save_alist(code, &path)?;
        eprintln!(
            "wrote {}: N = {}, M = {}, GF({}), girth {}",
            path.display(),
            code.n(),
            code.m(),
            code.field().q(),
            code.girth().map_or("none".to_string(), |g| g.to_string())
        );
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut config = read_config(args.scheme.config.as_deref())?;
    let grid = match (&args.ebn0, config.ebn0.take()) {
        (Some(text), _) => parse_grid(text)?,
        (None, Some(GridConfig::Range { start, stop, step })) => channel_sim::ebn0_grid(start, stop, step)?,
        (None, Some(GridConfig::List(v))) => v,
        (None, None) => return Err(CliError::Config("no Eb/N0 grid given (--ebn0 or config `ebn0`)".into())),
    };
    let (scheme, seed) = build_scheme(&args.scheme, &mut config)?;
    let defaults = StopRule::default();
    let sim = SimConfig {
        stop: StopRule {
            min_block_errors: args.stop_errors.or(config.stop_errors).unwrap_or(defaults.min_block_errors),
            max_trials: args.max_trials.or(config.max_trials).unwrap_or(defaults.max_trials),
            max_wall_time: None,
        },
        decoder: DecoderOptions {
            max_iterations: args.iters.or(config.iters).unwrap_or(DEFAULT_MAX_ITERATIONS),
            early_stop: !(args.full_iterations || config.full_iterations.unwrap_or(false)),
        },
        workers: args.workers.or(config.workers).unwrap_or(0),
        genie: args.genie || config.genie.unwrap_or(false),
    };
    match args.out.clone().or(config.out.take()) {
        Some(path) => {
            channel_sim::sweep(&scheme, &grid, &sim, seed, &path)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            channel_sim::sweep_to_writer(&scheme, &grid, &sim, seed, &mut lock)?;
        }
    }
    Ok(())
}

fn parse_constellation(name: &str) -> CliResult<u32> {
    match name.to_ascii_lowercase().as_str() {
        "qam4" | "qpsk" => Ok(2),
        "qam16" => Ok(4),
        "qam64" => Ok(6),
        "qam256" => Ok(8),
        other => Err(CliError::Config(format!("unknown constellation `{other}`"))),
    }
}

fn cmd_capacity(args: &CapacityArgs) -> CliResult<()> {
    let bits = parse_constellation(&args.constellation)?;
    let limit = analysis::shannon_limit(bits, args.rate)?;
    println!("constellation,rate,spectral_efficiency,shannon_limit_ebn0_db");
    println!("{},{},{:.4},{:.4}", args.constellation, args.rate, args.rate * bits as f64, limit);
    Ok(())
}

fn complexity_rows(args: &ComplexityArgs) -> CliResult<Vec<(String, ComplexityParams)>> {
    if let Some(name) = &args.scheme {
        if !args.measured {
            return analysis::reference_parameters(name)
                .map(|p| vec![(name.clone(), p)])
                .ok_or_else(|| CliError::Config(format!("no reference parameters for `{name}`; use --measured")));
        }
        let seed = args.seed.ok_or_else(|| CliError::Config("--measured needs --seed".into()))?;
        let scheme = SchemeSpec::preset(name)?.build(seed)?;
        return Ok(scheme
            .codes()
            .iter()
            .enumerate()
            .map(|(l, c)| (format!("{name}/code{l}"), ComplexityParams::of_code(c)))
            .collect());
    }
    let missing = |what: &str| CliError::Config(format!("--{what} is required without --scheme"));
    Ok(vec![(
        "custom".to_string(),
        ComplexityParams {
            n: args.n.ok_or_else(|| missing("n"))?,
            rate: args.rate.ok_or_else(|| missing("rate"))?,
            q: args.q.ok_or_else(|| missing("q"))?,
            avg_check_degree: args.dbar.ok_or_else(|| missing("dbar"))?,
            avg_var_degree: args.lbar.ok_or_else(|| missing("lbar"))?,
            max_check_degree: args.dmax.ok_or_else(|| missing("dmax"))?,
        },
    )])
}

fn cmd_complexity(args: &ComplexityArgs) -> CliResult<()> {
    let rows = complexity_rows(args)?;
    let mut reports: Vec<(String, ComplexityReport)> = Vec::with_capacity(rows.len() + 1);
    let mut total = ComplexityReport::default();
    for (name, p) in &rows {
        let r = analysis::complexity_estimate(p)?;
        total = total + r;
        reports.push((name.clone(), r));
    }
    if reports.len() > 1 {
        reports.push(("total".to_string(), total));
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let w = |e: std::io::Error| CliError::Config(format!("cannot write output: {e}"));
    if args.csv {
        writeln!(out, "code,gf_mul,float_add,float_mul,memory").map_err(w)?;
        for (name, r) in &reports {
            writeln!(out, "{name},{},{},{},{}", r.gf_mul, r.float_add, r.float_mul, r.memory).map_err(w)?;
        }
    } else {
        let width = reports.iter().map(|(n, _)| n.len()).max().unwrap_or(4).max(4);
        writeln!(out, "{:<width$} {:>12} {:>12} {:>12} {:>12}", "code", "gf_mul", "float_add", "float_mul", "memory")
            .map_err(w)?;
        for (name, r) in &reports {
            writeln!(out, "{name:<width$} {:>12} {:>12} {:>12} {:>12}", r.gf_mul, r.float_add, r.float_mul, r.memory)
                .map_err(w)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Construct(a) => cmd_construct(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Capacity(a) => cmd_capacity(&a),
        Command::Complexity(a) => cmd_complexity(&a),
        Command::Presets => {
            for name in mlc::preset_names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.kind());
            ExitCode::FAILURE
        }
    }
}
