use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pspin_qaoa::experiment::{
    emit_results, run_experiment, verification_suite, ExperimentConfig, ExperimentKind, OutputFormat, SchemeKind,
};

mod grid;

use grid::parse_grid;

/// Sweeps and checks for QAOA on the fully-connected p-spin ferromagnet.
///
/// Exit status: 0 on success, 1 for an invalid configuration, 2 when some
/// tasks failed (the table is still written, with failed rows flagged).
#[derive(Debug, Parser)]
#[command(name = "pspin-qaoa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Residual energy versus depth, r-init restarts per grid point.
    Scaling(GridArgs),
    /// Residual energy versus transverse field at fixed depth, per scheme.
    FieldSweep(GridArgs),
    /// BFGS iteration counts at the critical depth.
    Iters(GridArgs),
    /// Closed-form single-layer angles evaluated at h = 0.
    P1Table(GridArgs),
    /// Minimal spectral gap near the critical field and its scaling fit.
    Gap(GridArgs),
    /// Analytic, symmetry and congruence self-checks.
    Verify {
        /// Seed for the random circuits of the symmetry check.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    R,
    L,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// JSON experiment config; CLI flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of sites, e.g. `8,12,16` or `8:20:4`.
    #[arg(long = "n")]
    n: Option<String>,
    /// Interaction exponent(s) p.
    #[arg(long = "p-exp")]
    p_exp: Option<String>,
    /// Transverse field(s) h.
    #[arg(long = "h", allow_hyphen_values = true)]
    h: Option<String>,
    /// Circuit depth(s) P.
    #[arg(long)]
    depth: Option<String>,
    /// Initialisation scheme(s): random (r) or linear schedule (l).
    #[arg(long, value_enum, value_delimiter = ',')]
    scheme: Option<Vec<SchemeArg>>,
    /// Trotter step of the linear-schedule initialisation.
    #[arg(long)]
    dt: Option<f64>,
    /// Relative noise amplitude of the linear-schedule initialisation.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Base seed; every task seed is derived from it and the task's grid key.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Verify { seed } => verify(seed),
        Command::Scaling(a) => experiment(ExperimentKind::Scaling, a),
        Command::FieldSweep(a) => experiment(ExperimentKind::FieldSweep, a),
        Command::Iters(a) => experiment(ExperimentKind::IterationScaling, a),
        Command::P1Table(a) => experiment(ExperimentKind::P1Table, a),
        Command::Gap(a) => experiment(ExperimentKind::GapScaling, a),
    }
}

fn verify(seed: u64) -> ExitCode {
    match verification_suite(seed) {
        Ok(checks) => {
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::from(2) }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn experiment(kind: ExperimentKind, args: GridArgs) -> ExitCode {
    let config = match build_config(kind, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid configuration: {e:#}");
            return ExitCode::from(1);
        }
    };
    let table = match run_experiment(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("invalid configuration: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit_results(&table, &config, config.format, config.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if table.has_failures() {
        eprintln!("warning: some tasks failed; see the error column");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

/// Kind defaults, then the config file field by field, then CLI flags.
fn build_config(kind: ExperimentKind, args: &GridArgs) -> Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => merge_config_file(kind, path)?,
        None => ExperimentConfig::for_kind(kind),
    };
    config.kind = kind;
    if let Some(s) = &args.n {
        config.n_sites = parse_grid(s).context("--n")?;
    }
    if let Some(s) = &args.p_exp {
        config.p_exponents = parse_grid(s).context("--p-exp")?;
    }
    if let Some(s) = &args.h {
        config.fields = parse_grid(s).context("--h")?;
    }
    if let Some(s) = &args.depth {
        config.depths = parse_grid(s).context("--depth")?;
    }
    if let Some(schemes) = &args.scheme {
        config.schemes = schemes
            .iter()
            .map(|s| match s {
                SchemeArg::R => SchemeKind::Random,
                SchemeArg::L => SchemeKind::Linear,
            })
            .collect();
    }
    if let Some(v) = args.dt {
        config.dt = v;
    }
    if let Some(v) = args.noise {
        config.noise_amplitude = v;
    }
    if let Some(v) = args.restarts {
        config.n_restarts = v;
    }
    if let Some(v) = args.seed {
        config.base_seed = v;
    }
    if let Some(v) = args.workers {
        config.workers = v;
    }
    if let Some(v) = &args.out {
        config.out = Some(v.clone());
    }
    if let Some(f) = args.format {
        config.format = match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    config.validate()?;
    Ok(config)
}

/// Overlays the keys present in the file onto the defaults for `kind`.
/// Accepts either a bare config or a results document with a `config` key.
fn merge_config_file(kind: ExperimentKind, path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let overlay = match value.get("config") {
        Some(inner) if value.get("table").is_some() => inner.clone(),
        _ => value,
    };
    let serde_json::Value::Object(overlay) = overlay else {
        anyhow::bail!("{} must contain a JSON object", path.display());
    };
    let mut base = serde_json::to_value(ExperimentConfig::for_kind(kind))?;
    let fields = base.as_object_mut().expect("config serialises to an object");
    for (k, v) in overlay {
        fields.insert(k, v);
    }
    serde_json::from_value(base).with_context(|| format!("invalid config in {}", path.display()))
}
