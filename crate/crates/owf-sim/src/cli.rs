//! The `owf-sim` command line: `simulate`, `sweep`, `optimize` and `report`.
//!
//! Every run writes its outputs plus a `manifest.json` recording the command,
//! the configuration digest, the seed and the produced files. Outputs are
//! written atomically (temp file, then rename); data files contain nothing
//! time-dependent, so a rerun with equal inputs reproduces them
//! byte-identically regardless of `--threads`. Only the manifest's
//! `timestamp` field varies between reruns.
//!
//! Exit codes: 0 on success, 1 on invalid arguments or configuration, 2 on
//! runtime or I/O failure.

use crate::model::{load_config, ValidatedBundle};
use crate::optimizer::{
    optimize, write_convergence_csv, write_optimize_json, write_pareto_csv, ContractBounds,
    GaParams, OptimizeParams,
};
use crate::simulator::{
    run_sample, run_scenario_with_ledgers, sweep, write_argmax_csv, write_plot_csv,
    write_stats_json, write_sweep_csv, AxisName, SweepAxis,
};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "owf-sim",
    version,
    about = "Monte Carlo simulation and contract optimization for offshore wind farm maintenance"
)]
pub struct Cli {
    /// Rayon thread count; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run Monte Carlo samples for the configured contract.
    Simulate(SimulateArgs),
    /// Evaluate a Cartesian grid of contract terms.
    Sweep(SweepArgs),
    /// Search contract terms for the conflict/profit Pareto front.
    Optimize(OptimizeArgs),
    /// Summarize a previous run from its output directory.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Configuration file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed override.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count override.
    #[arg(long)]
    pub samples: Option<u32>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Additionally dump one sample's environment, failures, dispatch,
    /// availability and ledger under `sample_<index>/`.
    #[arg(long)]
    pub dump_sample: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Swept axis as `name=start:stop:step` with name one of q, r_us, r_ld,
    /// lambda; repeatable, applied in the order given.
    #[arg(long = "axis", required = true)]
    pub axes: Vec<String>,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Population size.
    #[arg(long = "ga-population", default_value_t = 200)]
    pub population: usize,
    /// Generation cap.
    #[arg(long = "ga-generations", default_value_t = 800)]
    pub generations: u32,
    /// Consecutive stalled generations that stop the search.
    #[arg(long = "ga-stall", default_value_t = 100)]
    pub stall: u32,
    /// Sample count per objective evaluation during evolution.
    #[arg(long, default_value_t = 200)]
    pub search_samples: u32,
    /// Sample count for the final front re-evaluation; defaults to the run's
    /// sample count.
    #[arg(long)]
    pub final_samples: Option<u32>,
    /// Crew size bounds as `lo:hi`.
    #[arg(long, default_value = "7:46")]
    pub bound_q: String,
    /// Upside-sharing threshold bounds as `lo:hi`.
    #[arg(long, default_value = "0.50:0.85")]
    pub bound_r_us: String,
    /// Liquidated-damages threshold bounds as `lo:hi`.
    #[arg(long, default_value = "0.60:0.95")]
    pub bound_r_ld: String,
    /// Penalty cap fraction bounds as `lo:hi`.
    #[arg(long, default_value = "0.25:1.15")]
    pub bound_lambda: String,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Output directory of a previous run (containing manifest.json).
    #[arg(long)]
    pub dir: PathBuf,
}

/// What a run wrote and under which inputs; saved next to the outputs.
/// Rerunning the recorded command reproduces every data file byte for byte;
/// only `timestamp` (Unix seconds at write time) differs between reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub config_sha256: String,
    pub master_seed: u64,
    pub samples: u32,
    pub timestamp: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

/// Top-level entry; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    dispatch(cli)
}

fn dispatch(cli: Cli) -> i32 {
    if let Some(threads) = cli.threads {
        // A pool may already exist (tests, repeated calls); that is fine
        // because results do not depend on it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            1
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            2
        }
    }
}

enum CliError {
    /// Bad arguments or configuration: exit code 1.
    Usage(String),
    /// I/O or execution failure: exit code 2.
    Runtime(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

struct Prepared {
    bundle: ValidatedBundle,
    master_seed: u64,
    samples: u32,
    manifest: RunManifest,
    out_dir: PathBuf,
}

fn prepare(common: &CommonArgs, command: &str) -> Result<Prepared, CliError> {
    let bundle = load_config(&common.config).map_err(|e| CliError::Usage(e.to_string()))?;
    let raw = fs::read(&common.config)?;
    let master_seed = common.seed.unwrap_or(bundle.sim.master_seed);
    let samples = common.samples.unwrap_or(bundle.sim.samples);
    if samples == 0 {
        return Err(CliError::Usage("samples must be positive".to_string()));
    }
    fs::create_dir_all(&common.out)?;
    Ok(Prepared {
        bundle,
        master_seed,
        samples,
        manifest: RunManifest {
            command: command.to_string(),
            config_path: common.config.display().to_string(),
            config_sha256: sha256_hex(&raw),
            master_seed,
            samples,
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        },
        out_dir: common.out.clone(),
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Write `content` to `dir/name` atomically: temp file in the same
/// directory, then rename over the target.
fn write_atomic(dir: &Path, name: &str, content: &[u8]) -> std::io::Result<()> {
    let target = dir.join(name);
    let tmp = dir.join(format!("{name}.tmp"));
    fs::write(&tmp, content)?;
    fs::rename(&tmp, &target)
}

fn emit(prepared: &mut Prepared, name: &str, content: &[u8]) -> Result<(), CliError> {
    write_atomic(&prepared.out_dir, name, content)?;
    prepared.manifest.outputs.push(name.to_string());
    Ok(())
}

fn finish(mut prepared: Prepared) -> Result<(), CliError> {
    prepared.manifest.outputs.push("manifest.json".to_string());
    let mut json = serde_json::to_vec_pretty(&prepared.manifest)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    json.push(b'\n');
    write_atomic(&prepared.out_dir, "manifest.json", &json)?;
    Ok(())
}

/// Write one sample's environment, failures, dispatch, availability and
/// ledger under `sample_<index>/`.
fn dump_sample(
    prepared: &mut Prepared,
    bundle: &ValidatedBundle,
    index: u64,
) -> Result<(), CliError> {
    let outcome = run_sample(bundle, &bundle.contract, prepared.master_seed, index);
    let sub = format!("sample_{index}");
    fs::create_dir_all(prepared.out_dir.join(&sub))?;
    let mut buf = Vec::new();
    crate::stochastic::write_environment_csv(&outcome.environment, &mut buf)?;
    emit(prepared, &format!("{sub}/environment.csv"), &buf)?;
    buf = Vec::new();
    crate::stochastic::write_failures_csv(&outcome.failures, &mut buf)?;
    emit(prepared, &format!("{sub}/failures.csv"), &buf)?;
    buf = Vec::new();
    crate::scheduler::write_drv_csv(&outcome.plan.tasks, &mut buf)?;
    emit(prepared, &format!("{sub}/dispatch.csv"), &buf)?;
    buf = Vec::new();
    crate::availability::write_availability_csv(&outcome.matrix, &mut buf)?;
    emit(prepared, &format!("{sub}/availability.csv"), &buf)?;
    buf = Vec::new();
    crate::economics::write_ledger_json(&outcome.ledger, &mut buf)?;
    emit(prepared, &format!("{sub}/ledger.json"), &buf)?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut prepared = prepare(&args.common, "simulate")?;
    let bundle = prepared.bundle.clone();
    let (stats, ledgers) = run_scenario_with_ledgers(
        &bundle,
        &bundle.contract,
        prepared.samples,
        prepared.master_seed,
    );

    let mut json = Vec::new();
    write_stats_json(&stats, &mut json)?;
    emit(&mut prepared, "stats.json", &json)?;

    let mut csv = Vec::new();
    crate::economics::write_ledger_csv(&ledgers, &mut csv)?;
    emit(&mut prepared, "ledgers.csv", &csv)?;

    dump_sample(&mut prepared, &bundle, 0)?;
    if let Some(index) = args.dump_sample {
        if index >= prepared.samples as u64 {
            return Err(CliError::Usage(format!(
                "--dump-sample {index} out of range (samples: {})",
                prepared.samples
            )));
        }
        if index != 0 {
            dump_sample(&mut prepared, &bundle, index)?;
        }
    }

    println!(
        "simulate: {} samples, seed {}",
        prepared.samples, prepared.master_seed
    );
    println!(
        "  owner profit      {:>16.2} ± {:.2}",
        stats.owner_profit.mean, stats.owner_profit.ci95_half
    );
    println!(
        "  contractor profit {:>16.2} ± {:.2}",
        stats.contractor_profit.mean, stats.contractor_profit.ci95_half
    );
    println!(
        "  farm availability {:>16.6}",
        stats.farm_availability.mean
    );
    println!(
        "  energy availability {:>14.6}",
        stats.energy_availability.mean
    );
    finish(prepared)
}

/// Parse `name=start:stop:step` into an axis with inclusive, evenly spaced
/// values.
fn parse_axis(text: &str) -> Result<SweepAxis, String> {
    let (name, range) = text
        .split_once('=')
        .ok_or_else(|| format!("axis `{text}` is not name=start:stop:step"))?;
    let name = AxisName::parse(name)
        .ok_or_else(|| format!("unknown axis `{name}` (expected q, r_us, r_ld or lambda)"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("axis range `{range}` is not start:stop:step"));
    }
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number"))
    };
    let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if !step.is_finite() || step <= 0.0 {
        return Err(format!("axis step must be positive, got {step}"));
    }
    if stop < start {
        return Err(format!("axis stop {stop} below start {start}"));
    }
    let count = ((stop - start) / step + 1.0 + 1e-9).floor() as usize;
    if count > 10_000 {
        return Err(format!("axis would have {count} values; cap is 10000"));
    }
    let values: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
    Ok(SweepAxis { name, values })
}

const PLOT_METRICS: [&str; 7] = [
    "owner_profit",
    "contractor_profit",
    "total_profit",
    "owner_profit_scaled",
    "contractor_profit_scaled",
    "farm_availability",
    "energy_availability",
];

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut prepared = prepare(&args.common, "sweep")?;
    let mut axes = Vec::new();
    for text in &args.axes {
        axes.push(parse_axis(text).map_err(CliError::Usage)?);
    }
    let bundle = prepared.bundle.clone();
    let result = sweep(&bundle, &axes, prepared.samples, prepared.master_seed);

    let mut csv = Vec::new();
    write_sweep_csv(&result, &mut csv)?;
    emit(&mut prepared, "sweep.csv", &csv)?;

    if !result.argmax.is_empty() {
        let mut csv = Vec::new();
        write_argmax_csv(&result.argmax, &mut csv)?;
        emit(&mut prepared, "argmax.csv", &csv)?;
    }

    for metric in PLOT_METRICS {
        let mut csv = Vec::new();
        write_plot_csv(&result, metric, &mut csv)?;
        emit(&mut prepared, &format!("plot_{metric}.csv"), &csv)?;
    }

    println!(
        "sweep: {} cells over {} axes, {} samples each",
        result.cells.len(),
        result.axes.len(),
        prepared.samples
    );
    if result.scaling_degenerate {
        eprintln!("warning: profit scaling grid is degenerate; scaled profits are all zero");
    }
    finish(prepared)
}

fn parse_bounds(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let err = || CliError::Usage(format!("{what} bounds `{text}` are not lo:hi"));
    let (lo, hi) = text.split_once(':').ok_or_else(err)?;
    let lo: f64 = lo.parse().map_err(|_| err())?;
    let hi: f64 = hi.parse().map_err(|_| err())?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Usage(format!(
            "{what} bounds must satisfy lo <= hi, got {lo}:{hi}"
        )));
    }
    Ok((lo, hi))
}

fn cmd_optimize(args: OptimizeArgs) -> Result<(), CliError> {
    let mut prepared = prepare(&args.common, "optimize")?;
    let (q_lo, q_hi) = parse_bounds(&args.bound_q, "crew")?;
    if q_lo < 1.0 || q_lo.fract() != 0.0 || q_hi.fract() != 0.0 {
        return Err(CliError::Usage(format!(
            "crew bounds must be positive integers, got {}",
            args.bound_q
        )));
    }
    let params = OptimizeParams {
        ga: GaParams {
            population: args.population,
            max_generations: args.generations,
            stall_generations: args.stall,
            ..GaParams::default()
        },
        bounds: ContractBounds {
            threshold_us: parse_bounds(&args.bound_r_us, "upside threshold")?,
            threshold_ld: parse_bounds(&args.bound_r_ld, "damages threshold")?,
            cap_fraction: parse_bounds(&args.bound_lambda, "cap fraction")?,
            technicians: (q_lo as u32, q_hi as u32),
        },
        search_samples: args.search_samples,
        final_samples: args.final_samples.unwrap_or(prepared.samples),
    };
    if params.ga.population < 4 {
        return Err(CliError::Usage(
            "--ga-population must be at least 4".to_string(),
        ));
    }

    let result = optimize(&prepared.bundle.clone(), &params, prepared.master_seed);

    let mut csv = Vec::new();
    write_pareto_csv(&result, &mut csv)?;
    emit(&mut prepared, "pareto.csv", &csv)?;
    let mut csv = Vec::new();
    write_convergence_csv(&result.convergence, &mut csv)?;
    emit(&mut prepared, "convergence.csv", &csv)?;
    let mut json = Vec::new();
    write_optimize_json(&result, &mut json)?;
    emit(&mut prepared, "optimize.json", &json)?;

    println!(
        "optimize: {} generations{}, front of {}",
        result.generations,
        if result.stalled { " (stalled)" } else { "" },
        result.solutions.len()
    );
    if let Some(best) = result.solutions.get(result.compromise) {
        println!(
            "  compromise: r_us {:.4} r_ld {:.4} lambda {:.4} crew {} \
             (conflict {:.4e}, total profit {:.2})",
            best.threshold_us,
            best.threshold_ld,
            best.cap_fraction,
            best.technicians,
            best.conflict,
            best.total_profit
        );
    }
    finish(prepared)
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let manifest_path = args.dir.join("manifest.json");
    let raw = fs::read_to_string(&manifest_path).map_err(|e| {
        CliError::Usage(format!("cannot read {}: {e}", manifest_path.display()))
    })?;
    let manifest: RunManifest =
        serde_json::from_str(&raw).map_err(|e| CliError::Usage(format!("bad manifest: {e}")))?;

    println!("command:      {}", manifest.command);
    println!("config:       {}", manifest.config_path);
    println!("config sha256: {}", manifest.config_sha256);
    println!("master seed:  {}", manifest.master_seed);
    println!("samples:      {}", manifest.samples);
    println!("tool version: {}", manifest.tool_version);
    println!("outputs:");
    for name in &manifest.outputs {
        println!("  {name}");
    }

    let stats_path = args.dir.join("stats.json");
    if stats_path.is_file() {
        let stats: crate::simulator::ScenarioStats =
            serde_json::from_str(&fs::read_to_string(&stats_path)?)
                .map_err(|e| CliError::Runtime(format!("bad stats.json: {e}")))?;
        println!();
        println!("scenario statistics ({} samples):", stats.samples);
        let row = |label: &str, m: &crate::simulator::MetricStats| {
            println!("  {label:<22} {:>16.2} ± {:.2}", m.mean, m.ci95_half);
        };
        row("owner profit", &stats.owner_profit);
        row("contractor profit", &stats.contractor_profit);
        row("total profit", &stats.total_profit);
        println!(
            "  {:<22} {:>16.6}",
            "farm availability", stats.farm_availability.mean
        );
        println!(
            "  {:<22} {:>16.6}",
            "energy availability", stats.energy_availability.mean
        );
        println!(
            "  {:<22} {:>16.6}",
            "generation (MWh)", stats.generation_mwh.mean
        );
        let moe = |m: &crate::simulator::MetricStats| {
            100.0 * m.ci95_half / m.mean.abs().max(f64::MIN_POSITIVE)
        };
        println!(
            "  margin of error: contractor profit {:.2}%, generation {:.2}%",
            moe(&stats.contractor_profit),
            moe(&stats.generation_mwh)
        );
    }

    let pareto_path = args.dir.join("pareto.csv");
    if pareto_path.is_file() {
        println!();
        println!("pareto front:");
        for (i, line) in fs::read_to_string(&pareto_path)?.lines().enumerate() {
            let marker = if i > 0 && line.ends_with(",1") {
                "  * "
            } else {
                "    "
            };
            println!("{marker}{line}");
        }
    }

    let sweep_path = args.dir.join("sweep.csv");
    if sweep_path.is_file() {
        let text = fs::read_to_string(&sweep_path)?;
        let rows: Vec<&str> = text.lines().skip(1).collect();
        println!();
        println!("sweep: {} grid cells (sweep.csv)", rows.len());
        // Margin-of-error and conflict table, one row per cell.
        println!(
            "  {:>4} {:>8} {:>8} {:>8} {:>18} {:>10} {:>10} {:>10}",
            "q", "r_us", "r_ld", "lambda", "contractor", "moe%", "gen moe%", "conflict"
        );
        for row in &rows {
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() < 16 {
                continue;
            }
            let get = |i: usize| fields[i].parse::<f64>().unwrap_or(f64::NAN);
            let moe = |mean: f64, ci: f64| 100.0 * ci / mean.abs().max(f64::MIN_POSITIVE);
            println!(
                "  {:>4} {:>8} {:>8} {:>8} {:>18.2} {:>10.2} {:>10.2} {:>10.6}",
                fields[0],
                fields[1],
                fields[2],
                fields[3],
                get(6),
                moe(get(6), get(7)),
                moe(get(12), get(13)),
                (get(14) - get(15)).abs()
            );
        }
        let argmax_path = args.dir.join("argmax.csv");
        if argmax_path.is_file() {
            println!("crew argmax per term combination:");
            for line in fs::read_to_string(&argmax_path)?.lines() {
                println!("    {line}");
            }
        }
    }
    Ok(())
}
