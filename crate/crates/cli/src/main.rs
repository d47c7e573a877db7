//! `sib` — relevance-complexity regions of the multi-stage information
//! bottleneck on the command line.
//!
//! Subcommands evaluate the closed-form binary region, trace symmetric-rate
//! tradeoff curves with threshold annotations, run the Blahut-Arimoto type
//! solver on a source file, and emit classification-error bound curves. All
//! file output is plot-ready CSV, deterministic given the flags and seed.
//!
//! Exit codes: 0 success, 2 usage error, 3 input-data error, 4 numerical
//! failure.

mod source_file;

use clap::{Parser, Subcommand, ValueEnum};
use sib_core::analytic::{
    binary_max_relevance, binary_symmetric_tradeoff, gaussian_symmetric_tradeoff, BinaryModel,
    GaussianModel, TradeoffCurve,
};
use sib_core::ba::{ba_run, beta_sweep, BaConfig, BaResult, UpdateRule};
use sib_core::bounds::binary_error_curve;
use sib_core::error::Error as CoreError;
use sib_core::prob::JointPmf;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const USAGE_EXIT: i32 = 2;
const DATA_EXIT: i32 = 3;
const NUMERIC_EXIT: i32 = 4;

/// Environment variable naming the directory relative output paths resolve
/// against.
const OUT_DIR_ENV: &str = "SIB_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "sib",
    version,
    about = "Relevance-complexity regions of the multi-stage information bottleneck"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Binary,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum UpdateRuleArg {
    /// Lagrangian stationarity exponent (default).
    Stationary,
    /// Exponent with per-stage companion-conditional scaling.
    CompanionScaled,
}

impl From<UpdateRuleArg> for UpdateRule {
    fn from(arg: UpdateRuleArg) -> Self {
        match arg {
            UpdateRuleArg::Stationary => UpdateRule::Stationary,
            UpdateRuleArg::CompanionScaled => UpdateRule::CompanionScaled,
        }
    }
}

/// `stage=relevance` pair for pinning one stage of a tradeoff curve.
#[derive(Clone, Copy, Debug)]
struct FixSpec {
    stage: usize,
    delta: f64,
}

fn parse_fix(s: &str) -> Result<FixSpec, String> {
    let (stage, delta) = s
        .split_once('=')
        .ok_or_else(|| format!("expected stage=relevance, got '{s}'"))?;
    let stage: usize = stage
        .trim()
        .parse()
        .map_err(|_| format!("'{stage}' is not a stage index"))?;
    let delta: f64 = delta
        .trim()
        .parse()
        .map_err(|_| format!("'{delta}' is not a relevance value"))?;
    Ok(FixSpec { stage, delta })
}

/// Rate grid: either `lo:hi:count` or a comma-separated list.
fn parse_rate_grid(s: &str) -> Result<Vec<f64>, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:count, got '{s}'"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| format!("bad lower bound '{}'", parts[0]))?;
        let hi: f64 = parts[1].parse().map_err(|_| format!("bad upper bound '{}'", parts[1]))?;
        let count: usize = parts[2].parse().map_err(|_| format!("bad count '{}'", parts[2]))?;
        if count == 0 {
            return Err("count must be positive".into());
        }
        if !(hi >= lo) {
            return Err(format!("empty range {lo}:{hi}"));
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        Ok((0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect())
    } else {
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("cannot parse rate '{tok}'"))
            })
            .collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print per-stage maximal relevances of the binary model at a rate vector.
    RegionBinary {
        /// Crossover probability in [0, 0.5].
        #[arg(long)]
        p: f64,
        /// Per-stage rates in bits, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
    },
    /// Trace a symmetric-rate tradeoff curve with one stage's relevance pinned.
    Tradeoff {
        #[arg(long, value_enum)]
        model: ModelKind,
        /// Crossover probability (binary model).
        #[arg(long)]
        p: Option<f64>,
        /// Signal-to-noise ratio in dB (Gaussian model).
        #[arg(long)]
        snr_db: Option<f64>,
        /// Pinned stage, as stage=relevance (e.g. 2=0.11).
        #[arg(long, value_parser = parse_fix)]
        fix: FixSpec,
        /// Number of relevance samples for the swept stage.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Blahut-Arimoto type solver on a source file.
    Ba {
        /// Structured-text source file (x_alphabet, y_alphabet, joint).
        #[arg(long)]
        source: PathBuf,
        /// Per-stage multipliers, comma separated; the count sets the stages.
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<f64>,
        /// Per-stage description alphabet sizes (default: |Y| per stage).
        #[arg(long, value_delimiter = ',')]
        u_sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value = "stationary")]
        update_rule: UpdateRuleArg,
        /// Exit nonzero when the solver did not converge.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the solver once per multiplier vector listed in a grid file.
    BaSweep {
        #[arg(long)]
        source: PathBuf,
        /// Text file with one comma-separated multiplier vector per line.
        #[arg(long)]
        beta_grid: PathBuf,
        #[arg(long, value_delimiter = ',')]
        u_sizes: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value = "stationary")]
        update_rule: UpdateRuleArg,
        /// Exit nonzero when any entry failed or did not converge.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit classification-error bound curves for the binary model.
    ClassifyBound {
        /// Crossover probabilities, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3])]
        p_list: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        /// Symmetric per-stage rates: lo:hi:count or a comma list.
        #[arg(long, value_parser = parse_rate_grid, default_value = "0:2:50")]
        rate_grid: std::vec::Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::OutOfRange(_) | CoreError::DimensionMismatch(_) => USAGE_EXIT,
            CoreError::InvalidDistribution(_) | CoreError::Infeasible(_) => DATA_EXIT,
            CoreError::NumericalFailure { .. } | CoreError::TooLarge(_) => NUMERIC_EXIT,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(DATA_EXIT, e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::RegionBinary { p, rates } => region_binary(p, &rates),
        Command::Tradeoff {
            model,
            p,
            snr_db,
            fix,
            grid,
            out,
        } => tradeoff(model, p, snr_db, fix, grid, out.as_deref()),
        Command::Ba {
            source,
            betas,
            u_sizes,
            seed,
            restarts,
            max_iters,
            tol,
            update_rule,
            strict,
            out,
        } => {
            let joint = load_source(&source)?;
            let config = build_config(
                betas,
                u_sizes,
                &joint,
                seed,
                restarts,
                max_iters,
                tol,
                update_rule,
            )?;
            run_ba(&joint, &config, strict, out.as_deref())
        }
        Command::BaSweep {
            source,
            beta_grid,
            u_sizes,
            seed,
            restarts,
            max_iters,
            tol,
            update_rule,
            strict,
            out,
        } => {
            let joint = load_source(&source)?;
            let grid = load_beta_grid(&beta_grid)?;
            let stage_count = grid.first().map(|b| b.len()).unwrap_or(1);
            let config = build_config(
                vec![0.0; stage_count],
                u_sizes,
                &joint,
                seed,
                restarts,
                max_iters,
                tol,
                update_rule,
            )?;
            run_ba_sweep(&joint, &grid, &config, strict, out.as_deref())
        }
        Command::ClassifyBound {
            p_list,
            stages,
            rate_grid,
            out,
        } => classify_bound(&p_list, stages, &rate_grid, out.as_deref()),
    }
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

/// Nine significant digits, scientific.
fn fmt9(v: f64) -> String {
    format!("{:.8e}", v)
}

fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let path = resolve_out(path);
            std::fs::write(&path, contents)
                .map_err(|e| CliError::new(DATA_EXIT, format!("{}: {e}", path.display())))?;
        }
        None => print!("{contents}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn region_binary(p: f64, rates: &[f64]) -> Result<(), CliError> {
    let model = BinaryModel::new(p, rates.len()).map_err(CliError::from)?;
    let deltas = binary_max_relevance(&model, rates).map_err(CliError::from)?;
    for (t, d) in deltas.iter().enumerate() {
        println!("stage {}: Delta_max = {:.6}", t + 1, d);
    }
    Ok(())
}

fn tradeoff(
    model: ModelKind,
    p: Option<f64>,
    snr_db: Option<f64>,
    fix: FixSpec,
    grid: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (curve, fixed_delta) = match model {
        ModelKind::Binary => {
            let p = p.ok_or_else(|| CliError::new(USAGE_EXIT, "--model binary requires --p"))?;
            if snr_db.is_some() {
                return Err(CliError::new(USAGE_EXIT, "--snr-db is a Gaussian-model flag"));
            }
            let model = BinaryModel::new(p, 2).map_err(CliError::from)?;
            let samples = sib_core::analytic::uniform_grid(model.max_relevance(), grid, true);
            let curve = binary_symmetric_tradeoff(&model, (fix.stage, fix.delta), &samples)
                .map_err(CliError::from)?;
            (curve, fix.delta)
        }
        ModelKind::Gaussian => {
            let db = snr_db
                .ok_or_else(|| CliError::new(USAGE_EXIT, "--model gaussian requires --snr-db"))?;
            if p.is_some() {
                return Err(CliError::new(USAGE_EXIT, "--p is a binary-model flag"));
            }
            let snr = 10f64.powf(db / 10.0);
            let model = GaussianModel::from_snr(snr, 2).map_err(CliError::from)?;
            let samples = sib_core::analytic::uniform_grid(model.max_relevance(), grid, false);
            let curve = gaussian_symmetric_tradeoff(&model, (fix.stage, fix.delta), &samples)
                .map_err(CliError::from)?;
            (curve, fix.delta)
        }
    };
    emit(out, &tradeoff_csv(&curve, fix.stage, fixed_delta))
}

fn tradeoff_csv(curve: &TradeoffCurve, fixed_stage: usize, fixed_delta: f64) -> String {
    let mut text = String::from("rate,delta1,delta2\n");
    for &(rate, delta) in &curve.samples {
        let (d1, d2) = if fixed_stage == 2 {
            (delta, fixed_delta)
        } else {
            (fixed_delta, delta)
        };
        let _ = writeln!(text, "{},{},{}", fmt9(rate), fmt9(d1), fmt9(d2));
    }
    if let Some(th) = &curve.threshold {
        let _ = writeln!(text, "# threshold: Delta={}, R={}", fmt9(th.relevance), fmt9(th.rate));
    }
    text
}

fn load_source(path: &Path) -> Result<JointPmf, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(DATA_EXIT, format!("{}: {e}", path.display())))?;
    let parsed = source_file::parse_source(&text)
        .map_err(|e| CliError::new(DATA_EXIT, format!("{}: {e}", path.display())))?;
    Ok(parsed.joint)
}

fn load_beta_grid(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(DATA_EXIT, format!("{}: {e}", path.display())))?;
    let mut grid = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut betas = Vec::new();
        for tok in line.split(',') {
            let v: f64 = tok.trim().parse().map_err(|_| {
                CliError::new(
                    DATA_EXIT,
                    format!("{}: line {}: cannot parse '{tok}'", path.display(), idx + 1),
                )
            })?;
            betas.push(v);
        }
        if let Some(first) = grid.first() {
            let expect: &Vec<f64> = first;
            if betas.len() != expect.len() {
                return Err(CliError::new(
                    DATA_EXIT,
                    format!(
                        "{}: line {}: expected {} multipliers, found {}",
                        path.display(),
                        idx + 1,
                        expect.len(),
                        betas.len()
                    ),
                ));
            }
        }
        grid.push(betas);
    }
    if grid.is_empty() {
        return Err(CliError::new(
            DATA_EXIT,
            format!("{}: no multiplier vectors found", path.display()),
        ));
    }
    Ok(grid)
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    betas: Vec<f64>,
    u_sizes: Option<Vec<usize>>,
    source: &JointPmf,
    seed: u64,
    restarts: usize,
    max_iters: usize,
    tol: f64,
    update_rule: UpdateRuleArg,
) -> Result<BaConfig, CliError> {
    let mut config = match u_sizes {
        Some(sizes) => BaConfig::new(betas, sizes),
        None => BaConfig::for_source(betas, source),
    }
    .map_err(CliError::from)?;
    config.seed = seed;
    config.restarts = restarts;
    config.max_iters = max_iters;
    config.tol = tol;
    config.update_rule = update_rule.into();
    Ok(config)
}

const BA_HEADER: &str = "stage,rate,relevance,relevance_cumulative,objective,converged,iterations\n";

fn ba_rows(text: &mut String, result: &BaResult) {
    let point = &result.region_point;
    for t in 0..point.stages() {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            t + 1,
            fmt9(point.rates[t]),
            fmt9(point.relevances[t]),
            fmt9(result.relevances_joint[t]),
            fmt9(result.objective),
            result.converged,
            result.iterations
        );
    }
}

fn run_ba(
    source: &JointPmf,
    config: &BaConfig,
    strict: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let result = ba_run(source, config).map_err(CliError::from)?;
    let mut text = String::from(BA_HEADER);
    ba_rows(&mut text, &result);
    emit(out, &text)?;
    if strict && !result.converged {
        return Err(CliError::new(
            NUMERIC_EXIT,
            format!("solver did not converge within {} iterations", config.max_iters),
        ));
    }
    Ok(())
}

fn run_ba_sweep(
    source: &JointPmf,
    grid: &[Vec<f64>],
    config: &BaConfig,
    strict: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let results = beta_sweep(source, grid, config);
    let mut text = String::from(
        "grid_index,stage,beta,rate,relevance,relevance_cumulative,objective,converged,iterations\n",
    );
    let mut troubled = false;
    for (i, (betas, result)) in grid.iter().zip(&results).enumerate() {
        match result {
            Ok(r) => {
                let point = &r.region_point;
                troubled |= !r.converged;
                for t in 0..point.stages() {
                    let _ = writeln!(
                        text,
                        "{},{},{},{},{},{},{},{},{}",
                        i,
                        t + 1,
                        fmt9(betas[t]),
                        fmt9(point.rates[t]),
                        fmt9(point.relevances[t]),
                        fmt9(r.relevances_joint[t]),
                        fmt9(r.objective),
                        r.converged,
                        r.iterations
                    );
                }
            }
            Err(e) => {
                troubled = true;
                let _ = writeln!(text, "# entry {i} failed: {e}");
            }
        }
    }
    emit(out, &text)?;
    if strict && troubled {
        return Err(CliError::new(
            NUMERIC_EXIT,
            "one or more sweep entries failed or did not converge",
        ));
    }
    Ok(())
}

fn classify_bound(
    p_list: &[f64],
    stages: usize,
    rate_grid: &[f64],
    out: Option<&Path>,
) -> Result<(), CliError> {
    if p_list.is_empty() {
        return Err(CliError::new(USAGE_EXIT, "--p-list must not be empty"));
    }
    let mut per_p = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let curves = binary_error_curve(p, stages, rate_grid).map_err(CliError::from)?;
        per_p.push(curves);
    }
    let mut text = String::from("sum_rate,p,stage,error_bound\n");
    // Grids arrive sorted from the curve builder; walk rates outermost so the
    // first column is sorted.
    let sample_count = per_p[0][0].samples.len();
    for k in 0..sample_count {
        for (pi, &p) in p_list.iter().enumerate() {
            for curve in &per_p[pi] {
                let (sum_rate, bound) = curve.samples[k];
                let _ = writeln!(
                    text,
                    "{},{},{},{}",
                    fmt9(sum_rate),
                    fmt9(p),
                    curve.stage,
                    fmt9(bound)
                );
            }
        }
    }
    emit(out, &text)
}
