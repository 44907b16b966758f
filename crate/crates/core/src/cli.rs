//! Command-line front end.
//!
//! Every command reads a JSON config (see [`crate::config`]) and writes its
//! files into an output directory: `--out`, else the config's `output`, else
//! `./out`. Exit status is 0 on success, 1 for configuration problems
//! (unreadable or invalid config, invalid instance, failed validation) and
//! 2 for failures while running or writing results.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::cif_ucb::{self, CifUcb, CifUcbOptions, ConfidenceWidth};
use crate::config::{ConfigDocument, InstanceSpec};
use crate::environment::{AssumptionReport, CHECK_GRID};
use crate::error::Error;
use crate::harness::{self, FpmabPolicy};
use crate::instances::check_gamma_condition;
use crate::output::{write_json, CsvBuilder, Field};
use crate::rng;

/// Grid used for the pairwise filter-decay check.
pub const GAMMA_CHECK_GRID: usize = 201;
/// Grid used for the lower-bound CIF monotonicity check.
pub const MONOTONE_CHECK_GRID: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "fppb", version, about = "Filtered Poisson process bandit simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one sample path and write the per-round trajectory.
    Simulate(CommonArgs),
    /// Run replications and write the averaged regret curve and a summary.
    Experiment(CommonArgs),
    /// Run one sample path and write the final cell table.
    Cells(CommonArgs),
    /// Check model assumptions and lower-bound conditions.
    Validate(CommonArgs),
    /// Run a K-armed filtered Poisson bandit.
    Fpmab(FpmabArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FpmabArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub policy: Option<FpmabPolicy>,
}

#[derive(Debug)]
pub enum CliError {
    Config(Error),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) | CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(e: Error) -> CliError {
    CliError::Config(e)
}

fn runtime_err(e: Error) -> CliError {
    CliError::Runtime(e)
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command; returns the files written.
pub fn run(cli: Cli) -> CliResult<Vec<PathBuf>> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Experiment(a) => cmd_experiment(&a),
        Command::Cells(a) => cmd_cells(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::Fpmab(a) => cmd_fpmab(&a),
    }
}

fn load(args: &CommonArgs) -> CliResult<ConfigDocument> {
    let mut doc = ConfigDocument::load(&args.config).map_err(config_err)?;
    if let Some(seed) = args.seed {
        doc.seed = seed;
    }
    if let Some(reps) = args.reps {
        if reps == 0 {
            return Err(config_err(Error::Config("--reps must be >= 1".into())));
        }
        doc.replications = reps;
    }
    if let Some(h) = args.horizon {
        if h == 0 {
            return Err(config_err(Error::Config("--horizon must be >= 1".into())));
        }
        doc.horizon = h;
    }
    if let Some(out) = &args.out {
        doc.output = Some(out.clone());
    }
    Ok(doc)
}

fn out_dir(doc: &ConfigDocument) -> PathBuf {
    doc.output.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn algorithm_options(doc: &ConfigDocument) -> CifUcbOptions {
    CifUcbOptions {
        confidence_scale: doc.confidence_scale(),
        share_left_sweeps: doc.share_left_sweeps,
        ..CifUcbOptions::default()
    }
}

/// One sample path on stream 0 of the configured seed.
fn single_run(doc: &ConfigDocument) -> CliResult<(cif_ucb::Trajectory, CifUcb)> {
    let instance = doc.fppb_instance().map_err(config_err)?;
    let mut state = CifUcb::with_options(&instance, algorithm_options(doc));
    let traj = cif_ucb::run_state(&instance, &mut state, &mut rng::stream(doc.seed, 0)).map_err(runtime_err)?;
    Ok((traj, state))
}

pub fn cmd_simulate(args: &CommonArgs) -> CliResult<Vec<PathBuf>> {
    let doc = load(args)?;
    let (traj, _) = single_run(&doc)?;
    let mut csv = CsvBuilder::new(&["t", "a_t", "b_t", "reward", "instant_regret", "cum_regret"]);
    let mut cum = 0.0;
    for r in &traj.rows {
        cum += r.regret;
        csv.row(vec![r.round.into(), r.a.into(), r.b.into(), r.reward.into(), r.regret.into(), cum.into()]);
    }
    let path = out_dir(&doc).join("trajectory.csv");
    csv.write(&path).map_err(runtime_err)?;
    Ok(vec![path])
}

#[derive(Debug, Serialize)]
struct BaselineSummary {
    cells: usize,
    terminal_regret_mean: f64,
    terminal_regret_se: f64,
}

#[derive(Debug, Serialize)]
struct ExperimentSummary {
    z_star: f64,
    optimum_value: f64,
    horizon: usize,
    replications: usize,
    seed: u64,
    confidence_scale: f64,
    share_left_sweeps: bool,
    terminal_regret_mean: f64,
    terminal_regret_se: f64,
    loglog_slope: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineSummary>,
}

pub fn cmd_experiment(args: &CommonArgs) -> CliResult<Vec<PathBuf>> {
    let doc = load(args)?;
    let cfg = doc.experiment().map_err(config_err)?;
    let out = harness::run_replications(&cfg).map_err(runtime_err)?;
    let baseline = match doc.baseline_grid {
        Some(k) => {
            let b = harness::baseline_fixed_grid(&cfg, k).map_err(runtime_err)?;
            Some(BaselineSummary {
                cells: k,
                terminal_regret_mean: b.curve.terminal_mean(),
                terminal_regret_se: b.curve.terminal_se(),
            })
        }
        None => None,
    };

    let mut header = vec!["t", "avg_cum_regret"];
    if cfg.reference_constant.is_some() {
        header.push("reference");
    }
    let mut csv = CsvBuilder::new(&header);
    for (i, v) in out.curve.average.iter().enumerate() {
        let t = i + 1;
        let mut row: Vec<Field> = vec![t.into(), (*v).into()];
        if let Some(c) = cfg.reference_constant {
            row.push(harness::reference_value(t as f64, c).into());
        }
        csv.row(row);
    }
    let summary = ExperimentSummary {
        z_star: out.optimum.0,
        optimum_value: out.optimum.1,
        horizon: cfg.instance.horizon,
        replications: cfg.replications,
        seed: cfg.seed,
        confidence_scale: cfg.confidence_scale,
        share_left_sweeps: cfg.share_left_sweeps,
        terminal_regret_mean: out.curve.terminal_mean(),
        terminal_regret_se: out.curve.terminal_se(),
        loglog_slope: out.curve.loglog_slope(),
        baseline,
    };
    let dir = out_dir(&doc);
    let (curve_path, summary_path) = (dir.join("curve.csv"), dir.join("summary.json"));
    csv.write(&curve_path).map_err(runtime_err)?;
    write_json(&summary_path, &summary).map_err(runtime_err)?;
    Ok(vec![curve_path, summary_path])
}

pub fn cmd_cells(args: &CommonArgs) -> CliResult<Vec<PathBuf>> {
    let doc = load(args)?;
    let (_, state) = single_run(&doc)?;
    let mut csv = CsvBuilder::new(&["x", "y", "effective_samples", "index", "lambda_hat"]);
    for r in harness::dump_cell_table(&state) {
        csv.row(vec![r.x.into(), r.y.into(), r.effective_samples.into(), r.index.into(), r.lambda_hat.into()]);
    }
    let path = out_dir(&doc).join("cells.csv");
    csv.write(&path).map_err(runtime_err)?;
    Ok(vec![path])
}

fn check(name: &str, passed: bool, detail: serde_json::Value) -> serde_json::Value {
    json!({ "name": name, "passed": passed, "detail": detail })
}

fn assumption_checks(doc: &ConfigDocument) -> CliResult<Vec<serde_json::Value>> {
    let (intensity, filter) = doc.process_models().map_err(config_err)?;
    let need = |v: Option<f64>, key: &str| {
        v.ok_or_else(|| config_err(Error::Config(format!("\"{key}\" is required to validate this instance"))))
    };
    need(doc.m, "m")?;
    let m = doc.algorithm_m().map_err(config_err)?;
    let lambda_max = need(doc.lambda_max, "lambda_max")?;
    let r = AssumptionReport::check(&intensity, &filter, m, lambda_max);
    Ok(vec![
        check(
            "lipschitz",
            r.lipschitz_ok,
            json!({ "estimate": r.lipschitz_estimate, "declared_m": m, "grid": CHECK_GRID }),
        ),
        check("rate_bound", r.rate_bound_ok, json!({ "max_rate": r.max_rate, "declared_lambda_max": lambda_max })),
    ])
}

pub fn cmd_validate(args: &CommonArgs) -> CliResult<Vec<PathBuf>> {
    let doc = load(args)?;
    let mut checks = Vec::new();
    let kind = match &doc.instance {
        InstanceSpec::Process { .. } => {
            checks.extend(assumption_checks(&doc)?);
            "process"
        }
        InstanceSpec::ContinuumLb { filter, .. } => {
            let g = check_gamma_condition(filter, GAMMA_CHECK_GRID);
            checks.push(check(
                "gamma_lower_bound_condition",
                g.passed,
                json!({ "min_slack": g.min_slack, "worst_pair": [g.worst_pair.0, g.worst_pair.1], "grid": GAMMA_CHECK_GRID }),
            ));
            let lb = doc.continuum_lb().map_err(config_err)?.expect("continuum kind");
            let monotone = lb.cif_nondecreasing(MONOTONE_CHECK_GRID);
            checks.push(check(
                "cif_nondecreasing",
                matches!(monotone, Ok(true)),
                json!({ "grid": MONOTONE_CHECK_GRID, "error": monotone.err().map(|e| e.to_string()) }),
            ));
            if g.passed && checks.iter().all(|c| c["passed"] == true) {
                checks.extend(assumption_checks(&doc)?);
            }
            "continuum_lb"
        }
        InstanceSpec::FpmabLb { .. } => {
            let lb = doc.fpmab_lb().expect("fpmab_lb kind");
            let violation = lb.condition_violation();
            checks.push(check(
                "filter_ratio_condition",
                violation.is_none(),
                json!({ "violating_arm": violation, "epsilon": lb.epsilon }),
            ));
            let built = doc.fpmab_instance();
            checks.push(check("instance", built.is_ok(), json!({ "error": built.err().map(|e| e.to_string()) })));
            "fpmab_lb"
        }
        InstanceSpec::Fpmab { .. } => {
            let built = doc.fpmab_instance();
            checks.push(check("instance", built.is_ok(), json!({ "error": built.err().map(|e| e.to_string()) })));
            "fpmab"
        }
    };
    let passed = checks.iter().all(|c| c["passed"] == true);
    let report = json!({ "kind": kind, "passed": passed, "checks": checks });
    let path = out_dir(&doc).join("validation.json");
    write_json(&path, &report).map_err(runtime_err)?;
    for c in &checks {
        eprintln!("{}: {}", c["name"].as_str().unwrap_or("?"), if c["passed"] == true { "ok" } else { "FAILED" });
    }
    if passed {
        Ok(vec![path])
    } else {
        Err(config_err(Error::Config(format!("validation failed; report in {}", path.display()))))
    }
}

pub fn cmd_fpmab(args: &FpmabArgs) -> CliResult<Vec<PathBuf>> {
    let doc = load(&args.common)?;
    let instance = doc.fpmab_instance().map_err(config_err)?;
    let policy = args.policy.or(doc.policy).unwrap_or(FpmabPolicy::Uniform);
    let width = ConfidenceWidth::new(doc.lambda_max.unwrap_or(1.0), doc.horizon as f64).with_scale(doc.confidence_scale());
    let rows = harness::run_fpmab(&instance, policy, doc.horizon, &width, &mut rng::stream(doc.seed, 0))
        .map_err(runtime_err)?;

    let k = instance.arms();
    let mut header: Vec<String> = ["t", "arm", "reward", "instant_regret", "cum_regret"].map(String::from).to_vec();
    header.extend((1..=k).map(|j| format!("r_{j}")));
    let mut csv = CsvBuilder::new(&header);
    let mut cum = 0.0;
    for r in &rows {
        cum += r.regret;
        let mut fields: Vec<Field> = vec![r.round.into(), r.arm.into(), r.reward.into(), r.regret.into(), cum.into()];
        fields.extend((0..k).map(|j| r.per_arm.get(j).map_or(Field::Empty, |&c| c.into())));
        csv.row(fields);
    }
    let path = out_dir(&doc).join("fpmab.csv");
    csv.write(&path).map_err(runtime_err)?;
    Ok(vec![path])
}
