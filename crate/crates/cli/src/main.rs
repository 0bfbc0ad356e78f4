//! `pomdp-smpc` command-line tool.
//!
//! Exit codes: 0 success, 1 input error (I/O, syntax, bad flags or
//! beliefs), 2 model validation failure, 3 resource or runtime failure.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use pomdp_smpc::controller::{simplex_grid, SolvedController};
use pomdp_smpc::fmt::g17;
use pomdp_smpc::io::{self, ParseError};
use pomdp_smpc::model::validate_model;
use pomdp_smpc::sim::{self, BatchStats, InitialState, RolloutSpec};
use pomdp_smpc::solver::{self, evaluate};
use pomdp_smpc::{Belief, BoundParams, ControllerKind, Error, PomdpModel, PruneMode, SolveConfig};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidModel(_) => CliError::Invalid(e.to_string()),
            Error::ResourceLimit { .. } => CliError::Runtime(format!(
                "{e}; lower the horizon, raise --vector-cap, or use a smaller model"
            )),
            Error::LpFailure { .. } | Error::ZeroLikelihood { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::Stochasticity { .. } | ParseError::InvalidModel(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "pomdp-smpc", version, about = "Dual-optimal stochastic MPC on finite POMDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a .pomdp file.
    Validate { path: PathBuf },
    /// Solve the finite-horizon problem and write the policy file.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Policy file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Query a policy file at a belief or over a simplex grid.
    Policy {
        #[arg(long)]
        policy: PathBuf,
        /// Comma-separated belief, e.g. "0.2,0.5,0.3".
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
        belief: Option<String>,
        /// Grid resolution; prints one CSV row per grid belief.
        #[arg(long)]
        grid: Option<usize>,
        /// Stage of the policy to query.
        #[arg(long, default_value_t = 0)]
        stage: usize,
    },
    /// Closed-loop simulation of one controller.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        run: RunArgs,
        /// dual | ce | ce_point_mass
        #[arg(long, default_value = "dual")]
        controller: String,
        /// Trace CSV of a single rollout.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Per-seed cost CSV of a batch.
        #[arg(long)]
        per_seed: Option<PathBuf>,
    },
    /// Dual and certainty-equivalent controllers on common seeds.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Infinite-horizon performance bound check for given gamma and eta.
    Bound {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long, default_value_t = 200)]
        rollouts: usize,
        /// Lower bound on the rollout length.
        #[arg(long, default_value_t = 1)]
        min_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model file; omit when using --builtin.
    #[arg(conflicts_with = "builtin", required_unless_present = "builtin")]
    path: Option<PathBuf>,
    /// Built-in model name.
    #[arg(long, value_parser = [io::HEALTHCARE_ID])]
    builtin: Option<String>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long, default_value_t = 6)]
    horizon: usize,
    /// Defaults to the file's discount, else 1.
    #[arg(long)]
    discount: Option<f64>,
    /// exact_lp | dominance_only
    #[arg(long, default_value = "exact_lp")]
    prune: String,
    #[arg(long)]
    vector_cap: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 30)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    rollouts: usize,
    /// Initial belief; defaults to the file's start belief, else uniform.
    #[arg(long)]
    belief: Option<String>,
}

struct Loaded {
    model: PomdpModel,
    discount: Option<f64>,
    start: Option<Belief>,
    id: String,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load(args: &ModelArgs) -> CliResult<Loaded> {
    match (&args.builtin, &args.path) {
        (Some(_), _) => Ok(Loaded {
            model: io::healthcare_model(),
            discount: None,
            start: None,
            id: io::HEALTHCARE_ID.to_string(),
        }),
        (None, Some(path)) => {
            let doc = io::parse_document(&read(path)?)?;
            Ok(Loaded {
                model: doc.model,
                discount: doc.discount,
                start: doc.start,
                id: path.display().to_string(),
            })
        }
        (None, None) => Err(CliError::Input("give a model path or --builtin".into())),
    }
}

fn config(args: &SolveArgs, loaded: &Loaded) -> CliResult<SolveConfig> {
    let mode: PruneMode = args.prune.parse()?;
    let mut cfg = SolveConfig::new(args.horizon, args.discount.or(loaded.discount).unwrap_or(1.0)).with_prune_mode(mode);
    if let Some(cap) = args.vector_cap {
        cfg.vector_cap = cap;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn initial_belief(run: &RunArgs, loaded: &Loaded) -> CliResult<Belief> {
    let belief = match &run.belief {
        Some(text) => io::parse_belief(text)?,
        None => loaded.start.clone().unwrap_or_else(|| Belief::uniform(loaded.model.n_states)),
    };
    loaded.model.check_belief(&belief)?;
    Ok(belief)
}

fn rollout_spec(run: &RunArgs, loaded: &Loaded) -> CliResult<RolloutSpec> {
    Ok(RolloutSpec {
        initial_belief: initial_belief(run, loaded)?,
        initial_state: InitialState::SampleFromBelief,
        steps: run.steps,
        model_id: loaded.id.clone(),
    })
}

fn action_names(model: &PomdpModel) -> Vec<String> {
    (0..model.n_actions).map(|a| model.action_name(a)).collect()
}

fn cmd_validate(path: &Path) -> CliResult<String> {
    let doc = io::parse_unvalidated(&read(path)?).map_err(|e| CliError::Input(e.to_string()))?;
    let report = validate_model(&doc.model);
    if report.is_ok() {
        Ok(format!(
            "ok: {} states, {} actions, {} observations\n",
            doc.model.n_states, doc.model.n_actions, doc.model.n_observations
        ))
    } else {
        emit(&report.to_string());
        Err(CliError::Invalid(format!("{} violation(s)", report.violations.len())))
    }
}

fn cmd_solve(model: &ModelArgs, solve: &SolveArgs, out: &Path) -> CliResult<String> {
    let loaded = load(model)?;
    let cfg = config(solve, &loaded)?;
    let stack = solver::solve(&loaded.model, &cfg)?;
    write(out, &io::write_policy(&stack, &action_names(&loaded.model)))?;
    Ok(format!("stage0_vectors={}\n", stack.per_stage[0].len()))
}

fn cmd_policy(policy: &Path, belief: Option<&str>, grid: Option<usize>, stage: usize) -> CliResult<String> {
    let file = io::parse_policy(&read(policy)?).map_err(|e| CliError::Input(e.to_string()))?;
    let name = |a: Option<usize>| a.map_or_else(|| "-".to_string(), |a| file.action_names[a].clone());
    match (belief, grid) {
        (Some(text), _) => {
            let b = io::parse_belief(text)?;
            let d = evaluate(&file.stack, stage, &b)?;
            Ok(format!("value={} action={}\n", d.value, name(d.action)))
        }
        (None, Some(resolution)) => {
            if resolution == 0 {
                return Err(CliError::Input("grid resolution must be >= 1".into()));
            }
            let set = file.stack.stage(stage)?;
            let n = set.vectors.first().map_or(0, |v| v.coeffs.len());
            let mut out = String::new();
            let header: Vec<String> = (0..n).map(|i| format!("belief_{i}")).collect();
            let _ = writeln!(out, "{},action", header.join(","));
            for b in simplex_grid(n, resolution) {
                let d = evaluate(&file.stack, stage, &b)?;
                let coords: Vec<String> = b.as_slice().iter().map(|&p| g17(p)).collect();
                let _ = writeln!(out, "{},{}", coords.join(","), name(d.action));
            }
            Ok(out)
        }
        (None, None) => Err(CliError::Input("give --belief or --grid".into())),
    }
}

fn cmd_simulate(
    model: &ModelArgs,
    solve: &SolveArgs,
    run: &RunArgs,
    controller: &str,
    trace: Option<&Path>,
    per_seed: Option<&Path>,
) -> CliResult<String> {
    let loaded = load(model)?;
    let cfg = config(solve, &loaded)?;
    let kind: ControllerKind = controller.parse()?;
    let spec = rollout_spec(run, &loaded)?;
    let solved = SolvedController::solve(&loaded.model, &cfg, kind)?;
    if run.rollouts == 0 {
        return Err(CliError::Input("--rollouts must be >= 1".into()));
    }
    if run.rollouts == 1 {
        let t = sim::rollout_with(&solved, &spec, run.seed)?;
        let csv = t.to_csv();
        match trace {
            Some(path) => write(path, &csv)?,
            None => emit(&csv),
        }
        return Ok(format!(
            "cost={}\ncost_no_terminal={}\n",
            t.cost_with_terminal(),
            t.cost_without_terminal()
        ));
    }
    if trace.is_some() {
        return Err(CliError::Input("--trace needs --rollouts 1; use --per-seed for batches".into()));
    }
    let stats = sim::batch_with(&solved, &spec, run.rollouts, run.seed)?;
    if let Some(path) = per_seed {
        write(path, &stats.per_seed_csv())?;
    }
    Ok(stats.report(&loaded.model))
}

fn cmd_compare(model: &ModelArgs, solve: &SolveArgs, run: &RunArgs) -> CliResult<String> {
    let loaded = load(model)?;
    let cfg = config(solve, &loaded)?;
    let spec = rollout_spec(run, &loaded)?;
    let m = &loaded.model;
    let stats = |kind: ControllerKind| -> CliResult<BatchStats> {
        let solved: Arc<SolvedController> = SolvedController::solve(m, &cfg, kind)?;
        Ok(sim::batch_with(&solved, &spec, run.rollouts, run.seed)?)
    };
    let dual = stats(ControllerKind::DualSmpc)?;
    let ce = stats(ControllerKind::CeSmpc)?;

    let mut out = String::new();
    let _ = writeln!(out, "{:<28} {:>22} {:>22}", "", "dual_smpc", "ce_smpc");
    let mut row = |label: String, a: f64, b: f64| {
        let _ = writeln!(out, "{label:<28} {a:>22} {b:>22}");
    };
    row("mean_cost".into(), dual.mean_cost, ce.mean_cost);
    row("std_cost".into(), dual.std_cost, ce.std_cost);
    row("mean_cost_no_terminal".into(), dual.mean_cost_no_terminal, ce.mean_cost_no_terminal);
    row("std_cost_no_terminal".into(), dual.std_cost_no_terminal, ce.std_cost_no_terminal);
    for s in 0..m.n_states {
        row(format!("reach_prob.{}", m.state_name(s)), dual.reach_prob[s], ce.reach_prob[s]);
    }
    for a in 0..m.n_actions {
        row(format!("action_freq.{}", m.action_name(a)), dual.action_freq[a], ce.action_freq[a]);
    }
    if run.rollouts >= 2 {
        let d: Vec<f64> = dual.per_seed.iter().map(|c| c.with_terminal).collect();
        let c: Vec<f64> = ce.per_seed.iter().map(|c| c.with_terminal).collect();
        let t = sim::paired_one_sided(&c, &d)?;
        let _ = writeln!(out, "paired_mean_diff(ce-dual)={}", t.mean_diff);
        let _ = writeln!(out, "paired_t={}", t.t_stat);
        let _ = writeln!(out, "paired_p_one_sided={:e}", t.p_value);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    model: &ModelArgs,
    solve: &SolveArgs,
    gamma: f64,
    eta: f64,
    rollouts: usize,
    min_steps: usize,
    seed: u64,
) -> CliResult<String> {
    let loaded = load(model)?;
    let cfg = config(solve, &loaded)?;
    let bound = BoundParams::new(gamma, eta)?;
    let belief = loaded.start.clone().unwrap_or_else(|| Belief::uniform(loaded.model.n_states));
    let report = sim::bound_report(&loaded.model, &cfg, bound, &belief, rollouts, min_steps, seed)?;
    Ok(report.report())
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Solve { model, solve, out } => cmd_solve(&model, &solve, &out),
        Command::Policy {
            policy,
            belief,
            grid,
            stage,
        } => cmd_policy(&policy, belief.as_deref(), grid, stage),
        Command::Simulate {
            model,
            solve,
            run,
            controller,
            trace,
            per_seed,
        } => cmd_simulate(&model, &solve, &run, &controller, trace.as_deref(), per_seed.as_deref()),
        Command::Compare { model, solve, run } => cmd_compare(&model, &solve, &run),
        Command::Bound {
            model,
            solve,
            gamma,
            eta,
            rollouts,
            min_steps,
            seed,
        } => cmd_bound(&model, &solve, gamma, eta, rollouts, min_steps, seed),
    }
}

/// Writes to standard output; a closed pipe is not an error.
fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
