use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nudge_core::dynamics::{RunStatus, SimulationState};
use nudge_core::experiments::{run_h1, run_h2, write_h1, write_h2, ExperimentConfig};
use nudge_core::interventions::{evaluate_intervention, InterventionKind, InterventionSpec};
use nudge_core::population::Population;
use nudge_core::rng::{streams, substream};
use nudge_core::shocks::{measure_resilience, ShockSpec};
use nudge_core::Error;

/// Commuter nudging simulations: converge populations, shock them, intervene,
/// and run the stability/resilience experiments.
#[derive(Parser, Debug)]
#[command(name = "nudge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Converge one population and write its trace and final state.
    Simulate(Common),
    /// Stability against resilience over many seeded populations.
    H1(Common),
    /// Plain against stability-gated connect-people intervention.
    H2(Common),
    /// Apply one shock to a saved state and score the resilience.
    Shock {
        #[command(flatten)]
        common: Common,
        /// Saved population document, taken as an equilibrium.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        shock: ShockLabel,
    },
    /// Apply one intervention to a saved state and score the impact.
    Intervene {
        #[command(flatten)]
        common: Common,
        /// Saved population document, taken as an equilibrium.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        intervention: InterventionLabel,
    },
    /// Check that a config file parses and its values are in range.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ShockLabel {
    T1,
    T2,
    R1,
    R2,
}

impl ShockLabel {
    fn as_str(self) -> &'static str {
        match self {
            ShockLabel::T1 => "T1",
            ShockLabel::T2 => "T2",
            ShockLabel::R1 => "R1",
            ShockLabel::R2 => "R2",
        }
    }

    fn default_spec(self) -> ShockSpec<f64> {
        match self {
            ShockLabel::T1 => ShockSpec::hub_attack(),
            ShockLabel::T2 => ShockSpec::defector_links(),
            ShockLabel::R1 => ShockSpec::connection_breaks(),
            ShockLabel::R2 => ShockSpec::agent_dropout(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InterventionLabel {
    Vanilla,
    Stable,
}

impl InterventionLabel {
    fn kind(self) -> InterventionKind {
        match self {
            InterventionLabel::Vanilla => InterventionKind::VanillaCpi,
            InterventionLabel::Stable => InterventionKind::StableCpi,
        }
    }
}

/// Failures the user can fix by changing the invocation or the inputs.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn load_config(common: &Common) -> Result<ExperimentConfig<f64>, Failure> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Failure::Validation(format!("cannot read config {}: {io}", path.display())),
            other => Failure::from(other),
        })?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.base_seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn load_state(path: &Path) -> Result<SimulationState<f64>, Failure> {
    let population = Population::load_json(path).map_err(|e| match e {
        Error::Io(io) => Failure::Validation(format!("cannot read state {}: {io}", path.display())),
        other => Failure::from(other),
    })?;
    let mut state = SimulationState::new(population);
    state.status = RunStatus::Converged;
    Ok(state)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Failure::Validation("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Runtime(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn write_json<S: serde::Serialize>(path: &Path, value: &S) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn simulate(common: &Common) -> Outcome {
    let config = load_config(common)?;
    let dir = &config.output_dir;
    create_dir(dir)?;
    let seed = config.base_seed;
    let population = Population::generate(&config.population, config.model.radius, seed)?;
    let mut state = SimulationState::new(population);
    let trace = state.run(&config.model, &mut substream(seed, streams::DYNAMICS));
    match common.format {
        Format::Csv => {
            let file = std::fs::File::create(dir.join("trace.csv"))
                .map_err(|e| Failure::Runtime(format!("cannot write trace: {e}")))?;
            trace.write_csv(file)?;
        }
        Format::Json => write_json(&dir.join("trace.json"), &trace)?,
    }
    state.population.save_json(dir.join("state.json"))?;
    println!(
        "seed {seed}: {} after {} epochs, {} of {} agents cycling",
        if trace.converged { "converged" } else { "stopped at the epoch cap" },
        trace.final_epoch,
        state.population.cyclist_count(),
        state.population.len()
    );
    Ok(())
}

fn h1(common: &Common) -> Outcome {
    let config = load_config(common)?;
    let report = with_threads(common.threads, || run_h1(&config))??;
    match common.format {
        Format::Csv => {
            write_h1(&report, &config.output_dir)?;
        }
        Format::Json => {
            create_dir(&config.output_dir)?;
            write_json(&config.output_dir.join("h1_report.json"), &report)?;
        }
    }
    for f in &report.fits {
        match &f.fit {
            Some(fit) => println!("{}: slope {:.4}, r² {:.3}", f.shock, fit.slope, fit.r_squared),
            None => println!("{}: no fit, all stabilities equal", f.shock),
        }
    }
    Ok(())
}

fn h2(common: &Common) -> Outcome {
    let config = load_config(common)?;
    let report = with_threads(common.threads, || run_h2(&config))??;
    match common.format {
        Format::Csv => {
            write_h2(&report, &config.output_dir)?;
        }
        Format::Json => {
            create_dir(&config.output_dir)?;
            write_json(&config.output_dir.join("h2_report.json"), &report)?;
        }
    }
    for r in &report.interventions {
        let impact = r.impact.map_or_else(|| "undefined".to_string(), |v| format!("{v:.3}"));
        println!("{}: {} ties added, impact {impact}", r.kind, r.edges_added);
    }
    for a in &report.attacks {
        println!("{} then {}: resilience {:.3}", a.intervention, a.shock, a.resilience);
    }
    Ok(())
}

fn shock(common: &Common, state: &Path, label: ShockLabel) -> Outcome {
    let config = load_config(common)?;
    let state = load_state(state)?;
    let spec = config.shocks.iter().copied().find(|s| s.label() == label.as_str()).unwrap_or_else(|| label.default_spec());
    spec.validate(Some(state.population.len()))?;
    let seed = config.base_seed;
    let outcome = measure_resilience(&state, &spec, &config.model, &mut substream(seed, streams::SHOCK_BASE))?;
    let dir = &config.output_dir;
    create_dir(dir)?;
    outcome.post_state.population.save_json(dir.join("shocked_state.json"))?;
    let row = serde_json::json!({
        "shock": spec.label(),
        "kind": spec.kind_name(),
        "params": spec.params_string(),
        "seed": seed,
        "touched": outcome.touched,
        "cyclists_before": outcome.cyclists_before,
        "cyclists_after": outcome.cyclists_after,
        "epochs": outcome.trace.final_epoch,
        "resilience": outcome.resilience,
    });
    match common.format {
        Format::Csv => {
            let text = format!(
                "shock,kind,params,seed,touched,cyclists_before,cyclists_after,epochs,resilience\n{},{},{},{},{},{},{},{},{}\n",
                spec.label(),
                spec.kind_name(),
                spec.params_string(),
                seed,
                outcome.touched,
                outcome.cyclists_before,
                outcome.cyclists_after,
                outcome.trace.final_epoch,
                outcome.resilience
            );
            std::fs::write(dir.join("shock_log.csv"), text).map_err(|e| Failure::Runtime(e.to_string()))?;
        }
        Format::Json => write_json(&dir.join("shock_log.json"), &row)?,
    }
    println!("{spec}: resilience {:.4}", outcome.resilience);
    Ok(())
}

fn intervene(common: &Common, state: &Path, label: InterventionLabel) -> Outcome {
    let config = load_config(common)?;
    let state = load_state(state)?;
    let spec = config
        .interventions
        .iter()
        .copied()
        .find(|s| s.kind == label.kind())
        .unwrap_or_else(|| match label {
            InterventionLabel::Vanilla => InterventionSpec::vanilla(),
            InterventionLabel::Stable => InterventionSpec::stable(),
        });
    let eval = evaluate_intervention(state, &spec, &config.model, &[], config.base_seed)?;
    let dir = &config.output_dir;
    create_dir(dir)?;
    eval.post_state.population.save_json(dir.join("intervened_state.json"))?;
    let r = &eval.report;
    let impact = r.impact.map_or_else(|| "undefined".to_string(), |v| v.to_string());
    match common.format {
        Format::Csv => {
            let text = format!(
                "intervention,cyclists_before,cyclists_after,impact,edges_added,stability_before,stability_after,energy_after\n{},{},{},{},{},{},{},{}\n",
                r.kind, r.cyclists_before, r.cyclists_after, impact, r.edges_added, r.stability_before, r.stability_after, r.energy_after
            );
            std::fs::write(dir.join("intervention.csv"), text).map_err(|e| Failure::Runtime(e.to_string()))?;
        }
        Format::Json => write_json(&dir.join("intervention.json"), r)?,
    }
    println!("{}: {} ties added, impact {impact}", r.kind, r.edges_added);
    Ok(())
}

fn validate_config(path: &Path) -> Outcome {
    let config = ExperimentConfig::<f64>::load(path).map_err(|e| match e {
        Error::Io(io) => Failure::Validation(format!("cannot read config {}: {io}", path.display())),
        other => Failure::from(other),
    })?;
    println!(
        "{}: ok ({} agents, {} configurations, {} shocks, {} interventions)",
        path.display(),
        config.population.n,
        config.n_configs,
        config.shocks.len(),
        config.interventions.len()
    );
    Ok(())
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
    let outcome = match &cli.command {
        Command::Simulate(common) => simulate(common),
        Command::H1(common) => h1(common),
        Command::H2(common) => h2(common),
        Command::Shock { common, state, shock: label } => shock(common, state, *label),
        Command::Intervene { common, state, intervention } => intervene(common, state, *intervention),
        Command::ValidateConfig { config } => validate_config(config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
