use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use perfsgd_core::experiment::{load_document, ConfigDocument, Experiment, ExperimentError};

/// Performative-prediction SGD experiments: greedy and lazy deploy, RGD and
/// RRM on simulated distribution maps, written out as CSV traces.
#[derive(Debug, Parser)]
#[command(name = "perfsgd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run all replicates of an experiment and write traces, aggregate and metadata.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's output.dir.
        #[arg(long, env = "PERFSGD_OUT_DIR")]
        out: Option<PathBuf>,
        /// Base seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of replicates; overrides the config.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        repeats: Option<u32>,
        /// Replicates to run in parallel.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: u32,
    },
    /// Check empirical W1 between D(θ) and D(θ') against ε‖θ − θ'‖ on random pairs.
    AuditSensitivity { config: PathBuf },
    /// Compute the stable point by repeated risk minimization and compare with any closed form.
    StablePoint { config: PathBuf },
    /// Validate a config and print it with all defaults filled in.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let validation = e
        .chain()
        .any(|c| c.downcast_ref::<ExperimentError>().is_some_and(ExperimentError::is_validation));
    if validation {
        1
    } else {
        2
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            repeats,
            jobs,
        } => run(&config, out, seed, repeats, jobs as usize),
        Command::AuditSensitivity { config } => audit(&config),
        Command::StablePoint { config } => stable_point(&config),
        Command::Validate { config } => validate(&config),
    }
}

fn load(path: &Path) -> Result<ConfigDocument> {
    load_document(path).with_context(|| format!("loading {}", path.display()))
}

fn prepare(doc: ConfigDocument) -> Result<Experiment> {
    Ok(Experiment::prepare(doc.config, doc.cached_stable_point)?)
}

fn run(path: &Path, out: Option<PathBuf>, seed: Option<u64>, repeats: Option<u32>, jobs: usize) -> Result<()> {
    let mut doc = load(path)?;
    if let Some(seed) = seed {
        doc.config.base_seed = seed;
    }
    if let Some(repeats) = repeats {
        doc.config.repeats = repeats;
    }
    let out_dir = out
        .or_else(|| doc.config.output.dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    doc.config.output.dir = Some(out_dir.to_string_lossy().into_owned());
    let exp = prepare(doc)?;
    for note in &exp.notes {
        eprintln!("note: {note}");
    }
    let summary = exp.run_to_dir(&out_dir, jobs)?;
    let diverged = summary.runs.iter().filter(|r| r.status.is_diverged()).count();
    println!(
        "wrote {} run(s) to {} ({} diverged)",
        summary.runs.len(),
        summary.out_dir.display(),
        diverged
    );
    if let Some(last) = summary.aggregate.last() {
        match last.mean_dist_sq {
            Some(m) => println!(
                "final checkpoint {}: samples {}, deployments {}, mean dist^2 {:.6e} over {} run(s)",
                last.checkpoint, last.samples, last.deployments, m, last.n_runs
            ),
            None => println!(
                "final checkpoint {}: samples {}, deployments {}",
                last.checkpoint, last.samples, last.deployments
            ),
        }
    }
    Ok(())
}

fn audit(path: &Path) -> Result<()> {
    let exp = prepare(load(path)?)?;
    let rows = exp.audit()?;
    println!("pair,w1,bound,se,ratio,pass");
    for (i, r) in rows.iter().enumerate() {
        println!(
            "{i},{:.6e},{:.6e},{:.3e},{},{}",
            r.w1,
            r.bound,
            r.se,
            r.ratio.map(|x| format!("{x:.4}")).unwrap_or_default(),
            if r.pass { "pass" } else { "fail" }
        );
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    println!("{passed}/{} pairs within ε‖θ−θ′‖ + 3·se", rows.len());
    Ok(())
}

fn stable_point(path: &Path) -> Result<()> {
    let exp = prepare(load(path)?)?;
    let c = exp.env.constants();
    println!(
        "epsilon = {}, beta = {}, gamma = {}, gamma/beta = {}, contraction regime: {}",
        c.epsilon,
        c.beta,
        c.gamma,
        c.ratio(),
        c.in_convergence_regime()
    );
    if !c.in_convergence_regime() {
        eprintln!("warning: epsilon >= gamma/beta, repeated risk minimization need not converge");
    }
    let empirical = exp.compute_stable_point()?;
    println!("rrm_empirical = {empirical}");
    if let Some(exact) = exp.env.stable_point() {
        println!("closed_form   = {exact}");
        println!("distance      = {:.3e}", empirical.dist(&exact)?);
    }
    Ok(())
}

fn validate(path: &Path) -> Result<()> {
    let exp = prepare(load(path)?)?;
    for note in &exp.notes {
        eprintln!("note: {note}");
    }
    print!("{}", exp.config.to_toml());
    eprintln!("config is valid");
    Ok(())
}
