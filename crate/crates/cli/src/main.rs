use std::path::{Path, PathBuf};
use std::process::ExitCode;

use authortopic::oracle::{self, EnumerateConfig, GewekeConfig, SynthConfig};
use authortopic::run::{self, PartialRunConfig};
use authortopic::{Error, ModelKind};
use clap::{Args, Parser, Subcommand};

/// Author-Topic models fitted by collapsed blocked Gibbs sampling.
#[derive(Parser)]
#[command(name = "authortopic", version)]
struct Cli {
    /// Log more (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write run artifacts.
    Train(Box<TrainArgs>),
    /// Held-out perplexity of a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        heldout: PathBuf,
    },
    /// Sampler correctness checks on built-in data.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct TrainArgs {
    /// JSON file with any of the flag values; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    heldout: Option<PathBuf>,
    /// Topic count (parametric only).
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Topics the HDP chain starts with.
    #[arg(long)]
    initial_topics: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    top_n: Option<usize>,
    /// Checkpoint every N sweeps (0 = final only).
    #[arg(long)]
    checkpoint_every: Option<usize>,
}

impl TrainArgs {
    fn flags(&self) -> PartialRunConfig {
        PartialRunConfig {
            model: self.model,
            corpus: self.corpus.clone(),
            heldout: self.heldout.clone(),
            topics: self.topics,
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            initial_topics: self.initial_topics,
            iters: self.iters,
            burnin: self.burnin,
            seed: self.seed,
            out: self.out.clone(),
            top_n: self.top_n,
            checkpoint_every: self.checkpoint_every,
        }
    }
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Compare Gibbs visit frequencies with the exactly enumerated posterior.
    Enumerate {
        #[arg(long, default_value_t = EnumerateConfig::default().sweeps)]
        sweeps: usize,
        #[arg(long, default_value_t = EnumerateConfig::default().seed)]
        seed: u64,
        /// Use the 64-state corpus with a co-authored document.
        #[arg(long)]
        coauthored: bool,
    },
    /// Forward simulation against successive-conditional simulation.
    Geweke {
        #[arg(long, default_value_t = GewekeConfig::default().samples)]
        samples: usize,
        #[arg(long, default_value_t = GewekeConfig::default().seed)]
        seed: u64,
    },
    /// Recover planted topics from a generated corpus.
    Synth {
        #[arg(long, default_value_t = SynthConfig::default().topics)]
        topics: usize,
        #[arg(long, default_value_t = SynthConfig::default().iters)]
        iters: usize,
        #[arg(long, default_value_t = SynthConfig::default().burnin)]
        burnin: usize,
        #[arg(long, default_value_t = SynthConfig::default().seed)]
        seed: u64,
    },
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn train(args: &TrainArgs) -> Result<bool, Error> {
    let base = match &args.config {
        Some(path) => PartialRunConfig::from_file(path)?,
        None => PartialRunConfig::default(),
    };
    let config = base.overlay(args.flags()).resolve()?;
    let outcome = run::train(&config)?;
    let k = outcome.last.k_active.map(|k| format!(", k_active {k}")).unwrap_or_default();
    println!(
        "{} sweeps of {}: loglik {:.4}{k}",
        outcome.last.sweep, config.model, outcome.last.loglik
    );
    if let Some(p) = outcome.perplexity {
        println!(
            "held-out perplexity {:.6} ({} tokens, {} skipped)",
            p.perplexity, p.evaluated_tokens, p.skipped_tokens
        );
    }
    println!("artifacts in {}", outcome.out.display());
    Ok(true)
}

fn eval(checkpoint: &Path, heldout: &Path) -> Result<bool, Error> {
    let r = run::evaluate(checkpoint, heldout)?;
    println!(
        "perplexity {:.6} ({} tokens, {} skipped)",
        r.perplexity.perplexity, r.perplexity.evaluated_tokens, r.perplexity.skipped_tokens
    );
    println!("wrote {}", r.written.display());
    Ok(true)
}

fn oracle(cmd: &OracleCommand) -> Result<bool, Error> {
    match *cmd {
        OracleCommand::Enumerate { sweeps, seed, coauthored } => {
            let (corpus, threshold) = if coauthored {
                (oracle::coauthored_micro_corpus(), 0.02)
            } else {
                (oracle::micro_corpus(), EnumerateConfig::default().threshold)
            };
            let config = EnumerateConfig {
                sweeps,
                seed,
                threshold,
                ..EnumerateConfig::default()
            };
            let r = oracle::enumerate(&corpus, &config)?;
            println!(
                "enumerate: {} states, {} sweeps, total variation {:.5} (threshold {}) {}",
                r.states,
                r.sweeps,
                r.total_variation,
                r.threshold,
                verdict(r.passed)
            );
            Ok(r.passed)
        }
        OracleCommand::Geweke { samples, seed } => {
            let config = GewekeConfig {
                samples,
                seed,
                ..GewekeConfig::default()
            };
            let r = oracle::geweke(&config)?;
            for s in &r.statistics {
                println!(
                    "{:>10}: forward {:.5}  successive {:.5}  z {:+.3}",
                    s.name, s.forward_mean, s.successive_mean, s.z_score
                );
            }
            println!("geweke: {} samples, |z| < {} {}", r.samples, r.threshold, verdict(r.passed));
            Ok(r.passed)
        }
        OracleCommand::Synth { topics, iters, burnin, seed } => {
            let config = SynthConfig {
                topics,
                iters,
                burnin,
                seed,
                ..SynthConfig::default()
            };
            let r = oracle::synth(&config)?;
            println!(
                "synth: k_active mode {} (target {}), top-{} coverage {:.4}, mean cosine {:.4} {}",
                r.k_active_mode,
                r.topics,
                r.topics,
                r.top_coverage,
                r.mean_cosine,
                verdict(r.passed)
            );
            Ok(r.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Train(args) => train(args),
        Command::Eval { checkpoint, heldout } => eval(checkpoint, heldout),
        Command::Oracle(cmd) => oracle(cmd),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Error::Config { field, message }) => {
            eprintln!("error: --{} {message}", field.replace('_', "-"));
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
