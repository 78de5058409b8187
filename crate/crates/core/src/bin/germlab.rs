use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use germlab::lab::commands::{self, EngineKind};
use germlab::lab::{self, LabError, Overrides, RunConfig, EXIT_CONFIG, EXIT_OK};
use germlab::offspring::OffspringDist;
use germlab::orders::{germ_threshold, Order, Relation};
use germlab::parallel::Execution;
use germlab::rational::{fmt_q, parse_rational};
use germlab::scalar::ArithmeticMode;

#[derive(Parser)]
#[command(name = "germlab", version, about = "Germ-order comparisons and branching random walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    mode: Option<ArithmeticMode>,
    /// Pick an experiment by name (default: the first).
    #[arg(long)]
    experiment: Option<String>,
    /// Run replicas on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, LabError> {
        let mut cfg = RunConfig::from_path(&self.config)?;
        cfg.apply(&Overrides { seed: self.seed, replicas: self.replicas, mode: self.mode });
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compare two offspring laws in the stochastic orders.
    Compare {
        #[arg(long)]
        mu: OffspringDist,
        #[arg(long)]
        nu: OffspringDist,
        /// st, icv, pgf, germ or all.
        #[arg(long, default_value = "all")]
        order: String,
    },
    /// Extinction probability of an offspring law.
    Extinction {
        #[arg(long)]
        mu: OffspringDist,
    },
    /// Engine fields for one configured experiment, as CSV.
    Recurse {
        #[command(flatten)]
        run: RunArgs,
        /// laplace, clamped, pioneer or germ-check.
        #[arg(long, default_value = "laplace")]
        engine: EngineKind,
        /// Clamp level or pioneer parameter (default: the germ threshold).
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-replica particle statistics for one configured experiment, as CSV.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every experiment of a configuration into an output directory.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn compare(mu: &OffspringDist, nu: &OffspringDist, order: &str) -> Result<i32, LabError> {
    let orders: Vec<Order> = if order == "all" {
        Order::ALL.to_vec()
    } else {
        vec![order.parse().map_err(|_| LabError::Config(format!("unknown order `{order}`")))?]
    };
    for o in orders {
        let v = o.compare(mu, nu);
        println!("{}\t{}\t{:?}", o.name(), v.relation, v.witness);
        if o == Order::Germ && v.relation == Relation::Less {
            let th = germ_threshold(mu, nu)?;
            println!("germ_threshold\t{}\ttight={}\troot={}", fmt_q(&th.alpha), th.tight, th.root);
        }
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> Result<i32, LabError> {
    match cli.command {
        Command::Compare { mu, nu, order } => compare(&mu, &nu, &order),
        Command::Extinction { mu } => {
            let r = mu.extinction_probability();
            match r.q.exact() {
                Some(q) => println!("q\t{}\texact", fmt_q(q)),
                None => println!("q\t{}\tapprox", r.q.to_f64()),
            }
            Ok(EXIT_OK)
        }
        Command::Recurse { run, engine, alpha, out } => {
            let cfg = run.load()?;
            let alpha = alpha
                .map(|a| parse_rational(&a).map_err(|e| LabError::Config(format!("--alpha: {e}"))))
                .transpose()?;
            commands::recurse(&cfg, run.experiment.as_deref(), engine, alpha.as_ref(), &out)
        }
        Command::Simulate { run, out } => {
            let cfg = run.load()?;
            commands::simulate(&cfg, run.experiment.as_deref(), &out, run.execution())
        }
        Command::Experiment { run, out } => {
            let mut cfg = run.load()?;
            if let Some(name) = &run.experiment {
                cfg.experiments.retain(|e| &e.name == name);
            }
            let outcome = lab::run(&cfg, &out, run.execution())?;
            for r in &outcome.reports {
                let failed: Vec<_> = r.claims.iter().filter(|c| c.hard && !c.holds).collect();
                println!("{}\t{}\t{} claims\t{} failed", r.name, r.kind, r.claims.len(), failed.len());
                for c in failed {
                    println!("  FAILED {}\tmargin {:e}", c.name, c.margin);
                }
                if !r.audit_passed() {
                    println!("  audit: some quantities moved by more than {:e}", lab::AUDIT_TOLERANCE);
                }
            }
            Ok(outcome.exit_code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { EXIT_OK as u8 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
