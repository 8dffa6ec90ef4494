use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use steersim::analysis::{dominance_classify, kappa, steerability_classify, Mechanism, Regime};
use steersim::harness::config::normalize_arms;
use steersim::harness::{emit_plot_data, parse_config, run_experiment, Arm, ExperimentConfig};
use steersim::stackelberg::{solve_stackelberg, stackelberg_threshold};
use steersim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "steersim",
    version,
    about = "Steering no-regret learners with signals and payments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write CSV tables plus a metadata sidecar.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of `regular,se`.
        #[arg(long)]
        arms: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        stride: Option<u64>,
        /// Overwrite existing output files.
        #[arg(long)]
        force: bool,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the Stackelberg solution as JSON.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print steerability verdicts per mechanism.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            runs,
            horizon,
            seed,
            arms,
            out,
            stride,
            force,
            threads,
        } => {
            let mut cfg = load(&config)?;
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
                if stride.is_none() && cfg.stride > h {
                    cfg.stride = 1;
                }
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(list) = arms {
                let parsed = list
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(Arm::parse)
                    .collect::<Result<Vec<_>>>()?;
                cfg.arms = normalize_arms(parsed);
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if let Some(k) = stride {
                cfg.stride = k;
            }
            cfg.validate()?;
            let result = match threads {
                Some(n) => {
                    if n == 0 {
                        return Err(Error::Config("`--threads` must be >= 1".into()));
                    }
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build()
                        .map_err(|e| Error::Config(e.to_string()))?
                        .install(|| run_experiment(&cfg))?
                }
                None => run_experiment(&cfg)?,
            };
            let written = emit_plot_data(&result, &cfg.out, force)?;
            for table in &result.arms {
                if let Some(last) = table.rows.last() {
                    println!(
                        "{:<8} t={} delta_mean={:.6} regret_mean={:.3} payment_avg={:.6}",
                        table.arm.as_str(),
                        last.t,
                        last.delta_mean,
                        last.regret_mean,
                        last.payment_avg
                    );
                }
            }
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Solve { config } => {
            let cfg = load(&config)?;
            let game = cfg.game()?;
            let solution = solve_stackelberg(&game, &cfg.solver)?;
            println!("{}", serde_json::to_string_pretty(&solution)?);
            Ok(())
        }
        Command::Classify { config } => {
            let cfg = load(&config)?;
            let game = cfg.game()?;
            let regime = dominance_classify(&game);
            let m = cfg.scheme.payment_m;
            println!(
                "regime: {} (z + y_B = {})",
                match regime {
                    Regime::StrictlyDominant => "strictly dominant",
                    Regime::NeedsDesign => "needs design",
                },
                game.z + game.y_bad
            );
            println!(
                "threshold on y_B for full investment: {}",
                stackelberg_threshold(&game)
            );
            println!("{:<28} {:<10} condition", "mechanism", "steerable");
            let rows = [
                ("information only", Mechanism::InfoOnly),
                ("information + sublinear", Mechanism::InfoPlusSublinear),
                ("linear payments", Mechanism::LinearPayments { payment: m }),
            ];
            for (label, mech) in rows {
                let v = steerability_classify(&game, mech);
                let label = match mech {
                    Mechanism::LinearPayments { payment } => format!("{label} (M = {payment})"),
                    _ => label.to_string(),
                };
                let cond = v
                    .condition_value
                    .map(|c| c.to_string())
                    .unwrap_or_else(|| "-".into());
                println!("{:<28} {:<10} {}", label, v.verdict.mark(), cond);
            }
            println!("kappa: {}", kappa(&game, &cfg.scheme));
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
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
