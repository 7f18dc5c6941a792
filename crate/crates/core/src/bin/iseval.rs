//! Command-line entry point for the evaluation pipeline: hand ranking,
//! equity queries, golden-table generation, dataset generation, training,
//! the budget sweep, gradient checking, and estimator-error profiling.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 partial result,
//! 4 I/O error. Every command prints its resolved configuration to
//! stderr; a fixed seed makes any stochastic command reproducible.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use iseval_core::cards::{CanonicalHand, Deck};
use iseval_core::equity::{
    error_profile, exact_equity, information_set_size, mc_equity, EquityTable,
};
use iseval_core::handrank::{rank5, rank7};
use iseval_core::infoset::{
    generate_dataset, BudgetPlan, Dataset, InformationSetProvider, PokerProvider,
    SyntheticProvider,
};
use iseval_core::regressor::{
    grad_check, trajectory_csv, Encoding, Mlp, OptimizerKind, TrainConfig, ValidationSet,
};
use iseval_core::rng::{stream_rng, tag};
use iseval_core::sweep::{emit_report, run_sweep, SweepConfig, DEFAULT_KS};
use iseval_core::Error;
use rand::Rng;

const OUT_DIR_ENV: &str = "ISEVAL_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "iseval", version, about = "Information-set sampling and evaluation pipeline")]
struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank a 5- or 7-card hand.
    Rank {
        /// Concatenated card codes, e.g. AsKsQsJsTs.
        #[arg(long)]
        cards: String,
        /// Deck spec: full or short:R.
        #[arg(long, default_value = "full")]
        deck: String,
    },
    /// Exact or Monte Carlo equity of a canonical hand.
    Equity {
        /// Canonical hand code, e.g. AA, AKs, T9o.
        #[arg(long)]
        hand: String,
        #[arg(long, value_enum)]
        mode: EquityMode,
        /// Samples for mc mode.
        #[arg(long, default_value_t = 1000)]
        k: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "full")]
        deck: String,
        /// Confirm a full-deck exact enumeration (about 2.1e9 showdowns).
        #[arg(long)]
        confirm_long: bool,
    },
    /// Monte Carlo equity (shorthand for equity --mode mc).
    Mc {
        #[arg(long)]
        hand: String,
        #[arg(long, default_value_t = 1000)]
        k: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "full")]
        deck: String,
    },
    /// Generate the ground-truth equity table.
    Table {
        /// Output CSV path (default: $ISEVAL_OUT_DIR/preflop_equity.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "full")]
        deck: String,
        #[arg(long, value_enum, default_value_t = TableMode::Exact)]
        mode: TableMode,
        /// Monte Carlo samples per hand for --mode mc.
        #[arg(long, default_value_t = 10_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a labeled dataset under a fixed evaluation budget.
    Gen {
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// poker, or synthetic:v,v,...;v,v,... (one outcome multiset per
        /// observable).
        #[arg(long, default_value = "poker")]
        provider: String,
        #[arg(long, default_value = "full")]
        deck: String,
        /// Output CSV path (default: $ISEVAL_OUT_DIR/dataset.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Equity table whose content hash is recorded in the sidecar.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Train a regressor on a generated poker dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// Ground-truth table for validation.
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "full")]
        deck: String,
        /// Model checkpoint output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory CSV output path.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long, default_value = "64,64", value_delimiter = ',')]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
        optimizer: OptimizerArg,
        #[arg(long, default_value_t = 50_000)]
        max_updates: u64,
        #[arg(long)]
        max_epochs: Option<u64>,
        #[arg(long, default_value_t = 250)]
        eval_every: u64,
        #[arg(long, default_value_t = 20)]
        patience: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Budget sweep: one regressor per k, compared on both axes.
    Sweep {
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KS)]
        ks: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0, 1, 2, 3, 4])]
        seeds: Vec<u64>,
        /// Report directory (default: $ISEVAL_OUT_DIR/sweep).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ground-truth table (default: data/preflop_equity.csv).
        #[arg(long, default_value = "data/preflop_equity.csv")]
        table: PathBuf,
        #[arg(long, default_value = "full")]
        deck: String,
        /// Update cap for the update-equated axis.
        #[arg(long, default_value_t = 50_000)]
        update_budget: u64,
        #[arg(long, default_value = "64,64", value_delimiter = ',')]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 50_000)]
        max_updates: u64,
        #[arg(long, default_value_t = 250)]
        eval_every: u64,
        #[arg(long, default_value_t = 20)]
        patience: u64,
    },
    /// Verify analytic gradients against central finite differences.
    Gradcheck {
        #[arg(long, default_value = "169,16,1", value_delimiter = ',')]
        layers: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        batch: usize,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        /// Fail (exit 1) if the max relative error exceeds this.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Estimator error versus sample count for chosen hands.
    ProfileError {
        /// Comma-separated canonical hand codes.
        #[arg(long, default_value = "AA,KQs,T9o", value_delimiter = ',')]
        holes: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 5, 10, 50])]
        ks: Vec<u64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value = "short:5")]
        deck: String,
        /// Ground-truth table; required for the full deck, computed
        /// exactly on the fly for reduced decks.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        /// Histogram CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum EquityMode {
    Exact,
    Mc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum TableMode {
    Exact,
    Mc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum OptimizerArg {
    Sgd,
    Adam,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if workers > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build_global();
        }
    }
    eprintln!("config: {:?}", cli.command);
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io(_) => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Default output location: explicit flag, else $ISEVAL_OUT_DIR/<name>,
/// else ./<name>.
fn resolve_out(explicit: Option<PathBuf>, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(name),
        None => PathBuf::from(name),
    })
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Rank { cards, deck } => {
            let deck = Deck::parse_spec(&deck)?;
            let cards = deck.parse_cards(&cards)?;
            let rank = match cards.len() {
                5 => rank5(&cards, &deck)?,
                7 => rank7(&cards, &deck)?,
                n => {
                    return Err(Error::InvalidInput(format!(
                        "rank takes 5 or 7 cards, got {n}"
                    )))
                }
            };
            println!("{}", rank.describe(&deck));
            Ok(ExitCode::SUCCESS)
        }

        Command::Equity {
            hand,
            mode,
            k,
            seed,
            deck,
            confirm_long,
        } => {
            let deck = Deck::parse_spec(&deck)?;
            let hand = CanonicalHand::parse(&hand, &deck)?;
            let estimate = match mode {
                EquityMode::Exact => {
                    if deck.num_ranks() == 13 && !confirm_long {
                        return Err(Error::InvalidInput(format!(
                            "exact full-deck enumeration evaluates about {:.1e} showdowns \
                             (minutes of CPU); pass --confirm-long to proceed",
                            information_set_size(&deck) as f64
                        )));
                    }
                    exact_equity(hand, &deck)?
                }
                EquityMode::Mc => mc_equity(hand, k, &deck, seed)?,
            };
            println!(
                "mean={} samples_used={} exact={}",
                estimate.mean, estimate.samples_used, estimate.exact
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Mc {
            hand,
            k,
            seed,
            deck,
        } => {
            let deck = Deck::parse_spec(&deck)?;
            let hand = CanonicalHand::parse(&hand, &deck)?;
            let estimate = mc_equity(hand, k, &deck, seed)?;
            println!(
                "mean={} samples_used={} exact={}",
                estimate.mean, estimate.samples_used, estimate.exact
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Table {
            out,
            deck,
            mode,
            samples,
            seed,
        } => {
            let deck = Deck::parse_spec(&deck)?;
            let out = resolve_out(out, "preflop_equity.csv");
            let table = match mode {
                TableMode::Exact => EquityTable::enumerate_exact(&deck),
                TableMode::Mc => EquityTable::monte_carlo(&deck, samples, seed)?,
            };
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            table.write_csv(&out, &deck)?;
            let provenance = serde_json::json!({
                "deck": deck.spec(),
                "mode": match mode { TableMode::Exact => "exact", TableMode::Mc => "mc" },
                "samples_per_hand": match mode {
                    TableMode::Exact => information_set_size(&deck),
                    TableMode::Mc => samples,
                },
                "seed": match mode { TableMode::Exact => None, TableMode::Mc => Some(seed) },
                "content_hash": table.content_hash(&deck),
            });
            let sidecar = sidecar_path(&out);
            std::fs::write(&sidecar, serde_json::to_string_pretty(&provenance)? + "\n")?;
            println!(
                "wrote {} ({} hands, hash {})",
                out.display(),
                table.len(),
                table.content_hash(&deck)
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Gen {
            budget,
            k,
            seed,
            provider,
            deck,
            out,
            table,
        } => {
            let out = resolve_out(out, "dataset.csv");
            let plan = BudgetPlan::new(budget, k)?;
            let deck = Deck::parse_spec(&deck)?;
            let (dataset, hash) = if provider == "poker" {
                let truth = table
                    .as_deref()
                    .map(|p| EquityTable::read_csv(p, &deck))
                    .transpose()?;
                let hash = truth.as_ref().map(|t| t.content_hash(&deck));
                let provider = PokerProvider::new(deck, truth)?;
                (generate_dataset(&provider, &plan, seed)?, hash)
            } else if let Some(spec) = provider.strip_prefix("synthetic:") {
                let provider = SyntheticProvider::new(parse_synthetic_spec(spec)?)?;
                (generate_dataset(&provider, &plan, seed)?, None)
            } else {
                return Err(Error::InvalidInput(format!(
                    "unknown provider '{provider}' (poker or synthetic:...)"
                )));
            };
            dataset.write(&out, hash)?;
            println!(
                "wrote {} ({} examples, {} evaluations consumed)",
                out.display(),
                dataset.examples.len(),
                dataset.evaluations_consumed
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Train {
            dataset,
            table,
            deck,
            out,
            trajectory,
            hidden,
            batch_size,
            lr,
            optimizer,
            max_updates,
            max_epochs,
            eval_every,
            patience,
            seed,
        } => {
            let deck = Deck::parse_spec(&deck)?;
            let dataset = Dataset::read(&dataset)?;
            let truth = EquityTable::read_csv(&table, &deck)?;
            let provider = PokerProvider::new(deck, Some(truth))?;
            let validation = ValidationSet::poker(&provider)?;
            let encoding = Encoding::OneHot {
                dim: provider.observable_count(),
            };
            let mut sizes = vec![encoding.dim()];
            sizes.extend_from_slice(&hidden);
            sizes.push(1);
            let config = TrainConfig {
                batch_size,
                learning_rate: lr,
                optimizer: match optimizer {
                    OptimizerArg::Sgd => OptimizerKind::Sgd,
                    OptimizerArg::Adam => OptimizerKind::adam(),
                },
                max_updates,
                max_epochs,
                eval_every,
                patience,
                seed,
            };
            let mlp = Mlp::new(&sizes, seed)?;
            let outcome = iseval_core::regressor::train(
                mlp,
                &dataset,
                &encoding,
                &validation,
                &config,
            )?;
            println!(
                "updates={} stop={:?} best_mae={:.9} best_mse={:.9} (at update {})",
                outcome.updates_done,
                outcome.stop,
                outcome.best_mae,
                outcome.best_mse,
                outcome.best_updates
            );
            println!(
                "final mae={:.9} mse={:.9} deal_weighted_mae={:.9} deal_weighted_mse={:.9}",
                outcome.final_metrics.mae,
                outcome.final_metrics.mse,
                outcome.final_metrics.weighted_mae,
                outcome.final_metrics.weighted_mse
            );
            if let Some(path) = trajectory {
                std::fs::write(&path, trajectory_csv(&outcome.trajectory))?;
                println!("wrote {}", path.display());
            }
            if let Some(path) = out {
                outcome.best_params.save(&path, &config)?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Sweep {
            budget,
            ks,
            seeds,
            out,
            table,
            deck,
            update_budget,
            hidden,
            batch_size,
            lr,
            max_updates,
            eval_every,
            patience,
        } => {
            let out = resolve_out(out, "sweep");
            let deck = Deck::parse_spec(&deck)?;
            if !table.exists() {
                return Err(Error::InvalidInput(format!(
                    "ground-truth table {} not found; generate it with `iseval table`",
                    table.display()
                )));
            }
            let truth = EquityTable::read_csv(&table, &deck)?;
            let provider = PokerProvider::new(deck, Some(truth))?;
            let validation = ValidationSet::poker(&provider)?;
            let mut config = SweepConfig::new(budget, ks, seeds);
            config.update_budget = update_budget;
            config.hidden_layers = hidden;
            config.train.batch_size = batch_size;
            config.train.learning_rate = lr;
            config.train.max_updates = max_updates;
            config.train.eval_every = eval_every;
            config.train.patience = patience;

            let result = run_sweep(&provider, &validation, &config)?;
            emit_report(&result, &out)?;
            println!("k,n,median_best_mae_evalaxis,median_best_mae_updateaxis");
            for &k in &result.ks {
                println!(
                    "{},{},{},{}",
                    k,
                    result.runs.iter().find(|r| r.k == k).map_or(0, |r| r.n),
                    result
                        .median_best_mae(k, false)
                        .map_or("NA".to_string(), |v| format!("{v:.9}")),
                    result
                        .median_best_mae(k, true)
                        .map_or("NA".to_string(), |v| format!("{v:.9}")),
                );
            }
            println!("report written to {}", out.display());
            if result.is_complete() {
                Ok(ExitCode::SUCCESS)
            } else {
                for failure in &result.failures {
                    eprintln!(
                        "failed: k={} seed={}: {}",
                        failure.k, failure.seed, failure.message
                    );
                }
                Ok(ExitCode::from(3))
            }
        }

        Command::Gradcheck {
            layers,
            batch,
            epsilon,
            tol,
            seed,
        } => {
            if batch == 0 {
                return Err(Error::InvalidInput("batch must be positive".to_string()));
            }
            let mlp = Mlp::new(&layers, seed)?;
            let mut rng = stream_rng(seed, tag::GRAD_CHECK, 1);
            let features: Vec<Vec<f64>> = (0..batch)
                .map(|_| (0..layers[0]).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let targets: Vec<f64> = (0..batch).map(|_| rng.gen_range(0.05..0.95)).collect();
            let worst = grad_check(&mlp, &features, &targets, epsilon, seed)?;
            println!("max_relative_error={worst:e} tolerance={tol:e}");
            if worst <= tol {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }

        Command::ProfileError {
            holes,
            ks,
            trials,
            deck,
            table,
            seed,
            bins,
            out,
        } => {
            let deck = Deck::parse_spec(&deck)?;
            let truth = match table {
                Some(path) => EquityTable::read_csv(&path, &deck)?,
                None => {
                    if deck.num_ranks() == 13 {
                        return Err(Error::InvalidInput(
                            "full-deck error profiling needs --table (exact enumeration \
                             on the fly is reserved for reduced decks)"
                                .to_string(),
                        ));
                    }
                    EquityTable::enumerate_exact(&deck)
                }
            };
            let holes: Vec<CanonicalHand> = holes
                .iter()
                .map(|code| CanonicalHand::parse(code, &deck))
                .collect::<Result<_, _>>()?;
            let profile = error_profile(&holes, &ks, trials, &deck, &truth, seed, bins)?;
            println!("k,trials,mean_abs_error");
            for row in &profile.rows {
                println!("{},{},{:.9}", row.k, row.trials, row.mean_abs_error);
            }
            if let Some(path) = out {
                std::fs::write(&path, profile.to_csv_string())?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Parse "0,1;0,0.5,1" into one outcome multiset per observable.
fn parse_synthetic_spec(spec: &str) -> Result<Vec<Vec<f64>>, Error> {
    spec.split(';')
        .map(|set| {
            set.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad outcome '{v}' in synthetic spec")))
                })
                .collect()
        })
        .collect()
}
