//! The provider abstraction for information sets and the budget allocator
//! that turns a total evaluation budget into a labeled dataset.
//!
//! A provider exposes an opaque observable space; the allocator never
//! learns what an observable means. Labels are the arithmetic mean of `k`
//! uniform evaluations of the hidden completion, except when an
//! information set holds fewer than `k` states, in which case every state
//! is evaluated exactly once.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::cards::{canonicalize, Card, CanonicalHand, Deck};
use crate::equity::{information_set_size, sample_outcome, EquityTable};
use crate::rng::{stream_rng, tag};
use crate::{Error, Result};

/// Identifier of one observable within a provider's space.
pub type ObservableId = u32;

/// Cardinality of one information set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetSize {
    Finite(u64),
    EffectivelyInfinite,
}

/// A source of observables and uniform evaluations of their hidden
/// completions.
pub trait InformationSetProvider: Sync {
    /// Stable identifier recorded in dataset metadata.
    fn id(&self) -> String;

    /// Size of the observable space; ids are `0..observable_count`.
    fn observable_count(&self) -> usize;

    /// Draw an observable from its natural distribution.
    fn sample_observable(&self, rng: &mut dyn RngCore) -> ObservableId;

    /// Evaluate one hidden completion drawn uniformly from the
    /// information set of `observable`. Values lie in `[0, 1]`.
    fn sample_and_evaluate(&self, observable: ObservableId, rng: &mut dyn RngCore) -> Result<f64>;

    fn set_size(&self, observable: ObservableId) -> SetSize;

    /// Every evaluation in the information set, for exhaustive labeling
    /// when the set is smaller than `k`. `None` when enumeration is not
    /// supported.
    fn enumerate(&self, observable: ObservableId) -> Option<Vec<f64>>;

    /// Exact information-set mean, when known. `None` is the explicit
    /// no-ground-truth signal.
    fn ground_truth(&self, observable: ObservableId) -> Option<f64>;
}

/// A fixed evaluation budget `N` spent `k` at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetPlan {
    pub total_budget: u64,
    pub samples_per_example: u64,
}

impl BudgetPlan {
    pub fn new(total_budget: u64, samples_per_example: u64) -> Result<BudgetPlan> {
        if samples_per_example < 1 {
            return Err(Error::InvalidInput(
                "samples per example must be at least 1".to_string(),
            ));
        }
        Ok(BudgetPlan {
            total_budget,
            samples_per_example,
        })
    }

    /// Dataset size when no information set exhausts: floor(N / k).
    pub fn dataset_size(&self) -> u64 {
        self.total_budget / self.samples_per_example
    }
}

/// One training example: an observable and the mean of its sampled
/// evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledExample {
    pub observable: ObservableId,
    pub target: f64,
    pub samples_used: u64,
}

/// A generated dataset plus its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
    pub plan: BudgetPlan,
    pub seed: u64,
    pub provider_id: String,
    /// Counted provider-side, one per evaluation actually performed.
    pub evaluations_consumed: u64,
}

/// Sidecar metadata written next to a dataset CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub total_budget: u64,
    pub samples_per_example: u64,
    pub examples: u64,
    pub evaluations_consumed: u64,
    pub seed: u64,
    pub provider: String,
    /// Content hash of the ground-truth table this dataset will be
    /// validated against, when one exists.
    pub golden_table_hash: Option<String>,
}

/// Counts every evaluation that crosses the provider boundary.
struct CountingProvider<'a> {
    inner: &'a dyn InformationSetProvider,
    evaluations: AtomicU64,
}

impl<'a> CountingProvider<'a> {
    fn new(inner: &'a dyn InformationSetProvider) -> CountingProvider<'a> {
        CountingProvider {
            inner,
            evaluations: AtomicU64::new(0),
        }
    }

    fn sample_and_evaluate(&self, observable: ObservableId, rng: &mut dyn RngCore) -> Result<f64> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.inner.sample_and_evaluate(observable, rng)
    }

    fn enumerate(&self, observable: ObservableId) -> Option<Vec<f64>> {
        let outcomes = self.inner.enumerate(observable)?;
        self.evaluations
            .fetch_add(outcomes.len() as u64, Ordering::Relaxed);
        Some(outcomes)
    }
}

/// Spend the plan's budget: draw observables, label each with the mean of
/// `k` evaluations (or the exhaustive mean for small sets), and stop when
/// the remaining budget cannot cover another example. Leftover budget is
/// discarded so every label has homogeneous quality.
///
/// Deterministic for a given `(provider, plan, seed)` and independent of
/// worker count: observables come from one counter-based stream, and each
/// example evaluates under its own stream.
pub fn generate_dataset(
    provider: &dyn InformationSetProvider,
    plan: &BudgetPlan,
    seed: u64,
) -> Result<Dataset> {
    let k = plan.samples_per_example;
    let counting = CountingProvider::new(provider);

    // Observable draws are cheap; pick them sequentially so the budget
    // cutoff is well-defined, then evaluate in parallel. Sets no larger
    // than k are enumerated outright: every state once.
    let mut picked: Vec<(ObservableId, u64, bool)> = Vec::new();
    let mut remaining = plan.total_budget;
    let mut index = 0u64;
    while remaining > 0 {
        let mut rng = stream_rng(seed, tag::OBSERVABLE, index);
        let observable = provider.sample_observable(&mut rng);
        let (cost, exhaust) = match provider.set_size(observable) {
            SetSize::Finite(size) if size <= k => (size, true),
            _ => (k, false),
        };
        if cost > remaining {
            break;
        }
        picked.push((observable, cost, exhaust));
        remaining -= cost;
        index += 1;
    }

    let examples: Vec<LabeledExample> = picked
        .par_iter()
        .enumerate()
        .map(|(i, &(observable, cost, exhaust))| {
            if exhaust {
                let outcomes = counting.enumerate(observable).ok_or(Error::Provider {
                    index: i,
                    message: format!(
                        "information set of observable {observable} has no more than k={k} \
                         states but the provider cannot enumerate it"
                    ),
                })?;
                debug_assert_eq!(outcomes.len() as u64, cost);
                let target = outcomes.iter().sum::<f64>() / outcomes.len() as f64;
                Ok(LabeledExample {
                    observable,
                    target,
                    samples_used: outcomes.len() as u64,
                })
            } else {
                let mut rng = stream_rng(seed, tag::EVALUATE, i as u64);
                let mut sum = 0.0;
                for _ in 0..k {
                    sum += counting
                        .sample_and_evaluate(observable, &mut rng)
                        .map_err(|e| Error::Provider {
                            index: i,
                            message: e.to_string(),
                        })?;
                }
                Ok(LabeledExample {
                    observable,
                    target: sum / k as f64,
                    samples_used: k,
                })
            }
        })
        .collect::<Result<_>>()?;

    let evaluations_consumed = counting.evaluations.load(Ordering::Relaxed);
    let by_examples: u64 = examples.iter().map(|e| e.samples_used).sum();
    assert_eq!(evaluations_consumed, by_examples);
    assert!(evaluations_consumed <= plan.total_budget);

    Ok(Dataset {
        examples,
        plan: *plan,
        seed,
        provider_id: provider.id(),
        evaluations_consumed,
    })
}

impl Dataset {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("observable,target,samples_used\n");
        for example in &self.examples {
            out.push_str(&format!(
                "{},{},{}\n",
                example.observable, example.target, example.samples_used
            ));
        }
        out
    }

    pub fn meta(&self, golden_table_hash: Option<String>) -> DatasetMeta {
        DatasetMeta {
            total_budget: self.plan.total_budget,
            samples_per_example: self.plan.samples_per_example,
            examples: self.examples.len() as u64,
            evaluations_consumed: self.evaluations_consumed,
            seed: self.seed,
            provider: self.provider_id.clone(),
            golden_table_hash,
        }
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".meta.json");
        path.with_file_name(name)
    }

    /// Write the CSV at `path` and a JSON sidecar at `path + ".meta.json"`.
    pub fn write(&self, path: &Path, golden_table_hash: Option<String>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv_string().as_bytes())?;
        let meta = serde_json::to_string_pretty(&self.meta(golden_table_hash))?;
        std::fs::write(Dataset::sidecar_path(path), meta + "\n")?;
        Ok(())
    }

    /// Read a dataset CSV; the sidecar, when present, is cross-checked.
    pub fn read(path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some("observable,target,samples_used") => {}
            other => {
                return Err(Error::Parse(format!(
                    "bad dataset header: {:?}",
                    other.unwrap_or("<empty>")
                )))
            }
        }
        let mut examples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "dataset line {}: expected 3 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            examples.push(LabeledExample {
                observable: fields[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad observable '{}'", fields[0])))?,
                target: fields[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad target '{}'", fields[1])))?,
                samples_used: fields[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad sample count '{}'", fields[2])))?,
            });
        }
        let consumed: u64 = examples.iter().map(|e| e.samples_used).sum();

        let sidecar = Dataset::sidecar_path(path);
        let (plan, seed, provider_id) = if sidecar.exists() {
            let meta: DatasetMeta = serde_json::from_str(&std::fs::read_to_string(&sidecar)?)?;
            if meta.examples != examples.len() as u64 || meta.evaluations_consumed != consumed {
                return Err(Error::InvalidInput(format!(
                    "dataset {} disagrees with its sidecar metadata",
                    path.display()
                )));
            }
            (
                BudgetPlan::new(meta.total_budget, meta.samples_per_example)?,
                meta.seed,
                meta.provider,
            )
        } else {
            let k = examples.iter().map(|e| e.samples_used).max().unwrap_or(1);
            (BudgetPlan::new(consumed, k)?, 0, "unknown".to_string())
        };

        Ok(Dataset {
            examples,
            plan,
            seed,
            provider_id,
            evaluations_consumed: consumed,
        })
    }
}

/// Test-harness provider: a finite outcome multiset per observable, with
/// analytic ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticProvider {
    outcomes: Vec<Vec<f64>>,
}

impl SyntheticProvider {
    pub fn new(outcomes: Vec<Vec<f64>>) -> Result<SyntheticProvider> {
        if outcomes.is_empty() {
            return Err(Error::InvalidInput(
                "synthetic provider needs at least one observable".to_string(),
            ));
        }
        for (i, set) in outcomes.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "observable {i} has an empty outcome multiset"
                )));
            }
            if set.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidInput(format!(
                    "observable {i} has outcomes outside [0, 1]"
                )));
            }
        }
        Ok(SyntheticProvider { outcomes })
    }
}

impl InformationSetProvider for SyntheticProvider {
    fn id(&self) -> String {
        format!("synthetic:{}", self.outcomes.len())
    }

    fn observable_count(&self) -> usize {
        self.outcomes.len()
    }

    fn sample_observable(&self, rng: &mut dyn RngCore) -> ObservableId {
        rng.gen_range(0..self.outcomes.len()) as ObservableId
    }

    fn sample_and_evaluate(&self, observable: ObservableId, rng: &mut dyn RngCore) -> Result<f64> {
        let set = &self.outcomes[observable as usize];
        Ok(set[rng.gen_range(0..set.len())])
    }

    fn set_size(&self, observable: ObservableId) -> SetSize {
        SetSize::Finite(self.outcomes[observable as usize].len() as u64)
    }

    fn enumerate(&self, observable: ObservableId) -> Option<Vec<f64>> {
        Some(self.outcomes[observable as usize].clone())
    }

    fn ground_truth(&self, observable: ObservableId) -> Option<f64> {
        let set = &self.outcomes[observable as usize];
        Some(set.iter().sum::<f64>() / set.len() as f64)
    }
}

/// The poker information set: observables are canonical hole classes
/// (drawn by dealing uniformly over hole pairs), hidden completions are
/// villain hands plus boards, and evaluations are showdown outcomes.
pub struct PokerProvider {
    deck: Deck,
    truth: Option<EquityTable>,
    /// Per-class deck remainder after removing the representative hole.
    rest_by_class: Vec<Vec<Card>>,
    set_size: u64,
}

impl PokerProvider {
    /// `truth` supplies ground-truth equities for validation; training
    /// never reads it.
    pub fn new(deck: Deck, truth: Option<EquityTable>) -> Result<PokerProvider> {
        if let Some(table) = &truth {
            if table.num_ranks() != deck.num_ranks() {
                return Err(Error::InvalidInput(format!(
                    "equity table is for a {}-rank deck, provider uses {} ranks",
                    table.num_ranks(),
                    deck.num_ranks()
                )));
            }
        }
        let classes = deck.num_canonical_hands();
        let mut rest_by_class = Vec::with_capacity(classes);
        for idx in 0..classes {
            let hand = CanonicalHand::from_index(idx, deck.num_ranks())?;
            let (a, b) = hand.representative();
            rest_by_class.push(
                deck.cards()
                    .iter()
                    .copied()
                    .filter(|c| *c != a && *c != b)
                    .collect(),
            );
        }
        let set_size = information_set_size(&deck);
        Ok(PokerProvider {
            deck,
            truth,
            rest_by_class,
            set_size,
        })
    }

    pub fn deck(&self) -> &Deck {
        &self.deck
    }

    pub fn truth_table(&self) -> Option<&EquityTable> {
        self.truth.as_ref()
    }
}

impl InformationSetProvider for PokerProvider {
    fn id(&self) -> String {
        format!("poker:{}", self.deck.spec())
    }

    fn observable_count(&self) -> usize {
        self.deck.num_canonical_hands()
    }

    fn sample_observable(&self, rng: &mut dyn RngCore) -> ObservableId {
        let n = self.deck.size();
        let first = rng.gen_range(0..n);
        let mut second = rng.gen_range(0..n - 1);
        if second >= first {
            second += 1;
        }
        let cards = self.deck.cards();
        canonicalize(cards[first], cards[second])
            .expect("distinct cards")
            .index(self.deck.num_ranks()) as ObservableId
    }

    fn sample_and_evaluate(&self, observable: ObservableId, rng: &mut dyn RngCore) -> Result<f64> {
        let rest = self
            .rest_by_class
            .get(observable as usize)
            .ok_or_else(|| Error::InvalidInput(format!("observable {observable} out of range")))?;
        let hand = CanonicalHand::from_index(observable as usize, self.deck.num_ranks())?;
        let hero = hand.representative();
        let mut scratch = rest.clone();
        Ok(sample_outcome(hero, &mut scratch, self.deck.num_ranks(), rng).value())
    }

    fn set_size(&self, _observable: ObservableId) -> SetSize {
        SetSize::Finite(self.set_size)
    }

    fn enumerate(&self, _observable: ObservableId) -> Option<Vec<f64>> {
        // Billions of completions per class; exhaustive labeling is never
        // the right call here.
        None
    }

    fn ground_truth(&self, observable: ObservableId) -> Option<f64> {
        let table = self.truth.as_ref()?;
        table.get_index(observable as usize).map(|e| e.equity)
    }
}
