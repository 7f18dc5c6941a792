//! Learning imperfect-information state evaluators from sampled information
//! sets, with heads-up poker preflop equity as the testbed.
//!
//! The pipeline: [`cards`] and [`handrank`] provide the combinatorial
//! substrate, [`equity`] computes exact and Monte Carlo win probabilities,
//! [`infoset`] turns an evaluation budget into labeled datasets, [`regressor`]
//! trains a small MLP on those labels, and [`sweep`] runs the
//! quality-vs-quantity experiment across per-example sample counts.

pub mod cards;
pub mod equity;
pub mod handrank;
pub mod infoset;
pub mod regressor;
pub mod rng;
pub mod sweep;

pub use cards::{canonicalize, Card, CanonicalHand, Deck};
pub use equity::{EquityEstimate, EquityTable, Outcome, Showdown};
pub use handrank::{rank5, rank7, Category, HandRank};
pub use infoset::{BudgetPlan, InformationSetProvider, LabeledExample};

/// Errors shared across the crate.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("provider failure at example {index}: {message}")]
    Provider { index: usize, message: String },
    #[error("training diverged (non-finite loss) at update {update}")]
    Diverged { update: u64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
