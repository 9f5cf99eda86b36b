//! Collapsed blocked Gibbs inference for the Author-Topic model.
//!
//! Two samplers share one Markov state ([`state::State`]):
//!
//! * [`parametric`] — the fixed-K Author-Topic model, sampling each token's
//!   `(author, topic)` pair jointly with `θ` and `φ` integrated out.
//! * [`hdp`] — the non-parametric extension, where the topic prior is split
//!   into a precision `α` and a root distribution `τ` over the active topics
//!   plus one component holding the mass of all unused topics. Topics are
//!   created and retired as the chain runs and `τ` is resampled once per sweep
//!   through auxiliary table counts.
//!
//! [`corpus`] ingests JSON Lines corpora, [`evaluation`] computes perplexity and
//! topic reports, [`oracle`] holds the exact-enumeration, Geweke and synthetic
//! recovery checks, and [`run`] ties everything together for the CLI.

pub mod block;
pub mod chain;
pub mod checkpoint;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod hdp;
pub mod hyper;
pub mod loglik;
pub mod oracle;
pub mod parametric;
pub mod rng;
pub mod run;
pub mod state;

pub use chain::{Chain, ModelKind};
pub use checkpoint::Checkpoint;
pub use corpus::{Corpus, Document, IngestionOptions, Vocabulary};
pub use error::{Error, Result};
pub use hdp::{AuxiliaryCounts, HdpChain, RootDistribution, TopicPool};
pub use hyper::Hyperparameters;
pub use parametric::ParametricChain;
pub use rng::ChainRng;
pub use state::State;

/// Statistics produced by one full sweep of either sampler.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepStats {
    /// 1-based index of the sweep within the chain.
    pub sweep: usize,
    /// Collapsed joint log-likelihood `log p(w, z, x)` up to a constant.
    pub loglik: f64,
    /// Number of tokens visited.
    pub tokens: usize,
    /// Active topic count at the end of the sweep (HDP only).
    pub k_active: Option<usize>,
}
