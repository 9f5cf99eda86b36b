//! Model-agnostic wrapper over the two chains, used by the CLI, the
//! checkpoint format and the Python bindings.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::evaluation::{self, HeldOut, Perplexity, ReportInput, TopicReport};
use crate::hdp::HdpChain;
use crate::hyper::Hyperparameters;
use crate::parametric::ParametricChain;
use crate::state::State;
use crate::SweepStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Parametric,
    Hdp,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Parametric => "parametric",
            ModelKind::Hdp => "hdp",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parametric" => Ok(ModelKind::Parametric),
            "hdp" => Ok(ModelKind::Hdp),
            other => Err(Error::Config {
                field: "model",
                message: format!("expected `parametric` or `hdp`, got {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Chain {
    Parametric(ParametricChain),
    Hdp(HdpChain),
}

impl Chain {
    /// Starts a fresh chain. `k_init` is the initial topic count for the HDP
    /// model and ignored for the parametric one.
    pub fn new(
        model: ModelKind,
        corpus: &Corpus,
        hp: Hyperparameters,
        k_init: usize,
        seed: u64,
    ) -> Result<Chain> {
        Ok(match model {
            ModelKind::Parametric => Chain::Parametric(ParametricChain::new(corpus, hp, seed)?),
            ModelKind::Hdp => Chain::Hdp(HdpChain::new(corpus, hp, k_init, seed)?),
        })
    }

    pub fn model(&self) -> ModelKind {
        match self {
            Chain::Parametric(_) => ModelKind::Parametric,
            Chain::Hdp(_) => ModelKind::Hdp,
        }
    }

    pub fn step(&mut self, corpus: &Corpus) -> Result<SweepStats> {
        match self {
            Chain::Parametric(c) => c.step(corpus),
            Chain::Hdp(c) => c.step(corpus),
        }
    }

    pub fn state(&self) -> &State {
        match self {
            Chain::Parametric(c) => &c.state,
            Chain::Hdp(c) => &c.state,
        }
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        match self {
            Chain::Parametric(c) => &c.hp,
            Chain::Hdp(c) => &c.hp,
        }
    }

    pub fn sweeps(&self) -> usize {
        match self {
            Chain::Parametric(c) => c.sweeps,
            Chain::Hdp(c) => c.sweeps,
        }
    }

    pub fn k_active(&self) -> Option<usize> {
        match self {
            Chain::Parametric(_) => None,
            Chain::Hdp(c) => Some(c.k_active()),
        }
    }

    /// Topic labels backing the report and the leading rows of [`Chain::phi`].
    pub fn topic_labels(&self) -> Vec<usize> {
        match self {
            Chain::Parametric(c) => (0..c.k()).collect(),
            Chain::Hdp(c) => c.pool.active().to_vec(),
        }
    }

    /// Author-topic point estimate. For the HDP model the last column is the
    /// unused-topic mass.
    pub fn theta(&self) -> Vec<Vec<f64>> {
        match self {
            Chain::Parametric(c) => c.theta(),
            Chain::Hdp(c) => c.theta(),
        }
    }

    /// Topic-term point estimate, rows aligned with [`Chain::theta`] columns.
    pub fn phi(&self) -> Vec<Vec<f64>> {
        match self {
            Chain::Parametric(c) => c.phi(),
            Chain::Hdp(c) => c.phi(),
        }
    }

    pub fn perplexity(&self, heldout: &HeldOut) -> Result<Perplexity> {
        evaluation::perplexity(heldout, &self.theta(), &self.phi())
    }

    pub fn report(&self, corpus: &Corpus, top_n: usize) -> Result<TopicReport> {
        let labels = self.topic_labels();
        let state = self.state();
        let topic_tokens: Vec<u64> = labels.iter().map(|&k| state.n_k_dot(k) as u64).collect();
        let author_tokens: Vec<u64> = state.counts().n_j_dot.iter().map(|&c| c as u64).collect();
        let theta = self.theta();
        let phi = self.phi();
        evaluation::topic_report(
            &ReportInput {
                corpus,
                labels: &labels,
                topic_tokens: &topic_tokens,
                author_tokens: &author_tokens,
                theta: &theta,
                phi: &phi,
            },
            top_n,
        )
    }
}
