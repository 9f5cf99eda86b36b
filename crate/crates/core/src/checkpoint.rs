//! Self-describing JSON checkpoints.
//!
//! A checkpoint holds the corpus, hyperparameters, every assignment, the
//! topic pool and root distribution (HDP) and the generator state, so that
//! restoring and continuing is bit-identical to an uninterrupted run. Count
//! tables and auxiliary table counts are recomputed, not stored.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, ModelKind};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::hdp::{HdpChain, RootDistribution, TopicPool};
use crate::hyper::Hyperparameters;
use crate::parametric::ParametricChain;
use crate::rng::ChainRng;
use crate::state::State;

pub const FORMAT: &str = "authortopic-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub model: ModelKind,
    pub hyperparameters: Hyperparameters,
    pub sweeps: usize,
    pub corpus: Corpus,
    pub z: Vec<usize>,
    pub x: Vec<usize>,
    pub topic_pool: Option<TopicPool>,
    pub root: Option<RootDistribution>,
    pub rng: ChainRng,
}

impl Checkpoint {
    pub fn capture(chain: &Chain, corpus: &Corpus) -> Checkpoint {
        let state = chain.state();
        let (pool, root, rng) = match chain {
            Chain::Parametric(c) => (None, None, c.rng.clone()),
            Chain::Hdp(c) => (Some(c.pool.clone()), Some(c.root.clone()), c.rng.clone()),
        };
        Checkpoint {
            format: FORMAT.into(),
            version: VERSION,
            model: chain.model(),
            hyperparameters: *chain.hyperparameters(),
            sweeps: chain.sweeps(),
            corpus: corpus.clone(),
            z: state.z().to_vec(),
            x: state.x().to_vec(),
            topic_pool: pool,
            root,
            rng,
        }
    }

    /// Rebuilds the corpus and chain.
    pub fn restore(self) -> Result<(Corpus, Chain)> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format {:?} version {}",
                self.format, self.version
            )));
        }
        self.hyperparameters.validate()?;
        let corpus = self.corpus.rehydrate()?;
        let chain = match self.model {
            ModelKind::Parametric => {
                let k = self.hyperparameters.k()?;
                if self.z.iter().any(|&z| z >= k) {
                    return Err(Error::Checkpoint("topic label exceeds K".into()));
                }
                let state = State::from_assignments(&corpus, self.z, self.x, k)?;
                Chain::Parametric(ParametricChain {
                    hp: self.hyperparameters,
                    state,
                    rng: self.rng,
                    sweeps: self.sweeps,
                })
            }
            ModelKind::Hdp => {
                let (Some(pool), Some(root)) = (self.topic_pool, self.root) else {
                    return Err(Error::Checkpoint("HDP checkpoint lacks topic pool or root".into()));
                };
                let pool = TopicPool::from_parts(pool.active().to_vec(), pool.retired().to_vec(), pool.slots())?;
                let state = State::from_assignments(&corpus, self.z, self.x, pool.slots())?;
                if state.num_topic_slots() != pool.slots() {
                    return Err(Error::Checkpoint("assignment uses an unallocated topic label".into()));
                }
                for k in 0..pool.slots() {
                    if (state.n_k_dot(k) > 0) != pool.is_active(k) {
                        return Err(Error::Checkpoint(format!(
                            "topic {k} activity does not match its token count"
                        )));
                    }
                }
                let root = RootDistribution::from_parts(root.weights().to_vec(), root.tau_new())?;
                Chain::Hdp(HdpChain::from_parts(
                    self.hyperparameters,
                    state,
                    pool,
                    root,
                    self.rng,
                    self.sweeps,
                ))
            }
        };
        Ok((corpus, chain))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Checkpoint> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_json(&text)
    }
}
