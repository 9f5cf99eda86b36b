//! Collapsed blocked Gibbs sampler for the fixed-K Author-Topic model.
//!
//! Each token's `(author, topic)` pair is drawn jointly from
//!
//! ```text
//! p(z = k, x = j | ...) ∝ (n_jk + α) / (n_j. + Kα) · (n_kt + β) / (n_k. + Vβ)
//! ```
//!
//! with `j` restricted to the document's authors and all counts excluding the
//! token itself. The `n_j. + Kα` denominator is kept even though it cancels
//! within an author's row; it does not cancel across authors.

use rand::Rng;

use crate::block::{BlockWeights, Cell, TopicChoice};
use crate::corpus::Corpus;
use crate::error::Result;
use crate::hyper::Hyperparameters;
use crate::rng::{self, ChainRng};
use crate::state::State;
use crate::{loglik, SweepStats};

/// Posterior predictive density of term `t` under topic `k` at the current
/// counts: `(n_kt + β) / (n_k. + Vβ)`.
#[inline]
pub fn term_density(state: &State, k: usize, t: usize, beta: f64) -> f64 {
    let v = state.num_terms() as f64;
    (state.n_kt(k, t) as f64 + beta) / (state.n_k_dot(k) as f64 + v * beta)
}

/// Fills `out` with the block weights for a token of term `t` in document
/// `d`. The token must already be decremented.
pub fn block_weights_into(
    state: &State,
    corpus: &Corpus,
    d: usize,
    t: usize,
    k_topics: usize,
    hp: &Hyperparameters,
    out: &mut BlockWeights,
) {
    out.cells.clear();
    let ka = k_topics as f64 * hp.alpha;
    for &j in &corpus.document(d).authors {
        let denom = state.n_j_dot(j) as f64 + ka;
        for k in 0..k_topics {
            let author_part = (state.n_jk(j, k) as f64 + hp.alpha) / denom;
            out.cells.push(Cell {
                author: j,
                topic: TopicChoice::Existing(k),
                weight: author_part * term_density(state, k, t, hp.beta),
            });
        }
    }
}

pub fn block_weights(
    state: &State,
    corpus: &Corpus,
    d: usize,
    t: usize,
    k_topics: usize,
    hp: &Hyperparameters,
) -> BlockWeights {
    let mut out = BlockWeights::default();
    block_weights_into(state, corpus, d, t, k_topics, hp, &mut out);
    out
}

/// One sequential sweep over all tokens (documents ascending, positions
/// ascending). Returns the joint log-likelihood after the sweep.
pub fn sweep_parametric<R: Rng + ?Sized>(
    state: &mut State,
    corpus: &Corpus,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<(f64, usize)> {
    let k_topics = hp.k()?;
    let mut weights = BlockWeights::default();
    let mut visited = 0;
    for (d, doc) in corpus.documents().iter().enumerate() {
        for (i, &t) in doc.tokens.iter().enumerate() {
            state.decrement(corpus, d, i)?;
            block_weights_into(state, corpus, d, t, k_topics, hp, &mut weights);
            let cell = weights.sample(rng);
            let TopicChoice::Existing(k) = cell.topic else {
                unreachable!("parametric block has no new-topic cell")
            };
            state.increment(corpus, d, i, k, cell.author)?;
            visited += 1;
        }
    }
    Ok((loglik::parametric(state, k_topics, hp.alpha, hp.beta), visited))
}

/// Posterior mean of the author-topic distributions, `J × K`.
pub fn estimate_theta_parametric(state: &State, k_topics: usize, hp: &Hyperparameters) -> Vec<Vec<f64>> {
    let ka = k_topics as f64 * hp.alpha;
    state
        .counts()
        .n_jk
        .iter()
        .zip(&state.counts().n_j_dot)
        .map(|(row, &nj)| {
            row[..k_topics]
                .iter()
                .map(|&c| (c as f64 + hp.alpha) / (nj as f64 + ka))
                .collect()
        })
        .collect()
}

/// Posterior mean of the topic-term distributions for the given topic labels.
pub fn estimate_phi(state: &State, topics: &[usize], beta: f64) -> Vec<Vec<f64>> {
    let v = state.num_terms();
    topics
        .iter()
        .map(|&k| (0..v).map(|t| term_density(state, k, t, beta)).collect())
        .collect()
}

/// A running parametric chain: state, hyperparameters and its generator.
#[derive(Debug, Clone)]
pub struct ParametricChain {
    pub hp: Hyperparameters,
    pub state: State,
    pub rng: ChainRng,
    pub sweeps: usize,
}

impl ParametricChain {
    pub fn new(corpus: &Corpus, hp: Hyperparameters, seed: u64) -> Result<Self> {
        hp.validate()?;
        let k = hp.k()?;
        let mut rng = rng::seeded(seed);
        let topics: Vec<usize> = (0..k).collect();
        let state = State::init(corpus, &topics, &mut rng)?;
        Ok(Self {
            hp,
            state,
            rng,
            sweeps: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.hp.topics.expect("validated at construction")
    }

    pub fn step(&mut self, corpus: &Corpus) -> Result<SweepStats> {
        let (loglik, tokens) = sweep_parametric(&mut self.state, corpus, &self.hp, &mut self.rng)?;
        self.sweeps += 1;
        Ok(SweepStats {
            sweep: self.sweeps,
            loglik,
            tokens,
            k_active: None,
        })
    }

    pub fn theta(&self) -> Vec<Vec<f64>> {
        estimate_theta_parametric(&self.state, self.k(), &self.hp)
    }

    pub fn phi(&self) -> Vec<Vec<f64>> {
        let topics: Vec<usize> = (0..self.k()).collect();
        estimate_phi(&self.state, &topics, self.hp.beta)
    }
}
