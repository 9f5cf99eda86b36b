//! Non-parametric Author-Topic sampler (HDP, direct assignment).
//!
//! The symmetric topic prior is replaced by `α · τ`, where the root
//! distribution `τ` weighs the active topics and keeps one extra component
//! `τ_new` for the mass of all unused topics. A token's block is
//!
//! ```text
//! existing k:  (n_jk + α τ_k) / (n_j. + α) · (n_kt + β) / (n_k. + Vβ)
//! new topic:   α τ_new       / (n_j. + α) · 1 / V
//! ```
//!
//! Choosing the new-topic cell instantiates a topic (recycled label if one is
//! available) and splits `τ_new` with a `Beta(1, γ)` stick. When a topic's last
//! token leaves, the topic is retired and its mass merged back into `τ_new`.
//! Once per sweep `τ` is redrawn from `Dir(m_1, .., m_K, γ)` where the table
//! counts `m_k` come from Bernoulli draws with success probability
//! `α τ_k / (r - 1 + α τ_k)`, `r = 1..n_jk`.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::block::{BlockWeights, Cell, TopicChoice};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::hyper::Hyperparameters;
use crate::parametric::{estimate_phi, term_density};
use crate::rng::{self, ChainRng};
use crate::state::State;
use crate::{loglik, SweepStats};

/// Active topic labels plus a recycle list of retired ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicPool {
    /// Sorted ascending.
    active: Vec<usize>,
    /// Reused last-in first-out.
    retired: Vec<usize>,
    /// Labels ever allocated; every label is `< slots`.
    slots: usize,
}

impl TopicPool {
    /// A pool with labels `0..k` active.
    pub fn with_active(k: usize) -> Self {
        Self {
            active: (0..k).collect(),
            retired: Vec::new(),
            slots: k,
        }
    }

    pub fn from_parts(mut active: Vec<usize>, retired: Vec<usize>, slots: usize) -> Result<Self> {
        active.sort_unstable();
        let bad = |m: String| Err(Error::InvalidArgument(format!("topic pool: {m}")));
        if active.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate active label".into());
        }
        if let Some(&k) = active.iter().chain(&retired).find(|&&k| k >= slots) {
            return bad(format!("label {k} >= slot count {slots}"));
        }
        if let Some(k) = retired.iter().find(|k| active.binary_search(k).is_ok()) {
            return bad(format!("label {k} both active and retired"));
        }
        Ok(Self { active, retired, slots })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn retired(&self) -> &[usize] {
        &self.retired
    }

    pub fn k_active(&self) -> usize {
        self.active.len()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.active.binary_search(&k).is_ok()
    }

    /// Activates a label, preferring the most recently retired one.
    pub fn create(&mut self) -> usize {
        let k = self.retired.pop().unwrap_or_else(|| {
            self.slots += 1;
            self.slots - 1
        });
        let at = self.active.binary_search(&k).unwrap_err();
        self.active.insert(at, k);
        k
    }

    pub fn retire(&mut self, k: usize) {
        if let Ok(at) = self.active.binary_search(&k) {
            self.active.remove(at);
            self.retired.push(k);
        }
    }
}

/// Root weights `τ`, indexed by topic label, plus the unused-topic mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootDistribution {
    tau: Vec<f64>,
    tau_new: f64,
}

impl RootDistribution {
    /// All mass on unused topics.
    pub fn empty() -> Self {
        Self {
            tau: Vec::new(),
            tau_new: 1.0,
        }
    }

    /// `tau[k]` is the weight of label `k` (zero for inactive labels).
    pub fn from_parts(tau: Vec<f64>, tau_new: f64) -> Result<Self> {
        if tau.iter().chain([&tau_new]).any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidArgument("root weights must be finite and non-negative".into()));
        }
        let sum: f64 = tau.iter().sum::<f64>() + tau_new;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("root weights sum to {sum}")));
        }
        Ok(Self { tau, tau_new })
    }

    #[inline]
    pub fn tau(&self, k: usize) -> f64 {
        self.tau.get(k).copied().unwrap_or(0.0)
    }

    pub fn tau_new(&self) -> f64 {
        self.tau_new
    }

    pub fn weights(&self) -> &[f64] {
        &self.tau
    }

    pub fn total(&self) -> f64 {
        self.tau.iter().sum::<f64>() + self.tau_new
    }

    /// Largest weight among the given topics (0 when there are none).
    pub fn max_tau(&self, topics: &[usize]) -> f64 {
        topics.iter().map(|&k| self.tau(k)).fold(0.0, f64::max)
    }

    fn ensure(&mut self, slots: usize) {
        if self.tau.len() < slots {
            self.tau.resize(slots, 0.0);
        }
    }

    fn merge_into_new(&mut self, k: usize) {
        if let Some(w) = self.tau.get_mut(k) {
            self.tau_new += *w;
            *w = 0.0;
        }
    }

    fn split_new(&mut self, k: usize, stick: f64) {
        self.ensure(k + 1);
        self.tau[k] = stick * self.tau_new;
        self.tau_new *= 1.0 - stick;
    }
}

/// Table counts `m_k = Σ_j Σ_r m_jkr` per active topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxiliaryCounts {
    /// `(label, m_k)` for every topic with at least one token, label order.
    pub m: Vec<(usize, u64)>,
    pub slots: usize,
}

impl AuxiliaryCounts {
    pub fn get(&self, k: usize) -> Option<u64> {
        self.m.iter().find(|(l, _)| *l == k).map(|&(_, c)| c)
    }

    pub fn total(&self) -> u64 {
        self.m.iter().map(|&(_, c)| c).sum()
    }
}

/// Fills `out` with the HDP block weights for a decremented token of term `t`.
#[allow(clippy::too_many_arguments)]
pub fn block_weights_hdp_into(
    state: &State,
    pool: &TopicPool,
    root: &RootDistribution,
    corpus: &Corpus,
    d: usize,
    t: usize,
    hp: &Hyperparameters,
    out: &mut BlockWeights,
) {
    out.cells.clear();
    let new_density = 1.0 / state.num_terms() as f64;
    for &j in &corpus.document(d).authors {
        let denom = state.n_j_dot(j) as f64 + hp.alpha;
        for &k in pool.active() {
            let author_part = (state.n_jk(j, k) as f64 + hp.alpha * root.tau(k)) / denom;
            out.cells.push(Cell {
                author: j,
                topic: TopicChoice::Existing(k),
                weight: author_part * term_density(state, k, t, hp.beta),
            });
        }
        out.cells.push(Cell {
            author: j,
            topic: TopicChoice::New,
            weight: hp.alpha * root.tau_new() / denom * new_density,
        });
    }
}

pub fn block_weights_hdp(
    state: &State,
    pool: &TopicPool,
    root: &RootDistribution,
    corpus: &Corpus,
    d: usize,
    t: usize,
    hp: &Hyperparameters,
) -> BlockWeights {
    let mut out = BlockWeights::default();
    block_weights_hdp_into(state, pool, root, corpus, d, t, hp, &mut out);
    out
}

/// Removes token `(d, i)`; retires its topic if that was the last token.
fn remove_token(
    state: &mut State,
    pool: &mut TopicPool,
    root: &mut RootDistribution,
    corpus: &Corpus,
    d: usize,
    i: usize,
) -> Result<()> {
    let (k, _) = state.decrement(corpus, d, i)?;
    if state.n_k_dot(k) == 0 {
        pool.retire(k);
        root.merge_into_new(k);
        state.clear_topic(k)?;
    }
    Ok(())
}

/// One sequential sweep of the HDP sampler. The root distribution is only
/// touched by topic creation and retirement here; see [`sample_aux_counts`]
/// and [`resample_root`] for the per-sweep redraw.
pub fn sweep_hdp<R: Rng + ?Sized>(
    state: &mut State,
    pool: &mut TopicPool,
    root: &mut RootDistribution,
    corpus: &Corpus,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<usize> {
    let stick = Beta::new(1.0, hp.gamma)
        .map_err(|e| Error::InvalidArgument(format!("Beta(1, {}): {e}", hp.gamma)))?;
    let mut weights = BlockWeights::default();
    let mut visited = 0;
    for (d, doc) in corpus.documents().iter().enumerate() {
        for (i, &t) in doc.tokens.iter().enumerate() {
            remove_token(state, pool, root, corpus, d, i)?;
            block_weights_hdp_into(state, pool, root, corpus, d, t, hp, &mut weights);
            let cell = weights.sample(rng);
            let k = match cell.topic {
                TopicChoice::Existing(k) => k,
                TopicChoice::New => {
                    let k = pool.create();
                    state.ensure_topic_slots(pool.slots());
                    root.split_new(k, stick.sample(rng));
                    k
                }
            };
            state.increment(corpus, d, i, k, cell.author)?;
            visited += 1;
        }
    }
    Ok(visited)
}

/// Draws the auxiliary table counts given the state and the current root.
pub fn sample_aux_counts<R: Rng + ?Sized>(
    state: &State,
    pool: &TopicPool,
    root: &RootDistribution,
    hp: &Hyperparameters,
    rng: &mut R,
) -> AuxiliaryCounts {
    let mut m = Vec::with_capacity(pool.k_active());
    for &k in pool.active() {
        let a = hp.alpha * root.tau(k);
        let mut mk = 0u64;
        let mut owned = 0u64;
        for row in &state.counts().n_jk {
            let n = row[k];
            owned += n as u64;
            for r in 1..=n {
                let mu = a / ((r - 1) as f64 + a);
                if rng.random::<f64>() < mu {
                    mk += 1;
                }
            }
        }
        if owned > 0 {
            m.push((k, mk));
        }
    }
    AuxiliaryCounts {
        m,
        slots: pool.slots(),
    }
}

/// Draws `(τ_1, .., τ_K, τ_new) ~ Dir(m_1, .., m_K, γ)`.
pub fn resample_root<R: Rng + ?Sized>(
    aux: &AuxiliaryCounts,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<RootDistribution> {
    if aux.m.is_empty() {
        return Ok(RootDistribution::empty());
    }
    let gamma_draw = |shape: f64, rng: &mut R| -> Result<f64> {
        let g = Gamma::new(shape, 1.0)
            .map_err(|e| Error::InvalidArgument(format!("Gamma({shape}, 1): {e}")))?;
        // keep every component strictly positive
        Ok(g.sample(rng).max(f64::MIN_POSITIVE))
    };
    let mut tau = vec![0.0; aux.slots];
    let mut total = 0.0;
    for &(k, mk) in &aux.m {
        if mk == 0 {
            return Err(Error::InvalidArgument(format!(
                "active topic {k} has zero table count"
            )));
        }
        let g = gamma_draw(mk as f64, rng)?;
        tau[k] = g;
        total += g;
    }
    let g_new = gamma_draw(hp.gamma, rng)?;
    total += g_new;
    tau.iter_mut().for_each(|w| *w /= total);
    Ok(RootDistribution {
        tau,
        tau_new: g_new / total,
    })
}

/// Resamples `τ` from its conditional given the current assignments.
pub fn update_root<R: Rng + ?Sized>(
    state: &State,
    pool: &TopicPool,
    root: &mut RootDistribution,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<AuxiliaryCounts> {
    let aux = sample_aux_counts(state, pool, root, hp, rng);
    *root = resample_root(&aux, hp, rng)?;
    Ok(aux)
}

/// Posterior mean author-topic table over `pool.active()` followed by one
/// column for the unused-topic mass `α τ_new / (n_j. + α)`.
pub fn estimate_theta_hdp(
    state: &State,
    pool: &TopicPool,
    root: &RootDistribution,
    hp: &Hyperparameters,
) -> Vec<Vec<f64>> {
    state
        .counts()
        .n_jk
        .iter()
        .zip(&state.counts().n_j_dot)
        .map(|(row, &nj)| {
            let denom = nj as f64 + hp.alpha;
            pool.active()
                .iter()
                .map(|&k| (row[k] as f64 + hp.alpha * root.tau(k)) / denom)
                .chain(std::iter::once(hp.alpha * root.tau_new() / denom))
                .collect()
        })
        .collect()
}

/// A running HDP chain.
#[derive(Debug, Clone)]
pub struct HdpChain {
    pub hp: Hyperparameters,
    pub state: State,
    pub pool: TopicPool,
    pub root: RootDistribution,
    pub rng: ChainRng,
    pub sweeps: usize,
}

impl HdpChain {
    /// Starts a chain with `k_init` topics assigned uniformly at random.
    /// Topics that receive no token are retired immediately and `τ` is drawn
    /// from its conditional given the initial assignments.
    pub fn new(corpus: &Corpus, hp: Hyperparameters, k_init: usize, seed: u64) -> Result<Self> {
        hp.validate()?;
        if k_init == 0 {
            return Err(Error::Config {
                field: "k_init",
                message: "must be at least 1".into(),
            });
        }
        let mut rng = rng::seeded(seed);
        let labels: Vec<usize> = (0..k_init).collect();
        let mut state = State::init(corpus, &labels, &mut rng)?;
        state.ensure_topic_slots(k_init);
        let mut pool = TopicPool::with_active(k_init);
        for k in 0..k_init {
            if state.n_k_dot(k) == 0 {
                pool.retire(k);
            }
        }
        let uniform = 1.0 / (pool.k_active() + 1) as f64;
        let mut tau = vec![0.0; k_init];
        for &k in pool.active() {
            tau[k] = uniform;
        }
        let mut root = RootDistribution {
            tau,
            tau_new: uniform,
        };
        update_root(&state, &pool, &mut root, &hp, &mut rng)?;
        Ok(Self {
            hp,
            state,
            pool,
            root,
            rng,
            sweeps: 0,
        })
    }

    pub fn from_parts(
        hp: Hyperparameters,
        state: State,
        pool: TopicPool,
        root: RootDistribution,
        rng: ChainRng,
        sweeps: usize,
    ) -> Self {
        Self {
            hp,
            state,
            pool,
            root,
            rng,
            sweeps,
        }
    }

    /// Topic sweep followed by one root resample.
    pub fn step(&mut self, corpus: &Corpus) -> Result<SweepStats> {
        let tokens = sweep_hdp(
            &mut self.state,
            &mut self.pool,
            &mut self.root,
            corpus,
            &self.hp,
            &mut self.rng,
        )?;
        update_root(&self.state, &self.pool, &mut self.root, &self.hp, &mut self.rng)?;
        self.sweeps += 1;
        Ok(SweepStats {
            sweep: self.sweeps,
            loglik: self.loglik(),
            tokens,
            k_active: Some(self.pool.k_active()),
        })
    }

    pub fn loglik(&self) -> f64 {
        let root = &self.root;
        loglik::hdp(
            &self.state,
            self.pool.active(),
            |k| root.tau(k),
            self.hp.alpha,
            self.hp.beta,
        )
    }

    pub fn k_active(&self) -> usize {
        self.pool.k_active()
    }

    pub fn theta(&self) -> Vec<Vec<f64>> {
        estimate_theta_hdp(&self.state, &self.pool, &self.root, &self.hp)
    }

    /// Topic-term rows for the active topics, plus a uniform row standing
    /// in for the unused topics.
    pub fn phi(&self) -> Vec<Vec<f64>> {
        let mut phi = estimate_phi(&self.state, self.pool.active(), self.hp.beta);
        let v = self.state.num_terms();
        phi.push(vec![1.0 / v as f64; v]);
        phi
    }
}

/// Traces of a chain run, recorded after burn-in.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub chain: HdpChain,
    pub tau_trace: Vec<RootDistribution>,
    pub k_active_trace: Vec<usize>,
    pub loglik_trace: Vec<f64>,
}

impl PartialEq for HdpChain {
    fn eq(&self, other: &Self) -> bool {
        self.hp == other.hp
            && self.state == other.state
            && self.pool == other.pool
            && self.root == other.root
            && self.rng == other.rng
            && self.sweeps == other.sweeps
    }
}

/// Runs `iters` sweeps, each followed by a root resample, recording traces for
/// sweeps after the first `burnin`.
pub fn run_hdp_chain(
    corpus: &Corpus,
    hp: Hyperparameters,
    iters: usize,
    burnin: usize,
    seed: u64,
) -> Result<ChainResult> {
    if burnin > iters {
        return Err(Error::InvalidArgument(format!(
            "burn-in {burnin} exceeds iterations {iters}"
        )));
    }
    let mut chain = HdpChain::new(corpus, hp, 1, seed)?;
    let mut result = ChainResult {
        chain: chain.clone(),
        tau_trace: Vec::new(),
        k_active_trace: Vec::new(),
        loglik_trace: Vec::new(),
    };
    for it in 0..iters {
        let stats = chain.step(corpus)?;
        if it >= burnin {
            result.tau_trace.push(chain.root.clone());
            result.k_active_trace.push(chain.k_active());
            result.loglik_trace.push(stats.loglik);
        }
    }
    result.chain = chain;
    Ok(result)
}
