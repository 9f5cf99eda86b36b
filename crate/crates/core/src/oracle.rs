//! Correctness oracles for the samplers.
//!
//! * [`enumerate`]: exact posterior over every joint `(z, x)` assignment of a
//!   tiny corpus versus the empirical distribution of the parametric chain.
//!   The exact probabilities are computed by the sequential chain rule of the
//!   collapsed model with private counters, independent of the sampler's
//!   count tables and block weights.
//! * [`geweke`]: forward simulation from the HDP prior (Chinese restaurant
//!   franchise) against the successive-conditional chain that alternates the
//!   sampler's transition with resampling the data.
//! * [`synth`]: recovery of planted topics from synthetic data.

use std::collections::HashMap;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::chain::{Chain, ModelKind};
use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::hdp::HdpChain;
use crate::hyper::Hyperparameters;
use crate::parametric::{estimate_phi, ParametricChain};
use crate::rng::{self, ChainRng};
use crate::state::State;

/// Enumeration refuses corpora with more joint assignment states than this.
pub const MAX_ENUMERATED_STATES: u128 = 1_000_000;

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn two_term_corpus(docs: [(&str, Vec<usize>, Vec<usize>); 2]) -> Corpus {
    Corpus::from_indexed(
        vec!["x".into(), "y".into()],
        vec!["a".into(), "b".into()],
        docs.into_iter()
            .map(|(id, tokens, authors)| Document {
                id: id.into(),
                tokens,
                authors,
            })
            .collect(),
    )
    .expect("built-in corpus is valid")
}

/// The built-in enumeration corpus: two documents of two tokens over two
/// terms, one per author (`a: [x, y]`, `b: [y, y]`), giving `4^2 = 16` joint
/// states at `K = 2`. At 10^5 sweeps the Monte Carlo floor of the
/// total-variation estimate is about 0.005.
pub fn micro_corpus() -> Corpus {
    two_term_corpus([("d0", vec![0, 1], vec![0]), ("d1", vec![1, 1], vec![1])])
}

/// Like [`micro_corpus`] but the second document (`[y, y]`) is co-authored by
/// `a` and `b`, so the author half of the block is exercised: `2^2 · 4^2 = 64`
/// states. Its total-variation floor at 10^5 sweeps is about 0.01, so it is
/// checked against a looser threshold.
pub fn coauthored_micro_corpus() -> Corpus {
    two_term_corpus([("d0", vec![0, 1], vec![0]), ("d1", vec![1, 1], vec![0, 1])])
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnumerateConfig {
    pub hp: Hyperparameters,
    pub burnin: usize,
    pub sweeps: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for EnumerateConfig {
    fn default() -> Self {
        Self {
            hp: Hyperparameters::parametric(2, 1.0, 1.0),
            burnin: 1_000,
            sweeps: 100_000,
            seed: 20_140_401,
            threshold: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerateReport {
    pub states: usize,
    pub sweeps: usize,
    pub total_variation: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Number of `(topic, author)` choices per token, in document order.
fn choice_radix(corpus: &Corpus, k: usize) -> Vec<usize> {
    corpus
        .documents()
        .iter()
        .flat_map(|d| std::iter::repeat_n(k * d.authors.len(), d.len()))
        .collect()
}

/// Counts joint states without overflowing.
pub fn count_states(corpus: &Corpus, k: usize) -> u128 {
    choice_radix(corpus, k)
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(r as u128))
        .unwrap_or(u128::MAX)
}

/// Unnormalized `p(w, z, x)` by the sequential chain rule.
fn sequential_joint(corpus: &Corpus, assignment: &[(usize, usize)], hp: &Hyperparameters, k: usize) -> f64 {
    let v = corpus.num_terms() as f64;
    let kf = k as f64;
    let mut n_jk: HashMap<(usize, usize), f64> = HashMap::new();
    let mut n_j: HashMap<usize, f64> = HashMap::new();
    let mut n_kt: HashMap<(usize, usize), f64> = HashMap::new();
    let mut n_k: HashMap<usize, f64> = HashMap::new();
    let mut p = 1.0;
    let mut pos = 0;
    for doc in corpus.documents() {
        for &t in &doc.tokens {
            let (topic, author) = assignment[pos];
            pos += 1;
            let c_jk = n_jk.entry((author, topic)).or_default();
            let c_j = n_j.entry(author).or_default();
            p *= (*c_jk + hp.alpha) / (*c_j + kf * hp.alpha) / doc.authors.len() as f64;
            *c_jk += 1.0;
            *c_j += 1.0;
            let c_kt = n_kt.entry((topic, t)).or_default();
            let c_k = n_k.entry(topic).or_default();
            p *= (*c_kt + hp.beta) / (*c_k + v * hp.beta);
            *c_kt += 1.0;
            *c_k += 1.0;
        }
    }
    p
}

fn decode(code: usize, corpus: &Corpus, k: usize) -> Vec<(usize, usize)> {
    let mut rest = code;
    let mut out = Vec::with_capacity(corpus.num_tokens());
    for doc in corpus.documents() {
        let radix = k * doc.authors.len();
        for _ in 0..doc.len() {
            let c = rest % radix;
            rest /= radix;
            out.push((c % k, doc.authors[c / k]));
        }
    }
    out
}

fn encode(state: &State, corpus: &Corpus, k: usize) -> usize {
    let mut code = 0;
    let mut scale = 1;
    for (d, doc) in corpus.documents().iter().enumerate() {
        let radix = k * doc.authors.len();
        for i in 0..doc.len() {
            let a = doc
                .authors
                .iter()
                .position(|&j| j == state.author(d, i))
                .expect("author in document");
            code += (a * k + state.topic(d, i)) * scale;
            scale *= radix;
        }
    }
    code
}

/// Exact posterior `p(z, x | w)` over all joint states, by state code.
pub fn exact_posterior(corpus: &Corpus, hp: &Hyperparameters) -> Result<Vec<f64>> {
    let k = hp.k()?;
    let states = count_states(corpus, k);
    if states > MAX_ENUMERATED_STATES {
        return Err(Error::OracleLimit(format!(
            "{states} joint states exceed the limit of {MAX_ENUMERATED_STATES}"
        )));
    }
    let mut p: Vec<f64> = (0..states as usize)
        .map(|code| sequential_joint(corpus, &decode(code, corpus, k), hp, k))
        .collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Ok(p)
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Compares the parametric chain's visit frequencies with the exact
/// posterior on `corpus`.
pub fn enumerate(corpus: &Corpus, config: &EnumerateConfig) -> Result<EnumerateReport> {
    let exact = exact_posterior(corpus, &config.hp)?;
    let k = config.hp.k()?;
    let mut chain = ParametricChain::new(corpus, config.hp, config.seed)?;
    for _ in 0..config.burnin {
        chain.step(corpus)?;
    }
    let mut visits = vec![0u64; exact.len()];
    for _ in 0..config.sweeps {
        chain.step(corpus)?;
        visits[encode(&chain.state, corpus, k)] += 1;
    }
    let empirical: Vec<f64> = visits
        .iter()
        .map(|&c| c as f64 / config.sweeps as f64)
        .collect();
    let tv = total_variation(&exact, &empirical);
    Ok(EnumerateReport {
        states: exact.len(),
        sweeps: config.sweeps,
        total_variation: tv,
        threshold: config.threshold,
        passed: tv < config.threshold,
    })
}

/// Document structure used by the Geweke test: authors and lengths only;
/// the terms are generated.
#[derive(Debug, Clone, Serialize)]
pub struct GewekeConfig {
    pub hp: Hyperparameters,
    pub vocab: usize,
    pub num_authors: usize,
    pub doc_authors: Vec<Vec<usize>>,
    pub doc_lengths: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for GewekeConfig {
    fn default() -> Self {
        Self {
            hp: Hyperparameters::hdp(1.0, 0.5, 1.0),
            vocab: 4,
            num_authors: 2,
            doc_authors: vec![vec![0], vec![0, 1], vec![1]],
            doc_lengths: vec![3, 3, 2],
            samples: 10_000,
            seed: 1_992,
            threshold: 4.0,
        }
    }
}

/// Joint draw of the HDP model's variables.
#[derive(Debug, Clone)]
pub struct JointSample {
    pub corpus: Corpus,
    pub z: Vec<usize>,
    pub x: Vec<usize>,
    /// Weight of topic label `k` (labels are `0..tau.len()`).
    pub tau: Vec<f64>,
    pub tau_new: f64,
}

fn dirichlet_with_tail<R: Rng + ?Sized>(m: &[u64], gamma: f64, rng: &mut R) -> (Vec<f64>, f64) {
    let mut g: Vec<f64> = m
        .iter()
        .map(|&c| Gamma::new(c as f64, 1.0).expect("positive shape").sample(rng))
        .collect();
    let tail = Gamma::new(gamma, 1.0).expect("positive shape").sample(rng);
    let total: f64 = g.iter().sum::<f64>() + tail;
    g.iter_mut().for_each(|x| *x /= total);
    (g, tail / total)
}

fn symmetric_dirichlet<R: Rng + ?Sized>(n: usize, a: f64, rng: &mut R) -> Vec<f64> {
    let g = Gamma::new(a, 1.0).expect("positive shape");
    let mut w: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Draws terms for fixed topic assignments from the collapsed topic-term
/// Pólya urn.
fn draw_terms<R: Rng + ?Sized>(z: &[usize], topics: usize, vocab: usize, beta: f64, rng: &mut R) -> Vec<usize> {
    let mut n_kt = vec![vec![0.0; vocab]; topics];
    z.iter()
        .map(|&k| {
            let weights: Vec<f64> = n_kt[k].iter().map(|c| c + beta).collect();
            let t = draw_index(&weights, rng);
            n_kt[k][t] += 1.0;
            t
        })
        .collect()
}

fn build_corpus(config: &GewekeConfig, terms: &[usize]) -> Corpus {
    let mut pos = 0;
    let documents = config
        .doc_authors
        .iter()
        .zip(&config.doc_lengths)
        .enumerate()
        .map(|(d, (authors, &len))| {
            let tokens = terms[pos..pos + len].to_vec();
            pos += len;
            Document {
                id: format!("g{d}"),
                tokens,
                authors: authors.clone(),
            }
        })
        .collect();
    Corpus::from_indexed(names("t", config.vocab), names("a", config.num_authors), documents)
        .expect("Geweke corpus is valid")
}

/// Forward simulation from the prior through the Chinese restaurant
/// franchise: one restaurant per author, dishes shared through the root.
pub fn forward_sample<R: Rng + ?Sized>(config: &GewekeConfig, rng: &mut R) -> JointSample {
    let hp = &config.hp;
    // tables[j] = (dish, customers)
    let mut tables: Vec<Vec<(usize, u64)>> = vec![Vec::new(); config.num_authors];
    let mut dish_tables: Vec<u64> = Vec::new();
    let mut z = Vec::new();
    let mut x = Vec::new();
    for (authors, &len) in config.doc_authors.iter().zip(&config.doc_lengths) {
        for _ in 0..len {
            let j = authors[rng.random_range(0..authors.len())];
            let restaurant = &mut tables[j];
            let mut weights: Vec<f64> = restaurant.iter().map(|&(_, c)| c as f64).collect();
            weights.push(hp.alpha);
            let table = draw_index(&weights, rng);
            let dish = if table < restaurant.len() {
                restaurant[table].1 += 1;
                restaurant[table].0
            } else {
                let mut dw: Vec<f64> = dish_tables.iter().map(|&m| m as f64).collect();
                dw.push(hp.gamma);
                let dish = draw_index(&dw, rng);
                if dish == dish_tables.len() {
                    dish_tables.push(0);
                }
                dish_tables[dish] += 1;
                restaurant.push((dish, 1));
                dish
            };
            z.push(dish);
            x.push(j);
        }
    }
    let (tau, tau_new) = dirichlet_with_tail(&dish_tables, hp.gamma, rng);
    let terms = draw_terms(&z, dish_tables.len(), config.vocab, hp.beta, rng);
    JointSample {
        corpus: build_corpus(config, &terms),
        z,
        x,
        tau,
        tau_new,
    }
}

/// Statistics compared by the Geweke test.
pub const GEWEKE_STATISTICS: [&str; 2] = ["k_active", "max_tau"];

fn statistics_of(k_active: usize, max_tau: f64) -> [f64; 2] {
    [k_active as f64, max_tau]
}

#[derive(Debug, Clone, Serialize)]
pub struct GewekeStatistic {
    pub name: &'static str,
    pub forward_mean: f64,
    pub successive_mean: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GewekeReport {
    pub samples: usize,
    pub statistics: Vec<GewekeStatistic>,
    pub threshold: f64,
    pub passed: bool,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Variance of the mean of an autocorrelated series by non-overlapping batch
/// means.
fn batch_mean_variance(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let (_, var) = mean_var(&means);
    var / means.len() as f64
}

/// Runs the successive-conditional chain from a forward draw, recording the
/// statistics after every transition.
pub fn successive_conditional(config: &GewekeConfig, rng: &mut ChainRng) -> Result<Vec<[f64; 2]>> {
    let start = forward_sample(config, rng);
    let hp = config.hp;
    let slots = start.tau.len();
    let state = State::from_assignments(&start.corpus, start.z, start.x, slots)?;
    let pool = crate::hdp::TopicPool::from_parts((0..slots).collect(), Vec::new(), slots)?;
    let root = crate::hdp::RootDistribution::from_parts(start.tau, start.tau_new)?;
    let mut chain = HdpChain::from_parts(hp, state, pool, root, rng.clone(), 0);
    let mut corpus = start.corpus;
    let mut out = Vec::with_capacity(config.samples);
    for _ in 0..config.samples {
        chain.step(&corpus)?;
        out.push(statistics_of(chain.k_active(), chain.root.max_tau(chain.pool.active())));
        let terms = draw_terms(
            chain.state.z(),
            chain.pool.slots(),
            config.vocab,
            hp.beta,
            &mut chain.rng,
        );
        corpus = build_corpus(config, &terms);
        chain.state = State::from_assignments(
            &corpus,
            chain.state.z().to_vec(),
            chain.state.x().to_vec(),
            chain.pool.slots(),
        )?;
    }
    Ok(out)
}

pub fn geweke(config: &GewekeConfig) -> Result<GewekeReport> {
    config.hp.validate()?;
    if config.samples < 100 {
        return Err(Error::OracleLimit("Geweke test needs at least 100 samples".into()));
    }
    let mut forward_rng = rng::substream(config.seed, 0);
    let forward: Vec<[f64; 2]> = (0..config.samples)
        .map(|_| {
            let s = forward_sample(config, &mut forward_rng);
            let used: Vec<usize> = (0..s.tau.len()).collect();
            let max_tau = used.iter().map(|&k| s.tau[k]).fold(0.0, f64::max);
            statistics_of(s.tau.len(), max_tau)
        })
        .collect();
    let mut chain_rng = rng::substream(config.seed, 1);
    let successive = successive_conditional(config, &mut chain_rng)?;
    let statistics: Vec<GewekeStatistic> = GEWEKE_STATISTICS
        .iter()
        .enumerate()
        .map(|(s, &name)| {
            let f: Vec<f64> = forward.iter().map(|r| r[s]).collect();
            let c: Vec<f64> = successive.iter().map(|r| r[s]).collect();
            let (fm, fv) = mean_var(&f);
            let (cm, _) = mean_var(&c);
            let se = (fv / f.len() as f64 + batch_mean_variance(&c, 50)).sqrt();
            GewekeStatistic {
                name,
                forward_mean: fm,
                successive_mean: cm,
                z_score: (fm - cm) / se,
            }
        })
        .collect();
    let passed = statistics.iter().all(|s| s.z_score.abs() < config.threshold);
    Ok(GewekeReport {
        samples: config.samples,
        statistics,
        threshold: config.threshold,
        passed,
    })
}

/// Synthetic-recovery settings. The defaults (`α = 5`, `γ = 0.1`, one initial
/// topic, 5000 sweeps) favour reusing an existing topic over opening a
/// duplicate for a single author; collapsed single-site moves alone cannot
/// split two merged topics or fuse duplicates quickly, so short chains and
/// larger `γ` often settle one topic away from the truth.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SynthConfig {
    pub topics: usize,
    pub vocab: usize,
    pub docs: usize,
    pub doc_len: usize,
    pub authors: usize,
    pub hp: Hyperparameters,
    pub iters: usize,
    pub burnin: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            topics: 3,
            vocab: 50,
            docs: 200,
            doc_len: 100,
            authors: 5,
            hp: Hyperparameters::hdp(5.0, 0.1, 0.1),
            iters: 5_000,
            burnin: 2_500,
            seed: 7,
        }
    }
}

/// A synthetic corpus with its generating topics.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub corpus: Corpus,
    /// `topics × vocab`, disjoint supports.
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
}

/// Generates documents from `topics` topics with disjoint term blocks. Each
/// document has one or two authors; every token picks one of them uniformly,
/// a topic from that author's mixture and a term from the topic.
pub fn generate_synthetic<R: Rng + ?Sized>(config: &SynthConfig, rng: &mut R) -> Result<SyntheticData> {
    let k = config.topics;
    if k == 0 || config.vocab < k || config.authors == 0 || config.docs == 0 || config.doc_len == 0 {
        return Err(Error::InvalidArgument(format!(
            "synthetic corpus needs 1 <= topics <= vocab and non-zero sizes: {config:?}"
        )));
    }
    let block = config.vocab / k;
    let mut phi = vec![vec![0.0; config.vocab]; k];
    for (i, row) in phi.iter_mut().enumerate() {
        let lo = i * block;
        let hi = if i + 1 == k { config.vocab } else { lo + block };
        row[lo..hi].copy_from_slice(&symmetric_dirichlet(hi - lo, 1.0, rng));
    }
    let theta: Vec<Vec<f64>> = (0..config.authors)
        .map(|_| symmetric_dirichlet(k, 1.0, rng))
        .collect();
    let documents = (0..config.docs)
        .map(|d| {
            let n_auth = if config.authors > 1 { rng.random_range(1..=2) } else { 1 };
            let mut authors = sample_indices(rng, config.authors, n_auth).into_vec();
            authors.sort_unstable();
            let tokens = (0..config.doc_len)
                .map(|_| {
                    let j = authors[rng.random_range(0..authors.len())];
                    let topic = draw_index(&theta[j], rng);
                    draw_index(&phi[topic], rng)
                })
                .collect();
            Document {
                id: format!("s{d}"),
                tokens,
                authors,
            }
        })
        .collect();
    let corpus = Corpus::from_indexed(names("w", config.vocab), names("author", config.authors), documents)?;
    Ok(SyntheticData { corpus, phi, theta })
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

/// Mean cosine similarity under the best one-to-one matching of `found` rows
/// to `truth` rows (brute force; both have the same, small, length).
pub fn best_match_cosine(found: &[Vec<f64>], truth: &[Vec<f64>]) -> f64 {
    let n = truth.len().min(found.len());
    if n == 0 {
        return 0.0;
    }
    permutations(n)
        .iter()
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &p)| cosine(&found[p], &truth[i]))
                .sum::<f64>()
                / n as f64
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthReport {
    pub topics: usize,
    pub k_active_mode: usize,
    pub top_coverage: f64,
    pub mean_cosine: f64,
    pub passed: bool,
}

/// Most frequent value, smallest on ties.
pub fn mode(xs: &[usize]) -> Option<usize> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &x in xs {
        *counts.entry(x).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(x, _)| x)
}

pub fn synth(config: &SynthConfig) -> Result<SynthReport> {
    if config.topics > 8 {
        return Err(Error::OracleLimit(
            "best-match scoring enumerates permutations; at most 8 topics".into(),
        ));
    }
    if config.burnin >= config.iters {
        return Err(Error::InvalidArgument("burn-in must be below iterations".into()));
    }
    let mut gen_rng = rng::substream(config.seed, 0);
    let data = generate_synthetic(config, &mut gen_rng)?;
    let corpus = &data.corpus;
    let mut chain = Chain::new(ModelKind::Hdp, corpus, config.hp, 1, config.seed)?;
    let mut trace = Vec::with_capacity(config.iters - config.burnin);
    for it in 0..config.iters {
        chain.step(corpus)?;
        if it >= config.burnin {
            trace.push(chain.k_active().expect("HDP chain"));
        }
    }
    let Chain::Hdp(hdp) = &chain else { unreachable!() };
    let mut by_size: Vec<usize> = hdp.pool.active().to_vec();
    by_size.sort_by_key(|&k| (std::cmp::Reverse(hdp.state.n_k_dot(k)), k));
    by_size.truncate(config.topics);
    let covered: u64 = by_size.iter().map(|&k| hdp.state.n_k_dot(k) as u64).sum();
    let coverage = covered as f64 / corpus.num_tokens() as f64;
    let found = estimate_phi(&hdp.state, &by_size, config.hp.beta);
    let mean_cosine = best_match_cosine(&found, &data.phi);
    let k_mode = mode(&trace).unwrap_or(0);
    Ok(SynthReport {
        topics: config.topics,
        k_active_mode: k_mode,
        top_coverage: coverage,
        mean_cosine,
        passed: k_mode == config.topics && coverage >= 0.95 && mean_cosine >= 0.9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loglik;

    #[test]
    fn micro_corpus_shape() {
        let c = micro_corpus();
        assert_eq!((c.num_docs(), c.num_terms(), c.num_authors(), c.num_tokens()), (2, 2, 2, 4));
        assert_eq!(count_states(&c, 2), 16);
        assert_eq!(count_states(&coauthored_micro_corpus(), 2), 64);
    }

    #[test]
    fn encode_decode_round_trip() {
        let c = coauthored_micro_corpus();
        for code in 0..64 {
            let a = decode(code, &c, 2);
            let z = a.iter().map(|p| p.0).collect();
            let x = a.iter().map(|p| p.1).collect();
            let s = State::from_assignments(&c, z, x, 2).unwrap();
            assert_eq!(encode(&s, &c, 2), code);
        }
    }

    #[test]
    fn sequential_joint_agrees_with_closed_form_loglik() {
        // two independent routes to the collapsed joint must agree up to the
        // author-selection constant
        let c = coauthored_micro_corpus();
        let hp = Hyperparameters::parametric(2, 0.7, 0.3);
        let constant: f64 = c
            .documents()
            .iter()
            .map(|d| d.len() as f64 * (d.authors.len() as f64).ln())
            .sum();
        for code in 0..64 {
            let a = decode(code, &c, 2);
            let seq = sequential_joint(&c, &a, &hp, 2).ln();
            let s = State::from_assignments(
                &c,
                a.iter().map(|p| p.0).collect(),
                a.iter().map(|p| p.1).collect(),
                2,
            )
            .unwrap();
            let closed = loglik::parametric(&s, 2, hp.alpha, hp.beta) - constant;
            assert!((seq - closed).abs() < 1e-10, "code {code}: {seq} vs {closed}");
        }
    }

    #[test]
    fn exact_posterior_is_label_symmetric() {
        let c = coauthored_micro_corpus();
        let hp = Hyperparameters::parametric(2, 1.0, 1.0);
        let p = exact_posterior(&c, &hp).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for code in 0..64 {
            let swapped: Vec<(usize, usize)> = decode(code, &c, 2).iter().map(|&(k, j)| (1 - k, j)).collect();
            let z = swapped.iter().map(|p| p.0).collect();
            let x = swapped.iter().map(|p| p.1).collect();
            let other = encode(&State::from_assignments(&c, z, x, 2).unwrap(), &c, 2);
            assert!((p[code] - p[other]).abs() < 1e-15);
        }
    }

    #[test]
    fn enumeration_refuses_large_corpora() {
        let docs = (0..10)
            .map(|d| Document {
                id: format!("{d}"),
                tokens: vec![0; 3],
                authors: vec![0, 1],
            })
            .collect();
        let c = Corpus::from_indexed(vec!["t".into()], vec!["a".into(), "b".into()], docs).unwrap();
        let hp = Hyperparameters::parametric(2, 1.0, 1.0);
        assert!(matches!(exact_posterior(&c, &hp), Err(Error::OracleLimit(_))));
    }

    #[test]
    fn forward_sample_is_consistent() {
        let config = GewekeConfig::default();
        let mut rng = rng::seeded(3);
        for _ in 0..200 {
            let s = forward_sample(&config, &mut rng);
            let state = State::from_assignments(&s.corpus, s.z.clone(), s.x.clone(), s.tau.len()).unwrap();
            for k in 0..s.tau.len() {
                assert!(state.n_k_dot(k) > 0, "every dish is eaten");
            }
            let total: f64 = s.tau.iter().sum::<f64>() + s.tau_new;
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn best_match_finds_permutation() {
        let truth = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let found = vec![truth[2].clone(), truth[0].clone(), truth[1].clone()];
        assert!((best_match_cosine(&found, &truth) - 1.0).abs() < 1e-12);
        assert_eq!(permutations(4).len(), 24);
    }

    #[test]
    fn mode_prefers_smaller_on_ties() {
        assert_eq!(mode(&[3, 4, 4, 3]), Some(3));
        assert_eq!(mode(&[5, 3, 5]), Some(5));
        assert_eq!(mode(&[]), None);
    }
}
