//! Collapsed joint log-likelihoods used for convergence traces.
//!
//! Both are `log p(w, z, x)` up to the author-selection constant
//! `-Σ_d N_d log|j_d|`, which does not depend on the state.

use statrs::function::gamma::ln_gamma;

use crate::state::State;

/// Dirichlet-multinomial log marginal of the topic-term counts over `topics`.
fn topic_term_part(state: &State, topics: &[usize], beta: f64) -> f64 {
    let v = state.num_terms() as f64;
    let ln_beta = ln_gamma(beta);
    let ln_vbeta = ln_gamma(v * beta);
    topics
        .iter()
        .map(|&k| {
            let row: f64 = state.counts().n_kt[k]
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| ln_gamma(c as f64 + beta) - ln_beta)
                .sum();
            ln_vbeta - ln_gamma(state.n_k_dot(k) as f64 + v * beta) + row
        })
        .sum()
}

/// Joint for the fixed-K model with symmetric priors `alpha`, `beta`.
pub fn parametric(state: &State, k: usize, alpha: f64, beta: f64) -> f64 {
    let topics: Vec<usize> = (0..k).collect();
    let kf = k as f64;
    let ln_alpha = ln_gamma(alpha);
    let ln_kalpha = ln_gamma(kf * alpha);
    let author: f64 = state
        .counts()
        .n_jk
        .iter()
        .zip(&state.counts().n_j_dot)
        .map(|(row, &nj)| {
            let cells: f64 = row[..k]
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| ln_gamma(c as f64 + alpha) - ln_alpha)
                .sum();
            ln_kalpha - ln_gamma(nj as f64 + kf * alpha) + cells
        })
        .sum();
    author + topic_term_part(state, &topics, beta)
}

/// Joint for the HDP model conditioned on the root weights: author rows are
/// Dirichlet-multinomial with parameters `alpha * tau_k`.
pub fn hdp(state: &State, topics: &[usize], tau: impl Fn(usize) -> f64, alpha: f64, beta: f64) -> f64 {
    let ln_alpha = ln_gamma(alpha);
    let prior: Vec<(usize, f64, f64)> = topics
        .iter()
        .map(|&k| {
            let a = alpha * tau(k);
            (k, a, ln_gamma(a))
        })
        .collect();
    let author: f64 = state
        .counts()
        .n_jk
        .iter()
        .zip(&state.counts().n_j_dot)
        .map(|(row, &nj)| {
            let cells: f64 = prior
                .iter()
                .filter(|(k, _, _)| row[*k] > 0)
                .map(|&(k, a, ln_a)| ln_gamma(row[k] as f64 + a) - ln_a)
                .sum();
            ln_alpha - ln_gamma(nj as f64 + alpha) + cells
        })
        .sum();
    author + topic_term_part(state, topics, beta)
}
