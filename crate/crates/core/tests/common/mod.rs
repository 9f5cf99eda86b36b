#![allow(dead_code)]

use authortopic::{Corpus, Document};
use rand::Rng;

/// A random corpus: every document has 1–3 distinct authors and 1–`max_len`
/// tokens drawn uniformly from `vocab` terms.
pub fn random_corpus<R: Rng>(rng: &mut R, docs: usize, vocab: usize, authors: usize, max_len: usize) -> Corpus {
    let documents = (0..docs)
        .map(|d| {
            let n_auth = rng.random_range(1..=authors.min(3));
            let mut a: Vec<usize> = Vec::new();
            while a.len() < n_auth {
                let j = rng.random_range(0..authors);
                if !a.contains(&j) {
                    a.push(j);
                }
            }
            let len = rng.random_range(1..=max_len);
            Document {
                id: format!("doc{d}"),
                tokens: (0..len).map(|_| rng.random_range(0..vocab)).collect(),
                authors: a,
            }
        })
        .collect();
    Corpus::from_indexed(
        (0..vocab).map(|t| format!("w{t}")).collect(),
        (0..authors).map(|j| format!("author{j}")).collect(),
        documents,
    )
    .expect("generated corpus is valid")
}
