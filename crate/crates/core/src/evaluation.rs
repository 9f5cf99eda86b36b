//! Perplexity and human/machine-readable topic reports.
//!
//! The held-out predictive uses point estimates of `θ` and `φ` from a single
//! state:
//!
//! ```text
//! p(w) = 1/|j_d| Σ_{j ∈ j_d} Σ_k θ_jk φ_kw
//! perplexity = exp(-Σ log p(w) / N_eval)
//! ```
//!
//! Tokens whose term is not in the training vocabulary are skipped and
//! counted.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Record};
use crate::error::{Error, Result};

/// A held-out document mapped into a training corpus' index space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeldOutDocument {
    pub id: String,
    /// `None` for out-of-vocabulary tokens.
    pub tokens: Vec<Option<usize>>,
    pub authors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeldOut {
    pub documents: Vec<HeldOutDocument>,
}

impl HeldOut {
    /// Maps records onto the training vocabulary and author list. Unknown
    /// authors are an error; unknown terms become skipped tokens. Documents
    /// without tokens are dropped before author lookup, as in training.
    pub fn map(records: &[Record], training: &Corpus) -> Result<HeldOut> {
        if records.is_empty() {
            return Err(Error::EmptyCorpus { dropped: 0 });
        }
        let mut documents = Vec::with_capacity(records.len());
        for r in records {
            if r.authors.is_empty() {
                return Err(Error::InvalidRecord {
                    id: r.id.clone(),
                    message: "empty author list".into(),
                });
            }
            if r.tokens.iter().all(|t| t.split_whitespace().next().is_none()) {
                continue;
            }
            let mut authors = Vec::with_capacity(r.authors.len());
            for a in &r.authors {
                let j = training
                    .author_index(a)
                    .ok_or_else(|| Error::UnknownAuthor(a.clone()))?;
                if authors.contains(&j) {
                    return Err(Error::InvalidRecord {
                        id: r.id.clone(),
                        message: format!("duplicate author {a:?}"),
                    });
                }
                authors.push(j);
            }
            let tokens = r
                .tokens
                .iter()
                .flat_map(|t| t.split_whitespace())
                .map(|w| training.term_index(w))
                .collect();
            documents.push(HeldOutDocument {
                id: r.id.clone(),
                tokens,
                authors,
            });
        }
        Ok(HeldOut { documents })
    }

    /// Evaluates a corpus on itself.
    pub fn from_corpus(corpus: &Corpus) -> HeldOut {
        HeldOut {
            documents: corpus
                .documents()
                .iter()
                .map(|d| HeldOutDocument {
                    id: d.id.clone(),
                    tokens: d.tokens.iter().map(|&t| Some(t)).collect(),
                    authors: d.authors.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perplexity {
    pub perplexity: f64,
    pub evaluated_tokens: usize,
    pub skipped_tokens: usize,
}

/// Neumaier-compensated running sum; keeps the uniform-model perplexity at
/// `V` to the last bit or two over long corpora.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `theta` is `J × K`, `phi` is `K × V`.
pub fn perplexity(heldout: &HeldOut, theta: &[Vec<f64>], phi: &[Vec<f64>]) -> Result<Perplexity> {
    let mut log_sum = CompensatedSum::default();
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for doc in &heldout.documents {
        let share = 1.0 / doc.authors.len() as f64;
        for tok in &doc.tokens {
            let Some(t) = *tok else {
                skipped += 1;
                continue;
            };
            let p: f64 = doc
                .authors
                .iter()
                .map(|&j| {
                    theta[j]
                        .iter()
                        .zip(phi)
                        .map(|(th, row)| th * row[t])
                        .sum::<f64>()
                })
                .sum::<f64>()
                * share;
            log_sum.add(p.ln());
            evaluated += 1;
        }
    }
    if evaluated == 0 {
        return Err(Error::NoEvaluableTokens { skipped });
    }
    Ok(Perplexity {
        perplexity: (-log_sum.value() / evaluated as f64).exp(),
        evaluated_tokens: evaluated,
        skipped_tokens: skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub index: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    /// Position in the report, 0 for the largest topic.
    pub display: usize,
    /// Internal topic label.
    pub label: usize,
    pub tokens: u64,
    pub top_terms: Vec<TermWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWeight {
    pub display: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorSummary {
    pub author: String,
    pub tokens: u64,
    pub top_topics: Vec<TopicWeight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub topics: Vec<TopicSummary>,
    pub authors: Vec<AuthorSummary>,
}

/// Inputs to [`topic_report`]: point estimates plus the counts that order
/// the topics.
pub struct ReportInput<'a> {
    pub corpus: &'a Corpus,
    /// Topic labels, aligned with the first rows of `phi` / columns of `theta`.
    pub labels: &'a [usize],
    pub topic_tokens: &'a [u64],
    pub author_tokens: &'a [u64],
    pub theta: &'a [Vec<f64>],
    pub phi: &'a [Vec<f64>],
}

/// Indices of `values` sorted by value descending, ties by index ascending,
/// truncated to `n`.
fn top_indices(values: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

pub fn topic_report(input: &ReportInput<'_>, top_n: usize) -> Result<TopicReport> {
    if top_n == 0 {
        return Err(Error::InvalidArgument("top_n must be at least 1".into()));
    }
    let k = input.labels.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        input.topic_tokens[b]
            .cmp(&input.topic_tokens[a])
            .then(input.labels[a].cmp(&input.labels[b]))
    });
    let vocab = input.corpus.vocabulary();
    let topics = order
        .iter()
        .enumerate()
        .map(|(display, &col)| TopicSummary {
            display,
            label: input.labels[col],
            tokens: input.topic_tokens[col],
            top_terms: top_indices(&input.phi[col], top_n)
                .into_iter()
                .map(|t| TermWeight {
                    term: vocab.terms()[t].clone(),
                    index: t,
                    probability: input.phi[col][t],
                })
                .collect(),
        })
        .collect();
    let authors = input
        .corpus
        .authors()
        .terms()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            // rank by display index on ties so the order is label-free
            let row: Vec<f64> = order.iter().map(|&col| input.theta[j][col]).collect();
            AuthorSummary {
                author: name.clone(),
                tokens: input.author_tokens[j],
                top_topics: top_indices(&row, top_n)
                    .into_iter()
                    .map(|display| TopicWeight {
                        display,
                        probability: row[display],
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(TopicReport { topics, authors })
}

impl TopicReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let term_width = self
            .topics
            .iter()
            .flat_map(|t| t.top_terms.iter().map(|w| w.term.chars().count()))
            .max()
            .unwrap_or(4)
            .max(4);
        for topic in &self.topics {
            let _ = writeln!(
                out,
                "topic {:>3}  (label {}, {} tokens)",
                topic.display, topic.label, topic.tokens
            );
            for w in &topic.top_terms {
                let _ = writeln!(out, "    {:<term_width$}  {:.6}", w.term, w.probability);
            }
        }
        let author_width = self
            .authors
            .iter()
            .map(|a| a.author.chars().count())
            .max()
            .unwrap_or(6)
            .max(6);
        let _ = writeln!(out);
        for a in &self.authors {
            let topics: Vec<String> = a
                .top_topics
                .iter()
                .map(|t| format!("{:>3}:{:.4}", t.display, t.probability))
                .collect();
            let _ = writeln!(
                out,
                "{:<author_width$}  {:>7}  {}",
                a.author,
                a.tokens,
                topics.join("  ")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{IngestionOptions, Record};

    fn corpus() -> Corpus {
        let records = vec![
            Record::new("d1", ["a"], ["x y x x"]),
            Record::new("d2", ["a", "b"], ["y z w x"]),
        ];
        Corpus::from_records(records, IngestionOptions::default()).unwrap().0
    }

    #[test]
    fn uniform_predictive_gives_v() {
        let c = corpus();
        let v = c.num_terms();
        let k = 3;
        let theta = vec![vec![1.0 / k as f64; k]; c.num_authors()];
        let phi = vec![vec![1.0 / v as f64; v]; k];
        let p = perplexity(&HeldOut::from_corpus(&c), &theta, &phi).unwrap();
        assert!((p.perplexity - v as f64).abs() < 1e-12);
        assert_eq!(p.evaluated_tokens, 8);
    }

    #[test]
    fn unigram_model_gives_exp_entropy() {
        let c = corpus();
        let v = c.num_terms();
        let mut freq = vec![0.0; v];
        for d in c.documents() {
            for &t in &d.tokens {
                freq[t] += 1.0;
            }
        }
        let n: f64 = freq.iter().sum();
        freq.iter_mut().for_each(|f| *f /= n);
        let entropy: f64 = -freq.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
        let theta = vec![vec![1.0]; c.num_authors()];
        let p = perplexity(&HeldOut::from_corpus(&c), &theta, &[freq]).unwrap();
        assert!((p.perplexity - entropy.exp()).abs() < 1e-12);
    }

    #[test]
    fn oov_tokens_skipped_and_all_oov_rejected() {
        let c = corpus();
        let v = c.num_terms();
        let theta = vec![vec![1.0]; c.num_authors()];
        let phi = vec![vec![1.0 / v as f64; v]];
        let recs = vec![Record::new("h", ["b"], ["x unseen y"])];
        let h = HeldOut::map(&recs, &c).unwrap();
        let p = perplexity(&h, &theta, &phi).unwrap();
        assert_eq!((p.evaluated_tokens, p.skipped_tokens), (2, 1));

        let all_oov = HeldOut::map(&[Record::new("h", ["a"], ["q r"])], &c).unwrap();
        assert!(matches!(
            perplexity(&all_oov, &theta, &phi),
            Err(Error::NoEvaluableTokens { skipped: 2 })
        ));
    }

    #[test]
    fn unknown_author_rejected() {
        let c = corpus();
        let recs = vec![Record::new("h", ["zed"], ["x"])];
        assert!(matches!(HeldOut::map(&recs, &c), Err(Error::UnknownAuthor(_))));
        assert!(HeldOut::map(&[], &c).is_err());
    }

    #[test]
    fn document_order_does_not_matter() {
        let c = corpus();
        let theta = vec![vec![0.3, 0.7], vec![0.9, 0.1]];
        let phi = vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.4, 0.4, 0.1, 0.1]];
        let forward = HeldOut::from_corpus(&c);
        let mut reversed = forward.clone();
        reversed.documents.reverse();
        let a = perplexity(&forward, &theta, &phi).unwrap().perplexity;
        let b = perplexity(&reversed, &theta, &phi).unwrap().perplexity;
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn report_orders_and_truncates() {
        let c = corpus();
        // x=0 y=1 z=2 w=3
        let phi = vec![vec![0.1, 0.4, 0.4, 0.1], vec![0.7, 0.1, 0.1, 0.1]];
        let theta = vec![vec![0.2, 0.8], vec![0.5, 0.5]];
        let input = ReportInput {
            corpus: &c,
            labels: &[4, 9],
            topic_tokens: &[3, 5],
            author_tokens: &[6, 2],
            theta: &theta,
            phi: &phi,
        };
        let r = topic_report(&input, 10).unwrap();
        assert_eq!(r.topics[0].label, 9);
        assert_eq!(r.topics[0].top_terms[0].term, "x");
        assert_eq!(r.topics[0].top_terms.len(), 4);
        // tie between y and z broken by term index
        let names: Vec<&str> = r.topics[1].top_terms.iter().map(|w| w.term.as_str()).collect();
        assert_eq!(names, ["y", "z", "x", "w"]);
        assert_eq!(r.authors[0].top_topics[0].display, 0);
        assert!((r.authors[0].top_topics[0].probability - 0.8).abs() < 1e-15);
        // author b: equal weights, lower display first
        assert_eq!(r.authors[1].top_topics[0].display, 0);
        assert_eq!(topic_report(&input, 10).unwrap().to_json(), r.to_json());
        assert!(topic_report(&input, 0).is_err());
        assert!(r.to_text().contains("topic   0"));
    }
}
