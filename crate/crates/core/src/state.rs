//! Markov chain state shared by both samplers: per-token assignments plus the
//! four count tables derived from them.
//!
//! Topic labels index rows of the topic-dimensioned tables directly. The
//! parametric sampler uses labels `0..K`; the HDP sampler grows the tables on
//! demand and recycles labels of retired topics.
//!
//! Excluding the current token from the counts is done by `decrement`, then
//! sampling, then `increment`.

use rand::Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    /// `n_jk[j][k]`: tokens attributed to author `j` with topic `k`.
    pub n_jk: Vec<Vec<u32>>,
    /// `n_kt[k][t]`: tokens of term `t` with topic `k`.
    pub n_kt: Vec<Vec<u32>>,
    pub n_j_dot: Vec<u32>,
    pub n_k_dot: Vec<u32>,
}

impl CountTables {
    fn zeros(authors: usize, topics: usize, terms: usize) -> Self {
        Self {
            n_jk: vec![vec![0; topics]; authors],
            n_kt: vec![vec![0; terms]; topics],
            n_j_dot: vec![0; authors],
            n_k_dot: vec![0; topics],
        }
    }

    pub fn num_topic_slots(&self) -> usize {
        self.n_k_dot.len()
    }

    fn grow_topics(&mut self, slots: usize, terms: usize) {
        if slots <= self.n_k_dot.len() {
            return;
        }
        for row in &mut self.n_jk {
            row.resize(slots, 0);
        }
        self.n_kt.resize_with(slots, || vec![0; terms]);
        self.n_k_dot.resize(slots, 0);
    }
}

/// Assignments `z` (topic) and `x` (author) for every token, plus counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    z: Vec<usize>,
    x: Vec<usize>,
    offsets: Vec<usize>,
    num_terms: usize,
    counts: CountTables,
}

/// One mismatch between an incrementally maintained table and a recount.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub table: &'static str,
    pub cell: String,
    pub stored: i64,
    pub recomputed: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditReport {
    pub discrepancies: Vec<Discrepancy>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

fn offsets_of(corpus: &Corpus) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(corpus.num_docs() + 1);
    let mut acc = 0;
    offsets.push(0);
    for doc in corpus.documents() {
        acc += doc.len();
        offsets.push(acc);
    }
    offsets
}

impl State {
    /// Assigns every token a topic uniformly from `topics` and an author
    /// uniformly from its document's authors.
    pub fn init<R: Rng + ?Sized>(corpus: &Corpus, topics: &[usize], rng: &mut R) -> Result<State> {
        if topics.is_empty() {
            return Err(Error::InvalidArgument("initial topic set is empty".into()));
        }
        let n = corpus.num_tokens();
        let mut z = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        for doc in corpus.documents() {
            for _ in 0..doc.len() {
                z.push(topics[rng.random_range(0..topics.len())]);
                x.push(doc.authors[rng.random_range(0..doc.authors.len())]);
            }
        }
        let slots = topics.iter().max().map_or(0, |m| m + 1);
        State::from_assignments(corpus, z, x, slots)
    }

    /// Rebuilds a state (and its count tables) from raw assignments.
    pub fn from_assignments(
        corpus: &Corpus,
        z: Vec<usize>,
        x: Vec<usize>,
        topic_slots: usize,
    ) -> Result<State> {
        let n = corpus.num_tokens();
        if z.len() != n || x.len() != n {
            return Err(Error::InvalidArgument(format!(
                "assignment length mismatch: corpus has {n} tokens, got z={} x={}",
                z.len(),
                x.len()
            )));
        }
        let slots = z.iter().max().map_or(topic_slots, |&m| topic_slots.max(m + 1));
        let mut state = State {
            offsets: offsets_of(corpus),
            num_terms: corpus.num_terms(),
            counts: CountTables::zeros(corpus.num_authors(), slots, corpus.num_terms()),
            z,
            x,
        };
        for (d, doc) in corpus.documents().iter().enumerate() {
            for (i, &t) in doc.tokens.iter().enumerate() {
                let p = state.offsets[d] + i;
                let (k, j) = (state.z[p], state.x[p]);
                if !doc.authors.contains(&j) {
                    return Err(Error::InvalidArgument(format!(
                        "token ({d},{i}) assigned to author {j} not in document {:?}",
                        doc.id
                    )));
                }
                state.counts.n_jk[j][k] += 1;
                state.counts.n_kt[k][t] += 1;
                state.counts.n_j_dot[j] += 1;
                state.counts.n_k_dot[k] += 1;
            }
        }
        Ok(state)
    }

    #[inline]
    fn pos(&self, d: usize, i: usize) -> usize {
        self.offsets[d] + i
    }

    pub fn topic(&self, d: usize, i: usize) -> usize {
        self.z[self.pos(d, i)]
    }

    pub fn author(&self, d: usize, i: usize) -> usize {
        self.x[self.pos(d, i)]
    }

    /// Flat topic assignments in document order.
    pub fn z(&self) -> &[usize] {
        &self.z
    }

    /// Flat author assignments in document order.
    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn counts(&self) -> &CountTables {
        &self.counts
    }

    /// Direct mutable access to the tables, bypassing every invariant. Only
    /// meant for fault-injection tests of [`State::audit`].
    #[doc(hidden)]
    pub fn counts_mut(&mut self) -> &mut CountTables {
        &mut self.counts
    }

    pub fn num_terms(&self) -> usize {
        self.num_terms
    }

    pub fn num_topic_slots(&self) -> usize {
        self.counts.num_topic_slots()
    }

    pub fn n_jk(&self, j: usize, k: usize) -> u32 {
        self.counts.n_jk[j][k]
    }

    pub fn n_kt(&self, k: usize, t: usize) -> u32 {
        self.counts.n_kt[k][t]
    }

    pub fn n_j_dot(&self, j: usize) -> u32 {
        self.counts.n_j_dot[j]
    }

    pub fn n_k_dot(&self, k: usize) -> u32 {
        self.counts.n_k_dot[k]
    }

    /// Makes room for topic labels `< slots`.
    pub fn ensure_topic_slots(&mut self, slots: usize) {
        self.counts.grow_topics(slots, self.num_terms);
    }

    /// Zeroes every count of topic `k`. The topic must be empty already;
    /// anything else means the caller's bookkeeping is broken.
    pub fn clear_topic(&mut self, k: usize) -> Result<()> {
        if self.counts.n_k_dot[k] != 0 {
            return Err(Error::InvalidArgument(format!(
                "cannot clear topic {k} with {} tokens",
                self.counts.n_k_dot[k]
            )));
        }
        self.counts.n_kt[k].iter_mut().for_each(|c| *c = 0);
        for row in &mut self.counts.n_jk {
            row[k] = 0;
        }
        Ok(())
    }

    /// Removes token `(d, i)` from the counts and returns its previous
    /// `(topic, author)`.
    pub fn decrement(&mut self, corpus: &Corpus, d: usize, i: usize) -> Result<(usize, usize)> {
        let p = self.pos(d, i);
        let t = corpus.document(d).tokens[i];
        let (k, j) = (self.z[p], self.x[p]);
        let c = &mut self.counts;
        fn dec(cell: &mut u32, table: &'static str, at: impl FnOnce() -> String) -> Result<()> {
            *cell = cell
                .checked_sub(1)
                .ok_or_else(|| Error::Underflow { table, cell: at() })?;
            Ok(())
        }
        dec(&mut c.n_jk[j][k], "n_jk", || format!("[{j},{k}]"))?;
        dec(&mut c.n_kt[k][t], "n_kt", || format!("[{k},{t}]"))?;
        dec(&mut c.n_j_dot[j], "n_j_dot", || format!("[{j}]"))?;
        dec(&mut c.n_k_dot[k], "n_k_dot", || format!("[{k}]"))?;
        Ok((k, j))
    }

    /// Assigns token `(d, i)` to topic `k` and author `j` and counts it.
    pub fn increment(&mut self, corpus: &Corpus, d: usize, i: usize, k: usize, j: usize) -> Result<()> {
        let doc = corpus.document(d);
        if !doc.authors.contains(&j) {
            return Err(Error::InvalidArgument(format!(
                "author {j} is not an author of document {:?}",
                doc.id
            )));
        }
        if k >= self.num_topic_slots() {
            return Err(Error::OutOfRange {
                kind: "topic",
                index: k,
                size: self.num_topic_slots(),
            });
        }
        let t = doc.tokens[i];
        let p = self.pos(d, i);
        self.z[p] = k;
        self.x[p] = j;
        let c = &mut self.counts;
        c.n_jk[j][k] += 1;
        c.n_kt[k][t] += 1;
        c.n_j_dot[j] += 1;
        c.n_k_dot[k] += 1;
        Ok(())
    }

    /// Recounts every table from the raw assignments and lists every cell
    /// that differs from the incrementally maintained tables, plus any token
    /// assigned to an author outside its document.
    pub fn audit(&self, corpus: &Corpus) -> AuditReport {
        let mut report = AuditReport::default();
        let slots = self
            .z
            .iter()
            .max()
            .map_or(self.num_topic_slots(), |&m| self.num_topic_slots().max(m + 1));
        let mut fresh = CountTables::zeros(corpus.num_authors(), slots, corpus.num_terms());
        for (d, doc) in corpus.documents().iter().enumerate() {
            for (i, &t) in doc.tokens.iter().enumerate() {
                let p = self.pos(d, i);
                let (k, j) = (self.z[p], self.x[p]);
                if !doc.authors.contains(&j) {
                    report.discrepancies.push(Discrepancy {
                        table: "x",
                        cell: format!("({d},{i})"),
                        stored: j as i64,
                        recomputed: -1,
                    });
                }
                fresh.n_jk[j][k] += 1;
                fresh.n_kt[k][t] += 1;
                fresh.n_j_dot[j] += 1;
                fresh.n_k_dot[k] += 1;
            }
        }
        let stored = |v: Option<&u32>| v.map_or(0, |&c| c as i64);
        let mut check = |table: &'static str, cell: String, s: i64, r: u32| {
            if s != r as i64 {
                report.discrepancies.push(Discrepancy {
                    table,
                    cell,
                    stored: s,
                    recomputed: r as i64,
                });
            }
        };
        for (j, row) in fresh.n_jk.iter().enumerate() {
            for (k, &r) in row.iter().enumerate() {
                let s = stored(self.counts.n_jk.get(j).and_then(|row| row.get(k)));
                check("n_jk", format!("[{j},{k}]"), s, r);
            }
        }
        for (k, row) in fresh.n_kt.iter().enumerate() {
            for (t, &r) in row.iter().enumerate() {
                let s = stored(self.counts.n_kt.get(k).and_then(|row| row.get(t)));
                check("n_kt", format!("[{k},{t}]"), s, r);
            }
        }
        for (j, &r) in fresh.n_j_dot.iter().enumerate() {
            check("n_j_dot", format!("[{j}]"), stored(self.counts.n_j_dot.get(j)), r);
        }
        for (k, &r) in fresh.n_k_dot.iter().enumerate() {
            check("n_k_dot", format!("[{k}]"), stored(self.counts.n_k_dot.get(k)), r);
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{IngestionOptions, Record};
    use crate::rng::seeded;

    fn corpus() -> Corpus {
        let records = vec![
            Record::new("d1", ["a"], ["x y"]),
            Record::new("d2", ["a", "b"], ["y z"]),
            Record::new("d3", ["c"], ["z z x"]),
        ];
        Corpus::from_records(records, IngestionOptions::default()).unwrap().0
    }

    #[test]
    fn single_topic_forces_assignment() {
        let c = corpus();
        let s = State::init(&c, &[0], &mut seeded(3)).unwrap();
        assert!(s.z().iter().all(|&k| k == 0));
        assert_eq!(s.n_k_dot(0) as usize, c.num_tokens());
    }

    #[test]
    fn single_author_forces_assignment() {
        let c = corpus();
        let s = State::init(&c, &[0, 1, 2], &mut seeded(11)).unwrap();
        for i in 0..3 {
            assert_eq!(s.author(2, i), 2);
        }
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let c = corpus();
        let a = State::init(&c, &[0, 1, 2], &mut seeded(5)).unwrap();
        let b = State::init(&c, &[0, 1, 2], &mut seeded(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_topic_set_rejected() {
        assert!(State::init(&corpus(), &[], &mut seeded(0)).is_err());
    }

    #[test]
    fn decrement_increment_is_identity() {
        let c = corpus();
        let mut s = State::init(&c, &[0, 1], &mut seeded(9)).unwrap();
        let before = s.clone();
        let (k, j) = s.decrement(&c, 1, 1).unwrap();
        s.increment(&c, 1, 1, k, j).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn decrement_unit_count_reaches_zero() {
        let c = corpus();
        let mut s = State::init(&c, &[0], &mut seeded(1)).unwrap();
        // term "x" (index 0) appears twice; move one occurrence to topic 1 first
        s.ensure_topic_slots(2);
        let (_, j) = s.decrement(&c, 0, 0).unwrap();
        s.increment(&c, 0, 0, 1, j).unwrap();
        assert_eq!(s.n_kt(1, 0), 1);
        s.decrement(&c, 0, 0).unwrap();
        assert_eq!(s.n_kt(1, 0), 0);
        assert_eq!(s.n_k_dot(1), 0);
    }

    #[test]
    fn increment_outside_author_set_fails() {
        let c = corpus();
        let mut s = State::init(&c, &[0], &mut seeded(1)).unwrap();
        s.decrement(&c, 0, 0).unwrap();
        assert!(s.increment(&c, 0, 0, 0, 2).is_err());
    }

    #[test]
    fn double_decrement_underflows() {
        let c = corpus();
        let mut s = State::init(&c, &[0], &mut seeded(1)).unwrap();
        s.decrement(&c, 0, 0).unwrap();
        // the assignment still points at (0, a); counts for "x" under topic 0
        // now hold only the occurrence in d3
        s.decrement(&c, 0, 0).unwrap();
        assert!(matches!(s.decrement(&c, 0, 0), Err(Error::Underflow { .. })));
    }

    #[test]
    fn audit_detects_single_corruption() {
        let c = corpus();
        let mut s = State::init(&c, &[0, 1], &mut seeded(2)).unwrap();
        assert!(s.audit(&c).is_clean());
        s.counts_mut().n_kt[1][2] += 1;
        let report = s.audit(&c);
        assert_eq!(report.discrepancies.len(), 1);
        assert_eq!(report.discrepancies[0].table, "n_kt");
        assert_eq!(report.discrepancies[0].cell, "[1,2]");
    }

    #[test]
    fn marginals_hold() {
        let c = corpus();
        let s = State::init(&c, &[0, 1, 2], &mut seeded(4)).unwrap();
        let t = s.counts();
        for (j, row) in t.n_jk.iter().enumerate() {
            assert_eq!(row.iter().sum::<u32>(), t.n_j_dot[j]);
        }
        for (k, row) in t.n_kt.iter().enumerate() {
            assert_eq!(row.iter().sum::<u32>(), t.n_k_dot[k]);
        }
        assert_eq!(t.n_j_dot.iter().sum::<u32>() as usize, c.num_tokens());
        assert_eq!(t.n_k_dot.iter().sum::<u32>() as usize, c.num_tokens());
    }
}
