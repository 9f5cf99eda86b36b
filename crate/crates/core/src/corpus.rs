//! Corpus ingestion and the immutable document/author/term view used by the
//! samplers.
//!
//! The on-disk format is UTF-8 JSON Lines with exactly three keys per record:
//!
//! ```text
//! {"id": "doc-1", "authors": ["a", "b"], "tokens": ["x", "y", "z"]}
//! ```
//!
//! Token strings are split on whitespace, so `["x y"]` and `["x", "y"]` are
//! the same document. Terms and authors are indexed in order of first
//! occurrence.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of distinct strings with a reverse index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `term`, inserting it at the end if unseen.
    pub fn intern(&mut self, term: &str) -> usize {
        if let Some(&i) = self.index.get(term) {
            return i;
        }
        let i = self.terms.len();
        self.terms.push(term.to_owned());
        self.index.insert(term.to_owned(), i);
        i
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

impl From<Vec<String>> for Vocabulary {
    fn from(terms: Vec<String>) -> Self {
        let mut v = Vocabulary::new();
        for t in &terms {
            v.intern(t);
        }
        v
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.terms
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    /// Term indices into the corpus vocabulary.
    pub tokens: Vec<usize>,
    /// Distinct author indices, never empty.
    pub authors: Vec<usize>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IngestionOptions {
    /// Drop documents without tokens instead of failing on them.
    pub drop_empty: bool,
}

impl Default for IngestionOptions {
    fn default() -> Self {
        Self { drop_empty: true }
    }
}

/// What happened during ingestion besides the corpus itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub dropped_empty: usize,
}

/// One input record, exactly as it appears on a line of the corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub id: String,
    pub authors: Vec<String>,
    pub tokens: Vec<String>,
}

impl Record {
    pub fn new<A, T>(id: &str, authors: A, tokens: T) -> Self
    where
        A: IntoIterator,
        A::Item: Into<String>,
        T: IntoIterator,
        T::Item: Into<String>,
    {
        Record {
            id: id.to_owned(),
            authors: authors.into_iter().map(Into::into).collect(),
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }
}

/// Immutable tokenized corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    authors: Vocabulary,
    #[serde(skip)]
    total_tokens: usize,
}

impl Corpus {
    /// Builds a corpus from parsed records, validating every invariant.
    pub fn from_records<I>(records: I, options: IngestionOptions) -> Result<(Corpus, LoadReport)>
    where
        I: IntoIterator<Item = Record>,
    {
        let mut builder = Builder::default();
        for record in records {
            builder.push(record, options)?;
        }
        builder.finish()
    }

    /// Builds a corpus from already-indexed documents. Used by the oracles,
    /// which generate data directly in index space.
    pub fn from_indexed(
        terms: Vec<String>,
        author_names: Vec<String>,
        documents: Vec<Document>,
    ) -> Result<Corpus> {
        let vocabulary = Vocabulary::from(terms);
        let authors = Vocabulary::from(author_names);
        let corpus = Corpus {
            total_tokens: documents.iter().map(Document::len).sum(),
            documents,
            vocabulary,
            authors,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.documents.is_empty() {
            return Err(Error::EmptyCorpus { dropped: 0 });
        }
        let v = self.vocabulary.len();
        let j = self.authors.len();
        for doc in &self.documents {
            let bad = |message: String| Error::InvalidRecord {
                id: doc.id.clone(),
                message,
            };
            if doc.tokens.is_empty() {
                return Err(bad("document has no tokens".into()));
            }
            if doc.authors.is_empty() {
                return Err(bad("empty author list".into()));
            }
            let mut seen = HashSet::new();
            for &a in &doc.authors {
                if a >= j {
                    return Err(bad(format!("author index {a} out of range ({j})")));
                }
                if !seen.insert(a) {
                    return Err(bad(format!("duplicate author index {a}")));
                }
            }
            if let Some(&t) = doc.tokens.iter().find(|&&t| t >= v) {
                return Err(bad(format!("term index {t} out of range ({v})")));
            }
        }
        Ok(())
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, d: usize) -> &Document {
        &self.documents[d]
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn authors(&self) -> &Vocabulary {
        &self.authors
    }

    /// Number of documents, `D`.
    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }

    /// Vocabulary size, `V`.
    pub fn num_terms(&self) -> usize {
        self.vocabulary.len()
    }

    /// Number of distinct authors, `J`.
    pub fn num_authors(&self) -> usize {
        self.authors.len()
    }

    /// Total token count, `N`.
    pub fn num_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn term_of(&self, index: usize) -> Result<&str> {
        self.vocabulary.get(index).ok_or(Error::OutOfRange {
            kind: "term",
            index,
            size: self.vocabulary.len(),
        })
    }

    pub fn author_of(&self, index: usize) -> Result<&str> {
        self.authors.get(index).ok_or(Error::OutOfRange {
            kind: "author",
            index,
            size: self.authors.len(),
        })
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.vocabulary.index_of(term)
    }

    pub fn author_index(&self, author: &str) -> Option<usize> {
        self.authors.index_of(author)
    }

    /// Recomputes fields skipped during deserialization.
    pub(crate) fn rehydrate(mut self) -> Result<Corpus> {
        self.total_tokens = self.documents.iter().map(Document::len).sum();
        self.validate()?;
        Ok(self)
    }

    /// Writes the corpus back out in the JSON Lines ingestion format.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            let record = Record {
                id: doc.id.clone(),
                authors: doc
                    .authors
                    .iter()
                    .map(|&a| self.authors.terms()[a].clone())
                    .collect(),
                tokens: doc
                    .tokens
                    .iter()
                    .map(|&t| self.vocabulary.terms()[t].clone())
                    .collect(),
            };
            out.push_str(&serde_json::to_string(&record).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

#[derive(Default)]
struct Builder {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    authors: Vocabulary,
    report: LoadReport,
}

impl Builder {
    fn push(&mut self, record: Record, options: IngestionOptions) -> Result<()> {
        if record.authors.is_empty() {
            return Err(Error::InvalidRecord {
                id: record.id,
                message: "empty author list".into(),
            });
        }
        let mut seen = HashSet::new();
        for a in &record.authors {
            if !seen.insert(a.as_str()) {
                return Err(Error::InvalidRecord {
                    id: record.id.clone(),
                    message: format!("duplicate author {a:?}"),
                });
            }
        }
        let words: Vec<&str> = record
            .tokens
            .iter()
            .flat_map(|t| t.split_whitespace())
            .collect();
        if words.is_empty() {
            if options.drop_empty {
                self.report.dropped_empty += 1;
                return Ok(());
            }
            return Err(Error::InvalidRecord {
                id: record.id,
                message: "document has no tokens".into(),
            });
        }
        // Authors of dropped documents are never interned, so J only counts
        // authors that own at least one token.
        let authors = record.authors.iter().map(|a| self.authors.intern(a)).collect();
        let tokens = words.iter().map(|w| self.vocabulary.intern(w)).collect();
        self.documents.push(Document {
            id: record.id,
            tokens,
            authors,
        });
        Ok(())
    }

    fn finish(self) -> Result<(Corpus, LoadReport)> {
        if self.documents.is_empty() {
            return Err(Error::EmptyCorpus {
                dropped: self.report.dropped_empty,
            });
        }
        let total_tokens = self.documents.iter().map(Document::len).sum();
        Ok((
            Corpus {
                documents: self.documents,
                vocabulary: self.vocabulary,
                authors: self.authors,
                total_tokens,
            },
            self.report,
        ))
    }
}

/// Parses JSON Lines text. Blank lines are ignored; line numbers are 1-based.
pub fn parse_records(text: &str) -> Result<Vec<Record>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(n, line)| {
            serde_json::from_str::<Record>(line).map_err(|e| Error::MalformedLine {
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_corpus(path: impl AsRef<Path>, options: IngestionOptions) -> Result<(Corpus, LoadReport)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str::<Record>(&line).map_err(|e| Error::MalformedLine {
            line: n + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    let (corpus, report) = Corpus::from_records(records, options)?;
    if report.dropped_empty > 0 {
        log::warn!(
            "{}: dropped {} empty documents",
            path.display(),
            report.dropped_empty
        );
    }
    Ok((corpus, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_docs() -> Corpus {
        let records = vec![
            Record::new("d1", ["a"], ["x y"]),
            Record::new("d2", ["a", "b"], ["y z"]),
        ];
        Corpus::from_records(records, IngestionOptions::default()).unwrap().0
    }

    #[test]
    fn counts_distinct_items() {
        let c = two_docs();
        assert_eq!(c.num_docs(), 2);
        assert_eq!(c.num_authors(), 2);
        assert_eq!(c.num_terms(), 3);
        assert_eq!(c.num_tokens(), 4);
    }

    #[test]
    fn first_occurrence_order() {
        let c = two_docs();
        assert_eq!(c.term_of(0).unwrap(), "x");
        assert_eq!(c.author_of(1).unwrap(), "b");
        assert!(matches!(
            c.term_of(3),
            Err(Error::OutOfRange { kind: "term", index: 3, size: 3 })
        ));
        assert!(c.author_of(2).is_err());
    }

    #[test]
    fn empty_document_dropped_or_rejected() {
        let recs = vec![
            Record::new("full", ["a"], ["x"]),
            Record::new("empty", ["a"], Vec::<String>::new()),
        ];
        let (c, report) = Corpus::from_records(recs.clone(), IngestionOptions::default()).unwrap();
        assert_eq!(report.dropped_empty, 1);
        assert_eq!(c.num_docs(), 1);

        let err = Corpus::from_records(recs, IngestionOptions { drop_empty: false }).unwrap_err();
        assert!(matches!(err, Error::InvalidRecord { ref id, .. } if id == "empty"));

        let only_empty = vec![Record::new("e", ["a"], Vec::<String>::new())];
        let err = Corpus::from_records(only_empty, IngestionOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus { dropped: 1 }));
    }

    #[test]
    fn duplicate_author_names_record() {
        let recs = vec![Record::new("dup", ["a", "a"], ["x"])];
        let err = Corpus::from_records(recs, IngestionOptions::default()).unwrap_err();
        match err {
            Error::InvalidRecord { id, message } => {
                assert_eq!(id, "dup");
                assert!(message.contains("duplicate"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_author_list_is_hard_error() {
        let recs = vec![Record::new("noauth", Vec::<String>::new(), ["x"])];
        assert!(Corpus::from_records(recs, IngestionOptions::default()).is_err());
    }

    #[test]
    fn malformed_lines_report_line_number() {
        let text = "{\"id\":\"a\",\"authors\":[\"x\"],\"tokens\":[\"t\"]}\n\nnot json\n";
        match parse_records(text) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let unknown = "{\"id\":\"a\",\"authors\":[\"x\"],\"tokens\":[],\"tokns\":[]}";
        assert!(matches!(
            parse_records(unknown),
            Err(Error::MalformedLine { line: 1, .. })
        ));
        let missing = "{\"id\":\"a\",\"authors\":[\"x\"]}";
        assert!(parse_records(missing).is_err());
    }

    #[test]
    fn jsonl_round_trip_preserves_indices() {
        let c = two_docs();
        let recs = parse_records(&c.to_jsonl()).unwrap();
        let (again, _) = Corpus::from_records(recs, IngestionOptions::default()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn serde_rehydrates_total() {
        let c = two_docs();
        let json = serde_json::to_string(&c).unwrap();
        let back: Corpus = serde_json::from_str(&json).unwrap();
        let back = back.rehydrate().unwrap();
        assert_eq!(back.num_tokens(), 4);
        assert_eq!(back, c);
    }

    #[test]
    fn from_indexed_validates() {
        let doc = Document {
            id: "d".into(),
            tokens: vec![0, 5],
            authors: vec![0],
        };
        assert!(Corpus::from_indexed(vec!["t".into()], vec!["a".into()], vec![doc]).is_err());
    }
}
