//! Python bindings: corpora, chains of either model, perplexity, checkpoints,
//! training runs and the correctness oracles.
//!
//! ```python
//! import authortopic_py as at
//! corpus = at.Corpus.load("papers.jsonl")
//! chain = at.Chain("hdp", corpus, seed=7)
//! chain.step(200)
//! print(chain.report_text(top_n=8))
//! ```

use std::path::PathBuf;

use authortopic::corpus::{self, IngestionOptions, Record};
use authortopic::evaluation::HeldOut;
use authortopic::oracle::{self, EnumerateConfig, GewekeConfig, SynthConfig};
use authortopic::run::{self, PartialRunConfig};
use authortopic::{Checkpoint, Error, Hyperparameters, ModelKind};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Config { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidRecord { .. }
        | Error::MalformedLine { .. }
        | Error::EmptyCorpus { .. }
        | Error::UnknownAuthor(_)
        | Error::NoEvaluableTokens { .. }
        | Error::OutOfRange { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Hands a serialized report to Python's `json` so callers get plain dicts.
fn json_to_py(py: Python<'_>, text: serde_json::Result<String>) -> PyResult<Bound<'_, PyAny>> {
    let text = text.map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

/// A training corpus: documents of term indices with their author sets.
#[pyclass(module = "authortopic_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Corpus {
    inner: authortopic::Corpus,
    dropped_empty: usize,
}

#[pymethods]
impl Corpus {
    /// Reads a JSON Lines file of `{"id", "authors", "tokens"}` records.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (inner, report) = corpus::load_corpus(&path, IngestionOptions::default()).map_err(to_py)?;
        Ok(Self {
            inner,
            dropped_empty: report.dropped_empty,
        })
    }

    /// Builds a corpus from `(id, authors, tokens)` triples.
    #[staticmethod]
    fn from_records(records: Vec<(String, Vec<String>, Vec<String>)>) -> PyResult<Self> {
        let records = records
            .iter()
            .map(|(id, authors, tokens)| Record::new(id, authors, tokens));
        let (inner, report) =
            authortopic::Corpus::from_records(records, IngestionOptions::default()).map_err(to_py)?;
        Ok(Self {
            inner,
            dropped_empty: report.dropped_empty,
        })
    }

    #[getter]
    fn num_docs(&self) -> usize {
        self.inner.num_docs()
    }

    #[getter]
    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    #[getter]
    fn num_authors(&self) -> usize {
        self.inner.num_authors()
    }

    #[getter]
    fn num_tokens(&self) -> usize {
        self.inner.num_tokens()
    }

    #[getter]
    fn dropped_empty(&self) -> usize {
        self.dropped_empty
    }

    fn terms(&self) -> Vec<String> {
        self.inner.vocabulary().terms().to_vec()
    }

    fn authors(&self) -> Vec<String> {
        self.inner.authors().terms().to_vec()
    }

    fn to_jsonl(&self) -> String {
        self.inner.to_jsonl()
    }

    fn __len__(&self) -> usize {
        self.inner.num_docs()
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus(docs={}, terms={}, authors={}, tokens={})",
            self.inner.num_docs(),
            self.inner.num_terms(),
            self.inner.num_authors(),
            self.inner.num_tokens()
        )
    }
}

/// A Gibbs chain of the parametric (`"parametric"`, needs `topics`) or
/// non-parametric (`"hdp"`) model over its own copy of a corpus.
#[pyclass(module = "authortopic_py")]
struct Chain {
    inner: authortopic::Chain,
    corpus: authortopic::Corpus,
}

#[pymethods]
impl Chain {
    #[new]
    #[pyo3(signature = (model, corpus, *, topics=None, alpha=1.0, beta=0.1, gamma=1.0, initial_topics=1, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        model: &str,
        corpus: &Corpus,
        topics: Option<usize>,
        alpha: f64,
        beta: f64,
        gamma: f64,
        initial_topics: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let model: ModelKind = model.parse().map_err(to_py)?;
        let hp = Hyperparameters {
            alpha,
            beta,
            gamma,
            topics,
        };
        if model == ModelKind::Hdp && topics.is_some() {
            return Err(PyValueError::new_err("topics only applies to the parametric model"));
        }
        let inner = authortopic::Chain::new(model, &corpus.inner, hp, initial_topics, seed).map_err(to_py)?;
        Ok(Self {
            inner,
            corpus: corpus.inner.clone(),
        })
    }

    /// Runs `sweeps` sweeps; returns `(sweep, loglik, k_active)` per sweep,
    /// `k_active` being `None` for the parametric model.
    #[pyo3(signature = (sweeps=1))]
    fn step(&mut self, py: Python<'_>, sweeps: usize) -> PyResult<Vec<(usize, f64, Option<usize>)>> {
        let mut out = Vec::with_capacity(sweeps);
        for _ in 0..sweeps {
            let s = self.inner.step(&self.corpus).map_err(to_py)?;
            out.push((s.sweep, s.loglik, s.k_active));
            py.check_signals()?;
        }
        Ok(out)
    }

    #[getter]
    fn model(&self) -> String {
        self.inner.model().to_string()
    }

    #[getter]
    fn sweeps(&self) -> usize {
        self.inner.sweeps()
    }

    #[getter]
    fn k_active(&self) -> Option<usize> {
        self.inner.k_active()
    }

    fn topic_labels(&self) -> Vec<usize> {
        self.inner.topic_labels()
    }

    /// Author × topic posterior means (HDP adds a final unused-mass column).
    fn theta(&self) -> Vec<Vec<f64>> {
        self.inner.theta()
    }

    /// Topic × term posterior means (HDP adds a final uniform row).
    fn phi(&self) -> Vec<Vec<f64>> {
        self.inner.phi()
    }

    /// `(perplexity, evaluated_tokens, skipped_tokens)` on a JSON Lines file,
    /// or on the training corpus when `path` is omitted.
    #[pyo3(signature = (path=None))]
    fn perplexity(&self, path: Option<PathBuf>) -> PyResult<(f64, usize, usize)> {
        let held = match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| PyIOError::new_err(format!("{}: {e}", p.display())))?;
                let records = corpus::parse_records(&text).map_err(to_py)?;
                HeldOut::map(&records, &self.corpus).map_err(to_py)?
            }
            None => HeldOut::from_corpus(&self.corpus),
        };
        let p = self.inner.perplexity(&held).map_err(to_py)?;
        Ok((p.perplexity, p.evaluated_tokens, p.skipped_tokens))
    }

    #[pyo3(signature = (top_n=10))]
    fn report<'py>(&self, py: Python<'py>, top_n: usize) -> PyResult<Bound<'py, PyAny>> {
        let r = self.inner.report(&self.corpus, top_n).map_err(to_py)?;
        json_to_py(py, serde_json::to_string(&r))
    }

    #[pyo3(signature = (top_n=10))]
    fn report_text(&self, top_n: usize) -> PyResult<String> {
        Ok(self.inner.report(&self.corpus, top_n).map_err(to_py)?.to_text())
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        Checkpoint::capture(&self.inner, &self.corpus).save(path).map_err(to_py)
    }

    /// Resumes a chain from a checkpoint file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (corpus, inner) = Checkpoint::load(path).map_err(to_py)?.restore().map_err(to_py)?;
        Ok(Self { inner, corpus })
    }

    fn corpus(&self) -> Corpus {
        Corpus {
            inner: self.corpus.clone(),
            dropped_empty: 0,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Chain(model={}, sweeps={}, k_active={:?})",
            self.inner.model(),
            self.inner.sweeps(),
            self.inner.k_active()
        )
    }
}

/// Runs a full training run from a JSON config (same keys as the CLI flags,
/// underscores for dashes) and returns the output directory.
#[pyfunction]
fn train(py: Python<'_>, config_json: &str) -> PyResult<PathBuf> {
    let partial: PartialRunConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let config = partial.resolve().map_err(to_py)?;
    let outcome = py.detach(|| run::train(&config)).map_err(to_py)?;
    Ok(outcome.out)
}

/// Held-out perplexity of a checkpoint; also writes `<checkpoint>.eval.json`.
#[pyfunction]
fn evaluate(checkpoint: PathBuf, heldout: PathBuf) -> PyResult<(f64, usize, usize)> {
    let r = run::evaluate(&checkpoint, &heldout).map_err(to_py)?;
    Ok((r.perplexity.perplexity, r.perplexity.evaluated_tokens, r.perplexity.skipped_tokens))
}

#[pyfunction]
#[pyo3(signature = (sweeps=None, seed=None, coauthored=false))]
fn oracle_enumerate<'py>(
    py: Python<'py>,
    sweeps: Option<usize>,
    seed: Option<u64>,
    coauthored: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let d = EnumerateConfig::default();
    let (corpus, threshold) = if coauthored {
        (oracle::coauthored_micro_corpus(), 0.02)
    } else {
        (oracle::micro_corpus(), d.threshold)
    };
    let config = EnumerateConfig {
        sweeps: sweeps.unwrap_or(d.sweeps),
        seed: seed.unwrap_or(d.seed),
        threshold,
        ..d
    };
    let r = py.detach(|| oracle::enumerate(&corpus, &config)).map_err(to_py)?;
    json_to_py(py, serde_json::to_string(&r))
}

#[pyfunction]
#[pyo3(signature = (samples=None, seed=None))]
fn oracle_geweke<'py>(py: Python<'py>, samples: Option<usize>, seed: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
    let d = GewekeConfig::default();
    let config = GewekeConfig {
        samples: samples.unwrap_or(d.samples),
        seed: seed.unwrap_or(d.seed),
        ..d
    };
    let r = py.detach(|| oracle::geweke(&config)).map_err(to_py)?;
    json_to_py(py, serde_json::to_string(&r))
}

#[pyfunction]
#[pyo3(signature = (topics=None, iters=None, burnin=None, seed=None))]
fn oracle_synth<'py>(
    py: Python<'py>,
    topics: Option<usize>,
    iters: Option<usize>,
    burnin: Option<usize>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyAny>> {
    let d = SynthConfig::default();
    let config = SynthConfig {
        topics: topics.unwrap_or(d.topics),
        iters: iters.unwrap_or(d.iters),
        burnin: burnin.unwrap_or(d.burnin),
        seed: seed.unwrap_or(d.seed),
        ..d
    };
    let r = py.detach(|| oracle::synth(&config)).map_err(to_py)?;
    json_to_py(py, serde_json::to_string(&r))
}

#[pymodule]
pub fn authortopic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_class::<Chain>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_geweke, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_synth, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
