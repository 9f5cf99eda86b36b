//! Training and evaluation runs with on-disk artifacts.
//!
//! A training run writes into its output directory:
//!
//! | file              | content                                              |
//! |-------------------|------------------------------------------------------|
//! | `manifest.json`   | resolved config, corpus SHA-256, artifact version    |
//! | `trace.csv`       | `sweep,loglik,k_active` for every post-burn-in sweep |
//! | `checkpoint.json` | final chain state                                    |
//! | `report.json`     | topic report (machine)                               |
//! | `report.txt`      | topic report (human)                                 |
//! | `heldout.json`    | perplexity on `heldout`, when given                  |
//!
//! plus `checkpoint-NNNNNN.json` every `checkpoint_every` sweeps when that is
//! non-zero. Nothing depends on wall-clock time, so identical configs give
//! byte-identical artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chain::{Chain, ModelKind};
use crate::checkpoint::Checkpoint;
use crate::corpus::{self, Corpus, IngestionOptions, LoadReport};
use crate::error::{Error, Result};
use crate::evaluation::{HeldOut, Perplexity};
use crate::hyper::{Hyperparameters, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_GAMMA};
use crate::SweepStats;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const HELDOUT_FILE: &str = "heldout.json";
pub const TRACE_HEADER: &str = "sweep,loglik,k_active";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub corpus: PathBuf,
    pub heldout: Option<PathBuf>,
    /// `K`; required for the parametric model, rejected for HDP.
    pub topics: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Initial topic count of the HDP chain.
    pub initial_topics: usize,
    pub iters: usize,
    pub burnin: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub top_n: usize,
    /// Write an intermediate checkpoint every this many sweeps; 0 disables.
    pub checkpoint_every: usize,
}

/// Every [`RunConfig`] field as optional, for config files and flag overlays.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialRunConfig {
    pub model: Option<ModelKind>,
    pub corpus: Option<PathBuf>,
    pub heldout: Option<PathBuf>,
    pub topics: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub initial_topics: Option<usize>,
    pub iters: Option<usize>,
    pub burnin: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub top_n: Option<usize>,
    pub checkpoint_every: Option<usize>,
}

impl PartialRunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fields set in `top` win over fields set in `self`.
    pub fn overlay(self, top: PartialRunConfig) -> PartialRunConfig {
        PartialRunConfig {
            model: top.model.or(self.model),
            corpus: top.corpus.or(self.corpus),
            heldout: top.heldout.or(self.heldout),
            topics: top.topics.or(self.topics),
            alpha: top.alpha.or(self.alpha),
            beta: top.beta.or(self.beta),
            gamma: top.gamma.or(self.gamma),
            initial_topics: top.initial_topics.or(self.initial_topics),
            iters: top.iters.or(self.iters),
            burnin: top.burnin.or(self.burnin),
            seed: top.seed.or(self.seed),
            out: top.out.or(self.out),
            top_n: top.top_n.or(self.top_n),
            checkpoint_every: top.checkpoint_every.or(self.checkpoint_every),
        }
    }

    /// Fills defaults and validates.
    pub fn resolve(self) -> Result<RunConfig> {
        fn required<T>(v: Option<T>, field: &'static str) -> Result<T> {
            v.ok_or(Error::Config {
                field,
                message: "is required".into(),
            })
        }
        let config = RunConfig {
            model: required(self.model, "model")?,
            corpus: required(self.corpus, "corpus")?,
            heldout: self.heldout,
            topics: self.topics,
            alpha: self.alpha.unwrap_or(DEFAULT_ALPHA),
            beta: self.beta.unwrap_or(DEFAULT_BETA),
            gamma: self.gamma.unwrap_or(DEFAULT_GAMMA),
            initial_topics: self.initial_topics.unwrap_or(1),
            iters: required(self.iters, "iters")?,
            burnin: self.burnin.unwrap_or(0),
            seed: self.seed.unwrap_or(0),
            out: required(self.out, "out")?,
            top_n: self.top_n.unwrap_or(10),
            checkpoint_every: self.checkpoint_every.unwrap_or(0),
        };
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    pub fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            topics: self.topics,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field, message: &str| {
            Err(Error::Config {
                field,
                message: message.into(),
            })
        };
        match (self.model, self.topics) {
            (ModelKind::Parametric, None) => return fail("topics", "is required for --model parametric"),
            (ModelKind::Hdp, Some(_)) => return fail("topics", "only applies to --model parametric"),
            _ => {}
        }
        if self.iters <= self.burnin {
            return fail("iters", "must be greater than burnin");
        }
        if self.top_n == 0 {
            return fail("top_n", "must be at least 1");
        }
        if self.initial_topics == 0 {
            return fail("initial_topics", "must be at least 1");
        }
        self.hyperparameters().validate()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub terms: usize,
    pub authors: usize,
    pub tokens: usize,
    pub dropped_empty: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub artifact: String,
    pub version: String,
    pub checkpoint_format: u32,
    pub config: RunConfig,
    pub corpus_sha256: String,
    pub corpus: CorpusSummary,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub out: PathBuf,
    pub last: SweepStats,
    pub perplexity: Option<Perplexity>,
    pub files: Vec<PathBuf>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn trace_line(stats: &SweepStats) -> String {
    match stats.k_active {
        Some(k) => format!("{},{},{}\n", stats.sweep, stats.loglik, k),
        None => format!("{},{},\n", stats.sweep, stats.loglik),
    }
}

/// Loads a corpus file and returns it with its content hash.
pub fn load_hashed(path: &Path) -> Result<(Corpus, LoadReport, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (corpus, report) = corpus::load_corpus(path, IngestionOptions::default())?;
    Ok((corpus, report, sha256_hex(&bytes)))
}

fn load_heldout(path: &Path, training: &Corpus) -> Result<HeldOut> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records = corpus::parse_records(&text)?;
    HeldOut::map(&records, training)
}

pub fn train(config: &RunConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let (corpus, load_report, digest) = load_hashed(&config.corpus)?;
    let heldout = config
        .heldout
        .as_deref()
        .map(|p| load_heldout(p, &corpus))
        .transpose()?;
    std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;

    let mut chain = Chain::new(
        config.model,
        &corpus,
        config.hyperparameters(),
        config.initial_topics,
        config.seed,
    )?;
    let mut files = Vec::new();
    let mut trace = String::from(TRACE_HEADER);
    trace.push('\n');
    let mut last = None;
    for it in 0..config.iters {
        let stats = chain.step(&corpus)?;
        log::debug!("sweep {} loglik {} k_active {:?}", stats.sweep, stats.loglik, stats.k_active);
        if it >= config.burnin {
            trace.push_str(&trace_line(&stats));
        }
        if config.checkpoint_every > 0 && stats.sweep % config.checkpoint_every == 0 && stats.sweep < config.iters {
            let path = config.out.join(format!("checkpoint-{:06}.json", stats.sweep));
            Checkpoint::capture(&chain, &corpus).save(&path)?;
            files.push(path);
        }
        last = Some(stats);
    }
    let last = last.expect("iters > burnin >= 0 guarantees a sweep");

    let trace_path = config.out.join(TRACE_FILE);
    write(&trace_path, trace)?;
    let checkpoint_path = config.out.join(CHECKPOINT_FILE);
    Checkpoint::capture(&chain, &corpus).save(&checkpoint_path)?;
    let report = chain.report(&corpus, config.top_n)?;
    let report_json = config.out.join(REPORT_JSON_FILE);
    write(&report_json, report.to_json())?;
    let report_text = config.out.join(REPORT_TEXT_FILE);
    write(&report_text, report.to_text())?;
    files.extend([trace_path, checkpoint_path, report_json, report_text]);

    let perplexity = match &heldout {
        Some(h) => {
            let p = chain.perplexity(h)?;
            let path = config.out.join(HELDOUT_FILE);
            write(&path, serde_json::to_string_pretty(&p)?)?;
            files.push(path);
            Some(p)
        }
        None => None,
    };

    let manifest = Manifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        checkpoint_format: crate::checkpoint::VERSION,
        config: config.clone(),
        corpus_sha256: digest,
        corpus: CorpusSummary {
            documents: corpus.num_docs(),
            terms: corpus.num_terms(),
            authors: corpus.num_authors(),
            tokens: corpus.num_tokens(),
            dropped_empty: load_report.dropped_empty,
        },
        outputs: files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    let manifest_path = config.out.join(MANIFEST_FILE);
    write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    files.push(manifest_path);
    Ok(TrainOutcome {
        out: config.out.clone(),
        last,
        perplexity,
        files,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalOutcome {
    pub checkpoint: PathBuf,
    pub heldout: PathBuf,
    pub model: ModelKind,
    pub vocabulary_size: usize,
    #[serde(flatten)]
    pub perplexity: Perplexity,
    #[serde(skip)]
    pub written: PathBuf,
}

/// Path of the evaluation result written beside `checkpoint`.
pub fn eval_output_path(checkpoint: &Path) -> PathBuf {
    let stem = checkpoint
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "checkpoint".into());
    checkpoint.with_file_name(format!("{stem}.eval.json"))
}

pub fn evaluate(checkpoint: &Path, heldout: &Path) -> Result<EvalOutcome> {
    let (corpus, chain) = Checkpoint::load(checkpoint)?.restore()?;
    let held = load_heldout(heldout, &corpus)?;
    let perplexity = chain.perplexity(&held)?;
    let written = eval_output_path(checkpoint);
    let outcome = EvalOutcome {
        checkpoint: checkpoint.to_path_buf(),
        heldout: heldout.to_path_buf(),
        model: chain.model(),
        vocabulary_size: corpus.num_terms(),
        perplexity,
        written: written.clone(),
    };
    write(&written, serde_json::to_string_pretty(&outcome)?)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partial() -> PartialRunConfig {
        PartialRunConfig {
            model: Some(ModelKind::Hdp),
            corpus: Some("c.jsonl".into()),
            iters: Some(10),
            burnin: Some(5),
            out: Some("out".into()),
            ..Default::default()
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = partial().resolve().unwrap();
        assert_eq!((c.alpha, c.beta, c.gamma), (1.0, 0.1, 1.0));
        assert_eq!((c.top_n, c.checkpoint_every, c.initial_topics), (10, 0, 1));
    }

    #[test]
    fn parametric_needs_topics() {
        let p = PartialRunConfig {
            model: Some(ModelKind::Parametric),
            ..partial()
        };
        match p.clone().resolve() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "topics"),
            other => panic!("unexpected {other:?}"),
        }
        let ok = PartialRunConfig { topics: Some(4), ..p }.resolve().unwrap();
        assert_eq!(ok.topics, Some(4));
        let hdp_with_k = PartialRunConfig { topics: Some(4), ..partial() };
        assert!(hdp_with_k.resolve().is_err());
    }

    #[test]
    fn burnin_must_be_below_iters() {
        let p = PartialRunConfig { burnin: Some(10), ..partial() };
        assert!(matches!(p.resolve(), Err(Error::Config { field: "iters", .. })));
    }

    #[test]
    fn overlay_prefers_top() {
        let base = PartialRunConfig { alpha: Some(2.0), seed: Some(1), ..partial() };
        let top = PartialRunConfig { seed: Some(9), ..Default::default() };
        let merged = base.overlay(top).resolve().unwrap();
        assert_eq!((merged.alpha, merged.seed), (2.0, 9));
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
