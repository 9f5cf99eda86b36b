use authortopic::oracle::{self, EnumerateConfig, GewekeConfig};
use authortopic::Error;

#[test]
fn coauthored_corpus_matches_enumeration() {
    // 64 states put the sampling floor of the TV estimate near 0.01 at 10^5
    // sweeps, so this check uses twice that
    let config = EnumerateConfig {
        threshold: 0.02,
        ..EnumerateConfig::default()
    };
    let r = oracle::enumerate(&oracle::coauthored_micro_corpus(), &config).unwrap();
    assert_eq!(r.states, 64);
    assert!(r.passed, "TV {}", r.total_variation);
}

#[test]
fn enumeration_is_reproducible() {
    let config = EnumerateConfig {
        sweeps: 2_000,
        ..EnumerateConfig::default()
    };
    let a = oracle::enumerate(&oracle::micro_corpus(), &config).unwrap();
    let b = oracle::enumerate(&oracle::micro_corpus(), &config).unwrap();
    assert_eq!(a.total_variation, b.total_variation);
}

#[test]
fn enumeration_refuses_oversized_corpus() {
    let docs = (0..12)
        .map(|d| authortopic::Document {
            id: format!("{d}"),
            tokens: vec![0, 0],
            authors: vec![0, 1],
        })
        .collect();
    let c = authortopic::Corpus::from_indexed(vec!["t".into()], vec!["a".into(), "b".into()], docs).unwrap();
    let err = oracle::enumerate(&c, &EnumerateConfig::default()).unwrap_err();
    assert!(matches!(err, Error::OracleLimit(_)));
}

#[test]
fn short_geweke_run_reports_every_statistic() {
    let config = GewekeConfig {
        samples: 500,
        ..GewekeConfig::default()
    };
    let r = oracle::geweke(&config).unwrap();
    let names: Vec<&str> = r.statistics.iter().map(|s| s.name).collect();
    assert_eq!(names, ["k_active", "max_tau"]);
    assert!(r.statistics.iter().all(|s| s.z_score.is_finite()));
}

#[test]
fn geweke_catches_a_biased_sampler() {
    // forward samples drawn with a different γ than the chain uses must be told apart
    let honest = GewekeConfig {
        samples: 3_000,
        ..GewekeConfig::default()
    };
    let biased = GewekeConfig {
        hp: authortopic::Hyperparameters::hdp(1.0, 0.5, 4.0),
        ..honest.clone()
    };
    let mut rng = authortopic::rng::seeded(1);
    let forward: Vec<f64> = (0..3_000)
        .map(|_| {
            let s = oracle::forward_sample(&biased, &mut rng);
            s.tau.len() as f64
        })
        .collect();
    let mut chain_rng = authortopic::rng::substream(honest.seed, 1);
    let successive = oracle::successive_conditional(&honest, &mut chain_rng).unwrap();
    let fm = forward.iter().sum::<f64>() / forward.len() as f64;
    let sm = successive.iter().map(|s| s[0]).sum::<f64>() / successive.len() as f64;
    assert!(fm - sm > 0.5, "forward {fm} vs successive {sm}");
}
