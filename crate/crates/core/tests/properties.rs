mod common;

use authortopic::block::TopicChoice;
use authortopic::corpus::{self, IngestionOptions};
use authortopic::{hdp, parametric, rng, Chain, Checkpoint, Corpus, Hyperparameters, ModelKind, State};
use proptest::prelude::*;

fn corpus_from(seed: u64, docs: usize) -> Corpus {
    common::random_corpus(&mut rng::seeded(seed), docs, 12, 5, 15)
}

fn marginals_hold(state: &State, corpus: &Corpus) -> bool {
    let c = state.counts();
    let rows = c.n_jk.iter().zip(&c.n_j_dot).all(|(r, &n)| r.iter().sum::<u32>() == n);
    let cols = c.n_kt.iter().zip(&c.n_k_dot).all(|(r, &n)| r.iter().sum::<u32>() == n);
    let total = c.n_j_dot.iter().map(|&n| n as usize).sum::<usize>() == corpus.num_tokens();
    rows && cols && total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decrement_then_increment_restores_state(seed in any::<u64>(), docs in 1usize..10, pick in any::<prop::sample::Index>()) {
        let corpus = corpus_from(seed, docs);
        let mut state = State::init(&corpus, &[0, 1, 2], &mut rng::seeded(seed)).unwrap();
        let before = state.clone();
        let positions: Vec<(usize, usize)> = corpus
            .documents()
            .iter()
            .enumerate()
            .flat_map(|(d, doc)| (0..doc.len()).map(move |i| (d, i)))
            .collect();
        let (d, i) = positions[pick.index(positions.len())];
        let (k, j) = state.decrement(&corpus, d, i).unwrap();
        state.increment(&corpus, d, i, k, j).unwrap();
        prop_assert_eq!(state, before);
    }

    #[test]
    fn sweeps_preserve_count_marginals(seed in any::<u64>(), docs in 1usize..10, hdp_model in any::<bool>()) {
        let corpus = corpus_from(seed, docs);
        let (model, topics) = if hdp_model { (ModelKind::Hdp, None) } else { (ModelKind::Parametric, Some(3)) };
        let hp = Hyperparameters { topics, ..Hyperparameters::hdp(0.8, 0.2, 1.5) };
        let mut chain = Chain::new(model, &corpus, hp, 2, seed).unwrap();
        for _ in 0..5 {
            chain.step(&corpus).unwrap();
            prop_assert!(chain.state().audit(&corpus).is_clean());
            prop_assert!(marginals_hold(chain.state(), &corpus));
        }
    }

    #[test]
    fn block_weights_cover_only_document_authors(seed in any::<u64>(), docs in 1usize..10) {
        let corpus = corpus_from(seed, docs);
        let hp = Hyperparameters::parametric(3, 0.5, 0.1);
        let mut state = State::init(&corpus, &[0, 1, 2], &mut rng::seeded(seed)).unwrap();
        let (_, _) = state.decrement(&corpus, 0, 0).unwrap();
        let doc = corpus.document(0);
        let w = parametric::block_weights(&state, &corpus, 0, doc.tokens[0], 3, &hp);
        prop_assert_eq!(w.cells.len(), doc.authors.len() * 3);
        prop_assert!(w.cells.iter().all(|c| doc.authors.contains(&c.author) && c.weight > 0.0));
        prop_assert!((w.normalized().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hdp_weights_offer_one_new_topic_per_author(seed in any::<u64>(), docs in 1usize..10) {
        let corpus = corpus_from(seed, docs);
        let mut chain = authortopic::HdpChain::new(&corpus, Hyperparameters::hdp(1.0, 0.1, 1.0), 3, seed).unwrap();
        chain.step(&corpus).unwrap();
        let doc = corpus.document(0);
        let w = hdp::block_weights_hdp(&chain.state, &chain.pool, &chain.root, &corpus, 0, doc.tokens[0], &chain.hp);
        let new_cells = w.cells.iter().filter(|c| c.topic == TopicChoice::New).count();
        prop_assert_eq!(new_cells, doc.authors.len());
        prop_assert_eq!(w.cells.len(), doc.authors.len() * (chain.pool.k_active() + 1));
    }

    #[test]
    fn corpus_jsonl_round_trip(seed in any::<u64>(), docs in 1usize..10) {
        let corpus = corpus_from(seed, docs);
        let records = corpus::parse_records(&corpus.to_jsonl()).unwrap();
        let (back, report) = Corpus::from_records(records, IngestionOptions::default()).unwrap();
        prop_assert_eq!(report.dropped_empty, 0);
        // indices are reassigned in first-seen order; compare by name
        let named = |c: &Corpus| -> Vec<(String, Vec<String>, Vec<String>)> {
            c.documents()
                .iter()
                .map(|d| (
                    d.id.clone(),
                    d.authors.iter().map(|&j| c.author_of(j).unwrap().to_string()).collect(),
                    d.tokens.iter().map(|&t| c.term_of(t).unwrap().to_string()).collect(),
                ))
                .collect()
        };
        prop_assert_eq!(named(&back), named(&corpus));
        prop_assert_eq!(back.num_tokens(), corpus.num_tokens());
    }

    #[test]
    fn checkpoint_round_trip_continues_identically(seed in any::<u64>(), docs in 1usize..8, hdp_model in any::<bool>()) {
        let corpus = corpus_from(seed, docs);
        let (model, topics) = if hdp_model { (ModelKind::Hdp, None) } else { (ModelKind::Parametric, Some(3)) };
        let hp = Hyperparameters { topics, ..Hyperparameters::hdp(1.0, 0.1, 1.0) };
        let mut chain = Chain::new(model, &corpus, hp, 2, seed).unwrap();
        chain.step(&corpus).unwrap();
        let json = Checkpoint::capture(&chain, &corpus).to_json();
        let (corpus2, mut resumed) = Checkpoint::from_json(&json).unwrap().restore().unwrap();
        for _ in 0..3 {
            let a = chain.step(&corpus).unwrap();
            let b = resumed.step(&corpus2).unwrap();
            prop_assert_eq!(a, b);
        }
        prop_assert_eq!(chain.state(), resumed.state());
    }
}
