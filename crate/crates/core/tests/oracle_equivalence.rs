mod common;

use specforge_core::config::RunConfig;
use specforge_core::corpus::{Corpus, CorpusParts, Level};
use specforge_core::normalize::AiiMode;
use specforge_core::pipeline::specialization_report;
use specforge_core::specialization::{AiBasis, SpecializationReport};
use specforge_core::synth::{generate, oracle_pipeline, SynthSpec};
use specforge_core::Error;

use common::{ab_corpus, parts, small_spec};

fn assert_bit_equal(a: &SpecializationReport, b: &SpecializationReport, context: &str) {
    assert_eq!(a.cells.len(), b.cells.len(), "{context}: cell count");
    for (key, x) in &a.cells {
        let y = b.cells.get(key).unwrap_or_else(|| panic!("{context}: oracle lacks {key:?}"));
        assert_eq!(x.ssi.to_bits(), y.ssi.to_bits(), "{context} {key:?} ssi {} vs {}", x.ssi, y.ssi);
        assert_eq!(x.ai.to_bits(), y.ai.to_bits(), "{context} {key:?} ai");
        assert_eq!(x.rsi.to_bits(), y.rsi.to_bits(), "{context} {key:?} rsi");
        assert_eq!(x.label, y.label, "{context} {key:?} label");
    }
    assert_eq!(a.warnings, b.warnings, "{context}: warnings");
}

fn compare(corpus: &Corpus, config: &RunConfig, context: &str) {
    for level in [Level::Province, Level::Region] {
        let main = specialization_report(corpus, level, config);
        let oracle = oracle_pipeline(corpus, level, config);
        match (main, oracle) {
            (Ok(a), Ok(b)) => assert_bit_equal(&a, &b, &format!("{context} {level}")),
            (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string(), "{context} {level}"),
            (a, b) => panic!("{context} {level}: main {:?} vs oracle {:?}", a.err(), b.err()),
        }
    }
}

#[test]
fn ab_fixture_matches_oracle() {
    compare(&ab_corpus(), &RunConfig::default(), "ab");
}

#[test]
fn random_corpora_match_oracle() {
    for seed in 0..20 {
        for n in [20, 100, 200] {
            let corpus = generate(&small_spec(seed, n)).unwrap().corpus;
            let mut config = RunConfig::default();
            compare(&corpus, &config, &format!("seed {seed} n {n}"));
            config.aii_mode = AiiMode::LeaveOneOut;
            config.ai_basis = AiBasis::PubCount;
            compare(&corpus, &config, &format!("seed {seed} n {n} loo"));
        }
    }
}

#[test]
fn multi_sc_heavy_corpora_match_oracle() {
    for seed in 0..10 {
        let spec = SynthSpec {
            multi_sc_prob: 0.8,
            coauthor_prob: 0.7,
            ..small_spec(seed, 150)
        };
        let corpus = generate(&spec).unwrap().corpus;
        compare(&corpus, &RunConfig::default(), &format!("seed {seed}"));
    }
}

#[test]
fn zero_citation_corpus_matches_oracle() {
    let corpus = common::map_citations(&generate(&small_spec(4, 60)).unwrap().corpus, |_| 0);
    let config = RunConfig::default();
    let main = specialization_report(&corpus, Level::Province, &config).unwrap_err();
    let oracle = oracle_pipeline(&corpus, Level::Province, &config).unwrap_err();
    assert!(matches!(main, Error::EmptyMatrix));
    assert_eq!(main.to_string(), oracle.to_string());
}

#[test]
fn empty_corpus_same_error() {
    let mut p: CorpusParts = parts(&ab_corpus());
    p.publications.clear();
    p.load_summary.dropped = 3;
    let corpus = Corpus::from_parts(p);
    let config = RunConfig::default();
    let main = specialization_report(&corpus, Level::Region, &config).unwrap_err();
    let oracle = oracle_pipeline(&corpus, Level::Region, &config).unwrap_err();
    assert!(matches!(main, Error::EmptyCorpus { dropped: 3 }));
    assert_eq!(main.kind(), oracle.kind());
    assert_eq!(main.to_string(), oracle.to_string());
}
