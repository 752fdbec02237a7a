mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specforge_core::corpus::Level;
use specforge_core::format::fixed;
use specforge_core::pipeline::specialization_report;
use specforge_core::config::RunConfig;
use specforge_core::specialization::{
    build_report, rsi, share_ratio, ssi, ssi_from_ratio, ReportConfig, SpecializationReport,
};
use specforge_core::strength::{Measure, StrengthMatrix};

use common::synth;

fn matrix(cells: &[(String, String, f64)]) -> StrengthMatrix {
    StrengthMatrix::from_cells(Level::Province, Measure::Strength, cells.iter().cloned()).unwrap()
}

fn arb_cells() -> impl Strategy<Value = Vec<(String, String, f64)>> {
    prop::collection::vec((0usize..6, 0usize..5, 0.0f64..50.0), 1..40).prop_map(|v| {
        let mut seen = std::collections::BTreeMap::new();
        for (t, s, x) in v {
            seen.insert((format!("T{t}"), format!("S{s}")), x);
        }
        seen.into_iter().map(|((t, s), x)| (t, s, x)).collect()
    })
}

#[test]
fn neutral_ratio_exact_zero() {
    assert_eq!(ssi_from_ratio(1.0), 0.0);
    // a territory mirroring the nation
    let m = matrix(&[
        ("A".into(), "X".into(), 3.0),
        ("A".into(), "Y".into(), 1.0),
        ("B".into(), "X".into(), 6.0),
        ("B".into(), "Y".into(), 2.0),
    ]);
    assert_eq!(ssi(&m, "A", "X").unwrap(), 0.0);
}

#[test]
fn saturation_thresholds() {
    let e3 = 3f64.exp();
    for r in [e3, e3 * 1.5, 64.0, 1e3, 1e9] {
        assert!(ssi_from_ratio(r) > 99.0, "r = {r}");
    }
    for r in [64.0, 100.0, 1e6] {
        assert_eq!(fixed(ssi_from_ratio(r), 1), "100.0", "r = {r}");
    }
    assert_eq!(fixed(ssi_from_ratio(40.0), 1), "99.9");
    assert_eq!(ssi_from_ratio(0.0), -100.0);
}

#[test]
fn antisymmetry_random_ratios() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let r = 10f64.powf(rng.random_range(-6.0..6.0));
        let s = ssi_from_ratio(r) + ssi_from_ratio(1.0 / r);
        assert!(s.abs() < 1e-9, "r = {r}: {s}");
    }
}

fn every_sc_has_nonpositive(report: &SpecializationReport) -> Result<(), String> {
    for sc in report.sc_ids() {
        let ssis: Vec<f64> = report.cells.values().filter(|c| c.sc_id == sc).map(|c| c.ssi).collect();
        if ssis.len() >= 2 && !ssis.iter().any(|&v| v <= 0.0) {
            return Err(format!("{sc}: {ssis:?}"));
        }
    }
    Ok(())
}

#[test]
fn someone_is_below_average_on_synthetic_corpora() {
    for seed in 0..40 {
        let corpus = synth(seed, 300);
        for level in [Level::Province, Level::Region] {
            let report = specialization_report(&corpus, level, &RunConfig::default()).unwrap();
            every_sc_has_nonpositive(&report).unwrap_or_else(|e| panic!("seed {seed} {level}: {e}"));
        }
    }
}

#[test]
fn monotonicity_counterexample() {
    // T is the only holder of X: r = G / S_X falls as SS(T, X) grows
    let base = |v: f64| {
        matrix(&[
            ("T".into(), "X".into(), v),
            ("T".into(), "Y".into(), 5.0),
            ("U".into(), "Y".into(), 5.0),
        ])
    };
    let before = share_ratio(&base(1.0), "T", "X").unwrap();
    let after = share_ratio(&base(2.0), "T", "X").unwrap();
    assert!(after < before);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn prop_bounded_and_labelled(cells in arb_cells()) {
        let m = matrix(&cells);
        prop_assume!(!m.is_empty());
        let report = build_report(&m, None, &ReportConfig::default()).unwrap();
        for c in report.cells.values() {
            prop_assert!((-100.0..=100.0).contains(&c.ssi));
            prop_assert!((-1.0..=1.0).contains(&c.rsi));
            // tanh saturates in f64 below r of about 1e-8
            if c.ssi == -100.0 {
                prop_assert!(m.value(&c.territory_code, &c.sc_id) == 0.0 || c.ai < 1e-7);
            }
        }
    }

    #[test]
    fn prop_nonpositive_exists(cells in arb_cells()) {
        let m = matrix(&cells);
        prop_assume!(!m.is_empty());
        let report = build_report(&m, None, &ReportConfig::default()).unwrap();
        prop_assert!(every_sc_has_nonpositive(&report).is_ok());
    }

    #[test]
    fn prop_rsi_orders_like_ssi(cells in arb_cells()) {
        let m = matrix(&cells);
        prop_assume!(!m.is_empty());
        let report = build_report(&m, None, &ReportConfig::default()).unwrap();
        let v: Vec<_> = report.cells.values().collect();
        for a in &v {
            prop_assert_eq!(a.rsi > 0.0, a.ssi > 0.0);
            for b in &v {
                if a.ai < b.ai {
                    prop_assert!(a.rsi <= b.rsi && a.ssi <= b.ssi);
                }
            }
        }
    }

    #[test]
    fn prop_scale_invariance(cells in arb_cells(), exp in -20i32..20, factor in 0.001f64..1000.0) {
        let m = matrix(&cells);
        prop_assume!(!m.is_empty());
        let a = build_report(&m, None, &ReportConfig::default()).unwrap();
        // powers of two scale without rounding
        let b = build_report(&m.scaled(2f64.powi(exp)).unwrap(), None, &ReportConfig::default()).unwrap();
        for (x, y) in a.cells.values().zip(b.cells.values()) {
            prop_assert_eq!(x.ssi.to_bits(), y.ssi.to_bits());
        }
        let c = build_report(&m.scaled(factor).unwrap(), None, &ReportConfig::default()).unwrap();
        for (x, y) in a.cells.values().zip(c.cells.values()) {
            prop_assert!((x.ssi - y.ssi).abs() < 1e-9);
        }
    }

    #[test]
    fn prop_monotone_when_condition_holds(cells in arb_cells(), bump in 0.01f64..5.0) {
        let m = matrix(&cells);
        prop_assume!(!m.is_empty());
        let (t, s, v) = cells[0].clone();
        prop_assume!(v > 0.0 && m.is_active(&t));
        let (tk, sj, g) = (m.territory_total(&t), m.sc_total(&s), m.grand_total());
        let delta = bump * 1e-6;
        // d ln r / dv > 0 exactly when 1/v + 1/G > 1/Tk + 1/Sj; required at both ends
        let grows = |v: f64, tk: f64, sj: f64, g: f64| 1.0 / v + 1.0 / g > (1.0 / tk + 1.0 / sj) * (1.0 + 1e-6);
        prop_assume!(grows(v, tk, sj, g) && grows(v + delta, tk + delta, sj + delta, g + delta));
        let bumped: Vec<_> = cells
            .iter()
            .map(|(a, b, x)| (a.clone(), b.clone(), if *a == t && *b == s { x + delta } else { *x }))
            .collect();
        let before = share_ratio(&m, &t, &s).unwrap();
        let after = share_ratio(&matrix(&bumped), &t, &s).unwrap();
        prop_assert!(after >= before - 1e-12 * before);
    }
}

#[test]
fn rsi_matches_ai() {
    for ai in [0.0, 0.25, 1.0, 1.6, 4.0, 1e6] {
        let r = rsi(ai).unwrap();
        assert!((r - (ai - 1.0) / (ai + 1.0)).abs() < 1e-15);
    }
}
