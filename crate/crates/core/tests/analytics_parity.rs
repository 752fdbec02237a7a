mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use specforge_core::analytics::{
    activity_profiles, extreme_ratios_by_sc, extreme_ratios_by_territory, top_scs_per_territory,
    top_territories_per_sc, ActivityProfile, ExtremeRatioRow,
};
use specforge_core::config::RunConfig;
use specforge_core::corpus::{Corpus, Level};
use specforge_core::format::fixed;
use specforge_core::pipeline::specialization_report;
use specforge_core::specialization::{build_report, ReportConfig, SpecializationReport};
use specforge_core::strength::{Measure, StrengthMatrix};

use common::{parts, synth};

/// Straight filters over the report, one territory or SC at a time.
fn brute_force(
    report: &SpecializationReport,
    profiles: &BTreeMap<String, ActivityProfile>,
    by_territory: bool,
) -> BTreeMap<String, (usize, usize, usize)> {
    let mut out: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for c in report.cells.values() {
        let Some(p) = profiles.get(&c.territory_code) else { continue };
        if !p.active_scs.contains(&c.sc_id) {
            continue;
        }
        let key = if by_territory { &c.territory_code } else { &c.sc_id };
        let e = out.entry(key.clone()).or_default();
        e.0 += 1;
        if c.ssi > 50.0 {
            e.1 += 1;
        }
        if c.ssi < -50.0 {
            e.2 += 1;
        }
    }
    out
}

fn check(rows: &[ExtremeRatioRow], expected: &BTreeMap<String, (usize, usize, usize)>) {
    assert_eq!(rows.len(), expected.len());
    for r in rows {
        let (a, h, l) = expected[&r.subject];
        assert_eq!((r.active_count, r.highly_specialized_count, r.non_specialized_count), (a, h, l), "{}", r.subject);
        assert_eq!(r.ratio_high, h as f64 / a as f64);
        assert_eq!(r.ratio_low, l as f64 / a as f64);
    }
    for w in rows.windows(2) {
        assert!(w[0].ratio_high > w[1].ratio_high || (w[0].ratio_high == w[1].ratio_high && w[0].subject < w[1].subject));
    }
}

#[test]
fn extremes_equal_brute_force_on_fixtures() {
    for seed in 0..30 {
        let corpus = synth(seed, 500);
        for (level, threshold) in [(Level::Province, 1), (Level::Province, 5), (Level::Region, 10)] {
            let report = specialization_report(&corpus, level, &RunConfig::default()).unwrap();
            let profiles = activity_profiles(&corpus, level, threshold);
            let rows = extreme_ratios_by_territory(&report, &profiles, 50.0, -50.0).unwrap();
            check(&rows, &brute_force(&report, &profiles, true));
            let rows = extreme_ratios_by_sc(&report, &profiles, 50.0, -50.0).unwrap();
            check(&rows, &brute_force(&report, &profiles, false));
        }
    }
}

/// 17 active territories: 8 far above the national share of X, 6 far below, 3 in between.
fn niche_sc_cells() -> Vec<(String, String, f64)> {
    let mut cells = Vec::new();
    for i in 1..=17 {
        let x = match i {
            1..=8 => 9.0,
            9..=14 => 0.5,
            _ => 3.0,
        };
        cells.push((format!("T{i:02}"), "X".to_owned(), x));
        cells.push((format!("T{i:02}"), "Y".to_owned(), 10.0 - x));
    }
    cells
}

#[test]
fn seventeen_active_eight_high() {
    let cells = niche_sc_cells();
    let m = StrengthMatrix::from_cells(Level::Province, Measure::Strength, cells).unwrap();
    let report = build_report(&m, None, &ReportConfig::default()).unwrap();
    let profiles: BTreeMap<String, ActivityProfile> = m
        .territories()
        .iter()
        .map(|t| {
            let counts = [("X".to_owned(), 1u64), ("Y".to_owned(), 1u64)].into_iter().collect();
            (t.clone(), ActivityProfile::from_counts(t.clone(), counts, 1))
        })
        .collect();
    let rows = extreme_ratios_by_sc(&report, &profiles, 50.0, -50.0).unwrap();
    let x = rows.iter().find(|r| r.subject == "X").unwrap();
    assert_eq!((x.active_count, x.highly_specialized_count, x.non_specialized_count), (17, 8, 6));
    assert_eq!(fixed(x.ratio_high, 2), "0.47");
    assert_eq!(fixed(x.ratio_low, 2), "0.35");
}

#[test]
fn threshold_one_marks_every_published_sc_active() {
    let corpus = synth(9, 400);
    let profiles = activity_profiles(&corpus, Level::Province, 1);
    for p in corpus.publications() {
        for t in corpus.territories_of(p, Level::Province) {
            for sc in &p.subject_categories {
                assert!(profiles[&t].active_scs.contains(sc));
            }
        }
    }
    let strict = activity_profiles(&corpus, Level::Province, 20);
    for (t, p) in &strict {
        for sc in &p.active_scs {
            assert!(p.pub_counts[sc] >= 20, "{t} {sc}");
        }
        assert!(p.active_scs.is_subset(&profiles[t].active_scs));
    }
}

fn shuffled(corpus: &Corpus, seed: u64) -> Corpus {
    let mut p = parts(corpus);
    let n = p.publications.len();
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    for i in (1..n).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = (state >> 33) as usize % (i + 1);
        p.publications.swap(i, j);
    }
    Corpus::from_parts(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn prop_top_k_ignores_input_order(seed in 0u64..1000, order in any::<u64>(), k in 1usize..6) {
        let corpus = synth(seed, 200);
        let other = shuffled(&corpus, order);
        let config = RunConfig::default();
        let a = specialization_report(&corpus, Level::Province, &config).unwrap();
        let b = specialization_report(&other, Level::Province, &config).unwrap();
        prop_assert_eq!(&a.cells, &b.cells);
        prop_assert_eq!(top_scs_per_territory(&a, k).unwrap(), top_scs_per_territory(&b, k).unwrap());
        prop_assert_eq!(top_territories_per_sc(&a, k).unwrap(), top_territories_per_sc(&b, k).unwrap());
        for row in top_scs_per_territory(&a, k).unwrap() {
            prop_assert!(row.entries.len() <= k);
            prop_assert!(row.entries.windows(2).all(|w| w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0)));
        }
    }
}
