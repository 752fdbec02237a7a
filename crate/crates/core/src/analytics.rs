//! Derived analyses: activity thresholds, top-k rankings, extreme
//! specialization ratios, strength per inhabitant and regional summaries.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Level, OrgKind, TerritoryRegistry};
use crate::error::{Error, Result};
use crate::format::{read_meta_csv, write_meta_csv};
use crate::specialization::SpecializationReport;
use crate::strength::StrengthMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityProfile {
    pub territory_code: String,
    pub threshold: u32,
    /// SCs whose publication count reaches the threshold.
    pub active_scs: BTreeSet<String>,
    pub pub_counts: BTreeMap<String, u64>,
}

impl ActivityProfile {
    pub fn from_counts(territory_code: String, pub_counts: BTreeMap<String, u64>, threshold: u32) -> Self {
        let active_scs = pub_counts
            .iter()
            .filter(|(_, &n)| n >= u64::from(threshold))
            .map(|(sc, _)| sc.clone())
            .collect();
        ActivityProfile {
            territory_code,
            threshold,
            active_scs,
            pub_counts,
        }
    }
}

/// Counts each publication once per territory and once per each of its SCs.
pub fn activity_profiles(corpus: &Corpus, level: Level, threshold: u32) -> BTreeMap<String, ActivityProfile> {
    let codes = corpus.territory_codes(level);
    let sc_ids = corpus.sc_ids();
    let n_sc = sc_ids.len();
    let mut counts = vec![0u64; codes.len() * n_sc];
    for pos in 0..corpus.len() {
        for &t in corpus.territory_indices(pos, level) {
            for &s in corpus.sc_indices(pos) {
                counts[t as usize * n_sc + s as usize] += 1;
            }
        }
    }
    codes
        .iter()
        .enumerate()
        .filter_map(|(t, code)| {
            let row: BTreeMap<String, u64> = counts[t * n_sc..(t + 1) * n_sc]
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(s, &n)| (sc_ids[s].clone(), n))
                .collect();
            (!row.is_empty()).then(|| (code.clone(), ActivityProfile::from_counts(code.clone(), row, threshold)))
        })
        .collect()
}

pub const ACTIVITY_HEADER: [&str; 3] = ["territory_code", "sc_id", "pub_count"];

pub fn write_activity_csv(profiles: &BTreeMap<String, ActivityProfile>, level: Level, path: &Path) -> Result<()> {
    write_meta_csv(
        path,
        &[("level", level.to_string())],
        &ACTIVITY_HEADER,
        profiles.values().flat_map(|p| {
            p.pub_counts
                .iter()
                .map(|(sc, n)| vec![p.territory_code.clone(), sc.clone(), n.to_string()])
        }),
    )
}

/// Reads publication counts and applies `threshold` to rebuild the profiles.
pub fn read_activity_csv(path: &Path, threshold: u32) -> Result<BTreeMap<String, ActivityProfile>> {
    let csv = read_meta_csv(path, &ACTIVITY_HEADER)?;
    let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for (i, row) in csv.rows.into_iter().enumerate() {
        let n: u64 = row[2]
            .parse()
            .map_err(|_| Error::parse(path, i + 2, format!("invalid count `{}`", row[2])))?;
        counts.entry(row[0].clone()).or_default().insert(row[1].clone(), n);
    }
    Ok(counts
        .into_iter()
        .map(|(t, c)| (t.clone(), ActivityProfile::from_counts(t, c, threshold)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKRow {
    pub subject: String,
    /// (entry, ssi), non-increasing in ssi.
    pub entries: Vec<(String, f64)>,
}

fn by_value_desc(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::Domain("k must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// The `k` highest-SSI subject categories of each territory.
pub fn top_scs_per_territory(report: &SpecializationReport, k: usize) -> Result<Vec<TopKRow>> {
    check_k(k)?;
    Ok(report
        .territories()
        .into_iter()
        .map(|t| {
            let mut entries: Vec<(String, f64)> = report
                .territory_cells(t)
                .map(|c| (c.sc_id.clone(), c.ssi))
                .collect();
            entries.sort_by(by_value_desc);
            entries.truncate(k);
            TopKRow {
                subject: t.to_owned(),
                entries,
            }
        })
        .collect())
}

/// The `k` highest-SSI territories of each subject category; rows ordered
/// by their best SSI, descending.
pub fn top_territories_per_sc(report: &SpecializationReport, k: usize) -> Result<Vec<TopKRow>> {
    check_k(k)?;
    let mut by_sc: BTreeMap<&str, Vec<(String, f64)>> = BTreeMap::new();
    for c in report.cells.values() {
        by_sc
            .entry(c.sc_id.as_str())
            .or_default()
            .push((c.territory_code.clone(), c.ssi));
    }
    let mut rows: Vec<TopKRow> = by_sc
        .into_iter()
        .map(|(sc, mut entries)| {
            entries.sort_by(by_value_desc);
            entries.truncate(k);
            TopKRow {
                subject: sc.to_owned(),
                entries,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        let best = |r: &TopKRow| r.entries.first().map_or(f64::NEG_INFINITY, |e| e.1);
        best(b).total_cmp(&best(a)).then_with(|| a.subject.cmp(&b.subject))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeRatioRow {
    pub subject: String,
    pub active_count: usize,
    pub highly_specialized_count: usize,
    pub non_specialized_count: usize,
    pub ratio_high: f64,
    pub ratio_low: f64,
}

impl ExtremeRatioRow {
    fn new(subject: String, ssis: &[f64], high_cut: f64, low_cut: f64) -> Self {
        let active_count = ssis.len();
        let high = ssis.iter().filter(|&&v| v > high_cut).count();
        let low = ssis.iter().filter(|&&v| v < low_cut).count();
        ExtremeRatioRow {
            subject,
            active_count,
            highly_specialized_count: high,
            non_specialized_count: low,
            ratio_high: high as f64 / active_count as f64,
            ratio_low: low as f64 / active_count as f64,
        }
    }
}

fn check_cuts(high_cut: f64, low_cut: f64) -> Result<()> {
    if high_cut > low_cut {
        Ok(())
    } else {
        Err(Error::Domain(format!("high_cut {high_cut} must exceed low_cut {low_cut}")))
    }
}

fn sort_ratio_rows(rows: &mut [ExtremeRatioRow]) {
    rows.sort_by(|a, b| b.ratio_high.total_cmp(&a.ratio_high).then_with(|| a.subject.cmp(&b.subject)));
}

/// Per territory: share of its active SCs with SSI strictly above
/// `high_cut` and strictly below `low_cut`.
pub fn extreme_ratios_by_territory(
    report: &SpecializationReport,
    profiles: &BTreeMap<String, ActivityProfile>,
    high_cut: f64,
    low_cut: f64,
) -> Result<Vec<ExtremeRatioRow>> {
    check_cuts(high_cut, low_cut)?;
    let mut rows: Vec<ExtremeRatioRow> = report
        .territories()
        .into_iter()
        .filter_map(|t| {
            let profile = profiles.get(t)?;
            let ssis: Vec<f64> = report
                .territory_cells(t)
                .filter(|c| profile.active_scs.contains(&c.sc_id))
                .map(|c| c.ssi)
                .collect();
            (!ssis.is_empty()).then(|| ExtremeRatioRow::new(t.to_owned(), &ssis, high_cut, low_cut))
        })
        .collect();
    sort_ratio_rows(&mut rows);
    Ok(rows)
}

/// Per subject category: share of the territories active in it that are
/// highly specialized / non-specialized.
pub fn extreme_ratios_by_sc(
    report: &SpecializationReport,
    profiles: &BTreeMap<String, ActivityProfile>,
    high_cut: f64,
    low_cut: f64,
) -> Result<Vec<ExtremeRatioRow>> {
    check_cuts(high_cut, low_cut)?;
    let mut by_sc: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for c in report.cells.values() {
        let active = profiles
            .get(&c.territory_code)
            .is_some_and(|p| p.active_scs.contains(&c.sc_id));
        if active {
            by_sc.entry(c.sc_id.as_str()).or_default().push(c.ssi);
        }
    }
    let mut rows: Vec<ExtremeRatioRow> = by_sc
        .into_iter()
        .map(|(sc, ssis)| ExtremeRatioRow::new(sc.to_owned(), &ssis, high_cut, low_cut))
        .collect();
    sort_ratio_rows(&mut rows);
    Ok(rows)
}

/// SS of each active territory in `sc_id` divided by its population.
pub fn strength_per_inhabitant(
    matrix: &StrengthMatrix,
    registry: &TerritoryRegistry,
    sc_id: &str,
) -> Result<BTreeMap<String, f64>> {
    matrix
        .territories()
        .iter()
        .map(|t| {
            let population = registry
                .population(matrix.level(), t)
                .filter(|&p| p > 0)
                .ok_or_else(|| Error::MissingPopulation(t.clone()))?;
            Ok((t.clone(), matrix.value(t, sc_id) / population as f64))
        })
        .collect()
}

/// One row of the regional overview table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub macro_area: String,
    pub region_code: String,
    pub region_name: String,
    pub inhabitants: u64,
    pub provinces: Vec<String>,
    pub universities: usize,
    pub research_institutions: usize,
    pub research_hospitals: usize,
    pub publications: usize,
    pub active_scs: usize,
}

impl RegionSummary {
    pub fn organizations(&self) -> usize {
        self.universities + self.research_institutions + self.research_hospitals
    }
}

/// Regions ordered by macro area, then region name.
pub fn region_summaries(corpus: &Corpus, threshold: u32) -> Vec<RegionSummary> {
    let registry = corpus.territories();
    let profiles = activity_profiles(corpus, Level::Region, threshold);
    let codes = corpus.territory_codes(Level::Region);
    let mut pub_counts = vec![0usize; codes.len()];
    for pos in 0..corpus.len() {
        for &r in corpus.territory_indices(pos, Level::Region) {
            pub_counts[r as usize] += 1;
        }
    }
    let mut rows: Vec<RegionSummary> = codes
        .iter()
        .zip(pub_counts)
        .map(|(code, publications)| {
            let region = &registry.regions[code];
            let mut provinces: Vec<&str> = Vec::new();
            let mut inhabitants = 0;
            for p in registry.provinces_of(code) {
                provinces.push(&p.province_name);
                inhabitants += p.population;
            }
            provinces.sort_unstable();
            let kind_count = |kind: OrgKind| {
                corpus
                    .organizations()
                    .values()
                    .filter(|o| o.org_kind == kind && registry.region_of(&o.province_code) == Some(code))
                    .count()
            };
            RegionSummary {
                macro_area: region.macro_area.clone(),
                region_code: code.clone(),
                region_name: region.region_name.clone(),
                inhabitants,
                provinces: provinces.into_iter().map(str::to_owned).collect(),
                universities: kind_count(OrgKind::University),
                research_institutions: kind_count(OrgKind::ResearchInstitution),
                research_hospitals: kind_count(OrgKind::ResearchHospital),
                publications,
                active_scs: profiles.get(code).map_or(0, |p| p.active_scs.len()),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.macro_area.as_str(), a.region_name.as_str(), a.region_code.as_str())
            .cmp(&(b.macro_area.as_str(), b.region_name.as_str(), b.region_code.as_str()))
    });
    rows
}
