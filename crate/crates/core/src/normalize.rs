//! Article Impact Index: citations standardized by the national mean of
//! the publication's (year, subject category) strata.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PublicationRecord};
use crate::error::{Error, Result};

/// Reference mean used as the AII denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AiiMode {
    /// Mean over every publication of the stratum, the publication included.
    #[default]
    Inclusive,
    /// Mean over the other publications of the stratum.
    LeaveOneOut,
}

impl AiiMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AiiMode::Inclusive => "inclusive",
            AiiMode::LeaveOneOut => "leave_one_out",
        }
    }
}

impl std::str::FromStr for AiiMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inclusive" => Ok(AiiMode::Inclusive),
            "leave_one_out" => Ok(AiiMode::LeaveOneOut),
            other => Err(format!("unknown aii mode `{other}` (expected inclusive or leave_one_out)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub year: i32,
    pub sc_id: String,
    pub pub_count: u64,
    /// Exact integer sum; `mean_citations * pub_count` reproduces it.
    pub citation_sum: u64,
    pub mean_citations: f64,
}

impl Stratum {
    fn new(year: i32, sc_id: String, pub_count: u64, citation_sum: u64) -> Self {
        Stratum {
            year,
            sc_id,
            pub_count,
            citation_sum,
            mean_citations: citation_sum as f64 / pub_count as f64,
        }
    }

    /// Mean of the stratum with one member of `citations` removed.
    pub fn leave_one_out_mean(&self, citations: u64) -> Option<f64> {
        (self.pub_count >= 2)
            .then(|| (self.citation_sum - citations) as f64 / (self.pub_count - 1) as f64)
    }
}

/// Per (year, subject category) citation statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StratumTable {
    by_sc: BTreeMap<String, BTreeMap<i32, Stratum>>,
}

impl StratumTable {
    pub fn get(&self, year: i32, sc_id: &str) -> Option<&Stratum> {
        self.by_sc.get(sc_id)?.get(&year)
    }

    pub fn len(&self) -> usize {
        self.by_sc.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_sc.is_empty()
    }

    /// Strata ordered by (sc_id, year).
    pub fn iter(&self) -> impl Iterator<Item = &Stratum> {
        self.by_sc.values().flat_map(BTreeMap::values)
    }
}

/// A multi-SC publication contributes its full citation count to each of its strata.
pub fn build_strata(corpus: &Corpus) -> StratumTable {
    let mut acc: HashMap<(i32, u32), (u64, u64)> = HashMap::new();
    for (pos, p) in corpus.publications().iter().enumerate() {
        for &sc in corpus.sc_indices(pos) {
            let slot = acc.entry((p.year, sc)).or_default();
            slot.0 += 1;
            slot.1 += p.citations;
        }
    }
    let sc_ids = corpus.sc_ids();
    let mut table = StratumTable::default();
    for ((year, sc), (count, sum)) in acc {
        let sc_id = sc_ids[sc as usize].clone();
        table
            .by_sc
            .entry(sc_id.clone())
            .or_default()
            .insert(year, Stratum::new(year, sc_id, count, sum));
    }
    table
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRecord {
    pub pub_id: String,
    pub aii: f64,
    /// `aii / m` for each of the publication's m subject categories.
    pub per_sc_aii: BTreeMap<String, f64>,
    /// The expected-citation denominator was zero; `aii` was set to 0.
    pub zero_stratum: bool,
}

impl ImpactRecord {
    /// The per-SC fractional value (identical for every SC of the publication).
    pub fn fraction(&self) -> f64 {
        self.aii / self.per_sc_aii.len() as f64
    }
}

/// AII with the equal-weight expected-citation factor over the publication's strata.
pub fn compute_aii(publication: &PublicationRecord, strata: &StratumTable, mode: AiiMode) -> Result<ImpactRecord> {
    let weights = vec![1.0; publication.subject_categories.len()];
    compute_aii_weighted(publication, strata, mode, &weights)
}

/// AII with an explicit weight per subject category (aligned with
/// `publication.subject_categories`) for the expected-citation factor.
pub fn compute_aii_weighted(
    publication: &PublicationRecord,
    strata: &StratumTable,
    mode: AiiMode,
    weights: &[f64],
) -> Result<ImpactRecord> {
    let scs = &publication.subject_categories;
    if weights.len() != scs.len() || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Domain(format!(
            "publication {}: need {} non-negative weights",
            publication.pub_id,
            scs.len()
        )));
    }
    let mut weighted = 0.0;
    let mut weight_total = 0.0;
    for (sc, &w) in scs.iter().zip(weights) {
        let stratum = strata.get(publication.year, sc).ok_or_else(|| Error::MissingStratum {
            pub_id: publication.pub_id.clone(),
            year: publication.year,
            sc_id: sc.clone(),
        })?;
        let mean = match mode {
            AiiMode::Inclusive => stratum.mean_citations,
            AiiMode::LeaveOneOut => stratum
                .leave_one_out_mean(publication.citations)
                .ok_or_else(|| Error::LeaveOneOutUndefined {
                    pub_id: publication.pub_id.clone(),
                    year: publication.year,
                    sc_id: sc.clone(),
                })?,
        };
        weighted += w * mean;
        weight_total += w;
    }
    let factor = weighted / weight_total;
    let zero_stratum = !(factor > 0.0);
    let aii = if zero_stratum {
        0.0
    } else {
        publication.citations as f64 / factor
    };
    let m = scs.len() as f64;
    Ok(ImpactRecord {
        pub_id: publication.pub_id.clone(),
        aii,
        per_sc_aii: scs.iter().map(|sc| (sc.clone(), aii / m)).collect(),
        zero_stratum,
    })
}

/// Impact records aligned with the corpus publication order.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactTable {
    mode: AiiMode,
    records: Vec<ImpactRecord>,
    by_id: HashMap<String, usize>,
}

impl ImpactTable {
    pub fn from_records(mode: AiiMode, records: Vec<ImpactRecord>) -> Self {
        let by_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.pub_id.clone(), i))
            .collect();
        ImpactTable { mode, records, by_id }
    }

    pub fn mode(&self) -> AiiMode {
        self.mode
    }

    pub fn get(&self, pub_id: &str) -> Option<&ImpactRecord> {
        self.by_id.get(pub_id).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[ImpactRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Publications whose stratum denominator was zero.
    pub fn zero_stratum_warnings(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| r.zero_stratum)
            .map(|r| r.pub_id.as_str())
            .collect()
    }
}

pub fn compute_all_impacts(corpus: &Corpus, mode: AiiMode) -> Result<ImpactTable> {
    let strata = build_strata(corpus);
    compute_impacts_with(corpus, &strata, mode)
}

pub fn compute_impacts_with(corpus: &Corpus, strata: &StratumTable, mode: AiiMode) -> Result<ImpactTable> {
    let results: Vec<Result<ImpactRecord>> = corpus
        .publications()
        .par_iter()
        .map(|p| compute_aii(p, strata, mode))
        .collect();
    // first failure in publication order, whatever the thread count
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ImpactTable::from_records(mode, records))
}

/// Diagnostic CSV: `pub_id,year,aii` followed by `sc_i,aii_i` pairs.
pub fn write_aii_dump(corpus: &Corpus, impacts: &ImpactTable, path: &Path) -> Result<()> {
    let width = corpus
        .publications()
        .iter()
        .map(|p| p.subject_categories.len())
        .max()
        .unwrap_or(0);
    let io = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["pub_id".to_owned(), "year".into(), "aii".into()];
    for i in 1..=width {
        header.push(format!("sc_{i}"));
        header.push(format!("aii_{i}"));
    }
    w.write_record(&header).map_err(io)?;
    for p in corpus.publications() {
        let rec = impacts
            .get(&p.pub_id)
            .ok_or_else(|| Error::ImpactCoverage(p.pub_id.clone()))?;
        let mut row = vec![p.pub_id.clone(), p.year.to_string(), rec.aii.to_string()];
        for i in 0..width {
            match p.subject_categories.get(i) {
                Some(sc) => {
                    row.push(sc.clone());
                    row.push(rec.per_sc_aii[sc].to_string());
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
