//! Scientific Strength: fractional AII summed per territory and subject
//! category, each publication counted once per distinct territory.

use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Level};
use crate::error::{Error, Result};
use crate::format::{parse_f64, read_meta_csv, write_meta_csv};
use crate::normalize::{AiiMode, ImpactTable};

/// What the matrix entries measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Sum of fractional AII.
    Strength,
    /// Deduplicated publication counts.
    PubCount,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Strength => "strength",
            Measure::PubCount => "pub_count",
        }
    }
}

/// Territory x subject-category matrix with marginal totals.
///
/// Only active territories (positive total) are stored; rows and columns
/// are sorted by code. Totals are summed in that order, so every build of
/// the same cells is bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthMatrix {
    level: Level,
    measure: Measure,
    territories: Vec<String>,
    sc_ids: Vec<String>,
    values: Vec<f64>,
    present: Vec<bool>,
    territory_totals: Vec<f64>,
    sc_totals: Vec<f64>,
    grand_total: f64,
}

impl StrengthMatrix {
    /// Builds a matrix from explicit `(territory, sc, value)` cells.
    pub fn from_cells<I, T, S>(level: Level, measure: Measure, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, S, f64)>,
        T: Into<String>,
        S: Into<String>,
    {
        let cells: Vec<(String, String, f64)> = cells
            .into_iter()
            .map(|(t, s, v)| (t.into(), s.into(), v))
            .collect();
        let mut territories: Vec<String> = cells.iter().map(|c| c.0.clone()).collect();
        territories.sort();
        territories.dedup();
        let mut sc_ids: Vec<String> = cells.iter().map(|c| c.1.clone()).collect();
        sc_ids.sort();
        sc_ids.dedup();
        let n_sc = sc_ids.len();
        let mut values = vec![0.0; territories.len() * n_sc];
        let mut present = vec![false; values.len()];
        for (t, s, v) in &cells {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::Domain(format!("cell ({t}, {s}) has invalid value {v}")));
            }
            let ti = territories.binary_search(t).expect("collected");
            let si = sc_ids.binary_search(s).expect("collected");
            let k = ti * n_sc + si;
            if present[k] {
                return Err(Error::Domain(format!("duplicate cell ({t}, {s})")));
            }
            values[k] = *v;
            present[k] = true;
        }
        Ok(Self::from_dense(level, measure, territories, sc_ids, values, present))
    }

    fn from_dense(
        level: Level,
        measure: Measure,
        territories: Vec<String>,
        sc_ids: Vec<String>,
        values: Vec<f64>,
        present: Vec<bool>,
    ) -> Self {
        let n_sc = sc_ids.len();
        let row_total = |t: usize| values[t * n_sc..(t + 1) * n_sc].iter().fold(0.0, |a, &v| a + v);
        let keep: Vec<usize> = (0..territories.len()).filter(|&t| row_total(t) > 0.0).collect();
        let keep_sc: Vec<usize> = (0..n_sc)
            .filter(|&s| keep.iter().any(|&t| present[t * n_sc + s]))
            .collect();

        let mut out_values = Vec::with_capacity(keep.len() * keep_sc.len());
        let mut out_present = Vec::with_capacity(out_values.capacity());
        for &t in &keep {
            for &s in &keep_sc {
                out_values.push(values[t * n_sc + s]);
                out_present.push(present[t * n_sc + s]);
            }
        }
        let territories: Vec<String> = keep.iter().map(|&t| territories[t].clone()).collect();
        let sc_ids: Vec<String> = keep_sc.iter().map(|&s| sc_ids[s].clone()).collect();
        let n_sc = sc_ids.len();

        let territory_totals: Vec<f64> = (0..territories.len())
            .map(|t| out_values[t * n_sc..(t + 1) * n_sc].iter().fold(0.0, |a, &v| a + v))
            .collect();
        let sc_totals: Vec<f64> = (0..n_sc)
            .map(|s| (0..territories.len()).fold(0.0, |a, t| a + out_values[t * n_sc + s]))
            .collect();
        let grand_total = territory_totals.iter().fold(0.0, |a, &v| a + v);

        StrengthMatrix {
            level,
            measure,
            territories,
            sc_ids,
            values: out_values,
            present: out_present,
            territory_totals,
            sc_totals,
            grand_total,
        }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// Active territories, sorted.
    pub fn territories(&self) -> &[String] {
        &self.territories
    }

    pub fn sc_ids(&self) -> &[String] {
        &self.sc_ids
    }

    pub fn is_empty(&self) -> bool {
        self.territories.is_empty()
    }

    pub fn territory_index(&self, code: &str) -> Option<usize> {
        self.territories.binary_search_by(|t| t.as_str().cmp(code)).ok()
    }

    pub fn sc_index(&self, sc_id: &str) -> Option<usize> {
        self.sc_ids.binary_search_by(|s| s.as_str().cmp(sc_id)).ok()
    }

    pub fn is_active(&self, territory: &str) -> bool {
        self.territory_index(territory).is_some()
    }

    /// Value of a cell; absent cells read as 0.
    pub fn value(&self, territory: &str, sc_id: &str) -> f64 {
        match (self.territory_index(territory), self.sc_index(sc_id)) {
            (Some(t), Some(s)) => self.value_at(t, s),
            _ => 0.0,
        }
    }

    pub fn value_at(&self, t: usize, s: usize) -> f64 {
        self.values[t * self.sc_ids.len() + s]
    }

    pub fn is_present(&self, territory: &str, sc_id: &str) -> bool {
        match (self.territory_index(territory), self.sc_index(sc_id)) {
            (Some(t), Some(s)) => self.present[t * self.sc_ids.len() + s],
            _ => false,
        }
    }

    /// Row total; inactive territories read as 0.
    pub fn territory_total(&self, territory: &str) -> f64 {
        self.territory_index(territory)
            .map_or(0.0, |t| self.territory_totals[t])
    }

    pub fn territory_total_at(&self, t: usize) -> f64 {
        self.territory_totals[t]
    }

    pub fn sc_total(&self, sc_id: &str) -> f64 {
        self.sc_index(sc_id).map_or(0.0, |s| self.sc_totals[s])
    }

    pub fn sc_total_at(&self, s: usize) -> f64 {
        self.sc_totals[s]
    }

    pub fn grand_total(&self) -> f64 {
        self.grand_total
    }

    /// Cells that received at least one contribution, territory-major.
    pub fn cells(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        let n_sc = self.sc_ids.len();
        (0..self.values.len())
            .filter(move |&k| self.present[k])
            .map(move |k| {
                (
                    self.territories[k / n_sc].as_str(),
                    self.sc_ids[k % n_sc].as_str(),
                    self.values[k],
                )
            })
    }

    /// Same cells with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let cells: Vec<(String, String, f64)> = self
            .cells()
            .map(|(t, s, v)| (t.to_owned(), s.to_owned(), v * factor))
            .collect();
        Self::from_cells(self.level, self.measure, cells)
    }
}

/// Credits each publication's fractional AII to every distinct territory
/// of its organizations, once per territory.
pub fn build_strength(corpus: &Corpus, impacts: &ImpactTable, level: Level) -> Result<StrengthMatrix> {
    let mut fractions: Vec<Vec<f64>> = Vec::with_capacity(corpus.len());
    for p in corpus.publications() {
        let record = impacts
            .get(&p.pub_id)
            .ok_or_else(|| Error::ImpactCoverage(p.pub_id.clone()))?;
        let row = p
            .subject_categories
            .iter()
            .map(|sc| {
                record
                    .per_sc_aii
                    .get(sc)
                    .copied()
                    .ok_or_else(|| Error::ImpactCoverage(p.pub_id.clone()))
            })
            .collect::<Result<Vec<f64>>>()?;
        fractions.push(row);
    }
    Ok(accumulate(corpus, level, Measure::Strength, |pos, k| fractions[pos][k]))
}

/// Deduplicated publication counts per territory and SC (whole counting).
pub fn build_count_matrix(corpus: &Corpus, level: Level) -> StrengthMatrix {
    accumulate(corpus, level, Measure::PubCount, |_, _| 1.0)
}

/// Each territory row is summed by one worker in publication order, so the
/// result does not depend on the thread count.
fn accumulate<F>(corpus: &Corpus, level: Level, measure: Measure, contribution: F) -> StrengthMatrix
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let codes = corpus.territory_codes(level);
    let n_sc = corpus.sc_ids().len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); codes.len()];
    for pos in 0..corpus.len() {
        for &t in corpus.territory_indices(pos, level) {
            members[t as usize].push(pos);
        }
    }
    let rows: Vec<(Vec<f64>, Vec<bool>)> = members
        .par_iter()
        .map(|pubs| {
            let mut row = vec![0.0; n_sc];
            let mut present = vec![false; n_sc];
            for &pos in pubs {
                for (k, &sc) in corpus.sc_indices(pos).iter().enumerate() {
                    row[sc as usize] += contribution(pos, k);
                    present[sc as usize] = true;
                }
            }
            (row, present)
        })
        .collect();
    let mut values = Vec::with_capacity(codes.len() * n_sc);
    let mut present = Vec::with_capacity(codes.len() * n_sc);
    for (row, p) in rows {
        values.extend(row);
        present.extend(p);
    }
    StrengthMatrix::from_dense(level, measure, codes.to_vec(), corpus.sc_ids().to_vec(), values, present)
}

pub fn strength_share(matrix: &StrengthMatrix, territory: &str, sc_id: &str) -> Result<f64> {
    let t = matrix
        .territory_index(territory)
        .ok_or_else(|| Error::InactiveTerritory(territory.to_owned()))?;
    let total = matrix.territory_total_at(t);
    if !(total > 0.0) {
        return Err(Error::InactiveTerritory(territory.to_owned()));
    }
    Ok(matrix.sc_index(sc_id).map_or(0.0, |s| matrix.value_at(t, s)) / total)
}

pub fn national_share(matrix: &StrengthMatrix, sc_id: &str) -> Result<f64> {
    if !(matrix.grand_total() > 0.0) {
        return Err(Error::EmptyMatrix);
    }
    Ok(matrix.sc_total(sc_id) / matrix.grand_total())
}

pub const STRENGTH_HEADER: [&str; 3] = ["territory_code", "sc_id", "ss"];

/// Provenance written as metadata rows of every matrix export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub census_date: NaiveDate,
    pub aii_mode: AiiMode,
}

pub fn write_strength_csv(matrix: &StrengthMatrix, provenance: &Provenance, path: &Path) -> Result<()> {
    write_meta_csv(
        path,
        &[
            ("level", matrix.level().to_string()),
            ("measure", matrix.measure().as_str().to_owned()),
            ("census_date", provenance.census_date.to_string()),
            ("aii_mode", provenance.aii_mode.as_str().to_owned()),
        ],
        &STRENGTH_HEADER,
        matrix
            .cells()
            .map(|(t, s, v)| vec![t.to_owned(), s.to_owned(), v.to_string()]),
    )
}

pub fn read_strength_csv(path: &Path) -> Result<(StrengthMatrix, Provenance)> {
    let csv = read_meta_csv(path, &STRENGTH_HEADER)?;
    let meta = |key: &str| {
        csv.meta
            .get(key)
            .cloned()
            .ok_or_else(|| Error::parse(path, 0, format!("missing metadata `{key}`")))
    };
    let level: Level = meta("level")?.parse().map_err(|e: String| Error::parse(path, 0, e))?;
    let measure = match meta("measure")?.as_str() {
        "strength" => Measure::Strength,
        "pub_count" => Measure::PubCount,
        other => return Err(Error::parse(path, 0, format!("unknown measure `{other}`"))),
    };
    let census_date = meta("census_date")?
        .parse()
        .map_err(|e| Error::parse(path, 0, format!("census_date: {e}")))?;
    let aii_mode = meta("aii_mode")?.parse().map_err(|e: String| Error::parse(path, 0, e))?;
    let mut cells = Vec::with_capacity(csv.rows.len());
    for (i, row) in csv.rows.into_iter().enumerate() {
        let v = parse_f64(path, i + 2, &row[2])?;
        let mut it = row.into_iter();
        cells.push((it.next().unwrap(), it.next().unwrap(), v));
    }
    let matrix = StrengthMatrix::from_cells(level, measure, cells)?;
    Ok((matrix, Provenance { census_date, aii_mode }))
}
