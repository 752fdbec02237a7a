//! Specialization indicators over a [`StrengthMatrix`].
//!
//! For territory `k` and subject category `j` let
//!
//! ```text
//! r = (SS_kj / sum_i SS_ki) / (sum_k SS_kj / sum_k sum_i SS_ki)
//! ```
//!
//! The Scientific Specialization Index is `100 * tanh(ln r)`, bounded in
//! [-100, 100] and 0 at the national average. The Activity Index is `r`
//! itself and the Relative Specialization Index is `(r - 1) / (r + 1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Level;
use crate::error::{Error, Result};
use crate::format::{parse_f64, read_meta_csv, write_meta_csv};
use crate::strength::{national_share, strength_share, Measure, Provenance, StrengthMatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AiBasis {
    /// Shares of Scientific Strength; the ratio inside the SSI.
    #[default]
    Strength,
    /// Shares of deduplicated publication counts (classical AI).
    PubCount,
}

impl AiBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            AiBasis::Strength => "strength",
            AiBasis::PubCount => "pub_count",
        }
    }
}

impl std::str::FromStr for AiBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strength" => Ok(AiBasis::Strength),
            "pub_count" => Ok(AiBasis::PubCount),
            other => Err(format!("unknown ai basis `{other}`")),
        }
    }
}

/// SSI band edges: `strong_low < low <= high < strong_high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandConfig {
    pub strong_low: f64,
    pub low: f64,
    pub high: f64,
    pub strong_high: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        BandConfig {
            strong_low: -50.0,
            low: -10.0,
            high: 10.0,
            strong_high: 50.0,
        }
    }
}

impl BandConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = -100.0 <= self.strong_low
            && self.strong_low < self.low
            && self.low <= self.high
            && self.high < self.strong_high
            && self.strong_high <= 100.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("band edges out of order: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    HighlySpecialized,
    Specialized,
    Expected,
    DeSpecialized,
    StronglyDeSpecialized,
    Inactive,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::HighlySpecialized => "highly_specialized",
            Label::Specialized => "specialized",
            Label::Expected => "expected",
            Label::DeSpecialized => "de_specialized",
            Label::StronglyDeSpecialized => "strongly_de_specialized",
            Label::Inactive => "inactive",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        [
            Label::HighlySpecialized,
            Label::Specialized,
            Label::Expected,
            Label::DeSpecialized,
            Label::StronglyDeSpecialized,
            Label::Inactive,
        ]
        .into_iter()
        .find(|l| l.as_str() == s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The share ratio `r` of territory over nation for one subject category.
pub fn share_ratio(matrix: &StrengthMatrix, territory: &str, sc_id: &str) -> Result<f64> {
    let share = strength_share(matrix, territory, sc_id)?;
    let national = national_share(matrix, sc_id)?;
    if !(national > 0.0) {
        return Err(Error::UndefinedShare(sc_id.to_owned()));
    }
    Ok(share / national)
}

/// `100 * tanh(ln r)`, with `r = 0` mapped to -100 exactly.
pub fn ssi_from_ratio(r: f64) -> f64 {
    if r == 0.0 {
        -100.0
    } else {
        100.0 * r.ln().tanh()
    }
}

pub fn ssi(matrix: &StrengthMatrix, territory: &str, sc_id: &str) -> Result<f64> {
    share_ratio(matrix, territory, sc_id).map(ssi_from_ratio)
}

/// Activity Index on whatever the matrix measures: a strength matrix gives
/// the ratio inside the SSI, a count matrix the classical count-based AI.
pub fn activity_index(matrix: &StrengthMatrix, territory: &str, sc_id: &str) -> Result<f64> {
    share_ratio(matrix, territory, sc_id)
}

pub fn rsi(ai: f64) -> Result<f64> {
    if !(ai >= 0.0) || ai.is_infinite() {
        return Err(Error::Domain(format!("activity index must be finite and >= 0, got {ai}")));
    }
    Ok((ai - 1.0) / (ai + 1.0))
}

pub fn label_of(ssi: f64, bands: &BandConfig) -> Result<Label> {
    if !(-100.0..=100.0).contains(&ssi) {
        return Err(Error::Domain(format!("ssi {ssi} outside [-100, 100]")));
    }
    Ok(if ssi > bands.strong_high {
        Label::HighlySpecialized
    } else if ssi > bands.high {
        Label::Specialized
    } else if ssi >= bands.low {
        Label::Expected
    } else if ssi >= bands.strong_low {
        Label::DeSpecialized
    } else {
        Label::StronglyDeSpecialized
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub bands: BandConfig,
    pub ai_basis: AiBasis,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            bands: BandConfig::default(),
            ai_basis: AiBasis::Strength,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecializationCell {
    pub territory_code: String,
    pub sc_id: String,
    pub ssi: f64,
    pub ai: f64,
    pub rsi: f64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecializationReport {
    pub level: Level,
    /// Keyed by (territory_code, sc_id).
    pub cells: BTreeMap<(String, String), SpecializationCell>,
    pub config: ReportConfig,
    pub warnings: Vec<String>,
}

impl SpecializationReport {
    pub fn cell(&self, territory: &str, sc_id: &str) -> Option<&SpecializationCell> {
        self.cells.get(&(territory.to_owned(), sc_id.to_owned()))
    }

    pub fn territories(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.cells.keys().map(|(t, _)| t.as_str()).collect();
        out.dedup();
        out
    }

    pub fn sc_ids(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.cells.keys().map(|(_, s)| s.as_str()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Cells of one territory, ordered by sc_id.
    pub fn territory_cells<'a>(&'a self, territory: &'a str) -> impl Iterator<Item = &'a SpecializationCell> + 'a {
        self.cells
            .range((territory.to_owned(), String::new())..)
            .take_while(move |((t, _), _)| t == territory)
            .map(|(_, c)| c)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// One cell per active territory and subject category with a positive
/// national total. `counts` must be given when the AI basis is `pub_count`.
pub fn build_report(
    matrix: &StrengthMatrix,
    counts: Option<&StrengthMatrix>,
    config: &ReportConfig,
) -> Result<SpecializationReport> {
    config.bands.validate()?;
    if matrix.is_empty() || !(matrix.grand_total() > 0.0) {
        return Err(Error::EmptyMatrix);
    }
    let counts = match config.ai_basis {
        AiBasis::Strength => None,
        AiBasis::PubCount => Some(counts.filter(|c| c.measure() == Measure::PubCount).ok_or_else(|| {
            Error::Config("ai_basis pub_count needs a publication-count matrix".into())
        })?),
    };

    let mut warnings = Vec::new();
    if matrix.territories().len() == 1 {
        warnings.push(format!(
            "single active territory {}: national reference is degenerate, every ssi is 0",
            matrix.territories()[0]
        ));
    }
    let sc_ids: Vec<&str> = matrix
        .sc_ids()
        .iter()
        .enumerate()
        .filter_map(|(s, id)| {
            if matrix.sc_total_at(s) > 0.0 {
                Some(id.as_str())
            } else {
                warnings.push(format!("subject category {id} has zero national total; excluded"));
                None
            }
        })
        .collect();

    let rows: Vec<Vec<SpecializationCell>> = matrix
        .territories()
        .par_iter()
        .map(|t| {
            sc_ids
                .iter()
                .map(|&sc| {
                    let r = share_ratio(matrix, t, sc)?;
                    let ssi = ssi_from_ratio(r);
                    let ai = match counts {
                        None => r,
                        Some(c) => activity_index(c, t, sc)?,
                    };
                    Ok(SpecializationCell {
                        territory_code: t.clone(),
                        sc_id: sc.to_owned(),
                        ssi,
                        ai,
                        rsi: rsi(ai)?,
                        label: label_of(ssi, &config.bands)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let cells = rows
        .into_iter()
        .flatten()
        .map(|c| ((c.territory_code.clone(), c.sc_id.clone()), c))
        .collect();
    Ok(SpecializationReport {
        level: matrix.level(),
        cells,
        config: *config,
        warnings,
    })
}

pub const REPORT_HEADER: [&str; 6] = ["territory_code", "sc_id", "ssi", "ai", "rsi", "label"];

pub fn write_report_csv(report: &SpecializationReport, provenance: &Provenance, path: &Path) -> Result<()> {
    let b = &report.config.bands;
    write_meta_csv(
        path,
        &[
            ("level", report.level.to_string()),
            ("census_date", provenance.census_date.to_string()),
            ("aii_mode", provenance.aii_mode.as_str().to_owned()),
            ("ai_basis", report.config.ai_basis.as_str().to_owned()),
            ("band_strong_low", b.strong_low.to_string()),
            ("band_low", b.low.to_string()),
            ("band_high", b.high.to_string()),
            ("band_strong_high", b.strong_high.to_string()),
        ],
        &REPORT_HEADER,
        report.cells.values().map(|c| {
            vec![
                c.territory_code.clone(),
                c.sc_id.clone(),
                c.ssi.to_string(),
                c.ai.to_string(),
                c.rsi.to_string(),
                c.label.as_str().to_owned(),
            ]
        }),
    )
}

pub fn read_report_csv(path: &Path) -> Result<(SpecializationReport, Provenance)> {
    let csv = read_meta_csv(path, &REPORT_HEADER)?;
    let meta = |key: &str| {
        csv.meta
            .get(key)
            .ok_or_else(|| Error::parse(path, 0, format!("missing metadata `{key}`")))
    };
    let num = |key: &str| -> Result<f64> { parse_f64(path, 0, meta(key)?) };
    let level: Level = meta("level")?.parse().map_err(|e: String| Error::parse(path, 0, e))?;
    let provenance = Provenance {
        census_date: meta("census_date")?
            .parse()
            .map_err(|e| Error::parse(path, 0, format!("census_date: {e}")))?,
        aii_mode: meta("aii_mode")?.parse().map_err(|e: String| Error::parse(path, 0, e))?,
    };
    let config = ReportConfig {
        bands: BandConfig {
            strong_low: num("band_strong_low")?,
            low: num("band_low")?,
            high: num("band_high")?,
            strong_high: num("band_strong_high")?,
        },
        ai_basis: meta("ai_basis")?.parse().map_err(|e: String| Error::parse(path, 0, e))?,
    };
    let mut cells = BTreeMap::new();
    for (i, row) in csv.rows.into_iter().enumerate() {
        let line = i + 2;
        let label = Label::parse(&row[5]).ok_or_else(|| Error::parse(path, line, format!("unknown label `{}`", row[5])))?;
        let cell = SpecializationCell {
            territory_code: row[0].clone(),
            sc_id: row[1].clone(),
            ssi: parse_f64(path, line, &row[2])?,
            ai: parse_f64(path, line, &row[3])?,
            rsi: parse_f64(path, line, &row[4])?,
            label,
        };
        cells.insert((cell.territory_code.clone(), cell.sc_id.clone()), cell);
    }
    Ok((
        SpecializationReport {
            level,
            cells,
            config,
            warnings: Vec::new(),
        },
        provenance,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strength::Measure;

    fn ab() -> StrengthMatrix {
        StrengthMatrix::from_cells(
            Level::Region,
            Measure::Strength,
            [("A", "X", 8.0), ("A", "Y", 2.0), ("B", "X", 2.0), ("B", "Y", 8.0)],
        )
        .unwrap()
    }

    #[test]
    fn neutral_ratio_is_zero() {
        assert_eq!(ssi_from_ratio(1.0), 0.0);
    }

    #[test]
    fn hand_fixture_values() {
        let m = ab();
        assert!((ssi(&m, "A", "X").unwrap() - 43.8).abs() < 0.1);
        assert!((ssi(&m, "A", "Y").unwrap() + 72.4).abs() < 0.1);
        assert_eq!(activity_index(&m, "A", "X").unwrap(), 1.6);
    }

    #[test]
    fn zero_share_is_minus_hundred() {
        let m = StrengthMatrix::from_cells(
            Level::Region,
            Measure::Strength,
            [("A", "X", 5.0), ("B", "X", 1.0), ("B", "Y", 1.0)],
        )
        .unwrap();
        assert_eq!(ssi(&m, "A", "Y").unwrap(), -100.0);
        assert!(matches!(ssi(&m, "C", "Y"), Err(Error::InactiveTerritory(_))));
    }

    #[test]
    fn proportional_territory_has_unit_ai() {
        let m = StrengthMatrix::from_cells(
            Level::Region,
            Measure::Strength,
            [("A", "X", 1.0), ("A", "Y", 3.0), ("B", "X", 2.0), ("B", "Y", 6.0)],
        )
        .unwrap();
        for t in ["A", "B"] {
            for s in ["X", "Y"] {
                assert!((activity_index(&m, t, s).unwrap() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rsi_values() {
        assert_eq!(rsi(1.0).unwrap(), 0.0);
        assert!((rsi(1.6).unwrap() - 0.2308).abs() < 1e-4);
        assert_eq!(rsi(0.0).unwrap(), -1.0);
        assert!(matches!(rsi(-0.1), Err(Error::Domain(_))));
        assert!(rsi(f64::NAN).is_err());
    }

    #[test]
    fn labels() {
        let b = BandConfig::default();
        assert_eq!(label_of(65.0, &b).unwrap(), Label::HighlySpecialized);
        assert_eq!(label_of(50.0, &b).unwrap(), Label::Specialized);
        assert_eq!(label_of(10.0, &b).unwrap(), Label::Expected);
        assert_eq!(label_of(0.0, &b).unwrap(), Label::Expected);
        assert_eq!(label_of(-10.0, &b).unwrap(), Label::Expected);
        assert_eq!(label_of(-10.5, &b).unwrap(), Label::DeSpecialized);
        assert_eq!(label_of(-50.0, &b).unwrap(), Label::DeSpecialized);
        assert_eq!(label_of(-72.4, &b).unwrap(), Label::StronglyDeSpecialized);
        assert_eq!(label_of(-100.0, &b).unwrap(), Label::StronglyDeSpecialized);
        assert_eq!(label_of(100.0, &b).unwrap(), Label::HighlySpecialized);
        assert!(label_of(100.5, &b).is_err());
        assert!(label_of(f64::NAN, &b).is_err());
    }

    #[test]
    fn report_over_ab() {
        let report = build_report(&ab(), None, &ReportConfig::default()).unwrap();
        assert_eq!(report.len(), 4);
        let ax = report.cell("A", "X").unwrap();
        assert!((ax.ssi - 43.8).abs() < 0.1);
        assert_eq!(ax.ai, 1.6);
        assert_eq!(ax.label, Label::Specialized);
        assert_eq!(report.cell("B", "X").unwrap().label, Label::StronglyDeSpecialized);
        assert_eq!(report.territories(), ["A", "B"]);
        assert_eq!(report.territory_cells("B").count(), 2);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn single_territory_is_all_zero() {
        let m = StrengthMatrix::from_cells(
            Level::Region,
            Measure::Strength,
            [("A", "X", 3.3), ("A", "Y", 0.7), ("A", "Z", 11.0)],
        )
        .unwrap();
        let report = build_report(&m, None, &ReportConfig::default()).unwrap();
        assert!(report.cells.values().all(|c| c.ssi == 0.0));
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn inactive_territory_excluded() {
        let m = StrengthMatrix::from_cells(
            Level::Region,
            Measure::Strength,
            [("A", "X", 1.0), ("B", "Y", 2.0), ("C", "X", 0.0)],
        )
        .unwrap();
        let report = build_report(&m, None, &ReportConfig::default()).unwrap();
        assert_eq!(report.territories(), ["A", "B"]);
        assert_eq!(report.len(), 4);
    }

    #[test]
    fn zero_national_sc_excluded() {
        let m = StrengthMatrix::from_cells(
            Level::Region,
            Measure::Strength,
            [("A", "X", 1.0), ("A", "Z", 0.0), ("B", "Y", 2.0)],
        )
        .unwrap();
        let report = build_report(&m, None, &ReportConfig::default()).unwrap();
        assert_eq!(report.sc_ids(), ["X", "Y"]);
        assert!(report.warnings.iter().any(|w| w.contains("Z")));
    }

    #[test]
    fn empty_matrix_rejected() {
        let m = StrengthMatrix::from_cells(Level::Region, Measure::Strength, Vec::<(String, String, f64)>::new()).unwrap();
        assert!(matches!(build_report(&m, None, &ReportConfig::default()), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn pub_count_basis_needs_counts() {
        let config = ReportConfig {
            ai_basis: AiBasis::PubCount,
            ..Default::default()
        };
        assert!(matches!(build_report(&ab(), None, &config), Err(Error::Config(_))));
        let counts = StrengthMatrix::from_cells(
            Level::Region,
            Measure::PubCount,
            [("A", "X", 4.0), ("A", "Y", 4.0), ("B", "X", 4.0), ("B", "Y", 4.0)],
        )
        .unwrap();
        let report = build_report(&ab(), Some(&counts), &config).unwrap();
        let ax = report.cell("A", "X").unwrap();
        assert_eq!(ax.ai, 1.0);
        assert_eq!(ax.rsi, 0.0);
        assert!(ax.ssi > 40.0);
    }

    #[test]
    fn report_csv_round_trip() {
        let report = build_report(&ab(), None, &ReportConfig::default()).unwrap();
        let provenance = Provenance {
            census_date: chrono::NaiveDate::from_ymd_opt(2011, 12, 31).unwrap(),
            aii_mode: crate::normalize::AiiMode::Inclusive,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report_csv(&report, &provenance, &path).unwrap();
        let (back, prov) = read_report_csv(&path).unwrap();
        assert_eq!(back.cells, report.cells);
        assert_eq!(back.config, report.config);
        assert_eq!(prov, provenance);
    }
}
