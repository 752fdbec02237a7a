//! Declarative run configuration.
//!
//! The on-disk form is a flat TOML document whose keys mirror the field
//! names below. Command-line flags are applied on top by the driver.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocType, Level};
use crate::error::{Error, Result};
use crate::normalize::AiiMode;
use crate::specialization::{AiBasis, BandConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pubs: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orgs: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub territories: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<PathBuf>,

    pub levels: Vec<Level>,
    pub aii_mode: AiiMode,
    pub doc_types: BTreeSet<DocType>,
    pub census_date: NaiveDate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub year_start: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub year_end: Option<i32>,

    /// Minimum publications for an SC to count as active in a region.
    pub threshold_region: u32,
    /// Minimum publications for an SC to count as active in a province.
    pub threshold_province: u32,

    pub band_strong_low: f64,
    pub band_low: f64,
    pub band_high: f64,
    pub band_strong_high: f64,

    pub high_cut: f64,
    pub low_cut: f64,
    pub top_k: usize,
    pub decimals: usize,
    pub ai_basis: AiBasis,

    /// Subject categories drawn as radar series; empty picks one per discipline.
    pub radar_scs: Vec<String>,
    pub radar_level: Level,
    /// Radar canvas width in pixels.
    pub radar_size: u32,
    /// SSI levels of the radar gridline rings.
    pub radar_grid: Vec<f64>,
    /// Subject categories exported as map data; empty exports every one.
    pub map_scs: Vec<String>,
    /// Write the per-publication AII diagnostic dump.
    pub aii_dump: bool,

    /// Execution detail only; never part of the config echo.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let bands = BandConfig::default();
        RunConfig {
            pubs: None,
            orgs: None,
            territories: None,
            taxonomy: None,
            levels: vec![Level::Province, Level::Region],
            aii_mode: AiiMode::Inclusive,
            doc_types: DocType::default_filter(),
            census_date: NaiveDate::from_ymd_opt(2011, 12, 31).expect("valid date"),
            year_start: None,
            year_end: None,
            threshold_region: 10,
            threshold_province: 1,
            band_strong_low: bands.strong_low,
            band_low: bands.low,
            band_high: bands.high,
            band_strong_high: bands.strong_high,
            high_cut: 50.0,
            low_cut: -50.0,
            top_k: 3,
            decimals: 1,
            ai_basis: AiBasis::Strength,
            radar_scs: Vec::new(),
            radar_level: Level::Region,
            radar_size: 640,
            radar_grid: vec![-50.0, 0.0, 50.0, 100.0],
            map_scs: Vec::new(),
            aii_dump: false,
            workers: None,
            seed: None,
            out: None,
        }
    }
}

impl RunConfig {
    /// Reads a TOML config. A `.json` file is taken to be a run manifest and
    /// its embedded `config` object is used instead.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let mut config: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            let mut value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
            let embedded = value
                .get_mut("config")
                .map(serde_json::Value::take)
                .ok_or_else(|| Error::parse(path, 0, "manifest has no `config` object"))?;
            serde_json::from_value(embedded).map_err(|e| Error::parse(path, 0, e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::parse(path, 0, e.to_string()))?
        };
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [
            &mut config.pubs,
            &mut config.orgs,
            &mut config.territories,
            &mut config.taxonomy,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold_region < 1 || self.threshold_province < 1 {
            return Err(Error::Config("activity thresholds must be >= 1".into()));
        }
        if !(self.high_cut > self.low_cut) {
            return Err(Error::Config(format!(
                "high_cut ({}) must exceed low_cut ({})",
                self.high_cut, self.low_cut
            )));
        }
        if self.top_k < 1 {
            return Err(Error::Config("top_k must be >= 1".into()));
        }
        if self.decimals > 12 {
            return Err(Error::Config("decimals must be <= 12".into()));
        }
        if self.levels.is_empty() {
            return Err(Error::Config("at least one level is required".into()));
        }
        if self.doc_types.is_empty() {
            return Err(Error::Config("doc_types filter is empty".into()));
        }
        if let (Some(a), Some(b)) = (self.year_start, self.year_end) {
            if a > b {
                return Err(Error::Config(format!("year_start {a} > year_end {b}")));
            }
        }
        if self.radar_size < 200 {
            return Err(Error::Config("radar_size must be >= 200".into()));
        }
        if self.radar_grid.iter().any(|g| !(-100.0..=100.0).contains(g)) {
            return Err(Error::Config("radar_grid levels must lie in [-100, 100]".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        self.bands().validate()
    }

    pub fn bands(&self) -> BandConfig {
        BandConfig {
            strong_low: self.band_strong_low,
            low: self.band_low,
            high: self.band_high,
            strong_high: self.band_strong_high,
        }
    }

    pub fn threshold(&self, level: Level) -> u32 {
        match level {
            Level::Province => self.threshold_province,
            Level::Region => self.threshold_region,
        }
    }

    /// Canonicalizes input paths so a config echo is location independent.
    pub fn absolutize_inputs(&mut self) {
        for p in [
            &mut self.pubs,
            &mut self.orgs,
            &mut self.territories,
            &mut self.taxonomy,
        ]
        .into_iter()
        .flatten()
        {
            if let Ok(abs) = std::fs::canonicalize(&*p) {
                *p = abs;
            }
        }
    }

    pub fn input_paths(&self) -> Result<InputPaths<'_>> {
        fn need<'a>(p: &'a Option<PathBuf>, name: &str) -> Result<&'a Path> {
            p.as_deref()
                .ok_or_else(|| Error::Config(format!("missing input path `{name}`")))
        }
        Ok(InputPaths {
            pubs: need(&self.pubs, "pubs")?,
            orgs: need(&self.orgs, "orgs")?,
            territories: need(&self.territories, "territories")?,
            taxonomy: need(&self.taxonomy, "taxonomy")?,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct InputPaths<'a> {
    pub pubs: &'a Path,
    pub orgs: &'a Path,
    pub territories: &'a Path,
    pub taxonomy: &'a Path,
}
