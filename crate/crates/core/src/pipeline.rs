//! End-to-end orchestration: in-memory analysis plus the stage writers used
//! by the command-line driver.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analytics::{
    activity_profiles, extreme_ratios_by_sc, extreme_ratios_by_territory, region_summaries, top_scs_per_territory,
    top_territories_per_sc, write_activity_csv, ActivityProfile,
};
use crate::config::RunConfig;
use crate::corpus::{load_corpus, Corpus, Discipline, Level, LoadSummary, SubjectCategoryTaxonomy, TerritoryRegistry};
use crate::error::{Error, Result};
use crate::normalize::{compute_all_impacts, write_aii_dump, ImpactTable};
use crate::report::{
    emit_table, export_map_data, render_radar, AnalysisResult, RadarSeries, RadarSpec, RadarStyle, TableStyle,
};
use crate::specialization::{build_report, write_report_csv, AiBasis, ReportConfig, SpecializationReport};
use crate::strength::{build_count_matrix, build_strength, write_strength_csv, Provenance, StrengthMatrix};

pub const TOOL: &str = "specforge";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "run_manifest.json";

/// Runs `f` on a dedicated pool of `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn load(config: &RunConfig) -> Result<Corpus> {
    let p = config.input_paths()?;
    load_corpus(p.pubs, p.orgs, p.territories, p.taxonomy, config)
}

pub fn report_config(config: &RunConfig) -> ReportConfig {
    ReportConfig {
        bands: config.bands(),
        ai_basis: config.ai_basis,
    }
}

pub fn provenance(corpus: &Corpus, config: &RunConfig) -> Provenance {
    Provenance {
        census_date: corpus.census_date(),
        aii_mode: config.aii_mode,
    }
}

#[derive(Debug, Clone)]
pub struct LevelAnalysis {
    pub level: Level,
    pub strength: StrengthMatrix,
    pub counts: StrengthMatrix,
    pub report: SpecializationReport,
    pub profiles: BTreeMap<String, ActivityProfile>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub impacts: ImpactTable,
    pub levels: Vec<LevelAnalysis>,
    pub warnings: Vec<String>,
}

impl Analysis {
    pub fn level(&self, level: Level) -> Option<&LevelAnalysis> {
        self.levels.iter().find(|l| l.level == level)
    }
}

pub fn analyze_level(corpus: &Corpus, impacts: &ImpactTable, level: Level, config: &RunConfig) -> Result<LevelAnalysis> {
    let strength = build_strength(corpus, impacts, level)?;
    let counts = build_count_matrix(corpus, level);
    let report = build_report(&strength, Some(&counts), &report_config(config))?;
    let profiles = activity_profiles(corpus, level, config.threshold(level));
    Ok(LevelAnalysis {
        level,
        strength,
        counts,
        report,
        profiles,
    })
}

/// The specialization report for one level, straight from a corpus.
pub fn specialization_report(corpus: &Corpus, level: Level, config: &RunConfig) -> Result<SpecializationReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus {
            dropped: corpus.load_summary().dropped,
        });
    }
    let impacts = compute_all_impacts(corpus, config.aii_mode)?;
    let strength = build_strength(corpus, &impacts, level)?;
    let counts = match config.ai_basis {
        AiBasis::Strength => None,
        AiBasis::PubCount => Some(build_count_matrix(corpus, level)),
    };
    build_report(&strength, counts.as_ref(), &report_config(config))
}

pub fn analyze(corpus: &Corpus, config: &RunConfig) -> Result<Analysis> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus {
            dropped: corpus.load_summary().dropped,
        });
    }
    let impacts = compute_all_impacts(corpus, config.aii_mode)?;
    let mut warnings = Vec::new();
    let summary = corpus.load_summary();
    if summary.dropped > 0 {
        warnings.push(format!("{} publications dropped by the document-type filter", summary.dropped));
    }
    let zero = impacts.zero_stratum_warnings();
    if !zero.is_empty() {
        let shown: Vec<&str> = zero.iter().take(5).copied().collect();
        warnings.push(format!(
            "{} publications have a zero expected-citation denominator; aii set to 0 (e.g. {})",
            zero.len(),
            shown.join(", ")
        ));
    }
    let mut levels = Vec::new();
    for &level in &config.levels {
        let analysis = analyze_level(corpus, &impacts, level, config)?;
        warnings.extend(analysis.report.warnings.iter().map(|w| format!("{level}: {w}")));
        levels.push(analysis);
    }
    Ok(Analysis {
        impacts,
        levels,
        warnings,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Paths of written files, relative to the output directory.
pub type Written = Vec<PathBuf>;

pub fn data_path(out: &Path, kind: &str, level: Level) -> PathBuf {
    out.join("data").join(format!("{kind}_{level}.csv"))
}

/// Strength, specialization and activity interchange files for one level.
pub fn write_level_data(out: &Path, la: &LevelAnalysis, provenance: &Provenance) -> Result<Written> {
    create_dir(&out.join("data"))?;
    let level = la.level;
    write_strength_csv(&la.strength, provenance, &data_path(out, "strength", level))?;
    write_report_csv(&la.report, provenance, &data_path(out, "specialization", level))?;
    write_activity_csv(&la.profiles, level, &data_path(out, "activity", level))?;
    Ok(["strength", "specialization", "activity"]
        .iter()
        .map(|k| PathBuf::from("data").join(format!("{k}_{level}.csv")))
        .collect())
}

pub fn write_compute(out: &Path, corpus: &Corpus, analysis: &Analysis, config: &RunConfig) -> Result<Written> {
    let provenance = provenance(corpus, config);
    let mut written = Vec::new();
    for la in &analysis.levels {
        written.extend(write_level_data(out, la, &provenance)?);
    }
    if config.aii_dump {
        create_dir(&out.join("data"))?;
        write_aii_dump(corpus, &analysis.impacts, &out.join("data").join("aii.csv"))?;
        written.push(PathBuf::from("data").join("aii.csv"));
    }
    Ok(written)
}

fn table(out: &Path, name: &str) -> Result<(PathBuf, PathBuf)> {
    create_dir(&out.join("tables"))?;
    let rel = PathBuf::from("tables").join(name);
    Ok((out.join(&rel), rel))
}

/// Top-k tables: 2 and 3 for regions, 4 and 5 for provinces.
pub fn write_rank(
    out: &Path,
    report: &SpecializationReport,
    taxonomy: &SubjectCategoryTaxonomy,
    config: &RunConfig,
) -> Result<Written> {
    let level = report.level;
    let k = config.top_k;
    let (by_territory, by_sc) = match level {
        Level::Region => (TableStyle::Table2, TableStyle::Table3),
        Level::Province => (TableStyle::Table4, TableStyle::Table5),
    };
    let top_scs = top_scs_per_territory(report, k)?;
    let top_territories = top_territories_per_sc(report, k)?;
    let (path_a, rel_a) = table(out, &format!("{}_{level}_top_scs.csv", by_territory.as_str()))?;
    emit_table(AnalysisResult::TopScs { level, k, rows: &top_scs }, by_territory, &path_a, config.decimals)?;
    let (path_b, rel_b) = table(out, &format!("{}_{level}_top_territories.csv", by_sc.as_str()))?;
    emit_table(
        AnalysisResult::TopTerritories {
            level,
            k,
            rows: &top_territories,
            taxonomy,
        },
        by_sc,
        &path_b,
        config.decimals,
    )?;
    Ok(vec![rel_a, rel_b])
}

/// Extreme-specialization ratio tables 6 and 7.
pub fn write_extremes(
    out: &Path,
    report: &SpecializationReport,
    profiles: &BTreeMap<String, ActivityProfile>,
    config: &RunConfig,
) -> Result<Written> {
    let level = report.level;
    let by_territory = extreme_ratios_by_territory(report, profiles, config.high_cut, config.low_cut)?;
    let by_sc = extreme_ratios_by_sc(report, profiles, config.high_cut, config.low_cut)?;
    let (path_a, rel_a) = table(out, &format!("table6_{level}_extremes.csv"))?;
    emit_table(
        AnalysisResult::ExtremesByTerritory { level, rows: &by_territory },
        TableStyle::Table6,
        &path_a,
        config.decimals,
    )?;
    let (path_b, rel_b) = table(out, &format!("table7_{level}_extremes_by_sc.csv"))?;
    emit_table(
        AnalysisResult::ExtremesBySc { level, rows: &by_sc },
        TableStyle::Table7,
        &path_b,
        config.decimals,
    )?;
    Ok(vec![rel_a, rel_b])
}

pub fn write_region_table(out: &Path, corpus: &Corpus, config: &RunConfig) -> Result<Written> {
    let summaries = region_summaries(corpus, config.threshold_region);
    let (path, rel) = table(out, "table1_regions.csv")?;
    emit_table(AnalysisResult::RegionSummaries(&summaries), TableStyle::Table1, &path, config.decimals)?;
    Ok(vec![rel])
}

/// Subject categories drawn on the radar: the configured list, or the first
/// SC (by id) of each discipline present in the report.
pub fn radar_subjects(report: &SpecializationReport, taxonomy: Option<&SubjectCategoryTaxonomy>, config: &RunConfig) -> Vec<String> {
    if !config.radar_scs.is_empty() {
        return config.radar_scs.clone();
    }
    let scs = report.sc_ids();
    match taxonomy {
        Some(tax) => Discipline::ALL
            .iter()
            .filter_map(|&d| scs.iter().find(|sc| tax.discipline(sc) == Some(d)))
            .map(|s| (*s).to_owned())
            .collect(),
        None => scs.iter().take(Discipline::ALL.len()).map(|s| (*s).to_owned()).collect(),
    }
}

/// Renders the radar for `report`; returns `None` with a warning when the
/// chart cannot be drawn.
pub fn write_radar(
    out: &Path,
    report: &SpecializationReport,
    registry: Option<&TerritoryRegistry>,
    taxonomy: Option<&SubjectCategoryTaxonomy>,
    config: &RunConfig,
    warnings: &mut Vec<String>,
) -> Result<Written> {
    let level = report.level;
    let territories = report.territories();
    if territories.len() < 3 {
        warnings.push(format!(
            "radar skipped: {} active {level}s, at least 3 needed",
            territories.len()
        ));
        return Ok(Vec::new());
    }
    let known = report.sc_ids();
    let mut series = Vec::new();
    for sc in radar_subjects(report, taxonomy, config) {
        if !known.contains(&sc.as_str()) {
            warnings.push(format!("radar: subject category {sc} not in the {level} report; skipped"));
            continue;
        }
        let values = territories
            .iter()
            .map(|t| report.cell(t, &sc).map_or(-100.0, |c| c.ssi))
            .collect();
        let name = taxonomy
            .and_then(|t| t.entries.get(&sc))
            .map_or_else(|| sc.clone(), |e| format!("{} ({})", e.sc_name, sc));
        series.push(RadarSeries { name, values });
    }
    let axes = territories
        .iter()
        .map(|t| {
            registry
                .and_then(|r| r.name(level, t))
                .map_or_else(|| (*t).to_owned(), str::to_owned)
        })
        .collect();
    let spec = RadarSpec {
        title: format!("SSI by {level}"),
        axes,
        series,
        reference_level: 0.0,
    };
    let style = RadarStyle {
        size: config.radar_size,
        grid_levels: config.radar_grid.clone(),
        ..RadarStyle::default()
    };
    create_dir(&out.join("charts"))?;
    let rel = PathBuf::from("charts").join(format!("radar_{level}.svg"));
    render_radar(&spec, &style, &out.join(&rel))?;
    Ok(vec![rel])
}

/// One map-data file per subject category under `maps/<level>/`.
pub fn write_maps(
    out: &Path,
    strength: &StrengthMatrix,
    report: &SpecializationReport,
    registry: &TerritoryRegistry,
    config: &RunConfig,
) -> Result<Written> {
    let level = report.level;
    let dir = out.join("maps").join(level.as_str());
    create_dir(&dir)?;
    let scs: Vec<String> = if config.map_scs.is_empty() {
        report.sc_ids().into_iter().map(str::to_owned).collect()
    } else {
        config.map_scs.clone()
    };
    let mut written = Vec::new();
    for sc in scs {
        let name = format!("{sc}.csv");
        export_map_data(strength, report, registry, &sc, &dir.join(&name))?;
        written.push(PathBuf::from("maps").join(level.as_str()).join(name));
    }
    Ok(written)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    census_date: String,
    corpus_sha256: String,
    inputs: BTreeMap<&'a str, String>,
    load_summary: &'a LoadSummary,
    config: &'a RunConfig,
    warnings: &'a [String],
    outputs: BTreeMap<String, String>,
}

/// Writes `run_manifest.json` describing a finished run.
pub fn write_manifest(
    out: &Path,
    corpus: &Corpus,
    config: &RunConfig,
    warnings: &[String],
    written: &[PathBuf],
) -> Result<PathBuf> {
    let p = config.input_paths()?;
    let mut inputs = BTreeMap::new();
    let mut all = String::new();
    for (role, path) in [
        ("pubs", p.pubs),
        ("orgs", p.orgs),
        ("territories", p.territories),
        ("taxonomy", p.taxonomy),
    ] {
        let h = sha256_file(path)?;
        all.push_str(&h);
        inputs.insert(role, h);
    }
    let mut outputs = BTreeMap::new();
    for rel in written {
        let key = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        outputs.insert(key, sha256_file(&out.join(rel))?);
    }
    let manifest = Manifest {
        tool: TOOL,
        version: VERSION,
        census_date: corpus.census_date().to_string(),
        corpus_sha256: sha256_hex(all.as_bytes()),
        inputs,
        load_summary: corpus.load_summary(),
        config,
        warnings,
        outputs,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let path = out.join(MANIFEST_FILE);
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub written: Written,
    pub warnings: Vec<String>,
    pub manifest: PathBuf,
}

/// Loads the corpus, runs every stage and writes the manifest into `out`.
pub fn run_all(config: &RunConfig, out: &Path) -> Result<RunSummary> {
    config.validate()?;
    let corpus = load(config)?;
    run_all_with(&corpus, config, out)
}

pub fn run_all_with(corpus: &Corpus, config: &RunConfig, out: &Path) -> Result<RunSummary> {
    let analysis = analyze(corpus, config)?;
    create_dir(out)?;
    let mut warnings = analysis.warnings.clone();
    let mut written = write_compute(out, corpus, &analysis, config)?;
    if config.levels.contains(&Level::Region) {
        written.extend(write_region_table(out, corpus, config)?);
    }
    for la in &analysis.levels {
        written.extend(write_rank(out, &la.report, corpus.taxonomy(), config)?);
        written.extend(write_extremes(out, &la.report, &la.profiles, config)?);
        written.extend(write_maps(out, &la.strength, &la.report, corpus.territories(), config)?);
    }
    match analysis.level(config.radar_level) {
        Some(la) => written.extend(write_radar(
            out,
            &la.report,
            Some(corpus.territories()),
            Some(corpus.taxonomy()),
            config,
            &mut warnings,
        )?),
        None => warnings.push(format!("radar skipped: level {} not computed", config.radar_level)),
    }
    let manifest = write_manifest(out, corpus, config, &warnings, &written)?;
    Ok(RunSummary {
        written,
        warnings,
        manifest,
    })
}
