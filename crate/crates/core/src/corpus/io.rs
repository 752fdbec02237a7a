use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use super::{
    Corpus, CorpusParts, Discipline, DocType, LoadSummary, OrgKind, Organization, Province,
    PublicationRecord, Region, ScEntry, SubjectCategoryTaxonomy, TerritoryRegistry,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};

const ORG_HEADER: [&str; 4] = ["org_id", "name", "org_kind", "province_code"];
const TERRITORY_HEADER: [&str; 6] = [
    "province_code",
    "province_name",
    "region_code",
    "region_name",
    "macro_area",
    "population",
];
const TAXONOMY_HEADER: [&str; 3] = ["sc_id", "sc_name", "discipline"];

/// Standard file names of a corpus directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusFiles {
    pub pubs: PathBuf,
    pub orgs: PathBuf,
    pub territories: PathBuf,
    pub taxonomy: PathBuf,
}

impl CorpusFiles {
    pub fn in_dir(dir: &Path) -> Self {
        CorpusFiles {
            pubs: dir.join("publications.jsonl"),
            orgs: dir.join("organizations.csv"),
            territories: dir.join("territories.csv"),
            taxonomy: dir.join("taxonomy.csv"),
        }
    }
}

#[derive(Deserialize)]
struct RawPublication {
    pub_id: String,
    year: i32,
    doc_type: String,
    citations: u64,
    subject_categories: Vec<String>,
    org_ids: Vec<String>,
}

/// Parses and cross-checks the four input files.
///
/// Publications whose document type is outside `config.doc_types` are
/// dropped and counted in the corpus load summary.
pub fn load_corpus(
    pubs_path: &Path,
    orgs_path: &Path,
    territories_path: &Path,
    taxonomy_path: &Path,
    config: &RunConfig,
) -> Result<Corpus> {
    load(pubs_path, orgs_path, territories_path, taxonomy_path, config, true)
}

/// Like [`load_corpus`] but only syntax is enforced; referential and
/// record-level invariants are left for `validate_corpus` to report.
pub fn load_corpus_unchecked(
    pubs_path: &Path,
    orgs_path: &Path,
    territories_path: &Path,
    taxonomy_path: &Path,
    config: &RunConfig,
) -> Result<Corpus> {
    load(pubs_path, orgs_path, territories_path, taxonomy_path, config, false)
}

/// Reads a territory registry on its own.
pub fn load_territories(path: &Path) -> Result<TerritoryRegistry> {
    read_territories(path, true)
}

/// Reads a subject-category taxonomy on its own.
pub fn load_taxonomy(path: &Path) -> Result<SubjectCategoryTaxonomy> {
    read_taxonomy(path)
}

fn load(
    pubs_path: &Path,
    orgs_path: &Path,
    territories_path: &Path,
    taxonomy_path: &Path,
    config: &RunConfig,
    strict: bool,
) -> Result<Corpus> {
    let territories = read_territories(territories_path, strict)?;
    let taxonomy = read_taxonomy(taxonomy_path)?;
    let organizations = read_organizations(orgs_path, &territories, strict)?;
    let (publications, load_summary) = read_publications(pubs_path, config, strict)?;

    if strict {
        for p in &publications {
            if let Some(org) = p.org_ids.iter().find(|o| !organizations.contains_key(*o)) {
                return Err(Error::Referential {
                    record: p.pub_id.clone(),
                    message: format!("unknown org_id {org}"),
                });
            }
            if let Some(sc) = p
                .subject_categories
                .iter()
                .find(|s| !taxonomy.entries.contains_key(*s))
            {
                return Err(Error::Referential {
                    record: p.pub_id.clone(),
                    message: format!("unknown sc_id {sc}"),
                });
            }
        }
        if publications.is_empty() {
            return Err(Error::EmptyCorpus {
                dropped: load_summary.dropped,
            });
        }
    }

    let year_window = match (config.year_start, config.year_end) {
        (Some(a), Some(b)) => (a, b),
        (start, end) => {
            let lo = publications.iter().map(|p| p.year).min().unwrap_or(0);
            let hi = publications.iter().map(|p| p.year).max().unwrap_or(0);
            (start.unwrap_or(lo), end.unwrap_or(hi))
        }
    };

    Ok(Corpus::from_parts(CorpusParts {
        publications,
        organizations,
        territories,
        taxonomy,
        census_date: config.census_date,
        year_window,
        load_summary,
    }))
}

fn read_publications(
    path: &Path,
    config: &RunConfig,
    strict: bool,
) -> Result<(Vec<PublicationRecord>, LoadSummary)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::parse(path, 0, format!("cannot read: {e}")))?;
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();

    let parsed: Vec<Result<(usize, PublicationRecord, String)>> = lines
        .par_iter()
        .map(|&(line, raw)| {
            let r: RawPublication =
                serde_json::from_str(raw).map_err(|e| Error::parse(path, line, e.to_string()))?;
            let doc_type = DocType::from_label(&r.doc_type);
            let record = PublicationRecord {
                pub_id: r.pub_id,
                year: r.year,
                doc_type,
                citations: r.citations,
                subject_categories: r.subject_categories,
                org_ids: r.org_ids,
            };
            Ok((line, record, r.doc_type))
        })
        .collect();

    let mut summary = LoadSummary::default();
    let mut publications = Vec::with_capacity(parsed.len());
    let mut seen: HashMap<String, usize> = HashMap::with_capacity(parsed.len());
    for item in parsed {
        let (line, record, raw_type) = item?;
        summary.read += 1;
        if !config.doc_types.contains(&record.doc_type) {
            summary.dropped += 1;
            *summary.dropped_by_type.entry(raw_type).or_default() += 1;
            continue;
        }
        if strict {
            check_record(path, line, &record, config)?;
            if let Some(first) = seen.insert(record.pub_id.clone(), line) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("duplicate pub_id {} (first on line {first})", record.pub_id),
                ));
            }
        }
        publications.push(record);
    }
    summary.kept = publications.len();
    Ok((publications, summary))
}

fn check_record(path: &Path, line: usize, p: &PublicationRecord, config: &RunConfig) -> Result<()> {
    let fail = |msg: String| Err(Error::parse(path, line, format!("{}: {msg}", p.pub_id)));
    if p.subject_categories.is_empty() {
        return fail("empty subject_categories".into());
    }
    if p.org_ids.is_empty() {
        return fail("empty org_ids".into());
    }
    if let Some(d) = first_duplicate(&p.subject_categories) {
        return fail(format!("duplicate subject category {d}"));
    }
    if let Some(d) = first_duplicate(&p.org_ids) {
        return fail(format!("duplicate org_id {d}"));
    }
    let below = config.year_start.is_some_and(|s| p.year < s);
    let above = config.year_end.is_some_and(|e| p.year > e);
    if below || above {
        return fail(format!("year {} outside observation window", p.year));
    }
    Ok(())
}

fn first_duplicate(items: &[String]) -> Option<&str> {
    let mut seen = HashSet::with_capacity(items.len());
    items.iter().find(|x| !seen.insert(*x)).map(String::as_str)
}

fn csv_rows(path: &Path, expected: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::parse(path, 0, format!("cannot read: {e}")))?;
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            path,
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push((line, record));
    }
    Ok(rows)
}

fn read_territories(path: &Path, strict: bool) -> Result<TerritoryRegistry> {
    let mut registry = TerritoryRegistry::default();
    for (line, row) in csv_rows(path, &TERRITORY_HEADER)? {
        let population: u64 = row[5]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("invalid population `{}`", &row[5])))?;
        if strict && population == 0 {
            return Err(Error::parse(path, line, format!("province {} has zero population", &row[0])));
        }
        let province = Province {
            province_code: row[0].to_owned(),
            province_name: row[1].to_owned(),
            region_code: row[2].to_owned(),
            population,
        };
        let region = Region {
            region_code: row[2].to_owned(),
            region_name: row[3].to_owned(),
            macro_area: row[4].to_owned(),
        };
        match registry.regions.get(&region.region_code) {
            Some(existing) if existing != &region => {
                return Err(Error::parse(
                    path,
                    line,
                    format!("region {} described inconsistently", region.region_code),
                ));
            }
            Some(_) => {}
            None => {
                registry.regions.insert(region.region_code.clone(), region);
            }
        }
        if registry.provinces.contains_key(&province.province_code) {
            return Err(Error::parse(path, line, format!("duplicate province_code {}", province.province_code)));
        }
        registry.provinces.insert(province.province_code.clone(), province);
    }
    Ok(registry)
}

fn read_taxonomy(path: &Path) -> Result<SubjectCategoryTaxonomy> {
    let mut taxonomy = SubjectCategoryTaxonomy::default();
    for (line, row) in csv_rows(path, &TAXONOMY_HEADER)? {
        let discipline = Discipline::parse(&row[2])
            .ok_or_else(|| Error::parse(path, line, format!("unknown discipline `{}`", &row[2])))?;
        let entry = ScEntry {
            sc_id: row[0].to_owned(),
            sc_name: row[1].to_owned(),
            discipline,
        };
        if taxonomy.entries.insert(entry.sc_id.clone(), entry).is_some() {
            return Err(Error::parse(path, line, format!("duplicate sc_id {}", &row[0])));
        }
    }
    Ok(taxonomy)
}

fn read_organizations(
    path: &Path,
    territories: &TerritoryRegistry,
    strict: bool,
) -> Result<BTreeMap<String, Organization>> {
    let mut orgs = BTreeMap::new();
    for (line, row) in csv_rows(path, &ORG_HEADER)? {
        let org_kind = OrgKind::from_code(&row[2])
            .ok_or_else(|| Error::parse(path, line, format!("org_kind must be U, I or H, found `{}`", &row[2])))?;
        let org = Organization {
            org_id: row[0].to_owned(),
            name: row[1].to_owned(),
            org_kind,
            province_code: row[3].to_owned(),
        };
        if strict && !territories.provinces.contains_key(&org.province_code) {
            return Err(Error::Referential {
                record: org.org_id,
                message: format!("unknown province_code {}", &row[3]),
            });
        }
        if orgs.contains_key(&org.org_id) {
            return Err(Error::parse(path, line, format!("duplicate org_id {}", org.org_id)));
        }
        orgs.insert(org.org_id.clone(), org);
    }
    if strict {
        for p in territories.provinces.values() {
            if !territories.regions.contains_key(&p.region_code) {
                return Err(Error::Referential {
                    record: p.province_code.clone(),
                    message: format!("unknown region_code {}", p.region_code),
                });
            }
        }
    }
    Ok(orgs)
}

/// Writes the corpus back out as the four standard input files.
pub fn write_corpus_files(corpus: &Corpus, files: &CorpusFiles) -> Result<()> {
    for path in [&files.pubs, &files.orgs, &files.territories, &files.taxonomy] {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }

    let file = File::create(&files.pubs).map_err(|e| Error::io(&files.pubs, e))?;
    let mut out = BufWriter::new(file);
    for p in corpus.publications() {
        serde_json::to_writer(&mut out, p).expect("publication serializes");
        out.write_all(b"\n").map_err(|e| Error::io(&files.pubs, e))?;
    }
    out.flush().map_err(|e| Error::io(&files.pubs, e))?;

    write_csv(&files.orgs, &ORG_HEADER, corpus.organizations().values().map(|o| {
        vec![
            o.org_id.clone(),
            o.name.clone(),
            o.org_kind.code().to_owned(),
            o.province_code.clone(),
        ]
    }))?;

    let registry = corpus.territories();
    write_csv(&files.territories, &TERRITORY_HEADER, registry.provinces.values().map(|p| {
        let region = registry.regions.get(&p.region_code);
        vec![
            p.province_code.clone(),
            p.province_name.clone(),
            p.region_code.clone(),
            region.map(|r| r.region_name.clone()).unwrap_or_default(),
            region.map(|r| r.macro_area.clone()).unwrap_or_default(),
            p.population.to_string(),
        ]
    }))?;

    write_csv(&files.taxonomy, &TAXONOMY_HEADER, corpus.taxonomy().entries.values().map(|e| {
        vec![e.sc_id.clone(), e.sc_name.clone(), e.discipline.name().to_owned()]
    }))
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    writer.write_record(header).map_err(|e| Error::io(path, e.into()))?;
    for row in rows {
        writer.write_record(&row).map_err(|e| Error::io(path, e.into()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
