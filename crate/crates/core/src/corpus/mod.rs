//! Input data model: publications, organizations, territories and the
//! subject-category taxonomy, cross-indexed into an immutable [`Corpus`].

mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use io::{load_corpus, load_corpus_unchecked, load_taxonomy, load_territories, write_corpus_files, CorpusFiles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    Review,
    ProceedingPaper,
    Letter,
    Other,
}

impl DocType {
    /// Maps a raw label to a document type. Labels outside the known set
    /// (editorials, notes, ...) become [`DocType::Other`].
    pub fn from_label(label: &str) -> DocType {
        match label.trim().to_ascii_lowercase().replace([' ', '-'], "_").as_str() {
            "article" => DocType::Article,
            "review" => DocType::Review,
            "proceeding_paper" | "proceedings_paper" => DocType::ProceedingPaper,
            "letter" => DocType::Letter,
            _ => DocType::Other,
        }
    }

    pub fn default_filter() -> BTreeSet<DocType> {
        [
            DocType::Article,
            DocType::Review,
            DocType::ProceedingPaper,
            DocType::Letter,
        ]
        .into_iter()
        .collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::ProceedingPaper => "proceeding_paper",
            DocType::Letter => "letter",
            DocType::Other => "other",
        }
    }
}

/// Territorial aggregation level: NUTS3 provinces or NUTS2 regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Province,
    Region,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Province => "province",
            Level::Region => "region",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "province" => Ok(Level::Province),
            "region" => Ok(Level::Region),
            other => Err(format!("unknown level `{other}` (expected province or region)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub citations: u64,
    /// Ordered, duplicate-free.
    pub subject_categories: Vec<String>,
    pub org_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrgKind {
    University,
    ResearchInstitution,
    ResearchHospital,
}

impl OrgKind {
    pub fn code(self) -> &'static str {
        match self {
            OrgKind::University => "U",
            OrgKind::ResearchInstitution => "I",
            OrgKind::ResearchHospital => "H",
        }
    }

    pub fn from_code(code: &str) -> Option<OrgKind> {
        match code.trim() {
            "U" => Some(OrgKind::University),
            "I" => Some(OrgKind::ResearchInstitution),
            "H" => Some(OrgKind::ResearchHospital),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Organization {
    pub org_id: String,
    pub name: String,
    pub org_kind: OrgKind,
    pub province_code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Province {
    pub province_code: String,
    pub province_name: String,
    pub region_code: String,
    pub population: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub region_code: String,
    pub region_name: String,
    pub macro_area: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerritoryRegistry {
    pub provinces: BTreeMap<String, Province>,
    pub regions: BTreeMap<String, Region>,
}

impl TerritoryRegistry {
    pub fn region_of(&self, province_code: &str) -> Option<&str> {
        self.provinces
            .get(province_code)
            .map(|p| p.region_code.as_str())
    }

    /// Population of a territory; a region's population is the sum over its provinces.
    pub fn population(&self, level: Level, code: &str) -> Option<u64> {
        match level {
            Level::Province => self.provinces.get(code).map(|p| p.population),
            Level::Region => {
                self.regions.get(code)?;
                Some(
                    self.provinces
                        .values()
                        .filter(|p| p.region_code == code)
                        .map(|p| p.population)
                        .sum(),
                )
            }
        }
    }

    pub fn name(&self, level: Level, code: &str) -> Option<&str> {
        match level {
            Level::Province => self.provinces.get(code).map(|p| p.province_name.as_str()),
            Level::Region => self.regions.get(code).map(|r| r.region_name.as_str()),
        }
    }

    pub fn codes(&self, level: Level) -> Vec<&str> {
        match level {
            Level::Province => self.provinces.keys().map(String::as_str).collect(),
            Level::Region => self.regions.keys().map(String::as_str).collect(),
        }
    }

    pub fn provinces_of<'a>(&'a self, region_code: &'a str) -> impl Iterator<Item = &'a Province> + 'a {
        self.provinces
            .values()
            .filter(move |p| p.region_code == region_code)
    }
}

/// The eight hard-science disciplines that group subject categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discipline {
    Biology,
    BiomedicalResearch,
    Chemistry,
    ClinicalMedicine,
    EarthAndSpaceSciences,
    Engineering,
    Mathematics,
    Physics,
}

impl Discipline {
    pub const ALL: [Discipline; 8] = [
        Discipline::Biology,
        Discipline::BiomedicalResearch,
        Discipline::Chemistry,
        Discipline::ClinicalMedicine,
        Discipline::EarthAndSpaceSciences,
        Discipline::Engineering,
        Discipline::Mathematics,
        Discipline::Physics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Discipline::Biology => "Biology",
            Discipline::BiomedicalResearch => "Biomedical research",
            Discipline::Chemistry => "Chemistry",
            Discipline::ClinicalMedicine => "Clinical medicine",
            Discipline::EarthAndSpaceSciences => "Earth and space sciences",
            Discipline::Engineering => "Engineering",
            Discipline::Mathematics => "Mathematics",
            Discipline::Physics => "Physics",
        }
    }

    /// Accepts display names in any case, with spaces, `_` or `-`.
    pub fn parse(label: &str) -> Option<Discipline> {
        let norm = label.trim().to_ascii_lowercase().replace(['_', '-'], " ");
        Discipline::ALL
            .into_iter()
            .find(|d| d.name().to_ascii_lowercase() == norm)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScEntry {
    pub sc_id: String,
    pub sc_name: String,
    pub discipline: Discipline,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectCategoryTaxonomy {
    pub entries: BTreeMap<String, ScEntry>,
}

impl SubjectCategoryTaxonomy {
    pub fn discipline(&self, sc_id: &str) -> Option<Discipline> {
        self.entries.get(sc_id).map(|e| e.discipline)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub read: usize,
    pub kept: usize,
    pub dropped: usize,
    pub dropped_by_type: BTreeMap<String, usize>,
}

/// Raw ingredients of a [`Corpus`]. No invariant is checked when building
/// from parts; [`validate_corpus`] reports what is wrong.
#[derive(Debug, Clone)]
pub struct CorpusParts {
    pub publications: Vec<PublicationRecord>,
    pub organizations: BTreeMap<String, Organization>,
    pub territories: TerritoryRegistry,
    pub taxonomy: SubjectCategoryTaxonomy,
    pub census_date: NaiveDate,
    pub year_window: (i32, i32),
    pub load_summary: LoadSummary,
}

#[derive(Debug, Clone)]
struct CorpusIndex {
    sc_ids: Vec<String>,
    pub_scs: Vec<Box<[u32]>>,
    province_codes: Vec<String>,
    region_codes: Vec<String>,
    pub_provinces: Vec<Box<[u32]>>,
    pub_regions: Vec<Box<[u32]>>,
    by_pub_id: HashMap<String, usize>,
}

/// Immutable, cross-indexed publication corpus.
///
/// Publications are held sorted by `pub_id`; that order is the canonical
/// accumulation order of every downstream computation.
#[derive(Debug, Clone)]
pub struct Corpus {
    publications: Vec<PublicationRecord>,
    organizations: BTreeMap<String, Organization>,
    territories: TerritoryRegistry,
    taxonomy: SubjectCategoryTaxonomy,
    census_date: NaiveDate,
    year_window: (i32, i32),
    load_summary: LoadSummary,
    index: CorpusIndex,
}

impl Corpus {
    pub fn from_parts(parts: CorpusParts) -> Corpus {
        let CorpusParts {
            mut publications,
            organizations,
            territories,
            taxonomy,
            census_date,
            year_window,
            load_summary,
        } = parts;
        publications.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));

        let sc_ids: Vec<String> = publications
            .iter()
            .flat_map(|p| p.subject_categories.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let sc_pos: HashMap<&str, u32> = sc_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        let province_codes: Vec<String> = territories.provinces.keys().cloned().collect();
        let region_codes: Vec<String> = territories.regions.keys().cloned().collect();
        let province_pos: HashMap<&str, u32> = index_of(&province_codes);
        let region_pos: HashMap<&str, u32> = index_of(&region_codes);

        let mut pub_scs = Vec::with_capacity(publications.len());
        let mut pub_provinces = Vec::with_capacity(publications.len());
        let mut pub_regions = Vec::with_capacity(publications.len());
        for p in &publications {
            pub_scs.push(
                p.subject_categories
                    .iter()
                    .map(|s| sc_pos[s.as_str()])
                    .collect::<Box<[u32]>>(),
            );
            let mut provs: Vec<u32> = Vec::with_capacity(p.org_ids.len());
            let mut regs: Vec<u32> = Vec::with_capacity(p.org_ids.len());
            for org in &p.org_ids {
                let Some(o) = organizations.get(org) else { continue };
                if let Some(&pi) = province_pos.get(o.province_code.as_str()) {
                    provs.push(pi);
                }
                if let Some(&ri) = territories
                    .region_of(&o.province_code)
                    .and_then(|r| region_pos.get(r))
                {
                    regs.push(ri);
                }
            }
            provs.sort_unstable();
            provs.dedup();
            regs.sort_unstable();
            regs.dedup();
            pub_provinces.push(provs.into_boxed_slice());
            pub_regions.push(regs.into_boxed_slice());
        }
        let by_pub_id = publications
            .iter()
            .enumerate()
            .map(|(i, p)| (p.pub_id.clone(), i))
            .collect();

        Corpus {
            publications,
            organizations,
            territories,
            taxonomy,
            census_date,
            year_window,
            load_summary,
            index: CorpusIndex {
                sc_ids,
                pub_scs,
                province_codes,
                region_codes,
                pub_provinces,
                pub_regions,
                by_pub_id,
            },
        }
    }

    pub fn publications(&self) -> &[PublicationRecord] {
        &self.publications
    }

    pub fn organizations(&self) -> &BTreeMap<String, Organization> {
        &self.organizations
    }

    pub fn territories(&self) -> &TerritoryRegistry {
        &self.territories
    }

    pub fn taxonomy(&self) -> &SubjectCategoryTaxonomy {
        &self.taxonomy
    }

    pub fn census_date(&self) -> NaiveDate {
        self.census_date
    }

    pub fn year_window(&self) -> (i32, i32) {
        self.year_window
    }

    pub fn load_summary(&self) -> &LoadSummary {
        &self.load_summary
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn publication(&self, pub_id: &str) -> Option<&PublicationRecord> {
        self.index.by_pub_id.get(pub_id).map(|&i| &self.publications[i])
    }

    pub fn position(&self, pub_id: &str) -> Option<usize> {
        self.index.by_pub_id.get(pub_id).copied()
    }

    /// Sorted subject categories that occur in at least one publication.
    pub fn sc_ids(&self) -> &[String] {
        &self.index.sc_ids
    }

    /// Indices into [`Corpus::sc_ids`] for the publication at `pos`, in record order.
    pub fn sc_indices(&self, pos: usize) -> &[u32] {
        &self.index.pub_scs[pos]
    }

    /// Sorted territory codes of the registry at `level`.
    pub fn territory_codes(&self, level: Level) -> &[String] {
        match level {
            Level::Province => &self.index.province_codes,
            Level::Region => &self.index.region_codes,
        }
    }

    /// Sorted, duplicate-free indices into [`Corpus::territory_codes`] for
    /// the publication at `pos`.
    pub fn territory_indices(&self, pos: usize, level: Level) -> &[u32] {
        match level {
            Level::Province => &self.index.pub_provinces[pos],
            Level::Region => &self.index.pub_regions[pos],
        }
    }

    /// Distinct territories reachable through a publication's organizations.
    pub fn territories_of(&self, publication: &PublicationRecord, level: Level) -> BTreeSet<String> {
        publication
            .org_ids
            .iter()
            .filter_map(|org| self.organizations.get(org))
            .filter_map(|o| match level {
                Level::Province => self
                    .territories
                    .provinces
                    .contains_key(&o.province_code)
                    .then(|| o.province_code.clone()),
                Level::Region => self.territories.region_of(&o.province_code).map(str::to_owned),
            })
            .collect()
    }
}

fn index_of(codes: &[String]) -> HashMap<&str, u32> {
    codes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i as u32))
        .collect()
}

/// Free-function form of [`Corpus::territories_of`].
pub fn territories_of(publication: &PublicationRecord, corpus: &Corpus, level: Level) -> BTreeSet<String> {
    corpus.territories_of(publication, level)
}

pub const VIOLATION_KINDS: [&str; 11] = [
    "duplicate_pub_id",
    "year_outside_window",
    "empty_subject_categories",
    "duplicate_subject_categories",
    "empty_org_ids",
    "duplicate_org_ids",
    "unknown_org_id",
    "unknown_sc_id",
    "unknown_province_code",
    "unknown_region_code",
    "nonpositive_population",
];

const MAX_EXAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: BTreeMap<String, usize>,
    /// First few offending record ids per violated invariant.
    pub examples: BTreeMap<String, Vec<String>>,
    pub total_publications: usize,
    pub publications_per_year: BTreeMap<i32, usize>,
    pub publications_per_sc: BTreeMap<String, usize>,
    pub publications_per_province: BTreeMap<String, usize>,
}

impl ValidationReport {
    pub fn total_violations(&self) -> usize {
        self.violations.values().sum()
    }

    pub fn is_clean(&self) -> bool {
        self.total_violations() == 0
    }

    fn flag(&mut self, kind: &str, record: &str) {
        *self.violations.get_mut(kind).expect("known violation kind") += 1;
        let ex = self.examples.entry(kind.to_owned()).or_default();
        if ex.len() < MAX_EXAMPLES {
            ex.push(record.to_owned());
        }
    }
}

/// Checks every corpus invariant and gathers descriptive statistics. Never fails.
pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut report = ValidationReport {
        violations: VIOLATION_KINDS.iter().map(|k| (k.to_string(), 0)).collect(),
        examples: BTreeMap::new(),
        total_publications: corpus.len(),
        publications_per_year: BTreeMap::new(),
        publications_per_sc: BTreeMap::new(),
        publications_per_province: BTreeMap::new(),
    };
    let (start, end) = corpus.year_window;
    let mut seen = HashSet::new();
    for p in &corpus.publications {
        if !seen.insert(p.pub_id.as_str()) {
            report.flag("duplicate_pub_id", &p.pub_id);
        }
        if p.year < start || p.year > end {
            report.flag("year_outside_window", &p.pub_id);
        }
        if p.subject_categories.is_empty() {
            report.flag("empty_subject_categories", &p.pub_id);
        }
        if has_duplicates(&p.subject_categories) {
            report.flag("duplicate_subject_categories", &p.pub_id);
        }
        if p.org_ids.is_empty() {
            report.flag("empty_org_ids", &p.pub_id);
        }
        if has_duplicates(&p.org_ids) {
            report.flag("duplicate_org_ids", &p.pub_id);
        }
        if p.org_ids.iter().any(|o| !corpus.organizations.contains_key(o)) {
            report.flag("unknown_org_id", &p.pub_id);
        }
        if p
            .subject_categories
            .iter()
            .any(|s| !corpus.taxonomy.entries.contains_key(s))
        {
            report.flag("unknown_sc_id", &p.pub_id);
        }

        *report.publications_per_year.entry(p.year).or_default() += 1;
        for sc in p.subject_categories.iter().collect::<BTreeSet<_>>() {
            *report.publications_per_sc.entry(sc.clone()).or_default() += 1;
        }
        for prov in corpus.territories_of(p, Level::Province) {
            *report.publications_per_province.entry(prov).or_default() += 1;
        }
    }
    for org in corpus.organizations.values() {
        if !corpus.territories.provinces.contains_key(&org.province_code) {
            report.flag("unknown_province_code", &org.org_id);
        }
    }
    for prov in corpus.territories.provinces.values() {
        if !corpus.territories.regions.contains_key(&prov.region_code) {
            report.flag("unknown_region_code", &prov.province_code);
        }
        if prov.population == 0 {
            report.flag("nonpositive_population", &prov.province_code);
        }
    }
    report
}

fn has_duplicates(items: &[String]) -> bool {
    let mut seen = HashSet::with_capacity(items.len());
    !items.iter().all(|x| seen.insert(x))
}
