//! Seeded synthetic corpora with planted specialization, plus a naive
//! end-to-end oracle used to cross-check the main pipeline.

mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    write_corpus_files, Corpus, CorpusFiles, CorpusParts, Discipline, DocType, LoadSummary, OrgKind,
    Organization, Province, PublicationRecord, Region, ScEntry, SubjectCategoryTaxonomy, TerritoryRegistry,
};
use crate::error::{Error, Result};

pub use oracle::oracle_pipeline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBoost {
    pub territory: String,
    pub sc: String,
    /// Multiplicative factor on the territory's SC sampling weight (> 1).
    pub boost: f64,
}

/// Citation counts are negative binomial: Poisson with a Gamma-distributed
/// rate whose mean is drawn per (year, SC) from `[mean_min, mean_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CitationModel {
    pub mean_min: f64,
    pub mean_max: f64,
    /// Gamma shape; smaller is more overdispersed.
    pub dispersion: f64,
}

impl Default for CitationModel {
    fn default() -> Self {
        CitationModel {
            mean_min: 2.0,
            mean_max: 20.0,
            dispersion: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    /// Provinces.
    pub n_territories: usize,
    /// Regions the provinces are split into; 0 means one per five provinces.
    pub n_regions: usize,
    pub n_scs: usize,
    pub n_years: usize,
    pub start_year: i32,
    pub n_publications: usize,
    pub orgs_per_territory: usize,
    /// Probability that a publication carries a second subject category.
    pub multi_sc_prob: f64,
    /// Probability that a publication has a co-author in another province.
    pub coauthor_prob: f64,
    pub specialization_plan: Vec<PlantedBoost>,
    pub citation_model: CitationModel,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 42,
            n_territories: 20,
            n_regions: 0,
            n_scs: 20,
            n_years: 5,
            start_year: 2006,
            n_publications: 2_000,
            orgs_per_territory: 2,
            multi_sc_prob: 0.15,
            coauthor_prob: 0.25,
            specialization_plan: Vec::new(),
            citation_model: CitationModel::default(),
        }
    }
}

pub fn territory_code(i: usize) -> String {
    format!("P{:03}", i + 1)
}

pub fn region_code(i: usize) -> String {
    format!("R{:02}", i + 1)
}

pub fn sc_code(i: usize) -> String {
    format!("SC{:03}", i + 1)
}

impl SynthSpec {
    pub fn regions(&self) -> usize {
        if self.n_regions == 0 {
            self.n_territories.div_ceil(5).max(1)
        } else {
            self.n_regions
        }
    }

    /// Reads a spec from TOML, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::parse(path, 0, format!("cannot read: {e}")))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| Error::parse(path, 0, e.to_string()))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        if self.n_territories == 0 || self.n_scs == 0 || self.n_years == 0 {
            return fail("territories, subject categories and years must be positive".into());
        }
        if self.n_publications < self.n_territories {
            return fail(format!(
                "n_publications ({}) must be >= n_territories ({})",
                self.n_publications, self.n_territories
            ));
        }
        if self.regions() > self.n_territories {
            return fail("more regions than provinces".into());
        }
        if self.orgs_per_territory == 0 {
            return fail("orgs_per_territory must be >= 1".into());
        }
        for (name, p) in [("multi_sc_prob", self.multi_sc_prob), ("coauthor_prob", self.coauthor_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} must lie in [0, 1]"));
            }
        }
        let cm = &self.citation_model;
        if !(cm.mean_min > 0.0 && cm.mean_min <= cm.mean_max && cm.mean_max.is_finite()) {
            return fail("citation mean range must be positive and ordered".into());
        }
        if !(cm.dispersion > 0.0 && cm.dispersion.is_finite()) {
            return fail("dispersion must be positive".into());
        }
        let mut seen = BTreeSet::new();
        for b in &self.specialization_plan {
            if self.territory_index(&b.territory).is_none() {
                return fail(format!("plan names unknown territory {}", b.territory));
            }
            if self.sc_index(&b.sc).is_none() {
                return fail(format!("plan names unknown subject category {}", b.sc));
            }
            if !(b.boost > 1.0 && b.boost.is_finite()) {
                return fail(format!("boost for ({}, {}) must be > 1", b.territory, b.sc));
            }
            if !seen.insert((&b.territory, &b.sc)) {
                return fail(format!("duplicate plan entry ({}, {})", b.territory, b.sc));
            }
        }
        Ok(())
    }

    fn territory_index(&self, code: &str) -> Option<usize> {
        (0..self.n_territories).find(|&i| territory_code(i) == code)
    }

    fn sc_index(&self, code: &str) -> Option<usize> {
        (0..self.n_scs).find(|&i| sc_code(i) == code)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub territory: String,
    pub sc: String,
    pub boost: f64,
    /// Probability that a publication of the territory lands in the SC.
    pub planted_share: f64,
    /// The same probability without the boost.
    pub baseline_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: SynthSpec,
    pub planted: Vec<PlantedTruth>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: Corpus,
    pub truth: GroundTruth,
}

const DOC_TYPES: [(DocType, f64); 4] = [
    (DocType::Article, 0.80),
    (DocType::Review, 0.10),
    (DocType::ProceedingPaper, 0.07),
    (DocType::Letter, 0.03),
];

/// Generates a corpus; identical specs give identical corpora.
pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_t = spec.n_territories;
    let n_r = spec.regions();

    let mut regions = BTreeMap::new();
    for r in 0..n_r {
        let code = region_code(r);
        regions.insert(
            code.clone(),
            Region {
                region_code: code.clone(),
                region_name: format!("Region {}", r + 1),
                macro_area: ["North", "Center", "South"][r % 3].to_owned(),
            },
        );
    }
    let mut provinces = BTreeMap::new();
    let mut organizations = BTreeMap::new();
    let mut territory_orgs: Vec<Vec<String>> = Vec::with_capacity(n_t);
    for t in 0..n_t {
        let code = territory_code(t);
        provinces.insert(
            code.clone(),
            Province {
                province_code: code.clone(),
                province_name: format!("Province {}", t + 1),
                region_code: region_code(t * n_r / n_t),
                population: rng.random_range(50_000..4_000_000),
            },
        );
        let mut ids = Vec::with_capacity(spec.orgs_per_territory);
        for j in 0..spec.orgs_per_territory {
            let kind = [OrgKind::University, OrgKind::ResearchInstitution, OrgKind::ResearchHospital][j % 3];
            let id = format!("{}{:03}-{}", kind.code(), t + 1, j + 1);
            organizations.insert(
                id.clone(),
                Organization {
                    org_id: id.clone(),
                    name: format!("Organization {}", id),
                    org_kind: kind,
                    province_code: code.clone(),
                },
            );
            ids.push(id);
        }
        territory_orgs.push(ids);
    }
    let mut entries = BTreeMap::new();
    for s in 0..spec.n_scs {
        let code = sc_code(s);
        entries.insert(
            code.clone(),
            ScEntry {
                sc_id: code.clone(),
                sc_name: format!("Subject category {}", s + 1),
                discipline: Discipline::ALL[s % Discipline::ALL.len()],
            },
        );
    }

    let cm = &spec.citation_model;
    let means: Vec<f64> = (0..spec.n_years * spec.n_scs)
        .map(|_| rng.random_range(cm.mean_min..=cm.mean_max))
        .collect();

    let mut weights = vec![vec![1.0; spec.n_scs]; n_t];
    for b in &spec.specialization_plan {
        let t = spec.territory_index(&b.territory).expect("validated");
        let s = spec.sc_index(&b.sc).expect("validated");
        weights[t][s] *= b.boost;
    }
    let samplers: Vec<WeightedIndex<f64>> = weights
        .iter()
        .map(|w| WeightedIndex::new(w).expect("positive weights"))
        .collect();
    let doc_sampler = WeightedIndex::new(DOC_TYPES.iter().map(|d| d.1)).expect("positive weights");

    let mut publications = Vec::with_capacity(spec.n_publications);
    for i in 0..spec.n_publications {
        // the first n_t publications give every territory one single-territory paper
        let pigeonhole = i < n_t;
        let t = if pigeonhole { i } else { rng.random_range(0..n_t) };
        let year_idx = rng.random_range(0..spec.n_years);
        let primary = samplers[t].sample(&mut rng);
        let mut scs = vec![primary];
        if spec.n_scs > 1 && rng.random_bool(spec.multi_sc_prob) {
            let mut other = rng.random_range(0..spec.n_scs - 1);
            if other >= primary {
                other += 1;
            }
            scs.push(other);
        }
        let mut orgs = vec![territory_orgs[t][rng.random_range(0..spec.orgs_per_territory)].clone()];
        if !pigeonhole && n_t > 1 && rng.random_bool(spec.coauthor_prob) {
            let mut u = rng.random_range(0..n_t - 1);
            if u >= t {
                u += 1;
            }
            orgs.push(territory_orgs[u][rng.random_range(0..spec.orgs_per_territory)].clone());
        }
        let mean = means[year_idx * spec.n_scs + primary];
        let citations = negative_binomial(&mut rng, mean, cm.dispersion);
        publications.push(PublicationRecord {
            pub_id: format!("pub{:07}", i + 1),
            year: spec.start_year + year_idx as i32,
            doc_type: DOC_TYPES[doc_sampler.sample(&mut rng)].0,
            citations,
            subject_categories: scs.into_iter().map(sc_code).collect(),
            org_ids: orgs,
        });
    }

    let planted = spec
        .specialization_plan
        .iter()
        .map(|b| {
            let t = spec.territory_index(&b.territory).expect("validated");
            let s = spec.sc_index(&b.sc).expect("validated");
            let total: f64 = weights[t].iter().sum();
            PlantedTruth {
                territory: b.territory.clone(),
                sc: b.sc.clone(),
                boost: b.boost,
                planted_share: weights[t][s] / total,
                baseline_share: (weights[t][s] / b.boost) / (total - weights[t][s] + weights[t][s] / b.boost),
            }
        })
        .collect();

    let n = publications.len();
    let end_year = spec.start_year + spec.n_years as i32 - 1;
    let corpus = Corpus::from_parts(CorpusParts {
        publications,
        organizations,
        territories: TerritoryRegistry { provinces, regions },
        taxonomy: SubjectCategoryTaxonomy { entries },
        census_date: NaiveDate::from_ymd_opt(end_year + 1, 12, 31).expect("valid date"),
        year_window: (spec.start_year, end_year),
        load_summary: LoadSummary {
            read: n,
            kept: n,
            ..Default::default()
        },
    });
    Ok(SynthOutput {
        corpus,
        truth: GroundTruth {
            spec: spec.clone(),
            planted,
        },
    })
}

fn negative_binomial(rng: &mut ChaCha8Rng, mean: f64, shape: f64) -> u64 {
    let rate = Gamma::new(shape, mean / shape)
        .expect("validated gamma parameters")
        .sample(rng);
    if !(rate > 0.0) {
        return 0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng) as u64
}

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

/// Writes the four corpus files plus `ground_truth.json` into `dir`.
pub fn write_synth(output: &SynthOutput, dir: &Path) -> Result<CorpusFiles> {
    let files = CorpusFiles::in_dir(dir);
    write_corpus_files(&output.corpus, &files)?;
    let path = dir.join(GROUND_TRUTH_FILE);
    let mut json = serde_json::to_string_pretty(&output.truth).expect("ground truth serializes");
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(files)
}
