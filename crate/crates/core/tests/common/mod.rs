#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::NaiveDate;
use specforge_core::corpus::{
    Corpus, CorpusParts, Discipline, DocType, LoadSummary, OrgKind, Organization, Province, PublicationRecord,
    Region, ScEntry, SubjectCategoryTaxonomy, TerritoryRegistry,
};
use specforge_core::synth::{generate, SynthSpec};

pub fn small_spec(seed: u64, n_publications: usize) -> SynthSpec {
    SynthSpec {
        seed,
        n_territories: 8,
        n_regions: 3,
        n_scs: 6,
        n_years: 3,
        n_publications,
        ..SynthSpec::default()
    }
}

pub fn synth(seed: u64, n_publications: usize) -> Corpus {
    generate(&small_spec(seed, n_publications)).unwrap().corpus
}

pub fn parts(corpus: &Corpus) -> CorpusParts {
    CorpusParts {
        publications: corpus.publications().to_vec(),
        organizations: corpus.organizations().clone(),
        territories: corpus.territories().clone(),
        taxonomy: corpus.taxonomy().clone(),
        census_date: corpus.census_date(),
        year_window: corpus.year_window(),
        load_summary: corpus.load_summary().clone(),
    }
}

pub fn map_citations(corpus: &Corpus, f: impl Fn(u64) -> u64) -> Corpus {
    let mut p = parts(corpus);
    for publication in &mut p.publications {
        publication.citations = f(publication.citations);
    }
    Corpus::from_parts(p)
}

pub fn publication(id: &str, citations: u64, scs: &[&str], orgs: &[&str]) -> PublicationRecord {
    PublicationRecord {
        pub_id: id.into(),
        year: 2008,
        doc_type: DocType::Article,
        citations,
        subject_categories: scs.iter().map(|s| (*s).to_owned()).collect(),
        org_ids: orgs.iter().map(|s| (*s).to_owned()).collect(),
    }
}

/// Regions A and B with one province each (PA, PB); SCs X and Y.
/// A publishes 8 in X and 2 in Y, B the reverse; every citation count is 5,
/// so every AII is 1 and SS equals the publication counts.
pub fn ab_corpus() -> Corpus {
    let mut pubs = Vec::new();
    for i in 1..=10 {
        let (a, b) = if i <= 8 { ("X", "Y") } else { ("Y", "X") };
        pubs.push(publication(&format!("a{i:02}"), 5, &[a], &["UA"]));
        pubs.push(publication(&format!("b{i:02}"), 5, &[b], &["UB"]));
    }
    registry_corpus(pubs)
}

pub fn registry_corpus(publications: Vec<PublicationRecord>) -> Corpus {
    let mut regions = BTreeMap::new();
    let mut provinces = BTreeMap::new();
    for (code, pop) in [("A", 400_000), ("B", 250_000)] {
        regions.insert(
            code.to_owned(),
            Region {
                region_code: code.into(),
                region_name: format!("Region {code}"),
                macro_area: "North".into(),
            },
        );
        provinces.insert(
            format!("P{code}"),
            Province {
                province_code: format!("P{code}"),
                province_name: format!("Province {code}"),
                region_code: code.into(),
                population: pop,
            },
        );
    }
    let mut organizations = BTreeMap::new();
    for code in ["A", "B"] {
        organizations.insert(
            format!("U{code}"),
            Organization {
                org_id: format!("U{code}"),
                name: format!("University {code}"),
                org_kind: OrgKind::University,
                province_code: format!("P{code}"),
            },
        );
    }
    let mut entries = BTreeMap::new();
    for (sc, d) in [("X", Discipline::Physics), ("Y", Discipline::Chemistry)] {
        entries.insert(
            sc.to_owned(),
            ScEntry {
                sc_id: sc.into(),
                sc_name: format!("Subject {sc}"),
                discipline: d,
            },
        );
    }
    let n = publications.len();
    Corpus::from_parts(CorpusParts {
        publications,
        organizations,
        territories: TerritoryRegistry { provinces, regions },
        taxonomy: SubjectCategoryTaxonomy { entries },
        census_date: NaiveDate::from_ymd_opt(2011, 12, 31).unwrap(),
        year_window: (2006, 2010),
        load_summary: LoadSummary {
            read: n,
            kept: n,
            ..Default::default()
        },
    })
}
