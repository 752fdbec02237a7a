//! Deliberately naive recomputation of the whole pipeline: quadratic loops,
//! string keys, no indexes and no parallelism. Sums follow the same order as
//! the main pipeline so both agree bit for bit.

use std::collections::BTreeMap;

use crate::config::RunConfig;
use crate::corpus::{Corpus, Level};
use crate::error::{Error, Result};
use crate::normalize::AiiMode;
use crate::specialization::{AiBasis, Label, ReportConfig, SpecializationCell, SpecializationReport};

fn territories(corpus: &Corpus, pub_orgs: &[String], level: Level) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for org in pub_orgs {
        let province = &corpus.organizations()[org].province_code;
        let code = match level {
            Level::Province => province.clone(),
            Level::Region => corpus.territories().provinces[province].region_code.clone(),
        };
        if !out.contains(&code) {
            out.push(code);
        }
    }
    out.sort();
    out
}

fn aii_values(corpus: &Corpus, mode: AiiMode) -> Result<Vec<f64>> {
    let pubs = corpus.publications();
    let mut out = Vec::with_capacity(pubs.len());
    for p in pubs {
        let mut sum_means = 0.0;
        for sc in &p.subject_categories {
            let mut n: u64 = 0;
            let mut total: u64 = 0;
            for q in pubs {
                if q.year == p.year && q.subject_categories.contains(sc) {
                    n += 1;
                    total += q.citations;
                }
            }
            let mean = match mode {
                AiiMode::Inclusive => total as f64 / n as f64,
                AiiMode::LeaveOneOut => {
                    if n < 2 {
                        return Err(Error::LeaveOneOutUndefined {
                            pub_id: p.pub_id.clone(),
                            year: p.year,
                            sc_id: sc.clone(),
                        });
                    }
                    (total - p.citations) as f64 / (n - 1) as f64
                }
            };
            sum_means += mean;
        }
        let factor = sum_means / p.subject_categories.len() as f64;
        out.push(if factor > 0.0 { p.citations as f64 / factor } else { 0.0 });
    }
    Ok(out)
}

struct Table {
    territories: Vec<String>,
    scs: Vec<String>,
    values: BTreeMap<(String, String), f64>,
    territory_totals: BTreeMap<String, f64>,
    sc_totals: BTreeMap<String, f64>,
    grand: f64,
}

impl Table {
    fn ratio(&self, t: &str, sc: &str) -> f64 {
        let v = self.values.get(&(t.to_owned(), sc.to_owned())).copied().unwrap_or(0.0);
        let sc_total = self.sc_totals.get(sc).copied().unwrap_or(0.0);
        (v / self.territory_totals[t]) / (sc_total / self.grand)
    }
}

fn tabulate(corpus: &Corpus, level: Level, contribution: impl Fn(usize) -> f64) -> Table {
    let pubs = corpus.publications();
    let pub_territories: Vec<Vec<String>> = pubs.iter().map(|p| territories(corpus, &p.org_ids, level)).collect();
    let mut all_territories: Vec<String> = pub_territories.iter().flatten().cloned().collect();
    all_territories.sort();
    all_territories.dedup();
    let mut all_scs: Vec<String> = pubs.iter().flat_map(|p| p.subject_categories.iter().cloned()).collect();
    all_scs.sort();
    all_scs.dedup();

    let mut values = BTreeMap::new();
    let mut totals = BTreeMap::new();
    for t in &all_territories {
        let mut row_total = 0.0;
        for sc in &all_scs {
            let mut v = 0.0;
            for (i, p) in pubs.iter().enumerate() {
                if pub_territories[i].contains(t) && p.subject_categories.contains(sc) {
                    v += contribution(i);
                }
            }
            values.insert((t.clone(), sc.clone()), v);
            row_total += v;
        }
        totals.insert(t.clone(), row_total);
    }
    let active: Vec<String> = all_territories.into_iter().filter(|t| totals[t] > 0.0).collect();
    let mut sc_totals = BTreeMap::new();
    for sc in &all_scs {
        let mut s = 0.0;
        for t in &active {
            s += values[&(t.clone(), sc.clone())];
        }
        sc_totals.insert(sc.clone(), s);
    }
    let mut grand = 0.0;
    for t in &active {
        grand += totals[t];
    }
    Table {
        territories: active,
        scs: all_scs,
        values,
        territory_totals: totals,
        sc_totals,
        grand,
    }
}

/// Recomputes the specialization report for `level` from scratch.
pub fn oracle_pipeline(corpus: &Corpus, level: Level, config: &RunConfig) -> Result<SpecializationReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus {
            dropped: corpus.load_summary().dropped,
        });
    }
    let report_config = ReportConfig {
        bands: config.bands(),
        ai_basis: config.ai_basis,
    };
    report_config.bands.validate()?;
    let aii = aii_values(corpus, config.aii_mode)?;
    let strength = tabulate(corpus, level, |i| aii[i] / corpus.publications()[i].subject_categories.len() as f64);
    if strength.territories.is_empty() || !(strength.grand > 0.0) {
        return Err(Error::EmptyMatrix);
    }
    let counts = match config.ai_basis {
        AiBasis::Strength => None,
        AiBasis::PubCount => Some(tabulate(corpus, level, |_| 1.0)),
    };

    let mut warnings = Vec::new();
    if strength.territories.len() == 1 {
        warnings.push(format!(
            "single active territory {}: national reference is degenerate, every ssi is 0",
            strength.territories[0]
        ));
    }
    // subject categories seen only in inactive territories are dropped silently
    let mut scs = Vec::new();
    for sc in &strength.scs {
        let seen = strength
            .territories
            .iter()
            .any(|t| publications_touch(corpus, level, t, sc));
        if !seen {
            continue;
        }
        if strength.sc_totals[sc] > 0.0 {
            scs.push(sc.clone());
        } else {
            warnings.push(format!("subject category {sc} has zero national total; excluded"));
        }
    }

    let b = report_config.bands;
    let mut cells = BTreeMap::new();
    for t in &strength.territories {
        for sc in &scs {
            let r = strength.ratio(t, sc);
            let ssi = if r == 0.0 { -100.0 } else { 100.0 * r.ln().tanh() };
            let ai = match &counts {
                None => r,
                Some(c) => c.ratio(t, sc),
            };
            let label = if ssi > b.strong_high {
                Label::HighlySpecialized
            } else if ssi > b.high {
                Label::Specialized
            } else if ssi >= b.low {
                Label::Expected
            } else if ssi >= b.strong_low {
                Label::DeSpecialized
            } else {
                Label::StronglyDeSpecialized
            };
            cells.insert(
                (t.clone(), sc.clone()),
                SpecializationCell {
                    territory_code: t.clone(),
                    sc_id: sc.clone(),
                    ssi,
                    ai,
                    rsi: (ai - 1.0) / (ai + 1.0),
                    label,
                },
            );
        }
    }
    Ok(SpecializationReport {
        level,
        cells,
        config: report_config,
        warnings,
    })
}

fn publications_touch(corpus: &Corpus, level: Level, territory: &str, sc: &str) -> bool {
    corpus.publications().iter().any(|p| {
        p.subject_categories.iter().any(|s| s == sc)
            && territories(corpus, &p.org_ids, level).iter().any(|t| t == territory)
    })
}
