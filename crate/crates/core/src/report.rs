//! Human-facing outputs: table-shaped CSVs, radar SVGs and map-joinable CSVs.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytics::{strength_per_inhabitant, ExtremeRatioRow, RegionSummary, TopKRow};
use crate::corpus::{Level, SubjectCategoryTaxonomy, TerritoryRegistry};
use crate::error::{Error, Result};
use crate::format::{fixed, write_meta_csv};
use crate::specialization::SpecializationReport;
use crate::strength::StrengthMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableStyle {
    /// Regional overview.
    Table1,
    /// Top SCs per region.
    Table2,
    /// Top regions per SC.
    Table3,
    /// Top SCs per province.
    Table4,
    /// Top provinces per SC.
    Table5,
    /// Extreme-specialization ratios per territory.
    Table6,
    /// Extreme-specialization ratios per SC.
    Table7,
}

impl TableStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            TableStyle::Table1 => "table1",
            TableStyle::Table2 => "table2",
            TableStyle::Table3 => "table3",
            TableStyle::Table4 => "table4",
            TableStyle::Table5 => "table5",
            TableStyle::Table6 => "table6",
            TableStyle::Table7 => "table7",
        }
    }
}

/// An analysis result ready to be laid out as a table.
#[derive(Debug, Clone, Copy)]
pub enum AnalysisResult<'a> {
    RegionSummaries(&'a [RegionSummary]),
    TopScs {
        level: Level,
        k: usize,
        rows: &'a [TopKRow],
    },
    TopTerritories {
        level: Level,
        k: usize,
        rows: &'a [TopKRow],
        taxonomy: &'a SubjectCategoryTaxonomy,
    },
    ExtremesByTerritory {
        level: Level,
        rows: &'a [ExtremeRatioRow],
    },
    ExtremesBySc {
        level: Level,
        rows: &'a [ExtremeRatioRow],
    },
}

impl AnalysisResult<'_> {
    fn kind(&self) -> String {
        match self {
            AnalysisResult::RegionSummaries(_) => "region summaries".into(),
            AnalysisResult::TopScs { level, .. } => format!("top SCs per {level}"),
            AnalysisResult::TopTerritories { level, .. } => format!("top {level}s per SC"),
            AnalysisResult::ExtremesByTerritory { level, .. } => format!("extreme ratios per {level}"),
            AnalysisResult::ExtremesBySc { level, .. } => format!("extreme ratios per SC over {level}s"),
        }
    }
}

fn ratio_columns(row: &ExtremeRatioRow) -> [String; 5] {
    [
        row.active_count.to_string(),
        row.highly_specialized_count.to_string(),
        row.non_specialized_count.to_string(),
        fixed(row.ratio_high, 2),
        fixed(row.ratio_low, 2),
    ]
}

fn organizations_cell(s: &RegionSummary) -> String {
    let parts: Vec<String> = [
        (s.universities, "U"),
        (s.research_institutions, "I"),
        (s.research_hospitals, "H"),
    ]
    .iter()
    .filter(|(n, _)| *n > 0)
    .map(|(n, c)| format!("{n}{c}"))
    .collect();
    if parts.is_empty() {
        "0".to_owned()
    } else {
        format!("{} ({})", s.organizations(), parts.join(", "))
    }
}

fn paired_header(first: &[&str], key: &str, value: &str, k: usize) -> Vec<String> {
    let mut header: Vec<String> = first.iter().map(|s| (*s).to_owned()).collect();
    for i in 1..=k {
        header.push(format!("{key}_{i}"));
        header.push(format!("{value}_{i}"));
    }
    header
}

fn paired_row(mut row: Vec<String>, entries: &[(String, f64)], k: usize, decimals: usize) -> Vec<String> {
    for i in 0..k {
        match entries.get(i) {
            Some((id, v)) => {
                row.push(id.clone());
                row.push(fixed(*v, decimals));
            }
            None => {
                row.push(String::new());
                row.push(String::new());
            }
        }
    }
    row
}

/// Writes `result` laid out as `style`. SSI values use `decimals` places and
/// ratios two.
pub fn emit_table(result: AnalysisResult<'_>, style: TableStyle, path: &Path, decimals: usize) -> Result<()> {
    let mismatch = || Error::StyleMismatch {
        style: style.as_str().to_owned(),
        got: result.kind(),
    };
    let (header, rows): (Vec<String>, Vec<Vec<String>>) = match (style, result) {
        (TableStyle::Table1, AnalysisResult::RegionSummaries(summaries)) => {
            let header = [
                "macro_area",
                "region",
                "region_name",
                "inhabitants_thousands",
                "provinces",
                "organizations",
                "publications",
                "active_scs",
            ];
            let rows = summaries
                .iter()
                .map(|s| {
                    vec![
                        s.macro_area.clone(),
                        s.region_code.clone(),
                        s.region_name.clone(),
                        fixed(s.inhabitants as f64 / 1000.0, 0),
                        s.provinces.join("; "),
                        organizations_cell(s),
                        s.publications.to_string(),
                        s.active_scs.to_string(),
                    ]
                })
                .collect();
            (header.iter().map(|s| (*s).to_owned()).collect(), rows)
        }
        (TableStyle::Table2, AnalysisResult::TopScs { level: Level::Region, k, rows })
        | (TableStyle::Table4, AnalysisResult::TopScs { level: Level::Province, k, rows }) => {
            let level = if style == TableStyle::Table2 { "region" } else { "province" };
            let header = paired_header(&[level], "sc", "ssi", k);
            let rows = rows
                .iter()
                .map(|r| paired_row(vec![r.subject.clone()], &r.entries, k, decimals))
                .collect();
            (header, rows)
        }
        (TableStyle::Table3, AnalysisResult::TopTerritories { level: Level::Region, k, rows, taxonomy })
        | (TableStyle::Table5, AnalysisResult::TopTerritories { level: Level::Province, k, rows, taxonomy }) => {
            let level = if style == TableStyle::Table3 { "region" } else { "province" };
            let header = paired_header(&["sc", "discipline"], level, "ssi", k);
            let rows = rows
                .iter()
                .map(|r| {
                    let discipline = taxonomy.discipline(&r.subject).map_or("", |d| d.name());
                    paired_row(vec![r.subject.clone(), discipline.to_owned()], &r.entries, k, decimals)
                })
                .collect();
            (header, rows)
        }
        (TableStyle::Table6, AnalysisResult::ExtremesByTerritory { level, rows }) => {
            let header = vec![
                level.as_str().to_owned(),
                "active_scs".into(),
                "highly_specialized_scs".into(),
                "non_specialized_scs".into(),
                "ratio_high".into(),
                "ratio_low".into(),
            ];
            let rows = rows
                .iter()
                .map(|r| std::iter::once(r.subject.clone()).chain(ratio_columns(r)).collect())
                .collect();
            (header, rows)
        }
        (TableStyle::Table7, AnalysisResult::ExtremesBySc { level, rows }) => {
            let plural = format!("{}s", level.as_str());
            let header = vec![
                "sc".to_owned(),
                format!("active_{plural}"),
                format!("highly_specialized_{plural}"),
                format!("non_specialized_{plural}"),
                "ratio_high".into(),
                "ratio_low".into(),
            ];
            let rows = rows
                .iter()
                .map(|r| std::iter::once(r.subject.clone()).chain(ratio_columns(r)).collect())
                .collect();
            (header, rows)
        }
        _ => return Err(mismatch()),
    };
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_meta_csv(path, &[], &header, rows)
}

pub const MAP_HEADER: [&str; 4] = ["territory_code", "ss", "ss_per_inhabitant", "ssi"];

/// One row per active territory for subject category `sc_id`, joinable to a
/// boundary dataset by territory code.
pub fn export_map_data(
    matrix: &StrengthMatrix,
    report: &SpecializationReport,
    registry: &TerritoryRegistry,
    sc_id: &str,
    path: &Path,
) -> Result<()> {
    if matrix.sc_index(sc_id).is_none() || !report.sc_ids().contains(&sc_id) {
        return Err(Error::UnknownSc(sc_id.to_owned()));
    }
    let per_inhabitant = strength_per_inhabitant(matrix, registry, sc_id)?;
    let rows = matrix
        .territories()
        .iter()
        .map(|t| {
            let ssi = report
                .cell(t, sc_id)
                .map(|c| c.ssi)
                .ok_or_else(|| Error::UnknownSc(sc_id.to_owned()))?;
            Ok(vec![
                t.clone(),
                matrix.value(t, sc_id).to_string(),
                per_inhabitant[t].to_string(),
                ssi.to_string(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    write_meta_csv(path, &[], &MAP_HEADER, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSeries {
    pub name: String,
    /// One SSI value per axis.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSpec {
    pub title: String,
    pub axes: Vec<String>,
    pub series: Vec<RadarSeries>,
    pub reference_level: f64,
}

impl RadarSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.len() < 3 {
            return Err(Error::Spec(format!("radar needs at least 3 axes, got {}", self.axes.len())));
        }
        if !(-100.0..=100.0).contains(&self.reference_level) {
            return Err(Error::Spec("reference level outside [-100, 100]".into()));
        }
        for s in &self.series {
            if s.values.len() != self.axes.len() {
                return Err(Error::Spec(format!(
                    "series {} has {} values for {} axes",
                    s.name,
                    s.values.len(),
                    self.axes.len()
                )));
            }
            if s.values.iter().any(|v| !(-100.0..=100.0).contains(v)) {
                return Err(Error::Spec(format!("series {} has values outside [-100, 100]", s.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarStyle {
    /// Width of the square plot area in pixels; the legend adds height below.
    pub size: u32,
    /// SSI levels drawn as gridline rings.
    pub grid_levels: Vec<f64>,
    pub palette: Vec<String>,
}

impl Default for RadarStyle {
    fn default() -> Self {
        RadarStyle {
            size: 640,
            grid_levels: vec![-50.0, 0.0, 50.0, 100.0],
            palette: [
                "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
            ]
            .iter()
            .map(|s| (*s).to_owned())
            .collect(),
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Geometry shared by the renderer and its tests.
#[derive(Debug, Clone, Copy)]
pub struct RadarGeometry {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub n_axes: usize,
}

impl RadarGeometry {
    pub fn new(style: &RadarStyle, n_axes: usize) -> Self {
        let size = style.size as f64;
        RadarGeometry {
            cx: size / 2.0,
            cy: size / 2.0 + 10.0,
            radius: size * 0.36,
            n_axes,
        }
    }

    /// Distance from the centre for an SSI value: -100 at the centre, 100 at the rim.
    pub fn rho(&self, value: f64) -> f64 {
        self.radius * (value + 100.0) / 200.0
    }

    /// Axis angle, clockwise from the top.
    pub fn angle(&self, axis: usize) -> f64 {
        -PI / 2.0 + 2.0 * PI * axis as f64 / self.n_axes as f64
    }

    pub fn point(&self, axis: usize, value: f64) -> (f64, f64) {
        let (r, a) = (self.rho(value), self.angle(axis));
        (self.cx + r * a.cos(), self.cy + r * a.sin())
    }
}

fn num(x: f64) -> String {
    fixed(x, 3)
}

pub fn radar_svg(spec: &RadarSpec, style: &RadarStyle) -> Result<String> {
    spec.validate()?;
    if style.palette.is_empty() {
        return Err(Error::Spec("radar palette is empty".into()));
    }
    let g = RadarGeometry::new(style, spec.axes.len());
    let width = style.size as f64;
    let legend_rows = spec.series.len();
    let height = width + 20.0 + 18.0 * legend_rows as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = num(width),
        h = num(height)
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="16" text-anchor="middle" font-size="14">{}</text>"#,
        num(g.cx),
        escape(&spec.title)
    );

    let _ = writeln!(s, r##"<g class="grid" fill="none" stroke="#cccccc" stroke-width="0.8">"##);
    for &level in &style.grid_levels {
        if level <= -100.0 {
            continue;
        }
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="{}" data-level="{}"/>"#,
            num(g.cx),
            num(g.cy),
            num(g.rho(level)),
            level
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r##"<circle class="reference" cx="{}" cy="{}" r="{}" fill="none" stroke="#333333" stroke-width="1.6" data-level="{}"/>"##,
        num(g.cx),
        num(g.cy),
        num(g.rho(spec.reference_level)),
        spec.reference_level
    );

    let _ = writeln!(s, r##"<g class="axes" stroke="#999999" stroke-width="0.6">"##);
    for i in 0..spec.axes.len() {
        let (x, y) = g.point(i, 100.0);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(g.cx),
            num(g.cy),
            num(x),
            num(y)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="labels">"#);
    for (i, label) in spec.axes.iter().enumerate() {
        let a = g.angle(i);
        let r = g.radius + 14.0;
        let (x, y) = (g.cx + r * a.cos(), g.cy + r * a.sin() + 4.0);
        let anchor = if a.cos() > 0.2 {
            "start"
        } else if a.cos() < -0.2 {
            "end"
        } else {
            "middle"
        };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#,
            num(x),
            num(y),
            escape(label)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="series">"#);
    for (k, series) in spec.series.iter().enumerate() {
        let color = &style.palette[k % style.palette.len()];
        let points: Vec<String> = series
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let (x, y) = g.point(i, v);
                format!("{},{}", num(x), num(y))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.08" stroke="{color}" stroke-width="1.5"><title>{}</title></polygon>"#,
            points.join(" "),
            escape(&series.name)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="legend">"#);
    for (k, series) in spec.series.iter().enumerate() {
        let color = &style.palette[k % style.palette.len()];
        let y = width + 20.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="20" y="{}" width="12" height="12" fill="{color}"/><text x="38" y="{}">{}</text>"#,
            num(y - 10.0),
            num(y),
            escape(&series.name)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_radar(spec: &RadarSpec, style: &RadarStyle, path: &Path) -> Result<()> {
    let svg = radar_svg(spec, style)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
