//! Number rendering and the metadata-prefixed CSV interchange format.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Renders `x` with `decimals` places, rounding half away from zero.
/// Negative zero renders without a sign.
pub fn fixed(x: f64, decimals: usize) -> String {
    let scale = 10f64.powi(decimals as i32);
    let mut y = (x * scale).round() / scale;
    if y == 0.0 {
        y = 0.0;
    }
    format!("{y:.decimals$}")
}

/// CSV whose leading `# key=value` lines carry run metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetaCsv {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn write_meta_csv(
    path: &Path,
    meta: &[(&str, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut buf = Vec::new();
    for (k, v) in meta {
        writeln!(buf, "# {k}={v}").expect("write to vec");
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let io = |e: csv::Error| Error::io(path, e.into());
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_meta_csv(path: &Path, expected_header: &[&str]) -> Result<MetaCsv> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::parse(path, 0, format!("cannot read: {e}")))?;
    let mut meta = BTreeMap::new();
    let mut body_start = 0;
    let mut meta_lines = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix('#') else { break };
        meta_lines += 1;
        body_start += line.len();
        let rest = rest.trim();
        if let Some((k, v)) = rest.split_once('=') {
            meta.insert(k.trim().to_owned(), v.trim().to_owned());
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(&text.as_bytes()[body_start..]);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse(path, meta_lines + 1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.iter().map(String::as_str).ne(expected_header.iter().copied()) {
        return Err(Error::parse(
            path,
            meta_lines + 1,
            format!("expected header `{}`", expected_header.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line + meta_lines, e.to_string())
        })?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok(MetaCsv { meta, header, rows })
}

pub(crate) fn parse_f64(path: &Path, row: usize, field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::parse(path, row, format!("invalid number `{field}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_half_away_from_zero() {
        assert_eq!(fixed(99.97, 1), "100.0");
        assert_eq!(fixed(43.82022, 1), "43.8");
        assert_eq!(fixed(-72.41379, 1), "-72.4");
        assert_eq!(fixed(0.25, 1), "0.3");
        assert_eq!(fixed(-0.25, 1), "-0.3");
        assert_eq!(fixed(-0.04, 1), "0.0");
        assert_eq!(fixed(8.0 / 17.0, 2), "0.47");
        assert_eq!(fixed(100.0, 1), "100.0");
    }

    #[test]
    fn meta_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_meta_csv(
            &path,
            &[("level", "region".into()), ("census_date", "2011-12-31".into())],
            &["a", "b"],
            vec![vec!["x, y".to_owned(), "1".to_owned()]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# level=region\n# census_date=2011-12-31\na,b\n\"x, y\",1\n"));
        let back = read_meta_csv(&path, &["a", "b"]).unwrap();
        assert_eq!(back.meta["level"], "region");
        assert_eq!(back.rows, vec![vec!["x, y".to_owned(), "1".to_owned()]]);
        assert!(read_meta_csv(&path, &["a", "c"]).is_err());
    }
}
