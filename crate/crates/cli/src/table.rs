//! CSV documents with `#` metadata lines, plus atomic file writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Shortest fixed-width form that round-trips: 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvDoc {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new(header: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parsed numeric table; empty cells become `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl NumericTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Every value of a column, which must be present in every row.
    pub fn required(&self, name: &str) -> CliResult<Vec<f64>> {
        let i = self
            .column(name)
            .ok_or_else(|| CliError::Config(format!("CSV lacks the column {name:?}")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| row[i].ok_or_else(|| CliError::Config(format!("row {} has no {name}", r + 1))))
            .collect()
    }
}

pub fn parse_csv(text: &str) -> CliResult<NumericTable> {
    let meta = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once(':'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Config(format!("CSV header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(CliError::Config("CSV header row is missing".into()));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("CSV row {}: {e}", i + 1)))?;
        let row = record
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .map_err(|_| CliError::Config(format!("CSV row {}: {cell:?} is not a number", i + 1)))
                }
            })
            .collect::<CliResult<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(NumericTable { meta, header, rows })
}

pub fn read_csv(path: &Path) -> CliResult<NumericTable> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_csv(&text)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            -0.0,
            1.0 / 3.0,
            29.927398952803053,
            1e-300,
            6.02e23,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert!(fmt_num(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn document_round_trip() {
        let mut doc = CsvDoc::new(&["phi_rad", "value", "stderr"]);
        doc.meta("backend", "gaussian");
        doc.row(vec![fmt_num(0.1), fmt_num(2.0 / 7.0), String::new()]);
        doc.row(vec![fmt_num(0.2), fmt_num(1e-17), fmt_num(0.5)]);
        let t = parse_csv(&doc.render()).unwrap();
        assert_eq!(t.meta, vec![("backend".to_string(), "gaussian".to_string())]);
        assert_eq!(t.header, vec!["phi_rad", "value", "stderr"]);
        assert_eq!(t.rows[0], vec![Some(0.1), Some(2.0 / 7.0), None]);
        assert_eq!(t.required("value").unwrap(), vec![2.0 / 7.0, 1e-17]);
        assert!(t.required("stderr").is_err());
        assert!(t.required("nope").is_err());
    }

    #[test]
    fn malformed_csv() {
        assert!(parse_csv("a,b\n1,x\n").is_err());
        assert!(parse_csv("a,b\n1,2,3\n").is_err());
        assert!(parse_csv("# only: meta\n").is_err());
    }
}
