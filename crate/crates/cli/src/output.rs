//! Tables, atomic file output, manifests and sample-file input.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use rdens_core::SampleSet;
use serde::ser::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Usage(format!("unknown format '{other}'"))),
        }
    }

    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    /// Floats keep 17 significant digits.
    fn to_csv(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Float(x) => s.serialize_f64(*x),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    /// Written as a leading `#` line in CSV and as `title` in JSON.
    pub title: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { title: None, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut buf = Vec::new();
                if let Some(t) = &self.title {
                    writeln!(buf, "# {t}")?;
                }
                let mut w = csv::Writer::from_writer(buf);
                let io = |e: csv::Error| CliError::Io(e.to_string());
                w.write_record(&self.columns).map_err(io)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::to_csv)).map_err(io)?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
            Format::Json => {
                let v = json!({ "title": self.title, "columns": self.columns, "rows": self.rows });
                Ok(to_json_bytes(&v))
            }
        }
    }
}

pub fn to_json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("json values always serialize");
    out.push(b'\n');
    out
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn manifest_path(data: &Path) -> PathBuf {
    let mut name: OsString = data.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    data.with_file_name(name)
}

/// `dir/stem.suffix.ext` next to `base`.
pub fn sibling(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    base.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

/// One invocation: every data file it writes gets a manifest with the
/// resolved parameters and a command line that recreates it.
pub struct Run {
    pub command: &'static str,
    pub positional: Option<String>,
    pub params: Resolved,
}

impl Run {
    pub fn new(command: &'static str, params: Resolved) -> Self {
        Self { command, positional: None, params }
    }

    pub fn rerun(&self) -> String {
        self.params.command_line(self.command, self.positional.as_deref())
    }

    pub fn write(&self, path: &Path, bytes: &[u8], stats: Value) -> Result<(), CliError> {
        write_atomic(path, bytes)?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let manifest = json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "parameters": self.params.to_json(),
            "outputs": [name],
            "stats": stats,
            "rerun": self.rerun(),
        });
        write_atomic(&manifest_path(path), &to_json_bytes(&manifest))
    }

    pub fn write_table(&self, path: &Path, table: &Table, format: Format, stats: Value) -> Result<(), CliError> {
        self.write(path, &table.encode(format)?, stats)
    }
}

/// Spectra read from a sample file, with rows flagged as not converged
/// dropped.
#[derive(Debug, Clone)]
pub struct Spectra {
    pub samples: SampleSet,
    pub skipped: usize,
}

const SPECTRUM_COLUMNS: [&str; 4] = ["lambda1", "lambda2", "lambda3", "lambda4"];

fn spectra_from(columns: &[String], rows: impl Iterator<Item = Result<Vec<f64>, CliError>>, path: &Path) -> Result<Spectra, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let idx: Vec<usize> = SPECTRUM_COLUMNS
        .iter()
        .map(|c| columns.iter().position(|h| h == c).ok_or_else(|| bad(format!("missing column {c}"))))
        .collect::<Result<_, _>>()?;
    let converged = columns.iter().position(|h| h == "converged");
    let mut samples = SampleSet::new(4);
    let mut skipped = 0;
    for row in rows {
        let row = row?;
        if row.len() != columns.len() {
            return Err(bad("ragged row".into()));
        }
        if converged.is_some_and(|c| row[c] == 0.0) {
            skipped += 1;
            continue;
        }
        samples.push_unsorted(&idx.iter().map(|&i| row[i]).collect::<Vec<_>>());
    }
    Ok(Spectra { samples, skipped })
}

/// Reads a CSV or JSON (by extension) sample table with columns
/// `lambda1..lambda4` and optionally `converged`.
pub fn read_spectra(path: &Path) -> Result<Spectra, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        let v: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        let columns: Vec<String> = serde_json::from_value(v["columns"].clone()).map_err(|e| bad(e.to_string()))?;
        let rows: Vec<Vec<f64>> = serde_json::from_value(v["rows"].clone()).map_err(|e| bad(e.to_string()))?;
        return spectra_from(&columns, rows.into_iter().map(Ok), path);
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let rows = reader.records().map(|r| {
        let r = r.map_err(|e| bad(e.to_string()))?;
        r.iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| bad(format!("'{f}': {e}"))))
            .collect::<Result<Vec<f64>, CliError>>()
    });
    spectra_from(&columns, rows, path)
}

/// Parameters recorded in the manifest next to `data`, if there is one.
pub fn read_manifest_parameters(data: &Path) -> Option<Value> {
    let text = std::fs::read_to_string(manifest_path(data)).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    Some(v["parameters"].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut t = Table::new(&["lambda1", "lambda2", "lambda3", "lambda4", "converged"]);
        t.push(vec![0.4.into(), 0.1.into(), 0.3.into(), 0.2.into(), true.into()]);
        t.push(vec![0.25.into(), 0.25.into(), 0.25.into(), 0.25.into(), false.into()]);
        t
    }

    #[test]
    fn csv_keeps_full_precision() {
        let mut t = Table::new(&["x"]);
        t.push(vec![Cell::Float(0.1 + 0.2)]);
        let text = String::from_utf8(t.encode(Format::Csv).unwrap()).unwrap();
        let x: f64 = text.lines().nth(1).unwrap().parse().unwrap();
        assert_eq!(x, 0.1 + 0.2);
    }

    #[test]
    fn round_trip_skips_unconverged() {
        let dir = tempfile::tempdir().unwrap();
        for format in [Format::Csv, Format::Json] {
            let mut t = table();
            t.title = Some("run".into());
            let path = dir.path().join(format!("s.{}", format.ext()));
            write_atomic(&path, &t.encode(format).unwrap()).unwrap();
            let s = read_spectra(&path).unwrap();
            assert_eq!(s.skipped, 1);
            assert_eq!(s.samples.row(0), &[0.1, 0.2, 0.3, 0.4]);
        }
    }

    #[test]
    fn missing_columns_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_spectra(&path), Err(CliError::Usage(_))));
    }

    #[test]
    fn derived_paths() {
        assert_eq!(manifest_path(Path::new("out/run.csv")), Path::new("out/run.csv.manifest.json"));
        assert_eq!(sibling(Path::new("out/p.csv"), "curves", "csv"), Path::new("out/p.curves.csv"));
    }
}
