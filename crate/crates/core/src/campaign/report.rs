//! `summary.md` rendered from an existing artifact tree.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::output::{check_single_hash, ArtifactDir, MANIFEST, SUMMARY};
use crate::error::{Error, Result};

/// Rows shown per table; the CSV files stay complete.
pub const TABLE_ROWS: usize = 40;

#[derive(Clone, Debug)]
pub struct RenderedReport {
    pub path: PathBuf,
    pub hash: String,
    /// `pass`, `fail` or `error`, as recorded in the manifest.
    pub status: String,
}

impl RenderedReport {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn csv_table(path: &Path, out: &mut String) -> Result<()> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let header = rdr.headers().map_err(|e| Error::Io(std::io::Error::other(e)))?.clone();
    let _ = writeln!(out, "| {} |", header.iter().collect::<Vec<_>>().join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    let mut total = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Io(std::io::Error::other(e)))?;
        if total < TABLE_ROWS {
            let _ = writeln!(out, "| {} |", rec.iter().collect::<Vec<_>>().join(" | "));
        }
        total += 1;
    }
    if total > TABLE_ROWS {
        let _ = writeln!(out, "\n{} of {total} rows shown.", TABLE_ROWS);
    }
    Ok(())
}

/// Re-renders `summary.md` in an artifact directory from its manifest and top-level tables.
/// Refuses trees whose files carry more than one config hash.
pub fn render_report(dir: &Path) -> Result<RenderedReport> {
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.exists() {
        return Err(Error::Precondition(format!("{} has no {MANIFEST}", dir.display())));
    }
    let hash = check_single_hash(dir, None)?.expect("manifest present");
    let m: Value = serde_json::from_reader(BufReader::new(File::open(&manifest_path)?))?;
    let field = |k: &str| m.get(k).cloned().unwrap_or(Value::Null);
    let status = cell(&field("status"));
    let mut body = String::new();
    let _ = writeln!(body, "# {} campaign\n", cell(&field("campaign")));
    let _ = writeln!(body, "| item | value |\n|---|---|");
    let _ = writeln!(body, "| config hash | `{hash}` |");
    let _ = writeln!(body, "| status | {status} |");
    let seeds = field("seeds");
    let _ = writeln!(body, "| seeds | {} |", seeds.as_array().map_or(0, Vec::len));
    let _ = writeln!(body, "| report | {} |", cell(&field("report")));
    let _ = writeln!(body, "| version | {} |", cell(&field("version")));
    if let Some(e) = m.get("error").and_then(Value::as_str) {
        let _ = writeln!(body, "| error | {} |", e.replace('\n', " "));
    }
    if let Some(summary) = m.get("summary").and_then(Value::as_object) {
        if !summary.is_empty() {
            let _ = writeln!(body, "\n## Summary\n\n| metric | value |\n|---|---|");
            for (k, v) in summary {
                let _ = writeln!(body, "| {k} | {} |", cell(v));
            }
        }
    }
    let files: Vec<String> = m
        .get("files")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_str).map(String::from).collect())
        .unwrap_or_default();
    for f in files.iter().filter(|f| f.ends_with(".csv") && !f.contains('/')) {
        let _ = writeln!(body, "\n## {f}\n");
        csv_table(&dir.join(f), &mut body)?;
    }
    let nested = files.iter().filter(|f| f.contains('/')).count();
    if nested > 0 {
        let _ = writeln!(body, "\n{nested} per-seed files under subdirectories.");
    }
    let mut out = ArtifactDir::existing(dir, &hash);
    out.write_markdown(&body)?;
    Ok(RenderedReport {
        path: dir.join(SUMMARY),
        hash,
        status,
    })
}
