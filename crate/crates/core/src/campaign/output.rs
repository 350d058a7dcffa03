//! Artifact tree under `<out>/<config hash>/`: every file carries the hash.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::{self as field_io, FieldData};
use crate::spectral::SpatialField;

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.md";

/// A hash-named output directory and the payload files written so far.
pub struct ArtifactDir {
    dir: PathBuf,
    hash: String,
    files: Vec<String>,
}

impl ArtifactDir {
    /// Creates `<root>/<hash>`, refusing a directory that holds artifacts of another config.
    pub fn open(root: &Path, hash: &str) -> Result<Self> {
        let dir = root.join(hash);
        fs::create_dir_all(&dir)?;
        check_single_hash(&dir, Some(hash))?;
        Ok(Self {
            dir,
            hash: hash.to_string(),
            files: Vec::new(),
        })
    }

    /// Wraps an existing directory without scanning it.
    pub(crate) fn existing(dir: &Path, hash: &str) -> Self {
        Self {
            dir: dir.to_path_buf(),
            hash: hash.to_string(),
            files: Vec::new(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Payload files written by this run, relative to the directory, in write order.
    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn create(&mut self, name: &str, track: bool) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        if track {
            self.files.push(name.to_string());
        }
        Ok(BufWriter::new(File::create(path)?))
    }

    /// CSV with a leading `# config_hash=<hex>` comment line.
    pub fn write_csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let hash = self.hash.clone();
        let mut w = self.create(name, true)?;
        writeln!(w, "# config_hash={hash}")?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(header).map_err(csv_err)?;
        for row in rows {
            csv.write_record(row).map_err(csv_err)?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Pretty JSON object with a top-level `config_hash` key.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.json(name, value, true)
    }

    pub(crate) fn write_manifest<T: Serialize>(&mut self, value: &T) -> Result<()> {
        self.json(MANIFEST, value, false)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T, track: bool) -> Result<()> {
        let mut v = serde_json::to_value(value)?;
        let obj = match &mut v {
            Value::Object(m) => m,
            _ => return Err(Error::Precondition(format!("{name}: JSON payload must be an object"))),
        };
        obj.insert("config_hash".into(), Value::String(self.hash.clone()));
        let mut w = self.create(name, track)?;
        serde_json::to_writer_pretty(&mut w, &v)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// Field in the text exchange format, hash in the header.
    pub fn write_field(&mut self, name: &str, field: &SpatialField) -> Result<()> {
        let hash = self.hash.clone();
        let mut w = self.create(name, true)?;
        field_io::write_text(&FieldData::Physical(field.clone()), Some(&hash), &mut w)?;
        w.flush()?;
        Ok(())
    }

    pub(crate) fn write_markdown(&mut self, body: &str) -> Result<()> {
        let hash = self.hash.clone();
        let mut w = self.create(SUMMARY, false)?;
        writeln!(w, "<!-- config_hash={hash} -->")?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Config hash embedded in one artifact file, if any.
pub fn file_hash(path: &Path) -> Result<Option<String>> {
    if path.extension().is_some_and(|e| e == "json") {
        let v: Value = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        return Ok(v.get("config_hash").and_then(Value::as_str).map(str::to_string));
    }
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    Ok(first
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix("config_hash="))
        .map(str::to_string))
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            walk(&p, out)?;
        } else {
            out.push(p);
        }
    }
    Ok(())
}

/// Verifies that every file under `dir` carries one hash (`expected`, when given).
/// Returns that hash, or `None` for an empty tree.
pub fn check_single_hash(dir: &Path, expected: Option<&str>) -> Result<Option<String>> {
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    let mut seen: Option<String> = expected.map(str::to_string);
    for f in files {
        let found = file_hash(&f).unwrap_or(None).unwrap_or_else(|| "<none>".to_string());
        match &seen {
            Some(h) if *h != found => {
                return Err(Error::MixedOutput {
                    dir: f,
                    found,
                    expected: h.clone(),
                })
            }
            Some(_) => {}
            None => seen = Some(found),
        }
    }
    Ok(seen)
}
