//! Artifact plumbing: deterministic float formatting, JSON/CSV writers, and
//! the per-run manifest.
//!
//! Every floating-point number leaving the tool — JSON reports, CSV tables,
//! console summaries — is printed with 17 significant digits, enough to
//! round-trip an f64 exactly. That makes the determinism contract
//! byte-testable: identical config and seed must reproduce every numeric
//! output byte for byte. Wall-clock timestamps live only in the manifest,
//! which is metadata, not a numeric output.

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// One f64 with 17 significant digits in scientific notation — the single
/// formatting rule shared by every output channel.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON formatter that routes every float through [`fmt_float`].
/// Indentation behaviour is delegated to the stock pretty formatter;
/// non-finite floats never reach `write_f64` (the serializer emits null).
struct SigFigPretty<'a> {
    inner: PrettyFormatter<'a>,
}

impl<'a> Formatter for SigFigPretty<'a> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serializes to pretty JSON with 17-significant-digit floats and a trailing
/// newline.
pub fn to_json_string<T: Serialize>(value: &T) -> io::Result<String> {
    let mut buf = Vec::new();
    let fmt = SigFigPretty {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value
        .serialize(&mut ser)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Builds a CSV table: header row plus one row per record, floats through
/// [`fmt_float`]. Cells must not contain commas or newlines — all our columns
/// are numbers, booleans, or short identifiers.
pub struct CsvTable {
    text: String,
    columns: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        let rendered: Vec<String> = cells.iter().map(CsvCell::render).collect();
        self.text.push_str(&rendered.join(","));
        self.text.push('\n');
    }

    pub fn into_text(self) -> String {
        self.text
    }
}

pub enum CsvCell {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl CsvCell {
    fn render(&self) -> String {
        match self {
            CsvCell::Int(v) => v.to_string(),
            CsvCell::Float(v) => fmt_float(*v),
            CsvCell::Bool(v) => v.to_string(),
        }
    }
}

/// Hex SHA-256 of the effective configuration text.
pub fn digest(text: &str) -> String {
    let out = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(64);
    for b in out {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

#[derive(Serialize)]
struct RunManifest<'a> {
    version: &'a str,
    command: &'a str,
    seed: u64,
    config_digest: &'a str,
    started_unix: u64,
    finished_unix: u64,
    /// Every file this run wrote, relative to the run directory. Each output
    /// file is referenced by exactly one manifest: a run owns its directory.
    outputs: &'a [String],
}

/// A run's output directory. Created empty (an existing non-empty directory
/// is refused — one run owns its directory exclusively), filled by the
/// `write_*` calls, and closed by [`OutputDir::finish`], which writes the
/// manifest listing every file.
pub struct OutputDir {
    dir: PathBuf,
    command: String,
    seed: u64,
    config_digest: String,
    started_unix: u64,
    outputs: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path, command: &str, seed: u64, config_digest: &str) -> io::Result<Self> {
        match fs::read_dir(dir) {
            Ok(mut entries) => {
                if entries.next().is_some() {
                    return Err(io::Error::new(
                        io::ErrorKind::AlreadyExists,
                        format!(
                            "output directory {} is not empty; each run owns its directory exclusively",
                            dir.display()
                        ),
                    ));
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => fs::create_dir_all(dir)?,
            Err(e) => return Err(e),
        }
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            seed,
            config_digest: config_digest.to_string(),
            started_unix: unix_now(),
            outputs: Vec::new(),
        })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), text)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let text = to_json_string(value)?;
        self.write_text(name, &text)
    }

    pub fn finish(mut self) -> io::Result<PathBuf> {
        self.outputs.sort();
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            seed: self.seed,
            config_digest: &self.config_digest,
            started_unix: self.started_unix,
            finished_unix: unix_now(),
            outputs: &self.outputs,
        };
        let text = to_json_string(&manifest)?;
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(self.dir)
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
