//! IQ sample files and atomic output writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::units::{IqSample, SymbolFrame};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
}

fn format_err(line: u64, message: impl Into<String>) -> IoError {
    IoError::Format { line, message: message.into() }
}

/// Parses an `i,q` CSV into a frame.
pub fn parse_iq_csv(text: &str) -> Result<SymbolFrame, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| format_err(1, e.to_string()))?;
    if header.len() != 2 || &header[0] != "i" || &header[1] != "q" {
        return Err(format_err(1, format!("expected header `i,q`, found `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut samples = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| format_err(e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let num = |k: usize| match row[k].parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format_err(line, format!("`{}` is not a finite number", &row[k]))),
        };
        samples.push(IqSample::new(num(0)?, num(1)?));
    }
    Ok(SymbolFrame::new(samples))
}

pub fn iq_csv(frame: &SymbolFrame) -> String {
    let mut out = String::from("i,q\n");
    for s in frame {
        let _ = writeln!(out, "{},{}", s.i, s.q);
    }
    out
}

pub fn read_iq_file(path: &Path) -> Result<SymbolFrame, IoError> {
    parse_iq_csv(&read_text(path)?)
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let file_err = |source| IoError::File { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(file_err)?;
    tmp.write_all(contents).map_err(file_err)?;
    tmp.as_file().sync_all().map_err(file_err)?;
    tmp.persist(path).map_err(|e| file_err(e.error))?;
    Ok(())
}
