//! Receiver desense: sensitivity with the aggressor on minus sensitivity with
//! it off, per band, frequency and antenna.
//!
//! A positive delta means the sensitivity level rose toward 0 dBm, i.e. the
//! receiver got worse while the aggressor was running.
//!
//! Sensitivity logs are CSV with the header
//! `scenario,band,freq_mhz,<antenna>_dbm[,<antenna>_dbm...]`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use crate::units::{PowerDbm, RatioDb};

/// Frequencies closer than this are the same test point.
pub const FREQ_TOLERANCE_MHZ: f64 = 1e-6;

const REQUIRED_COLUMNS: [&str; 3] = ["scenario", "band", "freq_mhz"];
const ANTENNA_SUFFIX: &str = "_dbm";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesenseError {
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("cannot pair scenarios: {}", .problems.join("; "))]
    Pairing { problems: Vec<String> },
    #[error("no desense rows to summarize")]
    EmptyInput,
    #[error("cannot write CSV: {0}")]
    Emit(String),
}

impl DesenseError {
    fn format(line: u64, message: impl Into<String>) -> Self {
        Self::Format { line, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRecord {
    pub scenario: String,
    pub band: String,
    pub freq_mhz: f64,
    pub antenna_dbm: IndexMap<String, PowerDbm>,
}

impl SensitivityRecord {
    /// `BAND@FREQ`, the key used in pairing diagnostics.
    pub fn key(&self) -> String {
        point_key(&self.band, self.freq_mhz)
    }
}

fn point_key(band: &str, freq_mhz: f64) -> String {
    format!("{band}@{freq_mhz}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesenseRow {
    pub band: String,
    pub freq_mhz: f64,
    pub delta_db: IndexMap<String, RatioDb>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaSummary {
    pub antenna: String,
    pub min_db: f64,
    pub max_db: f64,
    pub mean_db: f64,
    pub worst_freq_mhz: f64,
    pub worst_band: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesenseSummary {
    pub antennas: Vec<AntennaSummary>,
    /// Antenna with the largest single delta.
    pub worst_antenna: String,
}

impl DesenseSummary {
    pub fn antenna(&self, name: &str) -> Option<&AntennaSummary> {
        self.antennas.iter().find(|a| a.antenna == name)
    }
}

/// Rounds to two decimals for presentation.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn csv_line(err: &csv::Error) -> u64 {
    err.position().map(|p| p.line()).unwrap_or(0)
}

pub fn parse_sensitivity_csv(text: &str) -> Result<Vec<SensitivityRecord>, DesenseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| DesenseError::format(csv_line(&e).max(1), e.to_string()))?
        .clone();
    if header.len() < REQUIRED_COLUMNS.len() + 1
        || header.iter().zip(REQUIRED_COLUMNS).any(|(got, want)| got != want)
    {
        return Err(DesenseError::format(
            1,
            format!(
                "missing required header: expected `scenario,band,freq_mhz,<antenna>_dbm...`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut antennas: Vec<String> = Vec::new();
    for col in header.iter().skip(REQUIRED_COLUMNS.len()) {
        let name = col
            .strip_suffix(ANTENNA_SUFFIX)
            .filter(|n| !n.is_empty())
            .ok_or_else(|| DesenseError::format(1, format!("antenna column `{col}` must be named `<antenna>_dbm`")))?;
        if antennas.iter().any(|a| a == name) {
            return Err(DesenseError::format(1, format!("duplicate antenna column `{col}`")));
        }
        antennas.push(name.to_string());
    }

    let mut records: Vec<SensitivityRecord> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| DesenseError::format(csv_line(&e), e.to_string()))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let parse_num = |col: usize| -> Result<f64, DesenseError> {
            let cell = &row[col];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(DesenseError::format(line, format!("column `{}`: `{cell}` is not a number", &header[col]))),
            }
        };

        let freq_mhz = parse_num(2)?;
        if freq_mhz <= 0.0 {
            return Err(DesenseError::format(line, format!("freq_mhz must be positive, got {freq_mhz}")));
        }
        let mut antenna_dbm = IndexMap::with_capacity(antennas.len());
        for (k, name) in antennas.iter().enumerate() {
            let v = parse_num(REQUIRED_COLUMNS.len() + k)?;
            antenna_dbm.insert(name.clone(), PowerDbm::new(v).expect("checked finite"));
        }
        let record = SensitivityRecord {
            scenario: row[0].to_string(),
            band: row[1].to_string(),
            freq_mhz,
            antenna_dbm,
        };
        if records.iter().any(|r| {
            r.scenario == record.scenario && r.band == record.band && (r.freq_mhz - freq_mhz).abs() <= FREQ_TOLERANCE_MHZ
        }) {
            return Err(DesenseError::format(
                line,
                format!("duplicate record for scenario {} at {}", record.scenario, record.key()),
            ));
        }
        records.push(record);
    }
    Ok(records)
}

/// Writes records back out in the ingestion schema. All records must carry
/// the same antenna columns.
pub fn emit_sensitivity_csv(records: &[SensitivityRecord]) -> Result<String, DesenseError> {
    let first = records
        .first()
        .ok_or_else(|| DesenseError::Emit("no records; antenna columns unknown".into()))?;
    let antennas: Vec<&String> = first.antenna_dbm.keys().collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = REQUIRED_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(antennas.iter().map(|a| format!("{a}{ANTENNA_SUFFIX}")));
    w.write_record(&header).map_err(|e| DesenseError::Emit(e.to_string()))?;
    for r in records {
        if r.antenna_dbm.len() != antennas.len() || antennas.iter().any(|a| !r.antenna_dbm.contains_key(*a)) {
            return Err(DesenseError::Emit(format!("record {} has a different antenna set", r.key())));
        }
        let mut fields = vec![r.scenario.clone(), r.band.clone(), r.freq_mhz.to_string()];
        fields.extend(antennas.iter().map(|a| r.antenna_dbm[*a].value().to_string()));
        w.write_record(&fields).map_err(|e| DesenseError::Emit(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| DesenseError::Emit(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| DesenseError::Emit(e.to_string()))
}

fn same_point(a: &SensitivityRecord, b: &SensitivityRecord) -> bool {
    a.band == b.band && (a.freq_mhz - b.freq_mhz).abs() <= FREQ_TOLERANCE_MHZ
}

/// Pairs `on` with `off` by (band, frequency) and returns `on - off` per
/// antenna, ordered by band then ascending frequency.
///
/// Every problem found is reported, not just the first.
pub fn compute_desense(off: &[SensitivityRecord], on: &[SensitivityRecord]) -> Result<Vec<DesenseRow>, DesenseError> {
    let mut problems = Vec::new();
    let mut rows = Vec::with_capacity(on.len());

    for off_rec in off {
        if !on.iter().any(|r| same_point(r, off_rec)) {
            problems.push(format!("{} has no aggressor-on measurement", off_rec.key()));
        }
    }
    for on_rec in on {
        let Some(off_rec) = off.iter().find(|r| same_point(r, on_rec)) else {
            problems.push(format!("{} has no aggressor-off measurement", on_rec.key()));
            continue;
        };
        let mut delta_db = IndexMap::new();
        for (name, off_dbm) in &off_rec.antenna_dbm {
            match on_rec.antenna_dbm.get(name) {
                Some(on_dbm) => {
                    delta_db.insert(name.clone(), on_dbm.delta(*off_dbm));
                }
                None => problems.push(format!("{}: antenna {name} missing from aggressor-on data", on_rec.key())),
            }
        }
        for name in on_rec.antenna_dbm.keys() {
            if !off_rec.antenna_dbm.contains_key(name) {
                problems.push(format!("{}: antenna {name} missing from aggressor-off data", on_rec.key()));
            }
        }
        rows.push(DesenseRow { band: on_rec.band.clone(), freq_mhz: on_rec.freq_mhz, delta_db });
    }

    if !problems.is_empty() {
        return Err(DesenseError::Pairing { problems });
    }
    rows.sort_by(|a, b| {
        a.band
            .cmp(&b.band)
            .then(a.freq_mhz.partial_cmp(&b.freq_mhz).unwrap_or(Ordering::Equal))
    });
    Ok(rows)
}

pub fn summarize(rows: &[DesenseRow]) -> Result<DesenseSummary, DesenseError> {
    if rows.is_empty() {
        return Err(DesenseError::EmptyInput);
    }
    struct Acc<'a> {
        min: f64,
        max: f64,
        sum: f64,
        n: usize,
        worst: &'a DesenseRow,
    }
    let mut accs: IndexMap<&str, Acc> = IndexMap::new();
    for row in rows {
        for (name, delta) in &row.delta_db {
            let d = delta.value();
            let acc = accs.entry(name.as_str()).or_insert(Acc { min: d, max: d, sum: 0.0, n: 0, worst: row });
            acc.min = acc.min.min(d);
            acc.sum += d;
            acc.n += 1;
            let worst_d = acc.worst.delta_db[name.as_str()].value();
            if d > worst_d || (d == worst_d && row.freq_mhz < acc.worst.freq_mhz) {
                acc.worst = row;
            }
            acc.max = acc.max.max(d);
        }
    }
    if accs.is_empty() {
        return Err(DesenseError::EmptyInput);
    }

    let antennas: Vec<AntennaSummary> = accs
        .into_iter()
        .map(|(name, acc)| AntennaSummary {
            antenna: name.to_string(),
            min_db: acc.min,
            max_db: acc.max,
            mean_db: acc.sum / acc.n as f64,
            worst_freq_mhz: acc.worst.freq_mhz,
            worst_band: acc.worst.band.clone(),
        })
        .collect();
    let worst_antenna = antennas
        .iter()
        .fold(&antennas[0], |best, a| if a.max_db > best.max_db { a } else { best })
        .antenna
        .clone();
    Ok(DesenseSummary { antennas, worst_antenna })
}

/// Desense table with values rounded to two decimals:
/// `band,freq_mhz,<antenna>_desense_db,...`.
pub fn emit_desense_csv(rows: &[DesenseRow]) -> String {
    let mut antennas: Vec<&str> = Vec::new();
    for row in rows {
        for name in row.delta_db.keys() {
            if !antennas.contains(&name.as_str()) {
                antennas.push(name);
            }
        }
    }
    let mut out = String::from("band,freq_mhz");
    for a in &antennas {
        let _ = write!(out, ",{a}_desense_db");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{},{}", row.band, row.freq_mhz);
        for a in &antennas {
            match row.delta_db.get(*a) {
                Some(d) => {
                    let _ = write!(out, ",{:.2}", round2(d.value()) + 0.0);
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}
