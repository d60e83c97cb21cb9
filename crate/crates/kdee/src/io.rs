//! Record files.
//!
//! CSV records have the header `index,value[,label]`, one row per sample.
//! Rows outside every interval carry the background label `n`. The sample
//! rate and generator metadata live in a JSON sidecar `<path>.meta.json`.
//!
//! JSON records are a single object
//! `{sample_rate_hz, samples, intervals: [{start, end, label}], meta}`.
//!
//! Floats are written in their shortest round-trip form, so reading back a
//! written record gives the same bits. Every write goes to a temporary file
//! in the target directory that is renamed into place once complete.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kdee_core::timeseries::{intervals_to_labels, labels_to_intervals};
use kdee_core::{LabeledInterval, LabeledRecord, TimeSeries};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::{Error, Result};

/// Free-form metadata carried next to a record (seed, generator settings).
pub type Meta = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    /// JSON for a `.json` extension, CSV otherwise.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub record: LabeledRecord,
    pub meta: Meta,
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    sample_rate_hz: f64,
    samples: Vec<f64>,
    #[serde(default)]
    intervals: Vec<LabeledInterval>,
    #[serde(default)]
    meta: Meta,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    sample_rate_hz: f64,
    #[serde(default)]
    meta: Meta,
}

/// `<path>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Reads a record. `sample_rate_hz` overrides the rate stored in the file or
/// its sidecar; a CSV record without either is rejected.
pub fn read_record(path: &Path, format: Format, sample_rate_hz: Option<f64>) -> Result<Document> {
    match format {
        Format::Json => {
            let doc: RecordJson = read_json(path)?;
            let rate = sample_rate_hz.unwrap_or(doc.sample_rate_hz);
            let series = TimeSeries::new(doc.samples, rate)?;
            Ok(Document {
                record: LabeledRecord::new(series, doc.intervals)?,
                meta: doc.meta,
            })
        }
        Format::Csv => {
            let (samples, labels) = read_csv_rows(path)?;
            let side = sidecar_path(path);
            let sidecar: Option<Sidecar> = if side.exists() { Some(read_json(&side)?) } else { None };
            let rate = sample_rate_hz
                .or(sidecar.as_ref().map(|s| s.sample_rate_hz))
                .ok_or_else(|| {
                    kdee_core::Error::Validation(format!(
                        "{}: no sample rate (pass one or provide {})",
                        path.display(),
                        side.display()
                    ))
                })?;
            let series = TimeSeries::new(samples, rate)?;
            Ok(Document {
                record: LabeledRecord::new(series, labels_to_intervals(&labels))?,
                meta: sidecar.map(|s| s.meta).unwrap_or_default(),
            })
        }
    }
}

fn read_csv_rows(path: &Path) -> Result<(Vec<f64>, Vec<String>)> {
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.into(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let parse = |line: u64, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };

    let mut rows = rdr.records();
    let header = match rows.next() {
        None => return Err(kdee_core::Error::Validation(format!("{}: empty file", path.display())).into()),
        Some(h) => h.map_err(|e| parse(1, e.to_string()))?,
    };
    let names: Vec<&str> = header.iter().collect();
    let labeled = match names.as_slice() {
        ["index", "value"] => false,
        ["index", "value", "label"] => true,
        _ => {
            return Err(parse(
                1,
                format!("expected header index,value[,label], found {names:?}"),
            ))
        }
    };
    let width = if labeled { 3 } else { 2 };

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for row in rows {
        let line = samples.len() as u64 + 2;
        let row = row.map_err(|e| parse(line, e.to_string()))?;
        if row.len() != width {
            return Err(parse(line, format!("expected {width} fields, found {}", row.len())));
        }
        let index: usize = row[0]
            .parse()
            .map_err(|_| parse(line, format!("bad index {:?}", &row[0])))?;
        if index != samples.len() {
            return Err(parse(
                line,
                format!("index {index} out of sequence (expected {})", samples.len()),
            ));
        }
        let value: f64 = row[1]
            .parse()
            .map_err(|_| parse(line, format!("bad value {:?}", &row[1])))?;
        if !value.is_finite() {
            return Err(kdee_core::Error::Validation(format!(
                "{}: line {line}: non-finite value {value}",
                path.display()
            ))
            .into());
        }
        samples.push(value);
        if labeled {
            labels.push(row[2].to_string());
        }
    }
    if samples.is_empty() {
        return Err(kdee_core::Error::Validation(format!("{}: no samples", path.display())).into());
    }
    Ok((samples, labels))
}

/// Writes a record, plus its sidecar for CSV.
pub fn write_record(record: &LabeledRecord, meta: &Meta, path: &Path, format: Format) -> Result<()> {
    let series = record.series();
    match format {
        Format::Json => write_json(
            path,
            &RecordJson {
                sample_rate_hz: series.sample_rate_hz(),
                samples: series.samples().to_vec(),
                intervals: record.truth().to_vec(),
                meta: meta.clone(),
            },
        ),
        Format::Csv => {
            let labels = if record.truth().is_empty() {
                None
            } else {
                Some(intervals_to_labels(record.truth(), series.len())?)
            };
            write_atomic(path, |w| {
                let mut out = csv::Writer::from_writer(w);
                match &labels {
                    None => out.write_record(["index", "value"])?,
                    Some(_) => out.write_record(["index", "value", "label"])?,
                }
                for (i, v) in series.samples().iter().enumerate() {
                    let (index, value) = (i.to_string(), format!("{v:?}"));
                    match &labels {
                        None => out.write_record([&index, &value])?,
                        Some(l) => out.write_record([&index, &value, &l[i]])?,
                    }
                }
                out.flush()
            })?;
            write_json(
                &sidecar_path(path),
                &Sidecar {
                    sample_rate_hz: series.sample_rate_hz(),
                    meta: meta.clone(),
                },
            )
        }
    }
}

/// Runs `fill` against a temporary file next to `path` and renames it into
/// place only if `fill` succeeds.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let err = |source| Error::Write {
        path: path.into(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(err)?;
        w.flush().map_err(err)?;
    }
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.into(),
        source,
    })?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
        path: path.into(),
        source,
    })
}
