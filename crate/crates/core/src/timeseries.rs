//! Uniformly sampled series, labeled intervals and the label run-length codec.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use crate::{Error, Result};

/// Label written on rows that belong to no interval.
pub const BACKGROUND_LABEL: &str = "n";

/// A finite, uniformly sampled real-valued series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("time series must contain at least one sample"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid(alloc::format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(TimeSeries {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Copy of `range` as a new series at the same rate.
    pub fn slice(&self, range: Range<usize>) -> Result<TimeSeries> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::param(alloc::format!(
                "slice {}..{} out of range for length {}",
                range.start,
                range.end,
                self.len()
            )));
        }
        Ok(TimeSeries {
            samples: self.samples[range].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        })
    }

    /// Keeps every `factor`-th sample (no anti-alias filter) and divides the
    /// sample rate accordingly.
    pub fn decimate(&self, factor: usize) -> Result<TimeSeries> {
        if factor == 0 {
            return Err(Error::param("decimation factor must be positive"));
        }
        Ok(TimeSeries {
            samples: self.samples.iter().step_by(factor).copied().collect(),
            sample_rate_hz: self.sample_rate_hz / factor as f64,
        })
    }

    /// The series reversed in time.
    pub fn reversed(&self) -> TimeSeries {
        let mut samples = self.samples.clone();
        samples.reverse();
        TimeSeries {
            samples,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Mean of the squared samples.
    pub fn power(&self) -> f64 {
        mean_square(&self.samples)
    }
}

pub(crate) fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Half-open sample interval `[start, end)` carrying a class label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabeledInterval {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl LabeledInterval {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        LabeledInterval {
            start,
            end,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Number of samples shared with `[start, end)`.
    pub fn overlap(&self, start: usize, end: usize) -> usize {
        let lo = self.start.max(start);
        let hi = self.end.min(end);
        hi.saturating_sub(lo)
    }
}

/// A series together with its (possibly empty) ground-truth intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    series: TimeSeries,
    truth: Vec<LabeledInterval>,
}

impl LabeledRecord {
    /// Validates bounds, sorts intervals by start, and rejects same-label
    /// overlaps.
    pub fn new(series: TimeSeries, mut truth: Vec<LabeledInterval>) -> Result<Self> {
        let n = series.len();
        for iv in &truth {
            if iv.start >= iv.end || iv.end > n {
                return Err(Error::invalid(alloc::format!(
                    "interval [{}, {}) is empty or exceeds series length {n}",
                    iv.start,
                    iv.end
                )));
            }
        }
        truth.sort_by(|a, b| (a.start, a.end, &a.label).cmp(&(b.start, b.end, &b.label)));
        for (i, a) in truth.iter().enumerate() {
            for b in &truth[i + 1..] {
                if b.start >= a.end {
                    break;
                }
                if a.label == b.label {
                    return Err(Error::invalid(alloc::format!(
                        "intervals [{}, {}) and [{}, {}) with label {:?} overlap",
                        a.start,
                        a.end,
                        b.start,
                        b.end,
                        a.label
                    )));
                }
            }
        }
        Ok(LabeledRecord { series, truth })
    }

    pub fn unlabeled(series: TimeSeries) -> Self {
        LabeledRecord {
            series,
            truth: Vec::new(),
        }
    }

    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    pub fn truth(&self) -> &[LabeledInterval] {
        &self.truth
    }

    pub fn into_parts(self) -> (TimeSeries, Vec<LabeledInterval>) {
        (self.series, self.truth)
    }
}

/// Converts per-sample labels into maximal runs. Rows equal to
/// [`BACKGROUND_LABEL`] or empty belong to no interval.
pub fn labels_to_intervals<S: AsRef<str>>(labels: &[S]) -> Vec<LabeledInterval> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        let label = labels[i].as_ref();
        let mut j = i + 1;
        while j < labels.len() && labels[j].as_ref() == label {
            j += 1;
        }
        if !is_background(label) {
            out.push(LabeledInterval::new(i, j, label));
        }
        i = j;
    }
    out
}

/// Inverse of [`labels_to_intervals`]. Fails when two intervals cover the
/// same sample, since a row carries a single label.
pub fn intervals_to_labels(intervals: &[LabeledInterval], len: usize) -> Result<Vec<String>> {
    let mut labels: Vec<Option<&str>> = alloc::vec![None; len];
    for iv in intervals {
        if iv.end > len || iv.start >= iv.end {
            return Err(Error::invalid(alloc::format!(
                "interval [{}, {}) out of range for length {len}",
                iv.start,
                iv.end
            )));
        }
        if is_background(&iv.label) {
            return Err(Error::invalid(alloc::format!(
                "interval label {:?} is reserved for background rows",
                iv.label
            )));
        }
        for slot in &mut labels[iv.start..iv.end] {
            if slot.is_some() {
                return Err(Error::invalid(
                    "overlapping intervals cannot be written as per-row labels",
                ));
            }
            *slot = Some(&iv.label);
        }
    }
    Ok(labels
        .into_iter()
        .map(|l| l.unwrap_or(BACKGROUND_LABEL).to_string())
        .collect())
}

fn is_background(label: &str) -> bool {
    label.is_empty() || label == BACKGROUND_LABEL
}
