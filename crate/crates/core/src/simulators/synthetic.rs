//! Noisy sinusoids and the sin → |sin| structural change.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::rng::stream;
use crate::{Error, LabeledInterval, LabeledRecord, Result, TimeSeries};

/// Label of the rectified segment.
pub const RECTIFIED_LABEL: &str = "rectified";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SineConfig {
    pub freq_hz: f64,
    pub amplitude: f64,
    pub noise_sigma: f64,
    pub len: usize,
    pub sample_rate_hz: f64,
}

impl Default for SineConfig {
    /// One cycle per second sampled at 128 Hz for 32 s.
    fn default() -> Self {
        SineConfig {
            freq_hz: 1.0,
            amplitude: 1.0,
            noise_sigma: 0.1,
            len: 4096,
            sample_rate_hz: 128.0,
        }
    }
}

impl SineConfig {
    fn validate(&self) -> Result<()> {
        if self.len == 0 {
            return Err(Error::param("len must be positive"));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::param("sample_rate_hz must be positive"));
        }
        if !(self.freq_hz.is_finite() && self.amplitude.is_finite()) {
            return Err(Error::param("freq_hz and amplitude must be finite"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::param("noise_sigma must be non-negative"));
        }
        Ok(())
    }

    /// Clean sample `A·sin(2πf·i/fs)`.
    pub fn clean(&self, i: usize) -> f64 {
        self.amplitude * libm::sin(2.0 * PI * self.freq_hz * i as f64 / self.sample_rate_hz)
    }

    /// Samples per period.
    pub fn period_samples(&self) -> f64 {
        self.sample_rate_hz / self.freq_hz
    }
}

fn noise(n: usize, sigma: f64, seed: u64, tag: &str) -> Vec<f64> {
    let mut rng = stream(seed, 0, tag);
    (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `A·sin(2πf·i/fs) + N(0, σ²)`.
pub fn sine_record(cfg: &SineConfig, seed: u64) -> Result<TimeSeries> {
    cfg.validate()?;
    let e = noise(cfg.len, cfg.noise_sigma, seed, "sine");
    let x = (0..cfg.len).map(|i| cfg.clean(i) + e[i]).collect();
    TimeSeries::new(x, cfg.sample_rate_hz)
}

/// [`sine_record`] with `[start, start + len)` replaced by `|clean sine|`
/// plus fresh noise, labeled as the change.
pub fn abs_sine_insert(cfg: &SineConfig, seed: u64, start: usize, len: usize) -> Result<LabeledRecord> {
    let base = sine_record(cfg, seed)?;
    if len == 0 || start + len > cfg.len {
        return Err(Error::param(alloc::format!(
            "insert {start}..{} does not fit a record of {}",
            start + len,
            cfg.len
        )));
    }
    let fresh = noise(len, cfg.noise_sigma, seed, "insert");
    let mut x = base.into_samples();
    for (k, slot) in x[start..start + len].iter_mut().enumerate() {
        *slot = cfg.clean(start + k).abs() + fresh[k];
    }
    LabeledRecord::new(
        TimeSeries::new(x, cfg.sample_rate_hz)?,
        alloc::vec![LabeledInterval::new(start, start + len, RECTIFIED_LABEL)],
    )
}

/// [`abs_sine_insert`] of `len` samples at a seeded start drawn uniformly
/// from the second half of the record.
pub fn random_abs_sine_insert(cfg: &SineConfig, seed: u64, len: usize) -> Result<LabeledRecord> {
    if len == 0 || len > cfg.len - cfg.len / 2 {
        return Err(Error::param(alloc::format!(
            "insert of {len} samples does not fit the second half of {}",
            cfg.len
        )));
    }
    let start = stream(seed, 0, "placement").random_range(cfg.len / 2..=cfg.len - len);
    abs_sine_insert(cfg, seed, start, len)
}
