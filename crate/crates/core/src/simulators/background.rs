//! Noise, multi-band interference and the injection record.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::modulation::{modulate, pulse_train, ModulationFormat, RfSimConfig};
use super::rng::stream;
use crate::timeseries::mean_square;
use crate::{Error, LabeledInterval, LabeledRecord, Result, TimeSeries};

/// Label of the injected interval.
pub const INJECTION_LABEL: &str = "injection";

/// Noise standard deviation `√(P / 10^(snr/10))` for signal power `P`.
pub fn awgn_sigma(signal: &TimeSeries, snr_db: f64) -> Result<f64> {
    sigma_for_power(signal.power(), snr_db)
}

fn sigma_for_power(power: f64, ratio_db: f64) -> Result<f64> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::param("reference signal has zero power"));
    }
    if !ratio_db.is_finite() {
        return Err(Error::param("power ratio must be finite"));
    }
    Ok(libm::sqrt(power / libm::pow(10.0, ratio_db / 10.0)))
}

/// Gaussian noise of length `len` rescaled so its RMS is exactly `sigma`.
pub fn scaled_noise(len: usize, sigma: f64, seed: u64, trial: u64, tag: &str) -> Vec<f64> {
    let mut rng = stream(seed, trial, tag);
    let mut n: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let g = sigma / libm::sqrt(mean_square(&n));
    n.iter_mut().for_each(|v| *v *= g);
    n
}

/// Frequency plan of the interference: `bands` bands of `per_band`
/// sub-channels packed into `[lo_hz, hi_hz]` with `band_gap_hz` between
/// bands; sub-channels sit at equal spacing inside each band.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InterferenceLayout {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub bands: usize,
    pub per_band: usize,
    pub band_gap_hz: f64,
    /// Symbol rate of every sub-channel (its approximate bandwidth).
    pub symbol_rate_hz: f64,
}

impl Default for InterferenceLayout {
    fn default() -> Self {
        InterferenceLayout {
            lo_hz: 80.0,
            hi_hz: 120.0,
            bands: 4,
            per_band: 5,
            band_gap_hz: 5.0,
            symbol_rate_hz: 1.0,
        }
    }
}

impl InterferenceLayout {
    pub fn band_width_hz(&self) -> f64 {
        (self.hi_hz - self.lo_hz - self.band_gap_hz * (self.bands as f64 - 1.0)) / self.bands as f64
    }

    pub fn spacing_hz(&self) -> f64 {
        self.band_width_hz() / self.per_band as f64
    }

    /// `[lo, hi]` of each band.
    pub fn band_edges(&self) -> Vec<(f64, f64)> {
        let w = self.band_width_hz();
        (0..self.bands)
            .map(|b| {
                let lo = self.lo_hz + b as f64 * (w + self.band_gap_hz);
                (lo, lo + w)
            })
            .collect()
    }

    /// Sub-channel center frequencies, band by band.
    pub fn centers(&self) -> Vec<f64> {
        let s = self.spacing_hz();
        self.band_edges()
            .into_iter()
            .flat_map(|(lo, _)| (0..self.per_band).map(move |m| lo + s * (m as f64 + 0.5)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands == 0 || self.per_band == 0 {
            return Err(Error::param("interference needs at least one band and sub-channel"));
        }
        if !(self.band_width_hz() > 0.0 && self.lo_hz >= 0.0 && self.band_gap_hz >= 0.0) {
            return Err(Error::param("interference bands do not fit between lo_hz and hi_hz"));
        }
        if !(self.symbol_rate_hz > 0.0) {
            return Err(Error::param("symbol_rate_hz must be positive"));
        }
        Ok(())
    }
}

/// Unscaled sum of all sub-channels over `len` samples: each is random-symbol
/// BPSK at `symbol_rate_hz`, raised-cosine shaped, on its center frequency
/// with a random carrier phase.
pub fn interference_sum(layout: &InterferenceLayout, cfg: &RfSimConfig, len: usize, seed: u64) -> Result<Vec<f64>> {
    layout.validate()?;
    cfg.validate()?;
    let sps = cfg.fs_hz / layout.symbol_rate_hz;
    let half = cfg.span_symbols as i64 / 2 + 1;
    let first = -half;
    let count = (libm::ceil(len as f64 / sps) as i64 + 2 * half) as usize;
    let mut total = alloc::vec![0.0; len];
    for (c, f) in layout.centers().into_iter().enumerate() {
        let mut rng = stream(seed, c as u64, "interference");
        let bits: Vec<f64> = (0..count)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let phase = 2.0 * PI * rng.random::<f64>();
        let env = pulse_train(&bits, sps, 0.0, cfg.rolloff, cfg.span_symbols, len, first);
        let w = 2.0 * PI * f / cfg.fs_hz;
        for (n, slot) in total.iter_mut().enumerate() {
            *slot += env[n] * libm::cos(w * n as f64 + phase);
        }
    }
    Ok(total)
}

/// Interference scaled to RMS `√(P_injection / 10^(sir/10))` over
/// `cfg.len()` samples.
pub fn interference_background(
    layout: &InterferenceLayout,
    cfg: &RfSimConfig,
    injection_power: f64,
    seed: u64,
) -> Result<TimeSeries> {
    let amp = sigma_for_power(injection_power, cfg.sir_db)?;
    let mut b = interference_sum(layout, cfg, cfg.len(), seed)?;
    let p = mean_square(&b);
    if !(p > 0.0) {
        return Err(Error::param("interference sum has zero power"));
    }
    let g = amp / libm::sqrt(p);
    b.iter_mut().for_each(|v| *v *= g);
    TimeSeries::new(b, cfg.fs_hz)
}

/// Interference plus noise with no injection; both are scaled against a
/// unit-power reference signal.
pub fn background_record(layout: &InterferenceLayout, cfg: &RfSimConfig, seed: u64) -> Result<TimeSeries> {
    let b = interference_background(layout, cfg, 1.0, seed)?;
    let sigma = sigma_for_power(1.0, cfg.snr_db)?;
    let noise = scaled_noise(cfg.len(), sigma, seed, 0, "noise");
    let x = b.samples().iter().zip(&noise).map(|(a, n)| a + n).collect();
    TimeSeries::new(x, cfg.fs_hz)
}

/// Components of one injection record, kept for power checks.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectionParts {
    pub record: LabeledRecord,
    /// Full-length modulated signal; only the labeled interval is added.
    pub injection: TimeSeries,
    pub interference: TimeSeries,
    pub noise: TimeSeries,
}

/// Interference + noise background with a modulated signal added over a
/// random interval of length `U[0.2t, 0.4t]` starting in the latter half.
pub fn make_injection_record(
    format: ModulationFormat,
    layout: &InterferenceLayout,
    cfg: &RfSimConfig,
    seed: u64,
) -> Result<LabeledRecord> {
    Ok(make_injection_parts(format, layout, cfg, seed)?.record)
}

/// [`make_injection_record`] returning every component.
pub fn make_injection_parts(
    format: ModulationFormat,
    layout: &InterferenceLayout,
    cfg: &RfSimConfig,
    seed: u64,
) -> Result<InjectionParts> {
    let t = cfg.len();
    let injection = modulate(format, cfg, seed)?;
    let p_inj = injection.power();
    let interference = interference_background(layout, cfg, p_inj, seed)?;
    let sigma = sigma_for_power(p_inj, cfg.snr_db)?;
    let noise = TimeSeries::new(scaled_noise(t, sigma, seed, 0, "noise"), cfg.fs_hz)?;

    let mut rng = stream(seed, 0, "placement");
    let min_len = libm::round(t as f64 * 0.2) as usize;
    let max_len = libm::round(t as f64 * 0.4) as usize;
    let len = rng.random_range(min_len.max(1)..=max_len.max(1));
    let first = t / 2;
    let start = if first + len <= t {
        rng.random_range(first..=t - len)
    } else {
        first
    };
    let end = (start + len).min(t);

    let mut x: Vec<f64> = interference
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(b, n)| b + n)
        .collect();
    for (slot, s) in x[start..end].iter_mut().zip(&injection.samples()[start..end]) {
        *slot += s;
    }
    let record = LabeledRecord::new(
        TimeSeries::new(x, cfg.fs_hz)?,
        alloc::vec![LabeledInterval::new(start, end, INJECTION_LABEL)],
    )?;
    Ok(InjectionParts {
        record,
        injection,
        interference,
        noise,
    })
}

/// Modulated signal plus noise at `cfg.snr_db` over the whole record.
pub fn noisy_signal(format: ModulationFormat, cfg: &RfSimConfig, seed: u64) -> Result<TimeSeries> {
    let s = modulate(format, cfg, seed)?;
    let sigma = awgn_sigma(&s, cfg.snr_db)?;
    let n = scaled_noise(s.len(), sigma, seed, 0, "noise");
    let x = s.samples().iter().zip(&n).map(|(a, b)| a + b).collect();
    TimeSeries::new(x, cfg.fs_hz)
}
