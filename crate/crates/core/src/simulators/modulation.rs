//! Digital modulation on a real passband carrier.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use rand::Rng;

use super::rng::stream;
use crate::timeseries::mean_square;
use crate::{Error, Result, TimeSeries};

/// A complex baseband symbol `[re, im]`.
pub type Symbol = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModulationFormat {
    Bpsk,
    Qpsk,
    Oqpsk,
    Pi4Qpsk,
    Psk8,
    Psk16,
    Ook,
    Ask4,
    Ask8,
    Qam16,
    Qam64,
    Qam32,
    Apsk16,
    Apsk32,
}

impl ModulationFormat {
    pub const ALL: [ModulationFormat; 14] = [
        ModulationFormat::Bpsk,
        ModulationFormat::Qpsk,
        ModulationFormat::Oqpsk,
        ModulationFormat::Pi4Qpsk,
        ModulationFormat::Psk8,
        ModulationFormat::Psk16,
        ModulationFormat::Ook,
        ModulationFormat::Ask4,
        ModulationFormat::Ask8,
        ModulationFormat::Qam16,
        ModulationFormat::Qam64,
        ModulationFormat::Qam32,
        ModulationFormat::Apsk16,
        ModulationFormat::Apsk32,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModulationFormat::Bpsk => "BPSK",
            ModulationFormat::Qpsk => "QPSK",
            ModulationFormat::Oqpsk => "OQPSK",
            ModulationFormat::Pi4Qpsk => "Pi4QPSK",
            ModulationFormat::Psk8 => "8PSK",
            ModulationFormat::Psk16 => "16PSK",
            ModulationFormat::Ook => "OOK",
            ModulationFormat::Ask4 => "4ASK",
            ModulationFormat::Ask8 => "8ASK",
            ModulationFormat::Qam16 => "16QAM",
            ModulationFormat::Qam64 => "64QAM",
            ModulationFormat::Qam32 => "32QAM",
            ModulationFormat::Apsk16 => "16APSK",
            ModulationFormat::Apsk32 => "32APSK",
        }
    }

    /// Constellation points scaled to unit mean power.
    pub fn constellation(self) -> Vec<Symbol> {
        let raw = match self {
            ModulationFormat::Bpsk => alloc::vec![[1.0, 0.0], [-1.0, 0.0]],
            ModulationFormat::Qpsk | ModulationFormat::Oqpsk | ModulationFormat::Pi4Qpsk => ring(4, 1.0, FRAC_PI_4),
            ModulationFormat::Psk8 => ring(8, 1.0, 0.0),
            ModulationFormat::Psk16 => ring(16, 1.0, 0.0),
            ModulationFormat::Ook => alloc::vec![[0.0, 0.0], [1.0, 0.0]],
            ModulationFormat::Ask4 => pam(4).into_iter().map(|a| [a, 0.0]).collect(),
            ModulationFormat::Ask8 => pam(8).into_iter().map(|a| [a, 0.0]).collect(),
            ModulationFormat::Qam16 => square_qam(4),
            ModulationFormat::Qam64 => square_qam(8),
            ModulationFormat::Qam32 => {
                // 6×6 grid without its four corners
                let mut pts = square_qam(6);
                pts.retain(|p| !(p[0].abs() == 5.0 && p[1].abs() == 5.0));
                pts
            }
            ModulationFormat::Apsk16 => {
                let mut pts = ring(4, 1.0, FRAC_PI_4);
                pts.extend(ring(12, 2.6, PI / 12.0));
                pts
            }
            ModulationFormat::Apsk32 => {
                let mut pts = ring(4, 1.0, FRAC_PI_4);
                pts.extend(ring(12, 2.53, PI / 12.0));
                pts.extend(ring(16, 4.3, 0.0));
                pts
            }
        };
        unit_power(raw)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for ModulationFormat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl core::fmt::Display for ModulationFormat {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for ModulationFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModulationFormat::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(alloc::format!("unknown modulation format {s:?}")))
    }
}

fn ring(m: usize, radius: f64, phase: f64) -> Vec<Symbol> {
    (0..m)
        .map(|k| {
            let a = phase + 2.0 * PI * k as f64 / m as f64;
            [radius * libm::cos(a), radius * libm::sin(a)]
        })
        .collect()
}

fn pam(m: usize) -> Vec<f64> {
    (0..m).map(|k| (2 * k) as f64 - (m - 1) as f64).collect()
}

fn square_qam(side: usize) -> Vec<Symbol> {
    let levels = pam(side);
    let mut out = Vec::with_capacity(side * side);
    for &i in &levels {
        for &q in &levels {
            out.push([i, q]);
        }
    }
    out
}

fn unit_power(mut pts: Vec<Symbol>) -> Vec<Symbol> {
    let p = pts.iter().map(|s| s[0] * s[0] + s[1] * s[1]).sum::<f64>() / pts.len() as f64;
    let g = 1.0 / libm::sqrt(p);
    pts.iter_mut().for_each(|s| {
        s[0] *= g;
        s[1] *= g;
    });
    pts
}

/// Signal geometry shared by the injected signal and its background.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RfSimConfig {
    pub fs_hz: f64,
    pub symbols: usize,
    pub samples_per_symbol: usize,
    pub carrier_hz: f64,
    pub rolloff: f64,
    /// Pulse length in symbols (centered, truncated).
    pub span_symbols: usize,
    pub snr_db: f64,
    pub sir_db: f64,
}

impl Default for RfSimConfig {
    fn default() -> Self {
        RfSimConfig {
            fs_hz: 5000.0,
            symbols: 100,
            samples_per_symbol: 50,
            carrier_hz: 100.0,
            rolloff: 0.25,
            span_symbols: 8,
            snr_db: 10.0,
            sir_db: 10.0,
        }
    }
}

impl RfSimConfig {
    pub fn len(&self) -> usize {
        self.symbols * self.samples_per_symbol
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::param("fs_hz must be positive"));
        }
        if self.symbols == 0 || self.samples_per_symbol == 0 {
            return Err(Error::param("symbols and samples_per_symbol must be positive"));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz >= 0.0 && self.carrier_hz < self.fs_hz / 2.0) {
            return Err(Error::param("carrier_hz must lie in [0, fs/2)"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::param("rolloff must lie in [0, 1]"));
        }
        if self.span_symbols == 0 {
            return Err(Error::param("span_symbols must be positive"));
        }
        if !(self.snr_db.is_finite() && self.sir_db.is_finite()) {
            return Err(Error::param("snr_db and sir_db must be finite"));
        }
        Ok(())
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        libm::sin(PI * x) / (PI * x)
    }
}

/// Raised-cosine impulse response at `t` symbol periods from its center.
pub fn raised_cosine(t: f64, rolloff: f64) -> f64 {
    let d = 2.0 * rolloff * t;
    if rolloff > 0.0 && (1.0 - d * d).abs() < 1e-10 {
        FRAC_PI_4 * sinc(1.0 / (2.0 * rolloff))
    } else {
        sinc(t) * libm::cos(PI * rolloff * t) / (1.0 - d * d)
    }
}

/// Raised-cosine pulse train `Σ a_k·p(n/sps − k − offset)` over `len`
/// samples; the pulse is truncated to `span` symbols.
pub(crate) fn pulse_train(
    amplitudes: &[f64],
    sps: f64,
    offset: f64,
    rolloff: f64,
    span: usize,
    len: usize,
    first_symbol: i64,
) -> Vec<f64> {
    let half = span as f64 / 2.0;
    let mut out = alloc::vec![0.0; len];
    for (i, &a) in amplitudes.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let center = (first_symbol + i as i64) as f64 + offset;
        let lo = libm::ceil((center - half) * sps).max(0.0) as usize;
        let hi = (libm::floor((center + half) * sps) + 1.0).clamp(0.0, len as f64) as usize;
        for (n, slot) in out.iter_mut().enumerate().take(hi).skip(lo) {
            *slot += a * raised_cosine(n as f64 / sps - center, rolloff);
        }
    }
    out
}

/// Pulse-shapes `symbols` and mixes them onto the carrier:
/// `I(t)·cos(2πf t) − Q(t)·sin(2πf t)`, rescaled to unit RMS.
pub fn modulate_symbols(format: ModulationFormat, symbols: &[Symbol], cfg: &RfSimConfig) -> Result<TimeSeries> {
    cfg.validate()?;
    if symbols.len() != cfg.symbols {
        return Err(Error::param(alloc::format!(
            "expected {} symbols, got {}",
            cfg.symbols,
            symbols.len()
        )));
    }
    let len = cfg.len();
    let sps = cfg.samples_per_symbol as f64;
    let rotated: Vec<Symbol> = match format {
        ModulationFormat::Pi4Qpsk => symbols
            .iter()
            .enumerate()
            .map(|(k, s)| {
                if k % 2 == 1 {
                    let (c, sn) = (libm::cos(FRAC_PI_4), libm::sin(FRAC_PI_4));
                    [s[0] * c - s[1] * sn, s[0] * sn + s[1] * c]
                } else {
                    *s
                }
            })
            .collect(),
        _ => symbols.to_vec(),
    };
    let re: Vec<f64> = rotated.iter().map(|s| s[0]).collect();
    let im: Vec<f64> = rotated.iter().map(|s| s[1]).collect();
    let q_offset = if format == ModulationFormat::Oqpsk { 0.5 } else { 0.0 };
    let i_arm = pulse_train(&re, sps, 0.0, cfg.rolloff, cfg.span_symbols, len, 0);
    let q_arm = pulse_train(&im, sps, q_offset, cfg.rolloff, cfg.span_symbols, len, 0);
    let w = 2.0 * PI * cfg.carrier_hz / cfg.fs_hz;
    let mut x: Vec<f64> = (0..len)
        .map(|n| {
            let ph = w * n as f64;
            i_arm[n] * libm::cos(ph) - q_arm[n] * libm::sin(ph)
        })
        .collect();
    let p = mean_square(&x);
    if !(p > 0.0) {
        return Err(Error::param("modulated signal has zero power"));
    }
    let g = 1.0 / libm::sqrt(p);
    x.iter_mut().for_each(|v| *v *= g);
    TimeSeries::new(x, cfg.fs_hz)
}

/// Random-symbol modulated signal of `cfg.symbols` symbols at unit RMS.
pub fn modulate(format: ModulationFormat, cfg: &RfSimConfig, seed: u64) -> Result<TimeSeries> {
    let points = format.constellation();
    let mut rng = stream(seed, 0, format.name());
    let symbols: Vec<Symbol> = (0..cfg.symbols)
        .map(|_| points[rng.random_range(0..points.len())])
        .collect();
    modulate_symbols(format, &symbols, cfg)
}
