//! Sliding-baseline change detection.
//!
//! A series is cut into overlapping windows. For every window past the
//! first `W`, its representation (delay-embedding KDE or periodogram) is
//! compared with the cellwise median of the `W` preceding windows through
//! the symmetrized, regularized KL divergence. The resulting statistics are
//! turned into modified z-scores `0.6745·(x − median)/MAD` and windows above
//! the threshold are flagged; consecutive flagged windows merge into
//! detected intervals.
//!
//! The `ΔKE` variant skips the baseline and scores each window by its own
//! entropy range across delays.

use alloc::string::String;
use alloc::vec::Vec;

use crate::density::{median_grid, shared_grid, DensityGrid, GaussianKde, DEFAULT_GRID_CELLS};
use crate::embedding::takens_embed;
use crate::infotheory::{symmetrized_kl_masses, symmetrized_kl_regularized_with};
use crate::kdee::delta_ke;
use crate::spectrum::Periodogram;
use crate::stats::{mad, median, median_in_place};
use crate::timeseries::LabeledInterval;
use crate::{par, Error, Result, TimeSeries};

/// Consistency constant of the modified z-score.
pub const MAD_SCALE: f64 = 0.6745;

/// Label carried by detected intervals.
pub const DETECTED_LABEL: &str = "detected";

/// Default embedding delay: a quarter period of a 100 Hz carrier at 5 kHz.
pub const DEFAULT_DETECTOR_TAU: usize = 13;

/// Minimum trailing history in streaming mode.
pub const MIN_STREAMING_HISTORY: usize = 50;

/// What each window is turned into before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Representation {
    /// KDE of the delay embedding, compared with KL to a median baseline.
    Kde,
    /// Normalized periodogram, compared with KL to a median baseline.
    Psd,
    /// Per-window entropy range across delays; no baseline.
    DeltaKe,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Kde => "kde",
            Representation::Psd => "psd",
            Representation::DeltaKe => "delta-ke",
        }
    }

    /// Default flagging rule: divergences only grow under change, the
    /// entropy range can move either way.
    pub fn default_sidedness(self) -> Sidedness {
        match self {
            Representation::Kde | Representation::Psd => Sidedness::Upper,
            Representation::DeltaKe => Sidedness::Both,
        }
    }
}

impl core::str::FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kde" => Ok(Representation::Kde),
            "psd" => Ok(Representation::Psd),
            "delta-ke" | "delta_ke" | "deltake" => Ok(Representation::DeltaKe),
            other => Err(Error::param(alloc::format!(
                "unknown representation {other:?} (expected kde, psd or delta-ke)"
            ))),
        }
    }
}

/// Which tail of the z-score distribution is flagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Sidedness {
    /// `Z > threshold`
    Upper,
    /// `|Z| > threshold`
    Both,
}

impl Sidedness {
    pub fn flags(self, z: f64, threshold: f64) -> bool {
        match self {
            Sidedness::Upper => z > threshold,
            Sidedness::Both => z.abs() > threshold,
        }
    }
}

/// How z-scores are referenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ZScoreMode {
    /// Median and MAD over every scored window of the record.
    Batch,
    /// Median and MAD over the trailing `history` statistics; windows with
    /// less history than that are not scored.
    Streaming { history: usize },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WindowConfig {
    pub window_len: usize,
    pub stride: usize,
    /// Number of preceding windows `W` in the median baseline.
    pub baseline_count: usize,
    pub z_threshold: f64,
    pub representation: Representation,
    /// Delay used by the KDE representation (also its delay bound).
    pub tau: usize,
    /// Delay bound of the per-window `ΔKE` sweep. A quarter carrier period
    /// already spans the full entropy range of a near-sinusoid, so the
    /// default matches `tau`.
    pub tau_max: usize,
    /// Cells per axis of the shared comparison grid.
    pub grid_cells: usize,
    pub z_mode: ZScoreMode,
    /// `None` uses the representation's default.
    pub sidedness: Option<Sidedness>,
    /// Renormalize the floored densities before taking the divergence.
    pub renormalize_regularized: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            window_len: 256,
            stride: 128,
            baseline_count: 10,
            z_threshold: 3.5,
            representation: Representation::Kde,
            tau: DEFAULT_DETECTOR_TAU,
            tau_max: DEFAULT_DETECTOR_TAU,
            grid_cells: DEFAULT_GRID_CELLS,
            z_mode: ZScoreMode::Batch,
            sidedness: None,
            renormalize_regularized: true,
        }
    }
}

impl WindowConfig {
    pub fn with_representation(representation: Representation) -> Self {
        WindowConfig {
            representation,
            ..WindowConfig::default()
        }
    }

    pub fn sidedness(&self) -> Sidedness {
        self.sidedness
            .unwrap_or_else(|| self.representation.default_sidedness())
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 || self.stride > self.window_len {
            return Err(Error::param(alloc::format!(
                "stride must satisfy 0 < stride <= window_len (stride = {}, window_len = {})",
                self.stride,
                self.window_len
            )));
        }
        if self.baseline_count < 3 {
            return Err(Error::param("baseline_count must be at least 3"));
        }
        if !(self.z_threshold.is_finite() && self.z_threshold > 0.0) {
            return Err(Error::param("z_threshold must be positive"));
        }
        if self.grid_cells < 2 {
            return Err(Error::param("grid_cells must be at least 2"));
        }
        if let ZScoreMode::Streaming { history } = self.z_mode {
            if history < MIN_STREAMING_HISTORY {
                return Err(Error::param(alloc::format!(
                    "streaming history must be at least {MIN_STREAMING_HISTORY}"
                )));
            }
        }
        let lag = match self.representation {
            Representation::Kde => self.tau,
            Representation::DeltaKe => self.tau_max,
            Representation::Psd => 0,
        };
        if self.representation != Representation::Psd && (lag == 0 || lag + 3 > self.window_len) {
            return Err(Error::param(alloc::format!(
                "delay {lag} leaves fewer than 3 embedded points in a window of {}",
                self.window_len
            )));
        }
        if self.window_len < 2 {
            return Err(Error::param("window_len must be at least 2"));
        }
        Ok(())
    }
}

/// Per-window statistics, scores and flags of one detector run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DetectionReport {
    pub representation: Representation,
    pub window_len: usize,
    pub window_starts: Vec<usize>,
    /// Bits (KL divergence or `ΔKE`); 0 for unscored windows.
    pub statistic: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub flagged: Vec<bool>,
    pub intervals: Vec<LabeledInterval>,
    /// Index of the first window that carries a statistic.
    pub first_scored: usize,
    /// The MAD of the scored statistics was zero, so every z-score is zero.
    pub degenerate_scale: bool,
}

impl DetectionReport {
    /// `(start, len)` of every window.
    pub fn windows(&self) -> Vec<(usize, usize)> {
        self.window_starts.iter().map(|&s| (s, self.window_len)).collect()
    }

    /// Flags recomputed from the stored z-scores under another rule.
    pub fn reflag(&self, threshold: f64, sidedness: Sidedness) -> Vec<bool> {
        self.z_scores
            .iter()
            .enumerate()
            .map(|(i, &z)| i >= self.first_scored && sidedness.flags(z, threshold))
            .collect()
    }
}

/// Window start indices `0, stride, 2·stride, …`; a trailing partial window
/// is dropped.
pub fn segment(series_len: usize, window_len: usize, stride: usize) -> Result<Vec<usize>> {
    if window_len == 0 || stride == 0 {
        return Err(Error::param("window_len and stride must be positive"));
    }
    if series_len < window_len {
        return Err(Error::short(alloc::format!(
            "series of length {series_len} is shorter than one window ({window_len})"
        )));
    }
    Ok((0..=(series_len - window_len) / stride).map(|i| i * stride).collect())
}

/// Modified z-scores `0.6745·(x − median)/MAD`; all zero when MAD is zero.
pub fn modified_z_scores(values: &[f64]) -> Result<Vec<f64>> {
    Ok(z_scores_checked(values)?.0)
}

fn z_scores_checked(values: &[f64]) -> Result<(Vec<f64>, bool)> {
    if values.len() < 3 {
        return Err(Error::param(alloc::format!(
            "modified z-scores need at least 3 values, got {}",
            values.len()
        )));
    }
    let med = median(values).unwrap_or(0.0);
    let scale = mad(values, med).unwrap_or(0.0);
    if !(scale > 0.0) {
        return Ok((alloc::vec![0.0; values.len()], true));
    }
    Ok((values.iter().map(|x| MAD_SCALE * (x - med) / scale).collect(), false))
}

/// Z-scores of each value against the `history` values before it.
fn streaming_z_scores(values: &[f64], history: usize) -> (Vec<f64>, bool) {
    let mut degenerate = false;
    let mut buf = Vec::with_capacity(history);
    let z = (0..values.len())
        .map(|i| {
            if i < history {
                return 0.0;
            }
            buf.clear();
            buf.extend_from_slice(&values[i - history..i]);
            let med = median_in_place(&mut buf);
            buf.iter_mut().for_each(|v| *v = (*v - med).abs());
            let scale = median_in_place(&mut buf);
            if scale > 0.0 {
                MAD_SCALE * (values[i] - med) / scale
            } else {
                degenerate = true;
                0.0
            }
        })
        .collect();
    (z, degenerate)
}

/// Maximal runs of flagged windows as `[first start, last start + window_len)`.
pub fn merge_flags(flags: &[bool], starts: &[usize], window_len: usize) -> Vec<LabeledInterval> {
    debug_assert_eq!(flags.len(), starts.len());
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < flags.len() && flags[j + 1] {
            j += 1;
        }
        out.push(LabeledInterval::new(
            starts[i],
            starts[j] + window_len,
            String::from(DETECTED_LABEL),
        ));
        i = j + 1;
    }
    out
}

/// Inverse of [`merge_flags`]: a window is flagged iff it lies inside one of
/// the intervals.
pub fn flags_from_intervals(intervals: &[LabeledInterval], starts: &[usize], window_len: usize) -> Vec<bool> {
    starts
        .iter()
        .map(|&s| intervals.iter().any(|iv| iv.start <= s && s + window_len <= iv.end))
        .collect()
}

/// Runs the detector selected by `cfg.representation`.
pub fn detect(series: &TimeSeries, cfg: &WindowConfig) -> Result<DetectionReport> {
    match cfg.representation {
        Representation::Kde => detect_sliding_baseline(series, cfg),
        Representation::Psd => detect_psd_baseline(series, cfg),
        Representation::DeltaKe => detect_delta_ke(series, cfg),
    }
}

fn prepare(series: &TimeSeries, cfg: &WindowConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let starts = segment(series.len(), cfg.window_len, cfg.stride)?;
    if starts.len() < cfg.baseline_count + 1 {
        return Err(Error::short(alloc::format!(
            "{} windows is fewer than the baseline count + 1 ({})",
            starts.len(),
            cfg.baseline_count + 1
        )));
    }
    Ok(starts)
}

/// KDE-of-embedding representation against a sliding median baseline.
pub fn detect_sliding_baseline(series: &TimeSeries, cfg: &WindowConfig) -> Result<DetectionReport> {
    let starts = prepare(series, cfg)?;
    let w = cfg.baseline_count;
    let kdes = par::map_indexed(starts.len(), |i| {
        let win = series.slice(starts[i]..starts[i] + cfg.window_len)?;
        GaussianKde::new(&takens_embed(&win, cfg.tau, cfg.tau)?)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let scored = par::map_indexed(starts.len() - w, |i| {
        let k = i + w;
        let group: Vec<&GaussianKde> = kdes[k - w..=k].iter().collect();
        let spec = shared_grid(&group, cfg.grid_cells, cfg.grid_cells)?;
        let grids = group
            .iter()
            .map(|kde| kde.evaluate(&spec))
            .collect::<Result<Vec<DensityGrid>>>()?;
        let refs: Vec<&DensityGrid> = grids[..w].iter().collect();
        // a baseline whose windows share no support has a zero median
        let baseline = median_grid(&refs).unwrap_or_else(|_| DensityGrid::uniform(spec));
        Ok(symmetrized_kl_regularized_with(&baseline, &grids[w], cfg.renormalize_regularized)?.0)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    finish(cfg, starts, w, scored)
}

/// Normalized periodogram representation against a sliding median baseline.
pub fn detect_psd_baseline(series: &TimeSeries, cfg: &WindowConfig) -> Result<DetectionReport> {
    let starts = prepare(series, cfg)?;
    let w = cfg.baseline_count;
    let pg = Periodogram::new(cfg.window_len);
    let x = series.samples();
    let spectra: Vec<Vec<f64>> = par::map_indexed(starts.len(), |i| {
        pg.distribution(&x[starts[i]..starts[i] + cfg.window_len])
    });
    let bins = spectra[0].len();
    let scored = par::map_indexed(starts.len() - w, |i| {
        let k = i + w;
        let mut column = alloc::vec![0.0; w];
        let mut baseline: Vec<f64> = (0..bins)
            .map(|b| {
                for (slot, s) in column.iter_mut().zip(&spectra[k - w..k]) {
                    *slot = s[b];
                }
                median_in_place(&mut column)
            })
            .collect();
        let total: f64 = baseline.iter().sum();
        if total > 0.0 {
            baseline.iter_mut().for_each(|v| *v /= total);
        } else {
            baseline.iter_mut().for_each(|v| *v = 1.0 / bins as f64);
        }
        symmetrized_kl_masses(&baseline, &spectra[k], cfg.renormalize_regularized)
    });
    finish(cfg, starts, w, scored)
}

/// Per-window `ΔKE`; every window is scored since no baseline is needed.
pub fn detect_delta_ke(series: &TimeSeries, cfg: &WindowConfig) -> Result<DetectionReport> {
    let starts = prepare(series, cfg)?;
    let scored = par::map_indexed(starts.len(), |i| {
        let win = series.slice(starts[i]..starts[i] + cfg.window_len)?;
        Ok(delta_ke(&win, cfg.tau_max)?.0)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    finish(cfg, starts, 0, scored)
}

fn finish(cfg: &WindowConfig, starts: Vec<usize>, first_scored: usize, scored: Vec<f64>) -> Result<DetectionReport> {
    let (z_tail, degenerate_scale) = match cfg.z_mode {
        ZScoreMode::Batch => z_scores_checked(&scored)?,
        ZScoreMode::Streaming { history } => streaming_z_scores(&scored, history),
    };
    let mut statistic = alloc::vec![0.0; first_scored];
    statistic.extend_from_slice(&scored);
    let mut z_scores = alloc::vec![0.0; first_scored];
    z_scores.extend_from_slice(&z_tail);
    let sidedness = cfg.sidedness();
    let flagged: Vec<bool> = z_scores
        .iter()
        .enumerate()
        .map(|(i, &z)| i >= first_scored && sidedness.flags(z, cfg.z_threshold))
        .collect();
    let intervals = merge_flags(&flagged, &starts, cfg.window_len);
    Ok(DetectionReport {
        representation: cfg.representation,
        window_len: cfg.window_len,
        window_starts: starts,
        statistic,
        z_scores,
        flagged,
        intervals,
        first_scored,
        degenerate_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn segment_counts() {
        let s = segment(1000, 256, 128).unwrap();
        assert_eq!(s, [0, 128, 256, 384, 512, 640]);
        assert_eq!(segment(1024, 256, 256).unwrap(), [0, 256, 512, 768]);
        assert_eq!(segment(256, 256, 128).unwrap(), [0]);
        assert!(matches!(segment(255, 256, 128), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn z_score_hand_example() {
        let z = modified_z_scores(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert!((z[4] - 65.4265).abs() < 1e-12);
        assert_eq!(z[2], 0.0);
        assert!(modified_z_scores(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn constant_statistics_have_zero_scores() {
        let (z, degenerate) = z_scores_checked(&[4.0; 7]).unwrap();
        assert!(degenerate);
        assert!(z.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn merge_examples() {
        let starts = [0, 128, 256, 384];
        let iv = merge_flags(&[false, true, true, false], &starts, 256);
        assert_eq!(iv, vec![LabeledInterval::new(128, 512, DETECTED_LABEL)]);
        assert!(merge_flags(&[false; 4], &starts, 256).is_empty());
        let all = merge_flags(&[true; 4], &starts, 256);
        assert_eq!(all, vec![LabeledInterval::new(0, 640, DETECTED_LABEL)]);
    }

    #[test]
    fn flags_round_trip_through_intervals() {
        let starts = [0, 128, 256, 384, 512];
        let flags = [true, false, true, true, false];
        let iv = merge_flags(&flags, &starts, 256);
        assert_eq!(flags_from_intervals(&iv, &starts, 256), flags);
    }

    #[test]
    fn config_validation() {
        let ok = WindowConfig::default();
        assert!(ok.validate().is_ok());
        let bad_stride = WindowConfig {
            stride: 300,
            ..ok.clone()
        };
        assert!(bad_stride.validate().is_err());
        let bad_w = WindowConfig {
            baseline_count: 2,
            ..ok.clone()
        };
        assert!(bad_w.validate().is_err());
        let bad_hist = WindowConfig {
            z_mode: ZScoreMode::Streaming { history: 10 },
            ..ok.clone()
        };
        assert!(bad_hist.validate().is_err());
        let bad_z = WindowConfig { z_threshold: 0.0, ..ok };
        assert!(bad_z.validate().is_err());
    }

    #[test]
    fn too_few_windows() {
        let s = TimeSeries::new(vec![0.0; 256 + 128 * 9], 1.0).unwrap();
        assert!(matches!(
            detect_sliding_baseline(&s, &WindowConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn streaming_waits_for_history() {
        let values: Vec<f64> = (0..60).map(|i| (i % 7) as f64).chain([50.0]).collect();
        let (z, _) = streaming_z_scores(&values, 50);
        assert!(z[..50].iter().all(|v| *v == 0.0));
        assert!(z[60] > 3.5);
    }

    #[test]
    fn representation_parsing() {
        assert_eq!("psd".parse::<Representation>().unwrap(), Representation::Psd);
        assert_eq!("delta-ke".parse::<Representation>().unwrap(), Representation::DeltaKe);
        assert!("ae".parse::<Representation>().is_err());
    }
}
