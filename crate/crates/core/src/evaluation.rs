//! Window-level F1 scoring and the experiment sweeps.

use alloc::string::String;
use alloc::vec::Vec;

use crate::detector::{detect, Representation, WindowConfig};
use crate::kdee::delta_ke;
use crate::simulators::background::{make_injection_record, noisy_signal, InterferenceLayout};
use crate::simulators::modulation::{ModulationFormat, RfSimConfig};
use crate::simulators::rng::derive_seed;
use crate::stats::mean_std;
use crate::{par, Error, LabeledInterval, Result};

/// Default fraction of a window that must overlap the truth.
pub const DEFAULT_MIN_OVERLAP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct F1Result {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl F1Result {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        F1Result {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
        }
    }

    /// Counts summed over several records, scored once.
    pub fn pooled(results: &[F1Result]) -> Self {
        let (tp, fp, fn_) = results
            .iter()
            .fold((0, 0, 0), |(a, b, c), r| (a + r.tp, b + r.fp, c + r.fn_));
        F1Result::from_counts(tp, fp, fn_)
    }
}

/// Denominator of the overlap fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum OverlapBasis {
    /// `|window ∩ truth| / window_len`
    #[default]
    Window,
    /// `|window ∩ truth| / truth_len`
    Truth,
}

/// Whether each window counts as a true change window.
pub fn positive_truth(
    windows: &[(usize, usize)],
    truth: &[LabeledInterval],
    min_overlap: f64,
    basis: OverlapBasis,
) -> Vec<bool> {
    windows
        .iter()
        .map(|&(start, len)| {
            truth.iter().any(|iv| {
                let overlap = iv.overlap(start, start + len) as f64;
                let denom = match basis {
                    OverlapBasis::Window => len,
                    OverlapBasis::Truth => iv.len(),
                } as f64;
                overlap > 0.0 && denom > 0.0 && overlap / denom >= min_overlap
            })
        })
        .collect()
}

/// Window-level F1 of `flagged` against windows overlapping `truth` by at
/// least `min_overlap`.
pub fn f1_overlap(
    windows: &[(usize, usize)],
    flagged: &[bool],
    truth: &[LabeledInterval],
    min_overlap: f64,
    basis: OverlapBasis,
) -> Result<F1Result> {
    if windows.len() != flagged.len() {
        return Err(Error::param(alloc::format!(
            "{} windows but {} flags",
            windows.len(),
            flagged.len()
        )));
    }
    let positive = positive_truth(windows, truth, min_overlap, basis);
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&f, &p) in flagged.iter().zip(&positive) {
        match (f, p) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(F1Result::from_counts(tp, fp, fn_))
}

/// Fraction of scored windows that are flagged.
pub fn flag_rate(report: &crate::DetectionReport) -> f64 {
    let scored = &report.flagged[report.first_scored..];
    if scored.is_empty() {
        0.0
    } else {
        scored.iter().filter(|&&f| f).count() as f64 / scored.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepPoint {
    pub axis: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    /// For detection sweeps: F1 of the counts pooled over all records.
    pub pooled: Option<F1Result>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SweepResult {
    /// Name of the swept quantity, e.g. `snr_db`.
    pub axis_name: String,
    /// What this curve is (`decimation=2`, `kl-kde`, ...).
    pub label: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn axis(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.axis).collect()
    }
}

/// Inclusive arithmetic grid `start, start + step, …` up to `stop`.
pub fn db_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = libm::floor((stop - start) / step + 1e-9) as usize + 1;
    (0..n).map(|i| start + step * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DeltaKeSweepConfig {
    pub formats: Vec<ModulationFormat>,
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub decimations: Vec<usize>,
    pub length: usize,
    pub tau_max: usize,
    pub seed: u64,
}

impl Default for DeltaKeSweepConfig {
    fn default() -> Self {
        DeltaKeSweepConfig {
            formats: ModulationFormat::ALL.to_vec(),
            snr_grid: db_grid(-10.0, 11.0, 3.0),
            trials: 10,
            decimations: alloc::vec![1, 2, 3, 4],
            length: 3000,
            tau_max: crate::kdee::DEFAULT_TAU_MAX,
            seed: 0,
        }
    }
}

/// `ΔKE` of noisy modulated signals against SNR, one curve per decimation.
///
/// Each signal is `length` samples of modulation plus noise, then decimated
/// by plain subsampling.
pub fn sweep_delta_ke(cfg: &DeltaKeSweepConfig) -> Result<Vec<SweepResult>> {
    if cfg.formats.is_empty() || cfg.snr_grid.is_empty() || cfg.trials == 0 || cfg.decimations.is_empty() {
        return Err(Error::param("sweep needs formats, grid points, trials and decimations"));
    }
    let base = RfSimConfig::default();
    let sps = base.samples_per_symbol;
    let rf = RfSimConfig {
        symbols: cfg.length.div_ceil(sps),
        ..base
    };
    let per_point = cfg.trials * cfg.formats.len();
    let jobs = cfg.snr_grid.len() * per_point;
    let values = par::map_indexed(jobs, |job| -> Result<Vec<f64>> {
        let (point, rest) = (job / per_point, job % per_point);
        let (trial, format) = (rest / cfg.formats.len(), cfg.formats[rest % cfg.formats.len()]);
        let seed = derive_seed(cfg.seed, (point * per_point + trial) as u64, format.name());
        let rf = RfSimConfig {
            snr_db: cfg.snr_grid[point],
            ..rf.clone()
        };
        let signal = noisy_signal(format, &rf, seed)?.slice(0..cfg.length)?;
        cfg.decimations
            .iter()
            .map(|&d| Ok(delta_ke(&signal.decimate(d)?, cfg.tau_max)?.0))
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(cfg
        .decimations
        .iter()
        .enumerate()
        .map(|(di, &d)| SweepResult {
            axis_name: String::from("snr_db"),
            label: alloc::format!("decimation={d}"),
            points: cfg
                .snr_grid
                .iter()
                .enumerate()
                .map(|(pi, &snr)| {
                    let v: Vec<f64> = values[pi * per_point..(pi + 1) * per_point]
                        .iter()
                        .map(|row| row[di])
                        .collect();
                    let (mean, std) = mean_std(&v).unwrap_or((0.0, 0.0));
                    SweepPoint {
                        axis: snr,
                        mean,
                        std,
                        trials: v.len(),
                        pooled: None,
                    }
                })
                .collect(),
        })
        .collect())
}

/// Detection method label used in reports.
pub fn method_name(r: Representation) -> &'static str {
    match r {
        Representation::Kde => "kl-kde",
        Representation::Psd => "kl-psd",
        Representation::DeltaKe => "delta-ke",
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DetectionSweepConfig {
    pub formats: Vec<ModulationFormat>,
    /// Common SNR = SIR values in dB.
    pub snr_sir_grid: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Representation>,
    /// Window settings shared by every method; the representation is
    /// overridden per method.
    pub window: WindowConfig,
    pub layout: InterferenceLayout,
    pub min_overlap: f64,
    pub basis: OverlapBasis,
    pub seed: u64,
}

impl Default for DetectionSweepConfig {
    fn default() -> Self {
        DetectionSweepConfig {
            formats: ModulationFormat::ALL.to_vec(),
            snr_sir_grid: db_grid(-10.0, 10.0, 2.0),
            trials: 10,
            methods: alloc::vec![Representation::Kde, Representation::Psd, Representation::DeltaKe],
            window: WindowConfig::default(),
            layout: InterferenceLayout::default(),
            min_overlap: DEFAULT_MIN_OVERLAP,
            basis: OverlapBasis::Window,
            seed: 0,
        }
    }
}

/// Per-record F1 of every method on injection records at each SNR = SIR
/// level; one curve per method with all formats and trials pooled.
pub fn sweep_detection(cfg: &DetectionSweepConfig) -> Result<Vec<SweepResult>> {
    if cfg.formats.is_empty() || cfg.snr_sir_grid.is_empty() || cfg.trials == 0 || cfg.methods.is_empty() {
        return Err(Error::param("sweep needs formats, grid points, trials and methods"));
    }
    let per_point = cfg.trials * cfg.formats.len();
    let jobs = cfg.snr_sir_grid.len() * per_point;
    let scores = par::map_indexed(jobs, |job| -> Result<Vec<F1Result>> {
        let (point, rest) = (job / per_point, job % per_point);
        let (trial, format) = (rest / cfg.formats.len(), cfg.formats[rest % cfg.formats.len()]);
        let seed = derive_seed(cfg.seed, (point * per_point + trial) as u64, format.name());
        let level = cfg.snr_sir_grid[point];
        let rf = RfSimConfig {
            snr_db: level,
            sir_db: level,
            ..RfSimConfig::default()
        };
        let record = make_injection_record(format, &cfg.layout, &rf, seed)?;
        cfg.methods
            .iter()
            .map(|&m| {
                let wc = WindowConfig {
                    representation: m,
                    ..cfg.window.clone()
                };
                let report = detect(record.series(), &wc)?;
                f1_overlap(
                    &report.windows(),
                    &report.flagged,
                    record.truth(),
                    cfg.min_overlap,
                    cfg.basis,
                )
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(cfg
        .methods
        .iter()
        .enumerate()
        .map(|(mi, &m)| SweepResult {
            axis_name: String::from("snr_sir_db"),
            label: String::from(method_name(m)),
            points: cfg
                .snr_sir_grid
                .iter()
                .enumerate()
                .map(|(pi, &level)| {
                    let rs: Vec<F1Result> = scores[pi * per_point..(pi + 1) * per_point]
                        .iter()
                        .map(|row| row[mi])
                        .collect();
                    let f1s: Vec<f64> = rs.iter().map(|r| r.f1).collect();
                    let (mean, std) = mean_std(&f1s).unwrap_or((0.0, 0.0));
                    SweepPoint {
                        axis: level,
                        mean,
                        std,
                        trials: rs.len(),
                        pooled: Some(F1Result::pooled(&rs)),
                    }
                })
                .collect(),
        })
        .collect())
}
