//! Wall-clock timing of full-record analyses.

use std::time::Instant;

use kdee_core::detector::detect;
use kdee_core::{TimeSeries, WindowConfig};
use serde::Serialize;

use crate::Result;

/// Fewest timed repeats accepted.
pub const MIN_REPEATS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub mean_s: f64,
    /// Sample standard deviation of the repeats.
    pub std_s: f64,
    pub repeats: Vec<f64>,
}

/// Times `run` once untimed, then `repeats` times.
pub fn time_fn<T>(repeats: usize, mut run: impl FnMut() -> Result<T>) -> Result<Timing> {
    if repeats < MIN_REPEATS {
        return Err(kdee_core::Error::Parameter(format!("need at least {MIN_REPEATS} repeats")).into());
    }
    run()?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let t0 = Instant::now();
        std::hint::black_box(run()?);
        times.push(t0.elapsed().as_secs_f64());
    }
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Timing {
        mean_s: mean,
        std_s: var.sqrt(),
        repeats: times,
    })
}

/// Time of one full sliding-window analysis of `series` under `cfg`.
pub fn time_method(cfg: &WindowConfig, series: &TimeSeries, repeats: usize) -> Result<Timing> {
    cfg.validate()?;
    time_fn(repeats, || Ok(detect(series, cfg)?))
}
