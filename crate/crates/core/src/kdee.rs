//! Kernel-density-estimate entropy across delay scales.

use alloc::vec::Vec;

use crate::density::estimate_kde;
use crate::embedding::takens_embed;
use crate::infotheory::{entropy, Bits};
use crate::{par, Error, Result, TimeSeries};

/// Default delay bound: one symbol period at 50 samples per symbol.
pub const DEFAULT_TAU_MAX: usize = 50;

/// Entropy of the KDE of the `tau`-delay embedding (bound `n_max`).
pub fn ke_tau(series: &TimeSeries, tau: usize, n_max: usize) -> Result<Bits> {
    let cloud = takens_embed(series, tau, n_max)?;
    Ok(entropy(&estimate_kde(&cloud, None)?))
}

/// Entropies for `τ = 1..=tau_max` and their range.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KdeeProfile {
    pub taus: Vec<usize>,
    pub ke_values: Vec<Bits>,
    pub delta_ke: Bits,
}

impl KdeeProfile {
    /// Lag at which the entropy peaks.
    pub fn argmax_tau(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.ke_values.iter().enumerate() {
            if v.0 > self.ke_values[best].0 {
                best = i;
            }
        }
        self.taus[best]
    }
}

/// Sweeps `τ = 1..=tau_max` with the delay bound fixed at `tau_max`, so every
/// cloud has `t − tau_max` points, and records `ΔKE = max KE − min KE`.
pub fn kdee_profile(series: &TimeSeries, tau_max: usize) -> Result<KdeeProfile> {
    if tau_max == 0 {
        return Err(Error::param("tau_max must be positive"));
    }
    // the KDE needs 3 points on top of the delay bound
    if series.len() < tau_max + 3 {
        return Err(Error::short(alloc::format!(
            "series of length {} is too short for tau_max = {tau_max}",
            series.len()
        )));
    }
    let values = par::map_indexed(tau_max, |i| ke_tau(series, i + 1, tau_max))
        .into_iter()
        .collect::<Result<Vec<Bits>>>()?;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
        (lo.min(b.0), hi.max(b.0))
    });
    Ok(KdeeProfile {
        taus: (1..=tau_max).collect(),
        ke_values: values,
        delta_ke: Bits(hi - lo),
    })
}

/// `ΔKE` alone.
pub fn delta_ke(series: &TimeSeries, tau_max: usize) -> Result<Bits> {
    Ok(kdee_profile(series, tau_max)?.delta_ke)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_series_is_finite() {
        let s = TimeSeries::new(vec![0.25; 64], 1.0).unwrap();
        let ke = ke_tau(&s, 2, 4).unwrap();
        assert!(ke.0.is_finite());
        assert!(ke.0 < -5.0, "expected a strongly negative entropy, got {}", ke.0);
    }

    #[test]
    fn too_short() {
        let s = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0], 1.0).unwrap();
        assert!(matches!(kdee_profile(&s, 4), Err(Error::InsufficientData(_))));
        assert!(kdee_profile(&s, 0).is_err());
    }

    #[test]
    fn sine_profile_varies_with_lag() {
        let x: Vec<f64> = (0..600)
            .map(|i| libm::sin(2.0 * core::f64::consts::PI * i as f64 / 40.0))
            .collect();
        let s = TimeSeries::new(x, 40.0).unwrap();
        let p = kdee_profile(&s, 20).unwrap();
        assert_eq!(p.taus.len(), 20);
        assert!(p.delta_ke.0 > 1.0);
        // widest unfolding at a quarter period
        assert_eq!(p.argmax_tau(), 10);
    }
}
