//! Hann-tapered periodogram used as the spectral window representation.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Reusable periodogram for one window length (twiddles and taper cached).
#[derive(Debug, Clone)]
pub struct Periodogram {
    len: usize,
    taper: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Periodogram {
    pub fn new(len: usize) -> Self {
        assert!(len >= 2, "periodogram needs at least two samples");
        let n = len as f64;
        let taper = (0..len)
            .map(|i| 0.5 - 0.5 * libm::cos(2.0 * PI * i as f64 / n))
            .collect();
        let cos = (0..len).map(|i| libm::cos(2.0 * PI * i as f64 / n)).collect();
        let sin = (0..len).map(|i| libm::sin(2.0 * PI * i as f64 / n)).collect();
        Periodogram { len, taper, cos, sin }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Mean-removed, Hann-tapered copy of `x`.
    pub fn tapered(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len);
        let mean = x.iter().sum::<f64>() / self.len as f64;
        x.iter().zip(&self.taper).map(|(v, w)| (v - mean) * w).collect()
    }

    /// One-sided power `|X_k|²/N` for `k = 0..=N/2`, interior bins doubled,
    /// so the bins sum to the energy of the tapered signal.
    pub fn power(&self, x: &[f64]) -> Vec<f64> {
        let y = self.tapered(x);
        let n = self.len;
        let half = n / 2;
        (0..=half)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                let mut idx = 0;
                for v in &y {
                    re += v * self.cos[idx];
                    im -= v * self.sin[idx];
                    idx += k;
                    if idx >= n {
                        idx -= n;
                    }
                }
                let p = (re * re + im * im) / n as f64;
                let mirrored = k != 0 && !(n.is_multiple_of(2) && k == half);
                if mirrored {
                    2.0 * p
                } else {
                    p
                }
            })
            .collect()
    }

    /// Power normalized to unit sum; a flat spectrum for a silent window.
    pub fn distribution(&self, x: &[f64]) -> Vec<f64> {
        let mut p = self.power(x);
        let total: f64 = p.iter().sum();
        if total > 0.0 && total.is_finite() {
            p.iter_mut().for_each(|v| *v /= total);
        } else {
            let u = 1.0 / p.len() as f64;
            p.iter_mut().for_each(|v| *v = u);
        }
        p
    }

    /// Frequency in Hz of bin `k` at `sample_rate_hz`.
    pub fn bin_frequency(&self, k: usize, sample_rate_hz: f64) -> f64 {
        k as f64 * sample_rate_hz / self.len as f64
    }
}
