//! Entropy and KL divergence of gridded densities, in bits.
//!
//! Integrals are Riemann sums over grid cells with `0·log 0 = 0`. Since
//! every cell of a grid has the same area, divergences only depend on the
//! per-cell masses; the `*_masses` functions expose that form for discrete
//! distributions such as normalized periodograms.

use alloc::vec::Vec;
use core::fmt;

use crate::density::DensityGrid;
use crate::{Error, Result};

/// Relative weight of the additive floor used by the regularized divergence.
pub const REGULARIZATION: f64 = 1e-3;

/// An information quantity in bits. Differential entropies may be negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Bits(pub f64);

impl Bits {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

impl core::ops::Sub for Bits {
    type Output = Bits;
    fn sub(self, rhs: Bits) -> Bits {
        Bits(self.0 - rhs.0)
    }
}

/// Differential entropy `−Σ p·log2(p)·dx·dy`.
pub fn entropy(grid: &DensityGrid) -> Bits {
    let area = grid.spec().cell_area();
    let sum: f64 = grid
        .values()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * libm::log2(p))
        .sum();
    Bits(-sum * area)
}

fn check_specs(p: &DensityGrid, q: &DensityGrid) -> Result<()> {
    if p.spec() != q.spec() {
        return Err(Error::param("divergence needs grids on the same spec"));
    }
    Ok(())
}

/// `D(p‖q) = Σ p·log2(p/q)·dx·dy`; `+∞` when `q` vanishes where `p` does not.
pub fn kl_divergence(p: &DensityGrid, q: &DensityGrid) -> Result<Bits> {
    check_specs(p, q)?;
    Ok(Bits(kl_divergence_masses(&p.masses(), &q.masses())))
}

/// Symmetrized divergence `½(D(p'‖q') + D(q'‖p'))` of the floored and
/// renormalized densities `p' ∝ p + 0.001·max p`, `q' ∝ q + 0.001·max q`.
/// Finite and non-negative for any pair of valid grids.
pub fn symmetrized_kl_regularized(p: &DensityGrid, q: &DensityGrid) -> Result<Bits> {
    check_specs(p, q)?;
    Ok(Bits(symmetrized_kl_masses(&p.masses(), &q.masses(), true)))
}

/// Same as [`symmetrized_kl_regularized`] with the renormalization step
/// selectable; without it the floored arguments carry slightly more than
/// unit mass.
pub fn symmetrized_kl_regularized_with(p: &DensityGrid, q: &DensityGrid, renormalize: bool) -> Result<Bits> {
    check_specs(p, q)?;
    Ok(Bits(symmetrized_kl_masses(&p.masses(), &q.masses(), renormalize)))
}

/// `Σ p·log2(p/q)` over discrete masses.
pub fn kl_divergence_masses(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            sum += a * libm::log2(a / b);
        }
    }
    sum
}

/// Adds `REGULARIZATION · max(m)` to every mass, optionally rescaling to
/// unit total.
pub fn regularize_masses(m: &[f64], renormalize: bool) -> Vec<f64> {
    let floor = REGULARIZATION * m.iter().copied().fold(0.0, f64::max);
    let mut out: Vec<f64> = m.iter().map(|v| v + floor).collect();
    if renormalize {
        let total: f64 = out.iter().sum();
        if total > 0.0 {
            out.iter_mut().for_each(|v| *v /= total);
        }
    }
    out
}

/// Symmetrized regularized divergence over discrete masses.
pub fn symmetrized_kl_masses(p: &[f64], q: &[f64], renormalize: bool) -> f64 {
    let p = regularize_masses(p, renormalize);
    let q = regularize_masses(q, renormalize);
    0.5 * (kl_divergence_masses(&p, &q) + kl_divergence_masses(&q, &p))
}
