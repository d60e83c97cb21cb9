//! The Lorenz system integrated with fixed-step RK4.

use alloc::vec::Vec;

use crate::{Error, Result, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LorenzConfig {
    pub sigma: f64,
    pub beta: f64,
    /// 166.18 sits in the type-I intermittent regime.
    pub rho: f64,
    pub rate_hz: f64,
    pub duration_s: f64,
    pub discard_s: f64,
    pub initial_state: [f64; 3],
}

impl Default for LorenzConfig {
    fn default() -> Self {
        LorenzConfig {
            sigma: 10.0,
            beta: 8.0 / 3.0,
            rho: 166.18,
            rate_hz: 150.0,
            duration_s: 1000.0,
            discard_s: 93.0,
            initial_state: [1.0, 1.0, 1.0],
        }
    }
}

impl LorenzConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return Err(Error::param("rate_hz must be positive"));
        }
        if !(self.discard_s >= 0.0 && self.discard_s < self.duration_s && self.duration_s.is_finite()) {
            return Err(Error::param("need 0 <= discard_s < duration_s"));
        }
        if !self.initial_state.iter().all(|v| v.is_finite()) {
            return Err(Error::param("initial_state must be finite"));
        }
        Ok(())
    }

    /// Time derivative of the state.
    pub fn field(&self, s: &[f64; 3]) -> [f64; 3] {
        [
            self.sigma * (s[1] - s[0]),
            s[0] * (self.rho - s[2]) - s[1],
            s[0] * s[1] - self.beta * s[2],
        ]
    }
}

/// One classical fourth-order Runge–Kutta step of `ẏ = f(y)`.
pub fn rk4_step<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], y: &[f64; N], dt: f64) -> [f64; N] {
    let shift = |base: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *base;
        for i in 0..N {
            out[i] += h * k[i];
        }
        out
    };
    let k1 = f(y);
    let k2 = f(&shift(y, &k1, dt / 2.0));
    let k3 = f(&shift(y, &k2, dt / 2.0));
    let k4 = f(&shift(y, &k3, dt));
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// The `x` component sampled at `rate_hz` for `duration_s`, without the
/// first `⌈discard_s·rate_hz⌉` samples.
pub fn lorenz_x(cfg: &LorenzConfig) -> Result<TimeSeries> {
    cfg.validate()?;
    let dt = 1.0 / cfg.rate_hz;
    let total = libm::round(cfg.duration_s * cfg.rate_hz) as usize;
    let skip = libm::ceil(cfg.discard_s * cfg.rate_hz) as usize;
    let mut state = cfg.initial_state;
    let mut out = Vec::with_capacity(total - skip);
    for step in 0..total {
        if step >= skip {
            out.push(state[0]);
        }
        state = rk4_step(|s| cfg.field(s), &state, dt);
        if !state.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: step + 1 });
        }
    }
    TimeSeries::new(out, cfg.rate_hz)
}
