//! Driven harmonic oscillator: closed-form displacement and geometric phase.
//!
//! With H/ħ = (g/2) â† e^{iδt} + h.c. and g = F x₀/ħ, the evolution from
//! t = 0 is U(t) = e^{iΦ(t)} D(α(t)) where D(α) = exp(α â† − α* â),
//! α(t) = (g/2δ)(1 − e^{iδt}) and Φ(t) = Im ∫ α* dα = |g/2δ|² (δt − sin δt).

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::HBAR;
use crate::error::{Error, Result};

/// α(t) for a force rate g = F x₀/ħ (rad/s).
pub fn alpha_for_rate(g: C64, delta: f64, t: f64) -> Result<C64> {
    if delta == 0.0 {
        return Err(Error::ResonantDrive);
    }
    Ok(g / (2.0 * delta) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, delta * t)))
}

/// Φ(t) for a force rate g = F x₀/ħ (rad/s).
pub fn phase_for_rate(g: C64, delta: f64, t: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::ResonantDrive);
    }
    let r2 = (g / (2.0 * delta)).norm_sqr();
    Ok(r2 * (delta * t - (delta * t).sin()))
}

/// α(t) = (F x₀ / 2ħδ)(1 − e^{iδt}).
pub fn alpha_of_t(force: C64, delta: f64, x0: f64, t: f64) -> Result<C64> {
    alpha_for_rate(force * x0 / HBAR, delta, t)
}

/// Magnitude of the geometric phase after one loop, π|F x₀|²/(2(ħδ)²).
/// The phase actually acquired carries the sign of δ.
pub fn round_trip_phase(force: C64, delta: f64, x0: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::ResonantDrive);
    }
    let g = force.norm() * x0 / HBAR;
    Ok(core::f64::consts::PI * g * g / (2.0 * delta * delta))
}

/// Signed Φ(t) = Im ∫₀ᵗ α* dα.
pub fn geometric_phase_of_t(force: C64, delta: f64, x0: f64, t: f64) -> Result<f64> {
    phase_for_rate(force * x0 / HBAR, delta, t)
}

/// Sampled phase-space path with its running geometric phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    samples: Vec<(f64, C64)>,
    phases: Vec<f64>,
}

impl Trajectory {
    /// Running phase by the chord rule Φ_{k+1} = Φ_k + Im(α_k* α_{k+1}).
    pub fn from_samples(samples: Vec<(f64, C64)>) -> Self {
        let mut phases = Vec::with_capacity(samples.len());
        let mut acc = 0.0;
        for (k, s) in samples.iter().enumerate() {
            if k > 0 {
                acc += (samples[k - 1].1.conj() * s.1).im;
            }
            phases.push(acc);
        }
        Self { samples, phases }
    }

    /// `count` equal steps over one period 2π/|δ| of the closed-form path.
    pub fn circle(force: C64, delta: f64, x0: f64, count: usize) -> Result<Self> {
        if delta == 0.0 {
            return Err(Error::ResonantDrive);
        }
        let period = 2.0 * core::f64::consts::PI / delta.abs();
        let mut samples = Vec::with_capacity(count + 1);
        for k in 0..=count {
            let t = period * k as f64 / count as f64;
            samples.push((t, alpha_of_t(force, delta, x0, t)?));
        }
        Ok(Self::from_samples(samples))
    }

    pub fn samples(&self) -> &[(f64, C64)] {
        &self.samples
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn geometric_phase(&self) -> f64 {
        self.phases.last().copied().unwrap_or(0.0)
    }

    /// True when the last sample returns to the first within `tol`.
    pub fn is_closed(&self, tol: f64) -> bool {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (a.1 - b.1).norm() <= tol,
            _ => true,
        }
    }

    /// Continues this path with `next`, whose first sample must coincide
    /// with this path's last sample.
    pub fn concat(&self, next: &Trajectory) -> Self {
        let mut samples = self.samples.clone();
        samples.extend(next.samples.iter().skip(1).copied());
        Self::from_samples(samples)
    }
}
