//! Numeric search for four-kick schedules that close both modes and give
//! the σ_z gate phases.
//!
//! With kick strengths m_j (in units of the base Lamb–Dicke parameters) at
//! times t_j, mode ν closes when Σ m_j e^{iω_ν t_j} = 0, and picks up
//! Θ_ν = η_ν² Σ_{j<k} m_j m_k sin ω_ν(t_k − t_j). The four spin branches get
//! (0, Θ₁+Θ₂, Θ₁+Θ₂, 4Θ₁), so the gate needs 4Θ₁ ≡ 0 and Θ₁+Θ₂ ≡ π/2.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GateSchedule, KickEvent};
use crate::dynamics::TrapConfig;
use crate::error::{Error, Result};
use crate::optim::{levenberg_marquardt, LmOptions};

use core::f64::consts::{FRAC_PI_2, TAU};

pub const KICK_COUNT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickSolverOptions {
    /// Target mode phases (Θ₁, Θ₂).
    pub targets: [f64; 2],
    pub seed: u64,
    pub restarts: usize,
    /// Base Lamb–Dicke parameters of a unit kick on modes 1 and 2.
    pub eta_base: [f64; 2],
    /// Largest |m_j| accepted.
    pub max_strength: f64,
}

impl KickSolverOptions {
    /// Targets (π/2, 0) with the trap's own Lamb–Dicke parameters.
    pub fn for_trap(trap: &TrapConfig) -> Result<Self> {
        Ok(Self {
            targets: [FRAC_PI_2, 0.0],
            seed: 7,
            restarts: 48,
            eta_base: [trap.eta(1)?, trap.eta(2)?],
            max_strength: 40.0,
        })
    }
}

/// Solved kick pattern in trap units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickSolution {
    /// Kick times (s), the first at zero.
    pub times: [f64; KICK_COUNT],
    pub strengths: [f64; KICK_COUNT],
    pub residual_norm: f64,
}

impl KickSolution {
    pub fn kicks(&self, eta_base: [f64; 2]) -> Vec<KickEvent> {
        self.times
            .iter()
            .zip(&self.strengths)
            .map(|(&time, &m)| KickEvent {
                time,
                delta_k_sign: if m >= 0.0 { 1 } else { -1 },
                eta_1: m.abs() * eta_base[0],
                eta_2: m.abs() * eta_base[1],
            })
            .collect()
    }

    pub fn schedule(&self, eta_base: [f64; 2]) -> Result<GateSchedule> {
        let end = self.times.iter().copied().fold(0.0, f64::max);
        GateSchedule::from_kicks(self.kicks(eta_base), end)
    }
}

/// Kick times τ = ω₁t from squared gaps, which keeps them ordered.
fn kick_phases(x: &[f64]) -> [f64; KICK_COUNT] {
    let mut tau = [0.0; KICK_COUNT];
    for j in 1..KICK_COUNT {
        tau[j] = tau[j - 1] + x[j - 1] * x[j - 1];
    }
    tau
}

/// Residuals of the seven conditions in dimensionless time τ = ω₁t.
/// `x` = [g₁, g₂, g₃, m₀, m₁, m₂, m₃] with τ_j − τ_{j−1} = g_j².
fn residuals(x: &[f64], ratio: f64, eta2: [f64; 2], targets: [f64; 2]) -> Vec<f64> {
    let tau = kick_phases(x);
    let m = &x[3..7];
    let mut out = Vec::with_capacity(7);
    for w in [1.0, ratio] {
        let (mut re, mut im) = (0.0, 0.0);
        for j in 0..KICK_COUNT {
            let (s, c) = (w * tau[j]).sin_cos();
            re += m[j] * c;
            im += m[j] * s;
        }
        out.push(re);
        out.push(im);
    }
    out.push(m.iter().sum());
    for (k, w) in [1.0, ratio].into_iter().enumerate() {
        let mut s = 0.0;
        for j in 0..KICK_COUNT {
            for l in j + 1..KICK_COUNT {
                s += m[j] * m[l] * (w * (tau[l] - tau[j])).sin();
            }
        }
        out.push(eta2[k] * s - targets[k]);
    }
    out
}

/// Seeded multi-start Levenberg–Marquardt over kick times and strengths.
/// Among converged solutions the one with the smallest max |m_j| wins.
pub fn solve_kick_schedule(trap: &TrapConfig, opts: &KickSolverOptions) -> Result<KickSolution> {
    let w1 = trap.omega(1)?;
    let ratio = trap.omega(2)? / w1;
    let eta2 = [opts.eta_base[0].powi(2), opts.eta_base[1].powi(2)];
    if eta2[0] == 0.0 || eta2[1] == 0.0 {
        return Err(Error::InvalidParameter("kicks need non-zero Lamb-Dicke parameters".into()));
    }
    let f = |x: &[f64]| residuals(x, ratio, eta2, opts.targets);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, [f64; 7], f64)> = None;
    let lm = LmOptions { max_iter: 300, tol: 1e-13, ..LmOptions::default() };
    let scale = (opts.targets[0].abs() + opts.targets[1].abs()).max(0.1) / eta2[1];
    for _ in 0..opts.restarts.max(1) {
        let mut x0 = [0.0; 7];
        for v in x0.iter_mut().take(3) {
            *v = rng.random_range(0.0..TAU).sqrt();
        }
        for v in x0.iter_mut().skip(3) {
            *v = rng.random_range(-1.0..1.0) * scale.sqrt();
        }
        let r = levenberg_marquardt(f, &x0, &lm);
        if r.residual_norm > 1e-10 {
            continue;
        }
        let size = r.x[3..].iter().map(|m| m.abs()).fold(0.0, f64::max);
        if size > opts.max_strength || size < 1e-6 {
            continue;
        }
        let mut xs = [0.0; 7];
        xs.copy_from_slice(&r.x);
        if best.map_or(true, |(b, _, _)| size < b - 1e-9) {
            best = Some((size, xs, r.residual_norm));
        }
    }
    let (_, x, residual_norm) =
        best.ok_or_else(|| Error::NoConvergence(format!("no kick schedule after {} restarts", opts.restarts)))?;
    let tau = kick_phases(&x);
    Ok(KickSolution {
        times: tau.map(|t| t / w1),
        strengths: core::array::from_fn(|j| x[3 + j]),
        residual_norm,
    })
}
