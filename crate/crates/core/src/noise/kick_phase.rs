//! Random optical phase picked up by fast-kick gates from ion motion during
//! the gate, with a semiclassical Monte-Carlo of its infidelity.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{participation, TrapConfig};
use crate::error::{Error, Result};
use crate::gates::KickEvent;
use crate::stats::{bootstrap_log_log_slope, log_log_fit, mean, Interval};

/// Signed wave-vector difference Δk_j of each kick. A kick whose η₁ equals
/// the trap's own η₁ carries |Δk| of the trap.
pub fn kick_wave_vectors(kicks: &[KickEvent], trap: &TrapConfig) -> Result<Vec<f64>> {
    let unit = trap.eta(1)?;
    if unit == 0.0 {
        return Err(Error::InvalidParameter("trap has zero wave-vector difference".into()));
    }
    Ok(kicks.iter().map(|k| k.momentum() / unit * trap.delta_k().abs()).collect())
}

/// φ_t = Σ_j Δk_j r_j for one ion at positions `positions[j]` (m) at the
/// kick times.
pub fn fast_gate_random_phase(kicks: &[KickEvent], positions: &[f64], trap: &TrapConfig) -> Result<f64> {
    if kicks.len() != positions.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} kicks but {} trajectory samples",
            kicks.len(),
            positions.len()
        )));
    }
    let dk = kick_wave_vectors(kicks, trap)?;
    Ok(dk.iter().zip(positions).map(|(k, r)| k * r).sum())
}

/// Kick pattern used in the scaling experiment, as fractions of the gate
/// time and signed strengths in unit kicks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KickFamily {
    /// 2ⁿ equally spaced kicks with Thue–Morse signs: (+,−), (+,−,−,+), …
    /// The first n moments Σ w_j t_jᵏ (k < n) vanish.
    Cycles { n: u32 },
    Custom { fractions: Vec<f64>, weights: Vec<f64> },
}

impl KickFamily {
    /// (fraction of T_g, signed weight) per kick.
    pub fn pattern(&self) -> Result<Vec<(f64, f64)>> {
        match self {
            KickFamily::Cycles { n } => {
                if *n == 0 || *n > 16 {
                    return Err(Error::InvalidParameter(format!("cycle count {n} outside 1..=16")));
                }
                let count = 1usize << n;
                Ok((0..count)
                    .map(|j| {
                        let w = if j.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        (j as f64 / (count - 1) as f64, w)
                    })
                    .collect())
            }
            KickFamily::Custom { fractions, weights } => {
                if fractions.len() != weights.len() || fractions.is_empty() {
                    return Err(Error::DimensionMismatch("kick fractions and weights differ in length".into()));
                }
                if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
                    return Err(Error::InvalidParameter("kick fractions must lie in [0, 1]".into()));
                }
                Ok(fractions.iter().copied().zip(weights.iter().copied()).collect())
            }
        }
    }

    /// Kicks of a gate lasting `gate_time` with the trap's unit strength.
    pub fn kicks(&self, trap: &TrapConfig, gate_time: f64) -> Result<Vec<KickEvent>> {
        let eta = [trap.eta(1)?, trap.eta(2)?];
        Ok(self
            .pattern()?
            .into_iter()
            .map(|(f, w)| KickEvent {
                time: f * gate_time,
                delta_k_sign: if w >= 0.0 { 1 } else { -1 },
                eta_1: w.abs() * eta[0],
                eta_2: w.abs() * eta[1],
            })
            .collect())
    }
}

/// Classical thermal state of both modes. Each mode has velocity spread
/// `v_rms` and position spread v_rms/ω_ν, so each ion's RMS velocity is
/// `v_rms`. Zero means ions at rest at equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    pub v_rms: f64,
}

/// Harmonic trajectories of the two ions' displacements from equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonTrajectory {
    omega: [f64; 2],
    x0: [f64; 2],
    v0: [f64; 2],
}

impl IonTrajectory {
    pub fn new(trap: &TrapConfig, x0: [f64; 2], v0: [f64; 2]) -> Result<Self> {
        Ok(Self { omega: [trap.omega(1)?, trap.omega(2)?], x0, v0 })
    }

    pub fn sample(trap: &TrapConfig, ensemble: &ThermalEnsemble, rng: &mut ChaCha8Rng) -> Result<Self> {
        let omega = [trap.omega(1)?, trap.omega(2)?];
        let mut x0 = [0.0; 2];
        let mut v0 = [0.0; 2];
        for m in 0..2 {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            x0[m] = a * ensemble.v_rms / omega[m];
            v0[m] = b * ensemble.v_rms;
        }
        Ok(Self { omega, x0, v0 })
    }

    fn mode(&self, m: usize, t: f64) -> f64 {
        let (s, c) = (self.omega[m] * t).sin_cos();
        self.x0[m] * c + self.v0[m] / self.omega[m] * s
    }

    /// Displacement of ion `ion` (0-based) at time `t`.
    pub fn position(&self, ion: usize, t: f64) -> f64 {
        (0..2).map(|m| participation(m + 1, ion) * self.mode(m, t)).sum::<f64>() / 2f64.sqrt()
    }
}

/// 1 − F for |+,+⟩ when ion i's |↓⟩ picks up phase φ_i:
/// F = cos²(φ₁/2) cos²(φ₂/2).
pub fn phase_infidelity(phases: [f64; 2]) -> f64 {
    let s = phases.map(|p| (p / 2.0).sin().powi(2));
    s[0] + s[1] - s[0] * s[1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSetup {
    pub trap: TrapConfig,
    pub family: KickFamily,
    pub ensemble: ThermalEnsemble,
    /// Speed converting p = |Δk| v T_g into a gate time; defaults to the
    /// ensemble's v_rms.
    pub reference_speed: Option<f64>,
    /// Values of p, each in (0, 1).
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub bootstrap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub parameter: f64,
    pub gate_time: f64,
    pub mean_infidelity: f64,
    pub rms_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    /// Fitted k and A in δF = A pᵏ; absent when some δF is zero.
    pub slope: Option<f64>,
    pub prefactor: Option<f64>,
    pub slope_ci: Option<Interval>,
}

/// Deterministic RNG for trial `trial` of grid point `point`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-trial δF samples at one grid point.
pub fn scaling_samples(setup: &ScalingSetup, point: usize) -> Result<(ScalingPoint, Vec<f64>)> {
    let p = *setup
        .grid
        .get(point)
        .ok_or_else(|| Error::InvalidParameter(format!("grid point {point} out of range")))?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutsideValidity(format!("|dk| v T_g = {p} must lie in (0, 1)")));
    }
    let speed = setup.reference_speed.unwrap_or(setup.ensemble.v_rms);
    let dk = setup.trap.delta_k().abs();
    if !(speed > 0.0) || dk == 0.0 {
        return Err(Error::InvalidParameter("reference speed and |dk| must be positive".into()));
    }
    let gate_time = p / (dk * speed);
    let kicks = setup.family.kicks(&setup.trap, gate_time)?;
    let mut samples = Vec::with_capacity(setup.trials);
    let mut phase_sq = 0.0;
    let mut r = vec![0.0; kicks.len()];
    for trial in 0..setup.trials {
        let mut rng = trial_rng(setup.seed, (point as u64) << 32 | trial as u64);
        let traj = IonTrajectory::sample(&setup.trap, &setup.ensemble, &mut rng)?;
        let mut phases = [0.0; 2];
        for (ion, ph) in phases.iter_mut().enumerate() {
            for (rj, k) in r.iter_mut().zip(&kicks) {
                *rj = traj.position(ion, k.time);
            }
            *ph = fast_gate_random_phase(&kicks, &r, &setup.trap)?;
            phase_sq += *ph * *ph;
        }
        samples.push(phase_infidelity(phases));
    }
    let rms_phase = if setup.trials == 0 { 0.0 } else { (phase_sq / (2 * setup.trials) as f64).sqrt() };
    Ok((ScalingPoint { parameter: p, gate_time, mean_infidelity: mean(&samples), rms_phase }, samples))
}

/// Mean δF over the grid with a log-log fit and bootstrap interval.
pub fn infidelity_scaling_experiment(setup: &ScalingSetup) -> Result<ScalingReport> {
    if setup.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if let Some(p) = setup.grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::OutsideValidity(format!("|dk| v T_g = {p} must lie in (0, 1)")));
    }
    let mut points = Vec::with_capacity(setup.grid.len());
    let mut samples = Vec::with_capacity(setup.grid.len());
    for k in 0..setup.grid.len() {
        let (pt, s) = scaling_samples(setup, k)?;
        points.push(pt);
        samples.push(s);
    }
    finish_scaling(setup, points, samples)
}

/// Fit and bootstrap over per-point samples gathered elsewhere.
pub fn finish_scaling(setup: &ScalingSetup, points: Vec<ScalingPoint>, samples: Vec<Vec<f64>>) -> Result<ScalingReport> {
    let x: Vec<f64> = points.iter().map(|p| p.parameter).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean_infidelity).collect();
    let (slope, prefactor, slope_ci) = match log_log_fit(&x, &y) {
        Ok((k, a)) => {
            let ci = if setup.bootstrap > 0 {
                Some(bootstrap_log_log_slope(&x, &samples, setup.bootstrap, setup.seed ^ 0x5eed)?)
            } else {
                None
            };
            (Some(k), Some(a), ci)
        }
        Err(_) => (None, None, None),
    };
    Ok(ScalingReport { points, slope, prefactor, slope_ci })
}

/// Log-spaced grid of `count` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}
