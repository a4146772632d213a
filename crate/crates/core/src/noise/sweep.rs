//! Quasi-static path and position disturbances and Monte-Carlo fidelity
//! sweeps over them.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{trial_rng, BeamGeometry};
use crate::dynamics::{StarkForce, TrapConfig};
use crate::error::{Error, Result};
use crate::gates::{
    ramsey_wrapped_gate, sigma_phi_drive, sigma_phi_gate, sigma_phi_phases, sigma_phi_table, sigma_z_gate,
    sigma_z_table, truth_table_of, GateOptions, RotationReference,
};
use crate::hilbert::FockBasis;
use crate::stats::{histogram, mean, variance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Distribution {
    Fixed { value: f64 },
    /// Uniform on [low, high).
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Default for Distribution {
    fn default() -> Self {
        Distribution::Fixed { value: 0.0 }
    }
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Distribution::Fixed { value } => value.is_finite(),
            Distribution::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
            Distribution::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("malformed distribution {self:?}")))
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Distribution::Fixed { value } => value,
            Distribution::Uniform { low, high } => {
                if high > low {
                    rng.random_range(low..high)
                } else {
                    low
                }
            }
            Distribution::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
        }
    }
}

/// Per-shot disturbance: extra phase on beam path B and equilibrium shifts
/// of the two ions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PathDisturbance {
    pub delta_phi: f64,
    /// δX₀,ᵢ (m).
    pub ion_displacements: [f64; 2],
}

impl PathDisturbance {
    pub fn apply_to_trap(&self, trap: &TrapConfig) -> TrapConfig {
        let x = trap.ion_positions();
        trap.with_positions([x[0] + self.ion_displacements[0], x[1] + self.ion_displacements[1]])
    }
}

/// Random process behind a sweep; displacements are drawn independently
/// for each ion.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    #[serde(default)]
    pub delta_phi: Distribution,
    #[serde(default)]
    pub ion_displacement: Distribution,
}

impl DisturbanceSpec {
    pub fn validate(&self) -> Result<()> {
        self.delta_phi.validate()?;
        self.ion_displacement.validate()
    }

    /// Disturbance of trial `trial`; the same (seed, trial) always gives the
    /// same draw.
    pub fn sample(&self, seed: u64, trial: u64) -> PathDisturbance {
        let mut rng = trial_rng(seed, trial);
        let delta_phi = self.delta_phi.sample(&mut rng);
        let d0 = self.ion_displacement.sample(&mut rng);
        let d1 = self.ion_displacement.sample(&mut rng);
        PathDisturbance { delta_phi, ion_displacements: [d0, d1] }
    }
}

/// Gate under test. The ideal table is always the undisturbed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "gate")]
pub enum SweepGate {
    /// Path shift adds to the Stark pair's Δφ.
    SigmaZ { trap: TrapConfig, drive: StarkForce },
    /// Bare σ_φ gate compared with its calibrated σ_φ table.
    SigmaPhi { trap: TrapConfig, geometry: BeamGeometry, detuning: f64 },
    /// σ_φ gate inside π/2 rotations, compared with the σ_z table.
    RamseyWrapped { trap: TrapConfig, geometry: BeamGeometry, reference: RotationReference, detuning: f64 },
}

/// Table fidelity of `gate` under one disturbance.
pub fn disturbed_fidelity(
    gate: &SweepGate,
    d: &PathDisturbance,
    basis: FockBasis,
    opts: &GateOptions,
) -> Result<f64> {
    match gate {
        SweepGate::SigmaZ { trap, drive } => {
            let t = d.apply_to_trap(trap);
            let mut drv = *drive;
            drv.pair.delta_phi += d.delta_phi;
            let out = truth_table_of(basis, |s| sigma_z_gate(&t, &drv, s, opts))?;
            Ok(out.table.fidelity(&sigma_z_table()))
        }
        SweepGate::SigmaPhi { trap, geometry, detuning } => {
            let calibrated = sigma_phi_drive(trap, geometry, *detuning)?;
            let p = sigma_phi_phases(trap, &calibrated);
            let ideal = sigma_phi_table(p[0].spin, p[1].spin);
            let t = d.apply_to_trap(trap);
            let drv = sigma_phi_drive(&t, &geometry.with_path_shift(d.delta_phi), *detuning)?;
            let out = truth_table_of(basis, |s| sigma_phi_gate(&t, &drv, s, opts))?;
            Ok(out.table.fidelity(&ideal))
        }
        SweepGate::RamseyWrapped { trap, geometry, reference, detuning } => {
            let t = d.apply_to_trap(trap);
            let g = geometry.with_path_shift(d.delta_phi);
            let out = ramsey_wrapped_gate(&t, &g, *reference, *detuning, basis, opts)?;
            Ok(out.table.fidelity(&sigma_z_table()))
        }
    }
}

/// Fidelity of trial `trial`, independent of the order trials run in.
pub fn monte_carlo_trial(
    gate: &SweepGate,
    spec: &DisturbanceSpec,
    basis: FockBasis,
    opts: &GateOptions,
    seed: u64,
    trial: u64,
) -> Result<f64> {
    disturbed_fidelity(gate, &spec.sample(seed, trial), basis, opts)
}

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    /// Counts over equal bins of [0, 1].
    pub histogram: Vec<usize>,
    pub fidelities: Vec<f64>,
}

impl SweepStats {
    pub fn from_fidelities(fidelities: Vec<f64>) -> Self {
        let min = fidelities.iter().copied().fold(f64::INFINITY, f64::min);
        let max = fidelities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            trials: fidelities.len(),
            mean: mean(&fidelities),
            variance: variance(&fidelities),
            min,
            max,
            histogram: histogram(&fidelities, 0.0, 1.0, HISTOGRAM_BINS),
            fidelities,
        }
    }
}

/// Runs `trials` disturbed gates and summarizes their table fidelities.
pub fn monte_carlo_gate_sweep(
    gate: &SweepGate,
    spec: &DisturbanceSpec,
    basis: FockBasis,
    opts: &GateOptions,
    trials: usize,
    seed: u64,
) -> Result<SweepStats> {
    spec.validate()?;
    let f = (0..trials as u64)
        .map(|k| monte_carlo_trial(gate, spec, basis, opts, seed, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepStats::from_fidelities(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{FieldPair, AMU};
    use crate::gates::calibrated_sigma_z_drive;
    use crate::noise::SidebandPlan;
    use core::f64::consts::{PI, TAU};

    fn trap() -> TrapConfig {
        TrapConfig::from_stretch_eta(2.0 * PI * 2.0e6, 9.0 * AMU, 0.05, 6).unwrap()
    }

    fn plan() -> SidebandPlan {
        SidebandPlan { omega_a: 2.3e15, qubit: 2.0 * PI * 1.25e10, mode_frequency: 2.0 * PI * 3.46e6, delta: 2.0 * PI * 4e4 }
    }

    #[test]
    fn draws_are_reproducible() {
        let spec = DisturbanceSpec {
            delta_phi: Distribution::Uniform { low: 0.0, high: TAU },
            ion_displacement: Distribution::Normal { mean: 0.0, sd: 1e-9 },
        };
        assert_eq!(spec.sample(5, 17), spec.sample(5, 17));
        assert_ne!(spec.sample(5, 17), spec.sample(5, 18));
        assert!(Distribution::Normal { mean: 0.0, sd: -1.0 }.validate().is_err());
    }

    #[test]
    fn zero_width_has_no_variance() {
        let t = trap();
        let gate = SweepGate::SigmaZ { trap: t, drive: calibrated_sigma_z_drive(plan().delta, FieldPair::new(t.delta_k(), 0.0)) };
        let spec = DisturbanceSpec { delta_phi: Distribution::Fixed { value: 0.4 }, ..Default::default() };
        let b = FockBasis::new(10).unwrap();
        let opts = GateOptions::analytic();
        let s = monte_carlo_gate_sweep(&gate, &spec, b, &opts, 5, 1).unwrap();
        assert_eq!(s.variance, 0.0);
        let clean = disturbed_fidelity(&gate, &PathDisturbance::default(), b, &opts).unwrap();
        assert!((s.mean - clean).abs() < 1e-12);
        assert_eq!(s.histogram.iter().sum::<usize>(), 5);
    }

    #[test]
    fn wrap_protects_sigma_phi() {
        let t = trap();
        let g = BeamGeometry::phase_sensitive(plan(), t.delta_k());
        let spec = DisturbanceSpec { delta_phi: Distribution::Uniform { low: 0.0, high: TAU }, ..Default::default() };
        let b = FockBasis::new(10).unwrap();
        let opts = GateOptions::analytic();
        let bare = SweepGate::SigmaPhi { trap: t, geometry: g.clone(), detuning: plan().delta };
        let wrapped = SweepGate::RamseyWrapped {
            trap: t,
            geometry: g,
            reference: RotationReference::NonCopropagatingCarrier,
            detuning: plan().delta,
        };
        let a = monte_carlo_gate_sweep(&bare, &spec, b, &opts, 40, 9).unwrap();
        let w = monte_carlo_gate_sweep(&wrapped, &spec, b, &opts, 40, 9).unwrap();
        assert!(a.mean < 0.7, "{}", a.mean);
        assert!(w.min >= 0.999);
    }
}
