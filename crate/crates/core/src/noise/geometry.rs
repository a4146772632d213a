//! Raman beam geometries and the optical phases they imprint on each ion.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dynamics::{FieldPair, TrapConfig};
use crate::error::{Error, Result};

const TAU: f64 = core::f64::consts::TAU;

/// Which of the two beam paths a field travels along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeamPath {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalField {
    /// Wave-vector component along the trap axis (1/m).
    pub wave_vector: f64,
    /// Optical angular frequency (rad/s).
    pub frequency: f64,
    pub phase: f64,
    pub path: BeamPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    PhaseSensitive,
    PhaseInsensitive,
    Custom,
}

/// Optical fields plus the pairs of them that drive each transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    pub fields: Vec<OpticalField>,
    pub red: Option<(usize, usize)>,
    pub blue: Option<(usize, usize)>,
    /// Non-copropagating carrier pair, when present.
    pub carrier: Option<(usize, usize)>,
    pub configuration: GeometryKind,
}

/// Frequencies defining a σ_φ beam layout (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandPlan {
    pub omega_a: f64,
    /// Qubit frequency ω₀′ including the average Stark shifts.
    pub qubit: f64,
    pub mode_frequency: f64,
    /// Gate detuning δ (red tone δ above the red sideband, blue δ below the
    /// blue sideband).
    pub delta: f64,
}

impl SidebandPlan {
    fn red_beat(&self) -> f64 {
        self.qubit - self.mode_frequency + self.delta
    }

    fn blue_beat(&self) -> f64 {
        self.qubit + self.mode_frequency - self.delta
    }
}

impl BeamGeometry {
    /// Both path-B tones above ω_A: Δk_r = Δk_b. A third path-B tone drives
    /// the carrier used as the rotation reference; its phase is offset by
    /// π/2 so that the resulting rotation phase equals φ_S.
    /// `delta_k` is the wave-vector difference k_B − k_A.
    pub fn phase_sensitive(plan: SidebandPlan, delta_k: f64) -> Self {
        let a = OpticalField { wave_vector: -delta_k / 2.0, frequency: plan.omega_a, phase: 0.0, path: BeamPath::A };
        let b = |freq: f64| OpticalField { wave_vector: delta_k / 2.0, frequency: freq, phase: 0.0, path: BeamPath::B };
        Self {
            fields: alloc::vec![
                a,
                b(plan.omega_a + plan.red_beat()),
                b(plan.omega_a + plan.blue_beat()),
                OpticalField { phase: core::f64::consts::FRAC_PI_2, ..b(plan.omega_a + plan.qubit) },
            ],
            red: Some((0, 1)),
            blue: Some((0, 2)),
            carrier: Some((0, 3)),
            configuration: GeometryKind::PhaseSensitive,
        }
    }

    /// Path-B tones straddling ω_A: Δk_r = −Δk_b.
    pub fn phase_insensitive(plan: SidebandPlan, delta_k: f64) -> Self {
        let a = OpticalField { wave_vector: -delta_k / 2.0, frequency: plan.omega_a, phase: 0.0, path: BeamPath::A };
        let b = |freq: f64| OpticalField { wave_vector: delta_k / 2.0, frequency: freq, phase: 0.0, path: BeamPath::B };
        Self {
            fields: alloc::vec![a, b(plan.omega_a - plan.red_beat()), b(plan.omega_a + plan.blue_beat())],
            red: Some((0, 1)),
            blue: Some((0, 2)),
            carrier: None,
            configuration: GeometryKind::PhaseInsensitive,
        }
    }

    /// Adds `delta_phi` to the phase of every field on path B.
    pub fn with_path_shift(&self, delta_phi: f64) -> Self {
        let mut g = self.clone();
        for f in g.fields.iter_mut().filter(|f| f.path == BeamPath::B) {
            f.phase += delta_phi;
        }
        g
    }

    /// Adds `phase` to one field.
    pub fn with_field_phase(&self, field: usize, phase: f64) -> Result<Self> {
        let mut g = self.clone();
        let f = g
            .fields
            .get_mut(field)
            .ok_or_else(|| Error::InvalidParameter(format!("no field {field}")))?;
        f.phase += phase;
        Ok(g)
    }

    /// Wave-vector and phase difference of a pair, higher frequency minus
    /// lower frequency.
    pub fn pair(&self, pair: (usize, usize)) -> Result<FieldPair> {
        let get = |i: usize| {
            self.fields
                .get(i)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("no field {i}")))
        };
        let (x, y) = (get(pair.0)?, get(pair.1)?);
        let (hi, lo) = if x.frequency >= y.frequency { (x, y) } else { (y, x) };
        Ok(FieldPair::new(hi.wave_vector - lo.wave_vector, hi.phase - lo.phase))
    }

    pub fn red_pair(&self) -> Result<FieldPair> {
        self.pair(self.red.ok_or_else(|| Error::InvalidParameter("no red sideband assignment".into()))?)
    }

    pub fn blue_pair(&self) -> Result<FieldPair> {
        self.pair(self.blue.ok_or_else(|| Error::InvalidParameter("no blue sideband assignment".into()))?)
    }

    pub fn carrier_pair(&self) -> Result<FieldPair> {
        self.pair(self.carrier.ok_or_else(|| Error::InvalidParameter("no carrier assignment".into()))?)
    }

    /// Checks the wave-vector relations implied by `configuration`.
    pub fn validate(&self) -> Result<()> {
        let r = self.red_pair()?;
        let b = self.blue_pair()?;
        if r.delta_k == 0.0 || b.delta_k == 0.0 {
            return Err(Error::InvalidParameter("sideband pairs need a non-zero wave-vector difference".into()));
        }
        let tol = 1e-12 * r.delta_k.abs().max(b.delta_k.abs());
        match self.configuration {
            GeometryKind::PhaseSensitive if (r.delta_k - b.delta_k).abs() > tol => Err(Error::GeometryMismatch(
                "phase-sensitive layout needs equal red and blue wave-vector differences".into(),
            )),
            GeometryKind::PhaseInsensitive if (r.delta_k + b.delta_k).abs() > tol => Err(Error::GeometryMismatch(
                "phase-insensitive layout needs opposite red and blue wave-vector differences".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Spin phase φ_S and motion phase φ_M of one ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonPhases {
    pub spin: f64,
    pub motion: f64,
}

/// φ_S,i = −(θ_r,i + θ_b,i)/2 and φ_M,i = (θ_r,i − θ_b,i)/2 with
/// θ = ΔkX₀,ᵢ − Δφ for each sideband pair.
pub fn spin_motion_phases(geometry: &BeamGeometry, trap: &TrapConfig) -> Result<[IonPhases; 2]> {
    Ok(ion_phases(trap, geometry.red_pair()?, geometry.blue_pair()?))
}

/// Same as [`spin_motion_phases`] for explicit red and blue pairs.
pub fn ion_phases(trap: &TrapConfig, red: FieldPair, blue: FieldPair) -> [IonPhases; 2] {
    let phases = |ion: usize| {
        let tr = trap.ion_phase(ion, red);
        let tb = trap.ion_phase(ion, blue);
        IonPhases { spin: -(tr + tb) / 2.0, motion: (tr - tb) / 2.0 }
    };
    [phases(0), phases(1)]
}

/// Δk(X₀,₁ − X₀,₂) reduced to [0, 2π).
pub fn spacing_phase(trap: &TrapConfig) -> f64 {
    let p = trap.ion_positions();
    (trap.delta_k() * (p[0] - p[1])).rem_euclid(TAU)
}

/// Distance of an angle from the nearest multiple of 2π.
pub fn wrapped_distance(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    r.min(TAU - r)
}
