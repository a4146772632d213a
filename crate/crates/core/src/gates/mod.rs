//! Two-qubit gate schemes: the sideband phase gate, spin-dependent force
//! gates in the σ_z and σ_φ bases, and the fast kick gate.
//!
//! Truth tables index the two-qubit basis as ↑↑, ↑↓, ↓↑, ↓↓ with ion 1
//! (index 0) as the left factor.

use alloc::format;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_interaction_hamiltonian, debye_waller, evolve_numeric_with, max_stable_dt, Drive, DwOrder, EvolveOptions,
    FieldPair, Integrator, RamanDrive, Sideband, TrapConfig,
};
use crate::error::{Error, Result};
use crate::hilbert::{
    embed_spin, reduced_spin_purity, FockBasis, SpinMotionState, TruncationReport, TWO_QUBIT_INPUTS,
};
use crate::linalg::{LinearOperator, ONE, ZERO};

mod fast;
mod force;
mod solver;

pub use fast::*;
pub use force::*;
pub use solver::*;

use core::f64::consts::{FRAC_1_SQRT_2, PI};

/// Output spin vector for each computational input, defined up to one global
/// phase for the whole table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    columns: [[C64; 4]; 4],
}

impl TruthTable {
    pub fn from_columns(columns: [[C64; 4]; 4]) -> Self {
        Self { columns }
    }

    pub fn from_operator(u: &LinearOperator) -> Result<Self> {
        if u.dim() != 4 {
            return Err(Error::DimensionMismatch("truth table needs a 4x4 operator".into()));
        }
        let mut columns = [[ZERO; 4]; 4];
        for (c, col) in columns.iter_mut().enumerate() {
            for (r, v) in col.iter_mut().enumerate() {
                *v = u[(r, c)];
            }
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[[C64; 4]; 4] {
        &self.columns
    }

    pub fn to_operator(&self) -> LinearOperator {
        LinearOperator::from_fn(4, |r, c| self.columns[c][r])
    }

    /// Σ_c ⟨ideal_c|out_c⟩.
    pub fn overlap(&self, ideal: &TruthTable) -> C64 {
        (0..4).map(|c| column_inner(&ideal.columns[c], &self.columns[c])).sum()
    }

    /// |Σ_c ⟨ideal_c|out_c⟩|² / 16: one global phase for the whole table.
    pub fn fidelity(&self, ideal: &TruthTable) -> f64 {
        self.overlap(ideal).norm_sqr() / 16.0
    }

    /// |⟨ideal_c|out_c⟩|² for each input.
    pub fn row_fidelities(&self, ideal: &TruthTable) -> [f64; 4] {
        core::array::from_fn(|c| column_inner(&ideal.columns[c], &self.columns[c]).norm_sqr())
    }

    /// Largest entry-wise deviation after removing the best global phase.
    pub fn max_deviation(&self, ideal: &TruthTable) -> f64 {
        let ov = self.overlap(ideal);
        let rot = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { ONE };
        let mut worst: f64 = 0.0;
        for c in 0..4 {
            for r in 0..4 {
                worst = worst.max((self.columns[c][r] * rot - ideal.columns[c][r]).norm());
            }
        }
        worst
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.to_operator().unitarity_defect()
    }

    /// V† T V: the same map expressed in the basis given by the columns of
    /// `v`.
    pub fn in_basis(&self, v: &LinearOperator) -> Result<Self> {
        if v.dim() != 4 {
            return Err(Error::DimensionMismatch("basis change must be 4x4".into()));
        }
        Self::from_operator(&v.dagger().matmul(&self.to_operator()).matmul(v))
    }
}

fn column_inner(a: &[C64; 4], b: &[C64; 4]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn diag_table(d: [C64; 4]) -> TruthTable {
    TruthTable::from_operator(&LinearOperator::diagonal(&d)).expect("4x4")
}

/// Phase gate: |↓↓⟩ → −|↓↓⟩, others unchanged.
pub fn phase_gate_table() -> TruthTable {
    diag_table([ONE, ONE, ONE, -ONE])
}

/// Controlled-NOT obtained by conjugating the phase gate with π/2 carrier
/// pulses of phase φ on ion 2: |↓↑⟩ → e^{iφ}|↓↓⟩, |↓↓⟩ → e^{−iφ}|↓↑⟩.
pub fn cnot_table(phi: f64) -> TruthTable {
    let mut c = [[ZERO; 4]; 4];
    c[0][0] = ONE;
    c[1][1] = ONE;
    c[2][3] = C64::from_polar(1.0, phi);
    c[3][2] = C64::from_polar(1.0, -phi);
    TruthTable::from_columns(c)
}

/// The controlled-NOT table with e^{iφ} on both flipped rows.
pub fn cnot_table_printed(phi: f64) -> TruthTable {
    let mut t = cnot_table(phi);
    t.columns[3][2] = C64::from_polar(1.0, phi);
    t
}

/// Geometric phase gate: anti-aligned spins pick up i.
pub fn sigma_z_table() -> TruthTable {
    let i = C64::new(0.0, 1.0);
    diag_table([ONE, i, i, ONE])
}

/// e^{iπ/4} exp(−iπ/4 σ_{φ1}σ_{φ2}) written in the σ_z basis.
pub fn sigma_phi_table(phi_s1: f64, phi_s2: f64) -> TruthTable {
    let mi = C64::new(0.0, -FRAC_1_SQRT_2);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut c = [[ZERO; 4]; 4];
    c[0][0] = h;
    c[0][3] = mi * C64::from_polar(1.0, phi_s1 + phi_s2);
    c[1][1] = h;
    c[1][2] = mi * C64::from_polar(1.0, phi_s1 - phi_s2);
    c[2][2] = h;
    c[2][1] = mi * C64::from_polar(1.0, phi_s2 - phi_s1);
    c[3][3] = h;
    c[3][0] = mi * C64::from_polar(1.0, -(phi_s1 + phi_s2));
    TruthTable::from_columns(c)
}

/// The σ_φ table with the spin phases carried only by the aligned rows.
/// Coincides with [`sigma_phi_table`] when φ_S,1 = φ_S,2.
pub fn sigma_phi_table_printed(phi_sum: f64) -> TruthTable {
    let mut t = sigma_phi_table(phi_sum / 2.0, phi_sum / 2.0);
    let mi = C64::new(0.0, -FRAC_1_SQRT_2);
    t.columns[1][2] = mi;
    t.columns[2][1] = mi;
    t
}

/// Columns |↑_φ⟩ = (|↑⟩ + e^{iφ}|↓⟩)/√2 and |↓_φ⟩ = (|↑⟩ − e^{iφ}|↓⟩)/√2,
/// the eigenvectors of σ_φ = σ₊e^{−iφ} + σ₋e^{iφ}.
pub fn sigma_phi_basis(phi: f64) -> LinearOperator {
    let e = C64::from_polar(FRAC_1_SQRT_2, phi);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    LinearOperator::from_rows(alloc::vec![h, h, e, -e]).expect("2x2")
}

/// Two-ion basis change built from [`sigma_phi_basis`] for each ion.
pub fn two_ion_phi_basis(phi_s1: f64, phi_s2: f64) -> LinearOperator {
    sigma_phi_basis(phi_s1).kron(&sigma_phi_basis(phi_s2))
}

/// cos(θ/2) I + sin(θ/2)(e^{−iφ}σ₊ − e^{iφ}σ₋).
pub fn carrier_unitary(theta: f64, phi: f64) -> LinearOperator {
    let (s, c) = (theta / 2.0).sin_cos();
    LinearOperator::from_rows(alloc::vec![
        C64::new(c, 0.0),
        C64::from_polar(s, -phi),
        -C64::from_polar(s, phi),
        C64::new(c, 0.0),
    ])
    .expect("2x2")
}

/// Rotation phase φ produced by a resonant carrier whose optical phase is
/// θ = ΔkX₀ − Δφ (with H = −½Ω e^{iθ}σ₊ + h.c.).
pub fn pulse_phase_for_optical_phase(theta: f64) -> f64 {
    -theta - PI / 2.0
}

/// Ideal carrier rotation of one ion; motion untouched.
pub fn carrier_pulse(state: &SpinMotionState, theta: f64, phi: f64, target_ion: usize) -> Result<SpinMotionState> {
    let n = state.qubit_count();
    if target_ion >= n {
        return Err(Error::InvalidQubit(target_ion));
    }
    let mut out = state.clone();
    out.apply_spin_operator(&embed_spin(&carrier_unitary(theta, phi), target_ion, n)?)?;
    Ok(out)
}

/// Per-gate result over the four computational inputs, each starting with
/// both modes in the ground state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    /// Spin components left in motional |0,0⟩.
    pub table: TruthTable,
    pub purities: [f64; 4],
    /// Worst truncation report over the four runs.
    pub truncation: TruncationReport,
}

impl GateOutcome {
    pub fn min_purity(&self) -> f64 {
        self.purities.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Runs `gate` on |input⟩ ⊗ |0,0⟩ for each of the four inputs.
pub fn truth_table_of(
    basis: FockBasis,
    mut gate: impl FnMut(&SpinMotionState) -> Result<SpinMotionState>,
) -> Result<GateOutcome> {
    let mut columns = [[ZERO; 4]; 4];
    let mut purities = [0.0; 4];
    let mut truncation: Option<TruncationReport> = None;
    for (c, spins) in TWO_QUBIT_INPUTS.iter().enumerate() {
        let input = SpinMotionState::basis_state(basis, spins, 0, 0)?;
        let out = gate(&input)?;
        for (s, v) in columns[c].iter_mut().enumerate() {
            *v = out.amplitude(s, 0, 0);
        }
        purities[c] = reduced_spin_purity(&out)?;
        let t = out.truncation();
        truncation = Some(match truncation {
            Some(w) if w.leakage_top5 >= t.leakage_top5 => w,
            _ => t,
        });
    }
    Ok(GateOutcome {
        table: TruthTable::from_columns(columns),
        purities,
        truncation: truncation.expect("four runs"),
    })
}

/// Settings for the sideband phase gate on mode ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiracZollerSettings {
    /// Carrier Rabi rate Ω of the addressed beam (rad/s).
    pub rabi: f64,
    pub mode: usize,
    /// Δφ of the sideband beam pair.
    pub optical_phase: f64,
    pub integrator: Integrator,
}

impl CiracZollerSettings {
    pub fn new(rabi: f64, mode: usize) -> Self {
        Self { rabi, mode, optical_phase: 0.0, integrator: Integrator::Midpoint }
    }
}

/// Largest population outside n = 0 of the gate mode tolerated on entry.
pub const GROUND_STATE_TOL: f64 = 1e-6;

fn blue_pi_pulse(
    state: &SpinMotionState,
    trap: &TrapConfig,
    settings: &CiracZollerSettings,
    phase_offset: f64,
) -> Result<SpinMotionState> {
    let pair = FieldPair::new(trap.delta_k(), settings.optical_phase + phase_offset);
    let drive = RamanDrive::resonant(settings.rabi, Sideband::blue(settings.mode), pair).addressing(0);
    let eta1 = trap.eta(1)?;
    let eta2 = trap.eta(2)?;
    let (n1, n2) = if settings.mode == 1 { (1, 0) } else { (0, 1) };
    let element = debye_waller(n1, n2, eta1, eta2, DwOrder::FirstSideband(settings.mode))?.abs();
    if !(settings.rabi > 0.0) || element == 0.0 {
        return Err(Error::InvalidParameter("sideband Rabi rate must be positive".into()));
    }
    let t_pi = PI / (settings.rabi * element);
    let h = build_interaction_hamiltonian(&Drive::Raman(drive), trap, state.basis(), state.qubit_count())?;
    let dt = (0.999 * max_stable_dt(&h)).min(t_pi / 64.0);
    let opts = EvolveOptions::default().with_integrator(settings.integrator);
    Ok(evolve_numeric_with(&h, state, t_pi, dt, &opts)?.state)
}

/// Sideband phase gate with ion 1 as control: blue-sideband π pulse on ion
/// 1, a sign flip of |↓₂, n_ν = 1⟩, then the inverse blue-sideband π pulse.
pub fn cirac_zoller_phase_gate(
    state: &SpinMotionState,
    trap: &TrapConfig,
    settings: &CiracZollerSettings,
) -> Result<SpinMotionState> {
    if state.qubit_count() != 2 {
        return Err(Error::InvalidParameter("the phase gate needs two ions".into()));
    }
    let pops = state.mode_populations(settings.mode)?;
    let excited: f64 = pops.iter().skip(1).sum();
    if excited > GROUND_STATE_TOL {
        return Err(Error::Precondition(format!(
            "mode {} population outside n = 0 is {excited:.3e}",
            settings.mode
        )));
    }
    let mut psi = blue_pi_pulse(state, trap, settings, 0.0)?;
    let d = psi.basis().mode_dim();
    for s in (0..4).filter(|s| s & 1 == 1) {
        for other in 0..d {
            let idx = if settings.mode == 1 { psi.index(s, 1, other) } else { psi.index(s, other, 1) };
            psi.amplitudes_mut()[idx] = -psi.amplitudes()[idx];
        }
    }
    blue_pi_pulse(&psi, trap, settings, PI)
}

/// Phase gate conjugated by π/2 carrier pulses of phase φ on ion 2.
pub fn cirac_zoller_cnot(
    state: &SpinMotionState,
    trap: &TrapConfig,
    settings: &CiracZollerSettings,
    phi: f64,
) -> Result<SpinMotionState> {
    let s = carrier_pulse(state, PI / 2.0, phi, 1)?;
    let s = cirac_zoller_phase_gate(&s, trap, settings)?;
    carrier_pulse(&s, -PI / 2.0, phi, 1)
}

/// Ideal-pulse controlled-NOT built from [`carrier_unitary`] and the phase
/// gate table.
pub fn composed_cnot_table(phi: f64) -> TruthTable {
    let id = LinearOperator::identity(2);
    let r1 = id.kron(&carrier_unitary(PI / 2.0, phi));
    let r3 = id.kron(&carrier_unitary(-PI / 2.0, phi));
    let u = r3.matmul(&phase_gate_table().to_operator()).matmul(&r1);
    TruthTable::from_operator(&u).expect("4x4")
}

/// Spin-basis index from per-ion bits (0 = ↑, 1 = ↓).
pub(crate) fn ion_bits(s: usize) -> [usize; 2] {
    [s >> 1, s & 1]
}
