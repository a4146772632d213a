//! Spin-dependent force gates. One loop in phase space at detuning δ lasts
//! T = 2π/δ and leaves each spin branch with phase Φ = 2π|g/2δ|², where g is
//! the branch's force rate.

use alloc::format;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{carrier_pulse, ion_bits, pulse_phase_for_optical_phase, truth_table_of, two_ion_phi_basis, GateOutcome};
use crate::dynamics::{
    alpha_for_rate, build_interaction_hamiltonian, carrier_element, displace_branches, evolve_numeric_with,
    max_stable_dt, participation, phase_for_rate, sideband_element, Bichromatic, Drive, EvolveOptions, Integrator,
    StarkForce, TrapConfig,
};
use crate::error::{Error, Result};
use crate::hilbert::{FockBasis, SpinMotionState};
use crate::noise::{ion_phases, wrapped_distance, BeamGeometry, GeometryKind, IonPhases};

use core::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Closed-form displaced-oscillator propagator per spin branch.
    Analytic,
    /// Time-stepped evolution of the full interaction Hamiltonian.
    #[default]
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// Reject drives that violate the gate's preconditions.
    #[default]
    Strict,
    /// Run anyway, to look at what the violation does.
    Exploratory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateOptions {
    pub engine: Engine,
    pub mode: GateMode,
    pub integrator: Integrator,
    /// Upper limit on the numeric step (s); the stability bound applies too.
    pub max_dt: Option<f64>,
    /// Tolerance of the precondition checks (rad, or relative force).
    pub precondition_tol: f64,
}

impl Default for GateOptions {
    fn default() -> Self {
        Self {
            engine: Engine::Numeric,
            mode: GateMode::Strict,
            integrator: Integrator::Midpoint,
            max_dt: None,
            precondition_tol: 1e-6,
        }
    }
}

impl GateOptions {
    pub fn analytic() -> Self {
        Self { engine: Engine::Analytic, ..Self::default() }
    }

    pub fn exploratory(mut self) -> Self {
        self.mode = GateMode::Exploratory;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }
}

/// One loop: T = 2π/|δ|.
pub fn gate_duration(detuning: f64) -> Result<f64> {
    if detuning == 0.0 {
        return Err(Error::ResonantDrive);
    }
    Ok(TAU / detuning.abs())
}

/// Stark force with per-spin rates ±δ/2 on both ions, so that anti-aligned
/// spins see |g| = δ and pick up Φ₀ = π/2 in one loop.
pub fn calibrated_sigma_z_drive(detuning: f64, pair: crate::dynamics::FieldPair) -> StarkForce {
    let f = C64::new(detuning / 2.0, 0.0);
    StarkForce { force_rate: [[f, -f], [f, -f]], detuning, mode: 2, pair }
}

/// Force rate g felt by each two-ion spin basis state.
pub fn sigma_z_branch_rates(trap: &TrapConfig, drive: &StarkForce) -> [C64; 4] {
    core::array::from_fn(|s| {
        let bits = ion_bits(s);
        (0..2)
            .map(|ion| {
                participation(drive.mode, ion)
                    * drive.force_rate[ion][bits[ion]]
                    * C64::from_polar(1.0, trap.ion_phase(ion, drive.pair))
            })
            .sum()
    })
}

fn check_aligned_cancel(rates: &[C64; 4], aligned: [usize; 2], tol: f64, what: &str) -> Result<()> {
    let scale = rates.iter().map(|g| g.norm()).fold(0.0, f64::max);
    for s in aligned {
        if rates[s].norm() > tol * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Precondition(format!(
                "{what}: aligned branch {s} feels force {:.3e} (max {scale:.3e})",
                rates[s].norm()
            )));
        }
    }
    Ok(())
}

/// σ_z gate for one loop of the Stark force. Strict mode requires the ion
/// spacing to be a whole number of optical periods and aligned spins to
/// feel no net force.
pub fn sigma_z_gate(
    trap: &TrapConfig,
    drive: &StarkForce,
    state: &SpinMotionState,
    opts: &GateOptions,
) -> Result<SpinMotionState> {
    check_pair_state(state)?;
    let t = gate_duration(drive.detuning)?;
    let rates = sigma_z_branch_rates(trap, drive);
    if opts.mode == GateMode::Strict {
        let x = trap.ion_positions();
        let spacing = wrapped_distance(drive.pair.delta_k * (x[0] - x[1]));
        if spacing > opts.precondition_tol {
            return Err(Error::Precondition(format!(
                "ion spacing is {spacing:.3e} rad away from a whole number of optical periods"
            )));
        }
        check_aligned_cancel(&rates, [0, 3], opts.precondition_tol, "sigma_z force")?;
    }
    match opts.engine {
        Engine::Analytic => apply_branch_loops(state, drive.mode, &rates, drive.detuning, t),
        Engine::Numeric => run_numeric(&Drive::StarkForce(*drive), trap, state, t, opts),
    }
}

fn check_pair_state(state: &SpinMotionState) -> Result<()> {
    if state.qubit_count() != 2 {
        return Err(Error::InvalidParameter("force gates act on two ions".into()));
    }
    Ok(())
}

/// e^{iΦ_s} D(α_s) on `mode` for each spin branch s.
fn apply_branch_loops(
    state: &SpinMotionState,
    mode: usize,
    rates: &[C64; 4],
    detuning: f64,
    t: f64,
) -> Result<SpinMotionState> {
    let mut out = state.clone();
    for (s, &g) in rates.iter().enumerate() {
        let alpha = alpha_for_rate(g, detuning, t)?;
        let phase = phase_for_rate(g, detuning, t)?;
        out = displace_branches(&out, mode, alpha, |x| x == s)?;
        let m = out.basis().motion_dim();
        let rot = C64::from_polar(1.0, phase);
        for v in &mut out.amplitudes_mut()[s * m..(s + 1) * m] {
            *v *= rot;
        }
    }
    Ok(out)
}

fn run_numeric(
    drive: &Drive,
    trap: &TrapConfig,
    state: &SpinMotionState,
    t: f64,
    opts: &GateOptions,
) -> Result<SpinMotionState> {
    let h = build_interaction_hamiltonian(drive, trap, state.basis(), state.qubit_count())?;
    let mut dt = 0.999 * max_stable_dt(&h);
    if let Some(limit) = opts.max_dt {
        dt = dt.min(limit);
    }
    let evo = EvolveOptions::default().with_integrator(opts.integrator);
    Ok(evolve_numeric_with(&h, state, t, dt, &evo)?.state)
}

/// Ground-state sideband matrix element η e^{−η²/2} on `mode` times the
/// spectator carrier factor, for the wave-vector difference `delta_k`.
fn ground_sideband_strength(trap: &TrapConfig, mode: usize, delta_k: f64) -> Result<f64> {
    let eta = trap.eta_for(mode, delta_k)?;
    let eta_s = trap.eta_for(3 - mode, delta_k)?;
    Ok(sideband_element(1, eta) * carrier_element(0, eta_s))
}

/// σ_φ drive on the stretch mode taking its red and blue pairs from
/// `geometry`, with Ω set so that anti-aligned spins (in the φ_S basis)
/// pick up Φ₀ = π/2 in one loop.
pub fn sigma_phi_drive(trap: &TrapConfig, geometry: &BeamGeometry, detuning: f64) -> Result<Bichromatic> {
    let red = geometry.red_pair()?;
    let blue = geometry.blue_pair()?;
    let strength = ground_sideband_strength(trap, 2, red.delta_k)?;
    if strength == 0.0 {
        return Err(Error::InvalidParameter("sideband coupling vanishes".into()));
    }
    let rabi = detuning.abs() / (2.0 * strength);
    Ok(Bichromatic { rabi: [C64::new(rabi, 0.0); 2], detuning, mode: 2, red, blue })
}

/// Spin and motion phases of each ion, including the phase of Ω_i.
pub fn sigma_phi_phases(trap: &TrapConfig, drive: &Bichromatic) -> [IonPhases; 2] {
    let mut p = ion_phases(trap, drive.red, drive.blue);
    for (ion, ph) in p.iter_mut().enumerate() {
        ph.spin -= drive.rabi[ion].arg();
    }
    p
}

/// Per-ion force rates c_i = −|Ω_i| s_i η D e^{−iφ_M,i}, so that
/// H = Σ_i ½ c_i σ_{φ_S,i} â† e^{iδt} + h.c.
pub fn sigma_phi_ion_rates(trap: &TrapConfig, drive: &Bichromatic) -> Result<[C64; 2]> {
    let strength = ground_sideband_strength(trap, drive.mode, drive.red.delta_k)?;
    let p = sigma_phi_phases(trap, drive);
    Ok(core::array::from_fn(|ion| {
        -drive.rabi[ion].norm() * participation(drive.mode, ion) * strength * C64::from_polar(1.0, -p[ion].motion)
    }))
}

/// σ_φ gate for one loop of the bichromatic drive. Strict mode requires
/// opposite forces on the two ions.
pub fn sigma_phi_gate(
    trap: &TrapConfig,
    drive: &Bichromatic,
    state: &SpinMotionState,
    opts: &GateOptions,
) -> Result<SpinMotionState> {
    check_pair_state(state)?;
    let t = gate_duration(drive.detuning)?;
    let c = sigma_phi_ion_rates(trap, drive)?;
    // branch rates in the φ_S basis, bit 0 = eigenvalue +1
    let rates: [C64; 4] = core::array::from_fn(|s| {
        let b = ion_bits(s);
        let l = |bit: usize| if bit == 0 { 1.0 } else { -1.0 };
        c[0] * l(b[0]) + c[1] * l(b[1])
    });
    if opts.mode == GateMode::Strict {
        check_aligned_cancel(&rates, [0, 3], opts.precondition_tol, "sigma_phi force phases")?;
    }
    match opts.engine {
        Engine::Analytic => {
            let p = sigma_phi_phases(trap, drive);
            let v = two_ion_phi_basis(p[0].spin, p[1].spin);
            let mut rotated = state.clone();
            rotated.apply_spin_operator(&v.dagger())?;
            let mut out = apply_branch_loops(&rotated, drive.mode, &rates, drive.detuning, t)?;
            out.apply_spin_operator(&v)?;
            Ok(out)
        }
        Engine::Numeric => run_numeric(&Drive::Bichromatic(*drive), trap, state, t, opts),
    }
}

/// Phase reference of the π/2 rotations around a σ_φ gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationReference {
    /// Carrier driven by the geometry's own non-copropagating pair.
    NonCopropagatingCarrier,
    /// Copropagating Raman beams or microwaves at a fixed phase.
    Copropagating { phase: f64 },
}

/// Rotation phase each ion receives from `reference`.
pub fn wrapper_phases(trap: &TrapConfig, geometry: &BeamGeometry, reference: RotationReference) -> Result<[f64; 2]> {
    match (geometry.configuration, reference) {
        (GeometryKind::PhaseInsensitive, RotationReference::NonCopropagatingCarrier) => Err(Error::GeometryMismatch(
            "phase-insensitive layout needs a copropagating rotation reference".into(),
        )),
        (GeometryKind::PhaseSensitive, RotationReference::Copropagating { .. }) => Err(Error::GeometryMismatch(
            "phase-sensitive layout needs the non-copropagating carrier as rotation reference".into(),
        )),
        (_, RotationReference::NonCopropagatingCarrier) => {
            let cp = geometry.carrier_pair()?;
            Ok(core::array::from_fn(|ion| pulse_phase_for_optical_phase(trap.ion_phase(ion, cp))))
        }
        (_, RotationReference::Copropagating { phase }) => Ok([phase; 2]),
    }
}

/// π/2 rotations at φ_S,i on both ions, the σ_φ gate, then −π/2 rotations,
/// all phases drawn from the same beams. Equals the σ_z gate when the
/// rotation phases track φ_S,i; any other reference is rejected.
pub fn ramsey_wrapped_gate(
    trap: &TrapConfig,
    geometry: &BeamGeometry,
    reference: RotationReference,
    detuning: f64,
    basis: FockBasis,
    opts: &GateOptions,
) -> Result<GateOutcome> {
    geometry.validate()?;
    let drive = sigma_phi_drive(trap, geometry, detuning)?;
    let psi = wrapper_phases(trap, geometry, reference)?;
    let phases = sigma_phi_phases(trap, &drive);
    for ion in 0..2 {
        let miss = wrapped_distance(psi[ion] - phases[ion].spin);
        if miss > 1e-9 {
            return Err(Error::GeometryMismatch(format!(
                "rotation phase of ion {} misses the spin phase by {miss:.3e} rad",
                ion + 1
            )));
        }
    }
    truth_table_of(basis, |s| {
        let s = carrier_pulse(s, PI / 2.0, psi[0], 0)?;
        let s = carrier_pulse(&s, PI / 2.0, psi[1], 1)?;
        let s = sigma_phi_gate(trap, &drive, &s, opts)?;
        let s = carrier_pulse(&s, -PI / 2.0, psi[0], 0)?;
        carrier_pulse(&s, -PI / 2.0, psi[1], 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{FieldPair, AMU};
    use crate::gates::{sigma_phi_table, sigma_z_table};
    use crate::noise::SidebandPlan;

    fn trap() -> TrapConfig {
        TrapConfig::from_stretch_eta(2.0 * PI * 2.0e6, 9.0 * AMU, 0.05, 6).unwrap()
    }

    #[test]
    fn calibrated_rates_give_quarter_turn() {
        let t = trap();
        let d = calibrated_sigma_z_drive(2.0 * PI * 3e4, FieldPair::new(t.delta_k(), 0.3));
        let r = sigma_z_branch_rates(&t, &d);
        assert!(r[0].norm() < 1e-9 && r[3].norm() < 1e-9);
        let phi = phase_for_rate(r[1], d.detuning, gate_duration(d.detuning).unwrap()).unwrap();
        assert!((phi - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_z_analytic_table() {
        let t = trap();
        let d = calibrated_sigma_z_drive(2.0 * PI * 3e4, FieldPair::new(t.delta_k(), 0.3));
        let b = FockBasis::new(12).unwrap();
        let out = truth_table_of(b, |s| sigma_z_gate(&t, &d, s, &GateOptions::analytic())).unwrap();
        assert!(out.table.max_deviation(&sigma_z_table()) < 1e-8);
        assert!(out.min_purity() > 1.0 - 1e-8);
    }

    #[test]
    fn sigma_z_spacing_precondition() {
        let t = trap();
        let x = t.ion_positions();
        let off = t.with_positions([x[0] + 0.3 / t.delta_k(), x[1]]);
        let d = calibrated_sigma_z_drive(2.0 * PI * 3e4, FieldPair::new(t.delta_k(), 0.0));
        let b = FockBasis::new(12).unwrap();
        let s = SpinMotionState::basis_state(b, &[crate::hilbert::Spin::Up; 2], 0, 0).unwrap();
        assert!(matches!(sigma_z_gate(&off, &d, &s, &GateOptions::analytic()), Err(Error::Precondition(_))));
        let moved = sigma_z_gate(&off, &d, &s, &GateOptions::analytic().exploratory()).unwrap();
        // the loop still closes, but aligned spins now pick up a phase
        let a = moved.amplitude(0, 0, 0);
        assert!((a.norm() - 1.0).abs() < 1e-8);
        assert!(a.arg().abs() > 0.01);
    }

    fn plan() -> SidebandPlan {
        SidebandPlan { omega_a: 2.3e15, qubit: 2.0 * PI * 1.25e10, mode_frequency: 2.0 * PI * 3.46e6, delta: 2.0 * PI * 4e4 }
    }

    #[test]
    fn sigma_phi_analytic_matches_rotated_table() {
        let t = trap();
        let g = BeamGeometry::phase_sensitive(plan(), t.delta_k()).with_path_shift(0.7);
        let d = sigma_phi_drive(&t, &g, plan().delta).unwrap();
        let p = sigma_phi_phases(&t, &d);
        let b = FockBasis::new(12).unwrap();
        let out = truth_table_of(b, |s| sigma_phi_gate(&t, &d, s, &GateOptions::analytic())).unwrap();
        assert!(out.table.max_deviation(&sigma_phi_table(p[0].spin, p[1].spin)) < 1e-8);
    }

    #[test]
    fn wrapper_reference_rules() {
        let t = trap();
        let s = BeamGeometry::phase_sensitive(plan(), t.delta_k());
        let i = BeamGeometry::phase_insensitive(plan(), t.delta_k());
        let b = FockBasis::new(8).unwrap();
        let opts = GateOptions::analytic();
        let bad = ramsey_wrapped_gate(&t, &s, RotationReference::Copropagating { phase: 0.0 }, plan().delta, b, &opts);
        assert!(matches!(bad, Err(Error::GeometryMismatch(_))));
        let bad = ramsey_wrapped_gate(&t, &i, RotationReference::NonCopropagatingCarrier, plan().delta, b, &opts);
        assert!(matches!(bad, Err(Error::GeometryMismatch(_))));
        let wrong = ramsey_wrapped_gate(&t, &i, RotationReference::Copropagating { phase: 0.4 }, plan().delta, b, &opts);
        assert!(matches!(wrong, Err(Error::GeometryMismatch(_))));
        for dphi in [0.0, 1.0, 2.0, 3.0] {
            let out = ramsey_wrapped_gate(
                &t,
                &s.with_path_shift(dphi),
                RotationReference::NonCopropagatingCarrier,
                plan().delta,
                b,
                &opts,
            )
            .unwrap();
            assert!(out.table.max_deviation(&sigma_z_table()) < 1e-8);
        }
    }
}
