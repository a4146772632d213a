//! Trap and drive descriptions, interaction Hamiltonians, the forced
//! oscillator solution and numeric time evolution.
//!
//! Hamiltonians are returned divided by ħ, so their coefficients are angular
//! frequencies. Drives use the rotating-wave form in the interaction picture
//! of the trap and qubit, with a σ₊ term of a drive detuned by `d` from its
//! resonance rotating as e^{−i d t}.

mod evolve;
mod forced;

pub use evolve::{
    displace, displace_branches, displacement_operator, evolve_numeric, evolve_numeric_with, max_stable_dt, Evolution,
    EvolveOptions, Integrator, MAX_STEP_PHASE,
};
pub use forced::{alpha_for_rate, alpha_of_t, geometric_phase_of_t, phase_for_rate, round_trip_phase, Trajectory};

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    build_ladder, embed_spin, sigma_plus, spin_projector, FockBasis, KronOperator, KronTerm, Spin,
};
use crate::linalg::{LinearOperator, ZERO};
use crate::special::laguerre;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Tolerance on ω₂/ω₁ = √3.
const MODE_RATIO_TOL: f64 = 1e-12;

/// Two-ion axial trap: center-of-mass (mode 1) and stretch (mode 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    omega_1: f64,
    omega_2: f64,
    ion_mass: f64,
    delta_k: f64,
    ion_positions: [f64; 2],
}

impl TrapConfig {
    /// Builds the trap from the center-of-mass frequency; the stretch
    /// frequency is √3 ω₁.
    pub fn new(omega_1: f64, ion_mass: f64, delta_k: f64, ion_positions: [f64; 2]) -> Result<Self> {
        if !(omega_1 > 0.0) || !(ion_mass > 0.0) || !delta_k.is_finite() {
            return Err(Error::InvalidParameter("trap frequency and mass must be positive".into()));
        }
        Ok(Self { omega_1, omega_2: 3f64.sqrt() * omega_1, ion_mass, delta_k, ion_positions })
    }

    pub fn with_modes(
        omega_1: f64,
        omega_2: f64,
        ion_mass: f64,
        delta_k: f64,
        ion_positions: [f64; 2],
    ) -> Result<Self> {
        let t = Self::new(omega_1, ion_mass, delta_k, ion_positions)?;
        if ((omega_2 - t.omega_2) / t.omega_2).abs() > MODE_RATIO_TOL {
            return Err(Error::InvalidParameter(format!(
                "omega_2 / omega_1 = {} but two equal ions require sqrt(3)",
                omega_2 / omega_1
            )));
        }
        Ok(t)
    }

    /// Chooses Δk so that the stretch-mode Lamb–Dicke parameter equals
    /// `eta_2`, and spaces the ions by `periods` optical periods 2π/Δk.
    pub fn from_stretch_eta(omega_1: f64, ion_mass: f64, eta_2: f64, periods: u32) -> Result<Self> {
        let probe = Self::new(omega_1, ion_mass, 1.0, [0.0, 0.0])?;
        if !(eta_2 > 0.0) {
            return Err(Error::InvalidParameter("eta_2 must be positive".into()));
        }
        let delta_k = eta_2 * 2f64.sqrt() / probe.q(2)?;
        let half = periods as f64 * core::f64::consts::PI / delta_k;
        Self::new(omega_1, ion_mass, delta_k, [half, -half])
    }

    pub fn omega_1(&self) -> f64 {
        self.omega_1
    }

    pub fn omega_2(&self) -> f64 {
        self.omega_2
    }

    pub fn ion_mass(&self) -> f64 {
        self.ion_mass
    }

    pub fn delta_k(&self) -> f64 {
        self.delta_k
    }

    pub fn ion_positions(&self) -> [f64; 2] {
        self.ion_positions
    }

    pub fn with_positions(mut self, positions: [f64; 2]) -> Self {
        self.ion_positions = positions;
        self
    }

    pub fn with_delta_k(mut self, delta_k: f64) -> Self {
        self.delta_k = delta_k;
        self
    }

    pub fn omega(&self, mode: usize) -> Result<f64> {
        match mode {
            1 => Ok(self.omega_1),
            2 => Ok(self.omega_2),
            m => Err(Error::InvalidMode(m)),
        }
    }

    /// Ground-state spread q_ν = √(ħ / 2Mω_ν).
    pub fn q(&self, mode: usize) -> Result<f64> {
        Ok((HBAR / (2.0 * self.ion_mass * self.omega(mode)?)).sqrt())
    }

    /// Lamb–Dicke parameter of the trap's own Δk.
    pub fn eta(&self, mode: usize) -> Result<f64> {
        self.eta_for(mode, self.delta_k)
    }

    /// Lamb–Dicke parameter |Δk| q_ν / √2 for an arbitrary wave-vector
    /// difference.
    pub fn eta_for(&self, mode: usize, delta_k: f64) -> Result<f64> {
        Ok(delta_k.abs() * self.q(mode)? / 2f64.sqrt())
    }

    /// Optical phase ΔkX₀,ᵢ − Δφ seen by ion `ion` (0-based).
    pub fn ion_phase(&self, ion: usize, pair: FieldPair) -> f64 {
        pair.delta_k * self.ion_positions[ion] - pair.delta_phi
    }
}

/// Sign with which ion `ion` (0-based) participates in `mode`.
pub fn participation(mode: usize, ion: usize) -> f64 {
    if mode == 2 && ion == 1 {
        -1.0
    } else {
        1.0
    }
}

/// A pair of Raman fields, described by their wave-vector difference along
/// the trap axis and their phase difference.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldPair {
    pub delta_k: f64,
    pub delta_phi: f64,
}

impl FieldPair {
    pub fn new(delta_k: f64, delta_phi: f64) -> Self {
        Self { delta_k, delta_phi }
    }

    /// Copropagating pair: no momentum transfer.
    pub fn copropagating(delta_phi: f64) -> Self {
        Self { delta_k: 0.0, delta_phi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sideband {
    Carrier,
    Red { mode: usize, order: u32 },
    Blue { mode: usize, order: u32 },
}

impl Sideband {
    pub fn red(mode: usize) -> Self {
        Sideband::Red { mode, order: 1 }
    }

    pub fn blue(mode: usize) -> Self {
        Sideband::Blue { mode, order: 1 }
    }
}

/// Two-photon Raman drive of the carrier or a first sideband.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanDrive {
    /// Ω_i per ion (rad/s).
    pub base_rabi: [C64; 2],
    /// Laser detuning from the addressed resonance (rad/s).
    pub detuning: f64,
    pub sideband: Sideband,
    pub pair: FieldPair,
    /// χ per ion, indexed [ion][spin] with spin 0 = ↑ (rad/s).
    pub stark_shifts: [[f64; 2]; 2],
}

impl RamanDrive {
    pub fn resonant(rabi: f64, sideband: Sideband, pair: FieldPair) -> Self {
        Self {
            base_rabi: [C64::new(rabi, 0.0); 2],
            detuning: 0.0,
            sideband,
            pair,
            stark_shifts: [[0.0; 2]; 2],
        }
    }

    /// Same drive applied to one ion only.
    pub fn addressing(mut self, ion: usize) -> Self {
        self.base_rabi[1 - ion.min(1)] = ZERO;
        self
    }
}

/// Spin-dependent optical dipole force near a motional sideband (the
/// differential Stark-shift force).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarkForce {
    /// Force rate F q_ν/ħ per ion and spin, indexed [ion][spin] (rad/s),
    /// defined at the motional ground state.
    pub force_rate: [[C64; 2]; 2],
    /// δ: detuning of the beat note from the mode frequency (rad/s).
    pub detuning: f64,
    pub mode: usize,
    pub pair: FieldPair,
}

/// Simultaneous red and blue sideband drive producing a force in an
/// equatorial spin basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bichromatic {
    /// Ω_i per ion (rad/s), equal for both tones.
    pub rabi: [C64; 2],
    /// δ > 0: red tone detuned by +δ from the red sideband, blue by −δ from
    /// the blue sideband.
    pub detuning: f64,
    pub mode: usize,
    pub red: FieldPair,
    pub blue: FieldPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    Raman(RamanDrive),
    StarkForce(StarkForce),
    Bichromatic(Bichromatic),
}

/// Motional order of a Debye–Waller factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DwOrder {
    Carrier,
    FirstSideband(usize),
}

/// ⟨n|e^{iη(â+â†)}|n⟩ = e^{−η²/2} L_n(η²).
pub fn carrier_element(n: usize, eta: f64) -> f64 {
    let x = eta * eta;
    (-x / 2.0).exp() * laguerre(n, 0.0, x)
}

/// −i⟨n−1|e^{iη(â+â†)}|n⟩ = η e^{−η²/2} L¹_{n−1}(η²)/√n, for n ≥ 1. Odd in η.
pub fn sideband_element(n: usize, eta: f64) -> f64 {
    debug_assert!(n >= 1);
    let x = eta * eta;
    eta * (-x / 2.0).exp() * laguerre(n - 1, 1.0, x) / (n as f64).sqrt()
}

/// Debye–Waller factor for the carrier, or the full first-sideband matrix
/// element ⟨n_ν−1|·|n_ν⟩ on the driven mode times the spectator-mode
/// carrier factor.
pub fn debye_waller(n1: i64, n2: i64, eta1: f64, eta2: f64, order: DwOrder) -> Result<f64> {
    if n1 < 0 || n2 < 0 {
        return Err(Error::InvalidParameter("vibrational quantum numbers must be non-negative".into()));
    }
    let (n1, n2) = (n1 as usize, n2 as usize);
    match order {
        DwOrder::Carrier => Ok(carrier_element(n1, eta1) * carrier_element(n2, eta2)),
        DwOrder::FirstSideband(mode) => {
            let (n, eta, ns, etas) = match mode {
                1 => (n1, eta1, n2, eta2),
                2 => (n2, eta2, n1, eta1),
                m => return Err(Error::InvalidMode(m)),
            };
            if n == 0 {
                return Err(Error::InvalidParameter("sideband factor needs n >= 1 on the driven mode".into()));
            }
            Ok(sideband_element(n, eta) * carrier_element(ns, etas))
        }
    }
}

/// Diagonal carrier factor on one mode, or `None` when η = 0.
fn carrier_factor(basis: FockBasis, eta: f64) -> Option<LinearOperator> {
    if eta == 0.0 {
        return None;
    }
    let diag: Vec<C64> = (0..basis.mode_dim()).map(|n| C64::new(carrier_element(n, eta), 0.0)).collect();
    Some(LinearOperator::diagonal(&diag))
}

/// Lowering part of e^{iη(â+â†)} on one mode (first sideband, phase i
/// dropped).
pub fn sideband_lowering(basis: FockBasis, eta: f64) -> LinearOperator {
    let mut s = LinearOperator::zeros(basis.mode_dim());
    for n in 1..basis.mode_dim() {
        s[(n - 1, n)] = C64::new(sideband_element(n, eta), 0.0);
    }
    s
}

/// Sideband lowering operator normalized so ⟨0|·|1⟩ = 1; reduces to â as
/// η → 0.
pub fn dressed_lowering(basis: FockBasis, eta: f64) -> LinearOperator {
    let mut s = LinearOperator::zeros(basis.mode_dim());
    for n in 1..basis.mode_dim() {
        s[(n - 1, n)] = C64::new(laguerre(n - 1, 1.0, eta * eta) / (n as f64).sqrt(), 0.0);
    }
    s
}

/// Spectator carrier factor normalized to 1 at n = 0, or `None` when η = 0.
fn dressed_spectator(basis: FockBasis, eta: f64) -> Option<LinearOperator> {
    if eta == 0.0 {
        return None;
    }
    let diag: Vec<C64> = (0..basis.mode_dim()).map(|n| C64::new(laguerre(n, 0.0, eta * eta), 0.0)).collect();
    Some(LinearOperator::diagonal(&diag))
}

fn check_sideband(mode: usize, order: u32) -> Result<()> {
    if order != 1 {
        return Err(Error::UnsupportedSideband(format!("order {order}")));
    }
    if mode != 1 && mode != 2 {
        return Err(Error::InvalidMode(mode));
    }
    Ok(())
}

/// Places a mode-ν factor and a spectator factor into (mode1, mode2) slots.
fn place(mode: usize, driven: Option<LinearOperator>, spectator: Option<LinearOperator>) -> (Option<LinearOperator>, Option<LinearOperator>) {
    if mode == 1 {
        (driven, spectator)
    } else {
        (spectator, driven)
    }
}

/// Interaction Hamiltonian H(t)/ħ for `drive` on a `qubit_count` register.
/// The result carries its own time modulations; evaluate it densely with
/// [`KronOperator::to_dense_at`] or apply it matrix-free.
pub fn build_interaction_hamiltonian(
    drive: &Drive,
    trap: &TrapConfig,
    basis: FockBasis,
    qubit_count: usize,
) -> Result<KronOperator> {
    let mut h = KronOperator::new(basis, qubit_count)?;
    match drive {
        Drive::Raman(d) => build_raman(&mut h, d, trap, basis, qubit_count)?,
        Drive::StarkForce(f) => build_stark_force(&mut h, f, trap, basis, qubit_count)?,
        Drive::Bichromatic(b) => build_bichromatic(&mut h, b, trap, basis, qubit_count)?,
    }
    Ok(h)
}

fn build_raman(h: &mut KronOperator, d: &RamanDrive, trap: &TrapConfig, basis: FockBasis, qubits: usize) -> Result<()> {
    let eta1 = trap.eta_for(1, d.pair.delta_k)?;
    let eta2 = trap.eta_for(2, d.pair.delta_k)?;
    for ion in 0..qubits {
        let sp = embed_spin(&sigma_plus(), ion, qubits)?;
        let rabi = d.base_rabi[ion];
        if rabi != ZERO {
            let coeff = -0.5 * rabi * C64::from_polar(1.0, trap.ion_phase(ion, d.pair));
            let (m1, m2) = match d.sideband {
                Sideband::Carrier => (carrier_factor(basis, eta1), carrier_factor(basis, eta2)),
                Sideband::Red { mode, order } | Sideband::Blue { mode, order } => {
                    check_sideband(mode, order)?;
                    let (eta, eta_s) = if mode == 1 { (eta1, eta2) } else { (eta2, eta1) };
                    let s = sideband_lowering(basis, participation(mode, ion) * eta);
                    let s = if matches!(d.sideband, Sideband::Red { .. }) { s } else { s.dagger() };
                    place(mode, Some(s), carrier_factor(basis, eta_s))
                }
            };
            h.push_with_adjoint(KronTerm::new(coeff, sp, m1, m2).modulated(-d.detuning))?;
        }
        for spin in [Spin::Up, Spin::Down] {
            let chi = d.stark_shifts[ion][spin.index()];
            if chi != 0.0 {
                let p = embed_spin(&spin_projector(spin), ion, qubits)?;
                h.push(KronTerm::new(C64::new(-0.5 * chi, 0.0), p, None, None))?;
            }
        }
    }
    Ok(())
}

fn check_mode(mode: usize) -> Result<()> {
    if mode == 1 || mode == 2 {
        Ok(())
    } else {
        Err(Error::InvalidMode(mode))
    }
}

fn build_stark_force(h: &mut KronOperator, f: &StarkForce, trap: &TrapConfig, basis: FockBasis, qubits: usize) -> Result<()> {
    check_mode(f.mode)?;
    if f.detuning == 0.0 {
        return Err(Error::ResonantDrive);
    }
    let spectator = 3 - f.mode;
    let eta = trap.eta_for(f.mode, f.pair.delta_k)?;
    let eta_s = trap.eta_for(spectator, f.pair.delta_k)?;
    let raise = dressed_lowering(basis, eta).dagger();
    for ion in 0..qubits {
        let phase = C64::from_polar(participation(f.mode, ion), trap.ion_phase(ion, f.pair));
        let diag = [0.5 * f.force_rate[ion][0] * phase, 0.5 * f.force_rate[ion][1] * phase];
        if diag.iter().all(|c| *c == ZERO) {
            continue;
        }
        let spin = embed_spin(&LinearOperator::diagonal(&diag), ion, qubits)?;
        let (m1, m2) = place(f.mode, Some(raise.clone()), dressed_spectator(basis, eta_s));
        h.push_with_adjoint(KronTerm::new(C64::new(1.0, 0.0), spin, m1, m2).modulated(f.detuning))?;
    }
    Ok(())
}

fn build_bichromatic(h: &mut KronOperator, b: &Bichromatic, trap: &TrapConfig, basis: FockBasis, qubits: usize) -> Result<()> {
    check_mode(b.mode)?;
    if b.detuning == 0.0 {
        return Err(Error::ResonantDrive);
    }
    if b.red.delta_k == 0.0 || b.blue.delta_k == 0.0 {
        return Err(Error::InvalidParameter("sideband pairs need a non-zero wave-vector difference".into()));
    }
    let spectator = 3 - b.mode;
    for ion in 0..qubits {
        if b.rabi[ion] == ZERO {
            continue;
        }
        let sp = embed_spin(&sigma_plus(), ion, qubits)?;
        for (pair, red) in [(b.red, true), (b.blue, false)] {
            let eta = trap.eta_for(b.mode, pair.delta_k)?;
            let eta_s = trap.eta_for(spectator, pair.delta_k)?;
            let s = sideband_lowering(basis, participation(b.mode, ion) * eta);
            let (s, freq) = if red { (s, -b.detuning) } else { (s.dagger(), b.detuning) };
            let coeff = -0.5 * b.rabi[ion] * C64::from_polar(1.0, trap.ion_phase(ion, pair));
            let (m1, m2) = place(b.mode, Some(s), carrier_factor(basis, eta_s));
            h.push_with_adjoint(KronTerm::new(coeff, sp.clone(), m1, m2).modulated(freq))?;
        }
    }
    Ok(())
}

/// Number operator for `mode` lifted to the full space, as a factored
/// operator.
pub fn number_operator_full(basis: FockBasis, qubit_count: usize, mode: usize) -> Result<KronOperator> {
    let (a, ad) = build_ladder(basis, mode)?;
    let n = ad.matmul(&a);
    let mut op = KronOperator::new(basis, qubit_count)?;
    let id = LinearOperator::identity(1 << qubit_count);
    let (m1, m2) = place(mode, Some(n), None);
    op.push(KronTerm::new(C64::new(1.0, 0.0), id, m1, m2))?;
    Ok(op)
}
