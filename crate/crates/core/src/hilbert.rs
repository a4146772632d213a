//! Truncated spin ⊗ Fock Hilbert space.
//!
//! Basis ordering is fixed for the whole crate: spin indices vary slowest,
//! then the mode-1 (center-of-mass) Fock index, then the mode-2 (stretch)
//! Fock index fastest. Spin index 0 is |↑⟩ and 1 is |↓⟩, so two-qubit spin
//! labels run |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, LinearOperator, ONE, ZERO};

/// Number of motional modes kept (center-of-mass and stretch).
pub const MODE_COUNT: usize = 2;

/// Default cap on total tensor dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 20;

/// Norm tolerance every unitary step must respect.
pub const NORM_TOL: f64 = 1e-12;

/// Fock truncation shared by both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockBasis {
    n_max: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        Ok(Self { n_max })
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Dimension of a single mode's space.
    #[inline]
    pub fn mode_dim(&self) -> usize {
        self.n_max + 1
    }

    #[inline]
    pub fn mode_count(&self) -> usize {
        MODE_COUNT
    }

    #[inline]
    pub fn motion_dim(&self) -> usize {
        self.mode_dim() * self.mode_dim()
    }
}

/// Qubit basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

/// The four two-qubit computational inputs in table order.
pub const TWO_QUBIT_INPUTS: [[Spin; 2]; 4] = [
    [Spin::Up, Spin::Up],
    [Spin::Up, Spin::Down],
    [Spin::Down, Spin::Up],
    [Spin::Down, Spin::Down],
];

/// Amplitude vector over spins ⊗ mode 1 ⊗ mode 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMotionState {
    basis: FockBasis,
    qubit_count: usize,
    amplitudes: Vec<C64>,
}

impl SpinMotionState {
    pub fn from_amplitudes(basis: FockBasis, qubit_count: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_qubits(qubit_count)?;
        let want = (1usize << qubit_count) * basis.motion_dim();
        if amplitudes.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "expected {want} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        Ok(Self { basis, qubit_count, amplitudes })
    }

    /// Product of a spin configuration with Fock states |n1⟩|n2⟩.
    pub fn basis_state(basis: FockBasis, spins: &[Spin], n1: usize, n2: usize) -> Result<Self> {
        check_qubits(spins.len())?;
        if n1 > basis.n_max() || n2 > basis.n_max() {
            return Err(Error::InvalidParameter(format!("Fock level beyond n_max = {}", basis.n_max())));
        }
        let mut amps = vec![ZERO; (1 << spins.len()) * basis.motion_dim()];
        let s = spin_index(spins);
        amps[(s * basis.mode_dim() + n1) * basis.mode_dim() + n2] = ONE;
        Ok(Self { basis, qubit_count: spins.len(), amplitudes: amps })
    }

    /// Product state from a spin vector and two single-mode vectors.
    pub fn product(basis: FockBasis, spin: &[C64], mode1: &[C64], mode2: &[C64]) -> Result<Self> {
        let qubits = match spin.len() {
            2 => 1,
            4 => 2,
            n => return Err(Error::DimensionMismatch(format!("spin vector of length {n}"))),
        };
        let d = basis.mode_dim();
        if mode1.len() != d || mode2.len() != d {
            return Err(Error::DimensionMismatch(format!("mode vectors must have length {d}")));
        }
        let amps = tensor_states(&[spin, mode1, mode2])?;
        Ok(Self { basis, qubit_count: qubits, amplitudes: amps })
    }

    #[inline]
    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    #[inline]
    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    #[inline]
    pub fn spin_dim(&self) -> usize {
        1 << self.qubit_count
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    #[inline]
    pub fn index(&self, spin: usize, n1: usize, n2: usize) -> usize {
        let d = self.basis.mode_dim();
        (spin * d + n1) * d + n2
    }

    pub fn amplitude(&self, spin: usize, n1: usize, n2: usize) -> C64 {
        self.amplitudes[self.index(spin, n1, n2)]
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in self.amplitudes.iter_mut() {
                *a /= n;
            }
        }
        self
    }

    /// Same state multiplied by a global phase factor.
    pub fn with_phase(mut self, phase: f64) -> Self {
        let f = C64::from_polar(1.0, phase);
        for a in self.amplitudes.iter_mut() {
            *a *= f;
        }
        self
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    /// arg⟨reference|self⟩: the global phase of `self` relative to `reference`.
    pub fn phase_relative_to(&self, reference: &Self) -> Result<f64> {
        Ok(reference.inner(self)?.arg())
    }

    /// Motional amplitudes belonging to one spin basis index.
    pub fn spin_component(&self, spin: usize) -> Vec<C64> {
        let m = self.basis.motion_dim();
        self.amplitudes[spin * m..(spin + 1) * m].to_vec()
    }

    /// Population of mode `mode` (1 or 2) at each Fock level.
    pub fn mode_populations(&self, mode: usize) -> Result<Vec<f64>> {
        check_mode(mode)?;
        let d = self.basis.mode_dim();
        let mut pops = vec![0.0; d];
        for s in 0..self.spin_dim() {
            for n1 in 0..d {
                for n2 in 0..d {
                    let p = self.amplitude(s, n1, n2).norm_sqr();
                    pops[if mode == 1 { n1 } else { n2 }] += p;
                }
            }
        }
        Ok(pops)
    }

    /// Highest Fock level in either mode whose population exceeds `threshold`.
    pub fn max_populated_level(&self, threshold: f64) -> usize {
        let mut top = 0;
        for mode in 1..=MODE_COUNT {
            let pops = self.mode_populations(mode).expect("valid mode");
            if let Some(n) = pops.iter().rposition(|&p| p > threshold) {
                top = top.max(n);
            }
        }
        top
    }

    /// Total population at Fock levels above `n_max − margin`, summed over
    /// both modes.
    pub fn leakage(&self, margin: usize) -> f64 {
        let d = self.basis.mode_dim();
        let start = (self.basis.n_max() + 1).saturating_sub(margin);
        let mut total = 0.0;
        for mode in 1..=MODE_COUNT {
            let pops = self.mode_populations(mode).expect("valid mode");
            total += pops[start.min(d)..].iter().sum::<f64>();
        }
        total
    }

    /// Applies a single-mode operator to `mode`, restricted to the spin
    /// basis indices for which `spin_filter` returns true.
    pub fn apply_mode_operator(
        &mut self,
        mode: usize,
        op: &LinearOperator,
        spin_filter: impl Fn(usize) -> bool,
    ) -> Result<()> {
        check_mode(mode)?;
        let d = self.basis.mode_dim();
        if op.dim() != d {
            return Err(Error::DimensionMismatch(format!("mode operator must be {d}x{d}")));
        }
        let mut buf = vec![ZERO; d];
        for s in 0..self.spin_dim() {
            if !spin_filter(s) {
                continue;
            }
            for other in 0..d {
                let idx = |n: usize| if mode == 1 { (s * d + n) * d + other } else { (s * d + other) * d + n };
                for (n, b) in buf.iter_mut().enumerate() {
                    *b = self.amplitudes[idx(n)];
                }
                let out = op.apply(&buf);
                for (n, v) in out.into_iter().enumerate() {
                    let i = idx(n);
                    self.amplitudes[i] = v;
                }
            }
        }
        Ok(())
    }

    /// Applies an operator on the full spin register (2x2 or 4x4), leaving
    /// the motion untouched.
    pub fn apply_spin_operator(&mut self, op: &LinearOperator) -> Result<()> {
        let sd = self.spin_dim();
        if op.dim() != sd {
            return Err(Error::DimensionMismatch(format!("spin operator must be {sd}x{sd}")));
        }
        let m = self.basis.motion_dim();
        let old = self.amplitudes.clone();
        for r in 0..sd {
            let row = &mut self.amplitudes[r * m..(r + 1) * m];
            for x in row.iter_mut() {
                *x = ZERO;
            }
            for c in 0..sd {
                let v = op[(r, c)];
                if v == ZERO {
                    continue;
                }
                for (x, y) in row.iter_mut().zip(&old[c * m..(c + 1) * m]) {
                    *x += v * y;
                }
            }
        }
        Ok(())
    }

    pub fn truncation(&self) -> TruncationReport {
        TruncationReport {
            n_max: self.basis.n_max(),
            max_populated_level: self.max_populated_level(1e-12),
            leakage_top5: self.leakage(5),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis || self.qubit_count != other.qubit_count {
            return Err(Error::DimensionMismatch("states live in different spaces".into()));
        }
        Ok(())
    }
}

/// Fock-truncation diagnostic reported alongside every simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub n_max: usize,
    pub max_populated_level: usize,
    /// Population in the top five retained levels of both modes.
    pub leakage_top5: f64,
}

pub fn spin_index(spins: &[Spin]) -> usize {
    spins.iter().fold(0, |acc, s| (acc << 1) | s.index())
}

fn check_qubits(q: usize) -> Result<()> {
    if q == 1 || q == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("qubit_count must be 1 or 2, got {q}")))
    }
}

fn check_mode(mode: usize) -> Result<()> {
    if mode == 1 || mode == 2 {
        Ok(())
    } else {
        Err(Error::InvalidMode(mode))
    }
}

/// Annihilation and creation operators (â, â†) on one mode, with
/// â†|n_max⟩ = 0.
pub fn build_ladder(basis: FockBasis, mode: usize) -> Result<(LinearOperator, LinearOperator)> {
    check_mode(mode)?;
    let d = basis.mode_dim();
    let mut a = LinearOperator::zeros(d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let adag = a.dagger();
    Ok((a, adag))
}

/// Number operator â†â on one mode.
pub fn number_operator(basis: FockBasis) -> LinearOperator {
    let diag: Vec<C64> = (0..basis.mode_dim()).map(|n| C64::new(n as f64, 0.0)).collect();
    LinearOperator::diagonal(&diag)
}

/// σ₊ = |↑⟩⟨↓|.
pub fn sigma_plus() -> LinearOperator {
    let mut m = LinearOperator::zeros(2);
    m[(0, 1)] = ONE;
    m
}

/// σ₋ = |↓⟩⟨↑|.
pub fn sigma_minus() -> LinearOperator {
    sigma_plus().dagger()
}

/// σ_z with |↑⟩ as the +1 eigenstate.
pub fn sigma_z() -> LinearOperator {
    LinearOperator::diagonal(&[ONE, -ONE])
}

/// Projector |m⟩⟨m| for one qubit.
pub fn spin_projector(spin: Spin) -> LinearOperator {
    let mut m = LinearOperator::zeros(2);
    m[(spin.index(), spin.index())] = ONE;
    m
}

/// Lifts a single-qubit operator onto qubit `qubit` (0-based) of a
/// `qubit_count` register.
pub fn embed_spin(op: &LinearOperator, qubit: usize, qubit_count: usize) -> Result<LinearOperator> {
    check_qubits(qubit_count)?;
    if qubit >= qubit_count {
        return Err(Error::InvalidQubit(qubit));
    }
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch("single-qubit operator must be 2x2".into()));
    }
    let id = LinearOperator::identity(2);
    Ok(match (qubit_count, qubit) {
        (1, _) => op.clone(),
        (_, 0) => op.kron(&id),
        _ => id.kron(op),
    })
}

/// Kronecker product of operators in the given order, with the default
/// dimension cap.
pub fn tensor_ops(factors: &[&LinearOperator]) -> Result<LinearOperator> {
    tensor_ops_capped(factors, DEFAULT_DIMENSION_CAP)
}

pub fn tensor_ops_capped(factors: &[&LinearOperator], cap: usize) -> Result<LinearOperator> {
    let dim = factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.dim()));
    match dim {
        Some(d) if d <= cap => {}
        Some(d) => return Err(Error::DimensionOverflow { dim: d, cap }),
        None => return Err(Error::DimensionOverflow { dim: usize::MAX, cap }),
    }
    let mut iter = factors.iter();
    let first = match iter.next() {
        Some(f) => (*f).clone(),
        None => return Ok(LinearOperator::identity(1)),
    };
    Ok(iter.fold(first, |acc, f| acc.kron(f)))
}

/// Kronecker product of state vectors in the given order.
pub fn tensor_states(factors: &[&[C64]]) -> Result<Vec<C64>> {
    let dim = factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.len()));
    match dim {
        Some(d) if d <= DEFAULT_DIMENSION_CAP => {}
        Some(d) => return Err(Error::DimensionOverflow { dim: d, cap: DEFAULT_DIMENSION_CAP }),
        None => return Err(Error::DimensionOverflow { dim: usize::MAX, cap: DEFAULT_DIMENSION_CAP }),
    }
    let mut out = vec![ONE];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.len());
        for a in &out {
            for b in f.iter() {
                next.push(a * b);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Truncated coherent-state amplitudes e^{−|α|²/2} αⁿ/√n!, renormalized on
/// the retained levels.
pub fn coherent_amplitudes(basis: FockBasis, alpha: C64) -> Vec<C64> {
    let d = basis.mode_dim();
    let mut amps = Vec::with_capacity(d);
    let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..d {
        if n > 0 {
            term = term * alpha / (n as f64).sqrt();
        }
        amps.push(term);
    }
    let norm = linalg::norm(&amps);
    amps.iter().map(|a| a / norm).collect()
}

/// Single-mode Fock state |n⟩.
pub fn fock_amplitudes(basis: FockBasis, n: usize) -> Vec<C64> {
    let mut v = vec![ZERO; basis.mode_dim()];
    v[n.min(basis.n_max())] = ONE;
    v
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &SpinMotionState, b: &SpinMotionState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Tr(ρ_spin²) after tracing out both motional modes.
pub fn reduced_spin_purity(state: &SpinMotionState) -> Result<f64> {
    if state.qubit_count() != 2 {
        return Err(Error::InvalidParameter("reduced_spin_purity expects a two-qubit state".into()));
    }
    let rho = reduced_spin_density(state);
    Ok(rho.entries().iter().map(|e| e.norm_sqr()).sum())
}

/// ρ_spin with both modes traced out.
pub fn reduced_spin_density(state: &SpinMotionState) -> LinearOperator {
    let m = state.basis().motion_dim();
    let sd = state.spin_dim();
    let amps = state.amplitudes();
    LinearOperator::from_fn(sd, |r, c| {
        linalg::inner(&amps[c * m..(c + 1) * m], &amps[r * m..(r + 1) * m])
    })
}

/// Sparse view of a dense factor, used for fast Kronecker application.
#[derive(Debug, Clone, PartialEq)]
enum Factor {
    Identity,
    Sparse { dense: LinearOperator, entries: Vec<(usize, usize, C64)> },
}

impl Factor {
    fn from_op(op: Option<LinearOperator>) -> Self {
        match op {
            None => Factor::Identity,
            Some(dense) => {
                let n = dense.dim();
                let mut entries = Vec::new();
                for r in 0..n {
                    for c in 0..n {
                        let v = dense[(r, c)];
                        if v != ZERO {
                            entries.push((r, c, v));
                        }
                    }
                }
                Factor::Sparse { dense, entries }
            }
        }
    }

    fn spectral_bound(&self) -> f64 {
        match self {
            Factor::Identity => 1.0,
            Factor::Sparse { dense, .. } => (dense.one_norm() * dense.inf_norm()).sqrt(),
        }
    }

    fn dense(&self, d: usize) -> LinearOperator {
        match self {
            Factor::Identity => LinearOperator::identity(d),
            Factor::Sparse { dense, .. } => dense.clone(),
        }
    }
}

/// One term `coeff · e^{i·frequency·t} · S ⊗ M₁ ⊗ M₂` of a factored operator.
#[derive(Debug, Clone, PartialEq)]
pub struct KronTerm {
    coeff: C64,
    frequency: f64,
    spin: Factor,
    mode1: Factor,
    mode2: Factor,
}

impl KronTerm {
    /// `None` for a mode factor means identity on that mode.
    pub fn new(
        coeff: C64,
        spin: LinearOperator,
        mode1: Option<LinearOperator>,
        mode2: Option<LinearOperator>,
    ) -> Self {
        Self {
            coeff,
            frequency: 0.0,
            spin: Factor::from_op(Some(spin)),
            mode1: Factor::from_op(mode1),
            mode2: Factor::from_op(mode2),
        }
    }

    /// Attaches a time modulation e^{i·frequency·t} (rad/s).
    pub fn modulated(mut self, frequency: f64) -> Self {
        self.frequency = frequency;
        self
    }

    pub fn coeff(&self) -> C64 {
        self.coeff
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    #[inline]
    pub fn coefficient_at(&self, t: f64) -> C64 {
        if self.frequency == 0.0 {
            self.coeff
        } else {
            self.coeff * C64::from_polar(1.0, self.frequency * t)
        }
    }

    fn spectral_bound(&self) -> f64 {
        self.spin.spectral_bound() * self.mode1.spectral_bound() * self.mode2.spectral_bound()
    }

    fn adjoint(&self) -> Self {
        let adj = |f: &Factor| match f {
            Factor::Identity => None,
            Factor::Sparse { dense, .. } => Some(dense.dagger()),
        };
        let spin = match &self.spin {
            Factor::Identity => unreachable!("spin factor is always explicit"),
            Factor::Sparse { dense, .. } => dense.dagger(),
        };
        KronTerm::new(self.coeff.conj(), spin, adj(&self.mode1), adj(&self.mode2))
            .modulated(-self.frequency)
    }
}

/// Operator on the full space stored as a sum of Kronecker terms. Terms may
/// carry time modulations, making this a time-dependent Hamiltonian builder
/// as well.
#[derive(Debug, Clone, PartialEq)]
pub struct KronOperator {
    basis: FockBasis,
    qubit_count: usize,
    terms: Vec<KronTerm>,
}

impl KronOperator {
    pub fn new(basis: FockBasis, qubit_count: usize) -> Result<Self> {
        check_qubits(qubit_count)?;
        Ok(Self { basis, qubit_count, terms: Vec::new() })
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn terms(&self) -> &[KronTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: KronTerm) -> Result<()> {
        let d = self.basis.mode_dim();
        let sd = 1 << self.qubit_count;
        let ok_spin = matches!(&term.spin, Factor::Sparse { dense, .. } if dense.dim() == sd);
        let ok_mode = |f: &Factor| match f {
            Factor::Identity => true,
            Factor::Sparse { dense, .. } => dense.dim() == d,
        };
        if !ok_spin || !ok_mode(&term.mode1) || !ok_mode(&term.mode2) {
            return Err(Error::DimensionMismatch("Kronecker term does not match the space".into()));
        }
        self.terms.push(term);
        Ok(())
    }

    /// Appends a term together with its Hermitian conjugate.
    pub fn push_with_adjoint(&mut self, term: KronTerm) -> Result<()> {
        let adj = term.adjoint();
        self.push(term)?;
        self.push(adj)
    }

    pub fn extend(&mut self, other: KronOperator) -> Result<()> {
        for t in other.terms {
            self.push(t)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        (1 << self.qubit_count) * self.basis.motion_dim()
    }

    /// Coefficients of every term at time `t`.
    pub fn coefficients_at(&self, t: f64) -> Vec<C64> {
        self.terms.iter().map(|term| term.coefficient_at(t)).collect()
    }

    /// Upper bound on the spectral norm at any time.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm() * t.spectral_bound()).sum()
    }

    /// out = Σ_k coeffs[k] · T_k · input.
    pub fn apply_with(&self, coeffs: &[C64], input: &[C64], out: &mut [C64]) {
        debug_assert_eq!(coeffs.len(), self.terms.len());
        let d = self.basis.mode_dim();
        for o in out.iter_mut() {
            *o = ZERO;
        }
        for (term, &c) in self.terms.iter().zip(coeffs) {
            if c == ZERO {
                continue;
            }
            let spin_entries = match &term.spin {
                Factor::Sparse { entries, .. } => entries,
                Factor::Identity => unreachable!(),
            };
            for &(so, si, vs) in spin_entries {
                let cs = c * vs;
                match &term.mode1 {
                    Factor::Identity => {
                        for n1 in 0..d {
                            apply_mode2(
                                &term.mode2,
                                cs,
                                &input[(si * d + n1) * d..(si * d + n1 + 1) * d],
                                &mut out[(so * d + n1) * d..(so * d + n1 + 1) * d],
                            );
                        }
                    }
                    Factor::Sparse { entries, .. } => {
                        for &(m1o, m1i, v1) in entries {
                            apply_mode2(
                                &term.mode2,
                                cs * v1,
                                &input[(si * d + m1i) * d..(si * d + m1i + 1) * d],
                                &mut out[(so * d + m1o) * d..(so * d + m1o + 1) * d],
                            );
                        }
                    }
                }
            }
        }
    }

    pub fn apply_at(&self, t: f64, input: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; input.len()];
        self.apply_with(&self.coefficients_at(t), input, &mut out);
        out
    }

    /// Dense matrix of the operator at time `t` (for small spaces only).
    pub fn to_dense_at(&self, t: f64) -> Result<LinearOperator> {
        let dim = self.dim();
        if dim > 4096 {
            return Err(Error::DimensionOverflow { dim, cap: 4096 });
        }
        let d = self.basis.mode_dim();
        let mut total = LinearOperator::zeros(dim);
        for term in &self.terms {
            let spin = match &term.spin {
                Factor::Sparse { dense, .. } => dense.clone(),
                Factor::Identity => unreachable!(),
            };
            let m = spin.kron(&term.mode1.dense(d)).kron(&term.mode2.dense(d));
            total = &total + &m.scale(term.coefficient_at(t));
        }
        Ok(total)
    }
}

#[inline]
fn apply_mode2(f: &Factor, c: C64, input: &[C64], out: &mut [C64]) {
    match f {
        Factor::Identity => {
            for (o, i) in out.iter_mut().zip(input) {
                *o += c * i;
            }
        }
        Factor::Sparse { entries, .. } => {
            for &(o, i, v) in entries {
                out[o] += c * v * input[i];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize) -> FockBasis {
        FockBasis::new(n).unwrap()
    }

    #[test]
    fn ladder_on_small_basis() {
        let b = basis(1);
        let (a, _) = build_ladder(b, 1).unwrap();
        let out = a.apply(&fock_amplitudes(b, 1));
        assert_eq!(out[0], ONE);
        let vac = a.apply(&fock_amplitudes(b, 0));
        assert!(vac.iter().all(|x| *x == ZERO));
    }

    #[test]
    fn ladder_commutator_is_identity_below_cutoff() {
        let b = basis(12);
        let (a, ad) = build_ladder(b, 2).unwrap();
        let comm = a.commutator(&ad);
        for r in 0..b.n_max() {
            for c in 0..b.n_max() {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((comm[(r, c)] - C64::new(want, 0.0)).norm() <= 1e-13);
            }
        }
        // the truncation shows up only in the last diagonal entry
        assert!((comm[(12, 12)].re + 12.0).abs() < 1e-12);
    }

    #[test]
    fn ladder_rejects_bad_mode() {
        assert_eq!(build_ladder(basis(3), 3).unwrap_err(), Error::InvalidMode(3));
        assert_eq!(build_ladder(basis(3), 0).unwrap_err(), Error::InvalidMode(0));
    }

    #[test]
    fn ladder_adjoint_relation_is_exact() {
        let b = basis(9);
        let (a, ad) = build_ladder(b, 1).unwrap();
        for m in 0..10 {
            for n in 0..10 {
                assert_eq!(ad[(m, n)], a[(n, m)].conj());
            }
        }
    }

    #[test]
    fn tensor_identities_and_spin_flip() {
        let id2 = LinearOperator::identity(2);
        let id4 = tensor_ops(&[&id2, &id2]).unwrap();
        assert_eq!(id4, LinearOperator::identity(4));

        let sp = tensor_ops(&[&sigma_plus(), &id2]).unwrap();
        let down_down = [ZERO, ZERO, ZERO, ONE];
        let out = sp.apply(&down_down);
        assert_eq!(out, vec![ZERO, ONE, ZERO, ZERO]); // |↑↓⟩
    }

    #[test]
    fn tensor_creation_on_both_modes() {
        let b = basis(3);
        let (_, ad) = build_ladder(b, 1).unwrap();
        let id = LinearOperator::identity(4);
        let first = tensor_ops(&[&ad, &id]).unwrap();
        let second = tensor_ops(&[&id, &ad]).unwrap();
        let vac = tensor_states(&[&fock_amplitudes(b, 0), &fock_amplitudes(b, 0)]).unwrap();
        let out = first.apply(&second.apply(&vac));
        // |1,1⟩ sits at index 1·4 + 1
        for (i, v) in out.iter().enumerate() {
            let want = if i == 5 { 1.0 } else { 0.0 };
            assert!((v.re - want).abs() < 1e-15 && v.im == 0.0);
        }
    }

    #[test]
    fn tensor_dimension_cap() {
        let big = LinearOperator::identity(64);
        let err = tensor_ops_capped(&[&big, &big, &big], 1 << 16).unwrap_err();
        assert!(matches!(err, Error::DimensionOverflow { dim: 262144, .. }));
    }

    #[test]
    fn fidelity_basic_cases() {
        let b = basis(4);
        let up = SpinMotionState::basis_state(b, &[Spin::Up], 0, 0).unwrap();
        let down = SpinMotionState::basis_state(b, &[Spin::Down], 0, 0).unwrap();
        assert_eq!(fidelity(&up, &up).unwrap(), 1.0);
        assert_eq!(fidelity(&up, &down).unwrap(), 0.0);
        let two = SpinMotionState::basis_state(b, &[Spin::Up, Spin::Up], 0, 0).unwrap();
        assert!(fidelity(&up, &two).is_err());
    }

    #[test]
    fn fidelity_vacuum_vs_coherent() {
        let b = basis(30);
        let up = [ONE, ZERO];
        let vac = fock_amplitudes(b, 0);
        let zero = SpinMotionState::product(b, &up, &vac, &vac).unwrap();
        let coh = SpinMotionState::product(b, &up, &coherent_amplitudes(b, C64::new(1.0, 0.0)), &vac).unwrap();
        let f = fidelity(&zero, &coh).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-12, "{f}");
    }

    #[test]
    fn purity_of_product_and_cat_states() {
        let b = basis(60);
        let prod = SpinMotionState::basis_state(b, &[Spin::Up, Spin::Up], 0, 0).unwrap();
        assert!((reduced_spin_purity(&prod).unwrap() - 1.0).abs() < 1e-15);

        for (alpha, want) in [(3.0, 0.5 + 0.5 * (-4.0f64 * 9.0).exp()), (0.0, 1.0)] {
            let vac = fock_amplitudes(b, 0);
            let plus = coherent_amplitudes(b, C64::new(alpha, 0.0));
            let minus = coherent_amplitudes(b, C64::new(-alpha, 0.0));
            let s = core::f64::consts::FRAC_1_SQRT_2;
            let uu = [ONE, ZERO, ZERO, ZERO];
            let du = [ZERO, ZERO, ONE, ZERO];
            let a = tensor_states(&[&uu, &plus, &vac]).unwrap();
            let c = tensor_states(&[&du, &minus, &vac]).unwrap();
            let amps: Vec<C64> = a.iter().zip(&c).map(|(x, y)| (x + y) * s).collect();
            let st = SpinMotionState::from_amplitudes(b, 2, amps).unwrap().normalized();
            let p = reduced_spin_purity(&st).unwrap();
            assert!((p - want).abs() < 1e-10, "alpha {alpha}: {p} vs {want}");
        }
    }

    #[test]
    fn kron_operator_matches_dense() {
        let b = basis(3);
        let (a, ad) = build_ladder(b, 2).unwrap();
        let mut op = KronOperator::new(b, 2).unwrap();
        let spin = embed_spin(&sigma_plus(), 1, 2).unwrap();
        op.push_with_adjoint(KronTerm::new(C64::new(0.3, 0.1), spin, None, Some(a.clone())).modulated(2.0))
            .unwrap();
        op.push(KronTerm::new(ONE, LinearOperator::identity(4), Some(ad.matmul(&a)), None)).unwrap();
        let t = 0.37;
        let dense = op.to_dense_at(t).unwrap();
        assert!(dense.hermiticity_defect() < 1e-15);
        let v: Vec<C64> = (0..op.dim()).map(|i| C64::new(i as f64 * 0.01, 1.0 - i as f64 * 0.02)).collect();
        let fast = op.apply_at(t, &v);
        let slow = dense.apply(&v);
        assert!(linalg::distance(&fast, &slow) < 1e-13);
    }
}
