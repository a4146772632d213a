//! Numeric time evolution and the displacement operator.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{build_ladder, FockBasis, KronOperator, SpinMotionState};
use crate::linalg::{self, LinearOperator, ZERO};

/// Largest allowed dt · ‖H‖.
pub const MAX_STEP_PHASE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// exp(−i H(t + dt/2) dt) per step; second order.
    #[default]
    Midpoint,
    /// Two exponentials built from the Gauss–Legendre nodes; fourth order.
    CommutatorFree4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub integrator: Integrator,
    pub t_start: f64,
    /// Largest tolerated discrepancy between one step and two half steps.
    pub error_tol: f64,
    pub error_check: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { integrator: Integrator::Midpoint, t_start: 0.0, error_tol: 1e-6, error_check: true }
    }
}

impl EvolveOptions {
    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn starting_at(mut self, t_start: f64) -> Self {
        self.t_start = t_start;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub state: SpinMotionState,
    pub steps: usize,
    pub dt: f64,
    pub max_local_error: f64,
}

/// Evolves `state` under H(t) from t = 0 to `t_final` with the midpoint rule.
pub fn evolve_numeric(h: &KronOperator, state: &SpinMotionState, t_final: f64, dt: f64) -> Result<SpinMotionState> {
    evolve_numeric_with(h, state, t_final, dt, &EvolveOptions::default()).map(|e| e.state)
}

/// Evolves from `opts.t_start` to `t_final`, using equal steps no longer
/// than `dt`.
pub fn evolve_numeric_with(
    h: &KronOperator,
    state: &SpinMotionState,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    if h.basis() != state.basis() || h.qubit_count() != state.qubit_count() {
        return Err(Error::DimensionMismatch("Hamiltonian and state live in different spaces".into()));
    }
    let span = t_final - opts.t_start;
    if !(dt > 0.0) || !(span >= 0.0) || !span.is_finite() {
        return Err(Error::InvalidParameter("need dt > 0 and t_final >= t_start".into()));
    }
    let steps = if span == 0.0 { 0 } else { ((span / dt) - 1e-9).ceil().max(1.0) as usize };
    let step = if steps == 0 { 0.0 } else { span / steps as f64 };
    let bound = h.norm_bound();
    if step * bound > MAX_STEP_PHASE {
        return Err(Error::StepTooCoarse(format!(
            "dt * |H| = {:.3e} exceeds {MAX_STEP_PHASE}",
            step * bound
        )));
    }
    let mut psi = state.amplitudes().to_vec();
    let mut stepper = Stepper::new(h);
    let mut max_err: f64 = 0.0;
    for k in 0..steps {
        let t = opts.t_start + step * k as f64;
        if opts.error_check {
            let full = stepper.step(opts.integrator, t, step, &psi);
            let mid = stepper.step(opts.integrator, t, step / 2.0, &psi);
            let half = stepper.step(opts.integrator, t + step / 2.0, step / 2.0, &mid);
            let err = linalg::distance(&full, &half);
            max_err = max_err.max(err);
            if err > opts.error_tol {
                return Err(Error::StepTooCoarse(format!(
                    "half-step discrepancy {err:.3e} at t = {t:.6e} exceeds {:.1e}",
                    opts.error_tol
                )));
            }
            psi = half;
        } else {
            psi = stepper.step(opts.integrator, t, step, &psi);
        }
    }
    let state = SpinMotionState::from_amplitudes(state.basis(), state.qubit_count(), psi)?;
    Ok(Evolution { state, steps, dt: step, max_local_error: max_err })
}

/// Largest step that satisfies the dt · ‖H‖ precondition.
pub fn max_stable_dt(h: &KronOperator) -> f64 {
    let b = h.norm_bound();
    if b == 0.0 {
        f64::INFINITY
    } else {
        MAX_STEP_PHASE / b
    }
}

struct Stepper<'a> {
    h: &'a KronOperator,
    scratch: Vec<C64>,
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

impl<'a> Stepper<'a> {
    fn new(h: &'a KronOperator) -> Self {
        Self { h, scratch: vec![ZERO; h.dim()] }
    }

    fn step(&mut self, integrator: Integrator, t: f64, dt: f64, psi: &[C64]) -> Vec<C64> {
        let mi = C64::new(0.0, -dt);
        match integrator {
            Integrator::Midpoint => {
                let c: Vec<C64> = self.h.coefficients_at(t + dt / 2.0).into_iter().map(|c| c * mi).collect();
                self.expm_apply(&c, psi)
            }
            Integrator::CommutatorFree4 => {
                let c1 = self.h.coefficients_at(t + dt * (0.5 - SQRT3 / 6.0));
                let c2 = self.h.coefficients_at(t + dt * (0.5 + SQRT3 / 6.0));
                let a1 = (3.0 - 2.0 * SQRT3) / 12.0;
                let a2 = (3.0 + 2.0 * SQRT3) / 12.0;
                let first: Vec<C64> = c1.iter().zip(&c2).map(|(x, y)| (x * a2 + y * a1) * mi).collect();
                let second: Vec<C64> = c1.iter().zip(&c2).map(|(x, y)| (x * a1 + y * a2) * mi).collect();
                let mid = self.expm_apply(&first, psi);
                self.expm_apply(&second, &mid)
            }
        }
    }

    /// exp(Σ coeffs_k T_k) ψ by Taylor series.
    fn expm_apply(&mut self, coeffs: &[C64], psi: &[C64]) -> Vec<C64> {
        let mut sum = psi.to_vec();
        let mut term = psi.to_vec();
        let scale = linalg::norm(psi).max(1e-300);
        for k in 1..64 {
            self.h.apply_with(coeffs, &term, &mut self.scratch);
            let inv = 1.0 / k as f64;
            for (t, s) in term.iter_mut().zip(&self.scratch) {
                *t = s * inv;
            }
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
            if linalg::norm(&term) <= 1e-18 * scale {
                break;
            }
        }
        sum
    }
}

/// exp(α â† − α* â) on one mode.
pub fn displacement_operator(basis: FockBasis, alpha: C64) -> LinearOperator {
    let (a, ad) = build_ladder(basis, 1).expect("mode 1 is valid");
    (&ad.scale(alpha) - &a.scale(alpha.conj())).expm()
}

fn leakage_guard(basis: FockBasis, alpha: C64) -> Result<()> {
    let limit = basis.n_max() as f64 / 4.0;
    if alpha.norm_sqr() > limit {
        return Err(Error::LeakageGuard { alpha_sq: alpha.norm_sqr(), limit });
    }
    Ok(())
}

/// Applies D(α) to `mode` for every spin component.
pub fn displace(state: &SpinMotionState, mode: usize, alpha: C64) -> Result<SpinMotionState> {
    displace_branches(state, mode, alpha, |_| true)
}

/// Applies D(α) to `mode` only on spin basis indices selected by `filter`.
pub fn displace_branches(
    state: &SpinMotionState,
    mode: usize,
    alpha: C64,
    filter: impl Fn(usize) -> bool,
) -> Result<SpinMotionState> {
    leakage_guard(state.basis(), alpha)?;
    let mut out = state.clone();
    if alpha != ZERO {
        out.apply_mode_operator(mode, &displacement_operator(state.basis(), alpha), filter)?;
    }
    Ok(out)
}
