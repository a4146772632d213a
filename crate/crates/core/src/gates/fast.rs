//! Fast gate from spin-dependent momentum kicks interleaved with free
//! motion. Each kick displaces the |↓⟩ component of an ion by iη along the
//! kick direction; the modes close when the kicks sum to zero in each
//! rotating frame, leaving a spin-dependent geometric phase.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::ion_bits;
use crate::dynamics::{displace_branches, participation, Drive, TrapConfig};
use crate::error::{Error, Result};
use crate::hilbert::SpinMotionState;
use crate::linalg::ZERO;

/// Instantaneous spin-dependent kick from one fast pulse pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickEvent {
    /// Time of the kick on the schedule clock (s).
    pub time: f64,
    /// Direction of Δk_j, +1 or −1.
    pub delta_k_sign: i8,
    /// Lamb–Dicke parameters of this kick for modes 1 and 2; they carry the
    /// kick strength.
    pub eta_1: f64,
    pub eta_2: f64,
}

impl KickEvent {
    /// Lab-frame displacements (mode 1, mode 2) given to spin basis state
    /// `s`. The kick acts on |↓⟩ of each ion.
    pub fn displacements(&self, s: usize) -> [C64; 2] {
        let bits = ion_bits(s);
        let sign = f64::from(self.delta_k_sign);
        let mut d = [ZERO; 2];
        for (ion, &b) in bits.iter().enumerate() {
            if b == 1 {
                d[0] += C64::new(0.0, sign * self.eta_1 * participation(1, ion));
                d[1] += C64::new(0.0, sign * self.eta_2 * participation(2, ion));
            }
        }
        d
    }

    /// Signed momentum proxy Δk_j ∝ sign · η₁.
    pub fn momentum(&self) -> f64 {
        f64::from(self.delta_k_sign) * self.eta_1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleStep {
    Drive { drive: Drive, duration: f64 },
    Kick(KickEvent),
    FreeEvolution { duration: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateLabel {
    CiracZoller,
    SigmaZ,
    SigmaPhi,
    FastKick,
}

/// Ordered gate steps, serializable so that tools and tests share them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub label: GateLabel,
    pub steps: Vec<ScheduleStep>,
}

impl GateSchedule {
    /// Kicks at their own times with free evolution in between, ending at
    /// `end` (which must not precede the last kick).
    pub fn from_kicks(mut kicks: Vec<KickEvent>, end: f64) -> Result<Self> {
        kicks.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut steps = Vec::with_capacity(2 * kicks.len() + 1);
        let mut clock = 0.0;
        for k in kicks {
            if !(k.time >= clock) {
                return Err(Error::InvalidParameter("kick times must be non-negative".into()));
            }
            if k.time > clock {
                steps.push(ScheduleStep::FreeEvolution { duration: k.time - clock });
            }
            steps.push(ScheduleStep::Kick(k));
            clock = k.time;
        }
        if end < clock {
            return Err(Error::InvalidParameter("schedule ends before its last kick".into()));
        }
        if end > clock {
            steps.push(ScheduleStep::FreeEvolution { duration: end - clock });
        }
        Ok(Self { label: GateLabel::FastKick, steps })
    }

    pub fn duration(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                ScheduleStep::Drive { duration, .. } | ScheduleStep::FreeEvolution { duration } => *duration,
                ScheduleStep::Kick(_) => 0.0,
            })
            .sum()
    }

    pub fn kicks(&self) -> impl Iterator<Item = &KickEvent> {
        self.steps.iter().filter_map(|s| match s {
            ScheduleStep::Kick(k) => Some(k),
            _ => None,
        })
    }

    /// Σ_j Δk_j in units of the kick Lamb–Dicke parameter.
    pub fn momentum_sum(&self) -> f64 {
        self.kicks().map(KickEvent::momentum).sum()
    }

    /// Durations finite and non-negative, total positive, kick times
    /// consistent with the running clock, and kick signs ±1.
    pub fn validate(&self) -> Result<()> {
        let mut clock = 0.0;
        for s in &self.steps {
            match s {
                ScheduleStep::Drive { duration, .. } | ScheduleStep::FreeEvolution { duration } => {
                    if !(duration.is_finite() && *duration >= 0.0) {
                        return Err(Error::InvalidParameter(format!("bad step duration {duration}")));
                    }
                    clock += duration;
                }
                ScheduleStep::Kick(k) => {
                    if k.delta_k_sign != 1 && k.delta_k_sign != -1 {
                        return Err(Error::InvalidParameter("kick direction must be +1 or -1".into()));
                    }
                    if (k.time - clock).abs() > 1e-9 * clock.abs().max(1e-12) {
                        return Err(Error::InvalidParameter(format!(
                            "kick at t = {:.6e} sits at schedule time {clock:.6e}",
                            k.time
                        )));
                    }
                }
            }
        }
        if !(clock > 0.0) {
            return Err(Error::InvalidParameter("schedule duration must be positive".into()));
        }
        Ok(())
    }
}

/// Applies one kick in the lab frame.
pub fn fast_kick_pair(state: &SpinMotionState, kick: &KickEvent) -> Result<SpinMotionState> {
    if state.qubit_count() != 2 {
        return Err(Error::InvalidParameter("kick map is defined for two ions".into()));
    }
    let mut out = state.clone();
    for s in 0..4 {
        let d = kick.displacements(s);
        for (m, beta) in d.iter().enumerate() {
            if *beta != ZERO {
                out = displace_branches(&out, m + 1, *beta, |x| x == s)?;
            }
        }
    }
    Ok(out)
}

/// Free motion e^{−iω_ν n_ν τ} on both modes; `sign` = −1 undoes it.
fn free_rotation(state: &mut SpinMotionState, trap: &TrapConfig, tau: f64, sign: f64) -> Result<()> {
    let d = state.basis().mode_dim();
    let w1 = trap.omega(1)?;
    let w2 = trap.omega(2)?;
    let p1: Vec<C64> = (0..d).map(|n| C64::from_polar(1.0, -sign * w1 * tau * n as f64)).collect();
    let p2: Vec<C64> = (0..d).map(|n| C64::from_polar(1.0, -sign * w2 * tau * n as f64)).collect();
    let sd = state.spin_dim();
    let amps = state.amplitudes_mut();
    for s in 0..sd {
        for n1 in 0..d {
            for n2 in 0..d {
                amps[(s * d + n1) * d + n2] *= p1[n1] * p2[n2];
            }
        }
    }
    Ok(())
}

/// Closure and phase bookkeeping for one schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickDiagnostics {
    /// Interaction-frame displacement left on (mode 1, mode 2) per spin
    /// basis state.
    pub residuals: [[C64; 2]; 4],
    /// Geometric phase per spin basis state.
    pub phases: [f64; 4],
    pub momentum_sum: f64,
}

impl KickDiagnostics {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().flatten().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// Closed-form residual displacements and phases of the kick sequence:
/// β_j → β_j e^{iω t_j} in the rotating frame and
/// Φ = Σ_{j<k} Im(β_k β_j*).
pub fn kick_diagnostics(schedule: &GateSchedule, trap: &TrapConfig) -> Result<KickDiagnostics> {
    let w = [trap.omega(1)?, trap.omega(2)?];
    let mut residuals = [[ZERO; 2]; 4];
    let mut phases = [0.0; 4];
    for k in schedule.kicks() {
        for s in 0..4 {
            let d = k.displacements(s);
            for m in 0..2 {
                let b = d[m] * C64::from_polar(1.0, w[m] * k.time);
                phases[s] += (b * residuals[s][m].conj()).im;
                residuals[s][m] += b;
            }
        }
    }
    Ok(KickDiagnostics { residuals, phases, momentum_sum: schedule.momentum_sum() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FastGateReport {
    /// Final state in the frame rotating with both modes.
    pub state: SpinMotionState,
    pub diagnostics: KickDiagnostics,
    pub duration: f64,
}

/// Runs a kick schedule on `state` and returns the result in the frame
/// rotating with the modes. Fails when a branch is left displaced by more
/// than `closure_bound`.
pub fn fast_gate(
    schedule: &GateSchedule,
    trap: &TrapConfig,
    state: &SpinMotionState,
    closure_bound: f64,
) -> Result<FastGateReport> {
    let diagnostics = kick_diagnostics(schedule, trap)?;
    let residual = diagnostics.max_residual();
    if residual > closure_bound {
        return Err(Error::ScheduleNotClosed { residual, bound: closure_bound });
    }
    if schedule.steps.is_empty() {
        return Ok(FastGateReport { state: state.clone(), diagnostics, duration: 0.0 });
    }
    schedule.validate()?;
    let mut psi = state.clone();
    let mut clock = 0.0;
    for step in &schedule.steps {
        match step {
            ScheduleStep::Kick(k) => psi = fast_kick_pair(&psi, k)?,
            ScheduleStep::FreeEvolution { duration } => {
                free_rotation(&mut psi, trap, *duration, 1.0)?;
                clock += duration;
            }
            ScheduleStep::Drive { .. } => {
                return Err(Error::InvalidParameter("fast gate schedules hold kicks and free evolution only".into()))
            }
        }
    }
    free_rotation(&mut psi, trap, clock, -1.0)?;
    Ok(FastGateReport { state: psi, diagnostics, duration: clock })
}
