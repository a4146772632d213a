//! Electro-optic frequency combs: path-length-dependent Raman rates,
//! per-path frequency plans that set the sign of Δk, and the positions of
//! the lines in a comb-driven Raman spectrum.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::dynamics::TrapConfig;
use crate::error::{Error, Result};
use crate::special::{bessel_j, bessel_j_table};

use core::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombConfig {
    /// Modulation index φ (rad).
    pub modulation_index: f64,
    /// ω_EO (rad/s).
    pub modulation_frequency: f64,
    /// Δx between the two beam paths (m).
    pub path_length_difference: f64,
    /// δk of the modulation frequency (1/m).
    pub modulation_wavenumber: f64,
    /// ω_offset of paths A and B (rad/s).
    pub offsets: [f64; 2],
}

impl CombConfig {
    /// θ = δk Δx mod 2π, in [0, 2π).
    pub fn theta(&self) -> f64 {
        wrap_theta(self.modulation_wavenumber * self.path_length_difference)
    }

    /// Relative rate of the transition pairing the carrier with sideband k.
    pub fn rate(&self, k: i32) -> f64 {
        transition_rate(k, self.modulation_index, self.theta())
    }
}

fn wrap_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// J_k(2φ sin θ), normalized so that k = 0 at θ = 0 gives 1.
pub fn transition_rate(k: i32, phi: f64, theta: f64) -> f64 {
    bessel_j(k, 2.0 * phi * wrap_theta(theta).sin())
}

/// Σ_{|n| ≤ n_max} J_n(φ)e^{inθ} J_{n+k}(φ)e^{i(n+k)θ}, summed term by
/// term. It equals i^k J_k(2φ sin θ).
pub fn transition_rate_series(k: i32, phi: f64, theta: f64, n_max: usize) -> C64 {
    let reach = n_max + k.unsigned_abs() as usize;
    let table = bessel_j_table(reach, phi);
    let j = |n: i64| -> f64 {
        let m = n.unsigned_abs() as usize;
        if m > reach {
            return 0.0;
        }
        if n < 0 && m % 2 == 1 {
            -table[m]
        } else {
            table[m]
        }
    };
    let mut sum = C64::new(0.0, 0.0);
    let k = i64::from(k);
    for n in -(n_max as i64)..=(n_max as i64) {
        let w = j(n) * j(n + k);
        if w != 0.0 {
            sum += C64::from_polar(w, (2 * n + k) as f64 * theta);
        }
    }
    sum
}

/// Frequency shifts of the two beam paths and the resulting Δk direction
/// (+1: Δk = k_B − k_A).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathShifts {
    pub path_a: f64,
    pub path_b: f64,
    pub delta_k_sign: i8,
}

impl PathShifts {
    /// Beat of path B's comb line m against path A's line n.
    pub fn beat(&self, modulation_frequency: f64, m: i32, n: i32) -> f64 {
        (self.path_b + f64::from(m) * modulation_frequency) - (self.path_a + f64::from(n) * modulation_frequency)
    }
}

/// Path shifts for a transition at `transition` with comb spacing
/// `modulation_frequency`. For +1, path B is shifted by
/// ω_offset + ω_transition − ω_EO and its first upper line beats against
/// path A's carrier; for −1, path B is shifted by
/// ω_offset + ω_EO − ω_transition and path A's first upper line is the
/// higher field.
pub fn plan_delta_k(transition: f64, modulation_frequency: f64, offset: f64, desired_sign: i8) -> Result<PathShifts> {
    if !(modulation_frequency > 0.0) || !transition.is_finite() || !offset.is_finite() {
        return Err(Error::InvalidParameter("modulation frequency must be positive".into()));
    }
    if modulation_frequency == transition {
        return Err(Error::InvalidParameter(
            "modulation frequency equals the transition; each beam alone would drive it copropagating".into(),
        ));
    }
    let path_b = match desired_sign {
        1 => offset + transition - modulation_frequency,
        -1 => offset + modulation_frequency - transition,
        s => return Err(Error::InvalidParameter(format!("Δk sign must be ±1, got {s}"))),
    };
    Ok(PathShifts { path_a: offset, path_b, delta_k_sign: desired_sign })
}

/// Red and blue path-B shifts of a phase-insensitive σ_φ layout driven from
/// one comb, with Δk_r = +, Δk_b = −.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPhiPlan {
    pub red: PathShifts,
    pub blue: PathShifts,
}

pub fn plan_sigma_phi(
    qubit: f64,
    mode_frequency: f64,
    detuning: f64,
    modulation_frequency: f64,
    offset: f64,
) -> Result<SigmaPhiPlan> {
    if modulation_frequency == qubit {
        return Err(Error::InvalidParameter(
            "modulation exactly at the qubit frequency drives the copropagating carrier".into(),
        ));
    }
    let red = plan_delta_k(qubit - mode_frequency - detuning, modulation_frequency, offset, 1)?;
    let blue = plan_delta_k(qubit + mode_frequency + detuning, modulation_frequency, offset, -1)?;
    Ok(SigmaPhiPlan { red, blue })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "mode")]
pub enum LineKind {
    Carrier,
    Blue(usize),
    Red(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    /// Beat frequency between the two paths (rad/s).
    pub frequency: f64,
    pub kind: LineKind,
    /// +1 for the line family at +(ω_EO − ω₀), −1 for its mirror.
    pub branch: i8,
    pub label: String,
    /// Another line lies within the resolution.
    pub overlaps: bool,
}

/// Carrier and first-sideband lines of both modes, for comb offset
/// ω_EO − ω₀ = `eo_minus_qubit`: C at ±Δ, B_ν at ±(Δ − ω_ν), R_ν at
/// ±(Δ + ω_ν). Lines beyond |f| > `scan_range` are dropped; modes at zero
/// frequency contribute no sidebands.
pub fn raman_spectrum(
    mode_frequencies: [f64; 2],
    eo_minus_qubit: f64,
    scan_range: f64,
    resolution: f64,
) -> Result<Vec<SpectrumLine>> {
    if !(scan_range > 0.0) || !(resolution >= 0.0) || mode_frequencies.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidParameter("scan range, resolution and mode frequencies must be non-negative".into()));
    }
    let mut lines = Vec::new();
    for branch in [1i8, -1] {
        let s = f64::from(branch);
        lines.push((s * eo_minus_qubit, LineKind::Carrier, branch));
        for (m, &w) in mode_frequencies.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            lines.push((s * (eo_minus_qubit - w), LineKind::Blue(m + 1), branch));
            lines.push((s * (eo_minus_qubit + w), LineKind::Red(m + 1), branch));
        }
    }
    let kept: Vec<_> = lines.into_iter().filter(|(f, _, _)| f.abs() <= scan_range).collect();
    let mut out: Vec<SpectrumLine> = kept
        .iter()
        .enumerate()
        .map(|(i, &(frequency, kind, branch))| {
            let overlaps = kept.iter().enumerate().any(|(j, (g, _, _))| j != i && (g - frequency).abs() <= resolution);
            let label = match kind {
                LineKind::Carrier => String::from("C"),
                LineKind::Blue(m) => format!("B{m}"),
                LineKind::Red(m) => format!("R{m}"),
            };
            SpectrumLine { frequency, kind, branch, label, overlaps }
        })
        .collect();
    out.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    Ok(out)
}

pub fn raman_spectrum_for_trap(
    trap: &TrapConfig,
    eo_minus_qubit: f64,
    scan_range: f64,
    resolution: f64,
) -> Result<Vec<SpectrumLine>> {
    raman_spectrum([trap.omega_1(), trap.omega_2()], eo_minus_qubit, scan_range, resolution)
}
