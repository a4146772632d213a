//! Ground-state hyperfine structure of a J = ½ ion in a magnetic field:
//! the m_F eigensystem, field-insensitive level pairs, and far-detuned
//! Stark shifts of those levels.
//!
//! H/ħ = (μ_B/ħ) B (g_J J_z + g_I I_z) + A I·J, energies in rad/s. Both g
//! factors are in units of the Bohr magneton.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// μ_B/ħ in rad/s per tesla.
pub const BOHR_RAD_PER_TESLA: f64 = 8.794_100_793_3e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineSystem {
    /// Nuclear spin I (half-integer or integer, ≥ ½).
    pub nuclear_spin: f64,
    /// Contact constant A (rad/s).
    pub hyperfine_constant: f64,
    pub g_j: f64,
    pub g_i: f64,
    /// Field along z (T).
    pub field: f64,
}

impl HyperfineSystem {
    /// ¹¹¹Cd⁺ ground state (I = ½, splitting ≈ 14.53 GHz).
    pub fn cadmium_111(field: f64) -> Self {
        Self {
            nuclear_spin: 0.5,
            hyperfine_constant: core::f64::consts::TAU * 14.530_582e9,
            g_j: 2.002_3,
            g_i: 6.48e-4,
            field,
        }
    }

    pub fn at_field(mut self, field: f64) -> Self {
        self.field = field;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let two_i = 2.0 * self.nuclear_spin;
        if !(self.nuclear_spin >= 0.5) || (two_i - two_i.round()).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("nuclear spin {} must be a positive multiple of 1/2", self.nuclear_spin)));
        }
        if !(self.field >= 0.0) || !self.field.is_finite() {
            return Err(Error::InvalidParameter("field must be finite and non-negative".into()));
        }
        if !self.hyperfine_constant.is_finite() || !self.g_j.is_finite() || !self.g_i.is_finite() {
            return Err(Error::InvalidParameter("non-finite hyperfine parameters".into()));
        }
        Ok(())
    }

    /// Zero-field splitting between the F = I ± ½ manifolds, A(I + ½).
    pub fn zero_field_splitting(&self) -> f64 {
        self.hyperfine_constant * (self.nuclear_spin + 0.5)
    }

    /// Number of m_F values, 2I + 2.
    fn mf_count(&self) -> usize {
        (2.0 * self.nuclear_spin).round() as usize + 2
    }

    /// The m_F block in the basis |m_J=+½, m_I=m_F−½⟩, |m_J=−½, m_I=m_F+½⟩
    /// as (h11, h22, h12).
    fn block(&self, m_f: f64) -> (f64, f64, f64) {
        let mu = BOHR_RAD_PER_TESLA * self.field;
        let a = self.hyperfine_constant;
        let h11 = mu * (self.g_j / 2.0 + self.g_i * (m_f - 0.5)) + a * 0.5 * (m_f - 0.5);
        let h22 = mu * (-self.g_j / 2.0 + self.g_i * (m_f + 0.5)) - a * 0.5 * (m_f + 0.5);
        let top = self.nuclear_spin + 0.5;
        let h12 = a / 2.0 * (top * top - m_f * m_f).max(0.0).sqrt();
        (h11, h22, h12)
    }
}

/// Upper or lower eigenvalue of an m_F block. At zero field with A > 0,
/// upper is F = I + ½. Stretched states are `Upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineLevel {
    pub m_f: f64,
    pub branch: Branch,
    /// Energy (rad/s).
    pub energy: f64,
    /// Amplitudes on |m_J=+½, m_I=m_F−½⟩ and |m_J=−½, m_I=m_F+½⟩. The
    /// block is real, so they are real.
    pub a: f64,
    pub b: f64,
    /// Field at which the level was computed (T).
    pub field: f64,
}

impl HyperfineLevel {
    pub fn same_state(&self, other: &HyperfineLevel) -> bool {
        self.m_f == other.m_f && self.branch == other.branch
    }
}

/// All (2I+1)(2J+1) levels, ordered by m_F then branch.
pub fn eigensystem(system: &HyperfineSystem) -> Result<Vec<HyperfineLevel>> {
    system.validate()?;
    let top = system.nuclear_spin + 0.5;
    let mut out = Vec::with_capacity(2 * system.mf_count());
    for k in 0..system.mf_count() {
        let m_f = -top + k as f64;
        let (h11, h22, h12) = system.block(m_f);
        let field = system.field;
        if (m_f.abs() - top).abs() < 1e-12 {
            // stretched: only one of the two basis states exists
            let (energy, a, b) = if m_f > 0.0 { (h11, 1.0, 0.0) } else { (h22, 0.0, 1.0) };
            out.push(HyperfineLevel { m_f, branch: Branch::Upper, energy, a, b, field });
            continue;
        }
        let mean = (h11 + h22) / 2.0;
        let half = (h11 - h22) / 2.0;
        let r = half.hypot(h12);
        for (branch, e) in [(Branch::Lower, mean - r), (Branch::Upper, mean + r)] {
            // eigenvector from whichever row is better conditioned
            let (x, y) = if (h11 - e).abs() + h12.abs() >= (h22 - e).abs() + h12.abs() {
                (h12, e - h11)
            } else {
                (e - h22, h12)
            };
            let n = x.hypot(y);
            let (mut a, mut b) = if n == 0.0 {
                if branch == Branch::Upper && h11 >= h22 || branch == Branch::Lower && h11 < h22 {
                    (1.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            } else {
                (x / n, y / n)
            };
            if a < 0.0 || (a == 0.0 && b < 0.0) {
                a = -a;
                b = -b;
            }
            out.push(HyperfineLevel { m_f, branch, energy: e, a, b, field });
        }
    }
    Ok(out)
}

/// Looks up one level of the eigensystem at the system's field.
pub fn level(system: &HyperfineSystem, m_f: f64, branch: Branch) -> Result<HyperfineLevel> {
    eigensystem(system)?
        .into_iter()
        .find(|l| (l.m_f - m_f).abs() < 1e-12 && l.branch == branch)
        .ok_or_else(|| Error::InvalidParameter(format!("no level m_F = {m_f} {branch:?}")))
}

/// ∂E/∂B = ⟨g_J J_z + g_I I_z⟩ μ_B/ħ (rad/s per T).
pub fn de_db(level: &HyperfineLevel, system: &HyperfineSystem) -> Result<f64> {
    if level.field != system.field {
        return Err(Error::InvalidParameter(format!(
            "level computed at B = {} T but system is at {} T",
            level.field, system.field
        )));
    }
    let (a2, b2) = (level.a * level.a, level.b * level.b);
    let m = level.m_f;
    Ok(BOHR_RAD_PER_TESLA
        * (a2 * (system.g_j / 2.0 + system.g_i * (m - 0.5)) + b2 * (-system.g_j / 2.0 + system.g_i * (m + 0.5))))
}

/// Levels are named by (m_F, branch), which is continuous in B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelId {
    pub m_f: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InsensitivePair {
    pub first: LevelId,
    pub second: LevelId,
    /// B* (T).
    pub field: f64,
    /// Derivative touches zero without changing sign.
    pub double_root: bool,
}

fn slope_difference(system: &HyperfineSystem, p: (LevelId, LevelId), field: f64) -> Result<f64> {
    let s = system.at_field(field);
    let l1 = level(&s, p.0.m_f, p.0.branch)?;
    let l2 = level(&s, p.1.m_f, p.1.branch)?;
    Ok(de_db(&l1, &s)? - de_db(&l2, &s)?)
}

pub const DEFAULT_FIELD_GRID: usize = 512;

/// Roots of ∂(E₁ − E₂)/∂B over [b_min, b_max] for every distinct level
/// pair: sign changes on a `grid`-point scan are bisected to relative
/// 1e-10, and grid points where the difference vanishes are kept too.
pub fn field_insensitive_pairs(
    system: &HyperfineSystem,
    b_range: (f64, f64),
    grid: usize,
) -> Result<Vec<InsensitivePair>> {
    let (lo, hi) = b_range;
    if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || hi < lo || grid < 2 {
        return Err(Error::InvalidParameter("field range must be finite with 0 <= min <= max".into()));
    }
    let ids: Vec<LevelId> =
        eigensystem(&system.at_field(lo))?.iter().map(|l| LevelId { m_f: l.m_f, branch: l.branch }).collect();
    let scale = BOHR_RAD_PER_TESLA * system.g_j.abs().max(system.g_i.abs());
    let zero_tol = 1e-12 * scale;
    let fields: Vec<f64> = (0..grid).map(|k| lo + (hi - lo) * k as f64 / (grid - 1) as f64).collect();
    // slopes on the grid, one row per level
    let mut slopes = Vec::with_capacity(grid);
    for &b in &fields {
        let s = system.at_field(b);
        let levels = eigensystem(&s)?;
        slopes.push(levels.iter().map(|l| de_db(l, &s)).collect::<Result<Vec<_>>>()?);
    }
    let mut out = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let pair = (ids[i], ids[j]);
            let f: Vec<f64> = slopes.iter().map(|row| row[i] - row[j]).collect();
            for k in 0..grid {
                if f[k].abs() <= zero_tol {
                    let before = if k > 0 { f[k - 1] } else { f64::NAN };
                    let after = if k + 1 < grid { f[k + 1] } else { f64::NAN };
                    let double_root = before * after > 0.0;
                    out.push(InsensitivePair { first: pair.0, second: pair.1, field: fields[k], double_root });
                    continue;
                }
                if k + 1 < grid && f[k + 1].abs() > zero_tol && f[k] * f[k + 1] < 0.0 {
                    let (mut a, mut b) = (fields[k], fields[k + 1]);
                    let mut fa = f[k];
                    while (b - a) > 1e-10 * b.abs().max(1e-300) {
                        let m = 0.5 * (a + b);
                        let fm = slope_difference(system, pair, m)?;
                        if fm == 0.0 {
                            a = m;
                            b = m;
                            break;
                        }
                        if fa * fm < 0.0 {
                            b = m;
                        } else {
                            a = m;
                            fa = fm;
                        }
                    }
                    out.push(InsensitivePair { first: pair.0, second: pair.1, field: 0.5 * (a + b), double_root: false });
                }
            }
        }
    }
    Ok(out)
}

/// Summed squared dipole couplings from m_J = +½ and m_J = −½ to the
/// excited manifold (rad²/s² per unit field amplitude).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleCouplings {
    pub plus: f64,
    pub minus: f64,
}

/// Far-detuned Stark shift of `level` with excited states degenerate at
/// detuning Δ from the reference level of energy `reference_energy`:
/// χ = (|a|² S₊ + |b|² S₋)/(Δ − E_ref + E).
pub fn stark_shift(
    level: &HyperfineLevel,
    reference_energy: f64,
    detuning: f64,
    couplings: DipoleCouplings,
) -> Result<f64> {
    let denom = detuning - reference_energy + level.energy;
    if denom.abs() <= 1e-12 * detuning.abs().max(level.energy.abs()).max(1.0) {
        return Err(Error::ResonantDenominator);
    }
    Ok((level.a * level.a * couplings.plus + level.b * level.b * couplings.minus) / denom)
}
