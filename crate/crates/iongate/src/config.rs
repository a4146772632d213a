//! Experiment config files. Frequencies are in Hz (or MHz where the key
//! says so) and are converted to rad/s once, here.

use std::f64::consts::TAU;
use std::path::PathBuf;

use iongate_core::dynamics::{TrapConfig, AMU};
use iongate_core::gates::{Engine, RotationReference};
use iongate_core::noise::DisturbanceSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GateTruthTable,
    PhaseSweep,
    FastScaling,
    ClockStates,
    CombSpectrum,
    Trajectory,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GateTruthTable => "gate_truth_table",
            ExperimentKind::PhaseSweep => "phase_sweep",
            ExperimentKind::FastScaling => "fast_scaling",
            ExperimentKind::ClockStates => "clock_states",
            ExperimentKind::CombSpectrum => "comb_spectrum",
            ExperimentKind::Trajectory => "trajectory",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for CSV and JSON files; `--out` overrides it.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// File name stem; defaults to the experiment name.
    #[serde(default)]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
    pub parameters: Value,
}

/// Two-ion trap set by its center-of-mass frequency and the stretch-mode
/// Lamb–Dicke parameter, with the ions a whole number of optical periods
/// apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapParams {
    pub com_frequency_hz: f64,
    pub ion_mass_amu: f64,
    pub eta_stretch: f64,
    #[serde(default = "default_periods")]
    pub spacing_periods: u32,
}

fn default_periods() -> u32 {
    8
}

impl TrapParams {
    pub fn build(&self) -> iongate_core::Result<TrapConfig> {
        TrapConfig::from_stretch_eta(TAU * self.com_frequency_hz, self.ion_mass_amu * AMU, self.eta_stretch, self.spacing_periods)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    SigmaZ,
    SigmaPhi,
    RamseyWrapped,
    CiracZoller,
    FastKick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryChoice {
    #[default]
    PhaseSensitive,
    PhaseInsensitive,
}

/// Rotation reference of a Ramsey-wrapped gate; `copropagating` uses a
/// fixed phase (rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum ReferenceChoice {
    NonCopropagatingCarrier,
    Copropagating { phase: f64 },
}

impl From<ReferenceChoice> for RotationReference {
    fn from(r: ReferenceChoice) -> Self {
        match r {
            ReferenceChoice::NonCopropagatingCarrier => RotationReference::NonCopropagatingCarrier,
            ReferenceChoice::Copropagating { phase } => RotationReference::Copropagating { phase },
        }
    }
}

/// Beam layout of the σ_φ gates. Optical frequency and qubit splitting only
/// fix the field frequencies; the phases depend on Δk and the path shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamParams {
    #[serde(default)]
    pub layout: GeometryChoice,
    #[serde(default = "default_optical_hz")]
    pub optical_frequency_hz: f64,
    #[serde(default = "default_qubit_hz")]
    pub qubit_frequency_hz: f64,
    /// Extra phase on path B (rad).
    #[serde(default)]
    pub path_phase: f64,
}

fn default_optical_hz() -> f64 {
    3.66e14
}

fn default_qubit_hz() -> f64 {
    1.25e9
}

impl Default for BeamParams {
    fn default() -> Self {
        Self {
            layout: GeometryChoice::PhaseSensitive,
            optical_frequency_hz: default_optical_hz(),
            qubit_frequency_hz: default_qubit_hz(),
            path_phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiracZollerParams {
    pub rabi_hz: f64,
    #[serde(default = "default_cz_mode")]
    pub mode: usize,
    /// φ of the CNOT's carrier rotations (rad); absent runs the phase gate.
    #[serde(default)]
    pub cnot_phase: Option<f64>,
}

fn default_cz_mode() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FastKickParams {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_strength")]
    pub max_strength: f64,
    #[serde(default = "default_closure")]
    pub closure_bound: f64,
}

fn default_restarts() -> usize {
    48
}

fn default_max_strength() -> f64 {
    40.0
}

fn default_closure() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateParams {
    pub gate: GateKind,
    pub trap: TrapParams,
    #[serde(default)]
    pub detuning_hz: Option<f64>,
    pub n_max: usize,
    #[serde(default)]
    pub engine: Engine,
    /// Phase Δφ of the σ_z Stark pair (rad).
    #[serde(default)]
    pub drive_phase: f64,
    #[serde(default)]
    pub beams: BeamParams,
    #[serde(default)]
    pub reference: Option<ReferenceChoice>,
    #[serde(default)]
    pub cirac_zoller: Option<CiracZollerParams>,
    #[serde(default)]
    pub fast_kick: Option<FastKickParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub gate: GateKind,
    pub trap: TrapParams,
    pub detuning_hz: f64,
    pub n_max: usize,
    /// Sweeps default to the closed-form engine.
    #[serde(default = "analytic")]
    pub engine: Engine,
    #[serde(default)]
    pub drive_phase: f64,
    #[serde(default)]
    pub beams: BeamParams,
    #[serde(default)]
    pub reference: Option<ReferenceChoice>,
    pub disturbance: DisturbanceSpec,
    pub trials: usize,
}

fn analytic() -> Engine {
    Engine::Analytic
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingParams {
    pub trap: TrapParams,
    pub cycles: Vec<u32>,
    pub v_rms_m_per_s: f64,
    #[serde(default)]
    pub reference_speed_m_per_s: Option<f64>,
    pub grid: GridParams,
    pub trials: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

fn default_bootstrap() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClockParams {
    pub nuclear_spin: f64,
    pub hyperfine_constant_hz: f64,
    pub g_j: f64,
    pub g_i: f64,
    pub field_min_t: f64,
    pub field_max_t: f64,
    /// Rows of the level diagram.
    #[serde(default = "default_diagram")]
    pub diagram_points: usize,
    /// Scan grid of the root search.
    #[serde(default = "default_search")]
    pub search_points: usize,
}

fn default_diagram() -> usize {
    201
}

fn default_search() -> usize {
    iongate_core::atomic::DEFAULT_FIELD_GRID
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateScanParams {
    pub modulation_index: f64,
    pub k_max: i32,
    pub theta_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombParams {
    pub com_frequency_mhz: f64,
    /// Defaults to √3 times the center-of-mass frequency.
    #[serde(default)]
    pub stretch_frequency_mhz: Option<f64>,
    pub eo_minus_qubit_mhz: f64,
    pub scan_range_mhz: f64,
    #[serde(default)]
    pub resolution_mhz: f64,
    #[serde(default)]
    pub rate_scan: Option<RateScanParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryParams {
    pub detuning_hz: f64,
    /// |g/δ| of the force rate g.
    pub force_ratio: f64,
    #[serde(default)]
    pub force_phase: f64,
    #[serde(default = "default_loops")]
    pub loops: usize,
    pub samples_per_loop: usize,
}

fn default_loops() -> usize {
    1
}
