//! Executes one experiment config and writes its CSV tables, a JSON
//! summary and a run manifest.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use iongate_core::atomic::{eigensystem, field_insensitive_pairs, Branch, HyperfineSystem};
use iongate_core::comb::{raman_spectrum, transition_rate};
use iongate_core::dynamics::{alpha_for_rate, phase_for_rate, Trajectory};
use iongate_core::gates::*;
use iongate_core::noise::{
    finish_scaling, log_grid, monte_carlo_trial, scaling_samples, BeamGeometry, KickFamily, ScalingSetup,
    SidebandPlan, SweepGate, SweepStats, ThermalEnsemble,
};
use iongate_core::{dynamics::FieldPair, dynamics::TrapConfig, FockBasis, C64};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::*;
use crate::error::RunError;

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Where the config came from, for the manifest.
    pub source: String,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: Value,
}

/// One experiment's results before they are written out.
struct Artifacts {
    tables: Vec<(String, Vec<u8>)>,
    summary: Value,
    diagnostics: Value,
    parameters: Value,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, RunError> {
    if text.trim().is_empty() {
        return Err(RunError::Schema("config is empty; expected a JSON object with schema_version, experiment and parameters".into()));
    }
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| RunError::Schema(format!("config does not match the schema: {e}")))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(RunError::Schema(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

fn params<T: DeserializeOwned>(cfg: &ExperimentConfig) -> Result<T, RunError> {
    serde_json::from_value(cfg.parameters.clone())
        .map_err(|e| RunError::Schema(format!("parameters of {}: {e}", cfg.experiment.name())))
}

fn schema(msg: impl Into<String>) -> RunError {
    RunError::Schema(msg.into())
}

pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let seed = opts.seed.unwrap_or(cfg.seed);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers {
        if n == 0 {
            return Err(schema("--workers must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| RunError::Other(e.into()))?;
    let started = Instant::now();
    let art = pool.install(|| match cfg.experiment {
        ExperimentKind::GateTruthTable => gate_truth_table(&params(cfg)?, seed),
        ExperimentKind::PhaseSweep => phase_sweep(&params(cfg)?, seed),
        ExperimentKind::FastScaling => fast_scaling(&params(cfg)?, seed),
        ExperimentKind::ClockStates => clock_states(&params(cfg)?),
        ExperimentKind::CombSpectrum => comb_spectrum(&params(cfg)?),
        ExperimentKind::Trajectory => trajectory(&params(cfg)?),
    })?;
    let elapsed = started.elapsed().as_secs_f64();

    let stem = cfg.output.stem.clone().unwrap_or_else(|| cfg.experiment.name().to_string());
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("iongate-out").join(&stem));
    fs::create_dir_all(&dir).map_err(|e| RunError::Other(e.into()))?;
    let mut files = Vec::new();
    for (suffix, bytes) in &art.tables {
        let name = if suffix.is_empty() { format!("{stem}.csv") } else { format!("{stem}_{suffix}.csv") };
        files.push(write(&dir, &name, bytes)?);
    }
    let summary = serde_json::to_vec_pretty(&art.summary).map_err(|e| RunError::Other(e.into()))?;
    files.push(write(&dir, &format!("{stem}_summary.json"), &summary)?);
    let manifest = json!({
        "tool": "iongate",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.name(),
        "description": cfg.description,
        "config": opts.source,
        "seed": seed,
        "parameters": art.parameters,
        "outputs": files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "summary": art.summary,
        "diagnostics": art.diagnostics,
        "runtime_s": elapsed,
        "created": chrono::Utc::now().to_rfc3339(),
    });
    let bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| RunError::Other(e.into()))?;
    files.push(write(&dir, &format!("{stem}_manifest.json"), &bytes)?);
    Ok(RunOutcome { dir, files, manifest })
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, RunError> {
    let p = dir.join(name);
    fs::write(&p, bytes).map_err(|e| RunError::Other(anyhow::anyhow!("writing {}: {e}", p.display())))?;
    Ok(p)
}

fn csv_table<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| RunError::Other(e.into()))?;
    }
    w.into_inner().map_err(|e| RunError::Other(anyhow::anyhow!("{e}")))
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

const INPUTS: [&str; 4] = ["uu", "ud", "du", "dd"];

fn geometry(trap: &TrapConfig, beams: &BeamParams, detuning: f64) -> iongate_core::Result<BeamGeometry> {
    let plan = SidebandPlan {
        omega_a: TAU * beams.optical_frequency_hz,
        qubit: TAU * beams.qubit_frequency_hz,
        mode_frequency: trap.omega(2)?,
        delta: detuning,
    };
    let g = match beams.layout {
        GeometryChoice::PhaseSensitive => BeamGeometry::phase_sensitive(plan, trap.delta_k()),
        GeometryChoice::PhaseInsensitive => BeamGeometry::phase_insensitive(plan, trap.delta_k()),
    };
    Ok(g.with_path_shift(beams.path_phase))
}

/// Default rotation reference: the carrier pair of a sensitive layout, or a
/// copropagating rotation locked to the spin phase of an insensitive one.
fn reference(
    trap: &TrapConfig,
    g: &BeamGeometry,
    detuning: f64,
    choice: Option<ReferenceChoice>,
) -> iongate_core::Result<RotationReference> {
    if let Some(c) = choice {
        return Ok(c.into());
    }
    Ok(match g.configuration {
        iongate_core::noise::GeometryKind::PhaseInsensitive => {
            let d = sigma_phi_drive(trap, g, detuning)?;
            RotationReference::Copropagating { phase: sigma_phi_phases(trap, &d)[0].spin }
        }
        _ => RotationReference::NonCopropagatingCarrier,
    })
}

#[derive(Serialize)]
struct RowRecord {
    input: &'static str,
    row_fidelity: f64,
    purity: f64,
}

#[derive(Serialize)]
struct AmplitudeRecord {
    input: &'static str,
    output: &'static str,
    re: f64,
    im: f64,
}

fn gate_truth_table(p: &GateParams, seed: u64) -> Result<Artifacts, RunError> {
    let trap = p.trap.build()?;
    let basis = FockBasis::new(p.n_max)?;
    let opts = GateOptions { engine: p.engine, ..GateOptions::default() };
    let detuning = || p.detuning_hz.map(|d| TAU * d).ok_or_else(|| schema("this gate needs detuning_hz"));
    let mut extra = serde_json::Map::new();
    let (outcome, ideal, ideal_name) = match p.gate {
        GateKind::SigmaZ => {
            let drive = calibrated_sigma_z_drive(detuning()?, FieldPair::new(trap.delta_k(), p.drive_phase));
            let out = truth_table_of(basis, |s| sigma_z_gate(&trap, &drive, s, &opts))?;
            (out, sigma_z_table(), "sigma_z")
        }
        GateKind::SigmaPhi => {
            let d = detuning()?;
            let g = geometry(&trap, &p.beams, d)?;
            g.validate()?;
            let drive = sigma_phi_drive(&trap, &g, d)?;
            let ph = sigma_phi_phases(&trap, &drive);
            let out = truth_table_of(basis, |s| sigma_phi_gate(&trap, &drive, s, &opts))?;
            let v = two_ion_phi_basis(ph[0].spin, ph[1].spin);
            let rotated = out.table.in_basis(&v)?;
            extra.insert("spin_phases".into(), json!([ph[0].spin, ph[1].spin]));
            extra.insert("rotated_fidelity_vs_sigma_z".into(), json!(rotated.fidelity(&sigma_z_table())));
            (out, sigma_phi_table(ph[0].spin, ph[1].spin), "sigma_phi")
        }
        GateKind::RamseyWrapped => {
            let d = detuning()?;
            let g = geometry(&trap, &p.beams, d)?;
            let r = reference(&trap, &g, d, p.reference)?;
            extra.insert("reference".into(), to_value(&r));
            (ramsey_wrapped_gate(&trap, &g, r, d, basis, &opts)?, sigma_z_table(), "sigma_z")
        }
        GateKind::CiracZoller => {
            let cz = p.cirac_zoller.ok_or_else(|| schema("cirac_zoller gate needs a cirac_zoller block"))?;
            let settings = CiracZollerSettings::new(TAU * cz.rabi_hz, cz.mode);
            match cz.cnot_phase {
                None => {
                    let out = truth_table_of(basis, |s| cirac_zoller_phase_gate(s, &trap, &settings))?;
                    (out, phase_gate_table(), "cirac_zoller_phase")
                }
                Some(phi) => {
                    let out = truth_table_of(basis, |s| cirac_zoller_cnot(s, &trap, &settings, phi))?;
                    extra.insert(
                        "composition_deviation".into(),
                        json!(composed_cnot_table(phi).max_deviation(&cnot_table(phi))),
                    );
                    (out, cnot_table(phi), "cnot")
                }
            }
        }
        GateKind::FastKick => {
            let fk = p.fast_kick.unwrap_or(FastKickParams { restarts: 48, max_strength: 40.0, closure_bound: 1e-6 });
            let mut so = KickSolverOptions::for_trap(&trap)?;
            so.seed = seed;
            so.restarts = fk.restarts;
            so.max_strength = fk.max_strength;
            let sol = solve_kick_schedule(&trap, &so)?;
            let sched = sol.schedule(so.eta_base)?;
            let diag = kick_diagnostics(&sched, &trap)?;
            extra.insert("kick_times_s".into(), json!(sol.times));
            extra.insert("kick_strengths".into(), json!(sol.strengths));
            extra.insert("closure_residual".into(), json!(diag.max_residual()));
            extra.insert("branch_phases".into(), json!(diag.phases));
            let out = truth_table_of(basis, |s| Ok(fast_gate(&sched, &trap, s, fk.closure_bound)?.state))?;
            (out, sigma_z_table(), "sigma_z")
        }
    };
    let rows = outcome.table.row_fidelities(&ideal);
    let records: Vec<RowRecord> =
        (0..4).map(|c| RowRecord { input: INPUTS[c], row_fidelity: rows[c], purity: outcome.purities[c] }).collect();
    let amps: Vec<AmplitudeRecord> = (0..4)
        .flat_map(|c| {
            let col = outcome.table.columns()[c];
            (0..4).map(move |r| AmplitudeRecord { input: INPUTS[c], output: INPUTS[r], re: col[r].re, im: col[r].im })
        })
        .collect();
    let mut summary = json!({
        "gate": p.gate,
        "ideal": ideal_name,
        "table_fidelity": outcome.table.fidelity(&ideal),
        "row_fidelities": rows,
        "min_purity": outcome.min_purity(),
        "max_deviation": outcome.table.max_deviation(&ideal),
    });
    summary.as_object_mut().unwrap().extend(extra);
    Ok(Artifacts {
        tables: vec![(String::new(), csv_table(records)?), ("table".into(), csv_table(amps)?)],
        summary,
        diagnostics: json!({ "truncation": to_value(&outcome.truncation), "unitarity_defect": outcome.table.unitarity_defect() }),
        parameters: to_value(p),
    })
}

#[derive(Serialize)]
struct SweepRecord {
    parameter: f64,
    trial: u64,
    fidelity: f64,
}

fn phase_sweep(p: &SweepParams, seed: u64) -> Result<Artifacts, RunError> {
    let trap = p.trap.build()?;
    let basis = FockBasis::new(p.n_max)?;
    let d = TAU * p.detuning_hz;
    let gate = match p.gate {
        GateKind::SigmaZ => SweepGate::SigmaZ {
            trap,
            drive: calibrated_sigma_z_drive(d, FieldPair::new(trap.delta_k(), p.drive_phase)),
        },
        GateKind::SigmaPhi => SweepGate::SigmaPhi { trap, geometry: geometry(&trap, &p.beams, d)?, detuning: d },
        GateKind::RamseyWrapped => {
            let g = geometry(&trap, &p.beams, d)?;
            let r = reference(&trap, &g, d, p.reference)?;
            SweepGate::RamseyWrapped { trap, geometry: g, reference: r, detuning: d }
        }
        other => return Err(schema(format!("phase_sweep supports sigma_z, sigma_phi and ramsey_wrapped, not {other:?}"))),
    };
    p.disturbance.validate()?;
    let opts = GateOptions { engine: p.engine, ..GateOptions::default() }.exploratory();
    let fids = (0..p.trials as u64)
        .into_par_iter()
        .map(|k| monte_carlo_trial(&gate, &p.disturbance, basis, &opts, seed, k))
        .collect::<iongate_core::Result<Vec<f64>>>()?;
    let records: Vec<SweepRecord> = fids
        .iter()
        .enumerate()
        .map(|(k, &f)| SweepRecord { parameter: p.disturbance.sample(seed, k as u64).delta_phi, trial: k as u64, fidelity: f })
        .collect();
    let stats = SweepStats::from_fidelities(fids);
    let summary = json!({
        "gate": p.gate,
        "trials": stats.trials,
        "mean": stats.mean,
        "variance": stats.variance,
        "min": stats.min,
        "max": stats.max,
        "histogram": stats.histogram,
    });
    Ok(Artifacts { tables: vec![(String::new(), csv_table(records)?)], summary, diagnostics: json!({}), parameters: to_value(p) })
}

#[derive(Serialize)]
struct ScalingRecord {
    cycles: u32,
    parameter: f64,
    gate_time_s: f64,
    mean_infidelity: f64,
    rms_phase: f64,
}

fn fast_scaling(p: &ScalingParams, seed: u64) -> Result<Artifacts, RunError> {
    let trap = p.trap.build()?;
    if p.grid.points < 2 || !(p.grid.min > 0.0) || p.grid.max < p.grid.min {
        return Err(schema("grid needs min > 0, max >= min and at least two points"));
    }
    let grid = log_grid(p.grid.min, p.grid.max, p.grid.points);
    let mut records = Vec::new();
    let mut fits = Vec::new();
    for &n in &p.cycles {
        let setup = ScalingSetup {
            trap,
            family: KickFamily::Cycles { n },
            ensemble: ThermalEnsemble { v_rms: p.v_rms_m_per_s },
            reference_speed: p.reference_speed_m_per_s,
            grid: grid.clone(),
            trials: p.trials,
            seed,
            bootstrap: p.bootstrap,
        };
        if p.trials == 0 {
            return Err(schema("trials must be positive"));
        }
        let per_point = (0..grid.len())
            .into_par_iter()
            .map(|k| scaling_samples(&setup, k))
            .collect::<iongate_core::Result<Vec<_>>>()?;
        let (points, samples): (Vec<_>, Vec<_>) = per_point.into_iter().unzip();
        let report = finish_scaling(&setup, points, samples)?;
        for pt in &report.points {
            records.push(ScalingRecord {
                cycles: n,
                parameter: pt.parameter,
                gate_time_s: pt.gate_time,
                mean_infidelity: pt.mean_infidelity,
                rms_phase: pt.rms_phase,
            });
        }
        fits.push(json!({
            "cycles": n,
            "expected_slope": 2 * n,
            "slope": report.slope,
            "prefactor": report.prefactor,
            "slope_ci": report.slope_ci,
        }));
    }
    Ok(Artifacts {
        tables: vec![(String::new(), csv_table(records)?)],
        summary: json!({ "fits": fits }),
        diagnostics: json!({}),
        parameters: to_value(p),
    })
}

#[derive(Serialize)]
struct LevelRecord {
    field_t: f64,
    m_f: f64,
    branch: Branch,
    energy_ghz: f64,
}

#[derive(Serialize)]
struct PairRecord {
    first_m_f: f64,
    first_branch: Branch,
    second_m_f: f64,
    second_branch: Branch,
    field_t: f64,
    double_root: bool,
}

fn clock_states(p: &ClockParams) -> Result<Artifacts, RunError> {
    let sys = HyperfineSystem {
        nuclear_spin: p.nuclear_spin,
        hyperfine_constant: TAU * p.hyperfine_constant_hz,
        g_j: p.g_j,
        g_i: p.g_i,
        field: p.field_min_t,
    };
    if p.diagram_points < 2 {
        return Err(schema("diagram_points must be at least 2"));
    }
    let mut levels = Vec::new();
    for k in 0..p.diagram_points {
        let b = p.field_min_t + (p.field_max_t - p.field_min_t) * k as f64 / (p.diagram_points - 1) as f64;
        for l in eigensystem(&sys.at_field(b))? {
            levels.push(LevelRecord { field_t: b, m_f: l.m_f, branch: l.branch, energy_ghz: l.energy / TAU / 1e9 });
        }
    }
    let pairs = field_insensitive_pairs(&sys, (p.field_min_t, p.field_max_t), p.search_points)?;
    let pair_rows: Vec<PairRecord> = pairs
        .iter()
        .map(|q| PairRecord {
            first_m_f: q.first.m_f,
            first_branch: q.first.branch,
            second_m_f: q.second.m_f,
            second_branch: q.second.branch,
            field_t: q.field,
            double_root: q.double_root,
        })
        .collect();
    let summary = json!({
        "zero_field_splitting_ghz": sys.zero_field_splitting() / TAU / 1e9,
        "insensitive_pairs": pairs,
    });
    Ok(Artifacts {
        tables: vec![("levels".into(), csv_table(levels)?), ("pairs".into(), csv_table(pair_rows)?)],
        summary,
        diagnostics: json!({}),
        parameters: to_value(p),
    })
}

#[derive(Serialize)]
struct LineRecord {
    frequency_mhz: String,
    label: String,
    branch: i8,
    overlaps: bool,
}

#[derive(Serialize)]
struct RateRecord {
    theta: f64,
    k: i32,
    rate: f64,
}

fn comb_spectrum(p: &CombParams) -> Result<Artifacts, RunError> {
    // the line positions are linear in the inputs, so MHz go in unchanged
    let stretch = p.stretch_frequency_mhz.unwrap_or(3f64.sqrt() * p.com_frequency_mhz);
    let lines = raman_spectrum([p.com_frequency_mhz, stretch], p.eo_minus_qubit_mhz, p.scan_range_mhz, p.resolution_mhz)?;
    let rows: Vec<LineRecord> = lines
        .iter()
        .map(|l| LineRecord {
            frequency_mhz: format!("{:.6}", l.frequency),
            label: l.label.clone(),
            branch: l.branch,
            overlaps: l.overlaps,
        })
        .collect();
    let mut tables = vec![(String::new(), csv_table(rows)?)];
    if let Some(scan) = p.rate_scan {
        if scan.theta_points < 1 || scan.k_max < 0 {
            return Err(schema("rate_scan needs theta_points >= 1 and k_max >= 0"));
        }
        let mut rates = Vec::new();
        for t in 0..scan.theta_points {
            let theta = TAU * t as f64 / scan.theta_points as f64;
            for k in 0..=scan.k_max {
                rates.push(RateRecord { theta, k, rate: transition_rate(k, scan.modulation_index, theta) });
            }
        }
        tables.push(("rates".into(), csv_table(rates)?));
    }
    let overlapping = lines.iter().filter(|l| l.overlaps).count();
    Ok(Artifacts {
        tables,
        summary: json!({ "lines": lines.len(), "overlapping": overlapping, "stretch_frequency_mhz": stretch }),
        diagnostics: json!({}),
        parameters: to_value(p),
    })
}

#[derive(Serialize)]
struct TrajectoryRecord {
    t_s: f64,
    re_alpha: f64,
    im_alpha: f64,
    phase_rad: f64,
}

fn trajectory(p: &TrajectoryParams) -> Result<Artifacts, RunError> {
    if p.samples_per_loop < 3 || p.loops == 0 {
        return Err(schema("need loops >= 1 and samples_per_loop >= 3"));
    }
    let delta = TAU * p.detuning_hz;
    let g = C64::from_polar(p.force_ratio * delta.abs(), p.force_phase);
    let period = gate_duration(delta)?;
    let count = p.loops * p.samples_per_loop;
    let samples = (0..=count)
        .map(|k| {
            let t = period * k as f64 / p.samples_per_loop as f64;
            Ok((t, alpha_for_rate(g, delta, t)?))
        })
        .collect::<iongate_core::Result<Vec<_>>>()?;
    let traj = Trajectory::from_samples(samples);
    let rows: Vec<TrajectoryRecord> = traj
        .samples()
        .iter()
        .zip(traj.phases())
        .map(|(&(t, a), &ph)| TrajectoryRecord { t_s: t, re_alpha: a.re, im_alpha: a.im, phase_rad: ph })
        .collect();
    let analytic = phase_for_rate(g, delta, period * p.loops as f64)?;
    let chord = traj.geometric_phase();
    Ok(Artifacts {
        tables: vec![(String::new(), csv_table(rows)?)],
        summary: json!({
            "analytic_phase": analytic,
            "sampled_phase": chord,
            "relative_error": (chord - analytic).abs() / analytic.abs().max(f64::MIN_POSITIVE),
            "closed": traj.is_closed(1e-9 * p.force_ratio.max(1.0)),
        }),
        diagnostics: json!({}),
        parameters: to_value(p),
    })
}
