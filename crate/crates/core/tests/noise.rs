use std::f64::consts::{PI, TAU};

use iongate_core::dynamics::{FieldPair, TrapConfig, AMU};
use iongate_core::gates::{calibrated_sigma_z_drive, GateOptions};
use iongate_core::noise::*;
use iongate_core::FockBasis;
use proptest::prelude::*;

fn trap() -> TrapConfig {
    TrapConfig::from_stretch_eta(2.0 * PI * 2.0e6, 9.0 * AMU, 0.05, 6).unwrap()
}

fn plan() -> SidebandPlan {
    SidebandPlan { omega_a: 2.3e15, qubit: 2.0 * PI * 1.25e10, mode_frequency: 2.0 * PI * 3.46e6, delta: 2.0 * PI * 4e4 }
}

fn scaling_setup(n: u32, v_rms: f64, grid: Vec<f64>, trials: usize, seed: u64) -> ScalingSetup {
    ScalingSetup {
        trap: TrapConfig::from_stretch_eta(2.0 * PI * 1e6, 9.0 * AMU, 0.1, 2).unwrap(),
        family: KickFamily::Cycles { n },
        ensemble: ThermalEnsemble { v_rms },
        reference_speed: Some(0.3),
        grid,
        trials,
        seed,
        bootstrap: 0,
    }
}

// least squares slope of ln y against ln x
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn spacing_phase_over_whole_and_half_periods() {
    for n in [1u32, 2, 5, 8] {
        let t = TrapConfig::from_stretch_eta(2.0 * PI * 2.0e6, 9.0 * AMU, 0.05, n).unwrap();
        assert!(wrapped_distance(spacing_phase(&t)) < 1e-9, "n = {n}");
        let lambda = TAU / t.delta_k().abs();
        let x = t.ion_positions();
        let mid = 0.5 * (x[0] + x[1]);
        let half = t.with_positions([mid - (n as f64 + 0.5) * lambda / 2.0, mid + (n as f64 + 0.5) * lambda / 2.0]);
        assert!(wrapped_distance(spacing_phase(&half) - PI) < 1e-9, "n = {n}");
    }
}

#[test]
fn sensitive_geometry_moves_spin_phase_only() {
    let t = trap();
    let g = BeamGeometry::phase_sensitive(plan(), t.delta_k());
    let p0 = spin_motion_phases(&g, &t).unwrap();
    let p1 = spin_motion_phases(&g.with_path_shift(0.9), &t).unwrap();
    for ion in 0..2 {
        assert!(wrapped_distance(p1[ion].motion - p0[ion].motion) < 1e-12);
        assert!(wrapped_distance(p1[ion].spin - p0[ion].spin) > 0.5);
    }
}

#[test]
fn insensitive_geometry_moves_motion_phase_only() {
    let t = trap();
    let g = BeamGeometry::phase_insensitive(plan(), t.delta_k());
    let p0 = spin_motion_phases(&g, &t).unwrap();
    let p1 = spin_motion_phases(&g.with_path_shift(0.9), &t).unwrap();
    for ion in 0..2 {
        assert!(wrapped_distance(p1[ion].spin - p0[ion].spin) < 1e-12);
        assert!(wrapped_distance(p1[ion].motion - p0[ion].motion) > 0.5);
    }
}

#[test]
fn stationary_ion_sees_no_kick_phase() {
    let t = trap();
    for n in 1..5 {
        let kicks = KickFamily::Cycles { n }.kicks(&t, 2e-7).unwrap();
        let r = vec![4.2e-8; kicks.len()];
        assert!(fast_gate_random_phase(&kicks, &r, &t).unwrap().abs() < 1e-12);
    }
}

#[test]
fn single_pair_phase_is_dk_times_displacement() {
    let t = trap();
    let kicks = KickFamily::Cycles { n: 1 }.kicks(&t, 2e-7).unwrap();
    let r = 3.3e-9;
    let phi = fast_gate_random_phase(&kicks, &[r, 0.0], &t).unwrap();
    assert!((phi.abs() - t.delta_k().abs() * r).abs() < 1e-12 * t.delta_k().abs() * r);
}

#[test]
fn motionless_ensemble_has_no_infidelity() {
    let rep = infidelity_scaling_experiment(&scaling_setup(1, 0.0, log_grid(1e-3, 1e-1, 4), 200, 5)).unwrap();
    for p in &rep.points {
        assert_eq!(p.mean_infidelity, 0.0);
        assert_eq!(p.rms_phase, 0.0);
    }
}

#[test]
fn rms_phase_grows_as_power_of_gate_time() {
    for n in [1u32, 2] {
        let rep = infidelity_scaling_experiment(&scaling_setup(n, 0.3, log_grid(1e-3, 1e-2, 5), 4000, 31)).unwrap();
        let x: Vec<f64> = rep.points.iter().map(|p| p.gate_time).collect();
        let y: Vec<f64> = rep.points.iter().map(|p| p.rms_phase).collect();
        let k = loglog_slope(&x, &y);
        assert!((k - n as f64).abs() < 0.05, "n = {n}: slope {k}");
    }
}

#[test]
fn scaling_runs_are_reproducible() {
    let grid = log_grid(1e-3, 1e-1, 3);
    let a = infidelity_scaling_experiment(&scaling_setup(2, 0.3, grid.clone(), 300, 9)).unwrap();
    let b = infidelity_scaling_experiment(&scaling_setup(2, 0.3, grid.clone(), 300, 9)).unwrap();
    let c = infidelity_scaling_experiment(&scaling_setup(2, 0.3, grid, 300, 10)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.points, c.points);
}

#[test]
fn sigma_z_gate_ignores_path_phase() {
    let t = trap();
    let gate = SweepGate::SigmaZ { trap: t, drive: calibrated_sigma_z_drive(plan().delta, FieldPair::new(t.delta_k(), 0.0)) };
    let spec = DisturbanceSpec { delta_phi: Distribution::Uniform { low: 0.0, high: TAU }, ..Default::default() };
    let b = FockBasis::new(10).unwrap();
    let opts = GateOptions::analytic();
    let clean = disturbed_fidelity(&gate, &PathDisturbance::default(), b, &opts).unwrap();
    let s = monte_carlo_gate_sweep(&gate, &spec, b, &opts, 32, 4).unwrap();
    assert!(clean > 0.999);
    assert!(s.fidelities.iter().all(|f| (f - clean).abs() < 1e-6));
}

proptest! {
    #[test]
    fn spin_motion_phases_are_affine_in_path_shift(a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let t = trap();
        for g in [BeamGeometry::phase_sensitive(plan(), t.delta_k()), BeamGeometry::phase_insensitive(plan(), t.delta_k())] {
            let at = |d: f64| spin_motion_phases(&g.with_path_shift(d), &t).unwrap();
            let (p0, pa, pb, pab) = (at(0.0), at(a), at(b), at(a + b));
            for ion in 0..2 {
                let ds = (pab[ion].spin - p0[ion].spin) - (pa[ion].spin - p0[ion].spin) - (pb[ion].spin - p0[ion].spin);
                let dm = (pab[ion].motion - p0[ion].motion) - (pa[ion].motion - p0[ion].motion) - (pb[ion].motion - p0[ion].motion);
                prop_assert!(wrapped_distance(ds) < 1e-9);
                prop_assert!(wrapped_distance(dm) < 1e-9);
            }
        }
    }

    #[test]
    fn kick_phase_is_linear_in_positions(r in prop::collection::vec(-1e-7..1e-7f64, 4), s in -3.0..3.0f64) {
        let t = trap();
        let kicks = KickFamily::Cycles { n: 2 }.kicks(&t, 2e-7).unwrap();
        let scaled: Vec<f64> = r.iter().map(|x| s * x).collect();
        let p = fast_gate_random_phase(&kicks, &r, &t).unwrap();
        let q = fast_gate_random_phase(&kicks, &scaled, &t).unwrap();
        prop_assert!((q - s * p).abs() < 1e-9 * (1.0 + p.abs()));
    }
}
