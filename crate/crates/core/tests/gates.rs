use std::f64::consts::{FRAC_1_SQRT_2, PI};

use iongate_core::dynamics::{TrapConfig, AMU};
use iongate_core::gates::*;
use iongate_core::hilbert::fidelity;
use iongate_core::{FockBasis, Spin, SpinMotionState, C64};
use proptest::prelude::*;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const UU: usize = 0;
const UD: usize = 1;
const DU: usize = 2;
const DD: usize = 3;

fn spin_state(b: FockBasis, spin: [C64; 4]) -> SpinMotionState {
    let d = b.mode_dim();
    let mut amps = vec![ZERO; 4 * d * d];
    for (s, a) in spin.iter().enumerate() {
        amps[s * d * d] = *a;
    }
    SpinMotionState::from_amplitudes(b, 2, amps).unwrap()
}

fn basis2(b: FockBasis, s: usize) -> SpinMotionState {
    let mut spin = [ZERO; 4];
    spin[s] = C64::new(1.0, 0.0);
    spin_state(b, spin)
}

fn coherent(n_max: usize, alpha: C64) -> Vec<C64> {
    let mut out = vec![C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0)];
    for n in 1..=n_max {
        let prev = out[n - 1];
        out.push(prev * alpha / (n as f64).sqrt());
    }
    out
}

fn cz_trap() -> (TrapConfig, CiracZollerSettings) {
    let trap = TrapConfig::from_stretch_eta(2.0 * PI * 1e6, 9.0 * AMU, 0.1, 3).unwrap();
    (trap, CiracZollerSettings::new(2.0 * PI * 1e5, 1))
}

#[test]
fn carrier_pulse_spec_examples() {
    let b = FockBasis::new(2).unwrap();
    let up = SpinMotionState::basis_state(b, &[Spin::Up], 0, 0).unwrap();
    let down = SpinMotionState::basis_state(b, &[Spin::Down], 0, 0).unwrap();

    let out = carrier_pulse(&up, PI / 2.0, 0.0, 0).unwrap();
    assert!((out.amplitude(0, 0, 0) - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    assert!((out.amplitude(1, 0, 0) + C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);

    let back = carrier_pulse(&out, -PI / 2.0, 0.0, 0).unwrap();
    assert!((fidelity(&back, &up).unwrap() - 1.0).abs() < 1e-14);

    let out = carrier_pulse(&down, PI / 2.0, PI / 3.0, 0).unwrap();
    assert!((out.amplitude(0, 0, 0) - C64::from_polar(FRAC_1_SQRT_2, -PI / 3.0)).norm() < 1e-15);
    assert!((out.amplitude(1, 0, 0) - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
}

#[test]
fn phase_gate_flips_down_down_in_superposition() {
    let (trap, settings) = cz_trap();
    let b = FockBasis::new(4).unwrap();
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let input = spin_state(b, [ZERO, r, ZERO, r]);
    let want = spin_state(b, [ZERO, r, ZERO, -r]);
    let out = cirac_zoller_phase_gate(&input, &trap, &settings).unwrap();
    assert!(fidelity(&out, &want).unwrap() > 1.0 - 1e-8);
}

#[test]
fn cnot_rows_at_zero_phase() {
    let (trap, settings) = cz_trap();
    let b = FockBasis::new(4).unwrap();
    let out = cirac_zoller_cnot(&basis2(b, DU), &trap, &settings, 0.0).unwrap();
    assert!(fidelity(&out, &basis2(b, DD)).unwrap() > 1.0 - 1e-8);
    let out = cirac_zoller_cnot(&basis2(b, UD), &trap, &settings, 0.0).unwrap();
    assert!(fidelity(&out, &basis2(b, UD)).unwrap() > 1.0 - 1e-8);
    // the reverse row carries the conjugate phase
    let t = cnot_table(0.7);
    assert!((t.columns()[DD][DU] - C64::from_polar(1.0, -0.7)).norm() < 1e-15);
    assert!((t.columns()[DU][DD] - C64::from_polar(1.0, 0.7)).norm() < 1e-15);
}

#[test]
fn kick_displaces_down_branches() {
    let b = FockBasis::new(30).unwrap();
    let (e1, e2) = (0.13, 0.1);
    let k = KickEvent { time: 0.0, delta_k_sign: 1, eta_1: e1, eta_2: e2 };
    let out = fast_kick_pair(&basis2(b, DD), &k).unwrap();
    let c = coherent(30, C64::new(0.0, 2.0 * e1));
    for (n, want) in c.iter().enumerate() {
        assert!((out.amplitude(DD, n, 0) - want).norm() < 1e-12, "n = {n}");
    }
    assert!(out.amplitude(DD, 0, 1).norm() < 1e-14);

    let out = fast_kick_pair(&basis2(b, UU), &k).unwrap();
    assert!((out.amplitude(UU, 0, 0) - C64::new(1.0, 0.0)).norm() < 1e-15);

    // ion 2 moves the stretch mode the other way
    let out = fast_kick_pair(&basis2(b, UD), &k).unwrap();
    let c1 = coherent(30, C64::new(0.0, e1));
    let c2 = coherent(30, C64::new(0.0, -e2));
    assert!((out.amplitude(UD, 1, 1) - c1[1] * c2[1]).norm() < 1e-12);
}

#[test]
fn opposite_kicks_cancel() {
    let b = FockBasis::new(30).unwrap();
    let q = C64::new(0.5, 0.0);
    let input = spin_state(b, [q, C64::new(0.0, 0.5), -q, q]);
    let k = KickEvent { time: 0.0, delta_k_sign: 1, eta_1: 0.2, eta_2: 0.15 };
    let back = KickEvent { delta_k_sign: -1, ..k };
    let out = fast_kick_pair(&fast_kick_pair(&input, &k).unwrap(), &back).unwrap();
    assert!((fidelity(&out, &input).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn doubled_kicks_quadruple_phases() {
    let trap = TrapConfig::from_stretch_eta(2.0 * PI * 1e6, 9.0 * AMU, 0.1, 2).unwrap();
    let times = [0.0, 1.3e-7, 4.1e-7, 7.7e-7];
    let signs = [1, -1, -1, 1];
    let kicks = |scale: f64| -> Vec<KickEvent> {
        times
            .iter()
            .zip(signs)
            .map(|(&time, s)| KickEvent { time, delta_k_sign: s, eta_1: 0.13 * scale, eta_2: 0.1 * scale })
            .collect()
    };
    let one = kick_diagnostics(&GateSchedule::from_kicks(kicks(1.0), 1e-6).unwrap(), &trap).unwrap();
    let two = kick_diagnostics(&GateSchedule::from_kicks(kicks(2.0), 1e-6).unwrap(), &trap).unwrap();
    assert!(one.phases.iter().any(|p| p.abs() > 1e-3));
    for s in 0..4 {
        assert!((two.phases[s] - 4.0 * one.phases[s]).abs() < 1e-12 * (1.0 + one.phases[s].abs()));
    }
}

#[test]
fn empty_schedule_is_identity() {
    let trap = TrapConfig::from_stretch_eta(2.0 * PI * 1e6, 9.0 * AMU, 0.1, 2).unwrap();
    let b = FockBasis::new(3).unwrap();
    let q = C64::new(0.5, 0.0);
    let input = spin_state(b, [q, -q, C64::new(0.0, 0.5), q]);
    let sched = GateSchedule { label: GateLabel::FastKick, steps: vec![] };
    let rep = fast_gate(&sched, &trap, &input, 1e-9).unwrap();
    assert_eq!(rep.state, input);
    assert_eq!(rep.diagnostics.phases, [0.0; 4]);
}

#[test]
fn open_schedule_is_rejected() {
    let trap = TrapConfig::from_stretch_eta(2.0 * PI * 1e6, 9.0 * AMU, 0.1, 2).unwrap();
    let b = FockBasis::new(3).unwrap();
    let k = KickEvent { time: 0.0, delta_k_sign: 1, eta_1: 0.1, eta_2: 0.1 };
    let sched = GateSchedule::from_kicks(vec![k], 1e-6).unwrap();
    let err = fast_gate(&sched, &trap, &basis2(b, DD), 1e-6).unwrap_err();
    assert!(err.is_physics_precondition());
}

proptest! {
    #[test]
    fn sigma_phi_table_is_sigma_z_in_rotated_basis(p1 in -PI..PI, p2 in -PI..PI) {
        let rot = sigma_phi_table(p1, p2).in_basis(&two_ion_phi_basis(p1, p2)).unwrap();
        prop_assert!(rot.max_deviation(&sigma_z_table()) < 1e-13);
    }

    #[test]
    fn composed_cnot_matches_table(phi in -PI..PI) {
        prop_assert!(composed_cnot_table(phi).max_deviation(&cnot_table(phi)) < 1e-13);
        prop_assert!(composed_cnot_table(phi).unitarity_defect() < 1e-13);
    }
}
