use std::f64::consts::{PI, TAU};

use iongate_core::dynamics::*;
use iongate_core::hilbert::{build_ladder, fidelity, fock_amplitudes, reduced_spin_purity};
use iongate_core::{FockBasis, LinearOperator, Spin, SpinMotionState, C64};
use proptest::prelude::*;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn vacuum(b: FockBasis, spin: Spin) -> SpinMotionState {
    SpinMotionState::basis_state(b, &[spin], 0, 0).unwrap()
}

/// exp(iη(â + â†)) on one mode, by dense exponentiation.
fn kick_operator(dim_n: usize, eta: f64) -> LinearOperator {
    let b = FockBasis::new(dim_n).unwrap();
    let (a, ad) = build_ladder(b, 1).unwrap();
    let x = &a + &ad;
    x.scale(C64::new(0.0, eta)).expm()
}

fn coherent(b: FockBasis, alpha: C64) -> Vec<C64> {
    let mut out = vec![C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0)];
    for n in 1..=b.n_max() {
        let prev = out[n - 1];
        out.push(prev * alpha / (n as f64).sqrt());
    }
    out
}

#[test]
fn ladder_commutator_is_identity_below_cutoff() {
    let b = FockBasis::new(12).unwrap();
    let (a, ad) = build_ladder(b, 1).unwrap();
    let c = a.commutator(&ad);
    for i in 0..12 {
        for j in 0..12 {
            let want = if i == j { 1.0 } else { 0.0 };
            // a few ulps of the largest product n + 1
            let e = (c[(i, j)] - C64::new(want, 0.0)).norm();
            assert!(e <= 4.0 * f64::EPSILON * (i + 1) as f64, "({i},{j}) off by {e:e}");
        }
    }
    for m in 0..13 {
        for n in 0..13 {
            assert_eq!(ad[(m, n)], a[(n, m)].conj());
        }
    }
}

#[test]
fn alpha_reaches_diameter_at_half_period() {
    let delta = TAU * 3e4;
    let x0 = 1e-8;
    // F x₀ / (2ħδ) = 1
    let force = C64::new(2.0 * HBAR * delta / x0, 0.0);
    let a = alpha_of_t(force, delta, x0, PI / delta).unwrap();
    assert!((a - C64::new(2.0, 0.0)).norm() < 1e-12);
    assert!(alpha_of_t(force, delta, x0, TAU / delta).unwrap().norm() < 1e-12);
    assert_eq!(alpha_of_t(force, delta, x0, 0.0).unwrap(), ZERO);
    // |F x₀ / ħδ| = 1 gives π/2
    let unit = C64::new(HBAR * delta / x0, 0.0);
    assert!((round_trip_phase(unit, delta, x0).unwrap() - PI / 2.0).abs() < 1e-12);
    assert_eq!(round_trip_phase(ZERO, delta, x0).unwrap(), 0.0);
}

#[test]
fn concatenated_loops_add_their_phases() {
    let delta = TAU * 1e4;
    let g = C64::new(0.7 * delta, 0.3 * delta);
    let t = TAU / delta;
    let half: Vec<(f64, C64)> = (0..=500).map(|k| {
        let s = t / 2.0 * k as f64 / 500.0;
        (s, alpha_for_rate(g, delta, s).unwrap())
    }).collect();
    let rest: Vec<(f64, C64)> = (0..=500).map(|k| {
        let s = t / 2.0 + t / 2.0 * k as f64 / 500.0;
        (s, alpha_for_rate(g, delta, s).unwrap())
    }).collect();
    let whole = Trajectory::from_samples(half.clone()).concat(&Trajectory::from_samples(rest.clone()));
    let a = Trajectory::from_samples(half);
    let b = Trajectory::from_samples(rest);
    // chord phases are additive across a shared endpoint
    assert!((whole.geometric_phase() - a.geometric_phase() - b.geometric_phase()).abs() < 1e-12);
    let exact = phase_for_rate(g, delta, t).unwrap();
    assert!((whole.geometric_phase() - exact).abs() / exact < 1e-4);
    assert!(whole.is_closed(1e-12));
}

#[test]
fn carrier_without_momentum_commutes_with_phonon_number() {
    let trap = TrapConfig::from_stretch_eta(TAU * 2e6, 9.0 * AMU, 0.1, 4).unwrap();
    let b = FockBasis::new(4).unwrap();
    let drive = RamanDrive::resonant(TAU * 1e5, Sideband::Carrier, FieldPair::copropagating(0.4));
    let h = build_interaction_hamiltonian(&Drive::Raman(drive), &trap, b, 2).unwrap().to_dense_at(3e-7).unwrap();
    for mode in [1, 2] {
        let n = number_operator_full(b, 2, mode).unwrap().to_dense_at(0.0).unwrap();
        assert!(h.commutator(&n).max_abs() <= 1e-12 * h.max_abs());
    }
}

#[test]
fn red_sideband_pairs_down_one_with_up_zero() {
    let trap = TrapConfig::from_stretch_eta(TAU * 2e6, 9.0 * AMU, 0.1, 4).unwrap();
    let b = FockBasis::new(5).unwrap();
    let drive = RamanDrive::resonant(TAU * 1e5, Sideband::red(2), FieldPair::new(trap.delta_k(), 0.0));
    let h = build_interaction_hamiltonian(&Drive::Raman(drive), &trap, b, 1).unwrap();
    let s = SpinMotionState::basis_state(b, &[Spin::Down], 0, 1).unwrap();
    let out = h.apply_at(1e-7, s.amplitudes());
    let target = s.index(0, 0, 0);
    for (i, v) in out.iter().enumerate() {
        if i == target {
            assert!(v.norm() > 0.0);
        } else {
            assert!(v.norm() < 1e-9 * out[target].norm(), "leak into {i}");
        }
    }
}

#[test]
fn stretch_drive_leaves_com_populations_alone() {
    let trap = TrapConfig::from_stretch_eta(TAU * 2e6, 9.0 * AMU, 0.05, 4).unwrap();
    let b = FockBasis::new(6).unwrap();
    let drive = RamanDrive::resonant(TAU * 2e4, Sideband::blue(2), FieldPair::new(trap.delta_k(), 0.0));
    let h = build_interaction_hamiltonian(&Drive::Raman(drive), &trap, b, 2).unwrap();
    let s = SpinMotionState::basis_state(b, &[Spin::Up, Spin::Up], 1, 0).unwrap();
    let before = s.mode_populations(1).unwrap();
    let out = evolve_numeric(&h, &s, 2e-5, max_stable_dt(&h).min(1e-7)).unwrap();
    let after = out.mode_populations(1).unwrap();
    for (x, y) in before.iter().zip(&after) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn entangled_cat_purity() {
    let b = FockBasis::new(60).unwrap();
    let alpha = C64::new(3.0, 0.0);
    let vac = fock_amplitudes(b, 0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // ion 2 stays in |↑⟩
    let mut amps =
        SpinMotionState::product(b, &[C64::new(r, 0.0), ZERO, ZERO, ZERO], &vac, &coherent(b, alpha)).unwrap().into_amplitudes();
    let other = SpinMotionState::product(b, &[ZERO, ZERO, C64::new(r, 0.0), ZERO], &vac, &coherent(b, -alpha)).unwrap();
    for (x, y) in amps.iter_mut().zip(other.amplitudes()) {
        *x += y;
    }
    let s = SpinMotionState::from_amplitudes(b, 2, amps).unwrap();
    let want = 0.5 + 0.5 * (-4.0 * alpha.norm_sqr()).exp();
    assert!((reduced_spin_purity(&s).unwrap() - want).abs() < 1e-10);

    let v = SpinMotionState::product(b, &[C64::new(1.0, 0.0), ZERO], &vac, &vac).unwrap();
    let c = SpinMotionState::product(b, &[C64::new(1.0, 0.0), ZERO], &vac, &coherent(b, C64::new(1.0, 0.0))).unwrap();
    assert!((fidelity(&v, &c).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn displacements_compose_with_phase(ar in -1.0f64..1.0, ai in -1.0f64..1.0, br in -1.0f64..1.0, bi in -1.0f64..1.0) {
        let b = FockBasis::new(48).unwrap();
        let (alpha, beta) = (C64::new(ar, ai), C64::new(br, bi));
        let s = vacuum(b, Spin::Up);
        let two = displace(&displace(&s, 2, beta).unwrap(), 2, alpha).unwrap();
        let one = displace(&s, 2, alpha + beta).unwrap();
        let overlap = one.inner(&two).unwrap();
        let phase = (alpha * beta.conj()).im;
        prop_assert!((overlap - C64::from_polar(1.0, phase)).norm() < 1e-10);
        let back = displace(&displace(&s, 1, alpha).unwrap(), 1, -alpha).unwrap();
        prop_assert!((back.inner(&s).unwrap() - 1.0).norm() < 1e-10);
        prop_assert!((two.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn debye_waller_matches_matrix_exponential(n in 0usize..10, eta in 0.0f64..0.6) {
        let k = kick_operator(n + 40, eta);
        let dw = debye_waller(n as i64, 0, eta, 0.0, DwOrder::Carrier).unwrap();
        prop_assert!((dw.abs() - k[(n, n)].norm()).abs() < 1e-10);
        if n >= 1 {
            let sb = debye_waller(0, n as i64, 0.0, eta, DwOrder::FirstSideband(2)).unwrap();
            prop_assert!((sb.abs() - k[(n - 1, n)].norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn raman_hamiltonians_are_hermitian(
        rabi in 1e3f64..1e6, det in -1e5f64..1e5, phi in 0.0f64..TAU, t in 0.0f64..1e-4,
        kind in 0usize..5, eta in 0.01f64..0.2,
    ) {
        let trap = TrapConfig::from_stretch_eta(TAU * 2e6, 9.0 * AMU, eta, 3).unwrap();
        let sideband = match kind {
            0 => Sideband::Carrier,
            1 => Sideband::red(1),
            2 => Sideband::red(2),
            3 => Sideband::blue(1),
            _ => Sideband::blue(2),
        };
        let mut drive = RamanDrive::resonant(rabi, sideband, FieldPair::new(trap.delta_k(), phi));
        drive.detuning = det;
        let h = build_interaction_hamiltonian(&Drive::Raman(drive), &trap, FockBasis::new(3).unwrap(), 2)
            .unwrap()
            .to_dense_at(t)
            .unwrap();
        prop_assert!(h.hermiticity_defect() <= 1e-14 * h.max_abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn numeric_force_matches_displacement_with_phase(
        ratio_up in 0.1f64..1.0, ratio_down in -1.0f64..-0.1, arg in 0.0f64..TAU, frac in 0.2f64..1.0,
    ) {
        let trap = TrapConfig::from_stretch_eta(TAU * 2e6, 111.0 * AMU, 1e-9, 0).unwrap();
        let b = FockBasis::new(20).unwrap();
        let delta = TAU * 2e4;
        let g = [C64::from_polar(ratio_up * delta, arg), C64::from_polar(ratio_down * delta, arg)];
        let f = StarkForce { force_rate: [g, [ZERO, ZERO]], detuning: delta, mode: 2, pair: FieldPair::new(trap.delta_k(), 0.0) };
        let h = build_interaction_hamiltonian(&Drive::StarkForce(f), &trap, b, 1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let vac = fock_amplitudes(b, 0);
        let s = SpinMotionState::product(b, &[C64::new(r, 0.0), C64::new(r, 0.0)], &vac, &vac).unwrap();
        let t = frac * TAU / delta;
        let opts = EvolveOptions::default().with_integrator(Integrator::CommutatorFree4);
        let got = evolve_numeric_with(&h, &s, t, max_stable_dt(&h).min(t / 400.0), &opts).unwrap().state;
        // e^{iΦ(t)} D(α(t)) per spin, written out here
        let mut amps = vec![ZERO; s.dim()];
        for spin in 0..2 {
            let a = g[spin] / (2.0 * delta) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, delta * t));
            let phi = (g[spin] / (2.0 * delta)).norm_sqr() * (delta * t - (delta * t).sin());
            let branch = coherent(b, a);
            for (n, c) in branch.iter().enumerate() {
                amps[s.index(spin, 0, n)] = c * C64::from_polar(r, phi);
            }
        }
        let want = SpinMotionState::from_amplitudes(b, 1, amps).unwrap();
        let overlap = want.inner(&got).unwrap();
        prop_assert!(overlap.norm_sqr() >= 1.0 - 1e-6, "{}", overlap.norm_sqr());
        prop_assert!((overlap - 1.0).norm() < 1e-3);
    }
}
