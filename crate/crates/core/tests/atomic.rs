use iongate_core::atomic::*;
use iongate_core::stats::log_log_fit;
use proptest::prelude::*;
use std::f64::consts::TAU;

/// Full H on |m_J⟩⊗|m_I⟩ built from spin matrices, m values descending.
fn full_hamiltonian(s: &HyperfineSystem) -> (Vec<Vec<f64>>, Vec<(f64, f64)>) {
    let i = s.nuclear_spin;
    let ni = (2.0 * i).round() as usize + 1;
    let mi: Vec<f64> = (0..ni).map(|k| i - k as f64).collect();
    let mut states = Vec::new();
    for mj in [0.5, -0.5] {
        for &m in &mi {
            states.push((mj, m));
        }
    }
    let n = states.len();
    let mut h = vec![vec![0.0; n]; n];
    let mu = BOHR_RAD_PER_TESLA * s.field;
    let a = s.hyperfine_constant;
    let raise = |j: f64, m: f64| ((j - m) * (j + m + 1.0)).max(0.0).sqrt();
    for (r, &(mj, m)) in states.iter().enumerate() {
        h[r][r] = mu * (s.g_j * mj + s.g_i * m) + a * mj * m;
        for (c, &(mj2, m2)) in states.iter().enumerate() {
            // ½ A (I₊J₋ + I₋J₊)
            if mj2 == mj + 1.0 && m2 == m - 1.0 {
                h[r][c] += 0.5 * a * raise(0.5, mj) * raise(i, m - 1.0);
            }
            if mj2 == mj - 1.0 && m2 == m + 1.0 {
                h[r][c] += 0.5 * a * raise(0.5, mj - 1.0) * raise(i, m);
            }
        }
    }
    (h, states)
}

fn embed(l: &HyperfineLevel, states: &[(f64, f64)]) -> Vec<f64> {
    states
        .iter()
        .map(|&(mj, m)| {
            if mj > 0.0 && (m - (l.m_f - 0.5)).abs() < 1e-12 {
                l.a
            } else if mj < 0.0 && (m - (l.m_f + 0.5)).abs() < 1e-12 {
                l.b
            } else {
                0.0
            }
        })
        .collect()
}

fn energy_of(s: &HyperfineSystem, l: &HyperfineLevel, field: f64) -> f64 {
    level(&s.at_field(field), l.m_f, l.branch).unwrap().energy
}

fn system() -> impl Strategy<Value = HyperfineSystem> {
    (0usize..5, 0.1f64..20.0, any::<bool>(), 1.9f64..2.1, -2e-3f64..2e-3, 0.0f64..3.0).prop_map(
        |(twice, a_ghz, neg, g_j, g_i, b_scale)| {
            let a = TAU * a_ghz * 1e9 * if neg { -1.0 } else { 1.0 };
            // fields up to a few times the hyperfine crossover A/μ_B
            let field = b_scale * a.abs() / BOHR_RAD_PER_TESLA;
            HyperfineSystem { nuclear_spin: 0.5 * (twice as f64 + 1.0), hyperfine_constant: a, g_j, g_i, field }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn levels_diagonalize_full_hamiltonian(s in system()) {
        let levels = eigensystem(&s).unwrap();
        let (h, states) = full_hamiltonian(&s);
        prop_assert_eq!(levels.len(), states.len());
        let scale = s.hyperfine_constant.abs() * (s.nuclear_spin + 1.0) + BOHR_RAD_PER_TESLA * s.field * 2.5;
        for (p, l) in levels.iter().enumerate() {
            prop_assert!((l.a * l.a + l.b * l.b - 1.0).abs() < 1e-12);
            let v = embed(l, &states);
            let res: f64 = h.iter().enumerate()
                .map(|(r, row)| {
                    let hv: f64 = row.iter().zip(&v).map(|(x, y)| x * y).sum();
                    (hv - l.energy * v[r]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            prop_assert!(res <= 1e-12 * scale, "residual {}", res / scale);
            for q in &levels[p + 1..] {
                let w = embed(q, &states);
                let dot: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
                prop_assert!(dot.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn slope_matches_finite_difference(s in system()) {
        let bscale = s.hyperfine_constant.abs() / BOHR_RAD_PER_TESLA;
        let h = 1e-4 * bscale;
        // keep the stencil on B >= 0
        let s = s.at_field(s.field.max(3.0 * h));
        for l in eigensystem(&s).unwrap() {
            let e = |k: f64| energy_of(&s, &l, s.field + k * h);
            let fd = (-e(2.0) + 8.0 * e(1.0) - 8.0 * e(-1.0) + e(-2.0)) / (12.0 * h);
            let exact = de_db(&l, &s).unwrap();
            let rel = (fd - exact).abs() / exact.abs().max(BOHR_RAD_PER_TESLA * s.g_i.abs()).max(1.0);
            prop_assert!(rel < 1e-8, "m_F {} {:?}: fd {} exact {}", l.m_f, l.branch, fd, exact);
        }
    }

    #[test]
    fn level_count_is_complete(s in system()) {
        let n = eigensystem(&s).unwrap().len();
        prop_assert_eq!(n, ((2.0 * s.nuclear_spin).round() as usize + 1) * 2);
    }
}

#[test]
fn clock_pair_slopes_cancel_at_zero_field() {
    let s = HyperfineSystem::cadmium_111(0.0);
    let up = level(&s, 0.0, Branch::Upper).unwrap();
    let lo = level(&s, 0.0, Branch::Lower).unwrap();
    assert!((de_db(&up, &s).unwrap() - de_db(&lo, &s).unwrap()).abs() < 1e-3);
}

#[test]
fn nonzero_field_pairs_satisfy_amplitude_relation() {
    // I = 3/2 with A < 0 has clock pairs at finite field
    let s = HyperfineSystem {
        nuclear_spin: 1.5,
        hyperfine_constant: -TAU * 625e6,
        g_j: 2.0023,
        g_i: 4.3e-4,
        field: 0.0,
    };
    let pairs = field_insensitive_pairs(&s, (1e-4, 0.05), DEFAULT_FIELD_GRID).unwrap();
    assert!(!pairs.is_empty());
    for p in &pairs {
        let here = s.at_field(p.field);
        let l1 = level(&here, p.first.m_f, p.first.branch).unwrap();
        let l2 = level(&here, p.second.m_f, p.second.branch).unwrap();
        let d = (de_db(&l1, &here).unwrap() - de_db(&l2, &here).unwrap()).abs();
        assert!(d < 1e-6 * BOHR_RAD_PER_TESLA, "{d}");
        let dm = l2.m_f - l1.m_f;
        let rhs = l2.a * l2.a + s.g_i * dm / (s.g_j - s.g_i);
        assert!((l1.a * l1.a - rhs).abs() < 1e-8);
        // and approximately equal populations
        assert!((l1.a * l1.a - l2.a * l2.a).abs() < 5.0 * s.g_i / s.g_j);
    }
}

#[test]
fn differential_stark_shift_falls_as_inverse_detuning() {
    let s = HyperfineSystem::cadmium_111(0.0);
    let l1 = level(&s, 0.0, Branch::Lower).unwrap();
    let l2 = level(&s, 0.0, Branch::Upper).unwrap();
    let hf = l2.energy - l1.energy;
    let c = DipoleCouplings { plus: 1.0, minus: 0.6 };
    let ratios = [10.0, 100.0, 1e3, 1e4];
    let x: Vec<f64> = ratios.iter().map(|r| r * hf).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&d| {
            let c1 = stark_shift(&l1, l1.energy, d, c).unwrap();
            let c2 = stark_shift(&l2, l1.energy, d, c).unwrap();
            (c1 - c2).abs() / (0.5 * (c1 + c2))
        })
        .collect();
    let (k, _) = log_log_fit(&x, &y).unwrap();
    assert!((k + 1.0).abs() < 0.05, "slope {k}");
}

#[test]
fn stretched_stark_is_single_term() {
    let s = HyperfineSystem::cadmium_111(1e-4);
    let l = level(&s, 1.0, Branch::Upper).unwrap();
    let c = DipoleCouplings { plus: 2.0, minus: 7.0 };
    let chi = stark_shift(&l, l.energy, 1e12, c).unwrap();
    assert_eq!(chi, 2.0 / 1e12);
}
