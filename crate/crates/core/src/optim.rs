//! Levenberg–Marquardt for small square or overdetermined real systems.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop once ‖r‖ falls below this.
    pub tol: f64,
    /// Relative central-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 400, tol: 1e-13, fd_step: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn jacobian(f: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], m: usize, h: f64) -> Vec<Vec<f64>> {
    let mut j = vec![vec![0.0; x.len()]; m];
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let step = h * x[k].abs().max(1.0);
        xp[k] = x[k] + step;
        let fp = f(&xp);
        xp[k] = x[k] - step;
        let fm = f(&xp);
        xp[k] = x[k];
        for i in 0..m {
            j[i][k] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    j
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn solve_real(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimizes ‖f(x)‖² from `x0`.
pub fn levenberg_marquardt(f: impl Fn(&[f64]) -> Vec<f64>, x0: &[f64], opts: &LmOptions) -> LmResult {
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut cost = norm(&r);
    let mut lambda = 1e-3;
    let n = x.len();
    let mut it = 0;
    while it < opts.max_iter && cost > opts.tol {
        it += 1;
        let j = jacobian(&f, &x, r.len(), opts.fd_step);
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for (row, ri) in j.iter().zip(&r) {
            for a in 0..n {
                jtr[a] -= row[a] * ri;
                for b in 0..n {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut m = jtj.clone();
            for (k, row) in m.iter_mut().enumerate() {
                row[k] += lambda * (jtj[k][k] + 1e-12);
            }
            let Some(step) = solve_real(m, jtr.clone()) else {
                lambda *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            let rn = f(&xn);
            let cn = norm(&rn);
            if cn.is_finite() && cn < cost {
                x = xn;
                r = rn;
                cost = cn;
                lambda = (lambda / 3.0).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    LmResult { x, residual_norm: cost, iterations: it }
}
