//! Shared oracles for integration tests: quadrature replacements for the
//! closed-form exponential-integral kernels and a projected-gradient solver
//! for the discretized power-allocation problem. These deliberately avoid
//! the library's special-function path so agreement is evidence, not
//! tautology.

#![allow(dead_code)]

use fadecap::quad::{gauss_legendre, integrate_adaptive};

/// int_0^inf g(z) e^{-z} dz by adaptive quadrature on [0, 60]; the truncated
/// tail is below 1e-26 relative for the slowly growing integrands used here.
pub fn exp_weighted<G: Fn(f64) -> f64>(g: G) -> f64 {
    integrate_adaptive(&|z: f64| g(z) * (-z).exp(), 0.0, 60.0, 1e-14).unwrap()
}

/// Quadrature oracle for E_z[log(1 + alpha z)].
pub fn oracle_expected_log1p(alpha: f64) -> f64 {
    exp_weighted(|z| (alpha * z).ln_1p())
}

/// Quadrature oracle for psi(x) = E_z[z / (1 + x z)].
pub fn oracle_psi(x: f64) -> f64 {
    exp_weighted(|z| z / (1.0 + x * z))
}

/// Quadrature oracle for e^y E1(y) = int_0^inf e^{-u} / (u + y) du.
pub fn oracle_scaled_e1(y: f64) -> f64 {
    exp_weighted(|u| 1.0 / (u + y))
}

/// Fixed exponential-weight rule: nodes and weights w_j ~ e^{-z_j} such that
/// sum w_j g(z_j) ~ int g(z) e^{-z} dz to ~1e-12 for smooth bounded-growth g.
pub fn exp_rule() -> (Vec<f64>, Vec<f64>) {
    let (nodes, weights) = gauss_legendre(8);
    let panels = 30;
    let width = 2.0;
    let mut zs = Vec::with_capacity(panels * nodes.len());
    let mut ws = Vec::with_capacity(panels * nodes.len());
    for p in 0..panels {
        let lo = p as f64 * width;
        let mid = lo + 0.5 * width;
        for (&x, &w) in nodes.iter().zip(weights.iter()) {
            let z = mid + 0.5 * width * x;
            zs.push(z);
            ws.push(w * 0.5 * width * (-z).exp());
        }
    }
    (zs, ws)
}

/// Result of the discretized concave-maximization oracle.
pub struct PgSolution {
    /// Optimal value (w/N) sum_i E[log(1 + rho sigma_i p_i z)] at the final
    /// iterate.
    pub capacity: f64,
    /// Frank-Wolfe duality gap at the final iterate: an upper bound on the
    /// suboptimality of `capacity`.
    pub gap: f64,
    /// Final allocation on the grid.
    pub allocation: Vec<f64>,
}

/// Euclidean projection onto {p >= 0, sum p = total}.
fn project_simplex(p: &mut [f64], total: f64) {
    let n = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut theta = 0.0;
    let mut k = 0;
    for (i, &v) in sorted.iter().enumerate() {
        prefix += v;
        let t = (prefix - total) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
            k = i + 1;
        }
    }
    debug_assert!(k > 0, "projection needs at least one active coordinate, n={n}");
    for v in p.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Projected-gradient ascent on the discretized statistical-CSI power
/// allocation problem:
///
///   maximize (w/N) sum_i E_z[log(1 + rho sigma_i p_i z)]
///   subject to p_i >= 0, (1/N) sum_i p_i = 1/w,
///
/// with all expectations taken by the fixed exponential-weight quadrature
/// rule. Independent of the water-filling implementation (no psi inverse, no
/// multiplier search). Returns the value together with a Frank-Wolfe gap
/// certificate.
pub fn pg_waterfill(sigma_star: &[f64], rho: f64, w: f64, gap_tol: f64) -> PgSolution {
    let n = sigma_star.len();
    let nf = n as f64;
    let total = nf / w; // sum_i p_i
    let (zs, ws) = exp_rule();
    let objective = |p: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (&s, &pi) in sigma_star.iter().zip(p.iter()) {
            let a = rho * s * pi;
            let mut e = 0.0;
            for (&z, &wt) in zs.iter().zip(ws.iter()) {
                e += wt * (a * z).ln_1p();
            }
            acc += e;
        }
        w * acc / nf
    };
    let gradient = |p: &[f64], g: &mut [f64]| {
        for i in 0..n {
            let a = rho * sigma_star[i];
            let mut e = 0.0;
            for (&z, &wt) in zs.iter().zip(ws.iter()) {
                e += wt * z / (1.0 + a * p[i] * z);
            }
            g[i] = w / nf * a * e;
        }
    };

    let mut p = vec![1.0 / w; n];
    let mut grad = vec![0.0; n];
    let mut step = 1.0 / (rho * rho).max(1.0);
    let mut value = objective(&p);
    let mut gap = f64::INFINITY;
    for _ in 0..200_000 {
        gradient(&p, &mut grad);
        // Frank-Wolfe gap: best feasible point for the linearized problem
        // puts all power on the largest gradient coordinate.
        let gmax = grad.iter().cloned().fold(f64::MIN, f64::max);
        let ip: f64 = grad.iter().zip(p.iter()).map(|(g, pi)| g * pi).sum();
        gap = gmax * total - ip;
        if gap <= gap_tol {
            break;
        }
        // Backtracking on the projected step; expand on success.
        loop {
            let mut candidate: Vec<f64> = p
                .iter()
                .zip(grad.iter())
                .map(|(pi, gi)| pi + step * gi)
                .collect();
            project_simplex(&mut candidate, total);
            let cand_value = objective(&candidate);
            if cand_value >= value {
                p = candidate;
                value = cand_value;
                step *= 1.6;
                break;
            }
            step *= 0.5;
            assert!(step > 1e-18, "projected-gradient line search collapsed");
        }
    }
    PgSolution {
        capacity: value,
        gap,
        allocation: p,
    }
}
