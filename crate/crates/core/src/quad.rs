//! Gauss–Legendre quadrature: node generation, composite panel rules, and an
//! adaptive subdivision scheme used by the capacity integrals.

use std::sync::OnceLock;

use crate::error::{numerical, Result};

/// Evaluate the Legendre polynomial P_n and its derivative at `x`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
///
/// Roots of P_n found by Newton iteration from the Chebyshev-like initial
/// guesses; accuracy is limited only by f64 arithmetic.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

const ADAPTIVE_ORDER: usize = 15;

fn base_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ADAPTIVE_ORDER))
}

/// Single Gauss–Legendre panel over [a, b] with the cached base rule.
fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = base_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite rule with `panels` uniform panels of `order` points each.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> f64 {
    assert!(panels >= 1);
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let half = 0.5 * h;
        let mid = lo + half;
        for (&x, &w) in nodes.iter().zip(weights.iter()) {
            acc += w * f(mid + half * x);
        }
    }
    acc * 0.5 * h
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    floor_per_unit: f64,
    depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    let refined = left + right;
    if !refined.is_finite() {
        return Err(numerical(format!(
            "non-finite integrand encountered on [{a}, {b}]"
        )));
    }
    // Two floors keep deep subdivision from demanding accuracy below f64
    // resolution: one proportional to the local width, one to the local mass
    // (the two-level difference bottoms out at rounding noise of that size).
    let noise = 16.0 * f64::EPSILON * (left.abs() + right.abs());
    let accept = tol.max(floor_per_unit * (b - a)).max(noise);
    if (refined - whole).abs() <= accept || b - a < 1e-14 * (1.0 + a.abs()) {
        return Ok(refined);
    }
    if depth == 0 {
        return Err(numerical(format!(
            "adaptive quadrature failed to converge on [{a}, {b}] (residual {:.3e})",
            (refined - whole).abs()
        )));
    }
    let lv = adapt(f, a, mid, left, 0.5 * tol, floor_per_unit, depth - 1)?;
    let rv = adapt(f, mid, b, right, 0.5 * tol, floor_per_unit, depth - 1)?;
    Ok(lv + rv)
}

/// Adaptive Gauss–Legendre integration of `f` over [a, b] to absolute
/// tolerance `abs_tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(f, a, b);
    let floor_per_unit = 1e-16 * (1.0 + whole.abs()) / (b - a).abs();
    adapt(f, a, b, whole, abs_tol.max(1e-15), floor_per_unit, 44)
}

/// Adaptive integration with forced panel breaks at the given interior
/// points (integrand kinks, e.g. the active-set boundary of a water-filling
/// allocation).
pub fn integrate_adaptive_with_breaks<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let segments = edges.len() - 1;
    let tol_each = abs_tol / segments as f64;
    let mut total = 0.0;
    for pair in edges.windows(2) {
        total += integrate_adaptive(f, pair[0], pair[1], tol_each)?;
    }
    Ok(total)
}
