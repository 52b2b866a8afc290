//! Covariance kernels and spectral fading variances.
//!
//! The worked channel family is the exponentially attenuated
//! Ornstein-Uhlenbeck process with covariance
//!
//! ```text
//! R(t, t') = c e^{-a|t - t'|} b e^{-b(t + t')},   t, t' >= 0,
//! ```
//!
//! whose spectral fading variance is the Lorentzian
//! `2 c d / (d^2 + (2 pi f)^2)` with `d = a + b`. Only the sum d matters
//! spectrally, but a and b are kept separate because time-domain sampling
//! distinguishes them. Uncorrelated scattering appears only through its
//! constant spectrum; its Dirac-delta kernel is never sampled in time.

use std::f64::consts::PI;

use crate::error::{domain, numerical, usage, Result};
use crate::quad;
use crate::rearrange::{decreasing_rearrangement, SampledFunction};

/// Normalization constant c = pi / (2 arctan(pi W / d)) making the spectral
/// variance integrate to one over the band (-W/2, W/2).
pub fn normalization_constant(d: f64, w: f64) -> Result<f64> {
    if !d.is_finite() || d <= 0.0 {
        return Err(domain(format!("decay parameter d must be positive, got {d}")));
    }
    if !w.is_finite() || w <= 0.0 {
        return Err(domain(format!("bandwidth W must be positive, got {w}")));
    }
    Ok(PI / (2.0 * (PI * w / d).atan()))
}

/// Attenuated Ornstein-Uhlenbeck covariance kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct OuKernel {
    a: f64,
    b: f64,
    c: f64,
}

impl OuKernel {
    /// Kernel with correlation decay `a`, power decay `b`, and explicit
    /// normalization `c`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(domain(format!("correlation decay a must be >= 0, got {a}")));
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(domain(format!("power decay b must be > 0, got {b}")));
        }
        if !c.is_finite() || c <= 0.0 {
            return Err(domain(format!("normalization c must be > 0, got {c}")));
        }
        Ok(Self { a, b, c })
    }

    /// Kernel normalized so the spectral variance integrates to one over the
    /// band (-W/2, W/2).
    pub fn normalized(a: f64, b: f64, w: f64) -> Result<Self> {
        let c = normalization_constant(a + b, w)?;
        Self::new(a, b, c)
    }

    pub fn correlation_decay(&self) -> f64 {
        self.a
    }

    pub fn power_decay(&self) -> f64 {
        self.b
    }

    pub fn normalization(&self) -> f64 {
        self.c
    }

    /// Spectral decay parameter d = a + b.
    pub fn d(&self) -> f64 {
        self.a + self.b
    }

    /// Covariance R(t, t'); zero outside the first quadrant.
    pub fn eval(&self, tau: f64, tau_p: f64) -> f64 {
        if tau < 0.0 || tau_p < 0.0 {
            return 0.0;
        }
        self.c * (-self.a * (tau - tau_p).abs()).exp() * self.b * (-self.b * (tau + tau_p)).exp()
    }

    /// Mean energy 2 * int R(t, t) dt of the process. For this kernel the
    /// integral collapses to the normalization constant c; exposed read-only
    /// for inspection.
    pub fn mean_energy(&self) -> f64 {
        self.c
    }

    /// Same kernel with the normalization scaled by `factor` (linearity
    /// checks).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.a, self.b, self.c * factor)
    }
}

/// Spectral fading variance sigma_hat_d(f) = 2 c d / (d^2 + (2 pi f)^2) of
/// the normalized OU kernel, for f in the open band (-W/2, W/2).
pub fn spectral_variance_ou(d: f64, w: f64, f_hat: f64) -> Result<f64> {
    let c = normalization_constant(d, w)?;
    if !f_hat.is_finite() || f_hat.abs() >= w / 2.0 {
        return Err(domain(format!(
            "frequency {f_hat} outside the open band (-{0}, {0})",
            w / 2.0
        )));
    }
    Ok(2.0 * c * d / (d * d + (2.0 * PI * f_hat).powi(2)))
}

/// Decreasing rearrangement of the shifted OU spectral variance on (0,1):
/// sigma*_d(f) = [pi d / arctan(pi W / d)] / (d^2 + (pi W f)^2).
pub fn rearranged_variance_ou(d: f64, w: f64, f: f64) -> Result<f64> {
    normalization_constant(d, w)?;
    if !f.is_finite() || f <= 0.0 || f >= 1.0 {
        return Err(domain(format!("rearranged domain is (0,1), got f = {f}")));
    }
    Ok(ou_star(d, w, f))
}

fn ou_star(d: f64, w: f64, f: f64) -> f64 {
    PI * d / (PI * w / d).atan() / (d * d + (PI * w * f).powi(2))
}

/// Limit sigma*_d(0+) = pi / (d arctan(pi W / d)).
pub fn rearranged_variance_ou_at_zero(d: f64, w: f64) -> Result<f64> {
    normalization_constant(d, w)?;
    Ok(PI / (d * (PI * w / d).atan()))
}

/// Frequency in (0,1) where the rearranged variances for d1 < d2 cross:
/// left of it the more correlated channel dominates, right of it the less
/// correlated one does.
pub fn crossing_frequency(d1: f64, d2: f64, w: f64) -> Result<f64> {
    if !d1.is_finite() || !d2.is_finite() || d1 <= 0.0 || d2 <= 0.0 {
        return Err(domain("decay parameters must be positive".to_string()));
    }
    if d1 >= d2 {
        return Err(usage(format!(
            "crossing frequency needs d1 < d2, got d1 = {d1}, d2 = {d2}"
        )));
    }
    if !w.is_finite() || w <= 0.0 {
        return Err(domain(format!("bandwidth W must be positive, got {w}")));
    }
    let arc = |x: f64| (PI * w / x).atan();
    let a1 = arc(d1);
    let a2 = arc(d2);
    let ratio = (d2 * a2 - d1 * a1) / (d2 * a1 - d1 * a2);
    Ok((d1 * d2 * ratio).sqrt() / (PI * w))
}

/// Cumulative rearranged variance xi_s(d) = int_0^s sigma*_d =
/// arctan(pi W s / d) / (W arctan(pi W / d)); equals 1/W at s = 1.
pub fn cumulative_rearranged(d: f64, w: f64, s: f64) -> Result<f64> {
    normalization_constant(d, w)?;
    if !s.is_finite() || !(0.0..=1.0).contains(&s) {
        return Err(domain(format!("cumulative argument must lie in [0,1], got {s}")));
    }
    Ok((PI * w * s / d).atan() / (w * (PI * w / d).atan()))
}

/// How the spectral variance is represented.
#[derive(Debug, Clone, PartialEq)]
pub enum VarianceKind {
    /// Normalized OU closed form with decay parameter d.
    Ou { d: f64 },
    /// Constant spectrum 1/W of uncorrelated scattering.
    Uncorrelated,
    /// Midpoint samples on a uniform grid over (0,1).
    Grid {
        values: Vec<f64>,
        sorted: Vec<f64>,
        ranks: Vec<usize>,
    },
}

/// A spectral fading variance on the normalized band (0,1), with the
/// bandwidth it was scaled from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVariance {
    w: f64,
    kind: VarianceKind,
}

impl SpectralVariance {
    /// Normalized OU spectral variance with decay d.
    pub fn ou(d: f64, w: f64) -> Result<Self> {
        normalization_constant(d, w)?;
        Ok(Self {
            w,
            kind: VarianceKind::Ou { d },
        })
    }

    /// Constant spectrum of uncorrelated scattering, sigma(f) = 1/W.
    pub fn uncorrelated(w: f64) -> Result<Self> {
        if !w.is_finite() || w <= 0.0 {
            return Err(domain(format!("bandwidth W must be positive, got {w}")));
        }
        Ok(Self {
            w,
            kind: VarianceKind::Uncorrelated,
        })
    }

    /// Grid-backed variance from raw midpoint samples (kept as-is).
    pub fn from_grid(values: Vec<f64>, w: f64) -> Result<Self> {
        if !w.is_finite() || w <= 0.0 {
            return Err(domain(format!("bandwidth W must be positive, got {w}")));
        }
        let samples = SampledFunction::new(values)?;
        let r = decreasing_rearrangement(&samples);
        Ok(Self {
            w,
            kind: VarianceKind::Grid {
                values: samples.values().to_vec(),
                sorted: r.sorted_values,
                ranks: r.permutation,
            },
        })
    }

    /// Grid-backed variance rescaled so its integral over (0,1) is exactly
    /// 1/W.
    pub fn from_grid_normalized(values: Vec<f64>, w: f64) -> Result<Self> {
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        if !mean.is_finite() || mean <= 0.0 {
            return Err(domain("cannot normalize an identically zero grid".to_string()));
        }
        let scale = 1.0 / (w * mean);
        Self::from_grid(values.into_iter().map(|v| v * scale).collect(), w)
    }

    pub fn bandwidth(&self) -> f64 {
        self.w
    }

    pub fn kind(&self) -> &VarianceKind {
        &self.kind
    }

    fn grid_cell(&self, f: f64, n: usize) -> usize {
        ((f * n as f64) as usize).min(n - 1)
    }

    pub(crate) fn eval_in_band(&self, f: f64) -> f64 {
        match &self.kind {
            VarianceKind::Ou { d } => {
                let c = PI / (2.0 * (PI * self.w / d).atan());
                2.0 * c * d / (d * d + (2.0 * PI * self.w * (f - 0.5)).powi(2))
            }
            VarianceKind::Uncorrelated => 1.0 / self.w,
            VarianceKind::Grid { values, .. } => values[self.grid_cell(f, values.len())],
        }
    }

    /// sigma(f) on the normalized band f in (0,1).
    pub fn eval(&self, f: f64) -> Result<f64> {
        if !f.is_finite() || f <= 0.0 || f >= 1.0 {
            return Err(domain(format!("normalized band is (0,1), got f = {f}")));
        }
        Ok(self.eval_in_band(f))
    }

    pub(crate) fn star_in_band(&self, f: f64) -> f64 {
        match &self.kind {
            VarianceKind::Ou { d } => ou_star(*d, self.w, f),
            VarianceKind::Uncorrelated => 1.0 / self.w,
            VarianceKind::Grid { sorted, .. } => sorted[self.grid_cell(f, sorted.len())],
        }
    }

    /// Decreasing rearrangement sigma*(f) for f in (0,1).
    pub fn star_eval(&self, f: f64) -> Result<f64> {
        if !f.is_finite() || f <= 0.0 || f >= 1.0 {
            return Err(domain(format!("rearranged domain is (0,1), got f = {f}")));
        }
        Ok(self.star_in_band(f))
    }

    /// sigma*(0+), the essential supremum of the variance.
    pub fn star_at_zero(&self) -> f64 {
        match &self.kind {
            VarianceKind::Ou { d } => PI / (d * (PI * self.w / d).atan()),
            VarianceKind::Uncorrelated => 1.0 / self.w,
            VarianceKind::Grid { sorted, .. } => sorted[0],
        }
    }

    /// sigma*(1-), the essential infimum.
    pub fn star_at_one(&self) -> f64 {
        match &self.kind {
            VarianceKind::Ou { d } => ou_star(*d, self.w, 1.0),
            VarianceKind::Uncorrelated => 1.0 / self.w,
            VarianceKind::Grid { sorted, .. } => *sorted.last().unwrap(),
        }
    }

    /// Lebesgue measure of {f : sigma*(f) > level}, the distribution
    /// function of the variance. For the strictly decreasing OU form this
    /// inverts sigma* exactly.
    pub fn exceedance_measure(&self, level: f64) -> f64 {
        match &self.kind {
            VarianceKind::Ou { d } => {
                if level >= self.star_at_zero() {
                    0.0
                } else if level <= self.star_at_one() {
                    1.0
                } else {
                    let k = PI * d / (PI * self.w / d).atan();
                    ((k / level - d * d).max(0.0)).sqrt() / (PI * self.w)
                }
            }
            VarianceKind::Uncorrelated => {
                if level < 1.0 / self.w {
                    1.0
                } else {
                    0.0
                }
            }
            VarianceKind::Grid { sorted, .. } => {
                let above = sorted.iter().filter(|&&v| v > level).count();
                above as f64 / sorted.len() as f64
            }
        }
    }

    /// Discrete analogue of the recovery map phi: sigma(f) = sigma*(phi(f)).
    pub fn rearrangement_map(&self, f: f64) -> Result<f64> {
        if !f.is_finite() || f <= 0.0 || f >= 1.0 {
            return Err(domain(format!("normalized band is (0,1), got f = {f}")));
        }
        Ok(match &self.kind {
            // The shifted Lorentzian is symmetric about 1/2 and unimodal.
            VarianceKind::Ou { .. } => (2.0 * f - 1.0).abs(),
            VarianceKind::Uncorrelated => f,
            VarianceKind::Grid { values, ranks, .. } => {
                let n = values.len();
                (ranks[self.grid_cell(f, n)] as f64 + 0.5) / n as f64
            }
        })
    }

    /// Integral of sigma over (0,1); equals 1/W for the normalized closed
    /// forms.
    pub fn integral(&self) -> f64 {
        match &self.kind {
            VarianceKind::Ou { .. } | VarianceKind::Uncorrelated => 1.0 / self.w,
            VarianceKind::Grid { values, .. } => {
                values.iter().sum::<f64>() / values.len() as f64
            }
        }
    }

    /// True when sigma is strictly positive on (0,1).
    pub fn strictly_positive(&self) -> bool {
        match &self.kind {
            VarianceKind::Ou { .. } | VarianceKind::Uncorrelated => true,
            VarianceKind::Grid { sorted, .. } => *sorted.last().unwrap() > 0.0,
        }
    }

    /// Midpoint samples of sigma on an n-point grid.
    pub fn samples(&self, n: usize) -> Result<SampledFunction> {
        SampledFunction::from_fn(n, |f| self.eval_in_band(f))
    }

    /// Midpoint samples of the decreasing rearrangement sigma*.
    pub fn star_samples(&self, n: usize) -> Result<SampledFunction> {
        SampledFunction::from_fn(n, |f| self.star_in_band(f))
    }
}

/// Constant-spectrum variance of uncorrelated scattering.
pub fn uncorrelated_scattering_variance(w: f64) -> Result<SpectralVariance> {
    SpectralVariance::uncorrelated(w)
}

/// Spectral fading variance at a single band frequency by 2-D quadrature of
/// the defining double integral 2 iint R(t,t') cos(2 pi (t-t') f) dt dt'.
///
/// Time integration is truncated at T = 20/b, composite Gauss-Legendre
/// panels sized to resolve both the kernel decay and the cosine, and the
/// inner integral is split at the |t - t'| kink. A refined pass guards
/// against non-convergence.
pub fn spectral_density_numeric_at(kernel: &OuKernel, f_hat: f64) -> Result<f64> {
    if !f_hat.is_finite() {
        return Err(domain(format!("frequency must be finite, got {f_hat}")));
    }
    let coarse = ou_double_integral(kernel, f_hat, 1.0)?;
    let refined = ou_double_integral(kernel, f_hat, 2.0)?;
    let scale = refined.abs().max(kernel.normalization());
    if (refined - coarse).abs() > 1e-7 * scale {
        return Err(numerical(format!(
            "time-domain quadrature did not converge at f = {f_hat}: \
             coarse {coarse:.12e}, refined {refined:.12e}"
        )));
    }
    Ok(refined)
}

fn ou_double_integral(kernel: &OuKernel, f_hat: f64, density: f64) -> Result<f64> {
    let horizon = 20.0 / kernel.power_decay();
    let scale = kernel
        .d()
        .max(2.0 * PI * f_hat.abs())
        .max(kernel.power_decay())
        .max(1.0 / horizon);
    let panels = ((horizon * scale * density).ceil() as usize).clamp(8, 4000);
    let order = 8;
    let inner = |tau: f64| {
        let f = |tau_p: f64| kernel.eval(tau, tau_p) * (2.0 * PI * (tau - tau_p) * f_hat).cos();
        // The |tau - tau_p| kink must land on a panel edge; both sides keep
        // at least one panel so no mass is dropped near the boundaries.
        let split = (((tau / horizon) * panels as f64).round() as usize).clamp(1, panels - 1);
        let left = quad::integrate_panels(&f, 0.0, tau, split, order);
        let right = quad::integrate_panels(&f, tau, horizon, panels - split, order);
        left + right
    };
    let outer = quad::integrate_panels(&inner, 0.0, horizon, panels, order);
    if !outer.is_finite() {
        return Err(numerical("non-finite value in time-domain quadrature".to_string()));
    }
    Ok(2.0 * outer)
}

/// Grid-backed spectral variance from the numeric double integral at n
/// midpoint frequencies of the band. Values are raw (linear in the kernel);
/// normalize explicitly if needed.
pub fn spectral_variance_numeric(kernel: &OuKernel, w: f64, n: usize) -> Result<SpectralVariance> {
    if !w.is_finite() || w <= 0.0 {
        return Err(domain(format!("bandwidth W must be positive, got {w}")));
    }
    if n < 2 {
        return Err(usage(format!("grid size must be at least 2, got {n}")));
    }
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let f_hat = w * ((i as f64 + 0.5) / n as f64 - 0.5);
        values.push(spectral_density_numeric_at(kernel, f_hat)?);
    }
    SpectralVariance::from_grid(values, w)
}
