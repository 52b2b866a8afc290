//! Average capacity with and without statistical CSI at the transmitter.
//!
//! With an uninformed transmitter the power is spread evenly and the average
//! rate is `W int_0^1 E_z[log(1 + (rho/W) sigma(f) z)] df`. When the
//! transmitter knows the spectral fading variance, the optimal allocation
//! solves a concave program whose KKT system reduces, on the rearranged
//! domain, to
//!
//! ```text
//! p(f) = psi_inverse(nu / (rho sigma*(f))) / (rho sigma*(f))
//! ```
//!
//! with the multiplier nu pinned by the power constraint
//! `int_0^1 p(f) df = 1/W`. The active frequencies form a prefix (0, theta)
//! of the rearranged domain.

use crate::channel::{SpectralVariance, VarianceKind};
use crate::error::{domain, numerical, usage, Result};
use crate::quad;
use crate::specfun::{expected_log1p_exp, psi, psi_inverse};

/// Average-SNR scenario: rho = P / (N0 W) and the bandwidth W in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrScenario {
    pub rho: f64,
    pub w: f64,
}

impl SnrScenario {
    pub fn new(rho: f64, w: f64) -> Result<Self> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(domain(format!("average SNR must be >= 0, got {rho}")));
        }
        if !w.is_finite() || w <= 0.0 {
            return Err(domain(format!("bandwidth must be > 0, got {w}")));
        }
        Ok(Self { rho, w })
    }
}

/// Which computation produced a capacity value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMethod {
    NoCsi,
    PartialCsi,
    HighSnrApprox,
    MonteCarlo,
}

/// A capacity value in nats/s together with its scenario and method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub value: f64,
    pub scenario: SnrScenario,
    pub method: CapacityMethod,
}

/// Spectral power allocation on the rearranged domain, either uniform or in
/// the water-filling form parameterized by (nu, rho, sigma).
#[derive(Debug, Clone)]
pub enum PowerAllocation {
    /// Equal power 1/W everywhere.
    Uniform { w: f64 },
    /// p(f) = psi_inverse(nu / (rho sigma*(f))) / (rho sigma*(f)) on the
    /// active prefix (0, f_star), zero beyond.
    Waterfill {
        sigma: SpectralVariance,
        rho: f64,
        nu: f64,
        f_star: f64,
    },
}

impl PowerAllocation {
    pub fn uniform(w: f64) -> Self {
        Self::Uniform { w }
    }

    /// Allocation on the rearranged domain, f in [0, 1).
    pub fn star_eval(&self, f: f64) -> f64 {
        match self {
            Self::Uniform { w } => 1.0 / w,
            Self::Waterfill {
                sigma,
                rho,
                nu,
                f_star,
            } => {
                if f >= *f_star {
                    return 0.0;
                }
                let s = sigma.star_in_band(f);
                let u = nu / (rho * s);
                if u >= 1.0 {
                    0.0
                } else {
                    psi_inverse(u).expect("u > 0 on the active set") / (rho * s)
                }
            }
        }
    }

    /// Allocation mapped back to the physical band, p_hat(f_hat) for
    /// f_hat in (-W/2, W/2), via the recovery map of sigma.
    pub fn band_eval(&self, f_hat: f64) -> Result<f64> {
        match self {
            Self::Uniform { w } => {
                if f_hat.abs() >= w / 2.0 {
                    return Err(domain(format!("frequency {f_hat} outside the band")));
                }
                Ok(1.0 / w)
            }
            Self::Waterfill { sigma, .. } => {
                let w = sigma.bandwidth();
                if f_hat.abs() >= w / 2.0 {
                    return Err(domain(format!("frequency {f_hat} outside the band")));
                }
                let f = f_hat / w + 0.5;
                let t = if f <= 0.0 || f >= 1.0 {
                    1.0 - 1e-12
                } else {
                    sigma.rearrangement_map(f)?
                };
                Ok(self.star_eval(t))
            }
        }
    }

    /// Total allocated power int_0^1 p(f) df; 1/W for a feasible allocation.
    pub fn integral(&self) -> Result<f64> {
        match self {
            Self::Uniform { w } => Ok(1.0 / w),
            Self::Waterfill {
                sigma,
                f_star,
                ..
            } => match sigma.kind() {
                VarianceKind::Grid { .. } => {
                    let n = grid_len(sigma);
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += self.star_eval((i as f64 + 0.5) / n as f64);
                    }
                    Ok(acc / n as f64)
                }
                _ => quad::integrate_adaptive(&|f| self.star_eval(f), 0.0, *f_star, 1e-13),
            },
        }
    }
}

/// Water-filling solution on the rearranged domain.
#[derive(Debug, Clone)]
pub struct WaterfillingSolution {
    /// Optimal allocation p_o* (decreasing-rearrangement domain).
    pub allocation: PowerAllocation,
    /// Lagrange multiplier of the power constraint.
    pub nu: f64,
    /// Volume of active frequencies, theta = mu{f : p_o*(f) > 0}.
    pub theta: f64,
    /// Worst violation of the stationarity / complementary-slackness system
    /// over a probe grid.
    pub kkt_residual: f64,
    /// |int p - 1/W| actually achieved.
    pub power_residual: f64,
    /// Capacity of the allocation in nats/s.
    pub capacity: f64,
    /// Set when rho = 0: any feasible allocation is optimal, capacity is 0,
    /// and the reported uniform allocation is an arbitrary representative.
    pub degenerate: bool,
}

fn check_bandwidth(sigma: &SpectralVariance, scen: &SnrScenario) -> Result<()> {
    let rel = (sigma.bandwidth() - scen.w).abs() / scen.w;
    if rel > 1e-12 {
        return Err(usage(format!(
            "variance bandwidth {} does not match scenario bandwidth {}",
            sigma.bandwidth(),
            scen.w
        )));
    }
    Ok(())
}

fn grid_len(sigma: &SpectralVariance) -> usize {
    match sigma.kind() {
        VarianceKind::Grid { values, .. } => values.len(),
        _ => unreachable!("grid_len called on a closed-form variance"),
    }
}

/// Average capacity with equal power allocation (no CSI at the transmitter).
pub fn capacity_no_csi(sigma: &SpectralVariance, scen: &SnrScenario) -> Result<CapacityResult> {
    check_bandwidth(sigma, scen)?;
    let value = if scen.rho == 0.0 {
        0.0
    } else {
        let gain = scen.rho / scen.w;
        match sigma.kind() {
            VarianceKind::Grid { values, .. } => {
                let mut acc = 0.0;
                for &v in values {
                    acc += expected_log1p_exp(gain * v)?;
                }
                scen.w * acc / values.len() as f64
            }
            VarianceKind::Uncorrelated => {
                scen.w * expected_log1p_exp(gain / scen.w)?
            }
            VarianceKind::Ou { .. } => {
                let f = |f: f64| {
                    expected_log1p_exp(gain * sigma.eval_in_band(f))
                        .expect("nonnegative integrand argument")
                };
                scen.w * quad::integrate_adaptive(&f, 0.0, 1.0, 1e-12)?
            }
        }
    };
    Ok(CapacityResult {
        value,
        scenario: *scen,
        method: CapacityMethod::NoCsi,
    })
}

/// SNR-independent high-SNR capacity gap
/// `W int_0^1 log(sigma1(f) / sigma2(f)) df` between two strictly positive
/// fading variances of equal bandwidth.
pub fn high_snr_gap(
    sigma1: &SpectralVariance,
    sigma2: &SpectralVariance,
    w: f64,
) -> Result<f64> {
    for s in [sigma1, sigma2] {
        if (s.bandwidth() - w).abs() / w > 1e-12 {
            return Err(usage("bandwidth mismatch in high-SNR gap".to_string()));
        }
        if !s.strictly_positive() {
            return Err(domain(
                "high-SNR gap requires strictly positive variances".to_string(),
            ));
        }
    }
    let any_grid = matches!(sigma1.kind(), VarianceKind::Grid { .. })
        || matches!(sigma2.kind(), VarianceKind::Grid { .. });
    if any_grid {
        let n = match (sigma1.kind(), sigma2.kind()) {
            (VarianceKind::Grid { values: a, .. }, VarianceKind::Grid { values: b, .. }) => {
                if a.len() != b.len() {
                    return Err(usage("grid-backed variances must share a grid".to_string()));
                }
                a.len()
            }
            (VarianceKind::Grid { values, .. }, _) | (_, VarianceKind::Grid { values, .. }) => {
                values.len()
            }
            _ => unreachable!(),
        };
        let mut acc = 0.0;
        for i in 0..n {
            let f = (i as f64 + 0.5) / n as f64;
            acc += (sigma1.eval_in_band(f) / sigma2.eval_in_band(f)).ln();
        }
        Ok(w * acc / n as f64)
    } else {
        let f = |f: f64| (sigma1.eval_in_band(f) / sigma2.eval_in_band(f)).ln();
        Ok(w * quad::integrate_adaptive(&f, 0.0, 1.0, 1e-12)?)
    }
}

/// Total power allocated at multiplier nu, plus the active-set boundary.
fn allocated_power(sigma: &SpectralVariance, rho: f64, nu: f64) -> Result<(f64, f64)> {
    let f_star = sigma.exceedance_measure(nu / rho);
    if f_star == 0.0 {
        return Ok((0.0, 0.0));
    }
    let power = match sigma.kind() {
        VarianceKind::Grid { sorted, .. } => {
            let n = sorted.len();
            let mut acc = 0.0;
            for &s in sorted {
                let u = nu / (rho * s);
                if u < 1.0 {
                    acc += psi_inverse(u)? / (rho * s);
                }
            }
            acc / n as f64
        }
        _ => {
            let p = |f: f64| {
                let s = sigma.star_in_band(f);
                let u = nu / (rho * s);
                if u >= 1.0 {
                    0.0
                } else {
                    psi_inverse(u).expect("u in (0,1) on active set") / (rho * s)
                }
            };
            quad::integrate_adaptive(&p, 0.0, f_star, 1e-13)?
        }
    };
    Ok((power, f_star))
}

fn waterfill_capacity(
    sigma: &SpectralVariance,
    scen: &SnrScenario,
    alloc: &PowerAllocation,
    f_star: f64,
) -> Result<f64> {
    let rho = scen.rho;
    match sigma.kind() {
        VarianceKind::Grid { sorted, .. } => {
            let n = sorted.len();
            let mut acc = 0.0;
            for (i, &s) in sorted.iter().enumerate() {
                let p = alloc.star_eval((i as f64 + 0.5) / n as f64);
                if p > 0.0 {
                    acc += expected_log1p_exp(rho * s * p)?;
                }
            }
            Ok(scen.w * acc / n as f64)
        }
        _ => {
            let g = |f: f64| {
                let s = sigma.star_in_band(f);
                expected_log1p_exp(rho * s * alloc.star_eval(f))
                    .expect("nonnegative integrand argument")
            };
            Ok(scen.w * quad::integrate_adaptive(&g, 0.0, f_star, 1e-12)?)
        }
    }
}

/// Worst KKT violation over probe grids on and off the active set.
fn kkt_residual(
    sigma: &SpectralVariance,
    scen: &SnrScenario,
    alloc: &PowerAllocation,
    nu: f64,
    theta: f64,
) -> Result<f64> {
    let rho = scen.rho;
    let mut worst = 0.0f64;
    match sigma.kind() {
        VarianceKind::Grid { sorted, .. } => {
            let n = sorted.len();
            for (i, &s) in sorted.iter().enumerate() {
                let p = alloc.star_eval((i as f64 + 0.5) / n as f64);
                if p > 0.0 {
                    worst = worst.max((rho * s * psi(rho * s * p)? - nu).abs());
                } else {
                    worst = worst.max((rho * s - nu).max(0.0));
                }
            }
        }
        _ => {
            let probes = 64;
            for j in 0..probes {
                let f = theta * (j as f64 + 0.5) / probes as f64;
                if f <= 0.0 {
                    break;
                }
                let s = sigma.star_in_band(f);
                let p = alloc.star_eval(f);
                if p > 0.0 {
                    worst = worst.max((rho * s * psi(rho * s * p)? - nu).abs());
                }
            }
            for j in 0..16 {
                let f = theta + (1.0 - theta) * (j as f64 + 0.5) / 16.0;
                if f >= 1.0 {
                    break;
                }
                let s = sigma.star_in_band(f);
                worst = worst.max((rho * s - nu).max(0.0));
            }
        }
    }
    Ok(worst)
}

/// Solve the statistical-CSI water-filling problem on the rearranged domain.
///
/// The multiplier search exploits that the allocated power is continuous and
/// strictly decreasing in nu: the bracket starts at nu_hi = rho sigma*(0+)
/// (nothing active) and is expanded geometrically downward, then bisected.
pub fn waterfill(sigma: &SpectralVariance, scen: &SnrScenario) -> Result<WaterfillingSolution> {
    check_bandwidth(sigma, scen)?;
    if !sigma.strictly_positive() && sigma.star_at_zero() <= 0.0 {
        return Err(domain("fading variance is identically zero".to_string()));
    }
    let rho = scen.rho;
    let w = scen.w;

    if rho == 0.0 {
        return Ok(WaterfillingSolution {
            allocation: PowerAllocation::uniform(w),
            nu: 0.0,
            theta: 0.0,
            kkt_residual: 0.0,
            power_residual: 0.0,
            capacity: 0.0,
            degenerate: true,
        });
    }

    // Constant spectrum: symmetry forces the uniform allocation, and the
    // multiplier follows in closed form from the stationarity condition.
    if matches!(sigma.kind(), VarianceKind::Uncorrelated) {
        let s = 1.0 / w;
        let nu = rho * s * psi(rho * s / w)?;
        let allocation = PowerAllocation::Waterfill {
            sigma: sigma.clone(),
            rho,
            nu,
            f_star: 1.0,
        };
        let capacity = w * expected_log1p_exp(rho * s / w)?;
        return Ok(WaterfillingSolution {
            allocation,
            nu,
            theta: 1.0,
            kkt_residual: 0.0,
            power_residual: 0.0,
            capacity,
            degenerate: false,
        });
    }

    let target = 1.0 / w;
    let nu_peak = rho * sigma.star_at_zero();
    let mut hi = nu_peak;
    let mut lo = 0.5 * nu_peak;
    let mut guard = 0;
    while allocated_power(sigma, rho, lo)?.0 < target {
        hi = lo;
        lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            return Err(numerical(format!(
                "failed to bracket the water-filling multiplier (rho = {rho})"
            )));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        if allocated_power(sigma, rho, mid)?.0 >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    let (power, f_star) = allocated_power(sigma, rho, nu)?;
    let power_residual = (power - target).abs();
    if power_residual > 1e-8 * target.max(1.0) {
        return Err(numerical(format!(
            "power constraint missed: residual {power_residual:.3e} at nu = {nu:.6e}"
        )));
    }
    let theta = f_star;
    let allocation = PowerAllocation::Waterfill {
        sigma: sigma.clone(),
        rho,
        nu,
        f_star,
    };
    let capacity = waterfill_capacity(sigma, scen, &allocation, f_star)?;
    let kkt = kkt_residual(sigma, scen, &allocation, nu, theta)?;
    Ok(WaterfillingSolution {
        allocation,
        nu,
        theta,
        kkt_residual: kkt,
        power_residual,
        capacity,
        degenerate: false,
    })
}

/// Average capacity with the fading variance known at the transmitter.
pub fn capacity_partial_csi(
    sigma: &SpectralVariance,
    scen: &SnrScenario,
) -> Result<CapacityResult> {
    let sol = waterfill(sigma, scen)?;
    Ok(CapacityResult {
        value: sol.capacity,
        scenario: *scen,
        method: CapacityMethod::PartialCsi,
    })
}

/// Volume of active frequencies theta of the optimal allocation.
pub fn active_volume(sigma: &SpectralVariance, scen: &SnrScenario) -> Result<f64> {
    Ok(waterfill(sigma, scen)?.theta)
}
