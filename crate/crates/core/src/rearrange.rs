//! Distribution functions, decreasing rearrangements, and the majorization
//! partial order for nonnegative functions on (0,1).
//!
//! Functions are represented by midpoint samples on a uniform grid, so the
//! decreasing rearrangement is a stable descending sort and integrals are
//! sample means. The stable sort realizes the measure-theoretic recovery map
//! tie rule (earlier positions first).

use crate::error::{usage, Result};

/// A nonnegative function on (0,1) given by midpoint samples
/// `values[i] = x((i + 1/2) / N)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    values: Vec<f64>,
}

impl SampledFunction {
    /// Wrap a sample vector; requires at least two finite, nonnegative values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(usage(format!(
                "sampled function needs at least 2 points, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(usage(format!(
                "sampled function values must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self { values })
    }

    /// Sample `g` at the n grid midpoints (i + 1/2)/n.
    pub fn from_fn<G: Fn(f64) -> f64>(n: usize, g: G) -> Result<Self> {
        let values = (0..n).map(|i| g((i as f64 + 0.5) / n as f64)).collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    /// Midpoint-rule integral over (0,1), i.e. the sample mean.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// A decreasing rearrangement together with the index map that recovers the
/// original ordering: `original[i] = sorted_values[permutation[i]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementResult {
    /// The samples sorted in nonincreasing order.
    pub sorted_values: Vec<f64>,
    /// Rank of each original sample among the sorted ones; ties are broken
    /// by original position, earliest first.
    pub permutation: Vec<usize>,
}

impl RearrangementResult {
    /// Apply the recovery map, reproducing the original sample order exactly.
    pub fn recover(&self) -> Vec<f64> {
        self.permutation
            .iter()
            .map(|&r| self.sorted_values[r])
            .collect()
    }
}

/// Distribution function d_x(s) = mu{t : x(t) > s} of the sampled function,
/// i.e. the fraction of samples strictly above `s`.
///
/// Nonincreasing in s and right-continuous by the strict-inequality
/// convention.
pub fn distribution_function(x: &SampledFunction, s: f64) -> f64 {
    let above = x.values.iter().filter(|&&v| v > s).count();
    above as f64 / x.values.len() as f64
}

/// Decreasing rearrangement of the samples with its recovery permutation.
pub fn decreasing_rearrangement(x: &SampledFunction) -> RearrangementResult {
    let n = x.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort by descending value keeps earlier original indices first
    // among ties, matching the recovery-map convention.
    order.sort_by(|&i, &j| x.values[j].partial_cmp(&x.values[i]).unwrap());
    let sorted_values: Vec<f64> = order.iter().map(|&i| x.values[i]).collect();
    let mut permutation = vec![0usize; n];
    for (rank, &i) in order.iter().enumerate() {
        permutation[i] = rank;
    }
    RearrangementResult {
        sorted_values,
        permutation,
    }
}

/// Outcome of a majorization comparison between two sampled functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorizationOrder {
    /// x majorizes y (also holds when the two are rearrangements of each
    /// other; the order is reflexive).
    Majorizes,
    /// y majorizes x and x does not majorize y.
    MajorizedBy,
    /// Neither direction holds: the prefix integrals cross or the total
    /// integrals differ.
    Incomparable,
}

/// Default comparison tolerance: prefix sums accumulate rounding linearly in
/// the grid size.
pub fn default_majorization_tol(x: &SampledFunction, y: &SampledFunction) -> f64 {
    let max = x
        .values
        .iter()
        .chain(y.values.iter())
        .fold(0.0f64, |m, &v| m.max(v));
    1e-9 * x.grid_size() as f64 * max
}

fn prefix_dominates(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut sa = 0.0;
    let mut sb = 0.0;
    for (&va, &vb) in a.iter().zip(b.iter()) {
        sa += va;
        sb += vb;
        if sa < sb - tol {
            return false;
        }
    }
    true
}

/// Compare x and y in the majorization order: prefix sums of the decreasing
/// rearrangements must dominate and the total sums must agree within `tol`
/// (in units of summed sample values).
pub fn majorizes(
    x: &SampledFunction,
    y: &SampledFunction,
    tol: f64,
) -> Result<MajorizationOrder> {
    if x.grid_size() != y.grid_size() {
        return Err(usage(format!(
            "majorization needs equal grids, got {} and {}",
            x.grid_size(),
            y.grid_size()
        )));
    }
    let xs = decreasing_rearrangement(x).sorted_values;
    let ys = decreasing_rearrangement(y).sorted_values;
    let total_x: f64 = xs.iter().sum();
    let total_y: f64 = ys.iter().sum();
    if (total_x - total_y).abs() > tol {
        return Ok(MajorizationOrder::Incomparable);
    }
    if prefix_dominates(&xs, &ys, tol) {
        Ok(MajorizationOrder::Majorizes)
    } else if prefix_dominates(&ys, &xs, tol) {
        Ok(MajorizationOrder::MajorizedBy)
    } else {
        Ok(MajorizationOrder::Incomparable)
    }
}

/// Strict dominance of the first rearranged sample, x*(0+) > y*(0+) beyond
/// `tol`. Low-SNR capacity reversal needs this hypothesis explicitly.
pub fn first_value_dominates(
    x: &SampledFunction,
    y: &SampledFunction,
    tol: f64,
) -> Result<bool> {
    if x.grid_size() != y.grid_size() {
        return Err(usage("first-value comparison needs equal grids"));
    }
    let x0 = x.values.iter().cloned().fold(f64::MIN, f64::max);
    let y0 = y.values.iter().cloned().fold(f64::MIN, f64::max);
    Ok(x0 > y0 + tol)
}

/// Means of g composed with x and with y. When x majorizes y and g is
/// concave, the first element does not exceed the second (Hardy–Littlewood–
/// Polya direction for functions).
pub fn schur_order_witness<G: Fn(f64) -> f64>(
    x: &SampledFunction,
    y: &SampledFunction,
    g: G,
) -> (f64, f64) {
    let mean = |v: &[f64]| v.iter().map(|&t| g(t)).sum::<f64>() / v.len() as f64;
    (mean(&x.values), mean(&y.values))
}
