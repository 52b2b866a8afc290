//! Average capacity of continuous-time frequency-selective Rayleigh fading
//! channels with correlated scattering.
//!
//! The crate computes the ergodic rate of a complex Gaussian channel process
//! in closed form, orders correlation scenarios through majorization of
//! spectral fading variances, solves the statistical-CSI water-filling
//! problem through its KKT system, and validates the closed forms against a
//! Monte Carlo Gaussian-process oracle.
//!
//! Modules:
//!
//! * [`specfun`] — scaled exponential integral and the psi kernel with its
//!   inverse.
//! * [`rearrange`] — distribution functions, decreasing rearrangements, and
//!   the majorization order on sampled functions.
//! * [`channel`] — attenuated Ornstein-Uhlenbeck kernels and spectral fading
//!   variances, closed form and numeric.
//! * [`capacity`] — average rates with and without transmitter knowledge of
//!   the fading variance; water-filling allocations.
//! * [`mc`] — reproducible Monte Carlo estimation from sampled channel
//!   realizations.
//! * [`quad`] — the Gauss-Legendre quadrature used throughout.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod mc;
pub mod quad;
pub mod rearrange;
pub mod specfun;

pub use error::{Error, Result};
