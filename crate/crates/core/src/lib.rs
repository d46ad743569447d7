//! Multimode parametric-interaction kernels and their squeezed supermodes.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: axes, quadrature, special functions and the dense
//!   symmetric eigensolver everything else builds on.
//! * [`pumps`]: pump spectral amplitudes and pulse-shaper models.
//! * [`kernellab`]: construction of sampled kernels `K(x, x')`.
//! * [`supermodes`]: numeric Fredholm diagonalization and the closed-form
//!   spectrum of modulated Gaussian kernels.
//! * [`opodyn`]: below-threshold squeezing of each supermode.
//! * [`transverse`]: Laguerre-Gauss overlaps for a transverse mode family.
//! * [`cluster`]: coupling matrices, GHZ-like covariances and mode profiles.
//! * [`cli`]: configuration-driven front end used by the `squeezelab` binary.

pub mod cli;
pub mod cluster;
pub mod error;
pub mod export;
pub mod kernellab;
pub mod numerics;
pub mod opodyn;
pub mod pumps;
pub mod supermodes;
pub mod transverse;

pub use error::{Error, Result};
