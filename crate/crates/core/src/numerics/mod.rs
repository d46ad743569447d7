//! Grids, quadrature, special functions and the dense symmetric eigensolver.

mod axis;
mod dense;
mod eig;
mod matrix;
pub mod quadrature;
mod special;

#[cfg(test)]
pub(crate) mod oracle;

pub use axis::{make_uniform_axis, Axis};
pub use dense::{condition_number, determinant, solve_linear};
pub use eig::{symmetric_eig, symmetric_eigenvalues, EigenOrder, EigenResult};
pub use matrix::SymMatrix;
pub use special::{hermite, laguerre_assoc, sinc, sine_integral};
