//! Static output feedback (SOF) synthesis for linear time-invariant systems
//! via a Riccati-parameterized linear matrix inequality.
//!
//! The pipeline: solve the LQR Riccati equation for P, assemble the SOF LMI
//! in the gain F and the feasibility margin alpha, maximize alpha with the
//! built-in barrier SDP solver, then certify stability and dissipativity of
//! the closed loop independently.
//!
//! All numerics are generic over a real scalar; use the `f64` aliases below
//! unless you have a reason not to.

pub mod care;
pub mod eig;
pub mod error;
pub mod lmi;
pub mod matrix;
pub mod scalar;
pub mod sim;
pub mod sof;

pub use crate::error::{Error, Result};
pub use crate::scalar::Scalar;

/// `f64` instantiations of the headline types.
pub type Matrix64 = matrix::Matrix<f64>;
pub type LinearSystem64 = care::LinearSystem<f64>;
pub type Weights64 = care::Weights<f64>;
pub type RiccatiSolution64 = care::RiccatiSolution<f64>;
pub type LinearMatrixExpr64 = lmi::LinearMatrixExpr<f64>;
pub type SdpSolution64 = lmi::SdpSolution<f64>;
pub type SofOptions64 = sof::SofOptions<f64>;
pub type SofResult64 = sof::SofResult<f64>;
pub type Trajectory64 = sim::Trajectory<f64>;

/// `f32` instantiations, for cheap screening runs only.
pub type Matrix32 = matrix::Matrix<f32>;
pub type LinearSystem32 = care::LinearSystem<f32>;
