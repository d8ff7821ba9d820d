//! Scalar abstraction for the numeric kernel.
//!
//! Everything in this crate is generic over a real floating scalar so the
//! same code runs in `f32` or `f64`. Certification-grade tolerances assume
//! `f64`; the `f32` instantiation is provided for cheap screening runs.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar usable as a matrix entry.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Convert an `f64` constant (tolerances, literals) into this scalar.
    fn of(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("constant not representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}
