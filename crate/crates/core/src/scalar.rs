//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::Float;
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point element type for tensors, graphs, and training state.
///
/// Implemented for `f32` and `f64`. The concrete aliases at the crate root
/// (and the CLI) use `f64`; the stated gradient-check tolerances assume it.
pub trait Scalar:
    Float
    + num_traits::NumAssignOps
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }
}
