//! Scalar abstraction shared by the geometric, closed-form and simulation code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating point type the simulator can run on (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `|a - b| <= rtol * max(|a|, |b|, 1)`.
pub fn approx_eq<T: Scalar>(a: T, b: T, rtol: T) -> bool {
    let scale = a.abs().max(b.abs()).max(T::one());
    (a - b).abs() <= rtol * scale
}

/// Relative tolerance used for closed-form identity checks.
pub const IDENTITY_RTOL: f64 = 1e-9;

/// Events closer than this (seconds) are treated as simultaneous.
pub const SIMULTANEITY_TOL: f64 = 1e-9;

/// A fleet is converged once `max_i |e_i - t*| / t*` drops below this.
pub const CONVERGENCE_RTOL: f64 = 1e-3;
