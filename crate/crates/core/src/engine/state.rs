use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fleet::RobotParams;
use crate::num::Scalar;

/// Direction of travel along the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Orientation {
    /// Increasing cycle position (`+1`).
    Forward,
    /// Decreasing cycle position (`-1`).
    Backward,
}

impl Orientation {
    pub fn sign(self) -> i8 {
        match self {
            Orientation::Forward => 1,
            Orientation::Backward => -1,
        }
    }

    pub fn as_scalar<T: Scalar>(self) -> T {
        match self {
            Orientation::Forward => T::one(),
            Orientation::Backward => -T::one(),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Backward,
            Orientation::Backward => Orientation::Forward,
        }
    }

    pub fn is_forward(self) -> bool {
        self == Orientation::Forward
    }
}

impl From<Orientation> for i8 {
    fn from(o: Orientation) -> i8 {
        o.sign()
    }
}

impl TryFrom<i8> for Orientation {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Orientation::Forward),
            -1 => Ok(Orientation::Backward),
            other => Err(format!("orientation must be 1 or -1, got {other}")),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_forward() { "+" } else { "-" })
    }
}

/// Kinematic state of one patroller.
///
/// Motion is piecewise linear, so the state stores the position at the last
/// state change (`anchor_p` at `anchor_t`) and extrapolates from there.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState<T> {
    pub params: RobotParams<T>,
    pub(crate) anchor_p: T,
    pub(crate) anchor_t: T,
    pub orientation: Orientation,
    pub active: bool,
}

impl<T: Scalar> RobotState<T> {
    pub(crate) fn new(params: RobotParams<T>, p: T, o: Orientation) -> Self {
        Self {
            params,
            anchor_p: p,
            anchor_t: T::zero(),
            orientation: o,
            active: true,
        }
    }

    /// Signed velocity `v * a * o`.
    pub fn velocity(&self) -> T {
        if self.active {
            self.params.v * self.orientation.as_scalar::<T>()
        } else {
            T::zero()
        }
    }

    pub fn position_at(&self, t: T) -> T {
        if self.active {
            self.anchor_p + self.velocity() * (t - self.anchor_t)
        } else {
            self.anchor_p
        }
    }

    /// Position recorded at the most recent state change.
    pub fn anchor(&self) -> (T, T) {
        (self.anchor_p, self.anchor_t)
    }

    pub(crate) fn pin(&mut self, p: T, t: T) {
        self.anchor_p = p;
        self.anchor_t = t;
    }

    /// Waiting at the boundary its orientation points to.
    pub fn is_waiting(&self) -> bool {
        !self.active
    }
}
