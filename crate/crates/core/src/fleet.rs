//! Robot parameters and the closed-form goal configuration of a fleet.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams<T> {
    pub id: u32,
    /// Maximum speed, m/s.
    pub v: T,
    /// Communication radius, m.
    pub r: T,
}

impl<T: Scalar> RobotParams<T> {
    pub fn new(id: u32, v: T, r: T) -> Result<Self> {
        let p = Self { id, v, r };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidRobot {
            id: self.id,
            reason: reason.to_string(),
        };
        if !self.v.is_finite() || !self.r.is_finite() {
            return Err(bad("speed and radius must be finite"));
        }
        if self.v <= T::zero() {
            return Err(bad("speed must be positive"));
        }
        if self.r < T::zero() {
            return Err(bad("radius must be non-negative"));
        }
        Ok(())
    }
}

/// Robots in cycle order together with the cycle length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetConfig<T> {
    pub robots: Vec<RobotParams<T>>,
    #[serde(rename = "L")]
    pub length: T,
}

impl<T: Scalar> FleetConfig<T> {
    pub fn new(robots: Vec<RobotParams<T>>, length: T) -> Result<Self> {
        let cfg = Self { robots, length };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a fleet from parallel speed and radius slices; ids are 1-based.
    pub fn from_slices(speeds: &[f64], radii: &[f64], length: f64) -> Result<Self> {
        if speeds.len() != radii.len() {
            return Err(Error::Invalid(format!(
                "{} speeds but {} radii",
                speeds.len(),
                radii.len()
            )));
        }
        let robots = speeds
            .iter()
            .zip(radii)
            .enumerate()
            .map(|(i, (&v, &r))| RobotParams {
                id: i as u32 + 1,
                v: T::lit(v),
                r: T::lit(r),
            })
            .collect();
        Self::new(robots, T::lit(length))
    }

    pub fn validate(&self) -> Result<()> {
        if self.robots.len() < 2 {
            return Err(Error::TooFewRobots(self.robots.len()));
        }
        if !self.length.is_finite() {
            return Err(Error::NonFinite("cycle length"));
        }
        let mut ids: Vec<u32> = self.robots.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidRobot {
                id: w[0],
                reason: "duplicate robot id".into(),
            });
        }
        for r in &self.robots {
            r.validate()?;
        }
        let coverage = T::two() * self.radius_sum();
        if self.length - coverage <= T::zero() {
            return Err(Error::StaticallyCoverable {
                length: self.length.to_f64_lossy(),
                coverage: coverage.to_f64_lossy(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn speed_sum(&self) -> T {
        self.robots.iter().fold(T::zero(), |acc, r| acc + r.v)
    }

    pub fn radius_sum(&self) -> T {
        self.robots.iter().fold(T::zero(), |acc, r| acc + r.r)
    }

    pub fn speeds(&self) -> Vec<T> {
        self.robots.iter().map(|r| r.v).collect()
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.robots.iter().position(|r| r.id == id)
    }

    pub fn t_star(&self) -> Result<T> {
        compute_t_star(self)
    }

    pub fn goal_partition(&self) -> Result<GoalPartition<T>> {
        compute_goal_partition(self)
    }
}

/// Common traversing time and the goal regions that realise it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalPartition<T> {
    pub t_star: T,
    pub d_star: Vec<T>,
    /// `y_star[i]` is the right boundary of robot `i`; the last entry is `L`.
    pub y_star: Vec<T>,
}

impl<T: Scalar> GoalPartition<T> {
    /// Left goal boundary of robot `i` (0 for the first robot).
    pub fn left(&self, i: usize) -> T {
        if i == 0 {
            T::zero()
        } else {
            self.y_star[i - 1]
        }
    }

    pub fn right(&self, i: usize) -> T {
        self.y_star[i]
    }
}

/// `(L - 2 Σ r) / Σ v`.
pub fn compute_t_star<T: Scalar>(cfg: &FleetConfig<T>) -> Result<T> {
    let coverage = T::two() * cfg.radius_sum();
    let free = cfg.length - coverage;
    if free <= T::zero() {
        return Err(Error::StaticallyCoverable {
            length: cfg.length.to_f64_lossy(),
            coverage: coverage.to_f64_lossy(),
        });
    }
    Ok(free / cfg.speed_sum())
}

pub fn compute_goal_partition<T: Scalar>(cfg: &FleetConfig<T>) -> Result<GoalPartition<T>> {
    let t_star = compute_t_star(cfg)?;
    let d_star: Vec<T> = cfg
        .robots
        .iter()
        .map(|r| r.v * t_star + T::two() * r.r)
        .collect();
    let mut y_star = Vec::with_capacity(d_star.len());
    let mut acc = T::zero();
    for &d in &d_star {
        acc = acc + d;
        y_star.push(acc);
    }
    // the last boundary is pinned, not accumulated
    *y_star.last_mut().expect("n >= 2") = cfg.length;
    Ok(GoalPartition {
        t_star,
        d_star,
        y_star,
    })
}

/// `(d - 2r) / v`; negative when the region is narrower than the zone.
pub fn traversing_time<T: Scalar>(d: T, robot: &RobotParams<T>) -> T {
    (d - T::two() * robot.r) / robot.v
}
