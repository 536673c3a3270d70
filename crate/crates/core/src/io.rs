//! JSON scenario files and small file helpers.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{Orientation, ParameterChange, Simulation};
use crate::error::{Error, Result};
use crate::fleet::{FleetConfig, RobotParams};
use crate::num::Scalar;
use crate::placement::{random_orientations, random_positions};

/// One robot of a scenario file. Start position and orientation are
/// optional; missing ones are drawn from the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RobotSpec<T> {
    pub id: u32,
    pub v: T,
    pub r: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o0: Option<Orientation>,
}

/// `{ "L": .., "robots": [..], "events": [..] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Scenario<T> {
    #[serde(rename = "L")]
    pub length: T,
    pub robots: Vec<RobotSpec<T>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<ParameterChange<T>>,
}

impl<T: Scalar> Scenario<T> {
    pub fn fleet(&self) -> Result<FleetConfig<T>> {
        let robots = self
            .robots
            .iter()
            .map(|s| RobotParams::new(s.id, s.v, s.r))
            .collect::<Result<Vec<_>>>()?;
        FleetConfig::new(robots, self.length)
    }

    /// Start positions and orientations. Values given in the file win;
    /// otherwise positions are drawn uniformly and `n_forward` robots (half
    /// the fleet by default) face forward.
    pub fn start(&self, seed: u64, n_forward: Option<usize>) -> Result<(Vec<T>, Vec<Orientation>)> {
        let fleet = self.fleet()?;
        let n = fleet.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let given_p = self.robots.iter().filter(|s| s.p0.is_some()).count();
        let given_o = self.robots.iter().filter(|s| s.o0.is_some()).count();
        if (given_p != 0 && given_p != n) || (given_o != 0 && given_o != n) {
            return Err(Error::Invalid(
                "p0 and o0 must be given for every robot or for none".into(),
            ));
        }
        let positions = if given_p == n {
            self.robots.iter().map(|s| s.p0.expect("counted")).collect()
        } else {
            random_positions(&fleet, &mut rng)
        };
        let orientations = if given_o == n {
            self.robots.iter().map(|s| s.o0.expect("counted")).collect()
        } else {
            random_orientations(n, n_forward.unwrap_or(n / 2), &mut rng)?
        };
        Ok((positions, orientations))
    }

    /// Builds the simulation with every parameter change scheduled.
    pub fn simulation(&self, seed: u64, n_forward: Option<usize>) -> Result<Simulation<T>> {
        let (p, o) = self.start(seed, n_forward)?;
        let mut sim = Simulation::new(self.fleet()?, &p, &o)?;
        for ch in &self.events {
            sim.schedule_change(*ch)?;
        }
        Ok(sim)
    }
}

impl<T: Scalar> From<&FleetConfig<T>> for Scenario<T> {
    fn from(fleet: &FleetConfig<T>) -> Self {
        Self {
            length: fleet.length,
            robots: fleet
                .robots
                .iter()
                .map(|r| RobotSpec {
                    id: r.id,
                    v: r.v,
                    r: r.r,
                    p0: None,
                    o0: None,
                })
                .collect(),
            events: Vec::new(),
        }
    }
}

pub fn read_json<D: DeserializeOwned>(path: impl AsRef<Path>) -> Result<D> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = r#"{ "L": 1000.0, "robots": [
        { "id": 1, "v": 0.3, "r": 50.0, "p0": 80.0, "o0": 1 },
        { "id": 2, "v": 0.7, "r": 50.0, "p0": 300.0, "o0": -1 },
        { "id": 3, "v": 0.3, "r": 50.0, "p0": 500.0, "o0": 1 },
        { "id": 4, "v": 0.3, "r": 150.0, "p0": 800.0, "o0": -1 } ],
        "events": [ { "t": 5000.0, "robot": 2, "v": 0.35 } ] }"#;

    #[test]
    fn explicit_start_is_used() {
        let s: Scenario<f64> = serde_json::from_str(FIG3).unwrap();
        let (p, o) = s.start(0, None).unwrap();
        assert_eq!(p, vec![80.0, 300.0, 500.0, 800.0]);
        assert_eq!(o[1], Orientation::Backward);
        assert_eq!(s.events.len(), 1);
        assert_eq!(s.events[0].r, None);
        let sim = s.simulation(0, None).unwrap();
        assert!((sim.t_star() - 250.0).abs() < 1e-12);
    }

    #[test]
    fn fleet_file_without_start_is_seeded() {
        let fleet = FleetConfig::<f64>::from_slices(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0], 100.0).unwrap();
        let s = Scenario::from(&fleet);
        let a = s.start(9, Some(1)).unwrap();
        let b = s.start(9, Some(1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.iter().filter(|o| o.is_forward()).count(), 1);
        assert_ne!(a, s.start(10, Some(1)).unwrap());
    }

    #[test]
    fn partial_start_is_rejected() {
        let mut s: Scenario<f64> = serde_json::from_str(FIG3).unwrap();
        s.robots[0].p0 = None;
        assert!(s.start(0, None).is_err());
    }

    #[test]
    fn fleet_json_reads_as_scenario_and_fleet() {
        let s: Scenario<f64> = serde_json::from_str(FIG3).unwrap();
        let f: FleetConfig<f64> = serde_json::from_str(FIG3).unwrap();
        assert_eq!(s.fleet().unwrap(), f);
    }
}
