//! Simulation and analysis of heterogeneous robots patrolling a cycle with
//! intermittent, pairwise communication.
//!
//! The geometric, closed-form and simulation layers are generic over the
//! floating point type through [`Scalar`]; the aliases below fix it to `f64`,
//! which is what the analysis layers use.

pub mod consensus;
pub mod engine;
pub mod error;
pub mod fleet;
pub mod io;
pub mod metrics;
pub mod num;
pub mod placement;
pub mod rounds;
pub mod scenario;
pub mod sweep;
pub mod words;

pub use engine::{Event, EventKind, Orientation, ParameterChange, RepositionPolicy, Simulation, Trace};
pub use error::{Assumption, Error, Result};
pub use fleet::{FleetConfig, GoalPartition, RobotParams};
pub use num::Scalar;

/// Default scalar type.
pub type Real = f64;
pub type Fleet = FleetConfig<Real>;
pub type Sim = Simulation<Real>;
pub type Goal = GoalPartition<Real>;
pub type Graph = scenario::CycleGraph<Real>;
