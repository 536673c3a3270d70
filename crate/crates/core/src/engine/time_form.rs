//! Patrolling driven purely by traversing times.
//!
//! Instead of boundaries, each robot carries `e_i` and crosses its region in
//! exactly `e_i` seconds; a meeting on link `i` mixes the pair with
//! `eps_i = v_i v_{i+1} / (v_i + v_{i+1})`. Started from a state where every
//! boundary is known, this reproduces the event sequence of a
//! [`Simulation`] that uses [`RepositionPolicy::Snap`](super::RepositionPolicy::Snap).

use super::{Event, EventKind, Orientation, Simulation};
use crate::error::{Error, Result};
use crate::num::{Scalar, SIMULTANEITY_TOL};

#[derive(Debug, Clone)]
pub struct TimeFormSim<T> {
    speeds: Vec<T>,
    e: Vec<T>,
    orientation: Vec<Orientation>,
    waiting: Vec<bool>,
    next_arrival: Vec<T>,
    clock: T,
}

impl<T: Scalar> TimeFormSim<T> {
    /// Copies traversing times, orientations and pending arrival times from
    /// a simulation whose boundaries are all known.
    pub fn from_simulation(sim: &Simulation<T>) -> Result<Self> {
        if !sim.all_patrolling() {
            return Err(Error::Invalid(
                "time-form start needs every boundary to be known".into(),
            ));
        }
        let n = sim.len();
        let mut next_arrival = Vec::with_capacity(n);
        let mut waiting = Vec::with_capacity(n);
        for i in 0..n {
            let robot = &sim.robots()[i];
            waiting.push(!robot.active);
            next_arrival.push(sim.arrival_time(i).unwrap_or(sim.time()));
        }
        Ok(Self {
            speeds: sim.fleet().speeds(),
            e: sim.traversing_times().into_iter().map(|e| e.expect("all known")).collect(),
            orientation: sim.orientations(),
            waiting,
            next_arrival,
            clock: sim.time(),
        })
    }

    pub fn time(&self) -> T {
        self.clock
    }

    pub fn traversing_times(&self) -> &[T] {
        &self.e
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientation
    }

    fn n(&self) -> usize {
        self.e.len()
    }

    fn heading(&self, i: usize) -> usize {
        let n = self.n();
        if self.orientation[i].is_forward() {
            i
        } else {
            (i + n - 1) % n
        }
    }

    /// Applies the next arrival or meeting. Events carry no positions, so
    /// their position fields are zero.
    pub fn step(&mut self) -> Result<Event<T>> {
        let n = self.n();
        let earliest = (0..n)
            .filter(|&i| !self.waiting[i])
            .map(|i| self.next_arrival[i])
            .fold(None, |acc: Option<T>, t| Some(acc.map_or(t, |a| a.min(t))))
            .ok_or(Error::Deadlock {
                time: self.clock.to_f64_lossy(),
            })?;
        let window = earliest + T::lit(SIMULTANEITY_TOL);
        let i = (0..n)
            .filter(|&i| !self.waiting[i] && self.next_arrival[i] <= window)
            .min_by_key(|&i| {
                let b = self.heading(i);
                (b, u8::from(i != b))
            })
            .expect("earliest candidate exists");
        let t = self.next_arrival[i].max(self.clock);
        self.clock = t;
        let b = self.heading(i);
        let (l, r) = (b, (b + 1) % n);
        let partner = if i == l { r } else { l };
        if !(self.waiting[partner] && self.heading(partner) == b) {
            self.waiting[i] = true;
            return Ok(Event {
                time: t,
                kind: EventKind::Arrival,
                robot_a: i,
                robot_b: None,
                boundary: b,
                position_a: T::zero(),
                position_b: None,
            });
        }
        if b < n - 1 {
            let (vl, vr) = (self.speeds[l], self.speeds[r]);
            let eps = vl * vr / (vl + vr);
            let diff = self.e[r] - self.e[l];
            self.e[l] = self.e[l] + eps / vl * diff;
            self.e[r] = self.e[r] - eps / vr * diff;
        }
        for k in [l, r] {
            self.orientation[k] = self.orientation[k].reversed();
            self.waiting[k] = false;
            self.next_arrival[k] = t + self.e[k];
        }
        Ok(Event {
            time: t,
            kind: EventKind::Meeting,
            robot_a: i,
            robot_b: Some(partner),
            boundary: b,
            position_a: T::zero(),
            position_b: Some(T::zero()),
        })
    }
}

/// Splits events by boundary, keeping their order. Events on different
/// boundaries that fall inside the same simultaneity window commute, so two
/// runs are compared boundary by boundary.
pub fn split_by_boundary<T: Copy>(events: &[Event<T>], n: usize) -> Vec<Vec<Event<T>>> {
    let mut out = vec![Vec::new(); n];
    for ev in events {
        out[ev.boundary].push(*ev);
    }
    out
}
