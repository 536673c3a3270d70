//! Exact event-driven execution of the discovery/catch and arrival/meeting
//! rules for a whole fleet.
//!
//! Motion between events is linear, so every candidate event time is the
//! root of a linear equation. Each [`Simulation::step`] scans the fleet in
//! O(n), picks the earliest candidate and applies it.
//!
//! Boundary `b` (0-based) separates robot `b` from robot `b + 1`; boundary
//! `n - 1` is the pinned boundary at `L`, which the last robot reaches at
//! `L` and the first robot reaches at position 0.

mod state;
pub mod time_form;
mod trace;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use state::{Orientation, RobotState};
pub use trace::{Event, EventKind, Snapshot, Trace, TraceMetadata, TraceRecord, CSV_HEADER};

use crate::error::{Assumption, Error, Result};
use crate::fleet::{traversing_time, FleetConfig, RobotParams};
use crate::num::{Scalar, CONVERGENCE_RTOL, SIMULTANEITY_TOL};

/// How robots are placed right after a meeting moved their boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepositionPolicy {
    /// Robots leave from where they physically met.
    #[default]
    Travel,
    /// Robots are moved onto the contact points of the updated boundary, so
    /// every crossing takes exactly the updated traversing time.
    Snap,
}

/// What the simulation keeps in its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recording {
    Off,
    #[default]
    Events,
    /// Events plus full boundary and traversing-time vectors.
    Snapshots,
}

/// Mid-run change of one robot's speed and/or radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ParameterChange<T> {
    pub t: T,
    pub robot: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Candidate<T> {
    Arrival { robot: usize, boundary: usize, time: T },
    Contact { boundary: usize, time: T },
}

impl<T: Scalar> Candidate<T> {
    fn time(&self) -> T {
        match *self {
            Candidate::Arrival { time, .. } | Candidate::Contact { time, .. } => time,
        }
    }

    /// Simultaneous candidates are ordered by boundary, left robot first.
    fn order_key(&self) -> (usize, u8) {
        match *self {
            Candidate::Contact { boundary, .. } => (boundary, 0),
            Candidate::Arrival { robot, boundary, .. } => (boundary, u8::from(robot != boundary)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation<T> {
    fleet: FleetConfig<T>,
    robots: Vec<RobotState<T>>,
    boundaries: Vec<Option<T>>,
    clock: T,
    policy: RepositionPolicy,
    recording: Recording,
    pending: VecDeque<ParameterChange<T>>,
    trace: Trace<T>,
    events_processed: u64,
    t_star: T,
    flip_update_sign: bool,
}

impl<T: Scalar> Simulation<T> {
    /// Validates the start configuration and places every robot in its
    /// discovery phase with only the pinned boundary known.
    pub fn new(fleet: FleetConfig<T>, positions: &[T], orientations: &[Orientation]) -> Result<Self> {
        fleet.validate()?;
        let n = fleet.len();
        if positions.len() != n || orientations.len() != n {
            return Err(Error::Invalid(format!(
                "{n} robots but {} positions and {} orientations",
                positions.len(),
                orientations.len()
            )));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("initial positions"));
        }
        validate_start(&fleet, positions, orientations)?;

        let t_star = fleet.t_star()?;
        let robots = fleet
            .robots
            .iter()
            .zip(positions.iter().zip(orientations))
            .map(|(params, (&p, &o))| RobotState::new(*params, p, o))
            .collect();
        let mut boundaries = vec![None; n];
        boundaries[n - 1] = Some(fleet.length);
        let trace = Trace {
            metadata: TraceMetadata {
                robot_ids: fleet.robots.iter().map(|r| r.id).collect(),
                initial_orientations: orientations.to_vec(),
                length: fleet.length,
                t_star,
                convergence_rtol: CONVERGENCE_RTOL,
                converged_at: None,
            },
            records: Vec::new(),
        };
        Ok(Self {
            fleet,
            robots,
            boundaries,
            clock: T::zero(),
            policy: RepositionPolicy::default(),
            recording: Recording::default(),
            pending: VecDeque::new(),
            trace,
            events_processed: 0,
            t_star,
            flip_update_sign: false,
        })
    }

    pub fn with_policy(mut self, policy: RepositionPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_recording(mut self, recording: Recording) -> Self {
        self.recording = recording;
        self
    }

    /// Deliberately breaks the boundary update by flipping the sign of its
    /// radius terms. Only meant for checking that verification suites
    /// notice a wrong update.
    #[doc(hidden)]
    pub fn with_flipped_update_sign(mut self) -> Self {
        self.flip_update_sign = true;
        self
    }

    pub fn set_recording(&mut self, recording: Recording) {
        self.recording = recording;
    }

    /// Queues a parameter change. Changes are applied in time order before
    /// any event scheduled at or after their time.
    pub fn schedule_change(&mut self, change: ParameterChange<T>) -> Result<()> {
        if !change.t.is_finite() || change.t < T::zero() {
            return Err(Error::Invalid("parameter change time must be finite and >= 0".into()));
        }
        let idx = self
            .fleet
            .index_of(change.robot)
            .ok_or(Error::UnknownRobot(change.robot))?;
        RobotParams {
            id: change.robot,
            v: change.v.unwrap_or(self.fleet.robots[idx].v),
            r: change.r.unwrap_or(self.fleet.robots[idx].r),
        }
        .validate()?;
        let pos = self.pending.partition_point(|c| c.t <= change.t);
        self.pending.insert(pos, change);
        Ok(())
    }

    pub fn fleet(&self) -> &FleetConfig<T> {
        &self.fleet
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn time(&self) -> T {
        self.clock
    }

    pub fn policy(&self) -> RepositionPolicy {
        self.policy
    }

    pub fn robots(&self) -> &[RobotState<T>] {
        &self.robots
    }

    pub fn t_star(&self) -> T {
        self.t_star
    }

    pub fn events_processed(&self) -> u64 {
        self.events_processed
    }

    pub fn trace(&self) -> &Trace<T> {
        &self.trace
    }

    /// Hands the trace over and starts a fresh, empty one.
    pub fn take_trace(&mut self) -> Trace<T> {
        let meta = self.trace.metadata.clone();
        std::mem::replace(
            &mut self.trace,
            Trace {
                metadata: meta,
                records: Vec::new(),
            },
        )
    }

    /// Boundary values `y_1..y_n`; unknown boundaries are `None`.
    pub fn boundaries(&self) -> &[Option<T>] {
        &self.boundaries
    }

    pub fn left_boundary(&self, i: usize) -> Option<T> {
        if i == 0 {
            Some(T::zero())
        } else {
            self.boundaries[i - 1]
        }
    }

    pub fn right_boundary(&self, i: usize) -> Option<T> {
        self.boundaries[i]
    }

    /// Both boundaries of robot `i` are known.
    pub fn is_patrolling(&self, i: usize) -> bool {
        self.left_boundary(i).is_some() && self.right_boundary(i).is_some()
    }

    pub fn all_patrolling(&self) -> bool {
        self.boundaries.iter().all(Option::is_some)
    }

    pub fn position(&self, i: usize) -> T {
        self.robots[i].position_at(self.clock)
    }

    pub fn positions(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.position(i)).collect()
    }

    pub fn orientations(&self) -> Vec<Orientation> {
        self.robots.iter().map(|r| r.orientation).collect()
    }

    pub fn orientation_sum(&self) -> i64 {
        self.robots.iter().map(|r| i64::from(r.orientation.sign())).sum()
    }

    pub fn traversing_time(&self, i: usize) -> Option<T> {
        let l = self.left_boundary(i)?;
        let r = self.right_boundary(i)?;
        Some(traversing_time(r - l, &self.robots[i].params))
    }

    pub fn traversing_times(&self) -> Vec<Option<T>> {
        (0..self.len()).map(|i| self.traversing_time(i)).collect()
    }

    /// `max_i |e_i - t*| / t*`, once every boundary is known.
    pub fn max_relative_deviation(&self) -> Option<T> {
        let mut worst = T::zero();
        for i in 0..self.len() {
            let e = self.traversing_time(i)?;
            worst = worst.max((e - self.t_star).abs() / self.t_star);
        }
        Some(worst)
    }

    pub fn is_converged(&self) -> bool {
        self.max_relative_deviation()
            .is_some_and(|d| d < T::lit(CONVERGENCE_RTOL))
    }

    pub fn converged_at(&self) -> Option<T> {
        self.trace.metadata.converged_at
    }

    /// The two robots sharing boundary `b`, left one first.
    pub fn boundary_robots(&self, b: usize) -> (usize, usize) {
        (b, (b + 1) % self.len())
    }

    /// Boundary robot `i` is heading to, with its value when known. The
    /// first robot reaches the pinned boundary at position 0.
    pub fn heading(&self, i: usize) -> (usize, Option<T>) {
        let n = self.len();
        if self.robots[i].orientation.is_forward() {
            (i, self.boundaries[i])
        } else if i == 0 {
            (n - 1, Some(T::zero()))
        } else {
            (i - 1, self.boundaries[i - 1])
        }
    }

    /// Position at which robot `i`'s zone touches the boundary it heads to.
    pub fn contact_target(&self, i: usize) -> Option<T> {
        let (_, y) = self.heading(i);
        let r = &self.robots[i];
        y.map(|y| {
            if r.orientation.is_forward() {
                y - r.params.r
            } else {
                y + r.params.r
            }
        })
    }

    /// Time at which an active robot reaches the known boundary ahead.
    pub fn arrival_time(&self, i: usize) -> Option<T> {
        let r = &self.robots[i];
        if !r.active {
            return None;
        }
        let target = self.contact_target(i)?;
        let dt = (target - r.anchor_p) * r.orientation.as_scalar::<T>() / r.params.v;
        Some((r.anchor_t + dt).max(self.clock))
    }

    fn candidates(&self) -> Vec<Candidate<T>> {
        let n = self.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            if let Some(time) = self.arrival_time(i) {
                out.push(Candidate::Arrival {
                    robot: i,
                    boundary: self.heading(i).0,
                    time,
                });
            }
        }
        for b in 0..n - 1 {
            if self.boundaries[b].is_some() {
                continue;
            }
            let (l, r) = (&self.robots[b], &self.robots[b + 1]);
            let closing = l.velocity() - r.velocity();
            if closing <= T::zero() {
                continue;
            }
            let gap = (r.position_at(self.clock) - r.params.r)
                - (l.position_at(self.clock) + l.params.r);
            out.push(Candidate::Contact {
                boundary: b,
                time: self.clock + gap.max(T::zero()) / closing,
            });
        }
        out
    }

    fn next_candidate(&self) -> Option<Candidate<T>> {
        let cands = self.candidates();
        let earliest = cands
            .iter()
            .map(Candidate::time)
            .fold(None, |acc: Option<T>, t| Some(acc.map_or(t, |a| a.min(t))))?;
        let window = earliest + T::lit(SIMULTANEITY_TOL);
        cands
            .into_iter()
            .filter(|c| c.time() <= window)
            .min_by_key(Candidate::order_key)
    }

    /// Time of the next event or parameter change.
    pub fn peek_time(&self) -> Result<T> {
        let ev = self.next_candidate().map(|c| c.time().max(self.clock));
        let ch = self.pending.front().map(|c| c.t.max(self.clock));
        match (ev, ch) {
            (Some(a), Some(b)) => Ok(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Ok(a),
            (None, None) => Err(Error::Deadlock {
                time: self.clock.to_f64_lossy(),
            }),
        }
    }

    /// Applies due parameter changes, then processes exactly one event.
    pub fn step(&mut self) -> Result<Event<T>> {
        loop {
            let cand = self.next_candidate();
            let change_due = match (self.pending.front(), &cand) {
                (Some(ch), Some(c)) => ch.t <= c.time(),
                (Some(_), None) => true,
                (None, _) => false,
            };
            if change_due {
                let ch = self.pending.pop_front().expect("checked");
                self.apply_parameter_change(ch)?;
                continue;
            }
            let cand = cand.ok_or(Error::Deadlock {
                time: self.clock.to_f64_lossy(),
            })?;
            let t = cand.time().max(self.clock);
            self.clock = t;
            let event = match cand {
                Candidate::Arrival { robot, boundary, .. } => self.apply_arrival(robot, boundary, t),
                Candidate::Contact { boundary, .. } => self.apply_contact(boundary, t),
            };
            self.record(event);
            return Ok(event);
        }
    }

    /// Processes every event strictly before `t_end`, then advances the
    /// clock to `t_end`. Returns the number of events processed.
    pub fn run_until_time(&mut self, t_end: T) -> Result<usize> {
        let mut count = 0;
        while self.peek_time()? < t_end {
            self.step()?;
            count += 1;
        }
        self.clock = self.clock.max(t_end);
        Ok(count)
    }

    pub fn run_events(&mut self, count: usize) -> Result<()> {
        for _ in 0..count {
            self.step()?;
        }
        Ok(())
    }

    /// Steps until `pred` holds for the latest event or `max_events` elapse.
    pub fn run_until<F>(&mut self, max_events: usize, mut pred: F) -> Result<bool>
    where
        F: FnMut(&Self, &Event<T>) -> bool,
    {
        for _ in 0..max_events {
            let ev = self.step()?;
            if pred(self, &ev) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn apply_arrival(&mut self, i: usize, b: usize, t: T) -> Event<T> {
        let target = self.contact_target(i).expect("arrival needs a known boundary");
        self.robots[i].pin(target, t);
        let (l, r) = self.boundary_robots(b);
        let partner = if i == l { r } else { l };
        let partner_waiting = !self.robots[partner].active && self.heading(partner).0 == b;
        if partner_waiting {
            return self.apply_meeting(b, i, partner, t);
        }
        self.robots[i].active = false;
        Event {
            time: t,
            kind: EventKind::Arrival,
            robot_a: i,
            robot_b: None,
            boundary: b,
            position_a: target,
            position_b: None,
        }
    }

    fn apply_meeting(&mut self, b: usize, arriver: usize, waiter: usize, t: T) -> Event<T> {
        let n = self.len();
        let (l, r) = self.boundary_robots(b);
        let pos_a = self.robots[arriver].anchor_p;
        let pos_w = self.robots[waiter].anchor_p;
        if b < n - 1 {
            if let (Some(y_prev), Some(y_next)) = (self.left_boundary(l), self.boundaries[b + 1]) {
                let (pl, pr) = (self.robots[l].params, self.robots[r].params);
                let two = if self.flip_update_sign { -T::two() } else { T::two() };
                let y = (pr.v * (y_prev + two * pl.r) + pl.v * (y_next - two * pr.r)) / (pl.v + pr.v);
                self.boundaries[b] = Some(y);
                if self.policy == RepositionPolicy::Snap {
                    self.robots[l].anchor_p = y - pl.r;
                    self.robots[r].anchor_p = y + pr.r;
                }
            }
        }
        for k in [l, r] {
            let robot = &mut self.robots[k];
            robot.orientation = robot.orientation.reversed();
            robot.active = true;
            robot.anchor_t = t;
        }
        Event {
            time: t,
            kind: EventKind::Meeting,
            robot_a: arriver,
            robot_b: Some(waiter),
            boundary: b,
            position_a: pos_a,
            position_b: Some(pos_w),
        }
    }

    fn apply_contact(&mut self, b: usize, t: T) -> Event<T> {
        let (l, r) = (b, b + 1);
        let y = self.robots[l].position_at(t) + self.robots[l].params.r;
        let pl = y - self.robots[l].params.r;
        let pr = y + self.robots[r].params.r;
        self.robots[l].pin(pl, t);
        self.robots[r].pin(pr, t);
        self.boundaries[b] = Some(y);

        let head_on = self.robots[l].active
            && self.robots[l].orientation.is_forward()
            && self.robots[r].active
            && !self.robots[r].orientation.is_forward();
        if head_on {
            for k in [l, r] {
                let robot = &mut self.robots[k];
                robot.orientation = robot.orientation.reversed();
            }
            return Event {
                time: t,
                kind: EventKind::Discovery,
                robot_a: l,
                robot_b: Some(r),
                boundary: b,
                position_a: pl,
                position_b: Some(pr),
            };
        }
        let left_closing = self.robots[l].active && self.robots[l].orientation.is_forward();
        let (catcher, caught) = if left_closing { (l, r) } else { (r, l) };
        self.robots[catcher].active = false;
        let (pc, pk) = if left_closing { (pl, pr) } else { (pr, pl) };
        Event {
            time: t,
            kind: EventKind::Catch,
            robot_a: catcher,
            robot_b: Some(caught),
            boundary: b,
            position_a: pc,
            position_b: Some(pk),
        }
    }

    fn apply_parameter_change(&mut self, ch: ParameterChange<T>) -> Result<()> {
        let i = self
            .fleet
            .index_of(ch.robot)
            .ok_or(Error::UnknownRobot(ch.robot))?;
        let old = self.fleet.robots[i];
        let new = RobotParams {
            id: old.id,
            v: ch.v.unwrap_or(old.v),
            r: ch.r.unwrap_or(old.r),
        };
        if new == old {
            return Ok(());
        }
        let mut fleet = self.fleet.clone();
        fleet.robots[i] = new;
        fleet.validate()?;
        let t = ch.t.max(self.clock);
        self.clock = t;
        let p = self.robots[i].position_at(t);
        self.robots[i].pin(p, t);
        self.robots[i].params = new;
        if !self.robots[i].active {
            // keep a waiting robot in contact with its boundary
            if let Some(target) = self.contact_target(i) {
                self.robots[i].anchor_p = target;
            }
        }
        self.t_star = fleet.t_star()?;
        self.fleet = fleet;
        self.trace.metadata.t_star = self.t_star;
        self.trace.metadata.converged_at = None;
        Ok(())
    }

    fn record(&mut self, event: Event<T>) {
        self.events_processed += 1;
        if self.trace.metadata.converged_at.is_none() && self.is_converged() {
            self.trace.metadata.converged_at = Some(event.time);
        }
        if self.recording == Recording::Off {
            return;
        }
        let snapshot = (self.recording == Recording::Snapshots).then(|| Snapshot {
            y: self.boundaries.clone(),
            e: self.traversing_times(),
        });
        self.trace.records.push(TraceRecord {
            event,
            y_value: self.boundaries[event.boundary],
            e_a: self.traversing_time(event.robot_a),
            e_b: event.robot_b.and_then(|b| self.traversing_time(b)),
            snapshot,
        });
    }
}

fn validate_start<T: Scalar>(
    fleet: &FleetConfig<T>,
    positions: &[T],
    orientations: &[Orientation],
) -> Result<()> {
    let n = fleet.len();
    let first = orientations[0];
    if orientations.iter().all(|&o| o == first) {
        return Err(Error::AssumptionViolated {
            which: Assumption::A2,
            detail: format!("all {n} robots start with orientation {first}"),
        });
    }
    let a3 = |detail: String| Error::AssumptionViolated {
        which: Assumption::A3,
        detail,
    };
    let rob = &fleet.robots;
    for i in 0..n - 1 {
        if positions[i] >= positions[i + 1] {
            return Err(a3(format!(
                "positions not sorted: robot {} at {} and robot {} at {}",
                rob[i].id,
                positions[i],
                rob[i + 1].id,
                positions[i + 1]
            )));
        }
        if positions[i] + rob[i].r > positions[i + 1] - rob[i + 1].r {
            return Err(a3(format!(
                "zones of robots {} and {} overlap ({} + {} > {} - {})",
                rob[i].id,
                rob[i + 1].id,
                positions[i],
                rob[i].r,
                positions[i + 1],
                rob[i + 1].r
            )));
        }
    }
    if positions[0] - rob[0].r < T::zero() {
        return Err(a3(format!("zone of robot {} crosses position 0", rob[0].id)));
    }
    if positions[n - 1] + rob[n - 1].r > fleet.length {
        return Err(a3(format!("zone of robot {} crosses position L", rob[n - 1].id)));
    }
    Ok(())
}
