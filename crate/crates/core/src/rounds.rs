//! Round-level model of a converged fleet.
//!
//! Once every traversing time equals `t*`, time can be cut into rounds of
//! width `t*` starting at some `t0`. Each robot then sits at (or travels
//! towards) one of its two goal contact points and the only thing that
//! matters is when it gets there. Adjacent robots facing each other meet at
//! the later of their two arrival times and both turn around.

use std::fmt::Write as _;

use serde::Serialize;

use crate::engine::{Event, EventKind, Orientation, Simulation, Trace, TraceRecord};
use crate::error::{Error, Result};
use crate::fleet::FleetConfig;
use crate::num::{Scalar, SIMULTANEITY_TOL};
use crate::words::OrientationWord;

/// Absolute tolerance (seconds) of the synchronization check.
pub const SYNC_TOL: f64 = 1e-9;

/// State at the start of round `k`.
///
/// `p[i]` is the contact point robot `i` is at or heading to, `t_e[i]` the
/// time it gets (or got) there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundState<T> {
    pub k: usize,
    pub t0: T,
    pub t_star: T,
    /// `(left, right)` goal contact points of every robot.
    pub contacts: Vec<(T, T)>,
    pub p: Vec<T>,
    pub o: Vec<Orientation>,
    pub t_e: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Meeting<T> {
    pub boundary: usize,
    pub left: usize,
    pub right: usize,
    pub time: T,
    pub position_left: T,
    pub position_right: T,
}

/// Meetings of one round. Pairs never share a robot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeetingSet<T> {
    pub round: usize,
    pub meetings: Vec<Meeting<T>>,
}

impl<T: Scalar> RoundState<T> {
    /// Round-0 state with positions implied by the orientations.
    pub fn new(fleet: &FleetConfig<T>, t0: T, o: Vec<Orientation>, t_e: Vec<T>) -> Result<Self> {
        let goal = fleet.goal_partition()?;
        let n = fleet.len();
        if o.len() != n || t_e.len() != n {
            return Err(Error::Invalid(format!(
                "{n} robots but {} orientations and {} arrival times",
                o.len(),
                t_e.len()
            )));
        }
        let t_star = goal.t_star;
        if let Some(i) = (0..n).find(|&i| !(t_e[i] >= t0 && t_e[i] < t0 + t_star)) {
            return Err(Error::Invalid(format!(
                "arrival time {} of robot {} outside [t0, t0 + t*) = [{}, {})",
                t_e[i],
                fleet.robots[i].id,
                t0,
                t0 + t_star
            )));
        }
        let contacts: Vec<(T, T)> = fleet
            .robots
            .iter()
            .enumerate()
            .map(|(i, rb)| (goal.left(i) + rb.r, goal.right(i) - rb.r))
            .collect();
        let p = contacts
            .iter()
            .zip(&o)
            .map(|(&(l, r), o)| if o.is_forward() { r } else { l })
            .collect();
        Ok(Self {
            k: 0,
            t0,
            t_star,
            contacts,
            p,
            o,
            t_e,
        })
    }

    pub fn len(&self) -> usize {
        self.o.len()
    }

    pub fn is_empty(&self) -> bool {
        self.o.is_empty()
    }

    pub fn word(&self) -> Result<OrientationWord> {
        OrientationWord::from_orientations(&self.o)
    }

    /// Boundaries `b` whose left robot faces forward and right robot backward.
    pub fn meeting_pairs(&self) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&b| self.o[b].is_forward() && !self.o[(b + 1) % n].is_forward())
            .collect()
    }

    /// Same pairs, found from positions: both robots at the contact points
    /// of their shared boundary.
    pub fn meeting_pairs_by_position(&self) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .filter(|&b| {
                let r = (b + 1) % n;
                self.p[b] == self.contacts[b].1 && self.p[r] == self.contacts[r].0
            })
            .collect()
    }

    /// Witness of interlacing (0-based pair starts), `None` if not
    /// interlaced. Fails when every robot faces the same way.
    pub fn interlacing_witness(&self) -> Result<Option<Vec<usize>>> {
        self.word()?.interlacing_witness()
    }

    pub fn is_interlaced(&self) -> Result<bool> {
        Ok(self.interlacing_witness()?.is_some())
    }

    pub fn n_bal(&self) -> usize {
        let plus = self.o.iter().filter(|o| o.is_forward()).count();
        plus.min(self.len() - plus)
    }

    /// Start of this round's time window.
    pub fn window_start(&self) -> T {
        self.t0 + T::lit(self.k as f64) * self.t_star
    }

    pub fn step_round(&self) -> (Self, MeetingSet<T>) {
        let n = self.len();
        let mut next = self.clone();
        next.k += 1;
        let mut meetings = Vec::new();
        for b in self.meeting_pairs() {
            let (l, r) = (b, (b + 1) % n);
            let time = self.t_e[l].max(self.t_e[r]);
            meetings.push(Meeting {
                boundary: b,
                left: l,
                right: r,
                time,
                position_left: self.p[l],
                position_right: self.p[r],
            });
            for i in [l, r] {
                next.t_e[i] = time + self.t_star;
                next.o[i] = self.o[i].reversed();
                let (cl, cr) = self.contacts[i];
                next.p[i] = if next.o[i].is_forward() { cr } else { cl };
            }
        }
        (
            next,
            MeetingSet {
                round: self.k,
                meetings,
            },
        )
    }
}

/// States `0..=R` and the meetings of rounds `0..R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRun<T> {
    pub states: Vec<RoundState<T>>,
    pub meetings: Vec<MeetingSet<T>>,
}

pub fn run_rounds<T: Scalar>(initial: RoundState<T>, rounds: usize) -> RoundRun<T> {
    let mut states = Vec::with_capacity(rounds + 1);
    let mut meetings = Vec::with_capacity(rounds);
    let mut cur = initial;
    for _ in 0..rounds {
        let (next, m) = cur.step_round();
        states.push(cur);
        meetings.push(m);
        cur = next;
    }
    states.push(cur);
    RoundRun { states, meetings }
}

impl<T: Scalar> RoundRun<T> {
    pub fn rounds(&self) -> usize {
        self.meetings.len()
    }

    pub fn first_interlaced_round(&self) -> Result<Option<usize>> {
        for s in &self.states {
            if s.is_interlaced()? {
                return Ok(Some(s.k));
            }
        }
        Ok(None)
    }

    /// `round,meetings,n_bal,interlaced,max_event_offset`; the offset is the
    /// latest meeting time measured from the start of its round.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = String::from("round,meetings,n_bal,interlaced,max_event_offset\n");
        for (state, set) in self.states.iter().zip(&self.meetings) {
            let start = state.window_start();
            let offset = set
                .meetings
                .iter()
                .map(|m| m.time - start)
                .fold(None, |acc: Option<T>, x| Some(acc.map_or(x, |a| a.max(x))));
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                state.k,
                set.meetings.len(),
                state.n_bal(),
                state.is_interlaced()?,
                offset.map(|x| format!("{x:.9}")).unwrap_or_default()
            );
        }
        Ok(out)
    }
}

/// Outcome of [`check_synchronization`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncReport<T> {
    pub k0: usize,
    /// `max_j t_e[j]` at round `k0`.
    pub reference: T,
    /// Round from which equality is required (`k0 + n/2`).
    pub required_from: usize,
    /// Earliest round from which every later round matches.
    pub synchronized_from: Option<usize>,
    pub rounds_checked: usize,
    pub max_error: T,
    /// First `(robot, round)` that misses the prediction at or after
    /// `required_from`.
    pub first_violation: Option<(usize, usize)>,
}

impl<T> SyncReport<T> {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks that from round `k0 + n/2` on every arrival time equals
/// `(k - k0) t* + max_j t_e[j](k0)`. Needs balanced, interlaced
/// orientations at `k0`.
pub fn check_synchronization<T: Scalar>(states: &[RoundState<T>], k0: usize, tol: f64) -> Result<SyncReport<T>> {
    let base = states
        .iter()
        .find(|s| s.k == k0)
        .ok_or_else(|| Error::Invalid(format!("no state for round {k0}")))?;
    let n = base.len();
    if 2 * base.n_bal() != n || !base.is_interlaced()? {
        return Err(Error::Invalid(format!(
            "orientations at round {k0} are not balanced and interlaced"
        )));
    }
    let reference = base
        .t_e
        .iter()
        .copied()
        .fold(T::neg_infinity(), T::max);
    let required_from = k0 + n / 2;
    let tol = T::lit(tol);
    let mut max_error = T::zero();
    let mut first_violation = None;
    let mut synchronized_from = None;
    let mut rounds_checked = 0;
    for s in states.iter().filter(|s| s.k >= k0) {
        let expected = T::lit((s.k - k0) as f64) * base.t_star + reference;
        let worst = s
            .t_e
            .iter()
            .enumerate()
            .map(|(i, &t)| (i, (t - expected).abs()))
            .fold((0, T::zero()), |a, b| if b.1 > a.1 { b } else { a });
        if worst.1 <= tol {
            synchronized_from.get_or_insert(s.k);
        } else {
            synchronized_from = None;
        }
        if s.k >= required_from {
            rounds_checked += 1;
            max_error = max_error.max(worst.1);
            if worst.1 > tol && first_violation.is_none() {
                first_violation = Some((worst.0, s.k));
            }
        }
    }
    Ok(SyncReport {
        k0,
        reference,
        required_from,
        synchronized_from,
        rounds_checked,
        max_error,
        first_violation,
    })
}

/// Lifts a live, converged simulation whose clock is not an event time.
/// Parked robots get `t_e = t0`, moving ones their pending arrival time.
pub fn lift_from_simulation<T: Scalar>(sim: &Simulation<T>) -> Result<RoundState<T>> {
    let dev = sim.max_relative_deviation().unwrap_or(T::infinity());
    if !sim.is_converged() {
        return Err(Error::NotConverged {
            deviation: dev.to_f64_lossy(),
            tolerance: crate::num::CONVERGENCE_RTOL,
        });
    }
    let t0 = sim.time();
    if sim.peek_time()? <= t0 + T::lit(SIMULTANEITY_TOL) {
        return Err(Error::Invalid("lift time coincides with an event".into()));
    }
    let t_e = (0..sim.len())
        .map(|i| sim.arrival_time(i).unwrap_or(t0))
        .collect();
    RoundState::new(sim.fleet(), t0, sim.orientations(), t_e)
}

/// Advances `sim` to the midpoint of the largest event-free gap within the
/// next round and returns that time.
pub fn advance_to_quiet_time<T: Scalar>(sim: &mut Simulation<T>) -> Result<T> {
    let mut probe = sim.clone();
    probe.set_recording(crate::engine::Recording::Off);
    let start = probe.time();
    let horizon = start + probe.t_star();
    let mut times = vec![start];
    while probe.peek_time()? <= horizon {
        times.push(probe.step()?.time);
    }
    times.push(probe.peek_time()?);
    let (a, b) = times
        .windows(2)
        .map(|w| (w[0], w[1]))
        .fold((start, start), |best, g| if g.1 - g.0 > best.1 - best.0 { g } else { best });
    let t0 = (a + b) / T::two();
    sim.run_until_time(t0)?;
    Ok(t0)
}

#[derive(Debug, Clone, Copy)]
struct Track<T> {
    orientation: Orientation,
    active: bool,
    t: T,
    pos: T,
}

/// Lifts the round state from a recorded trace.
///
/// The trace is considered converged from the first record after which
/// every traversing time stays within `tolerance` (relative) of `t*`.
/// `t0` is the midpoint of the widest event-free gap after that point for
/// which every robot's next contact falls within one round.
pub fn lift_from_trace<T: Scalar>(trace: &Trace<T>, fleet: &FleetConfig<T>, tolerance: f64) -> Result<RoundState<T>> {
    let n = fleet.len();
    if trace.metadata.robot_ids.len() != n {
        return Err(Error::Invalid(format!(
            "trace has {} robots, fleet has {n}",
            trace.metadata.robot_ids.len()
        )));
    }
    let t_star = fleet.t_star()?;
    let mut e: Vec<Option<T>> = vec![None; n];
    let mut devs = Vec::with_capacity(trace.len());
    for rec in &trace.records {
        if let Some(x) = rec.e_a {
            e[rec.event.robot_a] = Some(x);
        }
        if let (Some(b), Some(x)) = (rec.event.robot_b, rec.e_b) {
            e[b] = Some(x);
        }
        let dev = e
            .iter()
            .map(|x| x.map_or(T::infinity(), |x| (x - t_star).abs() / t_star))
            .fold(T::zero(), T::max);
        devs.push(dev);
    }
    let tol = T::lit(tolerance);
    let from = devs.iter().rposition(|&d| d.partial_cmp(&tol) != Some(std::cmp::Ordering::Less)).map_or(0, |i| i + 1);
    if from + 2 > devs.len() {
        return Err(Error::NotConverged {
            deviation: devs.last().copied().unwrap_or(T::infinity()).to_f64_lossy(),
            tolerance,
        });
    }
    let mut tracks: Vec<Option<Track<T>>> = vec![None; n];
    let mut y: Vec<Option<T>> = vec![None; n];
    y[n - 1] = Some(fleet.length);
    let mut best: Option<(T, RoundState<T>)> = None;
    let mut last_err = None;
    for (idx, rec) in trace.records.iter().enumerate() {
        replay(rec, &mut tracks, &mut y, n);
        let Some(next) = trace.records.get(idx + 1) else {
            break;
        };
        let gap = next.event.time - rec.event.time;
        let wider = best.as_ref().is_none_or(|(g, _)| gap > *g);
        if idx < from || gap <= T::lit(SIMULTANEITY_TOL) || !wider {
            continue;
        }
        let t0 = (rec.event.time + next.event.time) / T::two();
        match state_at(fleet, &tracks, &y, t0) {
            Ok(state) => best = Some((gap, state)),
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some((_, state)), _) => Ok(state),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::Invalid("no event-free gap after convergence".into())),
    }
}

/// Folds one trace record into the per-robot tracks and known boundaries.
fn replay<T: Scalar>(rec: &TraceRecord<T>, tracks: &mut [Option<Track<T>>], y: &mut [Option<T>], n: usize) {
    let ev = &rec.event;
    if let Some(v) = rec.y_value {
        y[ev.boundary] = Some(v);
    }
    let b = ev.boundary;
    let (l, r) = (b, (b + 1) % n);
    let at = |robot: usize| -> T {
        if robot == ev.robot_a {
            ev.position_a
        } else {
            ev.position_b.unwrap_or(ev.position_a)
        }
    };
    let set = |tracks: &mut [Option<Track<T>>], i: usize, orientation, active| {
        tracks[i] = Some(Track {
            orientation,
            active,
            t: ev.time,
            pos: at(i),
        });
    };
    match ev.kind {
        EventKind::Meeting | EventKind::Discovery => {
            set(tracks, l, Orientation::Backward, true);
            set(tracks, r, Orientation::Forward, true);
        }
        EventKind::Arrival => {
            let o = if ev.robot_a == l { Orientation::Forward } else { Orientation::Backward };
            set(tracks, ev.robot_a, o, false);
        }
        EventKind::Catch => {
            let o = if ev.robot_a == l { Orientation::Forward } else { Orientation::Backward };
            set(tracks, ev.robot_a, o, false);
            if let Some(c) = ev.robot_b {
                tracks[c] = tracks[c].map(|tr| Track {
                    t: ev.time,
                    pos: at(c),
                    ..tr
                });
            }
        }
    }
}

fn state_at<T: Scalar>(
    fleet: &FleetConfig<T>,
    tracks: &[Option<Track<T>>],
    y: &[Option<T>],
    t0: T,
) -> Result<RoundState<T>> {
    let n = fleet.len();
    let mut o = Vec::with_capacity(n);
    let mut t_e = Vec::with_capacity(n);
    for (i, tr) in tracks.iter().enumerate() {
        let id = fleet.robots[i].id;
        let tr = tr.ok_or_else(|| {
            Error::Invalid(format!("trace does not determine the state of robot {id} at t0"))
        })?;
        o.push(tr.orientation);
        if !tr.active {
            t_e.push(t0);
            continue;
        }
        let rb = &fleet.robots[i];
        let target = if tr.orientation.is_forward() {
            y[i].map(|y| y - rb.r)
        } else if i == 0 {
            Some(rb.r)
        } else {
            y[i - 1].map(|y| y + rb.r)
        }
        .ok_or_else(|| Error::Invalid(format!("boundary ahead of robot {id} unknown at t0")))?;
        let dt = (target - tr.pos) * tr.orientation.as_scalar::<T>() / rb.v;
        t_e.push(tr.t + dt);
    }
    RoundState::new(fleet, t0, o, t_e)
}

/// A model meeting paired with the engine meeting it predicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedMeeting<T> {
    pub round: usize,
    pub boundary: usize,
    pub model_time: T,
    pub engine_time: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport<T> {
    pub rounds: usize,
    pub matched: Vec<MatchedMeeting<T>>,
    pub max_time_error: T,
    pub max_position_error: T,
    pub mismatch: Option<String>,
}

impl<T: Scalar> EquivalenceReport<T> {
    pub fn within(&self, tol: f64) -> bool {
        self.mismatch.is_none()
            && self.max_time_error.to_f64_lossy() <= tol
            && self.max_position_error.to_f64_lossy() <= tol
    }
}

/// Pairs the model's meetings with engine meetings falling in
/// `(t0, t0 + R t*)`, boundary by boundary in time order.
pub fn compare_with_events<T: Scalar>(run: &RoundRun<T>, events: &[Event<T>]) -> EquivalenceReport<T> {
    let first = &run.states[0];
    let n = first.len();
    let rounds = run.rounds();
    let horizon = first.t0 + T::lit(rounds as f64) * first.t_star;
    let mut engine: Vec<Vec<&Event<T>>> = vec![Vec::new(); n];
    for ev in events {
        if ev.kind == EventKind::Meeting && ev.time > first.t0 && ev.time < horizon {
            engine[ev.boundary].push(ev);
        }
    }
    let mut model: Vec<Vec<(usize, &Meeting<T>)>> = vec![Vec::new(); n];
    for set in &run.meetings {
        for m in &set.meetings {
            model[m.boundary].push((set.round, m));
        }
    }
    let mut report = EquivalenceReport {
        rounds,
        matched: Vec::new(),
        max_time_error: T::zero(),
        max_position_error: T::zero(),
        mismatch: None,
    };
    for b in 0..n {
        if engine[b].len() != model[b].len() {
            report.mismatch = Some(format!(
                "boundary {}: engine has {} meetings, model {}",
                b + 1,
                engine[b].len(),
                model[b].len()
            ));
            return report;
        }
        for (&ev, &(round, m)) in engine[b].iter().zip(&model[b]) {
            let (pl, pr) = if ev.robot_a == m.left && ev.robot_b == Some(m.right) {
                (ev.position_a, ev.position_b)
            } else if ev.robot_a == m.right && ev.robot_b == Some(m.left) {
                (ev.position_b.unwrap_or(ev.position_a), Some(ev.position_a))
            } else {
                report.mismatch = Some(format!(
                    "boundary {} round {round}: engine robots differ from model",
                    b + 1
                ));
                return report;
            };
            let pr = pr.unwrap_or(pl);
            report.max_time_error = report.max_time_error.max((ev.time - m.time).abs());
            report.max_position_error = report
                .max_position_error
                .max((pl - m.position_left).abs())
                .max((pr - m.position_right).abs());
            report.matched.push(MatchedMeeting {
                round,
                boundary: b,
                model_time: m.time,
                engine_time: ev.time,
            });
        }
    }
    report.matched.sort_by(|a, b| {
        (a.round, a.boundary)
            .cmp(&(b.round, b.boundary))
    });
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Recording, Simulation};
    use crate::placement::random_start;
    use Orientation::{Backward as M, Forward as P};

    fn uniform(n: usize) -> FleetConfig<f64> {
        FleetConfig::from_slices(&vec![1.0; n], &vec![0.0; n], n as f64 * 10.0).unwrap()
    }

    fn state(o: Vec<Orientation>, offsets: &[f64]) -> RoundState<f64> {
        let f = uniform(o.len());
        let t = f.t_star().unwrap();
        RoundState::new(&f, 0.0, o, offsets.iter().map(|x| x * t).collect()).unwrap()
    }

    #[test]
    fn two_robots_meet_once_and_flip() {
        let s = state(vec![P, M], &[0.3, 0.6]);
        let (next, m) = s.step_round();
        assert_eq!(m.meetings.len(), 1);
        assert_eq!(m.meetings[0].boundary, 0);
        assert_eq!(next.o, vec![M, P]);
        assert!((next.t_e[0] - 16.0).abs() < 1e-12);
        assert_eq!(next.meeting_pairs(), vec![1]);
    }

    #[test]
    fn only_facing_pair_meets() {
        let s = state(vec![P, P, M, M], &[0.1, 0.2, 0.3, 0.4]);
        let (next, m) = s.step_round();
        let b: Vec<_> = m.meetings.iter().map(|m| m.boundary).collect();
        assert_eq!(b, vec![1]);
        assert_eq!(next.o, vec![P, M, P, M]);
        assert_eq!(next.t_e[0], s.t_e[0]);
        assert_eq!(next.t_e[3], s.t_e[3]);
    }

    #[test]
    fn interlaced_pairs_shift_left() {
        let s = state(vec![P, M, P, M], &[0.0; 4]);
        assert_eq!(s.interlacing_witness().unwrap(), Some(vec![0, 2]));
        let (next, m) = s.step_round();
        assert_eq!(m.meetings.len(), 2);
        assert_eq!(next.meeting_pairs(), vec![1, 3]);
        assert!(!state(vec![P, P, M, M], &[0.0; 4]).is_interlaced().unwrap());
        assert!(state(vec![P, P, P, P], &[0.0; 4]).is_interlaced().is_err());
    }

    #[test]
    fn max_consensus_synchronizes_in_half_n_rounds() {
        let s = state(vec![P, M, P, M], &[0.2, 0.5, 0.1, 0.4]);
        let t = s.t_star;
        let run = run_rounds(s, 6);
        for &te in &run.states[2].t_e {
            assert!((te - 2.5 * t).abs() < 1e-9);
        }
        let rep = check_synchronization(&run.states, 0, SYNC_TOL).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.required_from, 2);
        assert_eq!(rep.synchronized_from, Some(2));
        assert!((rep.reference - 0.5 * t).abs() < 1e-12);
    }

    #[test]
    fn synchronized_input_holds_immediately() {
        let run = run_rounds(state(vec![P, M, P, M], &[0.3; 4]), 4);
        let rep = check_synchronization(&run.states, 0, SYNC_TOL).unwrap();
        assert_eq!(rep.synchronized_from, Some(0));
        let run = run_rounds(state(vec![P, M], &[0.1, 0.7]), 3);
        let rep = check_synchronization(&run.states, 0, SYNC_TOL).unwrap();
        assert_eq!(rep.synchronized_from, Some(1));
        assert!(rep.holds());
    }

    #[test]
    fn position_and_orientation_meetings_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(2..12);
            let o: Vec<_> = (0..n).map(|_| if rng.random::<bool>() { P } else { M }).collect();
            let mut s = state(o, &vec![0.5; n]);
            for _ in 0..n {
                assert_eq!(s.meeting_pairs(), s.meeting_pairs_by_position());
                s = s.step_round().0;
            }
        }
    }

    #[test]
    fn rejects_arrivals_outside_first_round() {
        let f = uniform(2);
        assert!(RoundState::new(&f, 0.0, vec![P, M], vec![0.0, 20.0]).is_err());
        assert!(RoundState::new(&f, 1.0, vec![P, M], vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn csv_lists_one_row_per_round() {
        let run = run_rounds(state(vec![P, P, M, M], &[0.1, 0.2, 0.3, 0.4]), 3);
        let csv = run.to_csv_string().unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "round,meetings,n_bal,interlaced,max_event_offset");
        assert_eq!(lines[1], "0,1,2,false,3.000000000");
        assert_eq!(lines.len(), 4);
    }

    fn converged(seed: u64, n_forward: usize) -> Simulation<f64> {
        let fleet = FleetConfig::from_slices(&[0.3, 0.7, 0.3, 0.3], &[50.0, 50.0, 50.0, 150.0], 1000.0).unwrap();
        let (p, o) = random_start(&fleet, n_forward, seed).unwrap();
        let mut sim = Simulation::new(fleet, &p, &o).unwrap();
        sim.run_until(200_000, |s, _| s.max_relative_deviation().is_some_and(|d| d < 1e-12))
            .unwrap();
        sim
    }

    #[test]
    fn waiting_robot_lifts_to_t0() {
        let mut sim = converged(1, 1).with_recording(Recording::Off);
        let t0 = advance_to_quiet_time(&mut sim).unwrap();
        let s = lift_from_simulation(&sim).unwrap();
        for i in 0..4 {
            if sim.robots()[i].is_waiting() || !sim.robots()[i].active {
                assert_eq!(s.t_e[i], t0);
            } else {
                let r = &sim.robots()[i];
                let g = (sim.contact_target(i).unwrap() - sim.position(i)).abs();
                assert!((s.t_e[i] - (t0 + g / r.params.v)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trace_and_live_lifts_agree() {
        for seed in 0..4 {
            let mut sim = converged(seed, 2);
            sim.run_events(40).unwrap();
            let from_trace = lift_from_trace(sim.trace(), sim.fleet(), 1e-11).unwrap();
            let mut replay = converged(seed, 2).with_recording(Recording::Off);
            replay.run_until_time(from_trace.t0).unwrap();
            let live = lift_from_simulation(&replay).unwrap();
            assert_eq!(from_trace.o, live.o);
            for (a, b) in from_trace.t_e.iter().zip(&live.t_e) {
                assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn unconverged_trace_is_rejected() {
        let fleet = uniform(3);
        let sim = Simulation::new(fleet.clone(), &[1.0, 12.0, 25.0], &[P, M, P]).unwrap();
        assert!(matches!(
            lift_from_trace(sim.trace(), &fleet, 1e-3),
            Err(Error::NotConverged { .. })
        ));
        assert!(lift_from_simulation(&sim).is_err());
    }

    #[test]
    fn model_tracks_engine_for_a_hundred_rounds() {
        for (seed, nf) in [(0, 2), (5, 1), (9, 3)] {
            let mut sim = converged(seed, nf);
            sim.run_events(20).unwrap();
            let s = lift_from_trace(sim.trace(), sim.fleet(), 1e-11).unwrap();
            let horizon = s.t0 + 101.0 * s.t_star;
            sim.run_until_time(horizon).unwrap();
            let run = run_rounds(s, 100);
            let events: Vec<_> = sim.trace().events().copied().collect();
            let rep = compare_with_events(&run, &events);
            assert!(rep.within(1e-6), "seed {seed}: {:?} {} {}", rep.mismatch, rep.max_time_error, rep.max_position_error);
            assert!(rep.matched.len() >= 100);
        }
    }

    #[test]
    fn lift_skips_gaps_inside_a_slow_transient() {
        let fleet = FleetConfig::<f64>::from_slices(
            &[1.514102104184249, 0.4082770149745668],
            &[10.432932453094976, 5.9282801069511795],
            373.6534910809655,
        )
        .unwrap();
        let (p, o) = random_start(&fleet, 1, 13).unwrap();
        let mut sim = Simulation::new(fleet.clone(), &p, &o).unwrap();
        sim.run_until(100_000, |s, _| s.max_relative_deviation().is_some_and(|d| d < 1e-11))
            .unwrap();
        sim.run_events(8).unwrap();
        let state = lift_from_trace(sim.trace(), &fleet, 1e-11).unwrap();
        sim.run_until_time(state.t0 + 21.0 * state.t_star).unwrap();
        let run = run_rounds(state, 20);
        let events: Vec<_> = sim.trace().events().copied().collect();
        assert!(compare_with_events(&run, &events).within(1e-6));
    }
}
