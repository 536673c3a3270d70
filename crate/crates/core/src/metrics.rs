//! Performance figures computed from traces: inter-meeting times, windowed
//! revisit averages, per-point revisits and pass/fail verdicts against the
//! closed-form predictions.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::engine::{Event, EventKind, Trace};
use crate::error::{Error, Result};
use crate::fleet::FleetConfig;
use crate::num::Scalar;

/// Relative tolerance for a PASS verdict.
pub const VERDICT_RTOL: f64 = 0.01;

/// Meeting timestamps at one boundary and their successive differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySeries {
    /// 0-based boundary index.
    pub boundary: usize,
    pub times: Vec<f64>,
    pub intervals: Vec<f64>,
}

pub fn intervals(times: &[f64]) -> Vec<f64> {
    times.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn inter_meeting_times<'a, T, I>(events: I, n: usize) -> Vec<BoundarySeries>
where
    T: Scalar,
    I: IntoIterator<Item = &'a Event<T>>,
{
    let mut times = vec![Vec::new(); n];
    for ev in events {
        if ev.kind == EventKind::Meeting {
            times[ev.boundary].push(ev.time.to_f64_lossy());
        }
    }
    times
        .into_iter()
        .enumerate()
        .map(|(boundary, times)| BoundarySeries {
            boundary,
            intervals: intervals(&times),
            times,
        })
        .collect()
}

/// Sliding mean over `n_bal` consecutive values.
pub fn windowed_revisit(series: &[f64], n_bal: usize) -> Result<Vec<f64>> {
    if n_bal == 0 {
        return Err(Error::NoBalancedPair);
    }
    Ok(series
        .windows(n_bal)
        .map(|w| w.iter().sum::<f64>() / n_bal as f64)
        .collect())
}

/// Predicted revisiting time `n t* / n_bal` (`2 t*` when balanced).
pub fn predicted_revisit(n: usize, n_bal: usize, t_star: f64) -> Result<f64> {
    if n_bal == 0 {
        return Err(Error::NoBalancedPair);
    }
    Ok(n as f64 * t_star / n_bal as f64)
}

/// Meetings whose time falls in each of `rounds` windows of width `t_star`
/// starting at `t0`.
pub fn meetings_per_round<'a, T, I>(events: I, t0: f64, t_star: f64, rounds: usize) -> Vec<usize>
where
    T: Scalar,
    I: IntoIterator<Item = &'a Event<T>>,
{
    let mut counts = vec![0; rounds];
    for ev in events {
        if ev.kind != EventKind::Meeting {
            continue;
        }
        let k = ((ev.time.to_f64_lossy() - t0) / t_star).floor();
        if k >= 0.0 && (k as usize) < rounds {
            counts[k as usize] += 1;
        }
    }
    counts
}

/// Arrivals of every robot at its own right boundary, counted in
/// consecutive windows of `window` seconds starting at `t_from`.
/// Result is indexed `[window][robot]`.
pub fn right_boundary_arrivals<'a, T, I>(events: I, n: usize, t_from: f64, window: f64, windows: usize) -> Vec<Vec<usize>>
where
    T: Scalar,
    I: IntoIterator<Item = &'a Event<T>>,
{
    let mut counts = vec![vec![0; n]; windows];
    for ev in events {
        let arriving = matches!(ev.kind, EventKind::Arrival | EventKind::Meeting);
        if !arriving || ev.robot_a != ev.boundary {
            continue;
        }
        let w = ((ev.time.to_f64_lossy() - t_from) / window).floor();
        if w >= 0.0 && (w as usize) < windows {
            counts[w as usize][ev.robot_a] += 1;
        }
    }
    counts
}

/// Times between successive crossings of cycle position `x` in the same
/// direction, taken from robot trajectories rebuilt from event positions.
/// Only crossings at or after `t_from` are used.
pub fn point_revisit_times<T: Scalar>(trace: &Trace<T>, fleet: &FleetConfig<T>, x: f64, t_from: f64) -> Vec<f64> {
    let n = fleet.len();
    let mut last: Vec<Option<(f64, f64)>> = vec![None; n];
    let mut crossings: Vec<(f64, bool)> = Vec::new();
    for ev in trace.events() {
        let parts = [(ev.robot_a, Some(ev.position_a)), (ev.robot_b.unwrap_or(usize::MAX), ev.position_b)];
        for (i, pos) in parts {
            let Some(pos) = pos.filter(|_| i < n) else { continue };
            let (t, p) = (ev.time.to_f64_lossy(), pos.to_f64_lossy());
            if let Some((t1, p1)) = last[i] {
                let lo = p1.min(p);
                let hi = p1.max(p);
                if p != p1 && x > lo && x <= hi {
                    let v = fleet.robots[i].v.to_f64_lossy();
                    let tc = t1 + (x - p1).abs() / v;
                    if tc >= t_from {
                        crossings.push((tc, p > p1));
                    }
                }
            }
            last[i] = Some((t, p));
        }
    }
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prev: [Option<f64>; 2] = [None, None];
    let mut out = Vec::new();
    for (t, forward) in crossings {
        let slot = &mut prev[usize::from(forward)];
        if let Some(p) = *slot {
            out.push(t - p);
        }
        *slot = Some(t);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::NotApplicable => "N/A",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub predicted: Option<f64>,
    /// Measured value furthest from the prediction.
    pub measured: Option<f64>,
    pub relative_error: Option<f64>,
    pub detail: String,
}

impl Verdict {
    fn judged(name: &str, predicted: f64, worst: Option<f64>, detail: String) -> Self {
        let (status, rel) = match worst {
            None => (Status::Inconclusive, None),
            Some(m) => {
                let rel = (m - predicted).abs() / predicted.abs();
                let status = if rel <= VERDICT_RTOL { Status::Pass } else { Status::Fail };
                (status, Some(rel))
            }
        };
        Self {
            name: name.into(),
            status,
            predicted: Some(predicted),
            measured: worst,
            relative_error: rel,
            detail,
        }
    }

    fn skipped(name: &str, status: Status, detail: &str) -> Self {
        Self {
            name: name.into(),
            status,
            predicted: None,
            measured: None,
            relative_error: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub n: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_bal: usize,
    pub t_star: f64,
    pub predicted_revisit: f64,
    pub converged_at: Option<f64>,
    /// Last known traversing time of every robot.
    pub final_e: Vec<Option<f64>>,
    pub boundaries: Vec<BoundarySeries>,
    /// Windowed averages of the intervals that start after convergence.
    pub windowed: Vec<Vec<f64>>,
    /// Mean steady revisiting time: raw intervals when balanced, windowed
    /// averages otherwise.
    pub measured_revisit: Option<f64>,
    pub verdicts: Vec<Verdict>,
}

impl PerformanceReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts
            .iter()
            .all(|v| matches!(v.status, Status::Pass | Status::NotApplicable))
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Value in `xs` furthest from `target`.
fn furthest(xs: impl IntoIterator<Item = f64>, target: f64) -> Option<f64> {
    xs.into_iter()
        .fold(None, |acc: Option<f64>, x| match acc {
            Some(a) if (a - target).abs() >= (x - target).abs() => Some(a),
            _ => Some(x),
        })
}

fn final_traversing_times<T: Scalar>(trace: &Trace<T>, n: usize) -> Vec<Option<f64>> {
    let mut e = vec![None; n];
    for rec in &trace.records {
        if let Some(x) = rec.e_a {
            e[rec.event.robot_a] = Some(x.to_f64_lossy());
        }
        if let (Some(b), Some(x)) = (rec.event.robot_b, rec.e_b) {
            e[b] = Some(x.to_f64_lossy());
        }
    }
    e
}

/// Measures the trace and judges convergence (all `e_i` reach `t*`) and the
/// revisiting time, `2 t*` for balanced and `n t* / n_bal` (averaged over
/// `n_bal` meetings) for unbalanced orientations. Only intervals that start
/// more than one period `n t*` after the convergence time count towards the
/// verdicts, so every robot has crossed its converged segment at least once.
pub fn theorem_verdicts<T: Scalar>(trace: &Trace<T>, fleet: &FleetConfig<T>) -> Result<PerformanceReport> {
    let n = fleet.len();
    let orient = &trace.metadata.initial_orientations;
    if orient.len() != n {
        return Err(Error::Invalid(
            "trace metadata lacks the initial orientations".into(),
        ));
    }
    let n_plus = orient.iter().filter(|o| o.is_forward()).count();
    let n_minus = n - n_plus;
    let n_bal = n_plus.min(n_minus);
    let t_star = fleet.t_star()?.to_f64_lossy();
    let predicted = predicted_revisit(n, n_bal, t_star)?;
    let converged_at = trace.metadata.converged_at.map(Scalar::to_f64_lossy);
    let final_e = final_traversing_times(trace, n);
    let boundaries = inter_meeting_times(trace.events(), n);
    let settle = n as f64 * t_star;

    let steady: Vec<Vec<f64>> = boundaries
        .iter()
        .map(|s| match converged_at {
            Some(tc) => s
                .times
                .windows(2)
                .filter(|w| w[0] > tc + settle)
                .map(|w| w[1] - w[0])
                .collect(),
            None => Vec::new(),
        })
        .collect();
    let windowed = steady
        .iter()
        .map(|s| windowed_revisit(s, n_bal))
        .collect::<Result<Vec<_>>>()?;

    let balanced = 2 * n_bal == n;
    let pool: Vec<f64> = if balanced { &steady } else { &windowed }
        .iter()
        .flatten()
        .copied()
        .collect();
    let measured_revisit = (!pool.is_empty()).then(|| pool.iter().sum::<f64>() / pool.len() as f64);

    let mut verdicts = Vec::with_capacity(3);
    if converged_at.is_none() {
        verdicts.push(Verdict::skipped(
            "convergence",
            Status::Inconclusive,
            "trace ends before the convergence criterion is met",
        ));
    } else {
        let worst = if final_e.iter().all(Option::is_some) {
            furthest(final_e.iter().flatten().copied(), t_star)
        } else {
            None
        };
        verdicts.push(Verdict::judged(
            "convergence",
            t_star,
            worst,
            "final traversing times vs t*".into(),
        ));
    }

    let enough = |xs: &[Vec<f64>]| converged_at.is_some() && xs.iter().all(|s| !s.is_empty());
    if balanced {
        let worst = enough(&steady).then(|| furthest(steady.iter().flatten().copied(), predicted)).flatten();
        verdicts.push(Verdict::judged(
            "balanced_revisit",
            predicted,
            worst,
            "steady inter-meeting times vs 2 t*".into(),
        ));
        verdicts.push(Verdict::skipped("unbalanced_revisit", Status::NotApplicable, "orientations are balanced"));
    } else {
        verdicts.push(Verdict::skipped("balanced_revisit", Status::NotApplicable, "orientations are unbalanced"));
        let worst = enough(&windowed).then(|| furthest(windowed.iter().flatten().copied(), predicted)).flatten();
        verdicts.push(Verdict::judged(
            "unbalanced_revisit",
            predicted,
            worst,
            format!("inter-meeting times averaged over {n_bal} meetings vs n t*/n_bal"),
        ));
    }

    Ok(PerformanceReport {
        n,
        n_plus,
        n_minus,
        n_bal,
        t_star,
        predicted_revisit: predicted,
        converged_at,
        final_e,
        boundaries,
        windowed,
        measured_revisit,
        verdicts,
    })
}

/// Plot data `time,robot,e_i,f_i,windowed_f_i`, one row per meeting
/// participant. `f_i` is filled for the left robot of the meeting (the
/// boundary is its right one).
pub fn plot_csv<T: Scalar>(trace: &Trace<T>, n_bal: usize) -> Result<String> {
    if n_bal == 0 {
        return Err(Error::NoBalancedPair);
    }
    let n = trace.metadata.robot_ids.len();
    let ids = &trace.metadata.robot_ids;
    let mut last: Vec<Option<f64>> = vec![None; n];
    let mut recent: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut out = String::from("time,robot,e_i,f_i,windowed_f_i\n");
    let fmt = |x: Option<f64>| x.map(|x| format!("{x:.9}")).unwrap_or_default();
    for rec in &trace.records {
        let ev = &rec.event;
        if ev.kind != EventKind::Meeting {
            continue;
        }
        let t = ev.time.to_f64_lossy();
        let b = ev.boundary;
        let f = last[b].map(|p| t - p);
        last[b] = Some(t);
        if let Some(f) = f {
            recent[b].push(f);
            if recent[b].len() > n_bal {
                recent[b].remove(0);
            }
        }
        let windowed = (recent[b].len() == n_bal).then(|| recent[b].iter().sum::<f64>() / n_bal as f64);
        let mut rows = vec![(ev.robot_a, rec.e_a)];
        if let Some(rb) = ev.robot_b {
            rows.push((rb, rec.e_b));
        }
        rows.sort_by_key(|&(i, _)| usize::from(i != b));
        for (i, e) in rows {
            let (fi, wi) = if i == b { (f, windowed) } else { (None, None) };
            let _ = writeln!(
                out,
                "{t:.9},{},{},{},{}",
                ids[i],
                fmt(e.map(Scalar::to_f64_lossy)),
                fmt(fi),
                fmt(wi)
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Simulation;
    use crate::placement::random_start;

    #[test]
    fn successive_differences() {
        let f = intervals(&[100.0, 355.56, 611.12]);
        assert_eq!(f.len(), 2);
        assert!(f.iter().all(|x| (x - 255.56).abs() < 1e-9));
        assert!(intervals(&[3.0]).is_empty());
    }

    #[test]
    fn windowed_means() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(windowed_revisit(&s, 2).unwrap(), vec![1.5, 2.5, 3.5]);
        assert_eq!(windowed_revisit(&[7.0; 5], 3).unwrap(), vec![7.0; 3]);
        assert!(windowed_revisit(&s, 0).is_err());
        assert!(windowed_revisit(&s, 5).unwrap().is_empty());
    }

    #[test]
    fn unbalanced_prediction() {
        let t = 460.0 / 3.6;
        assert!((predicted_revisit(8, 3, t).unwrap() - 340.740_740_74).abs() < 1e-6);
    }

    fn run(fleet: FleetConfig<f64>, n_forward: usize, seed: u64, events: usize) -> Trace<f64> {
        let (p, o) = random_start(&fleet, n_forward, seed).unwrap();
        let mut sim = Simulation::new(fleet, &p, &o).unwrap();
        sim.run_events(events).unwrap();
        sim.take_trace()
    }

    #[test]
    fn balanced_fig3_fleet_revisits_every_500() {
        let fleet = FleetConfig::from_slices(&[0.3, 0.7, 0.3, 0.3], &[50.0, 50.0, 50.0, 150.0], 1000.0).unwrap();
        let trace = run(fleet.clone(), 2, 4, 400);
        let rep = theorem_verdicts(&trace, &fleet).unwrap();
        assert_eq!(rep.verdict("convergence").unwrap().status, Status::Pass);
        let v = rep.verdict("balanced_revisit").unwrap();
        assert_eq!(v.status, Status::Pass, "{v:?}");
        assert!((v.measured.unwrap() - 500.0).abs() < 5.0);
        assert!(rep.all_pass());
        let again = theorem_verdicts(&trace, &fleet).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn two_identical_robots_match_hand_solution() {
        let (v, r, l) = (2.0, 5.0, 100.0);
        let fleet = FleetConfig::from_slices(&[v, v], &[r, r], l).unwrap();
        let trace = run(fleet.clone(), 1, 0, 200);
        let rep = theorem_verdicts(&trace, &fleet).unwrap();
        let expected = l / v - 4.0 * r / v;
        assert!((rep.predicted_revisit - expected).abs() < 1e-12);
        assert_eq!(rep.verdict("balanced_revisit").unwrap().status, Status::Pass, "{:?} {:?}", rep.verdicts, rep.boundaries);
    }

    #[test]
    fn short_trace_is_inconclusive() {
        let fleet = FleetConfig::from_slices(&[0.3, 0.7, 0.3, 0.3], &[50.0, 50.0, 50.0, 150.0], 1000.0).unwrap();
        let trace = run(fleet.clone(), 2, 1, 3);
        let rep = theorem_verdicts(&trace, &fleet).unwrap();
        assert_eq!(rep.verdict("convergence").unwrap().status, Status::Inconclusive);
        assert!(!rep.all_pass());
    }

    #[test]
    fn interior_point_revisit_matches_boundary_revisit() {
        let fleet = FleetConfig::from_slices(&[0.3, 0.7, 0.3, 0.3], &[50.0, 50.0, 50.0, 150.0], 1000.0).unwrap();
        let trace = run(fleet.clone(), 2, 2, 600);
        let tc = trace.metadata.converged_at.unwrap();
        let goal = fleet.goal_partition().unwrap();
        let x = goal.left(1) + 0.4 * goal.d_star[1];
        let rev = point_revisit_times(&trace, &fleet, x, tc + 1000.0);
        assert!(rev.len() > 4);
        for r in rev {
            assert!((r - 500.0).abs() < 5.0, "{r}");
        }
    }

    #[test]
    fn plot_rows_follow_meetings() {
        let fleet = FleetConfig::from_slices(&[0.3, 0.7, 0.3, 0.3], &[50.0, 50.0, 50.0, 150.0], 1000.0).unwrap();
        let trace = run(fleet, 2, 0, 100);
        let csv = plot_csv(&trace, 2).unwrap();
        let rows = csv.lines().count() - 1;
        assert_eq!(rows, 2 * trace.meetings().count());
        assert!(csv.starts_with("time,robot,e_i,f_i,windowed_f_i\n"));
    }
}
