//! Parameter sweeps comparing simulated revisiting times with the closed
//! form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{Recording, Simulation};
use crate::error::{Error, Result};
use crate::fleet::FleetConfig;
use crate::metrics::{predicted_revisit, theorem_verdicts};
use crate::placement::random_start;

/// Which parameters of robots 1 and 2 a capability factor scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorTarget {
    Radius,
    Speed,
    Both,
}

impl FactorTarget {
    pub const ALL: [FactorTarget; 3] = [FactorTarget::Radius, FactorTarget::Speed, FactorTarget::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            FactorTarget::Radius => "radius",
            FactorTarget::Speed => "speed",
            FactorTarget::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mode: String,
    pub param: f64,
    pub n: usize,
    pub n_bal: usize,
    pub t_star: f64,
    pub t_rev_predicted: f64,
    pub t_rev_measured: Option<f64>,
}

impl SweepRow {
    pub fn relative_error(&self) -> Option<f64> {
        self.t_rev_measured
            .map(|m| (m - self.t_rev_predicted).abs() / self.t_rev_predicted)
    }
}

pub const SWEEP_CSV_HEADER: &str = "mode,param,n,n_bal,t_star,t_rev_predicted,t_rev_measured,relative_error";

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    let cell = |x: Option<f64>| x.map(|x| format!("{x:.9}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.9},{},{},{:.9},{:.9},{},{}",
            r.mode,
            r.param,
            r.n,
            r.n_bal,
            r.t_star,
            r.t_rev_predicted,
            cell(r.t_rev_measured),
            cell(r.relative_error())
        );
    }
    out
}

/// `n` identical robots, the Fig. 4 left setting by default.
pub fn uniform_fleet(n: usize, v: f64, r: f64, length: f64) -> Result<FleetConfig<f64>> {
    FleetConfig::from_slices(&vec![v; n], &vec![r; n], length)
}

/// Six robots with speed 2 and radius 50 on a 10 km cycle, robots 1 and 2
/// scaled by `factor`.
pub fn factor_fleet(target: FactorTarget, factor: f64) -> Result<FleetConfig<f64>> {
    let mut v = vec![2.0; 6];
    let mut r = vec![50.0; 6];
    for i in 0..2 {
        if target != FactorTarget::Radius {
            v[i] *= factor;
        }
        if target != FactorTarget::Speed {
            r[i] *= factor;
        }
    }
    FleetConfig::from_slices(&v, &r, 10_000.0)
}

/// Simulates `fleet` from a seeded start with `n / 2` robots facing
/// forward until converged, then for `4n` more rounds, and reports the
/// measured and predicted revisiting times.
pub fn sweep_point(mode: &str, param: f64, fleet: &FleetConfig<f64>, seed: u64, max_events: usize) -> Result<SweepRow> {
    let n = fleet.len();
    let n_bal = n / 2;
    let t_star = fleet.t_star()?;
    let (p, o) = random_start(fleet, n_bal, seed)?;
    let mut sim = Simulation::new(fleet.clone(), &p, &o)?.with_recording(Recording::Events);
    if !sim.run_until(max_events, |s, _| s.is_converged())? {
        return Err(Error::NotConverged {
            deviation: sim.max_relative_deviation().unwrap_or(f64::INFINITY),
            tolerance: crate::num::CONVERGENCE_RTOL,
        });
    }
    sim.run_until_time(sim.time() + (4 * n) as f64 * t_star)?;
    let report = theorem_verdicts(sim.trace(), fleet)?;
    Ok(SweepRow {
        mode: mode.into(),
        param,
        n,
        n_bal,
        t_star,
        t_rev_predicted: predicted_revisit(n, n_bal, t_star)?,
        t_rev_measured: report.measured_revisit,
    })
}

/// `count` factors spaced geometrically from `lo` to `hi`.
pub fn geometric_factors(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || count == 0 {
        return Err(Error::Invalid(format!("bad factor range {lo}..{hi} x{count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi / lo).ln() / (count - 1) as f64;
    Ok((0..count).map(|k| lo * (step * k as f64).exp()).collect())
}
