//! Property suites behind `cycle-patrol verify`.

use std::fmt;
use std::time::Instant;

use clap::ValueEnum;
use cycle_patrol::consensus::{build_matrices, check_spectrum, round_robin_to_fixed_point};
use cycle_patrol::engine::{EventKind, Recording};
use cycle_patrol::placement::random_start;
use cycle_patrol::rounds::{compare_with_events, lift_from_trace, run_rounds};
use cycle_patrol::words::{all_words, check_lemmas, evolve_until_interlaced};
use cycle_patrol::{Fleet, Sim};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Consensus,
    Words,
    Rounds,
    Conservation,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Consensus, Suite::Words, Suite::Rounds, Suite::Conservation],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

/// Deliberate engine defects for checking that the suites notice them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    FlipUpdateSign,
}

pub struct SuiteResult {
    pub suite: Suite,
    pub cases: usize,
    pub failures: Vec<String>,
    pub seconds: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run(suite: Suite, fault: Option<Fault>) -> SuiteResult {
    let start = Instant::now();
    let outcomes: Vec<Result<(), String>> = match suite {
        Suite::Consensus => (0..200u64).into_par_iter().map(|s| consensus_case(s, fault)).collect(),
        Suite::Words => (2..=12usize)
            .flat_map(|n| all_words(n).filter(|w| w.n_bal() > 0))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|w| {
                let evo = evolve_until_interlaced(w).map_err(|e| format!("{w}: {e}"))?;
                if evo.rounds >= w.n_bal() {
                    return Err(format!("{w}: interlaced after {} rounds, n_bal = {}", evo.rounds, w.n_bal()));
                }
                let report = check_lemmas(w, 3 * w.len()).map_err(|e| format!("{w}: {e}"))?;
                match report.violations.first() {
                    Some(v) => Err(format!("{w}: {v}")),
                    None => Ok(()),
                }
            })
            .collect(),
        Suite::Rounds => (0..20u64).into_par_iter().map(|s| rounds_case(s, fault)).collect(),
        Suite::Conservation => (0..50u64).into_par_iter().map(|s| conservation_case(s, fault)).collect(),
        Suite::All => unreachable!("expanded by the caller"),
    };
    SuiteResult {
        suite,
        cases: outcomes.len(),
        failures: outcomes.into_iter().filter_map(Result::err).collect(),
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn random_fleet(rng: &mut ChaCha8Rng, n_max: usize, v_lo: f64) -> Fleet {
    let n = rng.random_range(2..=n_max);
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(v_lo..2.0)).collect();
    let r: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..20.0)).collect();
    let length = 2.0 * r.iter().sum::<f64>() + v.iter().sum::<f64>() * rng.random_range(20.0..200.0);
    Fleet::from_slices(&v, &r, length).expect("generated fleet is valid")
}

fn simulation(fleet: &Fleet, n_forward: usize, seed: u64, fault: Option<Fault>) -> Result<Sim, String> {
    let (p, o) = random_start(fleet, n_forward, seed).map_err(|e| e.to_string())?;
    let sim = Sim::new(fleet.clone(), &p, &o).map_err(|e| e.to_string())?;
    Ok(match fault {
        Some(Fault::FlipUpdateSign) => sim.with_flipped_update_sign(),
        None => sim,
    })
}

/// Link spectra, weighted-mean convergence and the engine's traversing
/// times against a direct pairwise update.
fn consensus_case(seed: u64, fault: Option<Fault>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=32);
    let v: Vec<f64> = (0..n).map(|_| 10.0 * (1.0 - rng.random::<f64>())).collect();
    let m = build_matrices(&v).map_err(|e| e.to_string())?;
    let spectrum = check_spectrum(&m, 1e-9);
    if let Some(bad) = spectrum.violations.first() {
        return Err(format!("fleet {seed}: {bad}"));
    }
    let e0: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..100.0)).collect();
    round_robin_to_fixed_point(&m, &e0, 1e-9, 1_000_000).map_err(|e| format!("fleet {seed}: {e}"))?;

    let r: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
    let length = 2.0 * r.iter().sum::<f64>() + v.iter().sum::<f64>() * rng.random_range(20.0..100.0);
    let fleet = Fleet::from_slices(&v, &r, length).map_err(|e| e.to_string())?;
    let mut sim = simulation(&fleet, rng.random_range(1..n), seed, fault)?.with_recording(Recording::Off);
    sim.run_until(1_000_000, |s, _| s.all_patrolling())
        .map_err(|e| format!("fleet {seed}: {e}"))?;
    let mut e: Vec<f64> = sim.traversing_times().into_iter().flatten().collect();
    for _ in 0..40 * n {
        let ev = sim.step().map_err(|e| format!("fleet {seed}: {e}"))?;
        if ev.kind == EventKind::Meeting && ev.boundary < n - 1 {
            let (b, c) = (ev.boundary, ev.boundary + 1);
            let eps = v[b] * v[c] / (v[b] + v[c]);
            let d = e[c] - e[b];
            e[b] += eps / v[b] * d;
            e[c] -= eps / v[c] * d;
        }
        for (i, x) in sim.traversing_times().into_iter().enumerate() {
            let x = x.ok_or_else(|| format!("fleet {seed}: robot {i} lost its segment"))?;
            if !close(x, e[i], 1e-9) {
                return Err(format!("fleet {seed}: robot {i} has e = {x}, pairwise update gives {}", e[i]));
            }
        }
    }
    Ok(())
}

/// Converged engine runs lifted into the round model and replayed.
fn rounds_case(seed: u64, fault: Option<Fault>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let fleet = random_fleet(&mut rng, 12, 0.1);
    let n = fleet.len();
    let mut sim = simulation(&fleet, rng.random_range(1..n), seed, fault)?.with_recording(Recording::Off);
    let converged = sim
        .run_until(500_000, |s, _| s.max_relative_deviation().is_some_and(|d| d < 1e-11))
        .map_err(|e| format!("instance {seed}: {e}"))?;
    if !converged {
        return Err(format!("instance {seed}: traversing times never settle"));
    }
    sim.set_recording(Recording::Events);
    sim.run_events(8 * n).map_err(|e| e.to_string())?;
    let state = lift_from_trace(sim.trace(), &fleet, 1e-11).map_err(|e| format!("instance {seed}: {e}"))?;
    sim.run_until_time(state.t0 + 101.0 * state.t_star)
        .map_err(|e| format!("instance {seed}: {e}"))?;
    let run = run_rounds(state, 100);
    let events: Vec<_> = sim.trace().events().copied().collect();
    let report = compare_with_events(&run, &events);
    if let Some(m) = report.mismatch {
        return Err(format!("instance {seed}: {m}"));
    }
    if !report.within(1e-6) {
        return Err(format!(
            "instance {seed}: meeting times off by {:e} s, positions by {:e}",
            report.max_time_error, report.max_position_error
        ));
    }
    Ok(())
}

/// Orientation sum, boundary order, pinned seam, pairwise agreement after
/// each meeting and the speed-weighted sum of traversing times.
fn conservation_case(seed: u64, fault: Option<Fault>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
    let fleet = random_fleet(&mut rng, 16, 0.1);
    let n = fleet.len();
    let mut sim = simulation(&fleet, rng.random_range(1..n), seed, fault)?.with_recording(Recording::Off);
    let sum_o = sim.orientation_sum();
    let free = fleet.length - 2.0 * fleet.radius_sum();
    for k in 0..2_000 {
        let ev = sim.step().map_err(|e| format!("run {seed} event {k}: {e}"))?;
        let at = || format!("run {seed} event {k}");
        if sim.orientation_sum() != sum_o {
            return Err(format!("{}: orientation sum changed", at()));
        }
        let y = sim.boundaries();
        if y[n - 1] != Some(fleet.length) {
            return Err(format!("{}: last boundary left L", at()));
        }
        let known: Vec<f64> = y.iter().flatten().copied().collect();
        if known.first().is_some_and(|&b| b <= 0.0) || known.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("{}: boundaries out of order", at()));
        }
        if ev.kind == EventKind::Meeting && ev.boundary < n - 1 {
            if let (Some(a), Some(b)) = (sim.traversing_time(ev.boundary), sim.traversing_time(ev.boundary + 1)) {
                if !close(a, b, 1e-9) {
                    return Err(format!("{}: neighbours disagree after meeting ({a} vs {b})", at()));
                }
            }
        }
        if sim.all_patrolling() {
            let weighted: f64 = (0..n)
                .map(|i| fleet.robots[i].v * sim.traversing_time(i).unwrap_or(f64::NAN))
                .sum();
            if !close(weighted, free, 1e-9) {
                return Err(format!("{}: sum v e = {weighted}, expected {free}", at()));
            }
        }
    }
    Ok(())
}
