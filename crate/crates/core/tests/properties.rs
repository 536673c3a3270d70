use cycle_patrol::consensus::build_matrices;
use cycle_patrol::engine::Recording;
use cycle_patrol::placement::random_start;
use cycle_patrol::rounds::RoundState;
use cycle_patrol::scenario::{build_tour, CycleGraph, Point2, TaskSet, TourMethod};
use cycle_patrol::words::OrientationWord;
use cycle_patrol::{Fleet, Sim};
use proptest::prelude::*;

fn fleet_strategy(max_n: usize) -> impl Strategy<Value = Fleet> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.1f64..5.0, n),
                prop::collection::vec(0.5f64..20.0, n),
                10.0f64..200.0,
            )
        })
        .prop_map(|(v, r, stretch)| {
            let length = 2.0 * r.iter().sum::<f64>() + v.iter().sum::<f64>() * stretch;
            Fleet::from_slices(&v, &r, length).unwrap()
        })
}

fn cyclic_gap(a: f64, b: f64, length: f64) -> f64 {
    let d = (a - b).abs();
    d.min(length - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planar_distance_never_exceeds_arc_distance(
        points in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..12),
        nn in any::<bool>(),
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let tasks = TaskSet::from_points(&points).unwrap();
        let method = if nn { TourMethod::NearestNeighbor } else { TourMethod::Mst };
        let tour: CycleGraph<f64> = build_tour(&tasks, method).unwrap();
        let length = tour.total_length;
        let (pa, pb) = (a * length, b * length);
        let qa: Point2<f64> = tour.map_1d_to_2d(pa).unwrap();
        let qb = tour.map_1d_to_2d(pb).unwrap();
        prop_assert!(qa.distance(&qb) <= cyclic_gap(pa, pb, length) + 1e-9 * length.max(1.0));
    }

    #[test]
    fn t_star_falls_with_speed_and_radius(fleet in fleet_strategy(10), i in 0usize..10, bump in 0.01f64..2.0) {
        let i = i % fleet.len();
        let base = fleet.t_star().unwrap();
        let mut faster = fleet.clone();
        faster.robots[i].v += bump;
        prop_assert!(faster.t_star().unwrap() < base);
        let mut wider = fleet.clone();
        wider.robots[i].r += bump;
        prop_assert!(wider.t_star().unwrap() < base);
        let mut longer = fleet.clone();
        longer.length += bump;
        prop_assert!(longer.t_star().unwrap() > base);
    }

    #[test]
    fn engine_keeps_its_invariants(fleet in fleet_strategy(8), seed in any::<u64>(), nf in 1usize..8) {
        let n = fleet.len();
        let nf = 1 + nf % (n - 1);
        let (p, o) = random_start(&fleet, nf, seed).unwrap();
        let mut sim = Sim::new(fleet.clone(), &p, &o).unwrap().with_recording(Recording::Off);
        let sum_o = sim.orientation_sum();
        let free = fleet.length - 2.0 * fleet.radius_sum();
        let mut last = 0.0;
        for _ in 0..300 {
            let ev = sim.step().unwrap();
            prop_assert!(ev.time >= last);
            last = ev.time;
            prop_assert_eq!(sim.orientation_sum(), sum_o);
            prop_assert_eq!(sim.boundaries()[n - 1], Some(fleet.length));
            let known: Vec<f64> = sim.boundaries().iter().flatten().copied().collect();
            prop_assert!(known.windows(2).all(|w| w[0] < w[1]));
            if sim.all_patrolling() {
                let weighted: f64 = (0..n).map(|i| fleet.robots[i].v * sim.traversing_time(i).unwrap()).sum();
                prop_assert!((weighted - free).abs() <= 1e-9 * free);
            }
        }
    }

    #[test]
    fn word_step_keeps_letter_counts(mask in any::<u64>(), n in 2usize..64) {
        let mask = mask & ((1u64 << n) - 1);
        prop_assume!(mask != 0 && mask != (1u64 << n) - 1);
        let w = OrientationWord::from_mask(mask, n).unwrap();
        let next = w.step().unwrap();
        prop_assert_eq!(next.n_plus(), w.n_plus());
        prop_assert_eq!(next.len(), n);
    }

    #[test]
    fn interlacing_is_absorbing(mask in any::<u64>(), n in 2usize..40) {
        let mask = mask & ((1u64 << n) - 1);
        prop_assume!(mask != 0 && mask != (1u64 << n) - 1);
        let mut w = OrientationWord::from_mask(mask, n).unwrap();
        while !w.is_interlaced().unwrap() {
            w = w.step().unwrap();
        }
        for _ in 0..n {
            w = w.step().unwrap();
            prop_assert!(w.is_interlaced().unwrap());
            prop_assert_eq!(w.pair_starts().len(), w.n_bal());
        }
    }

    #[test]
    fn interlaced_rounds_hold_n_bal_meetings(
        fleet in fleet_strategy(10),
        mask in any::<u64>(),
        offsets in prop::collection::vec(0.0f64..1.0, 10),
    ) {
        let n = fleet.len();
        let mask = mask & ((1u64 << n) - 1);
        prop_assume!(mask != 0 && mask != (1u64 << n) - 1);
        let o = OrientationWord::from_mask(mask, n).unwrap().to_orientations();
        let t_star = fleet.t_star().unwrap();
        let t_e: Vec<f64> = offsets[..n].iter().map(|f| f * t_star * 0.999).collect();
        let mut state = RoundState::new(&fleet, 0.0, o, t_e).unwrap();
        let n_bal = state.n_bal();
        let mut interlaced = false;
        for _ in 0..2 * n {
            interlaced |= state.is_interlaced().unwrap();
            let (next, meetings) = state.step_round();
            if interlaced {
                prop_assert_eq!(meetings.meetings.len(), n_bal);
            }
            state = next;
        }
        prop_assert!(interlaced);
    }

    #[test]
    fn link_matrices_preserve_speed_weighted_sum(v in prop::collection::vec(0.01f64..10.0, 2..32)) {
        let m = build_matrices(&v).unwrap();
        for link in &m.links {
            for col in 0..m.n {
                let weighted: f64 = (0..m.n).map(|row| v[row] * link.p[(row, col)]).sum();
                prop_assert!((weighted - v[col]).abs() <= 1e-12 * v[col].max(1.0));
            }
        }
    }
}
