//! Seeded random start configurations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::Orientation;
use crate::error::{Assumption, Error, Result};
use crate::fleet::FleetConfig;
use crate::num::Scalar;

/// Sorted positions whose communication zones are pairwise disjoint and
/// stay inside `[0, L]`.
///
/// The free length `L - 2 Σ r` is split by `n` uniform cut points; robot `i`
/// sits `r_i` past the `i`-th cut plus the zones of the robots before it.
pub fn random_positions<T: Scalar, R: Rng + ?Sized>(fleet: &FleetConfig<T>, rng: &mut R) -> Vec<T> {
    let free = (fleet.length - T::two() * fleet.radius_sum()).to_f64_lossy();
    let mut cuts: Vec<f64> = (0..fleet.len()).map(|_| rng.random::<f64>() * free).collect();
    cuts.sort_by(f64::total_cmp);
    let mut offset = 0.0;
    let mut out = Vec::with_capacity(fleet.len());
    for (robot, cut) in fleet.robots.iter().zip(cuts) {
        let r = robot.r.to_f64_lossy();
        out.push(T::lit(cut + offset + r));
        offset += 2.0 * r;
    }
    out
}

/// Shuffled orientations with exactly `n_forward` robots moving forward.
pub fn random_orientations<R: Rng + ?Sized>(
    n: usize,
    n_forward: usize,
    rng: &mut R,
) -> Result<Vec<Orientation>> {
    if n_forward == 0 || n_forward >= n {
        return Err(Error::AssumptionViolated {
            which: Assumption::A2,
            detail: format!("need 1..{} forward robots, got {n_forward}", n.saturating_sub(1)),
        });
    }
    let mut out: Vec<Orientation> = (0..n)
        .map(|i| {
            if i < n_forward {
                Orientation::Forward
            } else {
                Orientation::Backward
            }
        })
        .collect();
    out.shuffle(rng);
    Ok(out)
}

/// Positions and orientations drawn from a ChaCha stream seeded with `seed`.
pub fn random_start<T: Scalar>(
    fleet: &FleetConfig<T>,
    n_forward: usize,
    seed: u64,
) -> Result<(Vec<T>, Vec<Orientation>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = random_positions(fleet, &mut rng);
    let orientations = random_orientations(fleet.len(), n_forward, &mut rng)?;
    Ok((positions, orientations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zones_are_disjoint_and_inside() {
        let fleet =
            FleetConfig::<f64>::from_slices(&[1.0, 2.0, 3.0, 0.5], &[10.0, 40.0, 5.0, 0.0], 200.0).unwrap();
        for seed in 0..200 {
            let (p, o) = random_start(&fleet, 2, seed).unwrap();
            let r: Vec<f64> = fleet.robots.iter().map(|x| x.r).collect();
            assert!(p[0] - r[0] >= 0.0);
            assert!(p[3] + r[3] <= 200.0 + 1e-9);
            for i in 0..3 {
                assert!(p[i] + r[i] <= p[i + 1] - r[i + 1] + 1e-9);
            }
            assert_eq!(o.iter().filter(|x| x.is_forward()).count(), 2);
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        let fleet = FleetConfig::<f64>::from_slices(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], 30.0).unwrap();
        assert_eq!(random_start(&fleet, 1, 9).unwrap(), random_start(&fleet, 1, 9).unwrap());
        assert_ne!(random_start(&fleet, 1, 9).unwrap().0, random_start(&fleet, 1, 10).unwrap().0);
    }

    #[test]
    fn rejects_uniform_orientations() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random_orientations(4, 0, &mut rng).is_err());
        assert!(random_orientations(4, 4, &mut rng).is_err());
    }
}
