//! Cycle graphs over 2D task locations and the map from cycle positions back
//! to the plane.
//!
//! Two tour builders are provided: a depth-first walk around the Euclidean
//! minimum spanning tree with every edge doubled, and a nearest-neighbour
//! travelling-salesman tour. Both start at the task with the lowest id, which
//! becomes position 0 (and `L`) of the cycle.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task<T> {
    pub id: u64,
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Task<T> {
    pub fn position(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }
}

/// Ordered, validated list of task locations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskSet<T> {
    tasks: Vec<Task<T>>,
}

impl<T: Scalar> TaskSet<T> {
    pub fn new(tasks: Vec<Task<T>>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::EmptyTaskSet);
        }
        let mut seen = HashSet::new();
        for t in &tasks {
            if !seen.insert(t.id) {
                return Err(Error::DuplicateTaskId(t.id));
            }
            if !t.x.is_finite() || !t.y.is_finite() {
                return Err(Error::NonFinite("task coordinates"));
            }
        }
        Ok(Self { tasks })
    }

    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let tasks = points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Task {
                id: i as u64 + 1,
                x: T::lit(x),
                y: T::lit(y),
            })
            .collect();
        Self::new(tasks)
    }

    pub fn tasks(&self) -> &[Task<T>] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Index of the task with the lowest id.
    fn anchor(&self) -> usize {
        (0..self.tasks.len())
            .min_by_key(|&i| self.tasks[i].id)
            .expect("non-empty task set")
    }
}

impl<'de, T: Scalar> Deserialize<'de> for TaskSet<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "")]
        struct Raw<T: Scalar> {
            tasks: Vec<Task<T>>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        TaskSet::new(raw.tasks).map_err(serde::de::Error::custom)
    }
}

/// A closed walk through the task locations, parameterised by arc length.
///
/// `cumulative_lengths[s]` is the arc length from waypoint 0 to waypoint `s`;
/// the closing edge runs from the last waypoint back to waypoint 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleGraph<T> {
    pub waypoints: Vec<Point2<T>>,
    pub cumulative_lengths: Vec<T>,
    pub total_length: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TourMethod {
    Mst,
    NearestNeighbor,
}

impl<T: Scalar> CycleGraph<T> {
    pub fn from_waypoints(waypoints: Vec<Point2<T>>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::EmptyTaskSet);
        }
        let mut cumulative = Vec::with_capacity(waypoints.len());
        let mut acc = T::zero();
        cumulative.push(acc);
        for w in waypoints.windows(2) {
            acc = acc + w[0].distance(&w[1]);
            cumulative.push(acc);
        }
        let closing = waypoints[waypoints.len() - 1].distance(&waypoints[0]);
        Ok(Self {
            waypoints,
            cumulative_lengths: cumulative,
            total_length: acc + closing,
        })
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Start and end arc length of edge `s` (from waypoint `s` to `s + 1`,
    /// wrapping to waypoint 0 for the last edge).
    fn edge_span(&self, s: usize) -> (T, T) {
        let start = self.cumulative_lengths[s];
        let end = if s + 1 < self.len() {
            self.cumulative_lengths[s + 1]
        } else {
            self.total_length
        };
        (start, end)
    }

    /// Maps a cycle position `p ∈ [0, L]` to the plane by linear
    /// interpolation along the edge that contains it.
    pub fn map_1d_to_2d(&self, p: T) -> Result<Point2<T>> {
        if !(p >= T::zero() && p <= self.total_length) {
            return Err(Error::OutOfRange {
                position: p.to_f64_lossy(),
                length: self.total_length.to_f64_lossy(),
            });
        }
        if p == self.total_length {
            return Ok(self.waypoints[0]);
        }
        // last edge whose start is <= p
        let s = self.cumulative_lengths.partition_point(|&c| c <= p) - 1;
        let (start, end) = self.edge_span(s);
        let from = self.waypoints[s];
        let to = self.waypoints[(s + 1) % self.len()];
        let span = end - start;
        if span <= T::zero() {
            return Ok(to);
        }
        let frac = (p - start) / span;
        if frac == T::zero() {
            return Ok(from);
        }
        if frac >= T::one() {
            return Ok(to);
        }
        Ok(Point2::new(
            from.x + (to.x - from.x) * frac,
            from.y + (to.y - from.y) * frac,
        ))
    }
}

pub fn build_tour(tasks: &TaskSet<f64>, method: TourMethod) -> Result<CycleGraph<f64>> {
    match method {
        TourMethod::Mst => build_tour_mst(tasks),
        TourMethod::NearestNeighbor => build_tour_nn(tasks),
    }
}

/// Euclidean minimum spanning tree edges as index pairs `(a, b)`.
///
/// Kruskal over all pairs; equal weights are ordered by the (smaller id,
/// larger id) pair so the tree is reproducible.
pub fn minimum_spanning_tree<T: Scalar>(tasks: &TaskSet<T>) -> Vec<(usize, usize)> {
    let ts = tasks.tasks();
    let n = ts.len();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let w = ts[a].position().distance(&ts[b].position());
            let (lo, hi) = if ts[a].id < ts[b].id {
                (ts[a].id, ts[b].id)
            } else {
                (ts[b].id, ts[a].id)
            };
            edges.push((w, lo, hi, a, b));
        }
    }
    edges.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .expect("finite weights")
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (_, _, _, a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            tree.push((a, b));
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    tree
}

/// Closed walk around the MST with every edge traversed twice.
pub fn build_tour_mst<T: Scalar>(tasks: &TaskSet<T>) -> Result<CycleGraph<T>> {
    let ts = tasks.tasks();
    let n = ts.len();
    let mut adjacency = vec![Vec::new(); n];
    for (a, b) in minimum_spanning_tree(tasks) {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for nbrs in &mut adjacency {
        nbrs.sort_by_key(|&j| ts[j].id);
    }

    // Euler walk of the doubled tree: every edge is walked down and back up.
    let root = tasks.anchor();
    let mut walk = vec![root];
    let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
    while let Some(top) = stack.last_mut() {
        let (node, parent, next) = *top;
        let children = &adjacency[node];
        if let Some(&child) = children[next..].iter().find(|&&c| c != parent) {
            let pos = next + children[next..].iter().position(|&c| c == child).unwrap();
            top.2 = pos + 1;
            walk.push(child);
            stack.push((child, node, 0));
        } else {
            stack.pop();
            if let Some(&(up, _, _)) = stack.last() {
                walk.push(up);
            }
        }
    }
    // the walk ends back at the root; the closing edge supplies that return
    if walk.len() > 1 {
        walk.pop();
    }
    CycleGraph::from_waypoints(walk.into_iter().map(|i| ts[i].position()).collect())
}

/// Nearest-neighbour tour from the lowest id; distance ties go to the lower id.
pub fn build_tour_nn<T: Scalar>(tasks: &TaskSet<T>) -> Result<CycleGraph<T>> {
    let ts = tasks.tasks();
    let n = ts.len();
    let mut visited = vec![false; n];
    let mut current = tasks.anchor();
    visited[current] = true;
    let mut order = vec![current];
    for _ in 1..n {
        let here = ts[current].position();
        let next = (0..n)
            .filter(|&j| !visited[j])
            .min_by(|&a, &b| {
                let da = here.distance(&ts[a].position());
                let db = here.distance(&ts[b].position());
                da.partial_cmp(&db)
                    .expect("finite distances")
                    .then(ts[a].id.cmp(&ts[b].id))
            })
            .expect("unvisited task remains");
        visited[next] = true;
        order.push(next);
        current = next;
    }
    CycleGraph::from_waypoints(order.into_iter().map(|i| ts[i].position()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> TaskSet<f64> {
        TaskSet::from_points(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]).unwrap()
    }

    #[test]
    fn empty_task_set_is_rejected() {
        assert!(matches!(
            TaskSet::<f64>::new(vec![]),
            Err(Error::EmptyTaskSet)
        ));
    }

    #[test]
    fn duplicate_ids_and_nan_rejected() {
        let t = |id, x| Task { id, x, y: 0.0 };
        assert!(matches!(
            TaskSet::new(vec![t(1, 0.0), t(1, 1.0)]),
            Err(Error::DuplicateTaskId(1))
        ));
        assert!(TaskSet::new(vec![t(1, f64::NAN)]).is_err());
    }

    #[test]
    fn coincident_tasks_are_allowed() {
        let ts = TaskSet::<f64>::from_points(&[(1.0, 1.0), (1.0, 1.0)]).unwrap();
        let g = build_tour_mst(&ts).unwrap();
        assert_eq!(g.total_length, 0.0);
        assert_eq!(g.map_1d_to_2d(0.0).unwrap(), Point2::new(1.0, 1.0));
    }

    #[test]
    fn mst_single_task() {
        let ts = TaskSet::<f64>::from_points(&[(3.0, 4.0)]).unwrap();
        let g = build_tour_mst(&ts).unwrap();
        assert_eq!(g.waypoints, vec![Point2::new(3.0, 4.0)]);
        assert_eq!(g.total_length, 0.0);
    }

    #[test]
    fn mst_two_tasks_doubles_the_edge() {
        let ts = TaskSet::<f64>::from_points(&[(0.0, 0.0), (6.0, 0.0)]).unwrap();
        let g = build_tour_mst(&ts).unwrap();
        assert_eq!(g.waypoints.len(), 2);
        assert_eq!(g.total_length, 12.0);
    }

    #[test]
    fn mst_collinear_three() {
        let ts = TaskSet::<f64>::from_points(&[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)]).unwrap();
        let g = build_tour_mst(&ts).unwrap();
        // 0 -> 1 -> 3 -> 1 -> (0)
        let xs: Vec<f64> = g.waypoints.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 1.0, 3.0, 1.0]);
        assert_eq!(g.total_length, 6.0);
        assert_eq!(g.cumulative_lengths, vec![0.0, 1.0, 3.0, 5.0]);
    }

    #[test]
    fn nn_unit_square() {
        let ts = TaskSet::<f64>::from_points(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
            .unwrap();
        let g = build_tour_nn(&ts).unwrap();
        let expected: Vec<Point2<f64>> = ts.tasks().iter().map(|t| t.position()).collect();
        assert_eq!(g.waypoints, expected);
        assert_eq!(g.total_length, 4.0);
    }

    #[test]
    fn nn_two_and_one() {
        let two = TaskSet::<f64>::from_points(&[(0.0, 0.0), (3.0, 4.0)]).unwrap();
        assert_eq!(build_tour_nn(&two).unwrap().total_length, 10.0);
        let one = TaskSet::<f64>::from_points(&[(7.0, 7.0)]).unwrap();
        assert_eq!(build_tour_nn(&one).unwrap().total_length, 0.0);
    }

    #[test]
    fn nn_tie_goes_to_lower_id() {
        // tasks 2 and 3 are equidistant from task 1
        let ts = TaskSet::new(vec![
            Task { id: 3, x: -1.0, y: 0.0 },
            Task { id: 1, x: 0.0, y: 0.0 },
            Task { id: 2, x: 1.0, y: 0.0 },
        ])
        .unwrap();
        let g = build_tour_nn(&ts).unwrap();
        assert_eq!(g.waypoints[0], Point2::new(0.0, 0.0));
        assert_eq!(g.waypoints[1], Point2::new(1.0, 0.0));
    }

    #[test]
    fn anchor_is_lowest_id() {
        let ts = TaskSet::new(vec![
            Task { id: 5, x: 9.0, y: 9.0 },
            Task { id: 2, x: 1.0, y: 1.0 },
        ])
        .unwrap();
        assert_eq!(build_tour_mst(&ts).unwrap().waypoints[0], Point2::new(1.0, 1.0));
        assert_eq!(build_tour_nn(&ts).unwrap().waypoints[0], Point2::new(1.0, 1.0));
    }

    #[test]
    fn square_mapping() {
        let g = build_tour_nn(&square()).unwrap();
        assert_eq!(g.total_length, 40.0);
        assert_eq!(g.map_1d_to_2d(0.0).unwrap(), Point2::new(0.0, 0.0));
        assert_eq!(g.map_1d_to_2d(15.0).unwrap(), Point2::new(10.0, 5.0));
        assert_eq!(g.map_1d_to_2d(40.0).unwrap(), Point2::new(0.0, 0.0));
        assert_eq!(g.map_1d_to_2d(20.0).unwrap(), Point2::new(10.0, 10.0));
        assert_eq!(g.map_1d_to_2d(35.0).unwrap(), Point2::new(0.0, 5.0));
    }

    #[test]
    fn mapping_rejects_out_of_range() {
        let g = build_tour_nn(&square()).unwrap();
        assert!(matches!(g.map_1d_to_2d(-0.1), Err(Error::OutOfRange { .. })));
        assert!(g.map_1d_to_2d(40.1).is_err());
        assert!(g.map_1d_to_2d(f64::NAN).is_err());
    }

    #[test]
    fn waypoints_map_exactly() {
        let ts = TaskSet::<f64>::from_points(&[(0.3, 0.1), (2.7, 1.9), (5.1, -0.4), (1.3, 3.3)])
            .unwrap();
        for g in [build_tour_mst(&ts).unwrap(), build_tour_nn(&ts).unwrap()] {
            for (s, &c) in g.cumulative_lengths.iter().enumerate() {
                let img = g.map_1d_to_2d(c).unwrap();
                // coincident cumulative values (zero-length edges) map to the later waypoint
                let last = g.cumulative_lengths.partition_point(|&x| x <= c) - 1;
                assert_eq!(img, g.waypoints[last], "waypoint {s}");
            }
        }
    }

    #[test]
    fn f32_tour() {
        let ts = TaskSet::<f32>::from_points(&[(0.0, 0.0), (6.0, 0.0)]).unwrap();
        assert_eq!(build_tour_mst(&ts).unwrap().total_length, 12.0f32);
    }
}
