use rayon::prelude::*;

use super::code::traverse;
use super::Pointed;
use crate::complex::{Dart, Triangulation, Vertex};

/// Result of the one-sided distance between pointed triangulations.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DeltaHat {
    pub value: f64,
    /// Largest radius at which the rooted balls are isomorphic.
    pub radius: usize,
    /// Decoration defect at `radius`.
    pub epsilon: f64,
    /// The balls agree exactly up to the radius cap, so `value` is only the
    /// truncation floor.
    pub exact: bool,
}

/// One-sided distance: the least `max(exp(-r), eps)` over radii `r` at which
/// `B_r(P)` maps onto `B_r(Q)` root to root, where `eps` is the smallest
/// decoration distortion of such a map. Radius 0 always matches, so the
/// value never exceeds 1.
pub fn delta_hat(p: Pointed<'_>, q: Pointed<'_>, r_max: usize) -> DeltaHat {
    let mut out = DeltaHat {
        value: 1.0,
        radius: 0,
        epsilon: 0.0,
        exact: false,
    };
    for r in 1..=r_max {
        let tq = traverse(q.tri, q.root, r, false);
        let eps = [false, true]
            .into_iter()
            .filter_map(|m| traverse(p.tri, p.root, r, m).deviation(p.tri, &tq, q.tri))
            .reduce(f64::min);
        let Some(eps) = eps else { break };
        out.radius = r;
        out.epsilon = eps;
        out.value = out.value.min((-(r as f64)).exp().max(eps));
    }
    out.exact = out.radius == r_max && out.epsilon == 0.0;
    out
}

/// Symmetrised distance `delta_hat(P, Q) + delta_hat(Q, P)`.
pub fn delta(p: Pointed<'_>, q: Pointed<'_>, r_max: usize) -> f64 {
    delta_hat(p, q, r_max).value + delta_hat(q, p, r_max).value
}

/// The discrete sphere bundle: darts as nodes, two darts adjacent when their
/// tails are equal or adjacent and so are their heads.
#[derive(Clone, Debug)]
pub struct SphereBundle {
    adjacency: Vec<Vec<Dart>>,
}

impl SphereBundle {
    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, d: Dart) -> &[Dart] {
        &self.adjacency[d.idx()]
    }

    pub fn is_adjacent(&self, a: Dart, b: Dart) -> bool {
        self.adjacency[a.idx()].binary_search(&b).is_ok()
    }
}

pub fn sphere_bundle(t: &Triangulation) -> SphereBundle {
    let near = |a: Vertex, b: Vertex| a == b || t.are_adjacent(a, b);
    let adjacency = t
        .darts()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&x| {
            let (x1, x2) = (t.tail(x), t.head(x));
            let mut out: Vec<Dart> = std::iter::once(x1)
                .chain(t.adjacent(x1))
                .flat_map(|y1| t.out_darts(y1).iter().copied())
                .filter(|&y| y != x && near(x2, t.head(y)))
                .collect();
            out.sort_unstable();
            out
        })
        .collect();
    SphereBundle { adjacency }
}
