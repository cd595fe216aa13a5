use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dart_matches, MeasureError};
use crate::complex::{Triangulation, Vertex};
use crate::morph::Patch;

/// Law of a simple random walk on the 1-skeleton after `step` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkDistribution {
    pub start: Vertex,
    pub step: usize,
    pub probs: Vec<f64>,
}

impl WalkDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| Vertex(i as u32))
    }
}

fn step(t: &Triangulation, p: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for u in t.vertices() {
        let pu = p[u.idx()];
        if pu == 0.0 {
            continue;
        }
        let share = pu / t.degree(u) as f64;
        for w in t.adjacent(u) {
            out[w.idx()] += share;
        }
    }
}

/// Exact `k`-step distribution from `start`.
pub fn rw_distribution(t: &Triangulation, start: Vertex, k: usize) -> WalkDistribution {
    let mut p = vec![0.0; t.num_vertices()];
    p[start.idx()] = 1.0;
    let mut q = vec![0.0; t.num_vertices()];
    for _ in 0..k {
        step(t, &p, &mut q);
        std::mem::swap(&mut p, &mut q);
    }
    WalkDistribution {
        start,
        step: k,
        probs: p,
    }
}

/// Sampled `k`-step distribution, for graphs too large to propagate exactly.
pub fn rw_distribution_mc(
    t: &Triangulation,
    start: Vertex,
    k: usize,
    samples: usize,
    seed: u64,
) -> WalkDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; t.num_vertices()];
    for _ in 0..samples {
        let mut v = start;
        for _ in 0..k {
            let out = t.out_darts(v);
            v = t.head(out[rng.random_range(0..out.len())]);
        }
        counts[v.idx()] += 1;
    }
    WalkDistribution {
        start,
        step: k,
        probs: counts
            .into_iter()
            .map(|c| c as f64 / samples.max(1) as f64)
            .collect(),
    }
}

/// Cesàro average `(1/n) sum_{k=1..n} P(start, ., k)`. For `n = 0` this is
/// the point mass at `start`.
pub fn cesaro(t: &Triangulation, start: Vertex, n: usize) -> Vec<f64> {
    let mut p = vec![0.0; t.num_vertices()];
    p[start.idx()] = 1.0;
    if n == 0 {
        return p;
    }
    let mut q = vec![0.0; t.num_vertices()];
    let mut acc = vec![0.0; t.num_vertices()];
    for _ in 0..n {
        step(t, &p, &mut q);
        std::mem::swap(&mut p, &mut q);
        acc.iter_mut().zip(&p).for_each(|(a, x)| *a += x);
    }
    let inv = 1.0 / n as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    acc
}

/// Walk law after `n` steps, or its Cesàro average.
pub fn walk_average(t: &Triangulation, start: Vertex, n: usize, cesaro_mean: bool) -> Vec<f64> {
    if cesaro_mean {
        cesaro(t, start, n)
    } else {
        rw_distribution(t, start, n).probs
    }
}

/// Patch density seen by a walker from `x`: each vertex's mass is split
/// evenly over its out-darts and the darts carrying `a` are summed.
pub fn rw_patch_density(t: &Triangulation, x: Vertex, a: &Patch, n: usize, cesaro_mean: bool) -> f64 {
    let f = walk_average(t, x, n, cesaro_mean);
    let hits = dart_matches(t, a);
    t.vertices()
        .filter(|v| f[v.idx()] > 0.0)
        .map(|v| {
            let out = t.out_darts(v);
            let k = out.iter().filter(|d| hits[d.idx()]).count();
            f[v.idx()] * k as f64 / out.len() as f64
        })
        .sum()
}

/// L1 distance between the Cesàro averages from two adjacent vertices.
pub fn reiter_defect(t: &Triangulation, x: Vertex, y: Vertex, n: usize) -> Result<f64, MeasureError> {
    if x != y && !t.are_adjacent(x, y) {
        return Err(MeasureError::NotAdjacent(t.label(x), t.label(y)));
    }
    if x == y {
        return Ok(0.0);
    }
    let (gx, gy) = (cesaro(t, x, n), cesaro(t, y, n));
    Ok(gx.iter().zip(&gy).map(|(a, b)| (a - b).abs()).sum())
}
