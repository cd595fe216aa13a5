//! Empirical measures on pointed triangulations and random-walk leaf
//! measures.

mod walk;

use std::sync::Arc;

use rayon::prelude::*;

use crate::complex::{Dart, Triangulation, Vertex};
use crate::morph::{embed, Patch, Pointed};

pub use walk::{
    cesaro, reiter_defect, rw_distribution, rw_distribution_mc, rw_patch_density,
    walk_average, WalkDistribution,
};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("sphere {0} is not closed")]
    NotClosed(usize),
    #[error("sphere weights must be nonnegative with positive sum, one per sphere")]
    InvalidWeights,
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(i64, i64),
    #[error("probe list is empty")]
    EmptyProbes,
}

/// How a sphere's mass is spread over its darts.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Weighting {
    /// Every dart of a sphere carries the same mass.
    DartUniform,
    /// Every vertex carries the same mass, split evenly over its out-darts.
    VertexUniform,
}

/// A probability measure on darts of finitely many spheres.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    spheres: Vec<Arc<Triangulation>>,
    mass: Vec<f64>,
    mode: Weighting,
}

impl EmpiricalMeasure {
    /// Equal mass per sphere.
    pub fn new(spheres: Vec<Arc<Triangulation>>, mode: Weighting) -> Result<Self, MeasureError> {
        let n = spheres.len();
        Self::with_sphere_weights(spheres, vec![1.0; n], mode)
    }

    /// Per-sphere masses, normalised to total 1.
    pub fn with_sphere_weights(
        spheres: Vec<Arc<Triangulation>>,
        weights: Vec<f64>,
        mode: Weighting,
    ) -> Result<Self, MeasureError> {
        if spheres.is_empty() {
            return Err(MeasureError::EmptyEnsemble);
        }
        if let Some(i) = spheres.iter().position(|s| !s.is_closed()) {
            return Err(MeasureError::NotClosed(i));
        }
        let total: f64 = weights.iter().sum();
        if weights.len() != spheres.len()
            || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite())
            || !(total > 0.0)
        {
            return Err(MeasureError::InvalidWeights);
        }
        Ok(Self {
            spheres,
            mass: weights.into_iter().map(|w| w / total).collect(),
            mode,
        })
    }

    pub fn spheres(&self) -> &[Arc<Triangulation>] {
        &self.spheres
    }

    pub fn mode(&self) -> Weighting {
        self.mode
    }

    /// Total mass of sphere `s`.
    pub fn sphere_mass(&self, s: usize) -> f64 {
        self.mass[s]
    }

    pub fn dart_weight(&self, s: usize, d: Dart) -> f64 {
        let t = &self.spheres[s];
        match self.mode {
            Weighting::DartUniform => self.mass[s] / t.num_darts() as f64,
            Weighting::VertexUniform => {
                self.mass[s] / (t.num_vertices() * t.degree(t.tail(d))) as f64
            }
        }
    }

    /// Mass at vertex `v` of sphere `s`: the sum over its out-darts.
    pub fn vertex_weight(&self, s: usize, v: Vertex) -> f64 {
        let t = &self.spheres[s];
        match self.mode {
            Weighting::DartUniform => self.mass[s] * t.degree(v) as f64 / t.num_darts() as f64,
            Weighting::VertexUniform => self.mass[s] / t.num_vertices() as f64,
        }
    }

    /// Every atom as `(sphere index, dart, weight)`.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, Dart, f64)> + '_ {
        self.spheres
            .iter()
            .enumerate()
            .flat_map(move |(s, t)| t.darts().map(move |d| (s, d, self.dart_weight(s, d))))
    }

    pub fn pointed(&self, s: usize, d: Dart) -> Pointed<'_> {
        Pointed::new(&self.spheres[s], d)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms().map(|a| a.2).sum()
    }
}

/// Equal mass per sphere, uniform over each sphere's darts.
pub fn uniform_measure(spheres: Vec<Triangulation>) -> Result<EmpiricalMeasure, MeasureError> {
    EmpiricalMeasure::new(
        spheres.into_iter().map(Arc::new).collect(),
        Weighting::DartUniform,
    )
}

/// Which darts of `t` carry the patch.
pub fn dart_matches(t: &Triangulation, a: &Patch) -> Vec<bool> {
    t.darts()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&d| embed(a, Pointed::new(t, d)).is_some())
        .collect()
}

/// Mass of the atoms that carry patch `a`.
pub fn patch_frequency(m: &EmpiricalMeasure, a: &Patch) -> f64 {
    (0..m.spheres.len())
        .map(|s| {
            let t = &m.spheres[s];
            dart_matches(t, a)
                .into_iter()
                .enumerate()
                .filter(|&(_, hit)| hit)
                .map(|(d, _)| m.dart_weight(s, Dart(d as u32)))
                .sum::<f64>()
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Largest frequency gap over the probes.
pub fn measure_distance(
    m1: &EmpiricalMeasure,
    m2: &EmpiricalMeasure,
    probes: &[Patch],
) -> Result<f64, MeasureError> {
    if probes.is_empty() {
        return Err(MeasureError::EmptyProbes);
    }
    Ok(probes
        .iter()
        .map(|a| (patch_frequency(m1, a) - patch_frequency(m2, a)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{ball, build_triangulation};
    use crate::generate::{hyperbolic_sphere, theta};

    fn tetra() -> Triangulation {
        build_triangulation(&[[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]], None, 12).unwrap()
    }

    #[test]
    fn uniform_weights() {
        let m = uniform_measure(vec![tetra()]).unwrap();
        assert!(m.atoms().all(|(_, _, w)| (w - 1.0 / 12.0).abs() < 1e-15));
        let big = hyperbolic_sphere(1).unwrap();
        assert_eq!(big.num_darts(), 42);
        let m = uniform_measure(vec![tetra(), big]).unwrap();
        assert!((m.dart_weight(0, Dart(0)) - 1.0 / 24.0).abs() < 1e-15);
        assert!((m.dart_weight(1, Dart(0)) - 1.0 / 84.0).abs() < 1e-15);
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(uniform_measure(vec![]).unwrap_err(), MeasureError::EmptyEnsemble);
    }

    #[test]
    fn frequencies() {
        let s = hyperbolic_sphere(1).unwrap();
        let m = uniform_measure(vec![s.clone()]).unwrap();
        assert_eq!(patch_frequency(&m, &Patch::single_dart(1)), 1.0);
        let star = ball(&s, s.dart_by_labels(0, 1).unwrap(), 1);
        assert_eq!(star.tri.num_vertices(), 8);
        assert!((patch_frequency(&m, &star) - 1.0 / 3.0).abs() < 1e-12);
        // the 2-ball extends the star, so it can only be rarer
        let bigger = ball(&s, s.dart_by_labels(0, 1).unwrap(), 2);
        assert!(patch_frequency(&m, &bigger) <= patch_frequency(&m, &star));
    }

    #[test]
    fn distances_between_stages() {
        let m1 = uniform_measure(vec![hyperbolic_sphere(1).unwrap()]).unwrap();
        let m2 = uniform_measure(vec![hyperbolic_sphere(2).unwrap()]).unwrap();
        let t1 = theta(1).unwrap();
        let star = ball(&t1.tri, t1.marked, 1);
        assert_eq!(measure_distance(&m1, &m1, std::slice::from_ref(&star)).unwrap(), 0.0);
        // degree-7 vertices of Theta_2: 2 * 8 interior, each with 7 darts
        let s2 = hyperbolic_sphere(2).unwrap();
        let expected = (16.0 * 7.0) / s2.num_darts() as f64;
        let d = measure_distance(&m1, &m2, &[star]).unwrap();
        assert!((d - (1.0 / 3.0 - expected).abs()).abs() < 1e-12);
        assert_eq!(measure_distance(&m1, &m2, &[]).unwrap_err(), MeasureError::EmptyProbes);
    }

    #[test]
    fn vertex_uniform_mode() {
        let s = hyperbolic_sphere(1).unwrap();
        let m = EmpiricalMeasure::new(vec![Arc::new(s.clone())], Weighting::VertexUniform).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
        for v in s.vertices() {
            assert!((m.vertex_weight(0, v) - 1.0 / 9.0).abs() < 1e-15);
        }
    }
}
