//! Eigensolving, traces against test functions, integrated density of
//! states, and eigenfunction certificates.

mod css;
mod function;
mod window;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::complex::Triangulation;
use crate::measure::{EmpiricalMeasure, Weighting};
use crate::operator::{OperatorError, OperatorMatrix, OperatorSpec};

pub use css::{css_search, css_search_near, EigenfunctionReport};
pub use function::TestFunction;
pub use window::{eigh_window, WindowOptions, WindowedSpectrum};

/// Largest dimension handled by the dense solver.
pub const DENSE_LIMIT: usize = 5000;

const SELF_ADJOINT_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("dimension {0} exceeds the dense limit {DENSE_LIMIT}; use the windowed solver")]
    TooLarge(usize),
    #[error("operator is not self-adjoint in its weighted geometry (defect {0:e})")]
    NotSelfAdjoint(f64),
    #[error("vector is zero")]
    ZeroVector,
    #[error("vector has length {found}, operator has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("windowed solver did not converge (residual {0:e})")]
    NoConvergence(f64),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Full eigendecomposition of a self-adjoint operator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of the symmetrized matrix, as columns.
    unitary: DMatrix<Complex64>,
    site_weights: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The inner-product weights `w`.
    pub fn site_weights(&self) -> &[f64] {
        &self.site_weights
    }

    /// Eigenvector `k` in the original coordinates, unit in the
    /// `w`-weighted norm.
    pub fn eigenvector(&self, k: usize) -> DVector<Complex64> {
        DVector::from_iterator(
            self.len(),
            self.unitary
                .column(k)
                .iter()
                .zip(&self.site_weights)
                .map(|(u, w)| u / w.sqrt()),
        )
    }

    /// Largest `|λ|`, the operator norm in the weighted geometry.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Diagonal of `φ(H)`.
    pub fn diagonal(&self, phi: &TestFunction) -> Vec<f64> {
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| phi.eval(l)).collect();
        (0..self.len())
            .map(|x| {
                self.unitary
                    .row(x)
                    .iter()
                    .zip(&vals)
                    .map(|(u, v)| u.norm_sqr() * v)
                    .sum()
            })
            .collect()
    }

    /// `Σ_x weight(x) φ(H)[x,x]` on the sphere `t` carrying this spectrum.
    pub fn site_average(&self, t: &Triangulation, phi: &TestFunction, weighting: Weighting) -> f64 {
        self.diagonal(phi)
            .iter()
            .zip(site_weighting(t, weighting))
            .map(|(d, w)| d * w)
            .sum()
    }

    /// Expansion coefficients of `f` in the eigenbasis.
    fn coefficients(&self, f: &[Complex64]) -> Result<DVector<Complex64>, SpectralError> {
        check_len(self.len(), f.len())?;
        let u = DVector::from_iterator(
            f.len(),
            f.iter().zip(&self.site_weights).map(|(x, w)| x * w.sqrt()),
        );
        if u.norm() == 0.0 {
            return Err(SpectralError::ZeroVector);
        }
        Ok(self.unitary.adjoint() * u)
    }

    /// `‖(1 − P)f‖ / ‖f‖` with `P` the spectral projector onto
    /// `[ξ − δ, ξ + δ]`.
    pub fn localization(&self, f: &[Complex64], xi: f64, delta: f64) -> Result<f64, SpectralError> {
        let c = self.coefficients(f)?;
        let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let outside: f64 = c
            .iter()
            .zip(&self.eigenvalues)
            .filter(|(_, &l)| (l - xi).abs() > delta)
            .map(|(z, _)| z.norm_sqr())
            .sum();
        Ok((outside / total).sqrt())
    }

    /// Largest `‖Hv − λv‖_w` over the eigenpairs.
    pub fn max_residual(&self, h: &OperatorMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.eigenvector(k);
                let hv = h.apply(v.as_slice()).expect("dimension");
                let r: Vec<Complex64> = hv
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| a - b * self.eigenvalues[k])
                    .collect();
                weighted_norm(&self.site_weights, &r)
            })
            .fold(0.0, f64::max)
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), SpectralError> {
    if expected == found {
        Ok(())
    } else {
        Err(SpectralError::DimensionMismatch { expected, found })
    }
}

/// Per-vertex trace weights: `deg(x) / Σ deg` or `1 / V`.
pub fn site_weighting(t: &Triangulation, weighting: Weighting) -> Vec<f64> {
    match weighting {
        Weighting::DartUniform => {
            let total: usize = t.vertices().map(|v| t.degree(v)).sum();
            t.vertices()
                .map(|v| t.degree(v) as f64 / total as f64)
                .collect()
        }
        Weighting::VertexUniform => vec![1.0 / t.num_vertices() as f64; t.num_vertices()],
    }
}

pub fn weighted_norm(w: &[f64], f: &[Complex64]) -> f64 {
    f.iter()
        .zip(w)
        .map(|(x, w)| w * x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Dense eigendecomposition through the symmetrized matrix.
pub fn eigh(h: &OperatorMatrix) -> Result<Spectrum, SpectralError> {
    let n = h.dim();
    if n > DENSE_LIMIT {
        return Err(SpectralError::TooLarge(n));
    }
    let defect = h.self_adjoint_defect();
    if defect > SELF_ADJOINT_TOL {
        return Err(SpectralError::NotSelfAdjoint(defect));
    }
    let m = h.symmetrized()?;
    let m = (&m + m.adjoint()).scale(0.5);
    let (values, vectors) = if h.is_real() {
        let e = m.map(|z| z.re).symmetric_eigen();
        (e.eigenvalues, e.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let e = m.symmetric_eigen();
        (e.eigenvalues, e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&k| values[k]).collect(),
        unitary: vectors.select_columns(&order),
        site_weights: h.weights().to_vec(),
    })
}

/// `Σ_x weight(x) φ(H)[x,x]`.
pub fn trace_site_average(
    t: &Triangulation,
    h: &OperatorMatrix,
    phi: &TestFunction,
    weighting: Weighting,
) -> Result<f64, SpectralError> {
    Ok(eigh(h)?.site_average(t, phi, weighting))
}

/// Spectra of every sphere of a measure, computed once.
#[derive(Clone, Debug)]
pub struct SpectralAtlas<'m> {
    measure: &'m EmpiricalMeasure,
    spectra: Vec<Spectrum>,
}

impl<'m> SpectralAtlas<'m> {
    pub fn new(measure: &'m EmpiricalMeasure, spec: &OperatorSpec) -> Result<Self, SpectralError> {
        let spectra = measure
            .spheres()
            .par_iter()
            .map(|t| eigh(&spec.build(t)?))
            .collect::<Result<_, _>>()?;
        Ok(Self { measure, spectra })
    }

    pub fn spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    /// `κ(φ)` under the measure's own weighting.
    pub fn kappa(&self, phi: &TestFunction) -> f64 {
        self.kappa_with(phi, self.measure.mode())
    }

    pub fn kappa_with(&self, phi: &TestFunction, weighting: Weighting) -> f64 {
        self.spectra
            .iter()
            .enumerate()
            .map(|(s, sp)| {
                self.measure.sphere_mass(s) * sp.site_average(&self.measure.spheres()[s], phi, weighting)
            })
            .sum()
    }

    /// Mass of the eigenvalues within `tol` of `t`.
    pub fn jump(&self, t: f64, tol: f64) -> Result<f64, SpectralError> {
        Ok(self.kappa(&TestFunction::window(t, tol)?))
    }
}

/// `κ(φ)` for the operator `spec` averaged over `m`.
pub fn ids(m: &EmpiricalMeasure, spec: &OperatorSpec, phi: &TestFunction) -> Result<f64, SpectralError> {
    Ok(SpectralAtlas::new(m, spec)?.kappa(phi))
}

/// Finite-stage atom of the integrated density of states at `t`.
pub fn ids_jump(m: &EmpiricalMeasure, spec: &OperatorSpec, t: f64, tol: f64) -> Result<f64, SpectralError> {
    SpectralAtlas::new(m, spec)?.jump(t, tol)
}

/// One line of an IDS convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct IdsRow {
    pub stage: usize,
    pub t: f64,
    pub dart_uniform: f64,
    pub vertex_uniform: f64,
}

/// `κ((-∞, t])` for each stage and each `t`, both weightings.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IdsTable {
    pub rows: Vec<IdsRow>,
}

impl IdsTable {
    pub fn build(
        stages: &[(usize, EmpiricalMeasure)],
        spec: &OperatorSpec,
        ts: &[f64],
    ) -> Result<Self, SpectralError> {
        let mut rows = Vec::new();
        for (stage, m) in stages {
            let atlas = SpectralAtlas::new(m, spec)?;
            for &t in ts {
                let phi = TestFunction::step(t)?;
                rows.push(IdsRow {
                    stage: *stage,
                    t,
                    dart_uniform: atlas.kappa_with(&phi, Weighting::DartUniform),
                    vertex_uniform: atlas.kappa_with(&phi, Weighting::VertexUniform),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn stages(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.rows.iter().map(|r| r.stage).collect();
        s.dedup();
        s
    }

    /// For each pair of successive stages, the largest gap over `t` in the
    /// given weighting.
    pub fn cauchy_gaps(&self, weighting: Weighting) -> Vec<f64> {
        let value = |r: &IdsRow| match weighting {
            Weighting::DartUniform => r.dart_uniform,
            Weighting::VertexUniform => r.vertex_uniform,
        };
        let stages = self.stages();
        stages
            .windows(2)
            .map(|w| {
                let a: Vec<&IdsRow> = self.rows.iter().filter(|r| r.stage == w[0]).collect();
                let b: Vec<&IdsRow> = self.rows.iter().filter(|r| r.stage == w[1]).collect();
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (value(x) - value(y)).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// `‖Hf − ξf‖ / ‖f‖` in the weighted norm.
pub fn approx_eigen_check(h: &OperatorMatrix, f: &[Complex64], xi: f64) -> Result<f64, SpectralError> {
    check_len(h.dim(), f.len())?;
    let norm = weighted_norm(h.weights(), f);
    if norm == 0.0 {
        return Err(SpectralError::ZeroVector);
    }
    let r: Vec<Complex64> = h
        .apply(f)?
        .iter()
        .zip(f)
        .map(|(a, b)| a - b * xi)
        .collect();
    Ok(weighted_norm(h.weights(), &r) / norm)
}

/// `‖(1 − P_[ξ−δ, ξ+δ](H)) f‖ / ‖f‖`.
pub fn spectral_localization(
    h: &OperatorMatrix,
    f: &[Complex64],
    xi: f64,
    delta: f64,
) -> Result<f64, SpectralError> {
    eigh(h)?.localization(f, xi, delta)
}
