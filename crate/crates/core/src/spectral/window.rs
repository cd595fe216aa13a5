//! Eigenpairs near a shift for operators too large for the dense path:
//! subspace iteration on `(M − σ)^{-1}` with a sparse LU factorization and
//! Rayleigh–Ritz extraction.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{weighted_norm, SpectralError, SELF_ADJOINT_TOL};
use crate::operator::OperatorMatrix;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct WindowOptions {
    /// Residual target, relative to the norm bound of the operator.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra subspace columns beyond the requested count.
    pub guard: usize,
    pub seed: u64,
}

impl Default for WindowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 300,
            guard: 8,
            seed: 0,
        }
    }
}

/// The `count` eigenpairs closest to `center`.
#[derive(Clone, Debug)]
pub struct WindowedSpectrum {
    pub center: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns, unit in the `w`-weighted norm.
    pub eigenvectors: DMatrix<Complex64>,
    /// `‖Hv − λv‖_w` per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

struct ShiftInvert {
    lu: faer::sparse::linalg::solvers::Lu<usize, Complex64>,
}

impl ShiftInvert {
    fn new(rows: &[Vec<(usize, Complex64)>], sigma: f64) -> Result<Self, SpectralError> {
        let n = rows.len();
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let mut diag = false;
            for &(j, v) in row {
                let v = if i == j {
                    diag = true;
                    v - sigma
                } else {
                    v
                };
                trip.push(Triplet::new(i, j, v));
            }
            if !diag {
                trip.push(Triplet::new(i, i, Complex64::new(-sigma, 0.0)));
            }
        }
        let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| SpectralError::Factorization(format!("{e:?}")))?;
        let lu = a.sp_lu().map_err(|e| SpectralError::Factorization(format!("{e:?}")))?;
        Ok(Self { lu })
    }

    fn solve(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut b = Mat::<Complex64>::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)]);
        self.lu.solve_in_place(b.as_mut());
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| b[(i, j)])
    }
}

fn sparse_mul(rows: &[Vec<(usize, Complex64)>], x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut y = DMatrix::zeros(x.nrows(), x.ncols());
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            for c in 0..x.ncols() {
                y[(i, c)] += v * x[(j, c)];
            }
        }
    }
    y
}

fn orthonormal(y: DMatrix<Complex64>) -> DMatrix<Complex64> {
    y.qr().q()
}

/// Eigenpairs of `h` nearest `center`. Works at any dimension; the cost is
/// one sparse factorization plus a few solves per iteration.
pub fn eigh_window(
    h: &OperatorMatrix,
    center: f64,
    count: usize,
    opts: WindowOptions,
) -> Result<WindowedSpectrum, SpectralError> {
    let n = h.dim();
    let defect = h.self_adjoint_defect();
    if defect > SELF_ADJOINT_TOL {
        return Err(SpectralError::NotSelfAdjoint(defect));
    }
    let count = count.min(n);
    let p = (count + opts.guard).min(n);
    let rows = h.symmetrized_rows()?;
    let scale = h.norm_bound().max(1.0);

    // an exact hit on an eigenvalue makes the factorization singular
    let mut sigma = center;
    let mut op = None;
    for attempt in 0..4 {
        let s = ShiftInvert::new(&rows, sigma)?;
        let probe = s.solve(&DMatrix::from_element(n, 1, Complex64::new(1.0, 0.0)));
        if probe.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            op = Some(s);
            break;
        }
        sigma = center + 1e-9 * scale * 10f64.powi(attempt);
    }
    let op = op.ok_or_else(|| SpectralError::Factorization("shift is singular".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q = orthonormal(DMatrix::from_fn(n, p, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }));
    let mut worst = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        q = orthonormal(op.solve(&q));
        let mq = sparse_mul(&rows, &q);
        let t = q.adjoint() * &mq;
        let t = (&t + t.adjoint()).scale(0.5);
        let e = t.symmetric_eigen();
        let mut idx: Vec<usize> = (0..p).collect();
        idx.sort_by(|&a, &b| {
            (e.eigenvalues[a] - center)
                .abs()
                .total_cmp(&(e.eigenvalues[b] - center).abs())
        });
        let ritz = &q * &e.eigenvectors;
        let mritz = &mq * &e.eigenvectors;
        let res: Vec<f64> = idx[..count]
            .iter()
            .map(|&k| (mritz.column(k) - ritz.column(k) * Complex64::new(e.eigenvalues[k], 0.0)).norm())
            .collect();
        worst = res.iter().fold(0.0, |m, &r| m.max(r));
        q = ritz;
        if worst <= opts.tol * scale {
            let mut chosen: Vec<usize> = idx[..count].to_vec();
            chosen.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
            let w = h.weights();
            let vectors = DMatrix::from_fn(n, count, |i, c| q[(i, chosen[c])] / w[i].sqrt());
            let eigenvalues: Vec<f64> = chosen.iter().map(|&k| e.eigenvalues[k]).collect();
            let residuals = (0..count)
                .map(|c| {
                    let v = DVector::from_column_slice(vectors.column(c).as_slice());
                    let hv = h.apply(v.as_slice()).expect("dimension");
                    let r: Vec<Complex64> = hv
                        .iter()
                        .zip(v.iter())
                        .map(|(a, b)| a - b * eigenvalues[c])
                        .collect();
                    weighted_norm(w, &r)
                })
                .collect();
            return Ok(WindowedSpectrum {
                center,
                eigenvalues,
                eigenvectors: vectors,
                residuals,
                iterations: iter,
            });
        }
    }
    Err(SpectralError::NoConvergence(worst))
}
