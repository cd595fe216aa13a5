//! Vertex-indexed operators built from decorations: the discrete Laplacian,
//! the magnetic Laplacian with potential, and finite-range local rules.

mod local;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::complex::{Dart, Triangulation, Vertex};

pub use local::{local_rule_matrix, LocalRow, LocalRule};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("decoration schema violated ({reason}) at {}", .darts.join(", "))]
    SchemaViolation { reason: String, darts: Vec<String> },
    #[error("no local rule row for ball class {0}")]
    MissingBallClass(String),
    #[error("weight at vertex {0} is not positive")]
    NonpositiveWeight(i64),
    #[error("row position {position} lies outside the {size}-vertex ball")]
    RowOutsideBall { position: u32, size: usize },
    #[error("balls of class {0} would need two different rows")]
    InconsistentRule(String),
    #[error("vector has length {found}, operator has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Decoration coordinates holding `w`, `w̄`, `V` and `α`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Slots {
    pub w: usize,
    pub wbar: usize,
    pub potential: usize,
    pub alpha: usize,
}

impl Default for Slots {
    fn default() -> Self {
        Self {
            w: 0,
            wbar: 1,
            potential: 2,
            alpha: 3,
        }
    }
}

/// Where operator weights come from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum DecorationSchema {
    /// `w = deg`, `w̄ = 1`, `V = 0`, `α = 0`, whatever the decorations.
    #[default]
    Natural,
    /// Read from the given decoration coordinates.
    Decorated(Slots),
}

/// Operator weights on one triangulation.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    /// Vertex weight `w`, also the inner-product weight.
    pub w: Vec<f64>,
    /// Edge weight `w̄`, per dart.
    pub wbar: Vec<f64>,
    /// Potential `V`, per vertex.
    pub potential: Vec<f64>,
    /// Magnetic phase `α`, per dart.
    pub alpha: Vec<f64>,
}

const SCHEMA_TOL: f64 = 1e-12;

impl Weights {
    pub fn natural(t: &Triangulation) -> Self {
        Self {
            w: t.vertices().map(|v| t.degree(v) as f64).collect(),
            wbar: vec![1.0; t.num_darts()],
            potential: vec![0.0; t.num_vertices()],
            alpha: vec![0.0; t.num_darts()],
        }
    }

    /// Read and check the schema on `t`.
    pub fn from_schema(t: &Triangulation, schema: DecorationSchema) -> Result<Self, OperatorError> {
        let s = match schema {
            DecorationSchema::Natural => return Ok(Self::natural(t)),
            DecorationSchema::Decorated(s) => s,
        };
        let dim = t.decoration_dim();
        if [s.w, s.wbar, s.potential, s.alpha].iter().any(|&i| i >= dim) {
            return Err(OperatorError::SchemaViolation {
                reason: format!("decorations have {dim} coordinates"),
                darts: Vec::new(),
            });
        }
        let mut bad: Vec<(String, Dart)> = Vec::new();
        let mut flag = |reason: &str, d: Dart| bad.push((reason.to_string(), d));
        let mut w = vec![0.0; t.num_vertices()];
        let mut potential = vec![0.0; t.num_vertices()];
        for v in t.vertices() {
            let out = t.out_darts(v);
            let first = t.decoration(out[0]);
            w[v.idx()] = first[s.w];
            potential[v.idx()] = first[s.potential];
            for &d in out {
                let x = t.decoration(d);
                if !(x[s.w] > 0.0) {
                    flag("w must be positive", d);
                }
                if (x[s.w] - first[s.w]).abs() > SCHEMA_TOL {
                    flag("w differs between darts with one tail", d);
                }
                if (x[s.potential] - first[s.potential]).abs() > SCHEMA_TOL {
                    flag("V differs between darts with one tail", d);
                }
            }
        }
        for d in t.darts() {
            let (x, y) = (t.decoration(d), t.decoration(t.twin(d)));
            if (x[s.wbar] - y[s.wbar]).abs() > SCHEMA_TOL {
                flag("w̄ is not symmetric", d);
            }
            if (x[s.alpha] + y[s.alpha]).abs() > SCHEMA_TOL {
                flag("α is not antisymmetric", d);
            }
        }
        if let Some((reason, _)) = bad.first() {
            let reason = reason.clone();
            let darts = bad
                .iter()
                .filter(|(r, _)| *r == reason)
                .map(|&(_, d)| t.dart_name(d))
                .collect();
            return Err(OperatorError::SchemaViolation { reason, darts });
        }
        Ok(Self {
            w,
            wbar: t.darts().map(|d| t.decoration(d)[s.wbar]).collect(),
            potential,
            alpha: t.darts().map(|d| t.decoration(d)[s.alpha]).collect(),
        })
    }
}

/// A sparse complex operator on vertex functions, self-adjoint for the
/// inner product weighted by `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    w: Vec<f64>,
    hopping_range: usize,
}

impl OperatorMatrix {
    /// Assemble from per-row entry lists. Duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, Complex64)>>, w: Vec<f64>, hopping_range: usize) -> Self {
        let n = rows.len();
        assert_eq!(w.len(), n, "one weight per row");
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            for (c, v) in row {
                assert!(c < n, "column out of range");
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
            w,
            hopping_range,
        }
    }

    pub fn from_dense(m: &DMatrix<Complex64>, w: Vec<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != Complex64::new(0.0, 0.0))
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_rows(rows, w, 0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn hopping_range(&self) -> usize {
        self.hopping_range
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi].iter().copied().zip(self.vals[lo..hi].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[lo..hi].binary_search(&j) {
            Ok(k) => self.vals[lo + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// All stored entries as `(row, column, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>, OperatorError> {
        if f.len() != self.n {
            return Err(OperatorError::DimensionMismatch {
                expected: self.n,
                found: f.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * f[j]).sum())
            .collect())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Largest violation of `w(x) H[x,y] = conj(w(y) H[y,x])`, relative to the
    /// largest weighted entry.
    pub fn self_adjoint_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (i, j, v) in self.triplets() {
            let a = v * self.w[i];
            let b = (self.get(j, i) * self.w[j]).conj();
            worst = worst.max((a - b).norm());
            scale = scale.max(a.norm());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// `W^{1/2} H W^{-1/2}`, Hermitian with the spectrum of `H`.
    pub fn symmetrized(&self) -> Result<DMatrix<Complex64>, OperatorError> {
        let s = self.sqrt_weights()?;
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v * (s[i] / s[j]);
        }
        Ok(m)
    }

    /// Sparse rows of the symmetrized matrix.
    pub fn symmetrized_rows(&self) -> Result<Vec<Vec<(usize, Complex64)>>, OperatorError> {
        let s = self.sqrt_weights()?;
        Ok((0..self.n)
            .map(|i| self.row(i).map(|(j, v)| (j, v * (s[i] / s[j]))).collect())
            .collect())
    }

    pub(crate) fn sqrt_weights(&self) -> Result<Vec<f64>, OperatorError> {
        if let Some(i) = self.w.iter().position(|&x| !(x > 0.0)) {
            return Err(OperatorError::NonpositiveWeight(i as i64));
        }
        Ok(self.w.iter().map(|x| x.sqrt()).collect())
    }

    /// Frobenius-free bound on the operator norm in the weighted geometry:
    /// the largest absolute row sum of the symmetrized matrix.
    pub fn norm_bound(&self) -> f64 {
        let s: Vec<f64> = self.w.iter().map(|x| x.abs().sqrt()).collect();
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v.norm() * s[i] / s[j]).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `W^{1/2} H W^{-1/2}` as a dense Hermitian matrix.
pub fn symmetrized_matrix(h: &OperatorMatrix) -> Result<DMatrix<Complex64>, OperatorError> {
    h.symmetrized()
}

fn assemble(
    t: &Triangulation,
    w: Vec<f64>,
    row: impl Fn(Vertex) -> Vec<(usize, Complex64)> + Sync,
) -> OperatorMatrix {
    let rows = t.vertices().collect::<Vec<_>>().par_iter().map(|&v| row(v)).collect();
    OperatorMatrix::from_rows(rows, w, 1)
}

/// `(Δf)(x) = (1/w(x)) Σ_y w̄(x,y) (f(y) − f(x))`.
pub fn laplacian(t: &Triangulation, schema: DecorationSchema) -> Result<OperatorMatrix, OperatorError> {
    let wt = Weights::from_schema(t, schema)?;
    Ok(laplacian_with(t, &wt))
}

pub fn laplacian_with(t: &Triangulation, wt: &Weights) -> OperatorMatrix {
    assemble(t, wt.w.clone(), |x| {
        let wx = wt.w[x.idx()];
        let mut diag = 0.0;
        let mut row: Vec<(usize, Complex64)> = t
            .out_darts(x)
            .iter()
            .map(|&d| {
                let c = wt.wbar[d.idx()] / wx;
                diag -= c;
                (t.head(d).idx(), Complex64::new(c, 0.0))
            })
            .collect();
        row.push((x.idx(), Complex64::new(diag, 0.0)));
        row
    })
}

/// `(Hf)(x) = (1/w(x)) Σ_y w̄(x,y) e^{iα(x,y)} f(y) + (V(x) − 1) f(x)`.
pub fn magnetic_laplacian(
    t: &Triangulation,
    schema: DecorationSchema,
) -> Result<OperatorMatrix, OperatorError> {
    let wt = Weights::from_schema(t, schema)?;
    Ok(magnetic_laplacian_with(t, &wt))
}

pub fn magnetic_laplacian_with(t: &Triangulation, wt: &Weights) -> OperatorMatrix {
    assemble(t, wt.w.clone(), |x| {
        let wx = wt.w[x.idx()];
        let mut row: Vec<(usize, Complex64)> = t
            .out_darts(x)
            .iter()
            .map(|&d| {
                let c = Complex64::from_polar(wt.wbar[d.idx()] / wx, wt.alpha[d.idx()]);
                (t.head(d).idx(), c)
            })
            .collect();
        row.push((x.idx(), Complex64::new(wt.potential[x.idx()] - 1.0, 0.0)));
        row
    })
}

/// Which operator to assemble on each sphere.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorSpec {
    Laplacian(DecorationSchema),
    Magnetic(DecorationSchema),
    Local(LocalRule),
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self::Laplacian(DecorationSchema::Natural)
    }
}

impl OperatorSpec {
    pub fn build(&self, t: &Triangulation) -> Result<OperatorMatrix, OperatorError> {
        match self {
            Self::Laplacian(s) => laplacian(t, *s),
            Self::Magnetic(s) => magnetic_laplacian(t, *s),
            Self::Local(rule) => local_rule_matrix(t, rule),
        }
    }

    pub fn hopping_range(&self) -> usize {
        match self {
            Self::Local(rule) => rule.hopping_range,
            _ => 1,
        }
    }
}

/// Average a dart function over the darts sharing each tail.
pub fn symmetrize_directional(t: &Triangulation, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    for v in t.vertices() {
        let darts = t.out_darts(v);
        let mean = darts.iter().map(|d| f[d.idx()]).sum::<f64>() / darts.len() as f64;
        for d in darts {
            out[d.idx()] = mean;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_triangulation;

    fn tetra() -> Triangulation {
        build_triangulation(&[[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]], None, 12).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn tetrahedron_laplacian_entries() {
        let h = laplacian(&tetra(), DecorationSchema::Natural).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { -1.0 } else { 1.0 / 3.0 };
                assert!((h.get(i, j) - c(want)).norm() < 1e-15);
            }
            let s: Complex64 = h.row(i).map(|e| e.1).sum();
            assert!(s.norm() < 1e-12);
        }
        let ones = vec![c(1.0); 4];
        assert!(h.apply(&ones).unwrap().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn natural_magnetic_matches_laplacian() {
        let t = tetra();
        let a = laplacian(&t, DecorationSchema::Natural).unwrap();
        let b = magnetic_laplacian(&t, DecorationSchema::Natural).unwrap();
        assert_eq!(a.to_dense(), b.to_dense());
    }

    fn four_dim(t: &Triangulation, phase: f64) -> Triangulation {
        let mut values = Vec::new();
        for d in t.darts() {
            let (u, v) = (t.label(t.tail(d)), t.label(t.head(d)));
            let alpha = match (u, v) {
                (0, 1) => phase,
                (1, 0) => -phase,
                _ => 0.0,
            };
            values.extend([t.degree(t.tail(d)) as f64, 1.0, 0.25, alpha]);
        }
        t.clone().with_decorations(4, values).unwrap()
    }

    #[test]
    fn decorated_schema_reads_slots() {
        let t = four_dim(&tetra(), std::f64::consts::PI);
        let h = magnetic_laplacian(&t, DecorationSchema::Decorated(Slots::default())).unwrap();
        assert!(h.self_adjoint_defect() < 1e-15);
        assert!((h.get(0, 0) - c(-0.75)).norm() < 1e-15);
        assert!((h.get(0, 1) - c(-1.0 / 3.0)).norm() < 1e-15);
        assert!(!h.is_real() || h.get(0, 1).im.abs() < 1e-15);
    }

    #[test]
    fn schema_violations_name_darts() {
        let t = tetra();
        let mut u = four_dim(&t, 0.5);
        let d = u.dart_by_labels(2, 3).unwrap();
        u.set_decoration(d, &[3.0, 2.0, 0.25, 0.0]).unwrap();
        let err = laplacian(&u, DecorationSchema::Decorated(Slots::default())).unwrap_err();
        match err {
            OperatorError::SchemaViolation { darts, .. } => {
                assert!(darts.contains(&"2->3".to_string()));
            }
            e => panic!("unexpected {e}"),
        }
        let err = laplacian(&t, DecorationSchema::Decorated(Slots::default())).unwrap_err();
        assert!(matches!(err, OperatorError::SchemaViolation { .. }));
    }

    #[test]
    fn symmetrization() {
        let t = tetra();
        let h = laplacian(&t, DecorationSchema::Natural).unwrap();
        let m = h.symmetrized().unwrap();
        assert!((&m - m.adjoint()).norm() < 1e-15);
        let unit = OperatorMatrix::from_dense(&h.to_dense(), vec![1.0; 4]);
        assert_eq!(unit.symmetrized().unwrap(), h.to_dense());
        let bad = OperatorMatrix::from_dense(&h.to_dense(), vec![1.0, 0.0, 1.0, 1.0]);
        assert_eq!(bad.symmetrized().unwrap_err(), OperatorError::NonpositiveWeight(1));
    }

    #[test]
    fn directional_symmetrization() {
        let s = crate::generate::glue_double(&crate::generate::triangular_ball(2).unwrap()).unwrap();
        let v = s.vertex_by_label(0).unwrap();
        assert_eq!(s.degree(v), 6);
        let mut f = vec![0.0; s.num_darts()];
        f[s.out_darts(v)[2].idx()] = 1.0;
        let g = symmetrize_directional(&s, &f);
        for &d in s.out_darts(v) {
            assert!((g[d.idx()] - 1.0 / 6.0).abs() < 1e-15);
        }
        assert_eq!(symmetrize_directional(&s, &g), g);
    }
}
