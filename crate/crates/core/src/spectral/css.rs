use nalgebra::{DMatrix, Dyn, SVD};
use num_complex::Complex64;

use super::{approx_eigen_check, SpectralError};
use crate::complex::{Triangulation, Vertex};
use crate::morph::{embed, Embedding, Patch, Pointed};
use crate::operator::{OperatorMatrix, OperatorSpec};

/// Relative singular value cutoff for the nullspace.
const RANK_CUTOFF: f64 = 1e-8;

/// A compactly supported eigenfunction living on a patch.
#[derive(Clone, Debug)]
pub struct EigenfunctionReport {
    pub eigenvalue: f64,
    /// Labels of the vertices where the vector is nonzero.
    pub support: Vec<i64>,
    /// Values on the patch vertices, indexed like `patch.tri`.
    pub vector: Vec<Complex64>,
    /// `‖(H_A − t)f‖ / ‖f‖` on the patch itself.
    pub residual: f64,
    pub patch: Patch,
}

impl EigenfunctionReport {
    /// Residual after zero-padding into `host` through `emb`.
    pub fn residual_at(
        &self,
        host: &Triangulation,
        spec: &OperatorSpec,
        emb: &Embedding,
    ) -> Result<f64, SpectralError> {
        let h = spec.build(host)?;
        let mut f = vec![Complex64::new(0.0, 0.0); host.num_vertices()];
        for v in self.patch.tri.vertices() {
            f[emb.vertex(v).idx()] = self.vector[v.idx()];
        }
        approx_eigen_check(&h, &f, self.eigenvalue)
    }

    /// Find an embedding of the patch in `host` and return the residual
    /// there, or `None` if the patch does not occur.
    pub fn verify_in(&self, host: &Triangulation, spec: &OperatorSpec) -> Result<Option<f64>, SpectralError> {
        match host.darts().find_map(|d| embed(&self.patch, Pointed::new(host, d))) {
            Some(emb) => self.residual_at(host, spec, &emb).map(Some),
            None => Ok(None),
        }
    }

    pub fn value_at(&self, label: i64) -> Option<Complex64> {
        self.patch.tri.vertex_by_label(label).map(|v| self.vector[v.idx()])
    }
}

type System = (OperatorMatrix, Vec<Vertex>, SVD<Complex64, Dyn, Dyn>);

/// SVD of `(H_A − t)` with columns restricted to the `r`-interior.
fn interior_system(a: &Patch, spec: &OperatorSpec, t: f64, r: usize) -> Result<Option<System>, SpectralError> {
    let cols: Vec<Vertex> = a.interior(r);
    if cols.is_empty() {
        return Ok(None);
    }
    let h = spec.build(&a.tri)?;
    let n = a.tri.num_vertices();
    let mut k = DMatrix::<Complex64>::zeros(n, cols.len());
    for (c, &v) in cols.iter().enumerate() {
        for i in 0..n {
            k[(i, c)] = h.get(i, v.idx());
        }
        k[(v.idx(), c)] -= t;
    }
    let svd = k.svd(false, true);
    Ok(Some((h, cols, svd)))
}

/// Eigenfunctions of `spec` at `t` supported on the `r`-interior of `a`:
/// the nullspace of `(H_A − t)` restricted to interior columns, with every
/// row of `a` enforced.
pub fn css_search(
    a: &Patch,
    spec: &OperatorSpec,
    t: f64,
    r: usize,
    tol: f64,
) -> Result<Vec<EigenfunctionReport>, SpectralError> {
    let Some((h, cols, svd)) = interior_system(a, spec, t, r)? else {
        return Ok(Vec::new());
    };
    let n = a.tri.num_vertices();
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let mut reports = Vec::new();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if s > RANK_CUTOFF * smax.max(f64::MIN_POSITIVE) {
            continue;
        }
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        for (c, v) in cols.iter().enumerate() {
            f[v.idx()] = v_t[(j, c)].conj();
        }
        normalize_phase(&mut f);
        let residual = approx_eigen_check(&h, &f, t)?;
        if residual > tol {
            continue;
        }
        let peak = f.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        let support = a
            .tri
            .vertices()
            .filter(|v| f[v.idx()].norm() > 1e-12 * peak)
            .map(|v| a.tri.label(v))
            .collect();
        reports.push(EigenfunctionReport {
            eigenvalue: t,
            support,
            vector: f,
            residual,
            patch: a.clone(),
        });
    }
    Ok(reports)
}

/// Like [`css_search`], but first refines `t`: every interior vector whose
/// singular value at `t` is below `window` proposes its Rayleigh quotient,
/// and the search runs at each proposal. Use when `t` is only known to a
/// few digits.
pub fn css_search_near(
    a: &Patch,
    spec: &OperatorSpec,
    t: f64,
    r: usize,
    tol: f64,
    window: f64,
) -> Result<Vec<EigenfunctionReport>, SpectralError> {
    let Some((h, cols, svd)) = interior_system(a, spec, t, r)? else {
        return Ok(Vec::new());
    };
    let n = a.tri.num_vertices();
    let w = h.weights();
    let v_t = svd.v_t.expect("requested");
    let mut proposals: Vec<f64> = Vec::new();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if s > window {
            continue;
        }
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        for (c, v) in cols.iter().enumerate() {
            f[v.idx()] = v_t[(j, c)].conj();
        }
        let hf = h.apply(&f)?;
        let num: Complex64 = f.iter().zip(&hf).zip(w).map(|((x, y), w)| x.conj() * y * *w).sum();
        let den: f64 = f.iter().zip(w).map(|(x, w)| x.norm_sqr() * w).sum();
        let lambda = num.re / den;
        if !proposals.iter().any(|p| (p - lambda).abs() <= 1e-9 * (1.0 + lambda.abs())) {
            proposals.push(lambda);
        }
    }
    let mut out = Vec::new();
    for lambda in proposals {
        out.extend(css_search(a, spec, lambda, r, tol)?);
    }
    Ok(out)
}

/// Scale so the largest entry (first on ties) is `1`.
fn normalize_phase(f: &mut [Complex64]) {
    let mut best = 0;
    for (i, z) in f.iter().enumerate() {
        if z.norm() > f[best].norm() * (1.0 + 1e-9) {
            best = i;
        }
    }
    let p = f[best];
    if p.norm() > 0.0 {
        f.iter_mut().for_each(|z| *z /= p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{capped_tube, ring_patch};

    #[test]
    fn ring_patch_carries_the_alternating_state() {
        let a = ring_patch();
        let spec = OperatorSpec::default();
        let found = css_search(&a, &spec, -4.0 / 3.0, 1, 1e-8).unwrap();
        assert_eq!(found.len(), 1);
        let rep = &found[0];
        assert_eq!(rep.support, vec![5, 6, 7, 8]);
        let vals: Vec<f64> = (5..=8).map(|l| rep.value_at(l).unwrap().re).collect();
        assert!((vals[0] + vals[1]).abs() < 1e-10 && (vals[1] + vals[2]).abs() < 1e-10);
        assert!((vals[0].abs() - 1.0).abs() < 1e-10);
        let host = capped_tube(7).unwrap();
        let res = rep.verify_in(&host, &spec).unwrap().expect("ring occurs in the tube");
        assert!(res < 1e-8);
    }

    #[test]
    fn refines_a_rounded_eigenvalue() {
        let a = ring_patch();
        let spec = OperatorSpec::default();
        assert!(css_search(&a, &spec, -1.3333333, 1, 1e-8).unwrap().is_empty());
        let found = css_search_near(&a, &spec, -1.3333333, 1, 1e-8, 1e-6).unwrap();
        assert_eq!(found.len(), 1);
        assert!((found[0].eigenvalue + 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn nothing_outside_the_spectrum() {
        let a = ring_patch();
        assert!(css_search(&a, &OperatorSpec::default(), 3.0, 1, 1e-8).unwrap().is_empty());
        assert!(css_search(&a, &OperatorSpec::default(), -1.0, 1, 1e-8).unwrap().is_empty());
        assert!(css_search(&a, &OperatorSpec::default(), -4.0 / 3.0, 2, 1e-8).unwrap().is_empty());
    }
}
