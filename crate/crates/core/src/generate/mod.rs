//! Sphere ensembles: doubled lattice balls, face substitution and the
//! hyperbolic family, plus a few small fixtures.

mod substitution;
mod theta;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{
    BuildError, DecorationMap, Triangulation, TriangulationBuilder, DEFAULT_DEGREE_BOUND,
};
use crate::morph::{Omega, Patch};

pub use substitution::{
    substitution_apply, substitution_validate, FaceImage, RuleReport, SubstitutionRule,
};
pub use theta::{boundary_word, hyperbolic_sphere, theta, BoundaryWord, Letter};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("patch is not a disk: {0}")]
    NotDisk(String),
    #[error("boundary vertex {vertex} has degree {degree}, expected 3 or 4")]
    UnexpectedDegree { vertex: i64, degree: usize },
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("boundary arcs disagree along edge {0}")]
    ArcMismatch(String),
    #[error("no image for face class {0}")]
    MissingFaceClass(String),
    #[error("invalid substitution rule: {0}")]
    InvalidRule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Axial coordinates of the triangular lattice.
fn hex_dist(q: i64, r: i64) -> i64 {
    q.abs().max(r.abs()).max((q + r).abs())
}

/// The radius-`k` ball of the degree-6 triangular lattice, marked at the
/// centre (label 0).
pub fn triangular_ball(k: usize) -> Result<Patch, GenerateError> {
    if k == 0 {
        return Err(GenerateError::InvalidParameter("k must be at least 1".into()));
    }
    let k = k as i64;
    let mut coords = Vec::new();
    for q in -k..=k {
        for r in -k..=k {
            if hex_dist(q, r) <= k {
                coords.push((hex_dist(q, r), q, r));
            }
        }
    }
    coords.sort_unstable();
    let label: HashMap<(i64, i64), i64> = coords
        .iter()
        .enumerate()
        .map(|(i, &(_, q, r))| ((q, r), i as i64))
        .collect();
    let mut faces = Vec::new();
    for &(_, q, r) in &coords {
        for tri in [
            [(q, r), (q + 1, r), (q, r + 1)],
            [(q, r), (q + 1, r - 1), (q + 1, r)],
        ] {
            if let [Some(&a), Some(&b), Some(&c)] = tri.map(|p| label.get(&p)) {
                faces.push([a, b, c]);
            }
        }
    }
    let tri = TriangulationBuilder::new(faces).build()?;
    let marked = tri.dart_by_labels(0, label[&(1, 0)]).unwrap();
    Ok(Patch {
        tri,
        marked,
        omega: Omega::Exact,
    })
}

/// Glue a disk to its mirror image along the boundary, identity on the
/// boundary cycle. Interior vertices of the copy get fresh labels above the
/// largest label of `a`; decorations are copied dart for dart.
pub fn glue_double(a: &Patch) -> Result<Triangulation, GenerateError> {
    let t = &a.tri;
    let cycles = t.boundary_cycles();
    if cycles.len() != 1 || t.euler_characteristic() != 1 {
        return Err(GenerateError::NotDisk(format!(
            "{} boundary components, Euler characteristic {}",
            cycles.len(),
            t.euler_characteristic()
        )));
    }
    let max = t.labels().iter().copied().max().unwrap();
    let mut fresh = max;
    let copy: Vec<i64> = t
        .vertices()
        .map(|v| {
            if t.is_boundary_vertex(v) {
                t.label(v)
            } else {
                fresh += 1;
                fresh
            }
        })
        .collect();
    let mut faces: Vec<[i64; 3]> = t.faces().iter().map(|f| f.map(|v| t.label(v))).collect();
    faces.extend(
        t.faces()
            .iter()
            .map(|f| [copy[f[0].idx()], copy[f[2].idx()], copy[f[1].idx()]]),
    );
    let mut b = TriangulationBuilder::new(faces).degree_bound(t.degree_bound());
    if t.decoration_dim() != 1 || !t.decorations().is_zero() {
        let mut map = DecorationMap::new();
        for d in t.darts() {
            let (u, v) = (t.tail(d), t.head(d));
            let value = t.decoration(d).to_vec();
            map.insert((copy[u.idx()], copy[v.idx()]), value.clone());
            map.insert((t.label(u), t.label(v)), value);
        }
        b = b.decorations(map);
    }
    Ok(b.build()?)
}

/// Give every undirected edge an independent uniform symbol from
/// `alphabet`, the same on both of its darts.
pub fn decorate_iid(
    t: &Triangulation,
    alphabet: &[f64],
    seed: u64,
) -> Result<Triangulation, GenerateError> {
    if alphabet.is_empty() {
        return Err(GenerateError::EmptyAlphabet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; t.num_darts()];
    for d in t.darts() {
        let tw = t.twin(d);
        if d < tw {
            let s = alphabet[rng.random_range(0..alphabet.len())];
            values[d.idx()] = s;
            values[tw.idx()] = s;
        }
    }
    Ok(t.clone().with_decorations(1, values)?)
}

/// Two triangular lattice balls of radius `k` glued along their boundary,
/// with i.i.d. 0/1 edge decorations.
pub fn double_grid(k: usize, seed: u64) -> Result<Triangulation, GenerateError> {
    decorate_iid(&glue_double(&triangular_ball(k)?)?, &[0.0, 1.0], seed)
}

fn ring_faces(lower: &[i64; 4], upper: &[i64; 4], faces: &mut Vec<[i64; 3]>) {
    for j in 0..4 {
        let n = (j + 1) % 4;
        faces.push([lower[j], lower[n], upper[n]]);
        faces.push([lower[j], upper[n], upper[j]]);
    }
}

fn ring(i: usize) -> [i64; 4] {
    let b = 1 + 4 * i as i64;
    [b, b + 1, b + 2, b + 3]
}

/// The boundary of a tetrahedron, labels 0 to 3.
pub fn tetrahedron() -> Triangulation {
    TriangulationBuilder::new(vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]])
        .degree_bound(DEFAULT_DEGREE_BOUND)
        .build()
        .expect("tetrahedron is a sphere")
}

/// The substitution stage `beta^n(T0)`: a tetrahedron with i.i.d. 0/1 edge
/// symbols, then `n` rounds of `rule`.
pub fn substitution_sphere(
    rule: &SubstitutionRule,
    n: usize,
    seed: u64,
) -> Result<Triangulation, GenerateError> {
    let mut t = decorate_iid(&tetrahedron(), &[0.0, 1.0], seed)?;
    for _ in 0..n {
        t = substitution_apply(&t, rule)?;
    }
    Ok(t)
}

/// A cylinder of `rings` squares of circumference 4, closed by a cone
/// vertex at each end. Vertex 0 and `4 * rings + 1` are the cone points;
/// ring `i` holds labels `4i + 1 ..= 4i + 4`. Rings strictly between the
/// first and last have degree 6.
pub fn capped_tube(rings: usize) -> Result<Triangulation, GenerateError> {
    if rings < 1 {
        return Err(GenerateError::InvalidParameter("tube needs a ring".into()));
    }
    let top = 4 * rings as i64 + 1;
    let mut faces = Vec::new();
    let first = ring(0);
    let last = ring(rings - 1);
    for j in 0..4 {
        let n = (j + 1) % 4;
        faces.push([0, first[n], first[j]]);
        faces.push([top, last[j], last[n]]);
    }
    for i in 0..rings - 1 {
        ring_faces(&ring(i), &ring(i + 1), &mut faces);
    }
    Ok(TriangulationBuilder::new(faces)
        .degree_bound(DEFAULT_DEGREE_BOUND)
        .build()?)
}

/// Annulus of three rings of four vertices (labels 1..=12). The middle ring
/// has degree 6; the outer rings form the boundary. Marked at `5 -> 6`.
pub fn ring_patch() -> Patch {
    let mut faces = Vec::new();
    ring_faces(&ring(0), &ring(1), &mut faces);
    ring_faces(&ring(1), &ring(2), &mut faces);
    let tri = TriangulationBuilder::new(faces).build().unwrap();
    let marked = tri.dart_by_labels(5, 6).unwrap();
    Patch {
        tri,
        marked,
        omega: Omega::Exact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_ball_counts() {
        for k in 1..=6 {
            let b = triangular_ball(k).unwrap();
            assert_eq!(b.tri.num_vertices(), 3 * k * k + 3 * k + 1);
            assert_eq!(b.tri.num_faces(), 6 * k * k);
            assert_eq!(b.tri.boundary_cycles()[0].len(), 6 * k);
            assert_eq!(b.tri.euler_characteristic(), 1);
        }
        assert_eq!(triangular_ball(1).unwrap().tri.num_faces(), 6);
    }

    #[test]
    fn hexagonal_bipyramid() {
        let s = glue_double(&triangular_ball(1).unwrap()).unwrap();
        assert_eq!(s.num_vertices(), 8);
        assert_eq!(s.euler_characteristic(), 2);
        let mut degs: Vec<usize> = s.vertices().map(|v| s.degree(v)).collect();
        degs.sort_unstable();
        assert_eq!(degs, [4, 4, 4, 4, 4, 4, 6, 6]);
        assert!(s.validate().is_valid());
    }

    #[test]
    fn iid_decorations() {
        let s = glue_double(&triangular_ball(3).unwrap()).unwrap();
        let zero = decorate_iid(&s, &[0.0], 9).unwrap();
        assert!(zero.decorations().is_zero());
        let a = decorate_iid(&s, &[0.0, 1.0], 9).unwrap();
        let b = decorate_iid(&s, &[0.0, 1.0], 9).unwrap();
        assert_eq!(a.decorations(), b.decorations());
        for d in a.darts() {
            assert_eq!(a.decoration(d), a.decoration(a.twin(d)));
        }
        assert_eq!(decorate_iid(&s, &[], 1).unwrap_err(), GenerateError::EmptyAlphabet);
    }

    #[test]
    fn iid_frequency_within_three_sigma() {
        let s = glue_double(&triangular_ball(40).unwrap()).unwrap();
        let a = decorate_iid(&s, &[0.0, 1.0], 2024).unwrap();
        let n = a.num_edges() as f64;
        assert!(n >= 1e4);
        let ones = a
            .darts()
            .filter(|&d| d < a.twin(d) && a.decoration(d)[0] == 1.0)
            .count() as f64;
        assert!((ones / n - 0.5).abs() <= 3.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn tube_shape() {
        let t = capped_tube(5).unwrap();
        assert_eq!(t.num_vertices(), 22);
        assert!(t.validate().is_valid());
        for j in 1..4 {
            let v = t.vertex_by_label(ring(j)[0]).unwrap();
            assert_eq!(t.degree(v), 6);
        }
        let p = ring_patch();
        assert_eq!(p.tri.num_vertices(), 12);
        assert_eq!(p.tri.euler_characteristic(), 0);
        assert_eq!(p.interior(1).len(), 4);
    }

    #[test]
    fn glue_rejects_annulus() {
        assert!(matches!(glue_double(&ring_patch()), Err(GenerateError::NotDisk(_))));
    }
}
