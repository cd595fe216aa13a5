use std::collections::hash_map::Entry;
use std::collections::HashMap;

use super::GenerateError;
use crate::complex::{Dart, DecorationMap, Triangulation, TriangulationBuilder, Vertex};

/// Image of one decorated face class.
#[derive(Clone, Debug)]
pub struct FaceImage {
    /// Decorations of the face darts `a -> b`, `b -> c`, `c -> a`.
    pub key: [Vec<f64>; 3],
    /// A decorated disk.
    pub patch: Triangulation,
    /// Labels of the images of `a`, `b`, `c`, counterclockwise on the
    /// boundary of `patch`.
    pub corners: [i64; 3],
    /// Vertices strictly inside each boundary arc, from corner `i` to `i + 1`.
    arcs: [Vec<i64>; 3],
    interior: Vec<i64>,
}

impl FaceImage {
    pub fn new(key: [Vec<f64>; 3], patch: Triangulation, corners: [i64; 3]) -> Result<Self, GenerateError> {
        let cycles = patch.boundary_cycle_vertices();
        if cycles.len() != 1 || patch.euler_characteristic() != 1 {
            return Err(GenerateError::InvalidRule(format!(
                "image of {} is not a disk",
                class_name(&key)
            )));
        }
        if key.iter().any(|k| k.len() != patch.decoration_dim()) {
            return Err(GenerateError::InvalidRule(format!(
                "key {} does not match the image decoration dimension",
                class_name(&key)
            )));
        }
        let cycle: Vec<i64> = cycles[0].iter().map(|&v| patch.label(v)).collect();
        let pos: Vec<usize> = corners
            .iter()
            .map(|c| cycle.iter().position(|x| x == c))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                GenerateError::InvalidRule(format!(
                    "a corner of {} is not on the boundary",
                    class_name(&key)
                ))
            })?;
        let n = cycle.len();
        let ahead = |from: usize, to: usize| (to + n - from) % n;
        if pos[0] == pos[1]
            || pos[1] == pos[2]
            || pos[0] == pos[2]
            || ahead(pos[0], pos[1]) >= ahead(pos[0], pos[2])
        {
            return Err(GenerateError::InvalidRule(format!(
                "corners of {} are not distinct and counterclockwise",
                class_name(&key)
            )));
        }
        let arcs = [0, 1, 2].map(|i| {
            let (s, e) = (pos[i], pos[(i + 1) % 3]);
            (1..ahead(s, e)).map(|j| cycle[(s + j) % n]).collect()
        });
        let interior = patch
            .vertices()
            .filter(|&v| !patch.is_boundary_vertex(v))
            .map(|v| patch.label(v))
            .collect();
        Ok(Self {
            key,
            patch,
            corners,
            arcs,
            interior,
        })
    }
}

fn class_name(key: &[Vec<f64>; 3]) -> String {
    format!("{key:?}")
}

/// Face substitution: every decorated face class maps to a decorated disk
/// with three marked boundary corners.
#[derive(Clone, Debug)]
pub struct SubstitutionRule {
    pub dim: usize,
    pub images: Vec<FaceImage>,
}

impl SubstitutionRule {
    pub fn new(dim: usize, images: Vec<FaceImage>) -> Result<Self, GenerateError> {
        for (i, img) in images.iter().enumerate() {
            if img.key.iter().any(|k| k.len() != dim) {
                return Err(GenerateError::InvalidRule(format!(
                    "key {} has the wrong dimension",
                    class_name(&img.key)
                )));
            }
            for other in &images[..i] {
                if (0..3).any(|s| rotated_eq(&img.key, &other.key, s)) {
                    return Err(GenerateError::InvalidRule(format!(
                        "face class {} listed twice",
                        class_name(&img.key)
                    )));
                }
            }
        }
        Ok(Self { dim, images })
    }

    /// Image for a face whose darts carry `key`, with the rotation `s` such
    /// that face dart `j` matches image key `j + s`.
    pub fn find(&self, key: [&[f64]; 3]) -> Option<(&FaceImage, usize)> {
        self.images.iter().find_map(|img| {
            (0..3)
                .find(|&s| (0..3).all(|j| key[j] == img.key[(j + s) % 3].as_slice()))
                .map(|s| (img, s))
        })
    }

    /// Every face maps to itself. Degenerate: never creates interior faces.
    pub fn identity(alphabet: &[f64]) -> Self {
        let images = face_classes(alphabet)
            .into_iter()
            .map(|key| {
                let mut deco = DecorationMap::new();
                for (i, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                    deco.insert((a, b), vec![key[i]]);
                    deco.insert((b, a), vec![key[i]]);
                }
                let patch = TriangulationBuilder::new(vec![[0, 1, 2]])
                    .decorations(deco)
                    .build()
                    .unwrap();
                FaceImage::new(key.map(|x| vec![x]), patch, [0, 1, 2]).unwrap()
            })
            .collect();
        Self { dim: 1, images }
    }

    /// Split every face into four through its edge midpoints. Both halves
    /// of an old edge keep its symbol in both directions; the three new
    /// inner edges get `inner`. Assumes edge decorations are symmetric.
    pub fn four_subdivision(alphabet: &[f64], inner: f64) -> Self {
        let images = face_classes(alphabet)
            .into_iter()
            .map(|key| {
                let (a, b, c, ab, bc, ca) = (0, 1, 2, 3, 4, 5);
                let faces = vec![[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]];
                let mut deco = DecorationMap::new();
                let mut both = |u: i64, v: i64, x: f64| {
                    deco.insert((u, v), vec![x]);
                    deco.insert((v, u), vec![x]);
                };
                for (i, (u, m, v)) in [(a, ab, b), (b, bc, c), (c, ca, a)].into_iter().enumerate() {
                    both(u, m, key[i]);
                    both(m, v, key[i]);
                }
                both(ab, bc, inner);
                both(bc, ca, inner);
                both(ca, ab, inner);
                let patch = TriangulationBuilder::new(faces)
                    .decorations(deco)
                    .build()
                    .unwrap();
                FaceImage::new(key.map(|x| vec![x]), patch, [a, b, c]).unwrap()
            })
            .collect();
        Self { dim: 1, images }
    }
}

fn rotated_eq(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3], s: usize) -> bool {
    (0..3).all(|j| a[j] == b[(j + s) % 3])
}

/// One representative per rotation class of symbol triples.
fn face_classes(alphabet: &[f64]) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::new();
    for &x in alphabet {
        for &y in alphabet {
            for &z in alphabet {
                let k = [x, y, z];
                let seen = out
                    .iter()
                    .any(|o| (0..3).any(|s| (0..3).all(|j| k[j] == o[(j + s) % 3])));
                if !seen {
                    out.push(k);
                }
            }
        }
    }
    out
}

/// Replace every face of `t` by its image, gluing neighbouring images along
/// their shared arcs. Labels of `t` survive; new vertices get fresh labels.
pub fn substitution_apply(
    t: &Triangulation,
    rule: &SubstitutionRule,
) -> Result<Triangulation, GenerateError> {
    if t.decoration_dim() != rule.dim {
        return Err(GenerateError::InvalidRule(format!(
            "rule has dimension {}, triangulation {}",
            rule.dim,
            t.decoration_dim()
        )));
    }
    let mut next = t.labels().iter().copied().max().unwrap_or(0) + 1;
    let mut arcs: HashMap<(Vertex, Vertex), Vec<i64>> = HashMap::new();
    let mut faces = Vec::with_capacity(t.num_faces() * 4);
    let mut deco = DecorationMap::new();

    for (f, tri) in t.faces().iter().enumerate() {
        let key = [0, 1, 2].map(|i| t.decoration(Dart((3 * f + i) as u32)));
        let (img, s) = rule.find(key).ok_or_else(|| {
            GenerateError::MissingFaceClass(format!("{:?}", key.map(|k| k.to_vec())))
        })?;
        let corner_vertex = |i: usize| tri[(i + 3 - s) % 3];
        let mut map: HashMap<i64, i64> = HashMap::with_capacity(img.patch.num_vertices());
        for i in 0..3 {
            map.insert(img.corners[i], t.label(corner_vertex(i)));
        }
        for i in 0..3 {
            let (u, v) = (corner_vertex(i), corner_vertex((i + 1) % 3));
            let inner = &img.arcs[i];
            let edge = (u.min(v), u.max(v));
            let labels: Vec<i64> = match arcs.entry(edge) {
                Entry::Occupied(e) => {
                    if e.get().len() != inner.len() {
                        return Err(GenerateError::ArcMismatch(format!(
                            "{}-{}",
                            t.label(u),
                            t.label(v)
                        )));
                    }
                    e.get().clone()
                }
                Entry::Vacant(e) => {
                    let fresh: Vec<i64> = (0..inner.len() as i64).map(|j| next + j).collect();
                    next += inner.len() as i64;
                    e.insert(fresh).clone()
                }
            };
            let ordered: Box<dyn Iterator<Item = &i64>> = if u < v {
                Box::new(labels.iter())
            } else {
                Box::new(labels.iter().rev())
            };
            for (a, &b) in inner.iter().zip(ordered) {
                map.insert(*a, b);
            }
        }
        for &v in &img.interior {
            map.insert(v, next);
            next += 1;
        }
        let p = &img.patch;
        for face in p.faces() {
            faces.push(face.map(|v| map[&p.label(v)]));
        }
        for d in p.darts() {
            let k = (map[&p.label(p.tail(d))], map[&p.label(p.head(d))]);
            match deco.entry(k) {
                Entry::Occupied(e) => {
                    if e.get().as_slice() != p.decoration(d) {
                        return Err(GenerateError::ArcMismatch(format!("{}->{}", k.0, k.1)));
                    }
                }
                Entry::Vacant(e) => {
                    e.insert(p.decoration(d).to_vec());
                }
            }
        }
    }
    Ok(TriangulationBuilder::new(faces)
        .decorations(deco)
        .degree_bound(t.degree_bound())
        .build()?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleReport {
    pub nondegenerate: bool,
    /// Smallest `k` that works for every face class.
    pub k: Option<usize>,
    /// Face classes with no interior face after six rounds.
    pub failing: Vec<String>,
}

const MAX_ROUNDS: usize = 6;

/// The single decorated face of class `key`, outer darts equal to inner.
fn lone_face(key: &[Vec<f64>; 3]) -> Result<Triangulation, GenerateError> {
    let mut deco = DecorationMap::new();
    for (i, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
        deco.insert((a, b), key[i].clone());
        deco.insert((b, a), key[i].clone());
    }
    Ok(TriangulationBuilder::new(vec![[0, 1, 2]])
        .decorations(deco)
        .build()?)
}

/// Whether some face of `t` avoids the boundary entirely.
pub(crate) fn has_interior_face(t: &Triangulation) -> bool {
    t.faces()
        .iter()
        .any(|f| f.iter().all(|&v| !t.is_boundary_vertex(v)))
}

/// Look for the smallest `k <= 6` such that `beta^k(F)` has an interior face
/// for every face class `F` of the rule.
pub fn substitution_validate(rule: &SubstitutionRule) -> RuleReport {
    let mut worst = 0;
    let mut failing = Vec::new();
    for img in &rule.images {
        let mut found = None;
        if let Ok(mut cur) = lone_face(&img.key) {
            for k in 1..=MAX_ROUNDS {
                match substitution_apply(&cur, rule) {
                    Ok(next) => cur = next,
                    Err(_) => break,
                }
                if has_interior_face(&cur) {
                    found = Some(k);
                    break;
                }
            }
        }
        match found {
            Some(k) => worst = worst.max(k),
            None => failing.push(class_name(&img.key)),
        }
    }
    RuleReport {
        nondegenerate: failing.is_empty(),
        k: failing.is_empty().then_some(worst),
        failing,
    }
}
