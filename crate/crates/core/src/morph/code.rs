use std::collections::HashMap;

use rayon::prelude::*;

use crate::complex::{chebyshev, Dart, Triangulation, Vertex};

/// Opaque, totally ordered fingerprint of a rooted ball.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(pub Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Lowercase hex form, handy as a map key in text formats.
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if !s.len().is_multiple_of(2) {
            return None;
        }
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok())
            .collect::<Option<Vec<u8>>>()
            .map(CanonicalCode)
    }
}

/// Breadth-first numbering of the ball `B_r(x)`.
///
/// The tail of `x` gets index 0 and its head index 1. Each vertex closer
/// than `r` to the centre lists its neighbours in rotation order, starting
/// from the dart back to the vertex that discovered it; unseen neighbours
/// are numbered as they appear. A mirrored traversal turns clockwise.
#[derive(Clone, Debug)]
pub struct Traversal {
    pub radius: usize,
    pub mirrored: bool,
    /// Host vertex for each index.
    pub order: Vec<Vertex>,
    /// Distance from the centre for each index.
    pub depth: Vec<u32>,
    /// Ball faces as index triples, smallest index first, oriented as seen by
    /// the traversal, sorted.
    pub faces: Vec<[u32; 3]>,
    /// Ball darts as `(tail index, head index, host dart)`, sorted.
    pub darts: Vec<(u32, u32, Dart)>,
    index: HashMap<Vertex, u32>,
}

impl Traversal {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn index_of(&self, v: Vertex) -> Option<u32> {
        self.index.get(&v).copied()
    }

    /// Whether the index maps of two traversals describe the same complex.
    pub fn same_shape(&self, other: &Traversal) -> bool {
        self.radius == other.radius
            && self.order.len() == other.order.len()
            && self.faces == other.faces
            && self.darts.len() == other.darts.len()
            && self
                .darts
                .iter()
                .zip(&other.darts)
                .all(|(a, b)| a.0 == b.0 && a.1 == b.1)
    }

    /// Largest Chebyshev deviation between matching darts, or `None` when the
    /// two balls differ combinatorially.
    pub fn deviation(&self, t: &Triangulation, other: &Traversal, u: &Triangulation) -> Option<f64> {
        if !self.same_shape(other) {
            return None;
        }
        if self.radius == 0 {
            return Some(0.0);
        }
        Some(
            self.darts
                .iter()
                .zip(&other.darts)
                .map(|(a, b)| chebyshev(t.decoration(a.2), u.decoration(b.2)))
                .fold(0.0, f64::max),
        )
    }

    /// Same shape and bit-identical decorations.
    pub fn identical(&self, t: &Triangulation, other: &Traversal, u: &Triangulation) -> bool {
        self.same_shape(other)
            && (self.radius == 0
                || self
                    .darts
                    .iter()
                    .zip(&other.darts)
                    .all(|(a, b)| same_bits(t.decoration(a.2), u.decoration(b.2))))
    }
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

pub fn traverse(t: &Triangulation, x: Dart, r: usize, mirrored: bool) -> Traversal {
    let tail = t.tail(x);
    let mut order = vec![tail];
    let mut depth = vec![0u32];
    let mut index = HashMap::new();
    index.insert(tail, 0u32);

    if r == 0 {
        let head = t.head(x);
        order.push(head);
        depth.push(1);
        index.insert(head, 1);
        return Traversal {
            radius: 0,
            mirrored,
            order,
            depth,
            faces: Vec::new(),
            darts: vec![(0, 1, x), (1, 0, t.twin(x))],
            index,
        };
    }

    let mut reference = vec![x];
    let mut next = 0;
    while next < order.len() && (depth[next] as usize) < r {
        let v = order[next];
        let out = t.out_darts(v);
        let k = out.len();
        let start = out.iter().position(|&d| d == reference[next]).unwrap();
        for j in 0..k {
            let d = if mirrored {
                out[(start + k - j) % k]
            } else {
                out[(start + j) % k]
            };
            let w = t.head(d);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(w) {
                e.insert(order.len() as u32);
                order.push(w);
                depth.push(depth[next] + 1);
                reference.push(t.twin(d));
            }
        }
        next += 1;
    }

    let mut faces = Vec::new();
    let mut darts = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        let i = i as u32;
        for &d in t.out_darts(v) {
            let Some(f) = t.face(d) else { continue };
            let a = t.head(d);
            let b = t.head(t.face_next(d).unwrap());
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
                continue;
            };
            if ia < i || ib < i {
                continue;
            }
            faces.push(if mirrored { [i, ib, ia] } else { [i, ia, ib] });
            for e in (3 * f..3 * f + 3).map(|e| Dart(e as u32)) {
                for e in [e, t.twin(e)] {
                    darts.push((index[&t.tail(e)], index[&t.head(e)], e));
                }
            }
        }
    }
    faces.sort_unstable();
    darts.sort_unstable_by_key(|&(i, j, _)| (i, j));
    darts.dedup_by_key(|&mut (i, j, _)| (i, j));

    Traversal {
        radius: r,
        mirrored,
        order,
        depth,
        faces,
        darts,
        index,
    }
}

fn encode(t: &Triangulation, tr: &Traversal, with_decorations: bool) -> CanonicalCode {
    let mut out = Vec::with_capacity(16 + 12 * tr.faces.len() + 16 * tr.darts.len());
    let push = |x: u32, out: &mut Vec<u8>| out.extend_from_slice(&x.to_be_bytes());
    push(tr.radius as u32, &mut out);
    push(tr.order.len() as u32, &mut out);
    push(tr.faces.len() as u32, &mut out);
    for f in &tr.faces {
        for &i in f {
            push(i, &mut out);
        }
    }
    if with_decorations && tr.radius > 0 {
        out.push(1);
        push(t.decoration_dim() as u32, &mut out);
        for &(i, j, d) in &tr.darts {
            push(i, &mut out);
            push(j, &mut out);
            for &x in t.decoration(d) {
                out.extend_from_slice(&x.to_bits().to_be_bytes());
            }
        }
    } else {
        out.push(0);
    }
    CanonicalCode(out)
}

/// Code of `B_r(x)` together with the traversal that produced it. Mirror
/// images get the same code; on a tie the counterclockwise traversal wins.
pub fn canonical_traversal(
    t: &Triangulation,
    x: Dart,
    r: usize,
    with_decorations: bool,
) -> (CanonicalCode, Traversal) {
    let ccw = traverse(t, x, r, false);
    let cw = traverse(t, x, r, true);
    let a = encode(t, &ccw, with_decorations);
    let b = encode(t, &cw, with_decorations);
    if b < a {
        (b, cw)
    } else {
        (a, ccw)
    }
}

pub fn canonical_code(t: &Triangulation, x: Dart, r: usize, with_decorations: bool) -> CanonicalCode {
    canonical_traversal(t, x, r, with_decorations).0
}

/// Smallest code over the darts leaving `v`, with the dart attaining it.
pub fn vertex_code(
    t: &Triangulation,
    v: Vertex,
    r: usize,
    with_decorations: bool,
) -> (CanonicalCode, Dart) {
    t.out_darts(v)
        .iter()
        .map(|&d| (canonical_code(t, d, r, with_decorations), d))
        .min()
        .expect("vertex without darts")
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct AutomorphismCount {
    /// Orientation-preserving automorphisms.
    pub preserving: usize,
    /// All automorphisms, reflections included.
    pub total: usize,
}

/// Count decoration-preserving automorphisms by comparing the full-radius
/// traversal from every dart, in both orientations, with one reference.
pub fn automorphism_count(t: &Triangulation) -> AutomorphismCount {
    let root = Dart(0);
    let reach = t
        .distances(t.tail(root), usize::MAX)
        .into_iter()
        .filter(|&d| d != u32::MAX)
        .max()
        .unwrap_or(0) as usize;
    // one extra ring so that every face is inside the ball
    let r = reach + 1;
    let reference = traverse(t, root, r, false);
    let (preserving, reversing) = t
        .darts()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&d| {
            let p = traverse(t, d, r, false).identical(t, &reference, t) as usize;
            let q = traverse(t, d, r, true).identical(t, &reference, t) as usize;
            (p, q)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    AutomorphismCount {
        preserving,
        total: preserving + reversing,
    }
}
