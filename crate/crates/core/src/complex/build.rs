use std::collections::{HashMap, VecDeque};

use super::{Dart, Decorations, Triangulation, Vertex, DEFAULT_DEGREE_BOUND};

/// Dart decorations keyed by `(tail label, head label)`.
pub type DecorationMap = HashMap<(i64, i64), Vec<f64>>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("face list is empty")]
    NoFaces,
    #[error("face ({0}, {1}, {2}) repeats a vertex")]
    DegenerateFace(i64, i64, i64),
    #[error("non-manifold at {0}")]
    NonManifold(String),
    #[error("faces cannot be oriented consistently (edge {0}->{1})")]
    OrientationConflict(i64, i64),
    #[error("vertex {vertex} has degree {degree}, above the bound {bound}")]
    DegreeExceeded {
        vertex: i64,
        degree: usize,
        bound: usize,
    },
    #[error("degree bound must exceed 6, got {0}")]
    InvalidDegreeBound(usize),
    #[error("triangulation is disconnected")]
    Disconnected,
    #[error("closed triangulation has Euler characteristic {0}, expected 2")]
    NotSphere(i64),
    #[error("decoration for {0}->{1} names a pair that is not an edge")]
    UnknownDart(i64, i64),
    #[error("dart {0} has no decoration")]
    MissingDecoration(String),
    #[error("decoration has {found} coordinates, expected {expected}")]
    DecorationDimension { expected: usize, found: usize },
    #[error("dart {0} carries a non-finite decoration")]
    InvalidDecoration(String),
}

/// Assemble a triangulation from vertex triples.
///
/// The first face of each connected component keeps its given orientation
/// and the rest are flipped to agree with it.
pub fn build_triangulation(
    faces: &[[i64; 3]],
    decorations: Option<&DecorationMap>,
    degree_bound: usize,
) -> Result<Triangulation, BuildError> {
    let mut b = TriangulationBuilder::new(faces.to_vec()).degree_bound(degree_bound);
    if let Some(map) = decorations {
        b = b.decorations(map.clone());
    }
    b.build()
}

#[derive(Clone, Debug)]
pub struct TriangulationBuilder {
    faces: Vec<[i64; 3]>,
    decorations: Option<DecorationMap>,
    degree_bound: usize,
    allow_pinched: bool,
    allow_any_genus: bool,
}

impl TriangulationBuilder {
    pub fn new(faces: Vec<[i64; 3]>) -> Self {
        Self {
            faces,
            decorations: None,
            degree_bound: DEFAULT_DEGREE_BOUND,
            allow_pinched: false,
            allow_any_genus: false,
        }
    }

    pub fn decorations(mut self, map: DecorationMap) -> Self {
        self.decorations = Some(map);
        self
    }

    pub fn degree_bound(mut self, d: usize) -> Self {
        self.degree_bound = d;
        self
    }

    /// Accept vertices whose link is several disjoint paths. Balls cut out
    /// of a triangulation can look like this at their outer layer.
    pub fn allow_pinched(mut self, yes: bool) -> Self {
        self.allow_pinched = yes;
        self
    }

    /// Skip the genus-0 requirement for closed surfaces.
    pub fn allow_any_genus(mut self, yes: bool) -> Self {
        self.allow_any_genus = yes;
        self
    }

    pub fn build(self) -> Result<Triangulation, BuildError> {
        if self.degree_bound <= 6 {
            return Err(BuildError::InvalidDegreeBound(self.degree_bound));
        }
        if self.faces.is_empty() {
            return Err(BuildError::NoFaces);
        }
        for f in &self.faces {
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(BuildError::DegenerateFace(f[0], f[1], f[2]));
            }
        }

        let mut labels: Vec<i64> = self.faces.iter().flatten().copied().collect();
        labels.sort_unstable();
        labels.dedup();
        let index_of = |l: i64| labels.binary_search(&l).unwrap() as u32;
        let raw: Vec<[u32; 3]> = self
            .faces
            .iter()
            .map(|f| [index_of(f[0]), index_of(f[1]), index_of(f[2])])
            .collect();

        let oriented = orient(&raw, &labels)?;

        let nf = oriented.len();
        let mut tail: Vec<Vertex> = Vec::with_capacity(3 * nf + nf);
        let mut dart_index: HashMap<(u32, u32), Dart> = HashMap::with_capacity(4 * nf);
        for (f, tri) in oriented.iter().enumerate() {
            for i in 0..3 {
                let (u, v) = (tri[i], tri[(i + 1) % 3]);
                let d = Dart((3 * f + i) as u32);
                if dart_index.insert((u, v), d).is_some() {
                    return Err(BuildError::OrientationConflict(
                        labels[u as usize],
                        labels[v as usize],
                    ));
                }
                tail.push(Vertex(u));
            }
        }
        let mut twin = vec![Dart(u32::MAX); 3 * nf];
        for (f, tri) in oriented.iter().enumerate() {
            for i in 0..3 {
                let (u, v) = (tri[i], tri[(i + 1) % 3]);
                let d = 3 * f + i;
                let t = match dart_index.get(&(v, u)) {
                    Some(&t) => t,
                    None => {
                        let t = Dart(tail.len() as u32);
                        tail.push(Vertex(v));
                        twin.push(Dart(d as u32));
                        dart_index.insert((v, u), t);
                        t
                    }
                };
                twin[d] = t;
            }
        }

        let mut t = Triangulation {
            faces: oriented
                .iter()
                .map(|f| [Vertex(f[0]), Vertex(f[1]), Vertex(f[2])])
                .collect(),
            tail,
            twin,
            rot_offsets: Vec::new(),
            rot_darts: Vec::new(),
            dart_index,
            labels,
            decorations: Decorations::zeros(1, 0),
            degree_bound: self.degree_bound,
        };
        t.decorations = Decorations::zeros(1, t.num_darts());
        build_rotations(&mut t, self.allow_pinched)?;

        for v in t.vertices() {
            let deg = t.degree(v);
            if deg > self.degree_bound {
                return Err(BuildError::DegreeExceeded {
                    vertex: t.label(v),
                    degree: deg,
                    bound: self.degree_bound,
                });
            }
        }
        if !t.is_connected() {
            return Err(BuildError::Disconnected);
        }
        if t.is_closed() && !self.allow_any_genus && t.euler_characteristic() != 2 {
            return Err(BuildError::NotSphere(t.euler_characteristic()));
        }

        if let Some(map) = self.decorations {
            apply_decorations(&mut t, map)?;
        }
        Ok(t)
    }
}

fn orient(raw: &[[u32; 3]], labels: &[i64]) -> Result<Vec<[u32; 3]>, BuildError> {
    let name = |v: u32| labels[v as usize];
    let mut edge_faces: HashMap<(u32, u32), Vec<usize>> = HashMap::with_capacity(3 * raw.len());
    let mut seen_faces = HashMap::with_capacity(raw.len());
    for (f, tri) in raw.iter().enumerate() {
        let mut key = *tri;
        key.sort_unstable();
        if seen_faces.insert(key, f).is_some() {
            return Err(BuildError::NonManifold(format!(
                "face ({}, {}, {}) listed twice",
                name(key[0]),
                name(key[1]),
                name(key[2])
            )));
        }
        for i in 0..3 {
            let (u, v) = (tri[i], tri[(i + 1) % 3]);
            let e = (u.min(v), u.max(v));
            let list = edge_faces.entry(e).or_default();
            list.push(f);
            if list.len() > 2 {
                return Err(BuildError::NonManifold(format!(
                    "edge {}-{} lies in more than two faces",
                    name(e.0),
                    name(e.1)
                )));
            }
        }
    }

    let mut oriented: Vec<Option<[u32; 3]>> = vec![None; raw.len()];
    for seed in 0..raw.len() {
        if oriented[seed].is_some() {
            continue;
        }
        oriented[seed] = Some(raw[seed]);
        let mut queue = VecDeque::from([seed]);
        while let Some(f) = queue.pop_front() {
            let tri = oriented[f].unwrap();
            for i in 0..3 {
                let (u, v) = (tri[i], tri[(i + 1) % 3]);
                for &g in &edge_faces[&(u.min(v), u.max(v))] {
                    if g == f {
                        continue;
                    }
                    // g must traverse the shared edge as v -> u
                    let want = with_edge(raw[g], v, u);
                    match oriented[g] {
                        None => {
                            oriented[g] = Some(want);
                            queue.push_back(g);
                        }
                        Some(have) => {
                            if !same_cycle(have, want) {
                                return Err(BuildError::OrientationConflict(name(u), name(v)));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(oriented.into_iter().map(Option::unwrap).collect())
}

/// Orient triangle `tri` so that it contains the directed edge `a -> b`.
fn with_edge(tri: [u32; 3], a: u32, b: u32) -> [u32; 3] {
    let c = tri.iter().copied().find(|&x| x != a && x != b).unwrap();
    [a, b, c]
}

fn same_cycle(x: [u32; 3], y: [u32; 3]) -> bool {
    (0..3).any(|r| x[0] == y[r] && x[1] == y[(r + 1) % 3] && x[2] == y[(r + 2) % 3])
}

fn build_rotations(t: &mut Triangulation, allow_pinched: bool) -> Result<(), BuildError> {
    let n = t.num_vertices();
    let mut by_vertex: Vec<Vec<Dart>> = vec![Vec::new(); n];
    for d in t.darts() {
        by_vertex[t.tail(d).idx()].push(d);
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut order = Vec::with_capacity(t.num_darts());
    offsets.push(0u32);
    let mut visited = vec![false; t.num_darts()];
    for (v, darts) in by_vertex.iter().enumerate() {
        let starts: Vec<Dart> = darts
            .iter()
            .copied()
            .filter(|&d| t.rot_cw(d).is_none())
            .collect();
        let before = order.len();
        if starts.is_empty() {
            let first = darts[0];
            let mut d = first;
            loop {
                visited[d.idx()] = true;
                order.push(d);
                d = t.rot_ccw(d).expect("interior dart without a face");
                if d == first {
                    break;
                }
            }
        } else {
            if starts.len() > 1 && !allow_pinched {
                return Err(BuildError::NonManifold(format!(
                    "link of vertex {} is not a path or a cycle",
                    t.labels[v]
                )));
            }
            for &s in &starts {
                let mut d = s;
                loop {
                    visited[d.idx()] = true;
                    order.push(d);
                    match t.rot_ccw(d) {
                        Some(n) => d = n,
                        None => break,
                    }
                }
            }
        }
        if order.len() - before != darts.len() {
            return Err(BuildError::NonManifold(format!(
                "link of vertex {} is not a path or a cycle",
                t.labels[v]
            )));
        }
        offsets.push(order.len() as u32);
    }
    debug_assert!(visited.iter().all(|&x| x));
    t.rot_offsets = offsets;
    t.rot_darts = order;
    Ok(())
}

fn apply_decorations(t: &mut Triangulation, map: DecorationMap) -> Result<(), BuildError> {
    if map.is_empty() {
        return Ok(());
    }
    let dim = map.values().next().map(Vec::len).unwrap_or(1);
    if dim == 0 {
        return Err(BuildError::DecorationDimension {
            expected: 1,
            found: 0,
        });
    }
    let mut values = vec![f64::NAN; dim * t.num_darts()];
    for ((a, b), v) in map {
        if v.len() != dim {
            return Err(BuildError::DecorationDimension {
                expected: dim,
                found: v.len(),
            });
        }
        let d = t.dart_by_labels(a, b).ok_or(BuildError::UnknownDart(a, b))?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(BuildError::InvalidDecoration(format!("{a}->{b}")));
        }
        values[d.idx() * dim..(d.idx() + 1) * dim].copy_from_slice(&v);
    }
    if let Some(pos) = values.iter().position(|x| x.is_nan()) {
        return Err(BuildError::MissingDecoration(
            t.dart_name(Dart((pos / dim) as u32)),
        ));
    }
    t.replace_decorations(dim, values)
}
