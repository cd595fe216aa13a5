//! Decorated triangulations stored as oriented combinatorial maps.
//!
//! Every undirected edge carries two darts, one per direction. Darts
//! `3f, 3f+1, 3f+2` walk face `f` counterclockwise; darts past `3F` are
//! boundary darts, which lie in no face. The vertex rotation is recovered
//! from faces: the counterclockwise successor of `u -> v` inside face
//! `(u, v, w)` is `u -> w`.

mod build;
mod region;
mod validate;

use std::collections::{BTreeSet, HashMap, VecDeque};

pub use build::{build_triangulation, BuildError, DecorationMap, TriangulationBuilder};
pub use region::{ball, interior};
pub use validate::{ValidationReport, Violation};

/// Degree bound used when a caller does not choose one.
pub const DEFAULT_DEGREE_BOUND: usize = 12;

/// A directed edge (discrete tangent vector).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Dart(pub u32);

/// A vertex, densely indexed from zero.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Vertex(pub u32);

impl Dart {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl Vertex {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("unknown vertex {0}")]
    UnknownVertex(i64),
    #[error("unknown dart {0}")]
    UnknownDart(String),
}

/// Fixed-dimension real decoration vectors with the Chebyshev metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Decorations {
    dim: usize,
    values: Vec<f64>,
}

impl Decorations {
    pub fn zeros(dim: usize, darts: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; dim * darts],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, d: Dart) -> &[f64] {
        &self.values[d.idx() * self.dim..(d.idx() + 1) * self.dim]
    }

    fn set(&mut self, d: Dart, v: &[f64]) {
        let dim = self.dim;
        self.values[d.idx() * dim..(d.idx() + 1) * dim].copy_from_slice(v);
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }
}

/// Chebyshev distance between two decoration vectors.
///
/// Vectors of different length are infinitely far apart.
pub fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    faces: Vec<[Vertex; 3]>,
    tail: Vec<Vertex>,
    twin: Vec<Dart>,
    rot_offsets: Vec<u32>,
    rot_darts: Vec<Dart>,
    dart_index: HashMap<(u32, u32), Dart>,
    labels: Vec<i64>,
    decorations: Decorations,
    degree_bound: usize,
}

impl Triangulation {
    /// Two vertices joined by one edge and no faces. This is the smallest
    /// patch that still carries a marked dart.
    pub fn single_edge(tail: i64, head: i64, dim: usize, degree_bound: usize) -> Self {
        assert_ne!(tail, head, "a single edge needs two distinct endpoints");
        let (a, b) = if tail < head { (0, 1) } else { (1, 0) };
        let mut labels = vec![tail, head];
        labels.sort_unstable();
        let mut dart_index = HashMap::new();
        dart_index.insert((a, b), Dart(0));
        dart_index.insert((b, a), Dart(1));
        Self {
            faces: Vec::new(),
            tail: vec![Vertex(a), Vertex(b)],
            twin: vec![Dart(1), Dart(0)],
            rot_offsets: vec![0, 1, 2],
            rot_darts: if a == 0 {
                vec![Dart(0), Dart(1)]
            } else {
                vec![Dart(1), Dart(0)]
            },
            dart_index,
            labels,
            decorations: Decorations::zeros(dim.max(1), 2),
            degree_bound,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_darts(&self) -> usize {
        self.tail.len()
    }

    pub fn num_edges(&self) -> usize {
        self.tail.len() / 2
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = Vertex> + Clone {
        (0..self.labels.len() as u32).map(Vertex)
    }

    pub fn darts(&self) -> impl ExactSizeIterator<Item = Dart> + Clone {
        (0..self.tail.len() as u32).map(Dart)
    }

    /// Oriented vertex triples, one per face.
    pub fn faces(&self) -> &[[Vertex; 3]] {
        &self.faces
    }

    pub fn label(&self, v: Vertex) -> i64 {
        self.labels[v.idx()]
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn vertex_by_label(&self, label: i64) -> Option<Vertex> {
        self.labels
            .binary_search(&label)
            .ok()
            .map(|i| Vertex(i as u32))
    }

    #[inline]
    pub fn tail(&self, d: Dart) -> Vertex {
        self.tail[d.idx()]
    }

    #[inline]
    pub fn head(&self, d: Dart) -> Vertex {
        self.tail[self.twin[d.idx()].idx()]
    }

    #[inline]
    pub fn twin(&self, d: Dart) -> Dart {
        self.twin[d.idx()]
    }

    /// Face containing `d`, or `None` for a boundary dart.
    #[inline]
    pub fn face(&self, d: Dart) -> Option<usize> {
        let f = d.idx() / 3;
        (f < self.faces.len()).then_some(f)
    }

    #[inline]
    pub fn is_boundary_dart(&self, d: Dart) -> bool {
        self.face(d).is_none()
    }

    /// Next dart around the face of `d`.
    #[inline]
    pub fn face_next(&self, d: Dart) -> Option<Dart> {
        self.face(d).map(|f| Dart((3 * f + (d.idx() % 3 + 1) % 3) as u32))
    }

    #[inline]
    pub fn face_prev(&self, d: Dart) -> Option<Dart> {
        self.face(d).map(|f| Dart((3 * f + (d.idx() % 3 + 2) % 3) as u32))
    }

    /// Counterclockwise successor of `d` around its tail.
    #[inline]
    pub fn rot_ccw(&self, d: Dart) -> Option<Dart> {
        self.face_prev(d).map(|p| self.twin(p))
    }

    /// Clockwise successor of `d` around its tail.
    #[inline]
    pub fn rot_cw(&self, d: Dart) -> Option<Dart> {
        self.face_next(self.twin(d))
    }

    /// Darts leaving `v`, in counterclockwise order. A boundary vertex lists
    /// its fan from the dart after the boundary gap up to the boundary dart.
    pub fn out_darts(&self, v: Vertex) -> &[Dart] {
        let lo = self.rot_offsets[v.idx()] as usize;
        let hi = self.rot_offsets[v.idx() + 1] as usize;
        &self.rot_darts[lo..hi]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.out_darts(v).len()
    }

    pub fn max_degree(&self) -> usize {
        self.vertices().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Neighbours of `v` in rotation order.
    pub fn adjacent(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.out_darts(v).iter().map(move |&d| self.head(d))
    }

    /// The neighbour set `N(v)`, addressed by vertex label.
    pub fn neighbors(&self, label: i64) -> Result<BTreeSet<i64>, ComplexError> {
        let v = self
            .vertex_by_label(label)
            .ok_or(ComplexError::UnknownVertex(label))?;
        Ok(self.adjacent(v).map(|u| self.label(u)).collect())
    }

    pub fn dart_between(&self, u: Vertex, v: Vertex) -> Option<Dart> {
        self.dart_index.get(&(u.0, v.0)).copied()
    }

    pub fn are_adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.dart_index.contains_key(&(u.0, v.0))
    }

    /// Dart addressed by its `"u->v"` label pair.
    pub fn dart_by_labels(&self, tail: i64, head: i64) -> Option<Dart> {
        let u = self.vertex_by_label(tail)?;
        let v = self.vertex_by_label(head)?;
        self.dart_between(u, v)
    }

    pub fn dart_name(&self, d: Dart) -> String {
        format!("{}->{}", self.label(self.tail(d)), self.label(self.head(d)))
    }

    pub fn is_boundary_vertex(&self, v: Vertex) -> bool {
        self.out_darts(v)
            .iter()
            .any(|&d| self.is_boundary_dart(d) || self.is_boundary_dart(self.twin(d)))
    }

    pub fn num_boundary_darts(&self) -> usize {
        self.tail.len() - 3 * self.faces.len()
    }

    pub fn is_closed(&self) -> bool {
        self.num_boundary_darts() == 0
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn decorations(&self) -> &Decorations {
        &self.decorations
    }

    pub fn decoration(&self, d: Dart) -> &[f64] {
        self.decorations.get(d)
    }

    pub fn decoration_dim(&self) -> usize {
        self.decorations.dim
    }

    /// Replace every dart decoration. `values` holds `dim` entries per dart,
    /// in dart order.
    pub fn with_decorations(mut self, dim: usize, values: Vec<f64>) -> Result<Self, BuildError> {
        self.replace_decorations(dim, values)?;
        Ok(self)
    }

    pub(crate) fn replace_decorations(
        &mut self,
        dim: usize,
        values: Vec<f64>,
    ) -> Result<(), BuildError> {
        if dim == 0 || values.len() != dim * self.num_darts() {
            return Err(BuildError::DecorationDimension {
                expected: dim,
                found: values.len() / self.num_darts().max(1),
            });
        }
        if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
            return Err(BuildError::InvalidDecoration(
                self.dart_name(Dart((pos / dim) as u32)),
            ));
        }
        self.decorations = Decorations {
            dim,
            values: values
                .into_iter()
                .map(|x| if x == 0.0 { 0.0 } else { x })
                .collect(),
        };
        Ok(())
    }

    /// Set one dart decoration in place.
    pub fn set_decoration(&mut self, d: Dart, value: &[f64]) -> Result<(), BuildError> {
        if value.len() != self.decorations.dim {
            return Err(BuildError::DecorationDimension {
                expected: self.decorations.dim,
                found: value.len(),
            });
        }
        if value.iter().any(|x| !x.is_finite()) {
            return Err(BuildError::InvalidDecoration(self.dart_name(d)));
        }
        self.decorations.set(d, value);
        Ok(())
    }

    /// Graph distances from `source`, stopping at `limit`. Unreached
    /// vertices get `u32::MAX`.
    pub fn distances(&self, source: Vertex, limit: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.num_vertices()];
        dist[source.idx()] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.idx()];
            if du as usize >= limit {
                continue;
            }
            for w in self.adjacent(u) {
                if dist[w.idx()] == u32::MAX {
                    dist[w.idx()] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Sparse BFS: vertices within `radius` of `source` with their distance,
    /// in discovery order. Cost is proportional to the ball, not to `self`.
    pub fn ball_vertices(&self, source: Vertex, radius: usize) -> Vec<(Vertex, u32)> {
        let mut seen = HashMap::new();
        seen.insert(source, 0u32);
        let mut order = vec![(source, 0u32)];
        let mut head = 0;
        while head < order.len() {
            let (u, du) = order[head];
            head += 1;
            if du as usize >= radius {
                continue;
            }
            for w in self.adjacent(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(w) {
                    e.insert(du + 1);
                    order.push((w, du + 1));
                }
            }
        }
        order
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices() == 0
            || self
                .distances(Vertex(0), usize::MAX)
                .iter()
                .all(|&d| d != u32::MAX)
    }

    /// Boundary darts in cyclic order, each followed by the next one along
    /// the same boundary component. Returns one cycle per component.
    pub fn boundary_cycles(&self) -> Vec<Vec<Dart>> {
        let first_boundary = 3 * self.faces.len();
        let mut seen = vec![false; self.num_darts()];
        let mut cycles = Vec::new();
        for start in first_boundary..self.num_darts() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut d = Dart(start as u32);
            while !seen[d.idx()] {
                seen[d.idx()] = true;
                cycle.push(d);
                d = self.next_boundary_dart(d);
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// The boundary dart leaving `head(d)` that continues the boundary walk.
    fn next_boundary_dart(&self, d: Dart) -> Dart {
        // rotate clockwise around head(d) from twin(d) until reaching a
        // boundary dart
        let mut e = self.twin(d);
        loop {
            if self.is_boundary_dart(e) && e != self.twin(d) {
                return e;
            }
            match self.rot_ccw(e) {
                Some(n) => e = n,
                None => return e,
            }
        }
    }

    /// Boundary vertices of each boundary component in counterclockwise
    /// order (interior on the left).
    pub fn boundary_cycle_vertices(&self) -> Vec<Vec<Vertex>> {
        self.boundary_cycles()
            .into_iter()
            .map(|cyc| {
                // boundary darts run clockwise; their twins run counterclockwise
                let mut vs: Vec<Vertex> = cyc.iter().map(|&d| self.tail(d)).collect();
                vs.reverse();
                vs
            })
            .collect()
    }
}
