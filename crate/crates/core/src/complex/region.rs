use std::collections::{HashMap, VecDeque};

use super::{DecorationMap, Triangulation, TriangulationBuilder, Vertex};
use crate::complex::Dart;
use crate::morph::{Omega, Patch};

/// The ball of radius `r` around the tail of `x`, as an exact patch.
///
/// Keeps every vertex within graph distance `r` and every face whose three
/// vertices are inside. Vertex labels are inherited from `t`. For `r = 0`
/// the patch is the marked dart alone with a wildcard constraint, since the
/// head of `x` lies outside the ball.
pub fn ball(t: &Triangulation, x: Dart, r: usize) -> Patch {
    let (tail, head) = (t.tail(x), t.head(x));
    if r == 0 {
        let tri = Triangulation::single_edge(
            t.label(tail),
            t.label(head),
            t.decoration_dim(),
            t.degree_bound(),
        );
        let marked = tri.dart_by_labels(t.label(tail), t.label(head)).unwrap();
        return Patch {
            tri,
            marked,
            omega: Omega::Wildcard,
        };
    }

    let inside: HashMap<Vertex, u32> = t.ball_vertices(tail, r).into_iter().collect();
    let mut faces = Vec::new();
    let mut decorations = DecorationMap::new();
    for &v in inside.keys() {
        for &d in t.out_darts(v) {
            let Some(f) = t.face(d) else { continue };
            let tri = t.faces()[f];
            // record each face once, from its first vertex
            if tri[0] != v || !tri.iter().all(|w| inside.contains_key(w)) {
                continue;
            }
            faces.push(tri.map(|w| t.label(w)));
            for i in 0..3 {
                let e = Dart((3 * f + i) as u32);
                for dd in [e, t.twin(e)] {
                    decorations.insert(
                        (t.label(t.tail(dd)), t.label(t.head(dd))),
                        t.decoration(dd).to_vec(),
                    );
                }
            }
        }
    }
    // deterministic face order keeps dart numbering reproducible
    faces.sort_unstable();
    let tri = TriangulationBuilder::new(faces)
        .decorations(decorations)
        .degree_bound(t.degree_bound())
        .allow_pinched(true)
        .build()
        .expect("a ball of a valid triangulation is a valid patch");
    let marked = tri.dart_by_labels(t.label(tail), t.label(head)).unwrap();
    Patch {
        tri,
        marked,
        omega: Omega::Exact,
    }
}

/// Vertices whose `n`-ball stays inside the patch: every vertex within
/// distance `n - 1` of them is a non-boundary vertex.
pub fn interior(t: &Triangulation, n: usize) -> Vec<Vertex> {
    if n == 0 {
        return t.vertices().collect();
    }
    let mut dist = vec![u32::MAX; t.num_vertices()];
    let mut queue = VecDeque::new();
    for v in t.vertices() {
        if t.is_boundary_vertex(v) {
            dist[v.idx()] = 0;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for w in t.adjacent(u) {
            if dist[w.idx()] == u32::MAX {
                dist[w.idx()] = dist[u.idx()] + 1;
                queue.push_back(w);
            }
        }
    }
    t.vertices()
        .filter(|v| dist[v.idx()] as usize >= n)
        .collect()
}
