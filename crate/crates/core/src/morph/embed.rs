use std::collections::HashMap;

use super::{Patch, Pointed};
use crate::complex::{Dart, Triangulation, Vertex};

/// A simplicial embedding of a patch into a pointed triangulation, sending
/// the marked dart to the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    /// Host dart for each patch dart.
    pub darts: Vec<Dart>,
    /// Host vertex for each patch vertex.
    pub vertices: Vec<Vertex>,
    /// Whether the embedding reverses orientation.
    pub mirrored: bool,
}

impl Embedding {
    pub fn dart(&self, d: Dart) -> Dart {
        self.darts[d.idx()]
    }

    pub fn vertex(&self, v: Vertex) -> Vertex {
        self.vertices[v.idx()]
    }
}

#[derive(Clone)]
struct State {
    darts: Vec<Option<Dart>>,
    host_darts: HashMap<Dart, Dart>,
    vertices: Vec<Option<Vertex>>,
    host_vertices: HashMap<Vertex, Vertex>,
    mapped: usize,
}

struct Search<'a> {
    patch: &'a Patch,
    host: &'a Triangulation,
    mirrored: bool,
}

impl Search<'_> {
    fn assign(&self, s: &mut State, a: Dart, h: Dart, stack: &mut Vec<Dart>) -> bool {
        if let Some(prev) = s.darts[a.idx()] {
            return prev == h;
        }
        if s.host_darts.contains_key(&h) || !self.patch.permits(a, self.host.decoration(h)) {
            return false;
        }
        let (pv, hv) = (self.patch.tri.tail(a), self.host.tail(h));
        match s.vertices[pv.idx()] {
            Some(v) if v != hv => return false,
            Some(_) => {}
            None => {
                if s.host_vertices.contains_key(&hv) {
                    return false;
                }
                s.vertices[pv.idx()] = Some(hv);
                s.host_vertices.insert(hv, pv);
            }
        }
        s.darts[a.idx()] = Some(h);
        s.host_darts.insert(h, a);
        s.mapped += 1;
        stack.push(a);
        true
    }

    fn propagate(&self, s: &mut State, mut stack: Vec<Dart>) -> bool {
        let (p, t) = (&self.patch.tri, self.host);
        while let Some(a) = stack.pop() {
            let h = s.darts[a.idx()].unwrap();
            if !self.assign(s, p.twin(a), t.twin(h), &mut stack) {
                return false;
            }
            let (ccw, cw) = if self.mirrored {
                (t.rot_cw(h), t.rot_ccw(h))
            } else {
                (t.rot_ccw(h), t.rot_cw(h))
            };
            for (pa, ha) in [(p.rot_ccw(a), ccw), (p.rot_cw(a), cw)] {
                if let Some(pa) = pa {
                    match ha {
                        Some(ha) if self.assign(s, pa, ha, &mut stack) => {}
                        _ => return false,
                    }
                }
            }
        }
        true
    }

    fn extend(&self, s: State) -> Option<State> {
        if s.mapped == s.darts.len() {
            return Some(s);
        }
        // an unmapped dart leaving a mapped vertex; its image is a free choice
        let p = &self.patch.tri;
        let a = p
            .darts()
            .find(|&a| s.darts[a.idx()].is_none() && s.vertices[p.tail(a).idx()].is_some())?;
        let hv = s.vertices[p.tail(a).idx()].unwrap();
        for &h in self.host.out_darts(hv) {
            if s.host_darts.contains_key(&h) {
                continue;
            }
            let mut next = s.clone();
            let mut stack = Vec::new();
            if self.assign(&mut next, a, h, &mut stack) && self.propagate(&mut next, stack) {
                if let Some(done) = self.extend(next) {
                    return Some(done);
                }
            }
        }
        None
    }

    fn run(&self, root: Dart) -> Option<Embedding> {
        let p = &self.patch.tri;
        let mut s = State {
            darts: vec![None; p.num_darts()],
            host_darts: HashMap::new(),
            vertices: vec![None; p.num_vertices()],
            host_vertices: HashMap::new(),
            mapped: 0,
        };
        let mut stack = Vec::new();
        if !self.assign(&mut s, self.patch.marked, root, &mut stack) || !self.propagate(&mut s, stack)
        {
            return None;
        }
        let s = self.extend(s)?;
        Some(Embedding {
            darts: s.darts.into_iter().map(Option::unwrap).collect(),
            vertices: s.vertices.into_iter().map(Option::unwrap).collect(),
            mirrored: self.mirrored,
        })
    }
}

/// Find an embedding of `a` into `p` with the marked dart on the root and
/// every image decoration allowed by the patch constraint. Orientation
/// preserving embeddings are tried first.
pub fn embed(a: &Patch, p: Pointed<'_>) -> Option<Embedding> {
    [false, true].into_iter().find_map(|mirrored| {
        Search {
            patch: a,
            host: p.tri,
            mirrored,
        }
        .run(p.root)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{ball, build_triangulation, Triangulation};
    use crate::morph::Omega;

    fn octahedron() -> Triangulation {
        let faces = [
            [0, 1, 2],
            [0, 2, 3],
            [0, 3, 4],
            [0, 4, 1],
            [5, 2, 1],
            [5, 3, 2],
            [5, 4, 3],
            [5, 1, 4],
        ];
        build_triangulation(&faces, None, 12).unwrap()
    }

    #[test]
    fn ball_embeds_into_its_host() {
        let o = octahedron();
        for d in o.darts() {
            let a = ball(&o, d, 1);
            let e = embed(&a, Pointed::new(&o, d)).unwrap();
            assert_eq!(e.dart(a.marked), d);
            for v in a.tri.vertices() {
                assert_eq!(o.label(e.vertex(v)), a.tri.label(v));
            }
        }
    }

    #[test]
    fn degree_mismatch_blocks_embedding() {
        let o = octahedron();
        let t = build_triangulation(&[[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]], None, 12).unwrap();
        let a = ball(&t, Dart(0), 1);
        assert!(embed(&a, Pointed::new(&o, Dart(0))).is_none());
    }

    #[test]
    fn box_constraint_is_enforced() {
        let o = octahedron();
        let mut a = ball(&o, Dart(0), 1);
        let n = a.tri.num_darts();
        let mut bounds = vec![vec![(-1.0, 1.0)]; n];
        bounds[a.marked.idx()] = vec![(0.0, 0.0)];
        a.omega = Omega::Box(bounds);
        assert!(embed(&a, Pointed::new(&o, Dart(0))).is_some());
        let mut u = o.clone();
        u.set_decoration(Dart(0), &[1.0]).unwrap();
        assert!(embed(&a, Pointed::new(&u, Dart(0))).is_none());
    }

    #[test]
    fn wildcard_dart_embeds_everywhere() {
        let o = octahedron();
        let a = Patch::single_dart(1);
        assert!(o.darts().all(|d| embed(&a, Pointed::new(&o, d)).is_some()));
    }

    #[test]
    fn mirror_image_patch_embeds_reversed() {
        // a fan of three faces with an asymmetric decoration pattern
        let faces = [[0, 1, 2], [0, 2, 3], [0, 3, 4]];
        let mut deco = crate::complex::DecorationMap::new();
        let tri = build_triangulation(&faces, None, 12).unwrap();
        for d in tri.darts() {
            let (u, v) = (tri.label(tri.tail(d)), tri.label(tri.head(d)));
            let x = if (u, v) == (0, 4) { 1.0 } else { 0.0 };
            deco.insert((u, v), vec![x]);
        }
        let tri = build_triangulation(&faces, Some(&deco), 12).unwrap();
        let mirror: Vec<[i64; 3]> = faces.iter().map(|f| [f[0], f[2], f[1]]).collect();
        let host = build_triangulation(&mirror, Some(&deco), 12).unwrap();
        let marked = tri.dart_by_labels(0, 1).unwrap();
        let a = Patch::new(tri, marked, Omega::Exact).unwrap();
        let e = embed(&a, Pointed::new(&host, host.dart_by_labels(0, 1).unwrap())).unwrap();
        assert!(e.mirrored);
    }
}
