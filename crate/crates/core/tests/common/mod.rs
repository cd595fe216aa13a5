//! Independent reference implementations and shared fixtures for the
//! integration tests. Nothing here calls the library's eigen, traversal or
//! operator code; it only reads faces, labels and decorations.

#![allow(dead_code)]

use std::collections::{hash_map::Entry, HashMap, HashSet, VecDeque};

use num_complex::Complex64;
use trispec::complex::{build_triangulation, DecorationMap, Dart, Triangulation, TriangulationBuilder, Vertex};
use trispec::generate::{
    capped_tube, double_grid, hyperbolic_sphere, substitution_sphere, tetrahedron, SubstitutionRule,
};

pub fn octahedron() -> Triangulation {
    build_triangulation(
        &[
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ],
        None,
        12,
    )
    .unwrap()
}

/// Closed fixtures with at most 30 vertices, some decorated.
pub fn small_spheres() -> Vec<(String, Triangulation)> {
    let four = SubstitutionRule::four_subdivision(&[0.0, 1.0], 0.0);
    let mut out = vec![
        ("tetrahedron".to_string(), tetrahedron()),
        ("octahedron".into(), octahedron()),
        ("theta1".into(), hyperbolic_sphere(1).unwrap()),
        ("tube2".into(), capped_tube(2).unwrap()),
        ("tube5".into(), capped_tube(5).unwrap()),
        ("beta1".into(), substitution_sphere(&four, 1, 3).unwrap()),
        ("grid2".into(), double_grid(2, 5).unwrap()),
    ];
    for seed in 0..3 {
        out.push((format!("grid1-{seed}"), double_grid(1, seed).unwrap()));
    }
    assert!(out.iter().all(|(_, t)| t.num_vertices() <= 30));
    out
}

/// Up to `per` darts of `t`, spread evenly.
pub fn spread_darts(t: &Triangulation, per: usize) -> Vec<Dart> {
    let n = t.num_darts();
    let step = n.div_ceil(per).max(1);
    (0..n).step_by(step).map(|i| Dart(i as u32)).collect()
}

// ---------------------------------------------------------------------------
// Hermitian eigenvalues by cyclic Jacobi on the real embedding.

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn jacobi_symmetric(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a Hermitian matrix `X + iY` from `[[X, -Y], [Y, X]]`,
/// whose spectrum is that of the original with every value doubled.
pub fn jacobi_hermitian(m: &[Vec<Complex64>]) -> Vec<f64> {
    let n = m.len();
    let mut big = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = m[i][j];
            big[i][j] = z.re;
            big[i + n][j + n] = z.re;
            big[i][j + n] = -z.im;
            big[i + n][j] = z.im;
        }
    }
    jacobi_symmetric(big).into_iter().step_by(2).collect()
}

/// Undirected edges `(u, v)` with `u < v`, read off the face list.
pub fn edges_from_faces(t: &Triangulation) -> Vec<(Vertex, Vertex)> {
    let mut set = HashSet::new();
    for f in t.faces() {
        for i in 0..3 {
            let (a, b) = (f[i], f[(i + 1) % 3]);
            set.insert((a.min(b), a.max(b)));
        }
    }
    let mut v: Vec<_> = set.into_iter().collect();
    v.sort();
    v
}

fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The same triangulation with label `l` replaced by `perm[l]`.
pub fn relabel(t: &Triangulation, perm: &HashMap<i64, i64>) -> Triangulation {
    let faces: Vec<[i64; 3]> = t.faces().iter().map(|f| f.map(|v| perm[&t.label(v)])).collect();
    let mut deco = DecorationMap::new();
    for d in t.darts() {
        deco.insert(
            (perm[&t.label(t.tail(d))], perm[&t.label(t.head(d))]),
            t.decoration(d).to_vec(),
        );
    }
    TriangulationBuilder::new(faces)
        .decorations(deco)
        .degree_bound(t.degree_bound())
        .build()
        .unwrap()
}

fn dec(t: &Triangulation, u: Vertex, v: Vertex) -> &[f64] {
    t.decoration(t.dart_by_labels(t.label(u), t.label(v)).unwrap())
}

/// `W^{1/2} H W^{-1/2}` of the magnetic operator with weights read from
/// decoration slots `w, w̄, V, α = 0, 1, 2, 3`, or of the natural Laplacian
/// when `decorated` is false.
pub fn reference_symmetrized(t: &Triangulation, magnetic: bool, decorated: bool) -> Vec<Vec<Complex64>> {
    let n = t.num_vertices();
    let mut deg = vec![0usize; n];
    let edges = edges_from_faces(t);
    for &(u, v) in &edges {
        deg[u.idx()] += 1;
        deg[v.idx()] += 1;
    }
    let mut nbr = vec![None; n];
    for &(u, v) in &edges {
        nbr[u.idx()].get_or_insert(v);
        nbr[v.idx()].get_or_insert(u);
    }
    let slot = |x: Vertex, i: usize| dec(t, x, nbr[x.idx()].unwrap())[i];
    let w = |x: Vertex| if decorated { slot(x, 0) } else { deg[x.idx()] as f64 };
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut diag = vec![0.0; n];
    for &(u, v) in &edges {
        for (x, y) in [(u, v), (v, u)] {
            let (wbar, alpha) = if decorated {
                let d = dec(t, x, y);
                (d[1], d[3])
            } else {
                (1.0, 0.0)
            };
            let phase = if magnetic { alpha } else { 0.0 };
            m[x.idx()][y.idx()] = Complex64::from_polar(wbar / (w(x) * w(y)).sqrt(), phase);
            diag[x.idx()] -= wbar / w(x);
        }
    }
    for x in t.vertices() {
        m[x.idx()][x.idx()] = if magnetic {
            let v = if decorated { slot(x, 2) } else { 0.0 };
            Complex64::new(v - 1.0, 0.0)
        } else {
            Complex64::new(diag[x.idx()], 0.0)
        };
    }
    m
}

/// Decorate `t` with a valid random magnetic schema: `w` per tail, `w̄`
/// symmetric, `V` per tail, `α` antisymmetric.
pub fn random_magnetic(t: &Triangulation, seed: u64) -> Triangulation {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let wv: Vec<f64> = t.vertices().map(|_| rng.random_range(0.5..3.0)).collect();
    let pv: Vec<f64> = t.vertices().map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut vals = vec![0.0; 4 * t.num_darts()];
    for d in t.darts() {
        let tw = t.twin(d);
        if d < tw {
            let wbar = rng.random_range(0.2..2.0);
            let alpha = rng.random_range(-3.0..3.0);
            for (e, a) in [(d, alpha), (tw, -alpha)] {
                let x = t.tail(e).idx();
                vals[4 * e.idx()..4 * e.idx() + 4].copy_from_slice(&[wv[x], wbar, pv[x], a]);
            }
        }
    }
    t.clone().with_decorations(4, vals).unwrap()
}

// ---------------------------------------------------------------------------
// Brute-force ball isomorphism.

struct Ball {
    order: Vec<Vertex>,
    depth: HashMap<Vertex, u32>,
    faces: Vec<[Vertex; 3]>,
}

fn adjacency(t: &Triangulation) -> Vec<Vec<Vertex>> {
    let mut adj = vec![Vec::new(); t.num_vertices()];
    for (u, v) in edges_from_faces(t) {
        adj[u.idx()].push(v);
        adj[v.idx()].push(u);
    }
    adj
}

fn metric_ball(t: &Triangulation, adj: &[Vec<Vertex>], centre: Vertex, r: u32) -> Ball {
    let mut depth = HashMap::from([(centre, 0u32)]);
    let mut order = vec![centre];
    let mut queue = VecDeque::from([centre]);
    while let Some(v) = queue.pop_front() {
        let dv = depth[&v];
        if dv == r {
            continue;
        }
        for &w in &adj[v.idx()] {
            if let Entry::Vacant(e) = depth.entry(w) {
                e.insert(dv + 1);
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    let faces = t
        .faces()
        .iter()
        .filter(|f| f.iter().all(|v| depth.contains_key(v)))
        .copied()
        .collect();
    Ball { order, depth, faces }
}

fn cyclic_key(f: [Vertex; 3]) -> [Vertex; 3] {
    let i = (0..3).min_by_key(|&i| f[i]).unwrap();
    [f[i], f[(i + 1) % 3], f[(i + 2) % 3]]
}

struct Matcher<'a> {
    bp: &'a Ball,
    bq: &'a Ball,
    qfaces: HashSet<[Vertex; 3]>,
    faces_of: HashMap<Vertex, Vec<[Vertex; 3]>>,
    reversed: bool,
    found: Vec<HashMap<Vertex, Vertex>>,
}

impl Matcher<'_> {
    fn face_ok(&self, map: &HashMap<Vertex, Vertex>, f: &[Vertex; 3]) -> bool {
        match (map.get(&f[0]), map.get(&f[1]), map.get(&f[2])) {
            (Some(&a), Some(&b), Some(&c)) => {
                let img = if self.reversed { [c, b, a] } else { [a, b, c] };
                self.qfaces.contains(&cyclic_key(img))
            }
            _ => true,
        }
    }

    fn consistent(&self, map: &HashMap<Vertex, Vertex>, v: Vertex) -> bool {
        self.bq.depth.get(&map[&v]) == Some(&self.bp.depth[&v])
            && self.faces_of.get(&v).is_none_or(|fs| fs.iter().all(|f| self.face_ok(map, f)))
    }

    fn face_count(b: &Ball, v: Vertex) -> usize {
        b.faces.iter().filter(|f| f.contains(&v)).count()
    }

    fn go(&mut self, rest: &[Vertex], map: &mut HashMap<Vertex, Vertex>, used: &mut HashSet<Vertex>) {
        let Some((&v, tail)) = rest.split_first() else {
            self.found.push(map.clone());
            return;
        };
        let want = Self::face_count(self.bp, v);
        for c in self.bq.order.clone() {
            if used.contains(&c) || Self::face_count(self.bq, c) != want {
                continue;
            }
            map.insert(v, c);
            used.insert(c);
            if self.consistent(map, v) {
                self.go(tail, map, used);
            }
            used.remove(&c);
            map.remove(&v);
        }
    }
}

/// Every root-preserving isomorphism `B_r(p) → B_r(q)` of induced
/// complexes (orientation kept or reversed throughout), by backtracking.
/// Returns the least decoration distortion, or `None` if there is none.
pub fn brute_ball_match(p: &Triangulation, pr: Dart, q: &Triangulation, qr: Dart, r: u32) -> Option<f64> {
    let (ap, aq) = (adjacency(p), adjacency(q));
    let bp = metric_ball(p, &ap, p.tail(pr), r);
    let bq = metric_ball(q, &aq, q.tail(qr), r);
    if bp.order.len() != bq.order.len() || bp.faces.len() != bq.faces.len() {
        return None;
    }
    let mut faces_of: HashMap<Vertex, Vec<[Vertex; 3]>> = HashMap::new();
    for f in &bp.faces {
        for v in f {
            faces_of.entry(*v).or_default().push(*f);
        }
    }
    let mut m = Matcher {
        bp: &bp,
        bq: &bq,
        qfaces: bq.faces.iter().map(|&f| cyclic_key(f)).collect(),
        faces_of,
        reversed: false,
        found: Vec::new(),
    };
    for reversed in [false, true] {
        m.reversed = reversed;
        let mut map = HashMap::from([(p.tail(pr), q.tail(qr)), (p.head(pr), q.head(qr))]);
        if !map.keys().all(|&v| m.consistent(&map, v)) {
            continue;
        }
        let mut used: HashSet<Vertex> = map.values().copied().collect();
        let mut rest: Vec<Vertex> = bp.order.iter().copied().filter(|v| !map.contains_key(v)).collect();
        rest.sort_by_key(|v| bp.depth[v]);
        m.go(&rest, &mut map, &mut used);
    }
    m.found
        .iter()
        .map(|iso| {
            let mut eps: f64 = 0.0;
            for f in &bp.faces {
                for i in 0..3 {
                    for (a, b) in [(f[i], f[(i + 1) % 3]), (f[(i + 1) % 3], f[i])] {
                        eps = eps.max(chebyshev(dec(p, a, b), dec(q, iso[&a], iso[&b])));
                    }
                }
            }
            eps
        })
        .reduce(f64::min)
}

/// One-sided distance from the brute-force matcher, with the radius reached.
pub fn brute_delta_hat(p: &Triangulation, pr: Dart, q: &Triangulation, qr: Dart, r_max: usize) -> (f64, usize) {
    let mut value: f64 = 1.0;
    let mut radius = 0;
    for r in 1..=r_max {
        let Some(eps) = brute_ball_match(p, pr, q, qr, r as u32) else { break };
        radius = r;
        value = value.min((-(r as f64)).exp().max(eps));
    }
    (value, radius)
}
