mod common;

use std::collections::HashMap;
use std::sync::Arc;

use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use trispec::complex::{Dart, Triangulation};
use trispec::generate::{
    boundary_word, double_grid, hyperbolic_sphere, substitution_apply, tetrahedron, theta, SubstitutionRule,
};
use trispec::io::{patch_from_json, patch_to_json, triangulation_from_json, triangulation_to_json};
use trispec::measure::{cesaro, reiter_defect, rw_distribution, EmpiricalMeasure, Weighting};
use trispec::morph::{delta, delta_hat, vertex_code, CanonicalCode, Pointed};
use trispec::operator::{laplacian, DecorationSchema, OperatorSpec};
use trispec::spectral::{eigh, SpectralAtlas, TestFunction};

fn shuffled_labels(t: &Triangulation, seed: u64) -> HashMap<i64, i64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut new: Vec<i64> = t.labels().iter().map(|l| 3 * l + 100).collect();
    new.shuffle(&mut rng);
    t.labels().iter().copied().zip(new).collect()
}

fn pointed_pool() -> Vec<(Triangulation, Dart)> {
    small_spheres()
        .into_iter()
        .flat_map(|(_, t)| spread_darts(&t, 4).into_iter().map(move |d| (t.clone(), d)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relabelling_changes_nothing(idx in 0usize..10, seed in any::<u64>()) {
        let (_, t) = small_spheres().swap_remove(idx);
        let perm = shuffled_labels(&t, seed);
        let u = relabel(&t, &perm);
        prop_assert!(u.validate().is_valid());
        let a = eigh(&laplacian(&t, DecorationSchema::Natural).unwrap()).unwrap();
        let b = eigh(&laplacian(&u, DecorationSchema::Natural).unwrap()).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        let codes = |t: &Triangulation| {
            let mut c: Vec<CanonicalCode> = t.vertices().map(|v| vertex_code(t, v, 2, true).0).collect();
            c.sort();
            c
        };
        prop_assert_eq!(codes(&t), codes(&u));
        let d = Dart(0);
        let e = u.dart_by_labels(perm[&t.label(t.tail(d))], perm[&t.label(t.head(d))]).unwrap();
        let h = delta_hat(Pointed::new(&t, d), Pointed::new(&u, e), 5);
        prop_assert_eq!(h.epsilon, 0.0);
        prop_assert_eq!(h.radius, 5);
    }

    #[test]
    fn triangle_inequality(i in 0usize..1000, j in 0usize..1000, k in 0usize..1000) {
        let pool = pointed_pool();
        let n = pool.len();
        let (p, q, r) = (&pool[i % n], &pool[j % n], &pool[k % n]);
        fn pt(x: &(Triangulation, Dart)) -> Pointed<'_> {
            Pointed::new(&x.0, x.1)
        }
        fn one(a: Pointed<'_>, b: Pointed<'_>) -> f64 {
            delta_hat(a, b, 5).value
        }
        prop_assert!(one(pt(p), pt(r)) <= one(pt(p), pt(q)) + one(pt(q), pt(r)) + 1e-15);
        fn d(a: Pointed<'_>, b: Pointed<'_>) -> f64 {
            delta(a, b, 5)
        }
        prop_assert_eq!(d(pt(p), pt(q)), d(pt(q), pt(p)));
        prop_assert!(d(pt(p), pt(r)) <= d(pt(p), pt(q)) + d(pt(q), pt(r)) + 1e-15);
        prop_assert!(one(pt(p), pt(p)) <= (-5.0f64).exp() + 1e-15);
    }

    #[test]
    fn walk_laws_are_probabilities(k in 1usize..5, seed in 0u64..50, n in 0usize..40) {
        let t = double_grid(k, seed).unwrap();
        let x = t.vertices().next().unwrap();
        let p = rw_distribution(&t, x, n);
        prop_assert!((p.total() - 1.0).abs() < 1e-12);
        prop_assert!(p.probs.iter().all(|&v| v >= 0.0));
        let c = cesaro(&t, x, n);
        prop_assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let y = t.adjacent(x).next().unwrap();
        let g = reiter_defect(&t, x, y, n.max(1)).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&g));
    }

    #[test]
    fn ids_is_a_distribution_function(k in 1usize..4, seed in 0u64..20, a in -3.0f64..1.0, b in -3.0f64..1.0) {
        let t = double_grid(k, seed).unwrap();
        let m = EmpiricalMeasure::new(vec![Arc::new(t)], Weighting::DartUniform).unwrap();
        let atlas = SpectralAtlas::new(&m, &OperatorSpec::default()).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let f = |t: f64| atlas.kappa(&TestFunction::step(t).unwrap());
        prop_assert!(f(lo) <= f(hi) + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f(hi)));
        prop_assert!((atlas.kappa(&TestFunction::one()) - 1.0).abs() < 1e-12);
        prop_assert!((f(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn files_round_trip(k in 1usize..4, seed in any::<u64>()) {
        let t = double_grid(k, seed).unwrap();
        let back = triangulation_from_json(&triangulation_to_json(&t)).unwrap();
        prop_assert_eq!(triangulation_to_json(&back), triangulation_to_json(&t));
        let p = theta(k).unwrap();
        let q = patch_from_json(&patch_to_json(&p)).unwrap();
        prop_assert_eq!(patch_to_json(&q), patch_to_json(&p));
    }

    #[test]
    fn test_function_text_round_trips(c in proptest::collection::vec(-5.0f64..5.0, 1..6), t in -4.0f64..4.0) {
        for f in [TestFunction::polynomial(c.clone()).unwrap(), TestFunction::step(t).unwrap()] {
            let back: TestFunction = f.to_string().parse().unwrap();
            prop_assert_eq!(back, f);
        }
    }
}

#[test]
fn substitution_quadruples_faces_and_keeps_spheres() {
    let rule = SubstitutionRule::four_subdivision(&[0.0, 1.0], 0.0);
    let mut t = trispec::generate::decorate_iid(&tetrahedron(), &[0.0, 1.0], 1).unwrap();
    for _ in 0..4 {
        let next = substitution_apply(&t, &rule).unwrap();
        assert_eq!(next.num_faces(), 4 * t.num_faces());
        assert_eq!(next.euler_characteristic(), 2);
        assert!(next.validate().is_valid());
        t = next;
    }
}

#[test]
fn theta_boundaries_follow_the_word_substitution() {
    let mut w = boundary_word(&theta(1).unwrap()).unwrap();
    for n in 2..=5 {
        w = w.substitute();
        assert_eq!(boundary_word(&theta(n).unwrap()).unwrap(), w, "n = {n}");
    }
}

#[test]
fn hyperbolic_spheres_validate() {
    for k in 1..=4 {
        let s = hyperbolic_sphere(k).unwrap();
        assert!(s.validate().is_valid());
        assert_eq!(s.euler_characteristic(), 2);
        assert!(s.max_degree() <= 7);
    }
}
