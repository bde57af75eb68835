use morseframe::permutohedron::{
    membership, membership_by_subsets, open_face_of, ordered_partitions, refines, OrderedPartition,
};
use morseframe::projection::{brute_force_project, kkt_verify, project};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn max_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn vector(q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, q)
}

fn point_and_kappa() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (1usize..=6).prop_flat_map(|q| (vector(q), 0.05f64..2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn idempotent((c, kappa) in point_and_kappa()) {
        let once = project(&c, kappa).unwrap();
        let twice = project(&once.c_prime, kappa).unwrap();
        prop_assert!(max_err(&once.c_prime, &twice.c_prime) <= 1e-12);
        prop_assert!(membership(&once.c_prime, kappa, 1e-9).unwrap());
    }

    #[test]
    fn nonexpansive(
        (c, d, kappa) in (1usize..=6).prop_flat_map(|q| (vector(q), vector(q), 0.05f64..2.0))
    ) {
        let pc = project(&c, kappa).unwrap().c_prime;
        let pd = project(&d, kappa).unwrap().c_prime;
        prop_assert!(dist(&pc, &pd) <= dist(&c, &d) + 1e-12);
    }

    #[test]
    fn permutation_equivariant(
        (c, kappa, perm) in (1usize..=6).prop_flat_map(|q| {
            (vector(q), 0.05f64..2.0, Just((0..q).collect::<Vec<usize>>()).prop_shuffle())
        })
    ) {
        let permuted: Vec<f64> = perm.iter().map(|&j| c[j]).collect();
        let p = project(&c, kappa).unwrap().c_prime;
        let pp = project(&permuted, kappa).unwrap().c_prime;
        for (k, &j) in perm.iter().enumerate() {
            prop_assert!((pp[k] - p[j]).abs() <= 1e-12);
        }
    }

    #[test]
    fn scaling((c, kappa) in point_and_kappa(), s in 0.1f64..10.0) {
        let scaled: Vec<f64> = c.iter().map(|x| s * x).collect();
        let a = project(&scaled, s * kappa).unwrap().c_prime;
        let b: Vec<f64> = project(&c, kappa).unwrap().c_prime.iter().map(|x| s * x).collect();
        prop_assert!(max_err(&a, &b) <= 1e-11 * s.max(1.0));
    }

    #[test]
    fn translation_along_ones((c, kappa) in point_and_kappa(), shift in -5.0f64..5.0) {
        let moved: Vec<f64> = c.iter().map(|x| x + shift).collect();
        let a = project(&moved, kappa).unwrap().c_prime;
        let b = project(&c, kappa).unwrap().c_prime;
        prop_assert!(max_err(&a, &b) <= 1e-11);
    }

    #[test]
    fn matches_oracle((c, kappa) in point_and_kappa()) {
        let p = project(&c, kappa).unwrap();
        let b = brute_force_project(&c, kappa).unwrap();
        prop_assert!(max_err(&p.c_prime, &b) <= 1e-8);
    }

    #[test]
    fn certificate_holds((c, kappa) in point_and_kappa()) {
        let p = project(&c, kappa).unwrap();
        let report = kkt_verify(&c, kappa, &p, 1e-9);
        prop_assert!(report.ok, "{:?}", report.violations);
        prop_assert!(report.residual <= 1e-9);
        prop_assert!(p.offsets.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(p.lambda_k.iter().all(|&l| l >= -1e-9));
        // the face of c' is the reported face
        prop_assert_eq!(open_face_of(&p.c_prime, kappa, 1e-9).unwrap(), p.face);
    }

    #[test]
    fn interior_points_are_fixed(q in 1usize..=6, kappa in 0.05f64..2.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // convex combination of the barycenter and a random vertex
        let mut rho: Vec<usize> = (0..q).collect();
        for k in (1..q).rev() {
            rho.swap(k, rng.gen_range(0..=k));
        }
        let v = morseframe::permutohedron::vertex(&rho).unwrap();
        let s: f64 = rng.gen_range(0.0..0.99);
        let c: Vec<f64> = v.iter().map(|x| s * kappa * x).collect();
        let p = project(&c, kappa).unwrap();
        prop_assert!(max_err(&p.c_prime, &c) <= 1e-12);
    }
}

#[test]
fn prefix_membership_agrees_with_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for q in 1..=5usize {
        for kappa in [0.1, 1.0] {
            let mut inside = 0;
            for k in 0..1000 {
                let mut c: Vec<f64> = (0..q).map(|_| rng.gen_range(-1.0..1.0) * kappa * q as f64 / 2.0).collect();
                if k % 2 == 0 {
                    let mean = c.iter().sum::<f64>() / q as f64;
                    c.iter_mut().for_each(|x| *x -= mean);
                }
                let a = membership(&c, kappa, 1e-12).unwrap();
                let b = membership_by_subsets(&c, kappa, 1e-12).unwrap();
                assert_eq!(a, b, "q = {q}, kappa = {kappa}, c = {c:?}");
                inside += usize::from(a);
            }
            if q > 1 {
                assert!(inside > 0, "no interior samples for q = {q}");
            }
        }
    }
}

#[test]
fn refines_is_a_partial_order() {
    for q in 1..=4 {
        let all = ordered_partitions(q);
        for a in &all {
            assert!(refines(a, a));
            assert!(refines(a, &OrderedPartition::single_block(q)));
            for b in &all {
                if refines(a, b) && refines(b, a) {
                    assert_eq!(a, b);
                }
                if !refines(a, b) {
                    continue;
                }
                for c in &all {
                    if refines(b, c) {
                        assert!(refines(a, c), "{a} ≤ {b} ≤ {c}");
                    }
                }
            }
        }
    }
}

#[test]
fn faces_of_barycenters_are_their_partitions() {
    for q in 1..=5 {
        for face in ordered_partitions(q) {
            let mut x = vec![0.0; q];
            let mut start = 0;
            for block in face.blocks() {
                let end = start + block.len();
                let mean = (start + 1 + end) as f64 / 2.0 - (q as f64 + 1.0) / 2.0;
                for &j in block {
                    x[j] = mean;
                }
                start = end;
            }
            assert_eq!(open_face_of(&x, 1.0, 1e-9).unwrap(), face);
        }
    }
}
