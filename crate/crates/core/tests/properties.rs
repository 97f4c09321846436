use dqs::blockmap::{compose, extend, extend_by_slices, tilde_left};
use dqs::builtin;
use dqs::mean::known_mean;
use dqs::random::{random_block_map, random_element, random_hermitian_element};
use dqs::stabilize::hyers_ulam_correct;
use dqs::{IndexSystem, MMElement, Side, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn index() -> IndexSystem {
    IndexSystem::new([("a", 1), ("b", 2), ("c", 3)]).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sup_norm_is_a_c_star_norm(seed in any::<u64>()) {
        let mut r = rng(seed);
        let i = index();
        let (f, g) = (random_element(&i, &mut r), random_element(&i, &mut r));
        let (nf, ng) = (f.sup_norm(), g.sup_norm());
        prop_assert!(f.add(&g).unwrap().sup_norm() <= nf + ng + 1e-12);
        prop_assert!(f.mul(&g).unwrap().sup_norm() <= nf * ng + 1e-12);
        let star = f.adjoint().mul(&f).unwrap().sup_norm();
        prop_assert!((star - nf * nf).abs() <= 1e-10 * (1.0 + nf * nf));
        prop_assert!((f.adjoint().sup_norm() - nf).abs() <= 1e-12);
    }

    #[test]
    fn outer_tensor_is_bilinear_and_multiplicative(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let mut r = rng(seed);
        let i = index();
        let j = IndexSystem::new([("u", 2), ("v", 1)]).unwrap();
        let (f, f2) = (random_element(&i, &mut r), random_element(&i, &mut r));
        let (g, g2) = (random_element(&j, &mut r), random_element(&j, &mut r));
        let a = C64::new(re, im);
        let lhs = f.scale(a).add(&f2).unwrap().outer_tensor(&g);
        let rhs = f.outer_tensor(&g).scale(a).add(&f2.outer_tensor(&g)).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-10);
        let prod = f.mul(&f2).unwrap().outer_tensor(&g.mul(&g2).unwrap());
        let split = f.outer_tensor(&g).mul(&f2.outer_tensor(&g2)).unwrap();
        prop_assert!(prod.distance(&split).unwrap() < 1e-10);
        prop_assert!((f.outer_tensor(&g).sup_norm() - f.sup_norm() * g.sup_norm()).abs() < 1e-10);
    }

    #[test]
    fn exp_of_commuting_elements_factorizes(seed in any::<u64>(), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let mut r = rng(seed);
        let h = random_hermitian_element(&index(), &mut r).scale(C64::new(0.0, 1.0));
        let (a, b) = (h.scale(C64::new(s, 0.0)), h.scale(C64::new(t, 0.0)));
        let joint = a.add(&b).unwrap().exp_blockwise();
        let split = a.exp_blockwise().mul(&b.exp_blockwise()).unwrap();
        prop_assert!(joint.distance(&split).unwrap() < 1e-10);
        // exp of a skew-Hermitian element is unitary
        prop_assert!((joint.sup_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn extension_routes_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let i = index();
        let j = IndexSystem::new([("u", 2)]).unwrap();
        let k = IndexSystem::new([("p", 1), ("q", 2)]).unwrap();
        let t = random_block_map(&i, &j, &mut r);
        let f = random_element(&IndexSystem::product(&[&k, &i, &k]), &mut r);
        let direct = extend(&k, &t, &k).apply(&f).unwrap();
        let sliced = extend_by_slices(&k, &t, &k, &f).unwrap();
        prop_assert!(direct.distance(&sliced).unwrap() < 1e-10);
    }

    #[test]
    fn extension_respects_composition(seed in any::<u64>()) {
        let mut r = rng(seed);
        let i = index();
        let j = IndexSystem::new([("u", 2), ("v", 1)]).unwrap();
        let k = IndexSystem::new([("w", 2)]).unwrap();
        let (s, t) = (random_block_map(&j, &k, &mut r), random_block_map(&i, &j, &mut r));
        let aux = IndexSystem::new([("x", 2)]).unwrap();
        let f = random_element(&IndexSystem::product(&[&i, &aux]), &mut r);
        let lhs = tilde_left(&compose(&s, &t).unwrap(), &aux).apply(&f).unwrap();
        let rhs = tilde_left(&s, &aux).apply(&tilde_left(&t, &aux).apply(&f).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn correction_is_linear_on_the_dual(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let qs = builtin::s3_dual().unwrap();
        let m = known_mean(&qs).unwrap();
        let mut r = rng(seed);
        let (f, g) = (random_element(qs.index(), &mut r), random_element(qs.index(), &mut r));
        let a = C64::new(re, im);
        let correct = |x: &MMElement| hyers_ulam_correct(&qs, &m, x, Side::Right).unwrap().correction;
        let lhs = correct(&f.scale(a).add(&g).unwrap());
        let rhs = correct(&f).scale(a).add(&correct(&g)).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-9);
    }
}
