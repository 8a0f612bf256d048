mod common;

use common::{herm, hermitian, holo, poly};
use hypersurf::model::{eliminate_harmonic, grade, weighted_order};
use hypersurf::{HermPoly, Poly, Weight};
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = Weight> {
    prop_oneof![
        Just(common::weight(&[(1, 1), (1, 2), (1, 4)])),
        Just(common::weight(&[(1, 1), (1, 8), (1, 12)])),
        Just(common::weight(&[(1, 1), (1, 3), (1, 3)])),
        Just(common::weight(&[(1, 1), (1, 4), (0, 1)])),
    ]
}

/// Maps `z_j -> z_j + (higher terms)` on `z2, z3`, leaving `z1` alone.
fn near_identity() -> impl Strategy<Value = Vec<Poly>> {
    (holo(3, 2, 2), holo(3, 2, 2)).prop_map(|(a, b)| {
        let strip = |p: Poly| p.filter(|m, _| m.alpha[0] == 0 && m.degree() >= 2);
        vec![
            Poly::var(3, 0),
            &Poly::var(3, 1) + &strip(a),
            &Poly::var(3, 2) + &strip(b),
        ]
    })
}

fn compose_maps(outer: &[Poly], inner: &[Poly]) -> Vec<Poly> {
    outer.iter().map(|f| f.compose_holo(inner)).collect()
}

/// `-2 Re z1 + p(z2, z3)`.
fn model() -> impl Strategy<Value = HermPoly> {
    herm(3, 2, 5).prop_map(|p| {
        let p = HermPoly::new(p.filter(|m| m.alpha[0] == 0 && m.beta[0] == 0).into_poly()).unwrap();
        &HermPoly::minus_two_re_z1(3) + &p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn ring_laws(a in poly(3, 2, 4), b in poly(3, 2, 4), c in poly(3, 2, 4)) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &Poly::one(3), a.clone());
    }

    #[test]
    fn hermitian_closure(a in herm(3, 2, 4), b in herm(3, 2, 4), maps in near_identity()) {
        for p in [&a + &b, &a - &b, &a * &b, -&a, a.pow(2)] {
            prop_assert!(hermitian(p.poly()));
        }
        prop_assert!(hermitian(&a.poly().compose_holo(&maps)));
        prop_assert!(hermitian(&a.deriv(1, false).deriv(1, true)));
    }

    #[test]
    fn substitution_functoriality(p in herm(3, 2, 3), c1 in near_identity(), c2 in near_identity()) {
        let step = p.poly().compose_holo(&c1).compose_holo(&c2);
        let once = p.poly().compose_holo(&compose_maps(&c1, &c2));
        prop_assert_eq!(step, once);
    }

    #[test]
    fn grading_reconstructs(p in herm(3, 3, 6), mu in weights()) {
        let parts = grade(p.poly(), &mu);
        let sum = parts.values().fold(Poly::zero(3), |acc, q| &acc + q);
        prop_assert_eq!(&sum, p.poly());
        for (w, part) in &parts {
            prop_assert!(part.iter().all(|(m, _)| weighted_order(m, &mu) == *w));
        }
    }

    #[test]
    fn derivative_lowers_order(p in herm(3, 3, 6), mu in weights(), j in 1usize..3, bar in any::<bool>()) {
        for (w, part) in grade(p.poly(), &mu) {
            let d = part.deriv(j, bar);
            let want = &w - &mu[j];
            prop_assert!(d.iter().all(|(m, _)| weighted_order(m, &mu) == want));
        }
    }

    #[test]
    fn harmonic_elimination_is_idempotent(r in model()) {
        let (r1, h) = eliminate_harmonic(&r).unwrap();
        let (r2, h2) = eliminate_harmonic(&r1).unwrap();
        prop_assert_eq!(&r2, &r1);
        prop_assert!(h2.is_zero());
        prop_assert!(r1.iter().all(|(m, _)| !m.is_pure() || m.alpha[0] + m.beta[0] > 0));
        let mut shift: Vec<Poly> = (0..3).map(|j| Poly::var(3, j)).collect();
        shift[0] = &shift[0] + &h;
        prop_assert_eq!(r.poly().compose_holo(&shift), r1.poly().clone());
        prop_assert!(h.is_holomorphic());
    }
}
