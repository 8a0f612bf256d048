mod common;

use common::{torsion_p, torsion_r, weight, EQQ, MIXED, SUM0};
use hypersurf::model::weighted_order;
use hypersurf::normal_form::{auto_weight, normalize, step_first, verify_normal_form, NormalizeError};
use hypersurf::num::{q, qf};
use hypersurf::{parse_poly, HermPoly, Mono, Poly, Weight, C, Q};
use num_traits::{One, Zero};
use proptest::prelude::*;

#[test]
fn eqq_golden() {
    let r = parse_poly(EQQ, 3).unwrap();
    let mu = weight(&[(1, 1), (1, 8), (1, 12)]);
    let nf = normalize(&r, &mu, true).unwrap();
    assert_eq!(nf.k_matrix(), vec![vec![4], vec![2, 3]]);
    assert_eq!(nf.a_values(), vec![q(1), q(1)]);
    assert!(nf.residual.is_zero());
    assert!(verify_normal_form(&nf, &r, &mu).ok());
}

#[test]
fn sum0_last_row_is_not_the_z2_z4_square() {
    let r = parse_poly(SUM0, 4).unwrap();
    let mu = auto_weight(&r).unwrap();
    let nf = normalize(&r, &mu, true).unwrap();
    let rows: Vec<Mono> = nf.rows.iter().map(|row| row.mono()).collect();
    let sq = |a: [u32; 4]| Mono::new(a.to_vec(), a.to_vec());
    assert_eq!(rows, vec![sq([0, 2, 0, 0]), sq([0, 1, 1, 0]), sq([0, 0, 1, 1])]);
    assert_ne!(rows[2], sq([0, 1, 0, 1]));
}

#[test]
fn tube_keeps_half_of_the_square() {
    let r = parse_poly("-2Re(z1) + Re(z2)^2", 2).unwrap();
    let mu = weight(&[(1, 1), (1, 2)]);
    let nf = normalize(&r, &mu, true).unwrap();
    assert_eq!(nf.a_values(), vec![qf(1, 2)]);
    // the pure part went into the z1 shift
    assert_eq!(nf.harmonic, hypersurf::parse_expr("1/4 z2^2", 2).unwrap());
}

#[test]
fn torsion_model_rows() {
    let r = torsion_r("1/10");
    let mu = weight(&[(1, 1), (1, 6), (1, 9), (1, 18)]);
    let st = step_first(&torsion_p("1/10"), &mu, false).unwrap();
    assert_eq!(st.k22, 3);
    assert_eq!(st.c20, q(1));
    let nf = normalize(&r, &mu, false).unwrap();
    assert_eq!(nf.k_matrix(), vec![vec![3], vec![1, 3], vec![1, 2, 2]]);
    assert!(verify_normal_form(&nf, &r, &mu).ok());
}

#[test]
fn mixed_term_contradiction() {
    let r = parse_poly(MIXED, 3).unwrap();
    let mu = weight(&[(1, 1), (1, 4), (1, 6)]);
    let e = normalize(&r, &mu, true).unwrap_err();
    assert!(e.is_contradiction());
    assert!(e.to_string().contains("pseudoconvexity"), "{e}");
    assert!(!matches!(normalize(&r, &mu, false), Ok(_)));
}

fn weights() -> impl Strategy<Value = Weight> {
    prop_oneof![
        Just(weight(&[(1, 1), (1, 4), (1, 4)])),
        Just(weight(&[(1, 1), (1, 4), (1, 6)])),
        Just(weight(&[(1, 1), (1, 4), (1, 8)])),
        Just(weight(&[(1, 1), (1, 6), (1, 9)])),
        Just(weight(&[(1, 1), (1, 2), (1, 4), (1, 4)])),
    ]
}

/// Holomorphic monomials of weight exactly 1/2 in `z2..zn`.
fn half_weight_monomials(mu: &Weight) -> Vec<Vec<u32>> {
    let n = mu.n();
    let half = qf(1, 2);
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(j: usize, n: usize, mu: &Weight, left: Q, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left.is_zero() {
            out.push(cur.clone());
            return;
        }
        if j == n {
            return;
        }
        let mut e = 0;
        let mut rest = left;
        while rest >= Q::zero() {
            cur[j] = e;
            rec(j + 1, n, mu, rest.clone(), cur, out);
            e += 1;
            rest -= &mu[j];
        }
        cur[j] = 0;
    }
    rec(1, n, mu, half, &mut cur, &mut out);
    out
}

/// `Σ |h_i|^2` for random holomorphic `h_i` of weight 1/2.
fn sos_model() -> impl Strategy<Value = (Weight, HermPoly)> {
    weights()
        .prop_flat_map(|mu| {
            let monos = half_weight_monomials(&mu);
            let k = monos.len();
            let coeffs = proptest::collection::vec(proptest::collection::vec(-2i64..=2, k), 1..=3);
            (Just(mu), Just(monos), coeffs)
        })
        .prop_map(|(mu, monos, coeffs)| {
            let n = mu.n();
            let mut p = HermPoly::zero(n);
            for row in coeffs {
                let h = Poly::from_terms(
                    n,
                    monos
                        .iter()
                        .zip(row)
                        .map(|(a, c)| (Mono::new(a.clone(), vec![0; n]), C::new(q(c), q(0)))),
                );
                p = &p + &HermPoly::new(&h * &h.conj()).unwrap();
            }
            (mu.clone(), &HermPoly::minus_two_re_z1(n) + &p)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sums_of_squares_normalize_and_verify((mu, r) in sos_model()) {
        prop_assume!(r.len() > 2);
        match normalize(&r, &mu, true) {
            Ok(nf) => {
                prop_assert!(verify_normal_form(&nf, &r, &mu).ok(), "{}", r);
                prop_assert!(nf.a_values().iter().all(|a| *a > Q::zero()));
                for row in &nf.rows {
                    prop_assert!(row.k[row.slot] > 0);
                }
                if let Some(low) = nf.lowered_weight() {
                    prop_assert!(low.entries() < mu.entries());
                    let one = Q::one();
                    prop_assert!(r.iter().all(|(m, _)| weighted_order(m, low) >= one));
                }
                // normalizing the normalized model changes nothing
                let again_r = &HermPoly::minus_two_re_z1(mu.n()) + &nf.p;
                let again = normalize(&again_r, &nf.weight, true).unwrap();
                prop_assert_eq!(again.k_matrix(), nf.k_matrix());
                prop_assert_eq!(again.a_values(), nf.a_values());
            }
            Err(NormalizeError::CannotLower { .. }) => prop_assert!(false, "cannot lower {r}"),
            Err(e) => prop_assert!(false, "{e} on {r}"),
        }
    }
}
