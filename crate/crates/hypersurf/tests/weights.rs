mod common;

use std::collections::BTreeSet;

use common::{torsion_r, BLOOM, EQQ};
use hypersurf::multitype::{multitype_search, MultitypeStatus};
use hypersurf::num::{q, qf};
use hypersurf::weights::{counting_bound, enumerate_multitypes, is_admissible, is_distinguished};
use hypersurf::{parse_poly, ExtQ, InverseWeight, Q};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn fin(x: Q) -> ExtQ {
    ExtQ::Fin(x)
}

/// Does `Σ_{j<=i} a_j / λ_j = 1` have a solution with `a_i > 0`?
fn brute_admissible(lambda: &[ExtQ]) -> bool {
    fn reach(lambda: &[ExtQ], i: usize, j: usize, acc: Q) -> bool {
        let ExtQ::Fin(l) = &lambda[j] else {
            return j < i && reach(lambda, i, j + 1, acc);
        };
        let lo = if j == i { 1 } else { 0 };
        let mut a = lo;
        loop {
            let s = &acc + Q::from_integer(a.into()) / l;
            if s > Q::one() {
                return false;
            }
            if j == i {
                if s == Q::one() {
                    return true;
                }
            } else if reach(lambda, i, j + 1, s) {
                return true;
            }
            a += 1;
        }
    }
    (0..lambda.len()).all(|i| lambda[i].is_inf() || reach(lambda, i, 0, Q::zero()))
}

fn entry() -> impl Strategy<Value = ExtQ> {
    prop_oneof![
        (2i64..=8).prop_map(|k| fin(q(k))),
        Just(fin(qf(5, 2))),
        Just(fin(qf(7, 2))),
        Just(fin(qf(12, 5))),
        Just(ExtQ::Inf),
    ]
}

proptest! {
    #[test]
    fn admissibility_matches_brute_force(mut rest in proptest::collection::vec(entry(), 1..4)) {
        rest.sort();
        let mut l = vec![fin(q(1))];
        l.extend(rest);
        let w = InverseWeight::new(l.clone()).unwrap();
        prop_assert_eq!(is_admissible(&w).admissible, brute_admissible(&l));
    }

    #[test]
    fn reciprocity_is_an_involution(mut rest in proptest::collection::vec(entry(), 1..4)) {
        rest.sort();
        let mut l = vec![fin(q(1))];
        l.extend(rest);
        let w = InverseWeight::new(l).unwrap();
        prop_assert_eq!(w.weight().inverse(), w);
    }
}

#[test]
fn admissibility_examples() {
    let l = InverseWeight::from_ints(&[Some(1), Some(2), Some(4)]);
    let rep = is_admissible(&l);
    assert!(rep.admissible);
    assert!(rep.witnesses[1].1.contains(&vec![0, 2]));
    assert!(rep.witnesses[2].1.contains(&vec![0, 0, 4]));
    let bad = InverseWeight::new(vec![fin(q(1)), fin(qf(5, 2))]).unwrap();
    assert!(!is_admissible(&bad).admissible);
    assert!(is_admissible(&InverseWeight::from_ints(&[Some(1), None, None])).admissible);
}

#[test]
fn distinguished_examples() {
    let bloom = parse_poly(BLOOM, 3).unwrap();
    assert!(is_distinguished(
        bloom.poly(),
        &InverseWeight::from_ints(&[Some(1), Some(2), Some(4)])
    ));
    let r = parse_poly("-2Re(z1) + |z2|^2", 2).unwrap();
    assert!(is_distinguished(
        r.poly(),
        &InverseWeight::from_ints(&[Some(1), Some(2)])
    ));
    assert!(!is_distinguished(
        r.poly(),
        &InverseWeight::from_ints(&[Some(1), Some(4)])
    ));
}

/// All `(1, m_2, ..., m_n)` from integer rows `k_jl`, by exhaustive search.
fn brute_multitypes(n: usize, m: i64) -> BTreeSet<Vec<Q>> {
    fn rec(j: usize, n: usize, m: &Q, cur: &mut Vec<Q>, out: &mut BTreeSet<Vec<Q>>) {
        if j == n {
            out.insert(cur.clone());
            return;
        }
        let half = (m / q(2)).floor().to_integer();
        let kmax: i64 = half.try_into().unwrap();
        let earlier = cur.len();
        let mut ks = vec![0i64; earlier];
        loop {
            let s: Q = ks
                .iter()
                .zip(cur.iter())
                .map(|(k, ml)| q(2 * k) / ml)
                .fold(Q::zero(), |a, b| a + b);
            if s < Q::one() {
                for kjj in 1..=kmax {
                    let mj = q(2 * kjj) / (Q::one() - &s);
                    if &mj <= m && cur.last().map_or(mj >= q(2), |p| &mj >= p) {
                        cur.push(mj);
                        rec(j + 1, n, m, cur, out);
                        cur.pop();
                    }
                }
            }
            // odometer
            let mut i = 0;
            while i < earlier {
                ks[i] += 1;
                if ks[i] <= kmax {
                    break;
                }
                ks[i] = 0;
                i += 1;
            }
            if i == earlier {
                break;
            }
        }
    }
    let mut out = BTreeSet::new();
    rec(1, n, &q(m), &mut Vec::new(), &mut out);
    out
}

#[test]
fn enumeration_matches_brute_force_and_bound() {
    for n in 2..=4 {
        for m in 2..=10 {
            let got = enumerate_multitypes(n, &q(m));
            let want = brute_multitypes(n, m);
            let got_set: BTreeSet<Vec<Q>> = got
                .iter()
                .map(|l| l.entries()[1..].iter().map(|e| e.finite().unwrap().clone()).collect())
                .collect();
            assert_eq!(got_set, want, "n={n} m={m}");
            assert!(
                num_bigint::BigUint::from(got.len()) <= counting_bound(n, &q(m)),
                "n={n} m={m}"
            );
            for l in &got {
                assert!(is_admissible(l).admissible);
            }
            let mut sorted = got.clone();
            sorted.sort();
            assert_eq!(sorted, got);
        }
    }
    let two: Vec<String> = enumerate_multitypes(2, &q(4)).iter().map(|l| l.to_string()).collect();
    assert_eq!(two, vec!["(1, 2)", "(1, 4)"]);
    assert_eq!(counting_bound(2, &q(4)), 2u32.into());
    assert_eq!(counting_bound(2, &q(2)), 1u32.into());
}

#[test]
fn multitype_search_examples() {
    let m = multitype_search(&parse_poly(EQQ, 3).unwrap(), 4).unwrap();
    assert_eq!(m.to_string(), "(1, 8, 12) [exact-commutator]");
    let m = multitype_search(&parse_poly("-2Re(z1) + |z2|^2 + |z3|^2 + |z4|^2", 4).unwrap(), 4).unwrap();
    assert_eq!(m.to_string(), "(1, 2, 2, 2) [exact-commutator]");
    let m = multitype_search(&torsion_r("1/10"), 4).unwrap();
    assert_eq!(m.value.to_string(), "(1, 6, 9, 18)");
    assert_eq!(m.status, MultitypeStatus::ExactCommutator);
}

#[test]
fn search_result_is_distinguished_in_its_coordinates() {
    for (s, n) in [
        (EQQ, 3),
        (BLOOM, 3),
        ("-2Re(z1) + |z2 + z3^2|^2 + |z3|^6", 3),
        ("-2Re(z1) + |z3|^4 + |z2|^6 + |z2 z3|^2", 3),
    ] {
        let m = multitype_search(&parse_poly(s, n).unwrap(), 4).unwrap();
        assert!(is_distinguished(m.witness.model.poly(), &m.witness.found), "{s}");
        assert!(m.value >= m.witness.found);
        assert!(is_admissible(&m.value).admissible);
    }
}

#[test]
fn bloom_commutator_is_strictly_larger() {
    let m = multitype_search(&parse_poly(BLOOM, 3).unwrap(), 4).unwrap();
    let c = m.commutator.clone().unwrap();
    assert_eq!(m.value.to_string(), "(1, 2, 4)");
    assert_eq!(c.to_string(), "(1, 2, inf)");
    assert!(c > m.value);
}

#[test]
fn lexicographic_order() {
    let a = InverseWeight::from_ints(&[Some(1), Some(2), Some(4)]);
    let b = InverseWeight::from_ints(&[Some(1), Some(2), None]);
    let c = InverseWeight::from_ints(&[Some(1), Some(4), Some(4)]);
    assert!(a < b && b < c && a < c);
    assert_eq!(a.cmp(&a.clone()), std::cmp::Ordering::Equal);
}
