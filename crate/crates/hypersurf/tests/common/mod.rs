#![allow(dead_code)]

use hypersurf::num::{q, qf};
use hypersurf::{parse_poly, HermPoly, Mono, Poly, Weight, C, Q};
use proptest::prelude::*;

pub const EQQ: &str = "-2Re(z1) + |z2|^8 + |z2|^4|z3|^6";
pub const BLOOM: &str = "Re(z1) + (Re(z2) + |z3|^2)^2";
pub const SUM0: &str = "-2Re(z1) + |z2|^4 + |z2|^2|z3|^2 + (|z2|^2 + |z3|^2)|z4|^2";
pub const MIXED: &str = "-2Re(z1) + 2Re(z2^2 zb3^3)";
pub const STRAIGHTEN: &str = "-2Re(z1) + |z2 + z3^2|^4 + |z3|^8";

/// The four-variable torsion model with mixing coefficient `eps`.
pub fn torsion_p(eps: &str) -> HermPoly {
    let s = format!(
        "|z2|^6 + |z2|^2|z3|^6 + |z2|^4|z3|^2|z4|^2 + |z2|^2|z3|^4|z4|^4 \
         + 2*{eps}*Re(|z2|^2 z3^2 zb3^3 |z4|^2) + |z3|^8|z4|^2"
    );
    parse_poly(&s, 4).unwrap()
}

pub fn torsion_r(eps: &str) -> HermPoly {
    &HermPoly::minus_two_re_z1(4) + &torsion_p(eps)
}

pub fn weight(v: &[(i64, i64)]) -> Weight {
    Weight::new(v.iter().map(|&(a, b)| qf(a, b)).collect()).unwrap()
}

pub fn one() -> Q {
    q(1)
}

fn small_c() -> impl Strategy<Value = C> {
    (-3i64..=3, -3i64..=3, 1i64..=3).prop_map(|(a, b, d)| C::new(qf(a, d), qf(b, d)))
}

fn mono(n: usize, max: u32) -> impl Strategy<Value = Mono> {
    (
        proptest::collection::vec(0..=max, n),
        proptest::collection::vec(0..=max, n),
    )
        .prop_map(|(a, b)| Mono::new(a, b))
}

/// Any complex polynomial with a few small terms.
pub fn poly(n: usize, max: u32, terms: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec((mono(n, max), small_c()), 0..=terms).prop_map(move |ts| Poly::from_terms(n, ts))
}

/// Real-valued polynomial `Re(p)`.
pub fn herm(n: usize, max: u32, terms: usize) -> impl Strategy<Value = HermPoly> {
    poly(n, max, terms).prop_map(|p| HermPoly::re_of(&p))
}

/// Holomorphic polynomial with a few small terms.
pub fn holo(n: usize, max: u32, terms: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec((proptest::collection::vec(0..=max, n), small_c()), 0..=terms)
        .prop_map(move |ts| Poly::from_terms(n, ts.into_iter().map(|(a, c)| (Mono::new(a, vec![0; n]), c))))
}

/// Coefficient table is Hermitian.
pub fn hermitian(p: &Poly) -> bool {
    p.iter().all(|(m, c)| {
        let d = p.coeff(&m.conj());
        d.re == c.re && d.im == -c.im.clone()
    })
}
