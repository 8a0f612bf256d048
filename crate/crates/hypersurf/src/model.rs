//! Weighted grading and the normalizations that bring a defining function
//! into the shape `-2 Re z_1 + p`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::num::{c_int, c_inv, C, Q};
use crate::poly::{HermPoly, Mono, Poly};
use crate::weights::Weight;

/// `(α + β | μ)`; slots with `μ_i = 0` contribute nothing.
pub fn weighted_order(m: &Mono, mu: &Weight) -> Q {
    let mut s = Q::zero();
    for (j, g) in m.gamma().into_iter().enumerate() {
        if g > 0 {
            s += &mu[j] * Q::from_integer(g.into());
        }
    }
    s
}

/// Splits `p` into weighted-homogeneous parts keyed by their order.
pub fn grade(p: &Poly, mu: &Weight) -> BTreeMap<Q, Poly> {
    let mut out: BTreeMap<Q, Poly> = BTreeMap::new();
    for (m, c) in p.iter() {
        out.entry(weighted_order(m, mu))
            .or_insert_with(|| Poly::zero(p.n()))
            .add_term(m.clone(), c.clone());
    }
    out
}

/// Weight-one part of `p`.
pub fn leading_model(p: &HermPoly, mu: &Weight) -> HermPoly {
    p.filter(|m| weighted_order(m, mu).is_one())
}

/// Part of `p` of weight strictly above one.
pub fn tail(p: &HermPoly, mu: &Weight) -> HermPoly {
    let one = Q::one();
    p.filter(|m| weighted_order(m, mu) > one)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("z1 must enter only through -2 Re z1; found the term {0}")]
    BadZ1Term(String),
    #[error("the defining function has no linear z1 term")]
    NoLinearZ1,
}

fn is_z1_linear(m: &Mono) -> Option<bool> {
    // Some(true) for z1, Some(false) for conj z1, None otherwise
    let rest_zero = (1..m.n()).all(|j| m.alpha[j] == 0 && m.beta[j] == 0);
    if !rest_zero {
        return None;
    }
    match (m.alpha[0], m.beta[0]) {
        (1, 0) => Some(true),
        (0, 1) => Some(false),
        _ => None,
    }
}

fn z1_free(p: &Poly) -> Result<(), FormError> {
    for (m, c) in p.iter() {
        if m.alpha[0] > 0 || m.beta[0] > 0 {
            return Err(FormError::BadZ1Term(
                Poly::term(p.n(), m.clone(), c.clone()).to_string(),
            ));
        }
    }
    Ok(())
}

/// Splits `r = -2 Re z_1 + f` and returns `f`.
pub fn split_model(r: &HermPoly) -> Result<HermPoly, FormError> {
    let n = r.n();
    let f = r - &HermPoly::minus_two_re_z1(n);
    z1_free(f.poly())?;
    Ok(f)
}

/// Removes the pure terms of `f` in `r = -2 Re z_1 + f` by the change
/// `z_1 -> z_1 + h(z)`. Returns the new function and `h`.
pub fn eliminate_harmonic(r: &HermPoly) -> Result<(HermPoly, Poly), FormError> {
    let n = r.n();
    let f = split_model(r)?;
    let half = Q::new(1.into(), 2.into());
    let mut h = f
        .poly()
        .filter(|m, _| m.is_pure() && m.beta.iter().all(|&b| b == 0) && !m.is_constant());
    let c0 = f.constant_term();
    if !c0.is_zero() {
        h.add_term(Mono::one(n), C::new(&c0.re * &half, Q::zero()));
    }
    let mut maps: Vec<Poly> = (0..n).map(|j| Poly::var(n, j)).collect();
    maps[0] = &maps[0] + &h;
    let out = HermPoly::new(r.compose_holo(&maps)).expect("substitution keeps real-valuedness");
    debug_assert!(split_model(&out)
        .map(|g| g.iter().all(|(m, _)| !m.is_pure()))
        .unwrap_or(false));
    Ok((out, h))
}

/// Brings `r = a z_1 + conj(a) conj(z_1) + p(z')` into `-2 Re z_1 + p` via
/// `z_1 -> -z_1 / a`; returns the new function and the multiplier `-1/a`.
pub fn to_model_form(r: &HermPoly) -> Result<(HermPoly, C), FormError> {
    let n = r.n();
    let mut a = None;
    for (m, c) in r.iter() {
        if m.alpha[0] > 0 || m.beta[0] > 0 {
            match is_z1_linear(m) {
                Some(true) => a = Some(c.clone()),
                Some(false) => {}
                None => return Err(FormError::BadZ1Term(Poly::term(n, m.clone(), c.clone()).to_string())),
            }
        }
    }
    let a = a.ok_or(FormError::NoLinearZ1)?;
    let s = -c_inv(&a);
    let mut maps: Vec<Poly> = (0..n).map(|j| Poly::var(n, j)).collect();
    maps[0] = maps[0].scale(&s);
    let out = HermPoly::new(r.compose_holo(&maps)).expect("substitution keeps real-valuedness");
    debug_assert_eq!(out.coeff(&Mono::new(unit(n, 0), vec![0; n])), c_int(-1));
    Ok((out, s))
}

fn unit(n: usize, j: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[j] = 1;
    v
}

/// Balanced monomial of `p` supported on `active` whose degree sequence is
/// largest in reverse lexicographic order (last active variable first).
pub fn revlex_max_balanced(p: &Poly, active: &[usize]) -> Option<Mono> {
    let key = |m: &Mono| -> Vec<u32> { active.iter().rev().map(|&j| m.alpha[j]).collect() };
    p.iter()
        .map(|(m, _)| m)
        .filter(|m| m.is_balanced() && !m.is_constant() && m.supported_on(|j| active.contains(&j)))
        .max_by_key(|m| key(m))
        .cloned()
}
