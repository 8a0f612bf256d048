//! Sparse polynomials in `z` and `z̄` with Gaussian-rational coefficients.
//!
//! Variables are indexed from 0 internally; `z1` of the text syntax is
//! index 0. A [`Poly`] may be any complex-valued polynomial, while
//! [`HermPoly`] carries the extra guarantee that its coefficient table is
//! Hermitian, i.e. the polynomial is real-valued.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::num::{c_int, c_re, conj, fmt_c, C, Q};

/// Exponent pair `(α, β)` of the monomial `z^α z̄^β`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl Mono {
    pub fn one(n: usize) -> Mono {
        Mono {
            alpha: vec![0; n],
            beta: vec![0; n],
        }
    }

    pub fn new(alpha: Vec<u32>, beta: Vec<u32>) -> Mono {
        assert_eq!(alpha.len(), beta.len(), "alpha and beta must have equal length");
        Mono { alpha, beta }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum::<u32>() + self.beta.iter().sum::<u32>()
    }

    /// `α_j + β_j`.
    pub fn degree_in(&self, j: usize) -> u32 {
        self.alpha[j] + self.beta[j]
    }

    pub fn is_balanced(&self) -> bool {
        self.alpha == self.beta
    }

    /// Pure (harmonic) monomials: `z^α` or `z̄^β`, including the constant.
    pub fn is_pure(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0) || self.beta.iter().all(|&b| b == 0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn conj(&self) -> Mono {
        Mono {
            alpha: self.beta.clone(),
            beta: self.alpha.clone(),
        }
    }

    /// `α + β`, the exponent of `|z|` seen by a weight.
    pub fn gamma(&self) -> Vec<u32> {
        self.alpha.iter().zip(&self.beta).map(|(a, b)| a + b).collect()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono {
            alpha: self.alpha.iter().zip(&other.alpha).map(|(a, b)| a + b).collect(),
            beta: self.beta.iter().zip(&other.beta).map(|(a, b)| a + b).collect(),
        }
    }

    /// Whether the monomial only involves variables with `keep(j)`.
    pub fn supported_on(&self, keep: impl Fn(usize) -> bool) -> bool {
        (0..self.n()).all(|j| keep(j) || (self.alpha[j] == 0 && self.beta[j] == 0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// graded, then lexicographic on the concatenation (α, β)
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.alpha.cmp(&other.alpha))
            .then_with(|| self.beta.cmp(&other.beta))
    }
}

/// Sparse polynomial in `z_1..z_n, z̄_1..z̄_n`; no stored zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Mono, C>,
}

impl Poly {
    pub fn zero(n: usize) -> Poly {
        Poly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C) -> Poly {
        Poly::term(n, Mono::one(n), c)
    }

    pub fn one(n: usize) -> Poly {
        Poly::constant(n, c_int(1))
    }

    pub fn term(n: usize, m: Mono, c: C) -> Poly {
        assert_eq!(m.n(), n, "monomial dimension mismatch");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { n, terms }
    }

    /// `z_j` (0-based).
    pub fn var(n: usize, j: usize) -> Poly {
        let mut m = Mono::one(n);
        m.alpha[j] = 1;
        Poly::term(n, m, c_int(1))
    }

    /// `z̄_j` (0-based).
    pub fn cvar(n: usize, j: usize) -> Poly {
        let mut m = Mono::one(n);
        m.beta[j] = 1;
        Poly::term(n, m, c_int(1))
    }

    /// `|z_j|^{2k}`.
    pub fn modsq(n: usize, j: usize, k: u32) -> Poly {
        let mut m = Mono::one(n);
        m.alpha[j] = k;
        m.beta[j] = k;
        Poly::term(n, m, c_int(1))
    }

    pub fn from_terms(n: usize, it: impl IntoIterator<Item = (Mono, C)>) -> Poly {
        let mut p = Poly::zero(n);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Mono, C> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Mono) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, m: Mono, c: C) {
        assert_eq!(m.n(), self.n, "monomial dimension mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &C) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.n);
        }
        Poly {
            n: self.n,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn scale_q(&self, x: &Q) -> Poly {
        self.scale(&c_re(x.clone()))
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Complex conjugate: swaps `α`/`β` and conjugates coefficients.
    pub fn conj(&self) -> Poly {
        Poly {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.conj(), conj(c))).collect(),
        }
    }

    pub fn re(&self) -> Poly {
        (self + &self.conj()).scale_q(&Q::new(1.into(), 2.into()))
    }

    pub fn im(&self) -> Poly {
        // (p - conj p) / (2i)
        let d = self - &self.conj();
        d.scale(&C::new(Q::zero(), Q::new((-1).into(), 2.into())))
    }

    pub fn is_hermitian(&self) -> bool {
        self.terms
            .iter()
            .all(|(m, c)| self.terms.get(&m.conj()).map(|d| *d == conj(c)).unwrap_or(false))
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|m| m.beta.iter().all(|&b| b == 0))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    /// Largest `α_j + β_j` over the terms.
    pub fn degree_in(&self, j: usize) -> u32 {
        self.terms.keys().map(|m| m.degree_in(j)).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&Mono::one(self.n))
    }

    /// Keeps the terms for which `keep` holds.
    pub fn filter(&self, keep: impl Fn(&Mono, &C) -> bool) -> Poly {
        Poly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| keep(m, c))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `self * other` with every term of total degree above `d` dropped.
    pub fn mul_trunc(&self, other: &Poly, d: u32) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            if d1 > d {
                break;
            }
            for (m2, c2) in &other.terms {
                if d1 + m2.degree() > d {
                    break;
                }
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Drops every term of total degree above `d`.
    pub fn truncate(&self, d: u32) -> Poly {
        self.filter(|m, _| m.degree() <= d)
    }

    /// Sets the variables with `zero(j)` to `0`.
    pub fn restrict_zero(&self, zero: impl Fn(usize) -> bool) -> Poly {
        self.filter(|m, _| m.supported_on(|j| !zero(j)))
    }

    /// `∂/∂z_j` (or `∂/∂z̄_j` when `bar`).
    pub fn deriv(&self, j: usize, bar: bool) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            let e = if bar { m.beta[j] } else { m.alpha[j] };
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            if bar {
                m2.beta[j] -= 1;
            } else {
                m2.alpha[j] -= 1;
            }
            out.terms.insert(m2, c * c_int(e as i64));
        }
        out
    }

    /// `D^α D̄^β p`.
    pub fn deriv_multi(&self, alpha: &[u32], beta: &[u32]) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            if (0..self.n).any(|j| m.alpha[j] < alpha[j] || m.beta[j] < beta[j]) {
                continue;
            }
            let mut f = BigInt::one();
            let mut m2 = m.clone();
            for j in 0..self.n {
                for t in 0..alpha[j] {
                    f *= BigInt::from(m.alpha[j] - t);
                }
                for t in 0..beta[j] {
                    f *= BigInt::from(m.beta[j] - t);
                }
                m2.alpha[j] -= alpha[j];
                m2.beta[j] -= beta[j];
            }
            out.terms.insert(m2, c * c_re(Q::from_integer(f)));
        }
        out
    }

    /// Value at `z`, with `z̄` taken as the conjugate of `z`.
    pub fn eval(&self, z: &[C]) -> C {
        assert_eq!(z.len(), self.n, "point dimension mismatch");
        let zb: Vec<C> = z.iter().map(conj).collect();
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for j in 0..self.n {
                for _ in 0..m.alpha[j] {
                    v = &v * &z[j];
                }
                for _ in 0..m.beta[j] {
                    v = &v * &zb[j];
                }
            }
            acc += v;
        }
        acc
    }

    /// `p(c(z))` where `maps[j]` is the new expression for `z_j`; each map
    /// must be holomorphic and the conjugate slots receive `conj(maps[j])`.
    pub fn compose_holo(&self, maps: &[Poly]) -> Poly {
        assert_eq!(maps.len(), self.n, "substitution dimension mismatch");
        let m_out = maps.first().map(|p| p.n).unwrap_or(self.n);
        let cmaps: Vec<Poly> = maps.iter().map(Poly::conj).collect();
        let mut pow_cache: Vec<Vec<Poly>> = vec![vec![Poly::one(m_out)]; self.n];
        let mut cpow_cache: Vec<Vec<Poly>> = vec![vec![Poly::one(m_out)]; self.n];
        fn power(cache: &mut [Vec<Poly>], base: &[Poly], j: usize, e: u32) -> Poly {
            while cache[j].len() <= e as usize {
                let next = cache[j].last().unwrap() * &base[j];
                cache[j].push(next);
            }
            cache[j][e as usize].clone()
        }
        let mut out = Poly::zero(m_out);
        for (m, c) in &self.terms {
            let mut t = Poly::constant(m_out, c.clone());
            for j in 0..self.n {
                if m.alpha[j] > 0 {
                    t = &t * &power(&mut pow_cache, maps, j, m.alpha[j]);
                }
                if m.beta[j] > 0 {
                    t = &t * &power(&mut cpow_cache, &cmaps, j, m.beta[j]);
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Embeds into dimension `n2 >= n` by appending unused variables.
    pub fn extend(&self, n2: usize) -> Poly {
        assert!(n2 >= self.n);
        Poly {
            n: n2,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut a = m.alpha.clone();
                    let mut b = m.beta.clone();
                    a.resize(n2, 0);
                    b.resize(n2, 0);
                    (Mono::new(a, b), c.clone())
                })
                .collect(),
        }
    }

    /// Renames variable `j` to `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Poly {
        Poly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut a = vec![0; self.n];
                    let mut b = vec![0; self.n];
                    for j in 0..self.n {
                        a[perm[j]] = m.alpha[j];
                        b[perm[j]] = m.beta[j];
                    }
                    (Mono::new(a, b), c.clone())
                })
                .collect(),
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = Poly::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

fn fmt_mono(m: &Mono) -> String {
    let mut parts = Vec::new();
    for j in 0..m.n() {
        match m.alpha[j] {
            0 => {}
            1 => parts.push(format!("z{}", j + 1)),
            e => parts.push(format!("z{}^{}", j + 1, e)),
        }
        match m.beta[j] {
            0 => {}
            1 => parts.push(format!("zb{}", j + 1)),
            e => parts.push(format!("zb{}^{}", j + 1, e)),
        }
    }
    parts.join("*")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mono = fmt_mono(m);
            let neg_real = c.im.is_zero() && c.re < Q::zero();
            let cabs = if neg_real { -c.clone() } else { c.clone() };
            let coef = fmt_c(&cabs);
            let body = if mono.is_empty() {
                coef
            } else if cabs.is_one() {
                mono
            } else {
                format!("{}*{}", coef, mono)
            };
            if first {
                write!(f, "{}{}", if neg_real { "-" } else { "" }, body)?;
            } else {
                write!(f, " {} {}", if neg_real { "-" } else { "+" }, body)?;
            }
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("polynomial is not real-valued: coefficient of {mono} has no conjugate partner")]
pub struct NonReal {
    pub mono: String,
}

/// Real-valued polynomial: the coefficient table satisfies
/// `C_{βα} = conj(C_{αβ})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HermPoly(Poly);

impl HermPoly {
    pub fn new(p: Poly) -> Result<HermPoly, NonReal> {
        for (m, c) in p.iter() {
            if p.terms.get(&m.conj()) != Some(&conj(c)) {
                return Err(NonReal { mono: fmt_mono(m) });
            }
        }
        Ok(HermPoly(p))
    }

    /// Real part of an arbitrary polynomial.
    pub fn re_of(p: &Poly) -> HermPoly {
        HermPoly(p.re())
    }

    pub fn zero(n: usize) -> HermPoly {
        HermPoly(Poly::zero(n))
    }

    pub fn poly(&self) -> &Poly {
        &self.0
    }

    pub fn into_poly(self) -> Poly {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn scale(&self, x: &Q) -> HermPoly {
        HermPoly(self.0.scale_q(x))
    }

    pub fn pow(&self, k: u32) -> HermPoly {
        HermPoly(self.0.pow(k))
    }

    pub fn filter(&self, keep: impl Fn(&Mono) -> bool) -> HermPoly {
        // keep must be conjugation invariant for the result to stay Hermitian
        let p = self.0.filter(|m, _| keep(m));
        debug_assert!(p.is_hermitian());
        HermPoly(p)
    }

    /// `-2 Re z_1` in dimension `n`.
    pub fn minus_two_re_z1(n: usize) -> HermPoly {
        HermPoly(&(-&Poly::var(n, 0)) - &Poly::cvar(n, 0))
    }
}

impl std::ops::Deref for HermPoly {
    type Target = Poly;
    fn deref(&self) -> &Poly {
        &self.0
    }
}

impl Add for &HermPoly {
    type Output = HermPoly;
    fn add(self, rhs: &HermPoly) -> HermPoly {
        HermPoly(&self.0 + &rhs.0)
    }
}

impl Sub for &HermPoly {
    type Output = HermPoly;
    fn sub(self, rhs: &HermPoly) -> HermPoly {
        HermPoly(&self.0 - &rhs.0)
    }
}

impl Mul for &HermPoly {
    type Output = HermPoly;
    fn mul(self, rhs: &HermPoly) -> HermPoly {
        HermPoly(&self.0 * &rhs.0)
    }
}

impl Neg for &HermPoly {
    type Output = HermPoly;
    fn neg(self) -> HermPoly {
        HermPoly(-&self.0)
    }
}

impl fmt::Display for HermPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
