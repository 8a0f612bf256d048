//! Weights, inverse weights, admissibility and the multitype lattice.

use std::fmt;
use std::ops::Index;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{ExtQ, Q};
use crate::poly::Poly;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightError {
    #[error("a weight needs at least one entry")]
    Empty,
    #[error("the first entry must be 1")]
    FirstNotOne,
    #[error("entries must be nonincreasing and within [0, 1], with mu_1 > mu_2")]
    Order,
}

/// `1 = μ_1 > μ_2 >= ... >= μ_n >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Weight(Vec<Q>);

impl Weight {
    pub fn new(mu: Vec<Q>) -> Result<Weight, WeightError> {
        if mu.is_empty() {
            return Err(WeightError::Empty);
        }
        if !mu[0].is_one() {
            return Err(WeightError::FirstNotOne);
        }
        if mu.len() >= 2 && mu[1] >= mu[0] {
            return Err(WeightError::Order);
        }
        if mu.windows(2).any(|w| w[1] > w[0]) || mu.iter().any(|x| *x < Q::zero()) {
            return Err(WeightError::Order);
        }
        Ok(Weight(mu))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Q] {
        &self.0
    }

    pub fn inverse(&self) -> InverseWeight {
        InverseWeight(self.0.iter().map(|x| ExtQ::Fin(x.clone()).recip()).collect())
    }
}

impl Index<usize> for Weight {
    type Output = Q;
    fn index(&self, j: usize) -> &Q {
        &self.0[j]
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `Λ = (λ_1, ..., λ_n)` with `λ_j = 1/μ_j`. Ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InverseWeight(Vec<ExtQ>);

impl InverseWeight {
    pub fn new(lambda: Vec<ExtQ>) -> Result<InverseWeight, WeightError> {
        let mu: Option<Vec<Q>> = lambda.iter().map(|x| x.recip().finite().cloned()).collect();
        Weight::new(mu.ok_or(WeightError::Order)?)?;
        Ok(InverseWeight(lambda))
    }

    /// Builds from integers, with `None` standing for `inf`.
    pub fn from_ints(v: &[Option<i64>]) -> InverseWeight {
        InverseWeight::new(
            v.iter()
                .map(|x| match x {
                    Some(k) => ExtQ::Fin(Q::from_integer((*k).into())),
                    None => ExtQ::Inf,
                })
                .collect(),
        )
        .expect("valid inverse weight")
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[ExtQ] {
        &self.0
    }

    pub fn weight(&self) -> Weight {
        Weight(self.0.iter().map(|x| x.recip().finite().cloned().unwrap()).collect())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|x| x.to_string()).collect()
    }
}

impl fmt::Display for InverseWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

/// Outcome of [`is_admissible`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleReport {
    pub admissible: bool,
    /// `(i, witnesses)` for each finite `λ_i` (0-based `i`); every witness
    /// `a` has length `i + 1`, `a_i > 0` and `Σ a_j / λ_j = 1`.
    pub witnesses: Vec<(usize, Vec<Vec<u32>>)>,
    pub first_failure: Option<usize>,
}

fn floor_q(x: &Q) -> BigInt {
    x.floor().to_integer()
}

/// Checks that every finite `λ_i` is reached by some `Σ_{j<=i} a_j / λ_j = 1`
/// with `a_i > 0`; lists all such tuples.
pub fn is_admissible(lambda: &InverseWeight) -> AdmissibleReport {
    let mu = lambda.weight();
    let caps: Vec<u32> = lambda
        .entries()
        .iter()
        .map(|x| match x {
            ExtQ::Inf => 0,
            ExtQ::Fin(v) => floor_q(v).try_into().unwrap_or(u32::MAX),
        })
        .collect();
    let mut witnesses = Vec::new();
    let mut first_failure = None;
    for i in 0..lambda.n() {
        if lambda.entries()[i].is_inf() {
            continue;
        }
        let mut found = Vec::new();
        let mut a = vec![0u32; i + 1];
        fn rec(j: usize, i: usize, rest: &Q, a: &mut Vec<u32>, caps: &[u32], mu: &Weight, found: &mut Vec<Vec<u32>>) {
            if j == i {
                // a_i is determined by the remainder
                if mu[i].is_zero() {
                    return;
                }
                let t = rest / &mu[i];
                if t.is_integer() && t > Q::zero() {
                    a[i] = t.to_integer().try_into().unwrap_or(0);
                    if a[i] > 0 && a[i] <= caps[i] {
                        found.push(a.clone());
                    }
                    a[i] = 0;
                }
                return;
            }
            for k in 0..=caps[j] {
                let used = &mu[j] * Q::from_integer(k.into());
                if used > *rest || (used == *rest && k > 0) {
                    break;
                }
                a[j] = k;
                rec(j + 1, i, &(rest - used), a, caps, mu, found);
            }
            a[j] = 0;
        }
        rec(0, i, &Q::one(), &mut a, &caps, &mu, &mut found);
        if found.is_empty() && first_failure.is_none() {
            first_failure = Some(i);
        }
        witnesses.push((i, found));
    }
    AdmissibleReport {
        admissible: first_failure.is_none(),
        witnesses,
        first_failure,
    }
}

/// Whether every term of `r` has weighted order at least one under `Λ`.
pub fn is_distinguished(r: &Poly, lambda: &InverseWeight) -> bool {
    let mu = lambda.weight();
    let one = Q::one();
    r.iter().all(|(m, _)| crate::model::weighted_order(m, &mu) >= one)
}

/// `(⌊m/2⌋+1)^{(n-2)(n-1)/2} ⌊m/2⌋^{n-1}`.
pub fn counting_bound(n: usize, m: &Q) -> BigUint {
    assert!(n >= 2, "counting_bound needs n >= 2");
    let h: BigUint = floor_q(&(m / Q::from_integer(2.into())))
        .try_into()
        .expect("m must be nonnegative");
    let e1 = ((n - 2) * (n - 1) / 2) as u32;
    let e2 = (n - 1) as u32;
    (&h + 1u32).pow(e1) * h.pow(e2)
}

/// All `(1, m_2, ..., m_n)` solving `Σ_{l<=j} 2k_{jl}/m_l = 1` (`l >= 2`)
/// with integer `k_{jl} >= 0`, `k_{jj} >= 1` and `m_2 <= ... <= m_n <= m`.
pub fn enumerate_multitypes(n: usize, m: &Q) -> Vec<InverseWeight> {
    assert!(n >= 2, "enumerate_multitypes needs n >= 2");
    let two = Q::from_integer(2.into());
    let mut out: Vec<Vec<Q>> = Vec::new();
    fn rows(j: usize, n: usize, m: &Q, two: &Q, cur: &mut Vec<Q>, out: &mut Vec<Vec<Q>>) {
        if j == n {
            out.push(cur.clone());
            return;
        }
        let prev = cur.last().cloned().unwrap_or_else(|| two.clone());
        // earlier entries m_2 .. m_{j-1}: choose k_{jl} with running sum s < 1
        let earlier: Vec<Q> = cur.clone();
        let mut sums: Vec<Q> = vec![Q::zero()];
        for ml in &earlier {
            let mut next = Vec::new();
            for s in &sums {
                let mut k = 0i64;
                loop {
                    let t = s + two * Q::from_integer(k.into()) / ml;
                    if t >= Q::one() {
                        break;
                    }
                    next.push(t);
                    k += 1;
                }
            }
            next.sort();
            next.dedup();
            sums = next;
        }
        let mut seen: Vec<Q> = Vec::new();
        for s in sums {
            let free = Q::one() - &s;
            let mut kjj = 1i64;
            loop {
                let mj = two * Q::from_integer(kjj.into()) / &free;
                if mj > *m {
                    break;
                }
                if mj >= prev && !seen.contains(&mj) {
                    seen.push(mj.clone());
                    cur.push(mj);
                    rows(j + 1, n, m, two, cur, out);
                    cur.pop();
                }
                kjj += 1;
            }
        }
    }
    rows(1, n, m, &two, &mut Vec::new(), &mut out);
    let mut res: Vec<InverseWeight> = out
        .into_iter()
        .map(|v| {
            let mut l = vec![ExtQ::Fin(Q::one())];
            l.extend(v.into_iter().map(ExtQ::Fin));
            InverseWeight(l)
        })
        .collect();
    res.sort();
    res.dedup();
    res
}

/// Lexicographically smallest weight in the given coordinates for which every
/// term of `p` not involving `z_1` has order at least one. `prefix` fixes
/// `μ_1..μ_k`; the remaining entries are chosen greedily.
pub fn greedy_weight_from(p: &Poly, prefix: &[Q]) -> Vec<Q> {
    let n = p.n();
    let mut mu: Vec<Q> = prefix.to_vec();
    if mu.is_empty() {
        mu.push(Q::one());
    }
    let terms: Vec<Vec<u32>> = p
        .iter()
        .filter(|(m, _)| m.alpha[0] == 0 && m.beta[0] == 0 && !m.is_constant())
        .map(|(m, _)| m.gamma())
        .collect();
    for j in mu.len()..n {
        let mut best = Q::zero();
        for g in &terms {
            let s: Q = (0..j)
                .map(|i| &mu[i] * Q::from_integer(g[i].into()))
                .fold(Q::zero(), |a, b| a + b);
            let rest: u32 = g[j..].iter().sum();
            if s < Q::one() && rest > 0 {
                let v = (Q::one() - s) / Q::from_integer(rest.into());
                if v > best {
                    best = v;
                }
            }
        }
        mu.push(best);
    }
    mu
}

pub fn greedy_weight(p: &Poly) -> Vec<Q> {
    greedy_weight_from(p, &[Q::one()])
}

/// Candidate values for `μ_j` given `μ_1..μ_{j-1}`: the supporting values
/// `(1 - Σ_{i<j} γ_i μ_i) / t` of the terms, for `1 <= t <= |γ_{>=j}|`, plus 0.
pub fn supporting_values(p: &Poly, prefix: &[Q]) -> Vec<Q> {
    let j = prefix.len();
    let mut out = vec![Q::zero()];
    for (m, _) in p.iter() {
        if m.alpha[0] > 0 || m.beta[0] > 0 || m.is_constant() {
            continue;
        }
        let g = m.gamma();
        let s: Q = (0..j)
            .map(|i| &prefix[i] * Q::from_integer(g[i].into()))
            .fold(Q::zero(), |a, b| a + b);
        let rest: u32 = g[j..].iter().sum();
        if s < Q::one() {
            for t in 1..=rest {
                out.push((Q::one() - &s) / Q::from_integer(t.into()));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
