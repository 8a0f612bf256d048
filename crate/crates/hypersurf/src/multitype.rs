//! Bounded search for the multitype of a polynomial model.
//!
//! In fixed coordinates the lexicographically largest distinguished inverse
//! weight is read off the Newton diagram greedily. The search runs this over
//! every ordering of `z_2..z_n` and improves each start by triangular
//! substitutions `z_k -> z_k + t m` that cancel a term of weighted order one.
//! The result is a lower bound for the multitype. When it agrees with the
//! commutator multitype it is exact, since the multitype lies between them.

use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::boundary::build_boundary_system;
use crate::linalg::{solve, Mat};
use crate::model::{eliminate_harmonic, to_model_form, FormError};
use crate::num::{c_i, c_re, C, Q};
use crate::poly::{HermPoly, Mono, Poly};
use crate::weights::{greedy_weight, is_admissible, InverseWeight, Weight};
use crate::ExtQ;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MultitypeError {
    #[error("multitype needs dimension at least 2, got {0}")]
    Dimension(usize),
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultitypeStatus {
    ExactCommutator,
    SearchLowerBound,
}

impl MultitypeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MultitypeStatus::ExactCommutator => "exact-commutator",
            MultitypeStatus::SearchLowerBound => "search-lower-bound",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchWitness {
    /// The model in the coordinates where `found` is distinguished.
    pub model: HermPoly,
    /// Distinguished inverse weight before rounding up to an admissible one.
    pub found: InverseWeight,
    /// `perm[j]` is the new index of the old variable `j`.
    pub perm: Vec<usize>,
    /// Substitutions applied after the permutation, in order.
    pub changes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Multitype {
    pub value: InverseWeight,
    pub status: MultitypeStatus,
    pub witness: SearchWitness,
    pub commutator: Option<InverseWeight>,
}

impl Multitype {
    pub fn to_json(&self) -> Value {
        json!({
            "lambda": self.value.to_strings(),
            "status": self.status.as_str(),
            "commutator": self.commutator.as_ref().map(|c| c.to_strings()),
            "witness": {
                "model": self.witness.model.to_string(),
                "model_json": crate::json::poly_to_value(&self.witness.model),
                "distinguished": self.witness.found.to_strings(),
                "permutation": self.witness.perm.iter().map(|j| j + 1).collect::<Vec<_>>(),
                "changes": self.witness.changes,
            },
        })
    }
}

impl fmt::Display for Multitype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.value, self.status.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub degree_bound: u32,
    /// Cross-check with the commutator multitype.
    pub commutator: bool,
    /// Orderings of `z_2..z_n` tried, at most.
    pub max_permutations: usize,
    pub max_steps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            degree_bound: 4,
            commutator: true,
            max_permutations: 120,
            max_steps: 16,
        }
    }
}

pub fn multitype_search(r: &HermPoly, degree_bound: u32) -> Result<Multitype, MultitypeError> {
    multitype_search_with(
        r,
        &SearchOptions {
            degree_bound,
            ..SearchOptions::default()
        },
    )
}

/// Greedy weight of `p` if it is a valid weight (nonincreasing).
fn valid_greedy(p: &HermPoly) -> Option<Vec<Q>> {
    let mu = greedy_weight(p.poly());
    Weight::new(mu.clone()).ok().map(|_| mu)
}

pub fn multitype_search_with(r: &HermPoly, opts: &SearchOptions) -> Result<Multitype, MultitypeError> {
    let n = r.n();
    if n < 2 {
        return Err(MultitypeError::Dimension(n));
    }
    let (r0, _) = to_model_form(r)?;
    let (r1, _) = eliminate_harmonic(&r0)?;

    let mut best: Option<(Vec<Q>, HermPoly, Vec<usize>, Vec<String>)> = None;
    for perm in permutations(n).into_iter().take(opts.max_permutations) {
        let p = HermPoly::new(r1.permute(&perm)).expect("renaming keeps real-valuedness");
        let Some(mut mu) = valid_greedy(&p) else {
            continue;
        };
        let mut p = p;
        let mut changes = Vec::new();
        for _ in 0..opts.max_steps {
            match improve(&p, &mu, opts.degree_bound) {
                Some((q, nu, desc)) => {
                    p = q;
                    mu = nu;
                    changes.push(desc);
                }
                None => break,
            }
        }
        if best.as_ref().is_none_or(|b| mu < b.0) {
            best = Some((mu, p, perm, changes));
        }
    }
    let (mu, model, perm, changes) = best.expect("the identity ordering always gives a weight");
    let found = Weight::new(mu).expect("checked").inverse();
    let value = InverseWeight::new(admissible_ceiling(found.entries())).expect("ceiling is a valid inverse weight");
    let commutator = if opts.commutator {
        build_boundary_system(r).ok().map(|bs| bs.commutator)
    } else {
        None
    };
    let status = if commutator.as_ref() == Some(&value) {
        MultitypeStatus::ExactCommutator
    } else {
        MultitypeStatus::SearchLowerBound
    };
    Ok(Multitype {
        value,
        status,
        witness: SearchWitness {
            model,
            found,
            perm,
            changes,
        },
        commutator,
    })
}

/// All orderings of `z_2..z_n`, identity first, as renamings.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..n).collect();
    loop {
        let mut p = vec![0];
        p.extend(cur.iter().copied());
        out.push(p);
        // next lexicographic permutation
        let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

fn order(m: &Mono, mu: &[Q]) -> Q {
    m.gamma()
        .iter()
        .zip(mu)
        .fold(Q::zero(), |acc, (&g, x)| acc + Q::from_integer(g.into()) * x)
}

/// Holomorphic monomials in `vars` of weight exactly `target` and degree at
/// most `bound`.
fn monomials_of_weight(n: usize, vars: &[usize], mu: &[Q], target: &Q, bound: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, vars: &[usize], mu: &[Q], left: Q, room: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left.is_zero() {
            out.push(cur.clone());
            return;
        }
        if i == vars.len() || room == 0 {
            return;
        }
        let v = vars[i];
        for e in 0..=room {
            let rest = &left - &mu[v] * Q::from_integer(e.into());
            if rest < Q::zero() {
                break;
            }
            cur[v] = e;
            rec(i + 1, vars, mu, rest, room - e, cur, out);
        }
        cur[v] = 0;
    }
    let vars: Vec<usize> = vars.iter().copied().filter(|&v| mu[v] > Q::zero()).collect();
    let mut out = Vec::new();
    if target > &Q::zero() {
        rec(0, &vars, mu, target.clone(), bound, &mut vec![0; n], &mut out);
    }
    out
}

/// One improving substitution `z_k -> z_k + t z^e`, if any.
fn improve(p: &HermPoly, mu: &[Q], bound: u32) -> Option<(HermPoly, Vec<Q>, String)> {
    let n = p.n();
    let one = Q::one();
    let targets: Vec<Mono> = p
        .iter()
        .filter(|(m, _)| m.alpha[0] == 0 && m.beta[0] == 0 && order(m, mu) == one)
        .map(|(m, _)| m.clone())
        .collect();
    let ext = p.poly().extend(n + 1);
    for k in 1..n {
        if mu[k].is_zero() {
            continue;
        }
        let later: Vec<usize> = (k + 1..n).collect();
        for e in monomials_of_weight(n, &later, mu, &mu[k], bound) {
            let mut a = e.clone();
            a.push(1);
            let shift = Poly::term(n + 1, Mono::new(a, vec![0; n + 1]), C::one());
            let mut maps: Vec<Poly> = (0..=n).map(|j| Poly::var(n + 1, j)).collect();
            maps[k] = &maps[k] + &shift;
            let moved = ext.compose_holo(&maps);
            for target in &targets {
                let Some(t) = solve_for_t(&moved, target) else {
                    continue;
                };
                let m = Poly::term(n, Mono::new(e.clone(), vec![0; n]), t.clone());
                let mut sub: Vec<Poly> = (0..n).map(|j| Poly::var(n, j)).collect();
                sub[k] = &sub[k] + &m;
                let q = HermPoly::new(p.compose_holo(&sub)).expect("holomorphic substitution keeps real-valuedness");
                let Ok((q, _)) = eliminate_harmonic(&q) else {
                    continue;
                };
                if let Some(nu) = valid_greedy(&q) {
                    if nu.as_slice() < mu {
                        let desc = format!("z{} -> z{} + {}", k + 1, k + 1, m);
                        return Some((q, nu, desc));
                    }
                }
            }
        }
    }
    None
}

/// Solves `c(t, conj t) = 0` for the coefficient of `target` when it is
/// affine in `t` and `conj t`.
fn solve_for_t(moved: &Poly, target: &Mono) -> Option<C> {
    let n = target.n();
    let mut c0 = C::zero();
    let mut ct = C::zero();
    let mut cb = C::zero();
    for (m, c) in moved.iter() {
        if m.alpha[..n] != target.alpha[..] || m.beta[..n] != target.beta[..] {
            continue;
        }
        match (m.alpha[n], m.beta[n]) {
            (0, 0) => c0 = c.clone(),
            (1, 0) => ct = c.clone(),
            (0, 1) => cb = c.clone(),
            _ => return None,
        }
    }
    if ct.is_zero() && cb.is_zero() {
        return None;
    }
    // t = x + iy: c0 + (ct + cb) x + i (ct - cb) y = 0
    let u = &ct + &cb;
    let v = c_i() * (&ct - &cb);
    let a: Mat = vec![
        vec![c_re(u.re.clone()), c_re(v.re.clone())],
        vec![c_re(u.im.clone()), c_re(v.im.clone())],
    ];
    let b = vec![c_re(-c0.re.clone()), c_re(-c0.im.clone())];
    let xy = solve(&a, &b)?;
    Some(C::new(xy[0].re.clone(), xy[1].re.clone()))
}

/// Lexicographically smallest admissible inverse weight that is at least
/// `lambda`.
pub fn admissible_ceiling(lambda: &[ExtQ]) -> Vec<ExtQ> {
    let mut out: Vec<ExtQ> = vec![ExtQ::Fin(Q::one())];
    let mut exceeded = false;
    for x in &lambda[1..] {
        let prev = out.last().cloned().expect("nonempty");
        let lo = match (exceeded, x) {
            (true, _) => prev.clone(),
            (false, ExtQ::Inf) => {
                out.push(ExtQ::Inf);
                continue;
            }
            (false, ExtQ::Fin(v)) => ExtQ::Fin(v.clone()),
        };
        let ExtQ::Fin(lo) = lo else {
            out.push(ExtQ::Inf);
            continue;
        };
        let sums = partial_sums(&out);
        let v = sums
            .iter()
            .map(|s| {
                let free = Q::one() - s;
                let a = (&lo * &free).ceil().max(Q::one());
                a / free
            })
            .min()
            .expect("zero is always a partial sum");
        if ExtQ::Fin(v.clone()) != *x {
            exceeded = true;
        }
        out.push(ExtQ::Fin(v));
    }
    debug_assert!(is_admissible(&InverseWeight::new(out.clone()).expect("valid")).admissible);
    out
}

/// Sums `Σ a_j / λ_j < 1` over the finite entries of `lambda`, `a_j >= 0`.
fn partial_sums(lambda: &[ExtQ]) -> Vec<Q> {
    let mut sums = vec![Q::zero()];
    for l in lambda {
        let ExtQ::Fin(l) = l else { continue };
        let step = l.recip();
        let mut next = Vec::new();
        for s in &sums {
            let mut t = s.clone();
            while t < Q::one() {
                next.push(t.clone());
                t += &step;
            }
        }
        next.sort();
        next.dedup();
        sums = next;
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn search(s: &str, n: usize) -> Multitype {
        multitype_search(&parse_poly(s, n).unwrap(), 4).unwrap()
    }

    #[test]
    fn eqq_is_exact() {
        let m = search("-2Re(z1) + |z2|^8 + |z2|^4|z3|^6", 3);
        assert_eq!(m.to_string(), "(1, 8, 12) [exact-commutator]");
    }

    #[test]
    fn bloom_is_a_lower_bound() {
        let m = search("Re(z1) + (Re(z2) + |z3|^2)^2", 3);
        assert_eq!(m.value.to_string(), "(1, 2, 4)");
        assert_eq!(m.status, MultitypeStatus::SearchLowerBound);
        assert_eq!(m.commutator.unwrap().to_string(), "(1, 2, inf)");
    }

    #[test]
    fn ordering_matters() {
        let m = search("-2Re(z1) + |z2|^6 + |z3|^2", 3);
        assert_eq!(m.to_string(), "(1, 2, 6) [exact-commutator]");
    }

    #[test]
    fn substitution_found() {
        let m = search("-2Re(z1) + |z2 + z3^2|^2 + |z3|^6", 3);
        assert_eq!(m.value.to_string(), "(1, 2, 6)");
        assert_eq!(m.witness.changes.len(), 1);
        assert_eq!(m.status, MultitypeStatus::ExactCommutator);
    }

    #[test]
    fn ceiling() {
        let l = InverseWeight::from_ints(&[Some(1), Some(2), Some(3)]);
        assert_eq!(admissible_ceiling(l.entries()), l.entries().to_vec());
        let v = vec![ExtQ::Fin(Q::one()), ExtQ::Fin(Q::new(5.into(), 2.into())), ExtQ::Inf];
        let c = admissible_ceiling(&v);
        assert_eq!(InverseWeight::new(c).unwrap().to_string(), "(1, 3, 3)");
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 6);
        assert_eq!(permutations(2), vec![vec![0, 1]]);
    }
}
