//! Boundary systems of polynomial models and the commutator multitype.
//!
//! Vector fields carry polynomial coefficients. Where a tangency condition
//! requires dividing by a function that does not vanish at the origin, the
//! quotient is expanded as a power series and truncated at a total degree.
//! Every list has length at most the `degree_bound` `D`, so a value at the
//! origin reads field coefficients to degree `D - 1`, and `r_j` loses at
//! most `D` degrees of exactness against its fields. A step with `R`
//! directions still free truncates at `2D + (R - 1)(D + 1)`, which keeps
//! every later value at the origin exact and each `r_j` exact to degree
//! `D` at least. The system's `order` is the first step's.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::json::c_value;
use crate::linalg::{inverse, rank, Mat};
use crate::model::{eliminate_harmonic, to_model_form, FormError};
use crate::num::{conj, fmt_c, fmt_q, C, Q};
use crate::poly::{HermPoly, Mono, Poly};
use crate::weights::InverseWeight;
use crate::ExtQ;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundaryError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("a list needs at least two fields")]
    ShortList,
    #[error("list refers to field {0}, which does not exist")]
    NoSuchField(usize),
    #[error("the boundary system has no slot beyond the Levi block")]
    NoFirstBlock,
    #[error("r{slot} is not harmonic at the model level: offending term {term}")]
    NotHarmonic { slot: usize, term: Poly },
    #[error("r{slot}: the linear part on the first block is singular")]
    Inconsistent { slot: usize },
}

/// `Σ hol[a] ∂/∂z_a + Σ anti[a] ∂/∂z̄_a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    pub hol: Vec<Poly>,
    pub anti: Vec<Poly>,
}

impl Field {
    pub fn zero(n: usize) -> Field {
        Field {
            hol: vec![Poly::zero(n); n],
            anti: vec![Poly::zero(n); n],
        }
    }

    pub fn n(&self) -> usize {
        self.hol.len()
    }

    pub fn conj(&self) -> Field {
        Field {
            hol: self.anti.iter().map(Poly::conj).collect(),
            anti: self.hol.iter().map(Poly::conj).collect(),
        }
    }

    /// `X f`, keeping terms of degree at most `d`.
    pub fn apply(&self, f: &Poly, d: u32) -> Poly {
        let mut out = Poly::zero(f.n());
        for a in 0..self.n() {
            for (coef, bar) in [(&self.hol[a], false), (&self.anti[a], true)] {
                if coef.is_zero() {
                    continue;
                }
                let df = f.deriv(a, bar);
                if !df.is_zero() {
                    out = &out + &coef.mul_trunc(&df, d);
                }
            }
        }
        out
    }

    /// `[X, Y]`, keeping terms of degree at most `d`.
    pub fn bracket(&self, other: &Field, d: u32) -> Field {
        let comp = |x: &Poly, y: &Poly| &self.apply(y, d) - &other.apply(x, d);
        Field {
            hol: self.hol.iter().zip(&other.hol).map(|(x, y)| comp(x, y)).collect(),
            anti: self.anti.iter().zip(&other.anti).map(|(x, y)| comp(x, y)).collect(),
        }
    }
}

/// A `(1,0)` field `Σ coeffs[a] ∂/∂z_a`, built from the direction
/// `∂/∂z_direction` by tangency corrections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VField {
    pub coeffs: Vec<Poly>,
    pub direction: usize,
    /// Functions the field was built to annihilate: 1 for `r`, `j` for `r_j`.
    pub annihilates: Vec<usize>,
}

impl VField {
    /// `∂/∂z_k + (∂p/∂z_k) ∂/∂z_1`, tangent to `-2 Re z_1 + p`.
    pub fn tangent(f: &Poly, k: usize) -> VField {
        let n = f.n();
        let mut coeffs = vec![Poly::zero(n); n];
        coeffs[k] = Poly::one(n);
        coeffs[0] = f.deriv(k, false);
        VField {
            coeffs,
            direction: k,
            annihilates: vec![1],
        }
    }

    pub fn field(&self, conjugate: bool) -> Field {
        let n = self.coeffs.len();
        let f = Field {
            hol: self.coeffs.clone(),
            anti: vec![Poly::zero(n); n],
        };
        if conjugate {
            f.conj()
        } else {
            f
        }
    }
}

/// Entries `(field index, conjugated)`, first entry leftmost.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct VList(pub Vec<(usize, bool)>);

impl VList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The list without its first entry.
    pub fn tail(&self) -> VList {
        VList(self.0[1..].to_vec())
    }

    /// Number of entries from `{L_i, L̄_i}` for field index `i`.
    pub fn count(&self, i: usize) -> u32 {
        self.0.iter().filter(|e| e.0 == i).count() as u32
    }
}

impl fmt::Display for VList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .0
            .iter()
            .map(|&(i, c)| format!("{}{}", if c { "Lb" } else { "L" }, i + 2))
            .collect();
        write!(f, "{}", names.join(" "))
    }
}

/// `(∂r/∂z_a)_a`.
fn dr(r0: &HermPoly) -> Vec<Poly> {
    (0..r0.n()).map(|a| r0.deriv(a, false)).collect()
}

fn contract(dr: &[Poly], v: &Field, d: u32) -> Poly {
    let mut out = Poly::zero(v.n());
    for (a, coef) in v.hol.iter().enumerate() {
        if !coef.is_zero() {
            out = &out + &coef.mul_trunc(&dr[a], d);
        }
    }
    out
}

fn list_function(dr: &[Poly], fields: &[Field], d: u32) -> Poly {
    let l = fields.len();
    let mut g = contract(dr, &fields[l - 2].bracket(&fields[l - 1], d), d);
    for x in fields[..l - 2].iter().rev() {
        g = x.apply(&g, d);
    }
    g
}

/// `L^1 ⋯ L^{l-2} ∂r([L^{l-1}, L^l])` for `list = {L^1, ..., L^l}`, with
/// terms of degree above `order` dropped.
pub fn list_derivative(r0: &HermPoly, fields: &[VField], list: &VList, order: u32) -> Result<Poly, BoundaryError> {
    if list.len() < 2 {
        return Err(BoundaryError::ShortList);
    }
    let fs = list
        .0
        .iter()
        .map(|&(i, c)| fields.get(i).map(|f| f.field(c)).ok_or(BoundaryError::NoSuchField(i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(list_function(&dr(r0), &fs, order))
}

#[derive(Clone, Debug)]
pub struct Slot {
    /// Index into `fields`.
    pub field: usize,
    pub var: usize,
    pub list: VList,
    pub c: Q,
    /// `ℒ'_j ∂r`.
    pub f: Poly,
    /// `Re f` or `Im f`.
    pub r: HermPoly,
    pub uses_im: bool,
    /// `ℒ_j ∂r(0)`.
    pub value: C,
    /// `f` and `r` are exact up to this degree.
    pub order: u32,
}

#[derive(Clone, Debug)]
pub struct BoundarySystem {
    pub r0: HermPoly,
    pub levi_rank: usize,
    pub levi_vars: Vec<usize>,
    /// `L_2, ..., L_ν`; the first `levi_rank` span the Levi block.
    pub fields: Vec<VField>,
    pub slots: Vec<Slot>,
    pub commutator: InverseWeight,
    pub degree_bound: u32,
    pub order: u32,
}

impl BoundarySystem {
    pub fn n(&self) -> usize {
        self.r0.n()
    }

    /// Weight `1/c` of each variable: `1` for `z_1`, `1/2` on the Levi block,
    /// `1/c_j` for the direction of slot `j`, `0` elsewhere.
    pub fn var_weights(&self) -> Vec<Q> {
        let mut w = vec![Q::zero(); self.n()];
        w[0] = Q::one();
        for &v in &self.levi_vars {
            w[v] = Q::new(1.into(), 2.into());
        }
        for s in &self.slots {
            w[s.var] = s.c.recip();
        }
        w
    }

    /// Slot index (into `slots`) of the first block.
    pub fn first_block(&self) -> Vec<usize> {
        match self.slots.first() {
            None => Vec::new(),
            Some(s0) => (0..self.slots.len()).take_while(|&i| self.slots[i].c == s0.c).collect(),
        }
    }

    /// Tangent field in direction `z_k` satisfying the same conditions as a
    /// field for the next slot.
    pub fn candidate_field(&self, k: usize) -> Option<VField> {
        let f = &self.r0 - &HermPoly::minus_two_re_z1(self.n());
        let ctx = Ctx {
            n: self.n(),
            f: f.into_poly(),
            dr: dr(&self.r0),
            levi_vars: self.levi_vars.clone(),
            order: 2 * self.degree_bound
                + ((self.n() - 1 - self.levi_rank - self.slots.len()).max(1) as u32 - 1) * (self.degree_bound + 1),
        };
        ctx.tangent_field(k, &self.slots)
    }

    pub fn list_derivative(&self, list: &VList) -> Result<Poly, BoundaryError> {
        list_derivative(&self.r0, &self.fields, list, self.order)
    }

    pub fn to_json(&self) -> Value {
        let name = |i: usize| format!("L{}", i + 2);
        json!({
            "model": self.r0.to_string(),
            "model_json": crate::json::poly_to_value(&self.r0),
            "levi_rank": self.levi_rank,
            "levi_vars": self.levi_vars.iter().map(|v| format!("z{}", v + 1)).collect::<Vec<_>>(),
            "fields": self.fields.iter().enumerate().map(|(i, f)| json!({
                "name": name(i),
                "direction": format!("z{}", f.direction + 1),
                "coeffs": f.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "annihilates": f.annihilates.iter().map(|k| format!("r{k}")).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "slots": self.slots.iter().map(|s| json!({
                "field": name(s.field),
                "var": format!("z{}", s.var + 1),
                "list": s.list.to_string(),
                "list_indices": s.list.0.iter().map(|&(i, c)| json!([i + 2, c])).collect::<Vec<_>>(),
                "c": fmt_q(&s.c),
                "value": c_value(&s.value),
                "r": s.r.to_string(),
                "f": s.f.to_string(),
                "part": if s.uses_im { "Im" } else { "Re" },
                "order": s.order,
            })).collect::<Vec<_>>(),
            "commutator": self.commutator.to_strings(),
            "degree_bound": self.degree_bound,
            "order": self.order,
        })
    }
}

type PolyMat = Vec<Vec<Poly>>;

/// Inverse of a matrix of power series, truncated at degree `d`.
fn series_inverse(m: &PolyMat, d: u32) -> Option<PolyMat> {
    let k = m.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let n = m[0][0].n();
    let m0: Mat = m
        .iter()
        .map(|row| row.iter().map(|p| p.constant_term()).collect())
        .collect();
    let inv0 = inverse(&m0)?;
    let inv0p: PolyMat = inv0
        .iter()
        .map(|row| row.iter().map(|c| Poly::constant(n, c.clone())).collect())
        .collect();
    let e: PolyMat = m
        .iter()
        .map(|row| row.iter().map(|p| p.filter(|mono, _| !mono.is_constant())).collect())
        .collect();
    // R = -inv0 * E has no constant terms, so R^t vanishes past degree d
    let r: PolyMat = neg(&mat_mul(&inv0p, &e, d));
    let mut term = inv0p.clone();
    let mut sum = inv0p;
    for _ in 0..d {
        term = mat_mul(&r, &term, d);
        if term.iter().all(|row| row.iter().all(Poly::is_zero)) {
            break;
        }
        sum = add(&sum, &term);
    }
    Some(sum)
}

fn mat_mul(a: &PolyMat, b: &PolyMat, d: u32) -> PolyMat {
    let n = a[0][0].n();
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).fold(Poly::zero(n), |acc, t| &acc + &a[i][t].mul_trunc(&b[t][j], d)))
                .collect()
        })
        .collect()
}

fn add(a: &PolyMat, b: &PolyMat) -> PolyMat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect())
        .collect()
}

fn neg(a: &PolyMat) -> PolyMat {
    a.iter().map(|x| x.iter().map(|u| -u).collect()).collect()
}

struct Ctx {
    n: usize,
    f: Poly,
    dr: Vec<Poly>,
    levi_vars: Vec<usize>,
    order: u32,
}

impl Ctx {
    /// Field in direction `k` satisfying `L r = 0`, `∂∂̄r(L, L̄_i) = 0` on
    /// the Levi block and `L r_s = 0` for the given earlier slots.
    fn tangent_field(&self, k: usize, slots: &[Slot]) -> Option<VField> {
        let mut v = vec![C::zero(); self.n];
        v[k] = C::one();
        self.tangent_field_along(k, &v, slots)
    }

    /// As [`Ctx::tangent_field`] with constant direction `v` (`v[k] = 1`)
    /// over the free coordinates.
    fn tangent_field_along(&self, k: usize, v: &[C], slots: &[Slot]) -> Option<VField> {
        let n = self.n;
        let d = self.order;
        let unknowns: Vec<usize> = self
            .levi_vars
            .iter()
            .copied()
            .chain(slots.iter().map(|s| s.var))
            .collect();
        let along = |g: &Poly| {
            (1..n)
                .filter(|j| !v[*j].is_zero() && !unknowns.contains(j))
                .fold(Poly::zero(n), |acc, j| &acc + &g.deriv(j, false).scale(&v[j]))
        };
        let mut m: PolyMat = Vec::new();
        let mut rhs: Vec<Poly> = Vec::new();
        for &i in &self.levi_vars {
            let fi = self.f.deriv(i, true);
            m.push(unknowns.iter().map(|&u| fi.deriv(u, false)).collect());
            rhs.push(-&along(&fi));
        }
        for s in slots {
            m.push(unknowns.iter().map(|&u| s.r.deriv(u, false)).collect());
            rhs.push(-&along(&s.r));
        }
        let inv = series_inverse(&m, d)?;
        let mut coeffs = vec![Poly::zero(n); n];
        for j in 1..n {
            if !v[j].is_zero() && !unknowns.contains(&j) {
                coeffs[j] = Poly::constant(n, v[j].clone());
            }
        }
        for (a, &u) in unknowns.iter().enumerate() {
            coeffs[u] = (0..rhs.len()).fold(Poly::zero(n), |acc, t| &acc + &inv[a][t].mul_trunc(&rhs[t], d));
        }
        let mut c0 = Poly::zero(n);
        for a in 1..n {
            if !coeffs[a].is_zero() {
                c0 = &c0 + &coeffs[a].mul_trunc(&self.dr[a], d);
            }
        }
        coeffs[0] = c0;
        let mut annihilates = vec![1];
        annihilates.extend(slots.iter().map(|s| s.field + 2));
        Some(VField {
            coeffs,
            direction: k,
            annihilates,
        })
    }
}

struct Node {
    list: Vec<(usize, usize)>,
    g: Poly,
    counts: Vec<u32>,
}

/// Breadth-first search over ordered lists of fields from groups
/// `0..groups.len()` (group indices nonincreasing from left to right, any
/// order inside a group), with
/// `Σ l_g / c_g < 1` over groups of known `c`. A list is complete when its
/// first entry lies in `target` (any group if `None`).
#[derive(Clone, Copy, PartialEq, Eq)]
enum Search {
    /// All nonzero complete lists.
    All,
    /// Complete lists minimizing `l_t / (1 - Σ_{g≠t} l_g/c_g)` for the
    /// target group `t`, then length; branches that cannot go below
    /// `bound` are cut.
    MinC,
}

/// `l_t / (1 - Σ_{g≠t} l_g/c_g)`; increasing in every count.
fn list_c(counts: &[u32], cs: &[Option<Q>], t: usize) -> Q {
    let rest = (0..counts.len())
        .filter(|&g| g != t)
        .filter_map(|g| cs[g].as_ref().map(|c| Q::from_integer(counts[g].into()) / c))
        .fold(Q::zero(), |a, b| a + b);
    Q::from_integer(counts[t].max(1).into()) / (Q::one() - rest)
}

fn pair(f: &VField) -> Vec<Field> {
    vec![f.field(false), f.field(true)]
}

fn tree_search(
    dr: &[Poly],
    groups: &[Vec<Field>],
    cs: &[Option<Q>],
    target: Option<usize>,
    max_len: u32,
    mode: Search,
    bound: Option<&Q>,
) -> Vec<(Vec<(usize, usize)>, C)> {
    let g_n = groups.len();
    let within = |counts: &[u32]| -> bool {
        let s = (0..g_n)
            .filter_map(|g| cs[g].as_ref().map(|c| Q::from_integer(counts[g].into()) / c))
            .fold(Q::zero(), |a, b| a + b);
        s < Q::one()
    };
    let mut level: Vec<Node> = Vec::new();
    if max_len < 2 {
        return Vec::new();
    }
    for gy in 0..g_n {
        for gx in gy..g_n {
            for cx in 0..groups[gx].len() {
                for cy in 0..groups[gy].len() {
                    let mut counts = vec![0; g_n];
                    counts[gx] += 1;
                    counts[gy] += 1;
                    if !within(&counts) {
                        continue;
                    }
                    let x = &groups[gx][cx];
                    let y = &groups[gy][cy];
                    let d = max_len - 2;
                    let g = contract(dr, &x.bracket(y, d + 1), d);
                    if !g.is_zero() {
                        level.push(Node {
                            list: vec![(gx, cx), (gy, cy)],
                            g,
                            counts,
                        });
                    }
                }
            }
        }
    }
    let mut found: Vec<(Vec<(usize, usize)>, C, Vec<u32>)> = Vec::new();
    let mut best_c: Option<Q> = bound.cloned();
    for s in 3..=max_len {
        let mut next = Vec::new();
        if let (Search::MinC, Some(bc), Some(t)) = (mode, &best_c, target) {
            level.retain(|node| list_c(&node.counts, cs, t) < *bc);
        }
        for node in &level {
            for gz in node.list[0].0..g_n {
                for cz in 0..groups[gz].len() {
                    let mut counts = node.counts.clone();
                    counts[gz] += 1;
                    if !within(&counts) {
                        continue;
                    }
                    let g = groups[gz][cz].apply(&node.g, max_len - s);
                    if g.is_zero() {
                        continue;
                    }
                    let mut list = Vec::with_capacity(s as usize);
                    list.push((gz, cz));
                    list.extend_from_slice(&node.list);
                    if target.is_none_or(|t| t == gz) {
                        let v = g.constant_term();
                        if !v.is_zero() {
                            found.push((list.clone(), v, counts.clone()));
                        }
                    }
                    next.push(Node { list, g, counts });
                }
            }
        }
        if let (Search::MinC, Some(t)) = (mode, target) {
            best_c = found.iter().map(|f| list_c(&f.2, cs, t)).chain(best_c.clone()).min();
        }
        level = next;
    }
    if let (Search::MinC, Some(bc), Some(t)) = (mode, &best_c, target) {
        found.retain(|f| list_c(&f.2, cs, t) == *bc);
    }
    found.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)));
    found.into_iter().map(|(l, v, _)| (l, v)).collect()
}

/// Lowest-order nonzero `Re`/`Im` choice: `Re` unless `L_j Re f (0) = 0`.
fn pick_part(field: &VField, f: &Poly, order: u32) -> (HermPoly, bool) {
    let re = HermPoly::new(f.re()).expect("real part is real");
    let x = field.field(false);
    if !x.apply(&re, order).constant_term().is_zero() {
        (re, false)
    } else {
        (HermPoly::new(f.im()).expect("imaginary part is real"), true)
    }
}

#[derive(Clone, Debug, Default)]
pub struct BoundaryOptions {
    /// Longest list searched; `None` means the total degree of `p`.
    pub max_len: Option<u32>,
}

/// Candidate directions for the next field as `(pivot, kind, v)`: the free
/// coordinates (kind 0), then `e_k + e_l` and `e_k + i e_l` (kind 1), then
/// two fixed generic directions through all later free coordinates (kind 2).
fn candidate_directions(n: usize, free: &[usize]) -> Vec<(usize, usize, Vec<C>)> {
    let unit = |k: usize| {
        let mut v = vec![C::zero(); n];
        v[k] = C::one();
        v
    };
    let mut out: Vec<(usize, usize, Vec<C>)> = free.iter().map(|&k| (k, 0, unit(k))).collect();
    for (i, &k) in free.iter().enumerate() {
        for &l in &free[i + 1..] {
            for a in [C::one(), C::i()] {
                let mut v = unit(k);
                v[l] = a;
                out.push((k, 1, v));
            }
        }
    }
    for (i, &k) in free.iter().enumerate() {
        let later = &free[i + 1..];
        if later.len() < 2 {
            continue;
        }
        for imag in [false, true] {
            let mut v = unit(k);
            for (t, &l) in later.iter().enumerate() {
                let a = Q::from_integer(((t + 2) as i64).into());
                v[l] = if imag {
                    C::new(Q::one(), a)
                } else {
                    C::new(a, Q::zero())
                };
            }
            out.push((k, 2, v));
        }
    }
    out
}

pub fn build_boundary_system(r0: &HermPoly) -> Result<BoundarySystem, BoundaryError> {
    build_boundary_system_with(r0, &BoundaryOptions::default())
}

pub fn build_boundary_system_with(r0: &HermPoly, opts: &BoundaryOptions) -> Result<BoundarySystem, BoundaryError> {
    let (r0, _) = to_model_form(r0)?;
    let n = r0.n();
    let f = &r0 - &HermPoly::minus_two_re_z1(n);
    let degree_bound = opts.max_len.unwrap_or_else(|| f.total_degree().max(2));

    // Levi block
    let h0: Mat = (1..n)
        .map(|a| {
            (1..n)
                .map(|b| f.deriv(a, false).deriv(b, true).constant_term())
                .collect()
        })
        .collect();
    let s0 = if n > 1 { rank(&h0) } else { 0 };
    let levi_vars = principal_subset(&h0, s0).into_iter().map(|i| i + 1).collect::<Vec<_>>();
    let mut fields: Vec<VField> = levi_vars.iter().map(|&k| VField::tangent(&f, k)).collect();
    let step_order = |free: usize| 2 * degree_bound + (free.max(1) as u32 - 1) * (degree_bound + 1);
    let order = step_order(n - 1 - s0);
    let mut ctx = Ctx {
        n,
        f: f.poly().clone(),
        dr: dr(&r0),
        levi_vars: levi_vars.clone(),
        order,
    };
    let mut slots: Vec<Slot> = Vec::new();
    let mut used: Vec<usize> = levi_vars.clone();
    loop {
        let mut best: Option<(Q, usize, usize, usize, VField, VList, C)> = None;
        let free: Vec<usize> = (1..n).filter(|k| !used.contains(k)).collect();
        ctx.order = step_order(free.len());
        let base: Vec<Vec<Field>> = slots.iter().map(|s| pair(&fields[s.field])).collect();
        let mut cs: Vec<Option<Q>> = slots.iter().map(|s| Some(s.c.clone())).collect();
        cs.push(None);
        let t = slots.len();
        let mut mixed_below: Option<bool> = None;
        for (k, kind, v) in candidate_directions(n, &free) {
            let bound = match &best {
                Some((bc, ..)) if kind > 0 => Some(bc),
                _ => None,
            };
            if let Some(bc) = bound {
                // a generic field expands into lists over the coordinate
                // fields, so it can only win if such a mixed list does
                let below = *mixed_below.get_or_insert_with(|| {
                    let mut groups = base.clone();
                    groups.push(
                        free.iter()
                            .filter_map(|&j| ctx.tangent_field(j, &slots))
                            .flat_map(|f| pair(&f))
                            .collect(),
                    );
                    tree_search(&ctx.dr, &groups, &cs, Some(t), degree_bound, Search::MinC, Some(bc))
                        .iter()
                        .any(|(l, _)| {
                            let counts: Vec<u32> =
                                (0..=t).map(|g| l.iter().filter(|e| e.0 == g).count() as u32).collect();
                            list_c(&counts, &cs, t) < *bc
                        })
                });
                if !below {
                    break;
                }
            }
            let Some(field) = ctx.tangent_field_along(k, &v, &slots) else {
                continue;
            };
            let mut groups = base.clone();
            groups.push(pair(&field));
            let hits = tree_search(&ctx.dr, &groups, &cs, Some(t), degree_bound, Search::MinC, bound);
            let Some((list, v)) = hits.into_iter().next() else {
                continue;
            };
            let list: Vec<(usize, bool)> = list.into_iter().map(|(g, i)| (g, i == 1)).collect();
            let lt = list.iter().filter(|e| e.0 == t).count() as u32;
            let rest = slots
                .iter()
                .enumerate()
                .map(|(g, s)| Q::from_integer((list.iter().filter(|e| e.0 == g).count() as u32).into()) / &s.c)
                .fold(Q::zero(), |a, b| a + b);
            let c = Q::from_integer(lt.into()) / (Q::one() - rest);
            let len = list.len();
            let better = match &best {
                None => true,
                Some((bc, blen, bkind, bk, ..)) => (&c, len, kind, k) < (bc, *blen, *bkind, *bk),
            };
            if better {
                // group indices -> field indices
                let base = s0;
                let vl = VList(
                    list.iter()
                        .map(|&(g, cj)| {
                            let fi = if g == t { base + slots.len() } else { slots[g].field };
                            (fi, cj)
                        })
                        .collect(),
                );
                best = Some((c, len, kind, k, field, vl, v));
            }
        }
        let Some((c, _, _, k, field, list, value)) = best else {
            break;
        };
        let fi = fields.len();
        fields.push(field);
        let tail = list.tail();
        let fs: Vec<Field> = tail.0.iter().map(|&(i, cj)| fields[i].field(cj)).collect();
        let fval = list_function(&ctx.dr, &fs, ctx.order);
        let (r, uses_im) = pick_part(&fields[fi], &fval, ctx.order);
        used.push(k);
        slots.push(Slot {
            field: fi,
            var: k,
            list,
            c,
            f: fval,
            r,
            uses_im,
            value,
            order: ctx.order - degree_bound,
        });
    }

    let mut lambda = vec![ExtQ::Fin(Q::one())];
    lambda.extend((0..s0).map(|_| ExtQ::Fin(Q::from_integer(2.into()))));
    lambda.extend(slots.iter().map(|s| ExtQ::Fin(s.c.clone())));
    while lambda.len() < n {
        lambda.push(ExtQ::Inf);
    }
    let commutator = InverseWeight::new(lambda).expect("entries are positive");
    Ok(BoundarySystem {
        r0,
        levi_rank: s0,
        levi_vars,
        fields,
        slots,
        commutator,
        degree_bound,
        order,
    })
}

/// First subset (in lexicographic order) of size `k` with a nonsingular
/// principal minor.
fn principal_subset(h: &Mat, k: usize) -> Vec<usize> {
    let m = h.len();
    if k == 0 {
        return Vec::new();
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sub: Mat = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| h[i][j].clone()).collect())
            .collect();
        if rank(&sub) == k {
            return idx;
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return Vec::new();
            }
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for t in i + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn order_of(m: &Mono, w: &[Q]) -> Q {
    m.gamma()
        .iter()
        .zip(w)
        .fold(Q::zero(), |acc, (&g, x)| acc + Q::from_integer(g.into()) * x)
}

/// Terms of `p` of weighted order exactly `mu`.
pub fn weighted_part(p: &Poly, w: &[Q], mu: &Q) -> Poly {
    p.filter(|m, _| order_of(m, w) == *mu)
}

#[derive(Clone, Debug)]
pub struct Audit {
    pub failures: Vec<String>,
}

impl Audit {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Independent re-check of the defining properties of a boundary system.
pub fn audit(bs: &BoundarySystem) -> Audit {
    let mut failures = Vec::new();
    let d = bs.degree_bound;
    let drv = dr(&bs.r0);
    let n = bs.n();
    let f = &bs.r0 - &HermPoly::minus_two_re_z1(n);
    for (i, fld) in bs.fields.iter().enumerate() {
        let x = fld.field(false);
        if !x.apply(&bs.r0, d).is_zero() {
            failures.push(format!("L{} is not tangent", i + 2));
        }
        if i >= bs.levi_rank {
            for &lv in &bs.levi_vars {
                let fb = f.deriv(lv, true);
                let form = x.apply(&fb, d);
                if !form.is_zero() {
                    failures.push(format!("L{} is not Levi-orthogonal to z{}", i + 2, lv + 1));
                }
            }
        }
    }
    let levi: Mat = bs
        .levi_vars
        .iter()
        .map(|&a| {
            bs.levi_vars
                .iter()
                .map(|&b| f.deriv(a, false).deriv(b, true).constant_term())
                .collect()
        })
        .collect();
    if rank(&levi) != bs.levi_rank {
        failures.push("Levi block is singular".into());
    }
    let cs: Vec<Q> = bs.slots.iter().map(|s| s.c.clone()).collect();
    for (si, s) in bs.slots.iter().enumerate() {
        let name = format!("slot L{}", s.field + 2);
        // (1)
        match bs.list_derivative(&s.list) {
            Ok(v) if !v.constant_term().is_zero() => {}
            _ => failures.push(format!("{name}: list value vanishes at 0")),
        }
        // (2)
        let tail = bs.list_derivative(&s.list.tail()).unwrap_or_else(|_| Poly::zero(n));
        let part = if s.uses_im { tail.im() } else { tail.re() };
        if part.truncate(s.order) != s.r.poly().truncate(s.order) {
            failures.push(format!("{name}: r differs from the list derivative"));
        }
        let x = bs.fields[s.field].field(false);
        if x.apply(&s.r, bs.order).constant_term().is_zero() {
            failures.push(format!("{name}: L r vanishes at 0"));
        }
        // (3)
        for later in &bs.slots[si + 1..] {
            let y = bs.fields[later.field].field(false);
            if !y.apply(&s.r, d).is_zero() {
                failures.push(format!("L{} does not annihilate r{}", later.field + 2, s.field + 2));
            }
        }
        // (4)
        let l = &s.list.0;
        if l.first().map(|e| e.0) != Some(s.field) || l.windows(2).any(|w| w[0].0 < w[1].0) {
            failures.push(format!("{name}: list is not ordered with first entry in S_j"));
        }
        let prior: Q = bs.slots[..si]
            .iter()
            .map(|p| Q::from_integer(s.list.count(p.field).into()) / &p.c)
            .fold(Q::zero(), |a, b| a + b);
        if prior >= Q::one() {
            failures.push(format!("{name}: list is not admissible"));
        }
        // (5)
        let total: Q = bs.slots[..=si]
            .iter()
            .map(|p| Q::from_integer(s.list.count(p.field).into()) / &p.c)
            .fold(Q::zero(), |a, b| a + b);
        if !total.is_one() || l.iter().any(|e| e.0 > s.field || e.0 < bs.levi_rank) {
            failures.push(format!("{name}: counts do not satisfy sum l/c = 1"));
        }
    }
    // (6)
    let groups: Vec<Vec<Field>> = bs.slots.iter().map(|s| pair(&bs.fields[s.field])).collect();
    let known: Vec<Option<Q>> = cs.into_iter().map(Some).collect();
    for (list, _) in tree_search(&drv, &groups, &known, None, d, Search::All, None) {
        failures.push(format!("a list of weight below one is nonzero: {list:?}"));
    }
    Audit { failures }
}

#[derive(Clone, Debug)]
pub struct FirstBlockNormalization {
    /// `z_j -> maps[j](z)`.
    pub maps: Vec<Poly>,
    /// Holomorphic tails `φ_j` removed from the first block.
    pub tails: Vec<Poly>,
    pub model: HermPoly,
    pub system: BoundarySystem,
    /// `r_j = κ_j Re z_j` on the first block of the new model.
    pub kappa: Vec<Option<Q>>,
    /// `r̃_j = r_j / κ_j`.
    pub normalized: Vec<Option<Poly>>,
    /// Every `r̃_j` equals `Re z_j` exactly.
    pub fixpoint: bool,
}

/// `r_j = Re g_j` with `g_j` holomorphic on the first block.
fn harmonic_generators(bs: &BoundarySystem) -> Result<Vec<(usize, Poly)>, BoundaryError> {
    let w = bs.var_weights();
    let mut out = Vec::new();
    for i in bs.first_block() {
        let s = &bs.slots[i];
        let lead = weighted_part(&s.r, &w, &s.c.recip());
        if let Some((m, c)) = lead.iter().find(|(m, _)| !m.is_pure()) {
            return Err(BoundaryError::NotHarmonic {
                slot: s.field + 2,
                term: Poly::term(lead.n(), m.clone(), c.clone()),
            });
        }
        let g = lead
            .filter(|m, _| m.beta.iter().all(|&b| b == 0))
            .scale(&C::new(Q::from_integer(2.into()), Q::zero()));
        out.push((s.var, g));
    }
    Ok(out)
}

fn re_z(n: usize, k: usize) -> Poly {
    let half = C::new(Q::new(1.into(), 2.into()), Q::zero());
    let mut a = vec![0; n];
    a[k] = 1;
    let m = Mono::new(a, vec![0; n]);
    &Poly::term(n, m.conj(), half.clone()) + &Poly::term(n, m, half)
}

pub fn normalize_first_block(bs: &BoundarySystem) -> Result<FirstBlockNormalization, BoundaryError> {
    let n = bs.n();
    let block = bs.first_block();
    if block.is_empty() {
        return Err(BoundaryError::NoFirstBlock);
    }
    let gens = harmonic_generators(bs)?;
    let vars: Vec<usize> = gens.iter().map(|g| g.0).collect();
    let lin = |k: usize| {
        let mut a = vec![0; n];
        a[k] = 1;
        Mono::new(a, vec![0; n])
    };
    let a: Mat = gens
        .iter()
        .map(|(_, g)| vars.iter().map(|&v| g.coeff(&lin(v))).collect())
        .collect();
    let first_slot = bs.slots[block[0]].field + 2;
    let ainv = inverse(&a).ok_or(BoundaryError::Inconsistent { slot: first_slot })?;
    let tails: Vec<Poly> = gens
        .iter()
        .map(|(_, g)| g.filter(|m, _| !vars.iter().any(|&v| *m == lin(v))))
        .collect();
    // z -> A^{-1}(D z - φ) leaves g_j = d_j z_j; d_j is absorbed into r̃_j
    let diag: Vec<C> = (0..vars.len())
        .map(|i| if a[i][i].is_zero() { C::one() } else { a[i][i].clone() })
        .collect();
    let mut maps: Vec<Poly> = (0..n).map(|k| Poly::var(n, k)).collect();
    for (i, &v) in vars.iter().enumerate() {
        let mut m = Poly::zero(n);
        for (j, &u) in vars.iter().enumerate() {
            let w = &Poly::var(n, u).scale(&diag[j]) - &tails[j];
            m = &m + &w.scale(&ainv[i][j]);
        }
        maps[v] = m;
    }
    let moved = HermPoly::new(bs.r0.compose_holo(&maps)).expect("holomorphic substitution keeps real-valuedness");
    let (model, _) = eliminate_harmonic(&moved)?;
    let system = build_boundary_system(&model)?;
    let w = system.var_weights();
    let mut kappa = Vec::new();
    let mut normalized = Vec::new();
    for &v in &vars {
        let slot = system.slots.iter().find(|s| s.var == v);
        let k = slot.and_then(|s| {
            let lead = weighted_part(&s.r, &w, &s.c.recip());
            let c = lead.coeff(&lin(v));
            let want = &Poly::term(n, lin(v), c.clone()) + &Poly::term(n, lin(v).conj(), conj(&c));
            (c.im.is_zero() && c.re.is_positive() && lead == want).then(|| &c.re * Q::from_integer(2.into()))
        });
        normalized.push(match (slot, &k) {
            (Some(s), Some(k)) => Some(s.r.poly().scale_q(&k.recip())),
            _ => None,
        });
        kappa.push(k);
    }
    let fixpoint = system.first_block().len() == block.len()
        && vars
            .iter()
            .zip(&normalized)
            .all(|(&v, r)| r.as_ref() == Some(&re_z(n, v)));
    Ok(FirstBlockNormalization {
        maps,
        tails,
        model,
        system,
        kappa,
        normalized,
        fixpoint,
    })
}

impl FirstBlockNormalization {
    pub fn to_json(&self) -> Value {
        json!({
            "maps": self.maps.iter().enumerate()
                .map(|(j, m)| json!({"var": format!("z{}", j + 1), "map": m.to_string()}))
                .collect::<Vec<_>>(),
            "tails": self.tails.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            "model": self.model.to_string(),
            "model_json": crate::json::poly_to_value(&self.model),
            "kappa": self.kappa.iter().map(|k| k.as_ref().map(fmt_q)).collect::<Vec<_>>(),
            "normalized": self.normalized.iter().map(|r| r.as_ref().map(|r| r.to_string())).collect::<Vec<_>>(),
            "fixpoint": self.fixpoint,
            "commutator": self.system.commutator.to_strings(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Torsion {
    NotApplicable {
        reason: String,
    },
    Absent {
        var: usize,
        c1: C,
    },
    /// `f = c1 z_j + (obstruction)` where the obstruction is not pluriharmonic.
    Present {
        var: usize,
        c1: C,
        c2: C,
        obstruction: Poly,
    },
}

#[derive(Clone, Debug)]
pub struct TorsionReport {
    pub torsion: Torsion,
    /// Weighted leading part of `ℒ'_j ∂r` at the slot examined.
    pub lead: Option<Poly>,
    /// Leading part of the plain derivative of `p` with the list's counts.
    pub direct: Option<Poly>,
}

impl TorsionReport {
    pub fn has_torsion(&self) -> bool {
        matches!(self.torsion, Torsion::Present { .. })
    }

    pub fn to_json(&self) -> Value {
        let t = match &self.torsion {
            Torsion::NotApplicable { reason } => json!({"status": "not-applicable", "reason": reason}),
            Torsion::Absent { var, c1 } => json!({"status": "none", "var": format!("z{}", var + 1), "c1": c_value(c1)}),
            Torsion::Present {
                var,
                c1,
                c2,
                obstruction,
            } => json!({
                "status": "torsion",
                "var": format!("z{}", var + 1),
                "c1": c_value(c1),
                "c2": c_value(c2),
                "obstruction": obstruction.to_string(),
            }),
        };
        json!({
            "torsion": t,
            "lead": self.lead.as_ref().map(|p| p.to_string()),
            "direct": self.direct.as_ref().map(|p| p.to_string()),
        })
    }
}

impl fmt::Display for TorsionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.torsion {
            Torsion::NotApplicable { reason } => write!(f, "not applicable: {reason}"),
            Torsion::Absent { var, c1 } => write!(f, "no torsion at z{} (c1 = {})", var + 1, fmt_c(c1)),
            Torsion::Present {
                var,
                c1,
                c2,
                obstruction,
            } => write!(
                f,
                "torsion at z{}: f = ({}) z{} + {}; c2 = {}",
                var + 1,
                fmt_c(c1),
                var + 1,
                obstruction,
                fmt_c(c2)
            ),
        }
    }
}

/// Looks at the first slot past the first block and splits the leading part
/// of `ℒ'_j ∂r` into its linear term in `z_j` and the non-pluriharmonic rest.
pub fn detect_torsion(bs: &BoundarySystem) -> TorsionReport {
    let block = bs.first_block();
    let Some(s) = bs.slots.get(block.len()) else {
        return TorsionReport {
            torsion: Torsion::NotApplicable {
                reason: "no boundary-system slot beyond the first block".into(),
            },
            lead: None,
            direct: None,
        };
    };
    let n = bs.n();
    let w = bs.var_weights();
    let mu = s.c.recip();
    let lead = weighted_part(&s.f, &w, &mu);
    let mut lin = vec![0; n];
    lin[s.var] = 1;
    let c1 = lead.coeff(&Mono::new(lin, vec![0; n]));
    let obstruction = lead.filter(|m, _| !m.is_pure());

    let f = &bs.r0 - &HermPoly::minus_two_re_z1(n);
    let mut alpha = vec![0; n];
    let mut beta = vec![0; n];
    for &(i, cj) in &s.list.tail().0 {
        let v = bs.fields[i].direction;
        if cj {
            beta[v] += 1;
        } else {
            alpha[v] += 1;
        }
    }
    let direct = weighted_part(&f.deriv_multi(&alpha, &beta), &w, &mu);

    let torsion = match obstruction.iter().next() {
        None => Torsion::Absent { var: s.var, c1 },
        Some((_, c2)) => Torsion::Present {
            var: s.var,
            c1,
            c2: c2.clone(),
            obstruction: obstruction.clone(),
        },
    };
    TorsionReport {
        torsion,
        lead: Some(lead),
        direct: Some(direct),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn lam(bs: &BoundarySystem) -> String {
        bs.commutator.to_string()
    }

    #[test]
    fn strongly_pseudoconvex() {
        let r = parse_poly("-2Re(z1) + |z2|^2 + |z3|^2", 3).unwrap();
        let bs = build_boundary_system(&r).unwrap();
        assert_eq!(lam(&bs), "(1, 2, 2)");
        assert_eq!(bs.levi_rank, 2);
        assert!(bs.slots.is_empty());
        assert!(audit(&bs).ok());
        assert!(matches!(detect_torsion(&bs).torsion, Torsion::NotApplicable { .. }));
    }

    #[test]
    fn bloom() {
        let r = parse_poly("Re(z1) + (Re(z2) + |z3|^2)^2", 3).unwrap();
        let bs = build_boundary_system(&r).unwrap();
        assert_eq!(lam(&bs), "(1, 2, inf)");
        assert!(audit(&bs).ok(), "{:?}", audit(&bs).failures);
    }

    #[test]
    fn eqq() {
        let r = parse_poly("-2Re(z1) + |z2|^8 + |z2|^4|z3|^6", 3).unwrap();
        let bs = build_boundary_system(&r).unwrap();
        assert_eq!(lam(&bs), "(1, 8, 12)");
        assert!(audit(&bs).ok(), "{:?}", audit(&bs).failures);
    }

    #[test]
    fn levi_value() {
        let r = parse_poly("-2Re(z1) + |z2|^2", 2).unwrap();
        let f = &r - &HermPoly::minus_two_re_z1(2);
        let l2 = VField::tangent(&f, 1);
        let v = list_derivative(&r, &[l2], &VList(vec![(0, true), (0, false)]), 4).unwrap();
        assert!(!v.constant_term().is_zero());
    }

    #[test]
    fn sum0_ties_go_to_lower_var() {
        let r = parse_poly("-2Re(z1) + |z2|^4 + |z3|^4 + |z4|^4", 4).unwrap();
        let bs = build_boundary_system(&r).unwrap();
        assert_eq!(lam(&bs), "(1, 4, 4, 4)");
        assert_eq!(bs.slots.iter().map(|s| s.var).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(audit(&bs).ok(), "{:?}", audit(&bs).failures);
        assert!(matches!(detect_torsion(&bs).torsion, Torsion::NotApplicable { .. }));
    }

    #[test]
    fn no_torsion_for_sum_of_powers() {
        let r = parse_poly("-2Re(z1) + |z2|^6 + |z3|^8 + |z4|^10", 4).unwrap();
        let bs = build_boundary_system(&r).unwrap();
        assert_eq!(lam(&bs), "(1, 6, 8, 10)");
        let t = detect_torsion(&bs);
        assert!(matches!(t.torsion, Torsion::Absent { var: 2, .. }), "{t}");
    }

    #[test]
    fn torsion_example() {
        let r = parse_poly(
            "-2Re(z1) + |z2|^6 + |z2|^2|z3|^6 + |z2|^4|z3|^2|z4|^2 + |z2|^2|z3|^4|z4|^4 \
             + 1/5 Re(|z2|^2 z3^2 conj(z3)^3 |z4|^2) + |z3|^8|z4|^2",
            4,
        )
        .unwrap();
        let t0 = std::time::Instant::now();
        let bs = build_boundary_system(&r).unwrap();
        eprintln!("build: {:?}", t0.elapsed());
        assert_eq!(lam(&bs), "(1, 6, 9, 18)");
        let t = detect_torsion(&bs);
        match &t.torsion {
            Torsion::Present {
                var,
                c1,
                c2,
                obstruction,
            } => {
                assert_eq!(*var, 2);
                assert!(!c1.is_zero() && !c2.is_zero());
                let z4 = Mono::new(vec![0, 0, 0, 1], vec![0, 0, 0, 1]);
                assert_eq!(*obstruction, Poly::term(4, z4, c2.clone()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn first_block_fixpoint() {
        let r = parse_poly("-2Re(z1) + |z2 + z3^2|^4 + |z3|^8", 3).unwrap();
        let bs = build_boundary_system(&r).unwrap();
        assert_eq!(lam(&bs), "(1, 4, 8)");
        let nb = normalize_first_block(&bs).unwrap();
        assert!(nb.fixpoint, "{}", nb.to_json());
        assert!(nb.kappa[0].as_ref().map_or(false, |k| k > &Q::zero()));
    }
}
