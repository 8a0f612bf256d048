//! Complex Hessians and positivity of the Levi form.
//!
//! [`psd_verdict`] tries, in order, an exact Gram-matrix certificate, a
//! Cauchy-Schwarz pairing certificate on torus directions, and seeded
//! rational sampling for a refuting point.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::json::{c_value, mat_value, q_value};
use crate::linalg::{check_ldl, hermitian_psd, kernel, quad_form, rank, Ldl, Mat, PsdResult};
use crate::model::weighted_order;
use crate::num::{c_re, conj, norm2, q, qf, C, Q};
use crate::poly::{HermPoly, Mono, Poly};
use crate::weights::Weight;

/// `H[j][k] = ∂_{z_j} ∂_{z̄_k} p`.
pub fn complex_hessian(p: &Poly) -> Vec<Vec<Poly>> {
    let n = p.n();
    (0..n)
        .map(|j| {
            let dj = p.deriv(j, false);
            (0..n).map(|k| dj.deriv(k, true)).collect()
        })
        .collect()
}

/// Evaluates the Hessian at `z`.
pub fn hessian_at(h: &[Vec<Poly>], z: &[C]) -> Mat {
    h.iter().map(|row| row.iter().map(|e| e.eval(z)).collect()).collect()
}

/// `Σ H_{jk}(z) a_j conj(a_k)`.
pub fn levi_value(h: &[Vec<Poly>], z: &[C], a: &[C]) -> Q {
    let m = hessian_at(h, z);
    let ac: Vec<C> = a.iter().map(conj).collect();
    quad_form(&m, &ac)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    CertifiedPsd,
    Refuted,
    Unknown,
}

impl VerdictKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictKind::CertifiedPsd => "CertifiedPSD",
            VerdictKind::Refuted => "Refuted",
            VerdictKind::Unknown => "Unknown",
        }
    }
}

/// `p - pure(p) = Σ_k d_k |Σ_α L[α][k] z^α|^2` over the listed monomials.
#[derive(Clone, Debug)]
pub struct GramCertificate {
    pub basis: Vec<Vec<u32>>,
    pub ldl: Ldl,
}

#[derive(Clone, Debug)]
pub enum Certificate {
    Gram(GramCertificate),
    Pairing(PairingReport),
}

/// Point `z` and direction `a` with negative Levi form.
#[derive(Clone, Debug)]
pub struct Witness {
    pub z: Vec<C>,
    pub a: Vec<C>,
    pub value: Q,
}

#[derive(Clone, Debug)]
pub struct PositivityVerdict {
    pub kind: VerdictKind,
    pub tier: Option<u8>,
    pub certificate: Option<Certificate>,
    pub witness: Option<Witness>,
    pub samples_tried: usize,
    /// Pairing analysis, kept even when it did not certify.
    pub pairing: Option<PairingReport>,
}

#[derive(Clone, Debug)]
pub struct PsdOptions {
    pub samples: usize,
    pub seed: u64,
    pub cs_lattice_denominator: u32,
}

impl Default for PsdOptions {
    fn default() -> Self {
        PsdOptions {
            samples: 400,
            seed: 0,
            cs_lattice_denominator: 4,
        }
    }
}

fn strip_pure(p: &Poly) -> Poly {
    p.filter(|m, _| !m.is_pure())
}

/// Exact check that the non-pure part of `p` is a nonnegative Hermitian form
/// in holomorphic monomials.
pub fn gram_certificate(p: &Poly) -> Result<GramCertificate, (Vec<Vec<u32>>, Vec<C>)> {
    let core = strip_pure(p);
    let mut basis: Vec<Vec<u32>> = Vec::new();
    for (m, _) in core.iter() {
        basis.push(m.alpha.clone());
        basis.push(m.beta.clone());
    }
    basis.sort_by(|a, b| {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        da.cmp(&db).then_with(|| a.cmp(b))
    });
    basis.dedup();
    let idx: BTreeMap<&Vec<u32>, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let k = basis.len();
    let mut g: Mat = vec![vec![C::zero(); k]; k];
    for (m, c) in core.iter() {
        g[idx[&m.alpha]][idx[&m.beta]] = c.clone();
    }
    match hermitian_psd(&g) {
        PsdResult::Psd(ldl) => Ok(GramCertificate { basis, ldl }),
        PsdResult::Negative(x, _) => Err((basis, x)),
    }
}

/// Replays a Gram certificate by expanding the sum of squares.
pub fn replay_gram(p: &Poly, cert: &GramCertificate) -> bool {
    let n = p.n();
    if cert.ldl.d.iter().any(|d| *d < Q::zero()) {
        return false;
    }
    let k = cert.basis.len();
    if cert.ldl.l.len() != k {
        return false;
    }
    let mut sum = Poly::zero(n);
    for col in 0..k {
        if cert.ldl.d[col].is_zero() {
            continue;
        }
        let mut h = Poly::zero(n);
        for (row, alpha) in cert.basis.iter().enumerate() {
            h.add_term(Mono::new(alpha.clone(), vec![0; n]), cert.ldl.l[row][col].clone());
        }
        sum = &sum + &(&h * &h.conj()).scale(&c_re(cert.ldl.d[col].clone()));
    }
    sum == strip_pure(p)
}

/// One use of a balanced pair against a mixed term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingUse {
    pub gamma1: Vec<u32>,
    pub gamma2: Vec<u32>,
    pub f1: Q,
    pub f2: Q,
}

#[derive(Clone, Debug)]
pub struct MixedEntry {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub coeff: C,
    /// Every pair of balanced terms whose exponents add up to `α + β`.
    pub candidates: Vec<(Vec<u32>, Vec<u32>)>,
    /// Pairings chosen by the sound search (empty if it failed).
    pub chosen: Vec<PairingUse>,
    /// For each candidate, the common kernel `γ1·a = γ2·a = 0` (rows).
    pub kernels: Vec<Vec<Vec<u32>>>,
    /// Whether the joint kernel of all candidate systems is `{0}`.
    pub joint_kernel_trivial: bool,
    /// Whether the intersection over candidates of the unions of partner
    /// hyperplanes lies inside `{α·a = 0} ∪ {β·a = 0}`.
    pub bad_set_ok: bool,
}

/// Outcome of [`cauchy_schwarz_pairing`].
#[derive(Clone, Debug)]
pub struct PairingReport {
    pub certified: bool,
    pub mixed: Vec<MixedEntry>,
    /// Fraction of each balanced coefficient left after absorption.
    pub remaining: Vec<(Vec<u32>, Q)>,
    pub failure: Option<String>,
}

// coefficient vector of (g1·a)(g2·a) in the basis a_i a_j, i <= j
fn quad_coeffs(g1: &[u32], g2: &[u32]) -> Vec<Q> {
    let n = g1.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                g1[i] * g2[i]
            } else {
                g1[i] * g2[j] + g1[j] * g2[i]
            };
            out.push(Q::from_integer(v.into()));
        }
    }
    out
}

fn outer_add(m: &mut Mat, c: &[Q], w: &Q) {
    for i in 0..c.len() {
        for j in 0..c.len() {
            let v = w * &c[i] * &c[j];
            m[i][j] = &m[i][j] + c_re(v);
        }
    }
}

/// Sound check for one mixed term: `Σ_k f1 f2 A1 A2 |q_k(a)|^2 >= |C|^2 |q_0(a)|^2`
/// as a Gram inequality over quadratic monomials in `a`.
fn pairing_inequality_holds(alpha: &[u32], beta: &[u32], c2: &Q, uses: &[(&[u32], &[u32], Q)]) -> bool {
    let dim = alpha.len() * (alpha.len() + 1) / 2;
    let mut m: Mat = vec![vec![C::zero(); dim]; dim];
    for (g1, g2, w) in uses {
        outer_add(&mut m, &quad_coeffs(g1, g2), w);
    }
    outer_add(&mut m, &quad_coeffs(alpha, beta), &-c2.clone());
    matches!(hermitian_psd(&m), PsdResult::Psd(_))
}

fn subspace_in_union(rows: &[Vec<u32>], alpha: &[u32], beta: &[u32]) -> bool {
    // S = {a : rows·a = 0}; α·a vanishes on S iff α is in the row span
    let base: Mat = rows
        .iter()
        .map(|r| r.iter().map(|&x| c_re(Q::from_integer(x.into()))).collect())
        .collect();
    let r0 = if base.is_empty() { 0 } else { rank(&base) };
    let in_span = |v: &[u32]| {
        let mut m = base.clone();
        m.push(v.iter().map(|&x| c_re(Q::from_integer(x.into()))).collect());
        rank(&m) == r0
    };
    in_span(alpha) || in_span(beta)
}

/// Cauchy-Schwarz absorption of the mixed terms of `p` into its balanced
/// terms, on the torus Levi form `Σ C_{αβ} (α·a) conj(β·a) z^α z̄^β`.
pub fn cauchy_schwarz_pairing(p: &Poly, denominator: u32) -> PairingReport {
    let core = strip_pure(p);
    let n = p.n();
    let mut balanced: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    let mut mixed: Vec<(Vec<u32>, Vec<u32>, C)> = Vec::new();
    for (m, c) in core.iter() {
        if m.is_balanced() {
            balanced.insert(m.alpha.clone(), c.re.clone());
        } else if m.alpha < m.beta {
            mixed.push((m.alpha.clone(), m.beta.clone(), c.clone()));
        }
    }
    let mut report = PairingReport {
        certified: false,
        mixed: Vec::new(),
        remaining: balanced.keys().map(|g| (g.clone(), Q::one())).collect(),
        failure: None,
    };
    if let Some((g, _)) = balanced.iter().find(|(_, a)| **a < Q::zero()) {
        report.failure = Some(format!(
            "balanced term {} has a negative coefficient",
            Poly::term(n, Mono::new(g.clone(), g.clone()), C::one())
        ));
    }
    let keys: Vec<Vec<u32>> = balanced
        .iter()
        .filter(|(_, a)| **a > Q::zero())
        .map(|(g, _)| g.clone())
        .collect();
    for (alpha, beta, c) in &mixed {
        let target: Vec<u32> = alpha.iter().zip(beta).map(|(a, b)| a + b).collect();
        let mut cands = Vec::new();
        for (i, g1) in keys.iter().enumerate() {
            for g2 in &keys[i..] {
                if g1.iter().zip(g2).zip(&target).all(|((a, b), t)| a + b == *t) {
                    cands.push((g1.clone(), g2.clone()));
                }
            }
        }
        let kernels: Vec<Vec<Vec<u32>>> = cands.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect();
        // directions p does not depend on stay out of the kernel
        let active: Vec<usize> = (0..n).filter(|&j| p.degree_in(j) > 0).collect();
        let all_rows: Mat = cands
            .iter()
            .flat_map(|(a, b)| [a, b])
            .map(|g| active.iter().map(|&j| c_re(Q::from_integer(g[j].into()))).collect())
            .collect();
        let joint_kernel_trivial = !cands.is_empty() && kernel(&all_rows, active.len()).is_empty();
        // choose one hyperplane per candidate; every resulting subspace must
        // sit inside H_α ∪ H_β
        let mut bad_set_ok = !cands.is_empty();
        if bad_set_ok {
            let k = cands.len().min(16);
            for mask in 0u32..(1 << k) {
                let rows: Vec<Vec<u32>> = (0..k)
                    .map(|i| {
                        if mask & (1 << i) == 0 {
                            cands[i].0.clone()
                        } else {
                            cands[i].1.clone()
                        }
                    })
                    .collect();
                if !subspace_in_union(&rows, alpha, beta) {
                    bad_set_ok = false;
                    break;
                }
            }
        }
        report.mixed.push(MixedEntry {
            alpha: alpha.clone(),
            beta: beta.clone(),
            coeff: c.clone(),
            candidates: cands,
            chosen: Vec::new(),
            kernels,
            joint_kernel_trivial,
            bad_set_ok,
        });
    }
    if report.failure.is_some() {
        return report;
    }
    // options per mixed term: one or two candidates with lattice fractions
    let d = denominator.max(1);
    let lattice: Vec<Q> = (1..=d).map(|k| qf(k as i64, d as i64)).collect();
    let mut options: Vec<Vec<Vec<PairingUse>>> = Vec::new();
    for e in &report.mixed {
        let c2 = norm2(&e.coeff);
        let mut opts: Vec<(Q, Vec<PairingUse>)> = Vec::new();
        let nc = e.candidates.len();
        let mut subsets: Vec<Vec<usize>> = (0..nc).map(|i| vec![i]).collect();
        for i in 0..nc {
            for j in i + 1..nc {
                subsets.push(vec![i, j]);
            }
        }
        for sub in subsets {
            let mut fr: Vec<Vec<(Q, Q)>> = vec![vec![]];
            for _ in &sub {
                let mut next = Vec::new();
                for pre in &fr {
                    for f1 in &lattice {
                        for f2 in &lattice {
                            let mut v = pre.clone();
                            v.push((f1.clone(), f2.clone()));
                            next.push(v);
                        }
                    }
                }
                fr = next;
            }
            for choice in fr {
                let uses: Vec<PairingUse> = sub
                    .iter()
                    .zip(&choice)
                    .map(|(&i, (f1, f2))| PairingUse {
                        gamma1: e.candidates[i].0.clone(),
                        gamma2: e.candidates[i].1.clone(),
                        f1: f1.clone(),
                        f2: f2.clone(),
                    })
                    .collect();
                let weighted: Vec<(&[u32], &[u32], Q)> = uses
                    .iter()
                    .map(|u| {
                        (
                            u.gamma1.as_slice(),
                            u.gamma2.as_slice(),
                            &u.f1 * &u.f2 * &balanced[&u.gamma1] * &balanced[&u.gamma2],
                        )
                    })
                    .collect();
                if pairing_inequality_holds(&e.alpha, &e.beta, &c2, &weighted) {
                    let cost = uses.iter().fold(Q::zero(), |a, u| a + &u.f1 + &u.f2);
                    opts.push((cost, uses));
                }
            }
        }
        opts.sort_by(|a, b| a.0.cmp(&b.0));
        options.push(opts.into_iter().map(|(_, u)| u).collect());
    }
    if let Some(i) = options.iter().position(|o| o.is_empty()) {
        let e = &report.mixed[i];
        report.failure = Some(format!(
            "no pairing absorbs the mixed term {}",
            Poly::term(n, Mono::new(e.alpha.clone(), e.beta.clone()), e.coeff.clone())
        ));
        return report;
    }
    // backtracking over the options with the per-term budget <= 1
    let mut budget: BTreeMap<Vec<u32>, Q> = balanced.keys().map(|g| (g.clone(), Q::one())).collect();
    let mut chosen: Vec<usize> = vec![0; options.len()];
    let mut steps = 0usize;
    fn dfs(
        i: usize,
        options: &[Vec<Vec<PairingUse>>],
        budget: &mut BTreeMap<Vec<u32>, Q>,
        chosen: &mut Vec<usize>,
        steps: &mut usize,
    ) -> bool {
        if i == options.len() {
            return true;
        }
        for (k, uses) in options[i].iter().enumerate() {
            *steps += 1;
            if *steps > 200_000 {
                return false;
            }
            let ok = uses.iter().all(|u| {
                let need1 = if u.gamma1 == u.gamma2 {
                    &u.f1 + &u.f2
                } else {
                    u.f1.clone()
                };
                budget[&u.gamma1] >= need1 && (u.gamma1 == u.gamma2 || budget[&u.gamma2] >= u.f2)
            });
            if !ok {
                continue;
            }
            for u in uses {
                *budget.get_mut(&u.gamma1).unwrap() -= &u.f1;
                *budget.get_mut(&u.gamma2).unwrap() -= &u.f2;
            }
            // the combined usage across pairings must also fit
            if budget.values().all(|b| *b >= Q::zero()) {
                chosen[i] = k;
                if dfs(i + 1, options, budget, chosen, steps) {
                    return true;
                }
            }
            for u in uses {
                *budget.get_mut(&u.gamma1).unwrap() += &u.f1;
                *budget.get_mut(&u.gamma2).unwrap() += &u.f2;
            }
        }
        false
    }
    if dfs(0, &options, &mut budget, &mut chosen, &mut steps) {
        for (i, e) in report.mixed.iter_mut().enumerate() {
            e.chosen = options[i][chosen[i]].clone();
        }
        report.remaining = budget.into_iter().collect();
        report.certified = true;
    } else {
        report.failure = Some("the balanced budget cannot absorb all mixed terms".into());
    }
    report
}

/// Independent replay of a pairing certificate.
pub fn replay_pairing(p: &Poly, rep: &PairingReport) -> bool {
    if !rep.certified {
        return false;
    }
    let core = strip_pure(p);
    let mut used: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    let mut seen = 0;
    for (m, c) in core.iter() {
        if m.is_balanced() {
            if c.re < Q::zero() {
                return false;
            }
            continue;
        }
        if m.alpha > m.beta {
            continue;
        }
        seen += 1;
        let Some(e) = rep.mixed.iter().find(|e| e.alpha == m.alpha && e.beta == m.beta) else {
            return false;
        };
        let target: Vec<u32> = m.gamma();
        let mut weighted = Vec::new();
        for u in &e.chosen {
            let s: Vec<u32> = u.gamma1.iter().zip(&u.gamma2).map(|(a, b)| a + b).collect();
            if s != target || u.f1 <= Q::zero() || u.f2 <= Q::zero() {
                return false;
            }
            let a1 = core.coeff(&Mono::new(u.gamma1.clone(), u.gamma1.clone())).re;
            let a2 = core.coeff(&Mono::new(u.gamma2.clone(), u.gamma2.clone())).re;
            *used.entry(u.gamma1.clone()).or_insert_with(Q::zero) += &u.f1;
            *used.entry(u.gamma2.clone()).or_insert_with(Q::zero) += &u.f2;
            weighted.push((u.gamma1.as_slice(), u.gamma2.as_slice(), &u.f1 * &u.f2 * a1 * a2));
        }
        if !pairing_inequality_holds(&m.alpha, &m.beta, &norm2(c), &weighted) {
            return false;
        }
    }
    seen == rep.mixed.len() && used.values().all(|u| *u <= Q::one())
}

fn unit_phases() -> Vec<C> {
    let mut out = vec![
        C::new(q(1), q(0)),
        C::new(q(-1), q(0)),
        C::new(q(0), q(1)),
        C::new(q(0), q(-1)),
    ];
    for t in [qf(1, 3), qf(1, 2), qf(2, 3), qf(3, 2), q(2), q(3)] {
        let d = Q::one() + &t * &t;
        let re = (Q::one() - &t * &t) / &d;
        let im = (q(2) * &t) / &d;
        out.push(C::new(re.clone(), im.clone()));
        out.push(C::new(re.clone(), -im.clone()));
        out.push(C::new(-re.clone(), im.clone()));
        out.push(C::new(-re, -im));
    }
    out
}

fn moduli() -> Vec<Q> {
    vec![qf(1, 2), q(1), q(2), q(3), q(5), q(10)]
}

// Structured grid point number `i` over the active variables, real positive.
fn grid_point(i: usize, active: &[usize], n: usize) -> Option<Vec<C>> {
    let ms = moduli();
    let total = ms.len().checked_pow(active.len() as u32)?;
    if i >= total {
        return None;
    }
    let mut z = vec![C::zero(); n];
    let mut k = i;
    for &j in active {
        z[j] = c_re(ms[k % ms.len()].clone());
        k /= ms.len();
    }
    Some(z)
}

fn random_point(rng: &mut ChaCha8Rng, active: &[usize], n: usize) -> Vec<C> {
    let ms = moduli();
    let ph = unit_phases();
    let mut z = vec![C::zero(); n];
    for &j in active {
        let r = ms[rng.gen_range(0..ms.len())].clone();
        let u = ph[rng.gen_range(0..ph.len())].clone();
        z[j] = u * c_re(r);
    }
    z
}

/// Searches for a point where the Levi form of `p` has a negative direction.
/// Grid and random points alternate.
pub fn sample_refutation(p: &Poly, samples: usize, seed: u64) -> (Option<Witness>, usize) {
    let n = p.n();
    let h = complex_hessian(p);
    let active: Vec<usize> = (0..n).filter(|&j| p.degree_in(j) > 0).collect();
    if active.is_empty() {
        return (None, 0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid_i = 0;
    for s in 0..samples {
        let z = if s % 2 == 0 {
            match grid_point(grid_i, &active, n) {
                Some(z) => {
                    grid_i += 1;
                    z
                }
                None => random_point(&mut rng, &active, n),
            }
        } else {
            random_point(&mut rng, &active, n)
        };
        let m = hessian_at(&h, &z);
        if let PsdResult::Negative(x, value) = hermitian_psd(&m) {
            // the form is Σ H_jk a_j conj(a_k) = x* H x with x = conj(a)
            let a: Vec<C> = x.iter().map(conj).collect();
            debug_assert_eq!(levi_value(&h, &z, &a), value);
            return (Some(Witness { z, a, value }), s + 1);
        }
    }
    (None, samples)
}

/// Three-tier positivity verdict for the Levi form of `p`.
pub fn psd_verdict(p: &HermPoly, opts: &PsdOptions) -> PositivityVerdict {
    let poly = p.poly();
    if let Ok(cert) = gram_certificate(poly) {
        return PositivityVerdict {
            kind: VerdictKind::CertifiedPsd,
            tier: Some(1),
            certificate: Some(Certificate::Gram(cert)),
            witness: None,
            samples_tried: 0,
            pairing: None,
        };
    }
    let rep = cauchy_schwarz_pairing(poly, opts.cs_lattice_denominator);
    if rep.certified {
        return PositivityVerdict {
            kind: VerdictKind::CertifiedPsd,
            tier: Some(2),
            certificate: Some(Certificate::Pairing(rep.clone())),
            witness: None,
            samples_tried: 0,
            pairing: Some(rep),
        };
    }
    let (w, tried) = sample_refutation(poly, opts.samples, opts.seed);
    match w {
        Some(w) => PositivityVerdict {
            kind: VerdictKind::Refuted,
            tier: Some(3),
            certificate: None,
            witness: Some(w),
            samples_tried: tried,
            pairing: Some(rep),
        },
        None => PositivityVerdict {
            kind: VerdictKind::Unknown,
            tier: None,
            certificate: None,
            witness: None,
            samples_tried: tried,
            pairing: Some(rep),
        },
    }
}

/// Re-checks a verdict against `p` with exact arithmetic.
pub fn replay_verdict(p: &HermPoly, v: &PositivityVerdict) -> bool {
    match v.kind {
        VerdictKind::CertifiedPsd => match &v.certificate {
            Some(Certificate::Gram(c)) => {
                replay_gram(p, c) && {
                    let k = c.basis.len();
                    let mut g: Mat = vec![vec![C::zero(); k]; k];
                    let idx: BTreeMap<&Vec<u32>, usize> = c.basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
                    strip_pure(p)
                        .iter()
                        .all(|(m, cf)| match (idx.get(&m.alpha), idx.get(&m.beta)) {
                            (Some(&i), Some(&j)) => {
                                g[i][j] = cf.clone();
                                true
                            }
                            _ => false,
                        })
                        && check_ldl(&g, &c.ldl)
                }
            }
            Some(Certificate::Pairing(r)) => replay_pairing(p, r),
            None => false,
        },
        VerdictKind::Refuted => match &v.witness {
            Some(w) => {
                let h = complex_hessian(p);
                let val = levi_value(&h, &w.z, &w.a);
                val == w.value && val < Q::zero()
            }
            None => false,
        },
        VerdictKind::Unknown => true,
    }
}

fn fmt_pt(z: &[C]) -> Vec<Value> {
    z.iter().map(c_value).collect()
}

impl PairingReport {
    pub fn to_json(&self) -> Value {
        json!({
            "certified": self.certified,
            "failure": self.failure,
            "remaining": self.remaining.iter().map(|(g, f)| json!({"gamma": g, "fraction": q_value(f)})).collect::<Vec<_>>(),
            "mixed": self.mixed.iter().map(|e| json!({
                "alpha": e.alpha,
                "beta": e.beta,
                "coeff": c_value(&e.coeff),
                "candidates": e.candidates.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
                "kernels": e.kernels,
                "joint_kernel_trivial": e.joint_kernel_trivial,
                "bad_set_ok": e.bad_set_ok,
                "chosen": e.chosen.iter().map(|u| json!({
                    "gamma1": u.gamma1, "gamma2": u.gamma2,
                    "f1": q_value(&u.f1), "f2": q_value(&u.f2)
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl PositivityVerdict {
    pub fn to_json(&self) -> Value {
        let cert = match &self.certificate {
            Some(Certificate::Gram(c)) => json!({
                "type": "gram",
                "basis": c.basis,
                "L": mat_value(&c.ldl.l),
                "D": c.ldl.d.iter().map(q_value).collect::<Vec<_>>(),
            }),
            Some(Certificate::Pairing(r)) => json!({"type": "pairing", "report": r.to_json()}),
            None => Value::Null,
        };
        json!({
            "kind": self.kind.as_str(),
            "tier": self.tier,
            "certificate": cert,
            "witness": self.witness.as_ref().map(|w| json!({
                "z": fmt_pt(&w.z), "a": fmt_pt(&w.a), "value": q_value(&w.value)
            })),
            "samples_tried": self.samples_tried,
            "pairing": self.pairing.as_ref().map(|r| r.to_json()),
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoeffError {
    #[error("polynomial involves more than one variable")]
    NotOneVariable,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("polynomial has odd degree {0}")]
    OddDegree(u32),
}

/// Coefficient bounds `C_0 >= 0` and `|C_k| <= C_0` for a nonnegative
/// homogeneous `P = Σ C_k z^{m+k} z̄^{m-k}`.
#[derive(Clone, Debug)]
pub struct CoeffBoundReport {
    pub var: usize,
    pub m: u32,
    pub c0: Q,
    /// `(k, |C_k|^2, |C_k| <= C_0)` for `k != 0`.
    pub bounds: Vec<(i64, Q, bool)>,
    pub c0_nonneg: bool,
    pub c0_positive: bool,
    pub all_hold: bool,
    /// Result of sampling `P` on `|z| = 1`, if requested.
    pub precheck_nonneg: Option<bool>,
}

pub fn one_var_coeff_check(p: &Poly, assume_nonneg: bool) -> Result<CoeffBoundReport, CoeffError> {
    let n = p.n();
    let vars: Vec<usize> = (0..n).filter(|&j| p.degree_in(j) > 0).collect();
    if vars.len() > 1 {
        return Err(CoeffError::NotOneVariable);
    }
    let var = vars.first().copied().unwrap_or(0);
    let deg = p.total_degree();
    if p.iter().any(|(m, _)| m.degree() != deg) {
        return Err(CoeffError::NotHomogeneous);
    }
    if !deg.is_multiple_of(2) {
        return Err(CoeffError::OddDegree(deg));
    }
    let m = deg / 2;
    let coeff = |k: i64| -> C {
        let mut mono = Mono::one(n);
        mono.alpha[var] = (m as i64 + k) as u32;
        mono.beta[var] = (m as i64 - k) as u32;
        p.coeff(&mono)
    };
    let c0 = coeff(0).re;
    let c0sq = &c0 * &c0;
    let mut bounds = Vec::new();
    for k in -(m as i64)..=(m as i64) {
        if k == 0 {
            continue;
        }
        let ck = norm2(&coeff(k));
        let ok = ck <= c0sq && !c0.is_negative();
        bounds.push((k, ck, ok));
    }
    let precheck_nonneg = if assume_nonneg {
        None
    } else {
        let mut ok = true;
        for u in unit_phases() {
            let mut z = vec![C::zero(); n];
            z[var] = u;
            if p.eval(&z).re < Q::zero() {
                ok = false;
                break;
            }
        }
        Some(ok)
    };
    let c0_nonneg = !c0.is_negative();
    Ok(CoeffBoundReport {
        var,
        m,
        c0_positive: c0 > Q::zero(),
        all_hold: c0_nonneg && bounds.iter().all(|b| b.2),
        c0,
        bounds,
        c0_nonneg,
        precheck_nonneg,
    })
}

/// Monomials whose coefficient dominates every other one up to the factor `M`.
pub fn m_dominant_coefficients(p: &Poly, big_m: &Q) -> Vec<Mono> {
    let m2 = big_m * big_m;
    p.iter()
        .filter(|(_, c)| {
            let lhs = &m2 * norm2(c);
            p.iter().all(|(_, d)| norm2(d) <= lhs)
        })
        .map(|(m, _)| m.clone())
        .collect()
}

#[derive(Clone, Debug)]
pub struct SplitPart {
    pub p: u32,
    pub q: u32,
    pub part: Poly,
    pub flagged: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid variable partition: {0}")]
pub struct PartitionError(pub String);

/// Splits `P` by bidegree in the variable group `group` versus the rest and
/// flags the parts of extremal degree, which are nonnegative whenever `P` is.
pub fn newton_split_check(p: &Poly, group: &[usize]) -> Result<Vec<SplitPart>, PartitionError> {
    let n = p.n();
    if group.is_empty() || group.iter().any(|&j| j >= n) {
        return Err(PartitionError("group must be a nonempty set of valid indices".into()));
    }
    let mut parts: BTreeMap<(u32, u32), Poly> = BTreeMap::new();
    for (m, c) in p.iter() {
        let a: u32 = group.iter().map(|&j| m.degree_in(j)).sum();
        let b = m.degree() - a;
        parts
            .entry((a, b))
            .or_insert_with(|| Poly::zero(n))
            .add_term(m.clone(), c.clone());
    }
    let maxp = parts.keys().map(|k| k.0).max().unwrap_or(0);
    let maxq = parts.keys().map(|k| k.1).max().unwrap_or(0);
    Ok(parts
        .into_iter()
        .map(|((a, b), part)| SplitPart {
            p: a,
            q: b,
            flagged: a == maxp || b == maxq,
            part,
        })
        .collect())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TruncateError {
    #[error("term {0} has weight below 1")]
    LowWeight(String),
}

/// Keeps the weight-one part of `r` (including `-2 Re z_1`).
pub fn model_truncate(r: &HermPoly, mu: &Weight) -> Result<HermPoly, TruncateError> {
    let one = Q::one();
    for (m, c) in r.iter() {
        if weighted_order(m, mu) < one {
            return Err(TruncateError::LowWeight(
                Poly::term(r.n(), m.clone(), c.clone()).to_string(),
            ));
        }
    }
    Ok(r.filter(|m| weighted_order(m, mu) == one))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::c_int;
    use crate::parse::parse_poly;

    #[test]
    fn hessian_entries() {
        let p = parse_poly("|z2|^4", 2).unwrap();
        let h = complex_hessian(&p);
        assert_eq!(h[1][1], parse_poly("4|z2|^2", 2).unwrap().into_poly());
        assert!(h[0][0].is_zero());
        let p = parse_poly("2Re(z2^2 zb3^3)", 3).unwrap();
        let h = complex_hessian(&p);
        assert_eq!(h[1][2], crate::parse::parse_expr("6 z2 zb3^2", 3).unwrap());
        assert_eq!(h[2][1], h[1][2].conj());
    }

    #[test]
    fn tier_one() {
        let p = parse_poly("|z2|^2 + |z3|^2", 3).unwrap();
        let v = psd_verdict(&p, &PsdOptions::default());
        assert_eq!(v.kind, VerdictKind::CertifiedPsd);
        assert_eq!(v.tier, Some(1));
        assert!(replay_verdict(&p, &v));
    }

    #[test]
    fn refutes_indefinite_example() {
        let p = parse_poly("2Re(z2^2 zb3^3)", 3).unwrap();
        let v = psd_verdict(&p, &PsdOptions::default());
        assert_eq!(v.kind, VerdictKind::Refuted);
        assert!(replay_verdict(&p, &v));
        let h = complex_hessian(&p);
        let z = vec![C::zero(), c_int(1), c_int(1)];
        let a = vec![C::zero(), c_int(1), c_int(-1)];
        assert_eq!(levi_value(&h, &z, &a), q(-12));
    }

    #[test]
    fn coefficient_bounds() {
        let p = parse_poly("|z2|^4 + Re(z2^3 zb2)", 2).unwrap();
        let r = one_var_coeff_check(&p, false).unwrap();
        assert_eq!(r.c0, q(1));
        assert!(r.all_hold);
        assert_eq!(r.precheck_nonneg, Some(true));
        let p = parse_poly("2Re(z2^2)", 2).unwrap();
        let r = one_var_coeff_check(&p, true).unwrap();
        assert!(!r.all_hold);
    }

    #[test]
    fn truncation() {
        let r = parse_poly("-2Re(z1) + |z2|^4 + |z2|^6", 2).unwrap();
        let w = Weight::new(vec![q(1), qf(1, 4)]).unwrap();
        assert_eq!(
            model_truncate(&r, &w).unwrap(),
            parse_poly("-2Re(z1) + |z2|^4", 2).unwrap()
        );
        let bad = parse_poly("-2Re(z1) + |z2|^2", 2).unwrap();
        assert!(model_truncate(&bad, &w).is_err());
    }
}
