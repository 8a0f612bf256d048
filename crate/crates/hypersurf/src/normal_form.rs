//! The balanced sum-of-squares normal form of a weighted model.
//!
//! Given `r = -2 Re z_1 + p + (higher weight)`, [`normalize`] finds a weighted
//! polynomial change of coordinates after which `p` contains
//!
//! ```text
//! A_2 |z_2|^{2k_22} + A_3 |z_2|^{2k_32} |z_3|^{2k_33} + ... + A_n |z_2|^{2k_n2} ... |z_n|^{2k_nn}
//! ```
//!
//! with `A_j > 0`, lowering the weight where the current one is too coarse.
//! Variable indices in the API are 0-based (`z_2` is index 1); reports
//! use the 1-based names.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::coord::{groups, CoordChange, CoordError};
use crate::json::{c_value, mono_value, poly_to_value, q_value};
use crate::levi::{model_truncate, one_var_coeff_check, TruncateError};
use crate::model::{eliminate_harmonic, revlex_max_balanced, split_model, to_model_form, weighted_order, FormError};
use crate::num::{fmt_q, q, C, Q};
use crate::poly::{HermPoly, Mono, Poly};
use crate::weights::{greedy_weight_from, supporting_values, Weight, WeightError};

const MAX_LOWERINGS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    /// The restriction to the equal-weight block vanishes; the weight can be
    /// lowered at this slot.
    #[error("z{slot}: the restriction to its equal-weight block vanishes")]
    Degenerate { slot: usize },
    #[error("z{slot}: extracted part has odd degree {degree}")]
    OddDegree { slot: usize, degree: u32 },
    #[error("pseudoconvexity contradiction at z{slot}: {reason}; offending polynomial {poly}")]
    Contradiction { slot: usize, reason: String, poly: Poly },
    #[error(transparent)]
    Coord(#[from] CoordError),
}

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Truncate(#[from] TruncateError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("z{slot}: the block restriction vanishes and the weight cannot be lowered further")]
    CannotLower { slot: usize },
    #[error("weight lowering did not terminate after {0} steps")]
    IterationCap(usize),
}

impl NormalizeError {
    pub fn is_contradiction(&self) -> bool {
        matches!(self, NormalizeError::Step(StepError::Contradiction { .. }))
    }
}

/// One balanced square `A |z_2|^{2k_2} ... |z_j|^{2k_j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    /// Index of `z_j`.
    pub slot: usize,
    /// Full-length exponent vector; `k[l]` is `k_{jl}`.
    pub k: Vec<u32>,
    pub a: Q,
}

impl Row {
    pub fn mono(&self) -> Mono {
        Mono::new(self.k.clone(), self.k.clone())
    }

    /// `(k_{j2}, ..., k_{jj})`.
    pub fn exponents(&self) -> Vec<u32> {
        self.k[1..=self.slot].to_vec()
    }
}

#[derive(Clone, Debug)]
pub struct FirstStep {
    pub change: CoordChange,
    pub p2: Poly,
    pub k22: u32,
    pub c20: Q,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct InductiveStep {
    pub change: CoordChange,
    pub pm: Poly,
    pub row: Row,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lowering {
    pub slot: usize,
    pub from: Weight,
    pub to: Weight,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub input: HermPoly,
    pub input_weight: Weight,
    pub weight: Weight,
    /// Multiplier `s` of the initial `z_1 -> s z_1`.
    pub z1_scale: C,
    /// Harmonic shift `z_1 -> z_1 + h`.
    pub harmonic: Poly,
    /// Weighted change applied after the harmonic shift.
    pub transform: CoordChange,
    /// Weight-one part of `f` in the final coordinates.
    pub p: HermPoly,
    pub rows: Vec<Row>,
    pub residual: HermPoly,
    pub lowering: Vec<Lowering>,
    pub warnings: Vec<String>,
}

impl NormalForm {
    /// Rows `(k_{j2}, ..., k_{jj})`.
    pub fn k_matrix(&self) -> Vec<Vec<u32>> {
        self.rows.iter().map(Row::exponents).collect()
    }

    pub fn a_values(&self) -> Vec<Q> {
        self.rows.iter().map(|r| r.a.clone()).collect()
    }

    pub fn lowered_weight(&self) -> Option<&Weight> {
        if self.lowering.is_empty() {
            None
        } else {
            Some(&self.weight)
        }
    }

    /// Degree of `p` in each `(z_j, z̄_j)` against `2 k_jj`, over all of `p`.
    pub fn full_degree_caps(&self) -> Vec<(usize, u32, u32)> {
        self.rows
            .iter()
            .map(|r| (r.slot, self.p.degree_in(r.slot), 2 * r.k[r.slot]))
            .collect()
    }

    pub fn to_json(&self, check: &VerifyReport) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "var": format!("z{}", r.slot + 1),
                    "k": r.exponents(),
                    "A": q_value(&r.a),
                    "monomial": mono_value(&r.mono()),
                })
            })
            .collect();
        json!({
            "input": poly_to_value(&self.input),
            "input_weight": weight_value(&self.input_weight),
            "weight": weight_value(&self.weight),
            "lambda": self.weight.inverse().to_strings(),
            "K": self.k_matrix(),
            "A": self.a_values().iter().map(q_value).collect::<Vec<_>>(),
            "rows": rows,
            "z1_scale": c_value(&self.z1_scale),
            "harmonic_shift": self.harmonic.to_string(),
            "change": self.transform.maps().iter().enumerate()
                .map(|(j, f)| json!({"var": format!("z{}", j + 1), "map": f.to_string()}))
                .collect::<Vec<_>>(),
            "p": self.p.to_string(),
            "residual": self.residual.to_string(),
            "residual_json": poly_to_value(&self.residual),
            "lowering": self.lowering.iter().map(|l| json!({
                "slot": format!("z{}", l.slot + 1),
                "from": weight_value(&l.from),
                "to": weight_value(&l.to),
            })).collect::<Vec<_>>(),
            "warnings": self.warnings,
            "verification": check.to_json(),
        })
    }
}

fn weight_value(w: &Weight) -> Value {
    Value::Array(w.entries().iter().map(|x| Value::String(fmt_q(x))).collect())
}

fn unit_poly(n: usize, j: usize) -> Poly {
    Poly::var(n, j)
}

/// Last index of the equal-weight group containing `m`.
fn block_end(mu: &Weight, m: usize) -> usize {
    groups(mu)
        .into_iter()
        .find(|g| g.contains(&m))
        .and_then(|g| g.last().copied())
        .unwrap_or(m)
}

/// `z_b -> z_b + w^{b-m} z_m` for `m < b <= s`.
fn mixing(mu: &Weight, m: usize, s: usize, w: &C) -> Result<CoordChange, CoordError> {
    let n = mu.n();
    let mut maps: Vec<Poly> = (0..n).map(|k| unit_poly(n, k)).collect();
    let mut pw = C::one();
    for b in m + 1..=s {
        pw = &pw * w;
        maps[b] = &maps[b] + &unit_poly(n, m).scale(&pw);
    }
    CoordChange::new(maps, mu.clone())
}

/// Scans `w = a + b i` over a grid large enough that a nonzero polynomial in
/// `(Re w, Im w)` of the relevant degree cannot vanish on all of it.
fn scan_direction(
    p: &HermPoly,
    mu: &Weight,
    m: usize,
    s: usize,
    ok: impl Fn(&HermPoly) -> bool,
) -> Result<Option<(CoordChange, HermPoly)>, CoordError> {
    if ok(p) {
        return Ok(Some((CoordChange::identity(mu.clone()), p.clone())));
    }
    if s == m {
        return Ok(None);
    }
    let bound = (p.total_degree() as usize * (s - m)) as i64 + 1;
    for sum in 1..=2 * bound {
        for a in 0..=sum.min(bound) {
            let b = sum - a;
            if b > bound {
                continue;
            }
            let w = C::new(q(a), q(b));
            let c = mixing(mu, m, s, &w)?;
            let pn = c.apply(p);
            if ok(&pn) {
                return Ok(Some((c, pn)));
            }
        }
    }
    Ok(None)
}

fn positivity_failure(
    slot: usize,
    reason: String,
    poly: &Poly,
    assert_psc: bool,
    warnings: &mut Vec<String>,
) -> Result<(), StepError> {
    if assert_psc {
        Err(StepError::Contradiction {
            slot: slot + 1,
            reason,
            poly: poly.clone(),
        })
    } else {
        warnings.push(format!("z{}: {} in {}", slot + 1, reason, poly));
        Ok(())
    }
}

fn odd_degree(slot: usize, degree: u32, poly: &Poly, assert_psc: bool) -> StepError {
    if assert_psc {
        StepError::Contradiction {
            slot: slot + 1,
            reason: format!("odd degree {degree}, impossible for a nonnegative part"),
            poly: poly.clone(),
        }
    } else {
        StepError::OddDegree { slot: slot + 1, degree }
    }
}

/// First step: makes `p(z_2, 0)` nonzero by a change inside the `μ_2` block
/// and reads off `p_2 = C_20 |z_2|^{2k_22} + ...`.
pub fn step_first(p: &HermPoly, mu: &Weight, assert_psc: bool) -> Result<FirstStep, StepError> {
    let n = p.n();
    assert!(n >= 2, "step_first needs n >= 2");
    let s = block_end(mu, 1);
    if p.restrict_zero(|j| j > s).is_zero() {
        return Err(StepError::Degenerate { slot: 2 });
    }
    let only_z2 = |pp: &HermPoly| !pp.restrict_zero(|j| j != 1).is_zero();
    let (change, pn) = scan_direction(p, mu, 1, s, only_z2)?.ok_or(StepError::Degenerate { slot: 2 })?;
    let p2 = pn.restrict_zero(|j| j != 1);
    let degree = p2.total_degree();
    if degree % 2 != 0 {
        return Err(odd_degree(1, degree, &p2, assert_psc));
    }
    let k22 = degree / 2;
    let report = one_var_coeff_check(&p2, true).map_err(|_| odd_degree(1, degree, &p2, assert_psc))?;
    let mut warnings = Vec::new();
    if !report.c0_positive {
        positivity_failure(1, "C_20 is not positive".into(), &p2, assert_psc, &mut warnings)?;
    } else {
        let bound = Q::from_integer(k22.into()) * &report.c0;
        let bound2 = &bound * &bound;
        for (k, ck2, _) in &report.bounds {
            if *ck2 >= bound2 {
                positivity_failure(
                    1,
                    format!("|C_2,{k}| is not below k22 * C_20"),
                    &p2,
                    assert_psc,
                    &mut warnings,
                )?;
            }
        }
    }
    Ok(FirstStep {
        change,
        p2,
        k22,
        c20: report.c0,
        warnings,
    })
}

/// Inductive step at `z_m` (`m >= 2`), with `earlier = [p_2, ..., p_{m-1}]`.
pub fn step_inductive(
    p: &HermPoly,
    earlier: &[Poly],
    mu: &Weight,
    m: usize,
    assert_psc: bool,
) -> Result<InductiveStep, StepError> {
    let n = p.n();
    let s = block_end(mu, m);
    let rest = |pp: &HermPoly| -> Poly { earlier.iter().fold(pp.poly().clone(), |acc, e| &acc - e) };
    let q0 = rest(p).restrict_zero(|j| j > s);
    if !q0.iter().any(|(mono, _)| (m..=s).any(|b| mono.degree_in(b) > 0)) {
        return Err(StepError::Degenerate { slot: m + 1 });
    }
    let involves_zm = |pp: &HermPoly| rest(pp).restrict_zero(|j| j > m).degree_in(m) > 0;
    let (change, pn) = scan_direction(p, mu, m, s, involves_zm)?.ok_or(StepError::Degenerate { slot: m + 1 })?;
    let qm = rest(&pn).restrict_zero(|j| j > m);
    let d = qm.degree_in(m);
    let pm = qm.filter(|mono, _| mono.degree_in(m) == d);

    let mut warnings = Vec::new();
    let mut k = vec![0u32; n];
    let mut part = pm.clone();
    for l in (1..=m).rev() {
        let dl = part.degree_in(l);
        if dl == 0 {
            continue;
        }
        let top = part.filter(|mono, _| mono.degree_in(l) == dl);
        if dl % 2 != 0 {
            return Err(odd_degree(l, dl, &top, assert_psc));
        }
        let half = dl / 2;
        k[l] = half;
        let bal = top.filter(|mono, _| mono.alpha[l] == half && mono.beta[l] == half);
        if bal.is_zero() {
            positivity_failure(
                l,
                format!("the top (z{}) part has no balanced term", l + 1),
                &top,
                assert_psc,
                &mut warnings,
            )?;
            part = Poly::zero(n);
            break;
        }
        part = Poly::from_terms(
            n,
            bal.iter().map(|(mono, c)| {
                let mut a = mono.alpha.clone();
                let mut b = mono.beta.clone();
                a[l] = 0;
                b[l] = 0;
                (Mono::new(a, b), c.clone())
            }),
        );
    }
    let c = part.constant_term().re;
    if part.is_zero() || !c.is_positive() {
        positivity_failure(
            m,
            "the certifying coefficient is not positive".into(),
            &pm,
            assert_psc,
            &mut warnings,
        )?;
    }
    Ok(InductiveStep {
        change,
        pm,
        row: Row { slot: m, k, a: c },
        warnings,
    })
}

// Result of one pass with a fixed weight.
struct Pass {
    transform: CoordChange,
    p: HermPoly,
    rows: Vec<Row>,
    warnings: Vec<String>,
}

enum PassOutcome {
    Done(Pass),
    Degenerate(usize),
}

fn run_pass(r1: &HermPoly, mu: &Weight, assert_psc: bool) -> Result<PassOutcome, NormalizeError> {
    let n = r1.n();
    let model = model_truncate(r1, mu)?;
    let mut p = split_model(&model)?;
    let mut transform = CoordChange::identity(mu.clone());
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    if n < 2 || mu[1].is_zero() {
        return Ok(PassOutcome::Done(Pass {
            transform,
            p,
            rows,
            warnings,
        }));
    }
    let first = match step_first(&p, mu, assert_psc) {
        Err(StepError::Degenerate { slot }) => return Ok(PassOutcome::Degenerate(slot - 1)),
        other => other?,
    };
    p = first.change.apply(&p);
    transform = transform.then(&first.change);
    let mut k = vec![0; n];
    k[1] = first.k22;
    rows.push(Row {
        slot: 1,
        k,
        a: first.c20,
    });
    warnings.extend(first.warnings);
    let mut earlier = vec![first.p2];
    for m in 2..n {
        if mu[m].is_zero() {
            break;
        }
        let step = match step_inductive(&p, &earlier, mu, m, assert_psc) {
            Err(StepError::Degenerate { slot }) => return Ok(PassOutcome::Degenerate(slot - 1)),
            other => other?,
        };
        p = step.change.apply(&p);
        transform = transform.then(&step.change);
        earlier.push(step.pm);
        rows.push(step.row);
        warnings.extend(step.warnings);
    }
    Ok(PassOutcome::Done(Pass {
        transform,
        p,
        rows,
        warnings,
    }))
}

/// Largest admissible decrease of `μ_j`: the biggest supporting value below
/// `μ_j` whose greedy completion keeps every term at weight at least one.
fn lower_weight(r1: &HermPoly, mu: &Weight, j: usize) -> Option<Weight> {
    let prefix = &mu.entries()[..j];
    let one = Q::one();
    for v in supporting_values(r1, prefix).into_iter().rev() {
        if v >= mu[j] {
            continue;
        }
        let mut pre = prefix.to_vec();
        pre.push(v);
        let Ok(w) = Weight::new(greedy_weight_from(r1, &pre)) else {
            continue;
        };
        if r1.iter().all(|(m, _)| weighted_order(m, &w) >= one) {
            return Some(w);
        }
    }
    None
}

/// `r` brought to `-2 Re z_1 + f` with `f` free of pure terms.
pub fn prepare(r: &HermPoly) -> Result<(HermPoly, C, Poly), NormalizeError> {
    let (r0, s) = to_model_form(r)?;
    let (r1, h) = eliminate_harmonic(&r0)?;
    Ok((r1, s, h))
}

/// Weight-one part of `f` for `μ` chosen greedily in the given coordinates.
pub fn auto_weight(r: &HermPoly) -> Result<Weight, NormalizeError> {
    let (r1, _, _) = prepare(r)?;
    Ok(Weight::new(greedy_weight_from(&r1, &[Q::one()]))?)
}

pub fn normalize(r: &HermPoly, mu: &Weight, assert_psc: bool) -> Result<NormalForm, NormalizeError> {
    let (r1, z1_scale, harmonic) = prepare(r)?;
    let mut w = mu.clone();
    let mut lowering = Vec::new();
    for _ in 0..MAX_LOWERINGS {
        match run_pass(&r1, &w, assert_psc)? {
            PassOutcome::Done(pass) => {
                let bal = pass.rows.iter().fold(HermPoly::zero(r.n()), |acc, row| {
                    let t = Poly::term(r.n(), row.mono(), C::new(row.a.clone(), Q::zero()));
                    &acc + &HermPoly::new(t).expect("balanced terms are real")
                });
                let residual = &pass.p - &bal;
                return Ok(NormalForm {
                    input: r.clone(),
                    input_weight: mu.clone(),
                    weight: w,
                    z1_scale,
                    harmonic,
                    transform: pass.transform,
                    p: pass.p,
                    rows: pass.rows,
                    residual,
                    lowering,
                    warnings: pass.warnings,
                });
            }
            PassOutcome::Degenerate(j) => {
                let nw = lower_weight(&r1, &w, j).ok_or(NormalizeError::CannotLower { slot: j + 1 })?;
                lowering.push(Lowering {
                    slot: j,
                    from: w.clone(),
                    to: nw.clone(),
                });
                w = nw;
            }
        }
    }
    Err(NormalizeError::IterationCap(MAX_LOWERINGS))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ok": self.ok(),
            "violations": self.violations.iter()
                .map(|v| json!({"clause": v.clause, "detail": v.detail}))
                .collect::<Vec<_>>(),
        })
    }
}

/// Re-checks a normal form from scratch against the original `r` and the
/// requested weight `mu`.
pub fn verify_normal_form(nf: &NormalForm, r: &HermPoly, mu: &Weight) -> VerifyReport {
    let mut v = Vec::new();
    let mut bad = |clause: &'static str, detail: String| v.push(Violation { clause, detail });
    let w = &nf.weight;
    if w.entries() > mu.entries() || (w != mu && nf.lowering.is_empty()) {
        bad(
            "weight",
            format!("final weight {w} is not the requested {mu} or a lowering of it"),
        );
    }
    let mut prev = 0;
    for row in &nf.rows {
        let name = format!("z{}", row.slot + 1);
        if row.slot <= prev && prev != 0 || row.k.len() != w.n() || row.k[row.slot..].iter().skip(1).any(|&x| x > 0) {
            bad("shape", format!("row {name} is malformed"));
            continue;
        }
        prev = row.slot;
        // (i)
        let c = nf.p.coeff(&row.mono());
        if !row.a.is_positive() || c != C::new(row.a.clone(), Q::zero()) {
            bad(
                "balanced-term",
                format!("row {name}: coefficient {c} in p, A = {}", fmt_q(&row.a)),
            );
        }
        // (ii)
        let s = (1..=row.slot).fold(Q::zero(), |acc, l| acc + Q::from_integer((2 * row.k[l]).into()) * &w[l]);
        if row.k[row.slot] == 0 || !s.is_one() {
            bad("weight-identity", format!("row {name}: sum 2 k mu = {}", fmt_q(&s)));
        }
        // (iii)
        let cap = nf.p.restrict_zero(|j| j > row.slot).degree_in(row.slot);
        if cap > 2 * row.k[row.slot] {
            bad(
                "degree-cap",
                format!("degree {cap} in {name} exceeds {}", 2 * row.k[row.slot]),
            );
        }
        // (iv)
        let active: Vec<usize> = (1..=row.slot).collect();
        if revlex_max_balanced(&nf.p, &active) != Some(row.mono()) {
            bad(
                "revlex",
                format!("row {name} is not the revlex-maximal balanced monomial"),
            );
        }
    }
    // (v)
    match prepare(r) {
        Ok((r1, s, h)) => {
            if s != nf.z1_scale || h != nf.harmonic {
                bad("reconstruction", "harmonic preparation differs".into());
            }
            match model_truncate(&nf.transform.apply(&r1), w) {
                Ok(model) => {
                    let n = r.n();
                    let bal = nf.rows.iter().fold(Poly::zero(n), |acc, row| {
                        &acc + &Poly::term(n, row.mono(), C::new(row.a.clone(), Q::zero()))
                    });
                    let expect = &(&HermPoly::minus_two_re_z1(n).into_poly() + &bal) + nf.residual.poly();
                    if *model.poly() != expect || model.poly() != (&HermPoly::minus_two_re_z1(n) + &nf.p).poly() {
                        bad(
                            "reconstruction",
                            "transformed model differs from the decomposition".into(),
                        );
                    }
                }
                Err(e) => bad("reconstruction", e.to_string()),
            }
        }
        Err(e) => bad("reconstruction", e.to_string()),
    }
    VerifyReport { violations: v }
}
