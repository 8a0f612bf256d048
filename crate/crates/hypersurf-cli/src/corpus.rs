//! The bundled worked examples, each checked against its known outcome.

use hypersurf::boundary::{build_boundary_system, detect_torsion, normalize_first_block, Torsion};
use hypersurf::levi::{cauchy_schwarz_pairing, psd_verdict, replay_verdict, PsdOptions, VerdictKind};
use hypersurf::multitype::{multitype_search, MultitypeStatus};
use hypersurf::normal_form::{auto_weight, normalize, verify_normal_form};
use hypersurf::num::{c_re, q, qf};
use hypersurf::weights::{counting_bound, enumerate_multitypes, is_admissible};
use hypersurf::{parse_poly, HermPoly, InverseWeight, Mono, Poly, Weight, Q};
use serde_json::{json, Value};

use crate::{Cli, Fail};

pub const EQQ: &str = "-2Re(z1) + |z2|^8 + |z2|^4|z3|^6";
pub const BLOOM: &str = "Re(z1) + (Re(z2) + |z3|^2)^2";
pub const SUM0: &str = "-2Re(z1) + |z2|^4 + |z2|^2|z3|^2 + (|z2|^2 + |z3|^2)|z4|^2";
pub const MIXED: &str = "-2Re(z1) + 2Re(z2^2 zb3^3)";
pub const STRAIGHTEN: &str = "-2Re(z1) + |z2 + z3^2|^4 + |z3|^8";

/// The four-variable model whose boundary system has torsion.
pub fn torsion_model(eps: &str) -> String {
    format!(
        "-2Re(z1) + |z2|^6 + |z2|^2|z3|^6 + |z2|^4|z3|^2|z4|^2 + |z2|^2|z3|^4|z4|^4 \
         + 2*{eps}*Re(|z2|^2 z3^2 zb3^3 |z4|^2) + |z3|^8|z4|^2"
    )
}

pub const NAMES: [&str; 9] = [
    "sq",
    "eqq",
    "bloom",
    "sum0",
    "tube",
    "mixed",
    "torsion",
    "first-block",
    "counting",
];

pub struct Item {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub note: Option<String>,
}

impl Item {
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {:<12} {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        );
        if let Some(n) = &self.note {
            s += &format!(" (note: {n})");
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "pass": self.pass, "detail": self.detail, "note": self.note})
    }
}

type Check = Result<(bool, String, Option<String>), Fail>;

pub fn run(only: Option<&str>, n: usize, m: u32, cli: &Cli) -> Result<Vec<Item>, Fail> {
    if let Some(o) = only {
        if !NAMES.contains(&o) {
            return Err(Fail::Input(format!(
                "unknown example '{o}'; known: {}",
                NAMES.join(", ")
            )));
        }
    }
    let mut out = Vec::new();
    for name in NAMES {
        if only.is_some_and(|o| o != name) {
            continue;
        }
        let (pass, detail, note) = match name {
            "sq" => sq(),
            "eqq" => eqq(),
            "bloom" => bloom(),
            "sum0" => sum0(),
            "tube" => tube(),
            "mixed" => mixed(cli),
            "torsion" => torsion(cli),
            "first-block" => first_block(),
            _ => counting(n, m),
        }?;
        out.push(Item {
            name,
            pass,
            detail,
            note,
        });
    }
    Ok(out)
}

fn model(s: &str, n: usize) -> Result<HermPoly, Fail> {
    parse_poly(s, n).map_err(|e| Fail::Structural(format!("bundled model: {e}")))
}

fn weight(inv: &[i64]) -> Weight {
    InverseWeight::from_ints(&inv.iter().map(|&x| Some(x)).collect::<Vec<_>>()).weight()
}

/// `|z2^p + ε z3^q|^2 + (1-ε^2)|z3|^2q = |z2|^2p + |z3|^2q + 2ε Re(z2^p zb3^q)`.
fn sq() -> Check {
    let mut bad = Vec::new();
    let mut count = 0;
    for p in [2u32, 3] {
        for qq in [2u32, 3] {
            for eps in [qf(1, 2), qf(9, 10)] {
                let z2p = Poly::var(3, 1).pow(p);
                let z3q = Poly::var(3, 2).pow(qq);
                let f = &z2p + &z3q.scale(&c_re(eps.clone()));
                let lhs = &(&f * &f.conj()) + &(&z3q * &z3q.conj()).scale(&c_re(q(1) - &eps * &eps));
                let rhs = model(
                    &format!("|z2|^{} + |z3|^{} + 2*{}*Re(z2^{p} zb3^{qq})", 2 * p, 2 * qq, eps),
                    3,
                )?;
                count += 1;
                if (&lhs - rhs.poly()).is_zero() {
                    continue;
                }
                bad.push(format!("p={p} q={qq} eps={eps}"));
            }
        }
    }
    if bad.is_empty() {
        Ok((true, format!("{count} identities exact"), None))
    } else {
        Ok((false, format!("nonzero difference at {}", bad.join("; ")), None))
    }
}

fn eqq() -> Check {
    let r = model(EQQ, 3)?;
    let m = multitype_search(&r, 4).map_err(|e| Fail::Structural(e.to_string()))?;
    let mu = weight(&[1, 8, 12]);
    let nf = normalize(&r, &mu, true).map_err(|e| Fail::Structural(e.to_string()))?;
    let ok = verify_normal_form(&nf, &r, &mu).ok();
    let pass = m.to_string() == "(1, 8, 12) [exact-commutator]"
        && nf.k_matrix() == vec![vec![4], vec![2, 3]]
        && nf.a_values() == vec![q(1), q(1)]
        && nf.residual.is_zero()
        && ok;
    Ok((
        pass,
        format!(
            "{m}; K = {:?}; A = {}; verified {ok}",
            nf.k_matrix(),
            a_strings(&nf.a_values())
        ),
        None,
    ))
}

fn a_strings(a: &[Q]) -> String {
    format!("[{}]", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn bloom() -> Check {
    let r = model(BLOOM, 3)?;
    let m = multitype_search(&r, 4).map_err(|e| Fail::Structural(e.to_string()))?;
    let bs = build_boundary_system(&r).map_err(|e| Fail::Structural(e.to_string()))?;
    let pass = m.value.to_string() == "(1, 2, 4)"
        && m.status == MultitypeStatus::SearchLowerBound
        && bs.commutator.to_string() == "(1, 2, inf)"
        && bs.commutator > m.value;
    Ok((pass, format!("search {} < commutator {}", m.value, bs.commutator), None))
}

fn sum0() -> Check {
    let r = model(SUM0, 4)?;
    let mu = auto_weight(&r).map_err(|e| Fail::Structural(e.to_string()))?;
    let nf = normalize(&r, &mu, true).map_err(|e| Fail::Structural(e.to_string()))?;
    let rows: Vec<Mono> = nf.rows.iter().map(|row| row.mono()).collect();
    let sq = |a: [u32; 4]| Mono::new(a.to_vec(), a.to_vec());
    let pass = rows == vec![sq([0, 2, 0, 0]), sq([0, 1, 1, 0]), sq([0, 0, 1, 1])];
    let shown: Vec<String> = rows
        .iter()
        .map(|m| Poly::term(4, m.clone(), c_re(q(1))).to_string())
        .collect();
    Ok((pass, format!("rows {}", shown.join(", ")), None))
}

fn tube() -> Check {
    let r = model("-2Re(z1) + Re(z2)^2", 2)?;
    let mu = weight(&[1, 2]);
    let nf = normalize(&r, &mu, true).map_err(|e| Fail::Structural(e.to_string()))?;
    let pass = nf.a_values() == vec![qf(1, 2)] && verify_normal_form(&nf, &r, &mu).ok();
    Ok((
        pass,
        format!("A = {}; residual {}", a_strings(&nf.a_values()), nf.residual),
        None,
    ))
}

fn mixed(cli: &Cli) -> Check {
    let r = model(MIXED, 3)?;
    let v = psd_verdict(
        &r,
        &PsdOptions {
            samples: cli.samples,
            seed: cli.seed,
            ..PsdOptions::default()
        },
    );
    let value = v.witness.as_ref().map(|w| w.value.to_string()).unwrap_or_default();
    let refuted = v.kind == VerdictKind::Refuted && replay_verdict(&r, &v);
    let contradiction = matches!(normalize(&r, &weight(&[1, 4, 6]), true), Err(e) if e.is_contradiction());
    Ok((
        refuted && contradiction,
        format!(
            "{} with Levi value {value}; normalize contradiction {contradiction}",
            v.kind.as_str()
        ),
        None,
    ))
}

/// Checks the pairing structure and the torsion term; the positivity verdict is only reported.
fn torsion(cli: &Cli) -> Check {
    let r = model(&torsion_model("1/10"), 4)?;
    let p = &r - &HermPoly::minus_two_re_z1(4);
    let rep = cauchy_schwarz_pairing(p.poly(), 4);
    let kernels_ok = rep.mixed.len() == 1 && {
        let mut k = rep.mixed[0].kernels.clone();
        k.sort();
        k == vec![
            vec![vec![0, 0, 4, 1], vec![0, 2, 1, 1]],
            vec![vec![0, 1, 2, 2], vec![0, 1, 3, 0]],
        ] && rep.mixed[0].joint_kernel_trivial
    };
    let bs = build_boundary_system(&r).map_err(|e| Fail::Structural(e.to_string()))?;
    let t = detect_torsion(&bs);
    let z4 = Mono::new(vec![0, 0, 0, 1], vec![0, 0, 0, 1]);
    let torsion_ok = match &t.torsion {
        Torsion::Present {
            c1, c2, obstruction, ..
        } => {
            !num_traits::Zero::is_zero(c1)
                && !num_traits::Zero::is_zero(c2)
                && *obstruction == Poly::term(4, z4, c2.clone())
        }
        _ => false,
    };
    let v = psd_verdict(
        &p,
        &PsdOptions {
            samples: cli.samples,
            seed: cli.seed,
            ..PsdOptions::default()
        },
    );
    Ok((
        kernels_ok && torsion_ok,
        format!("kernels {kernels_ok}; {t}"),
        Some(format!("Levi verdict {}", v.kind.as_str())),
    ))
}

fn first_block() -> Check {
    let r = model(STRAIGHTEN, 3)?;
    let bs = build_boundary_system(&r).map_err(|e| Fail::Structural(e.to_string()))?;
    let nb = normalize_first_block(&bs).map_err(|e| Fail::Structural(e.to_string()))?;
    let again = build_boundary_system(&nb.model).map_err(|e| Fail::Structural(e.to_string()))?;
    let pass = nb.fixpoint && again.commutator == bs.commutator;
    Ok((pass, format!("model {}; fixpoint {}", nb.model, nb.fixpoint), None))
}

fn counting(n: usize, m: u32) -> Check {
    if n == 0 {
        return Err(Fail::Input("n must be at least 1".into()));
    }
    let m = q(m as i64);
    let all = enumerate_multitypes(n, &m);
    let bound = counting_bound(n, &m);
    let admissible = all.iter().all(|l| is_admissible(l).admissible);
    let within = num_bigint::BigUint::from(all.len()) <= bound;
    Ok((
        admissible && within,
        format!("{} enumerated ≤ {bound}", all.len()),
        None,
    ))
}
