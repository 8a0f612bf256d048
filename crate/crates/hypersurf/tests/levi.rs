mod common;

use common::{herm, torsion_p};
use hypersurf::levi::{
    cauchy_schwarz_pairing, complex_hessian, levi_value, m_dominant_coefficients, newton_split_check,
    one_var_coeff_check, psd_verdict, replay_pairing, replay_verdict, PsdOptions, VerdictKind,
};
use hypersurf::num::{c_int, q, qf};
use hypersurf::{parse_poly, HermPoly, Mono, Poly, C, Q};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f(x: &Q) -> f64 {
    x.to_f64().unwrap()
}

/// `p` at the real point `x + i y`, in plain floating point.
fn eval_f64(p: &Poly, x: &[f64], y: &[f64]) -> f64 {
    let mut total = 0.0;
    for (m, c) in p.iter() {
        let (mut re, mut im) = (f(&c.re), f(&c.im));
        for j in 0..p.n() {
            for _ in 0..m.alpha[j] {
                (re, im) = (re * x[j] - im * y[j], re * y[j] + im * x[j]);
            }
            for _ in 0..m.beta[j] {
                (re, im) = (re * x[j] + im * y[j], im * x[j] - re * y[j]);
            }
        }
        total += re;
    }
    total
}

/// `∂_j ∂̄_k p` by central differences in the real coordinates.
fn fd_entry(p: &Poly, x: &[f64], y: &[f64], j: usize, k: usize) -> (f64, f64) {
    let h = 1e-3;
    let d2 = |u: (usize, bool), v: (usize, bool)| {
        let bump = |sx: f64, sy: f64| {
            let (mut xx, mut yy) = (x.to_vec(), y.to_vec());
            for (idx, s) in [(u, sx), (v, sy)] {
                if idx.1 {
                    yy[idx.0] += s;
                } else {
                    xx[idx.0] += s;
                }
            }
            eval_f64(p, &xx, &yy)
        };
        (bump(h, h) - bump(h, -h) - bump(-h, h) + bump(-h, -h)) / (4.0 * h * h)
    };
    let xx = d2((j, false), (k, false));
    let yy = d2((j, true), (k, true));
    let xy = d2((j, false), (k, true));
    let yx = d2((j, true), (k, false));
    ((xx + yy) / 4.0, (xy - yx) / 4.0)
}

fn levi_f64(p: &Poly, x: &[f64], y: &[f64], a: &[(f64, f64)]) -> f64 {
    let n = p.n();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            let (hr, hi) = fd_entry(p, x, y, j, k);
            // h_jk a_j conj(a_k)
            let (ar, ai) = a[j];
            let (br, bi) = (a[k].0, -a[k].1);
            let (pr, pi) = (ar * br - ai * bi, ar * bi + ai * br);
            total += hr * pr - hi * pi;
        }
    }
    total
}

#[test]
fn hessian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases = [
        "2Re(z2^2 zb3^3)",
        "|z2|^4 + Re(z2^3 zb2) + |z2 z3|^2",
        "Im(z2 zb3) + |z3|^4 + 3/2 Re(z2^2 zb3)",
    ];
    for s in cases {
        let p = parse_poly(s, 3).unwrap();
        let h = complex_hessian(p.poly());
        for _ in 0..10 {
            let num: Vec<i64> = (0..6).map(|_| rng.gen_range(-8..=8)).collect();
            let z: Vec<C> = (0..3).map(|j| C::new(qf(num[j], 4), qf(num[j + 3], 4))).collect();
            let x: Vec<f64> = z.iter().map(|c| f(&c.re)).collect();
            let y: Vec<f64> = z.iter().map(|c| f(&c.im)).collect();
            for j in 0..3 {
                for k in 0..3 {
                    let exact = h[j][k].eval(&z);
                    let (re, im) = fd_entry(p.poly(), &x, &y, j, k);
                    let scale = 1.0 + f(&exact.re).abs() + f(&exact.im).abs();
                    assert!(
                        (f(&exact.re) - re).abs() < 1e-5 * scale,
                        "{s} ({j},{k}): {exact} vs {re}"
                    );
                    assert!(
                        (f(&exact.im) - im).abs() < 1e-5 * scale,
                        "{s} ({j},{k}): {exact} vs {im}"
                    );
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn hessian_is_hermitian(p in herm(3, 3, 5)) {
        let h = complex_hessian(p.poly());
        for j in 0..3 {
            for k in 0..3 {
                prop_assert_eq!(&h[j][k], &h[k][j].conj());
            }
        }
    }
}

/// `|q|^2 + |q~|^2` with `q, q~` homogeneous of degree `m` in `z2, z̄2`.
fn random_nonneg(rng: &mut ChaCha8Rng, m: u32) -> HermPoly {
    let mut sum = HermPoly::zero(2);
    for _ in 0..2 {
        let terms: Vec<(Mono, C)> = (0..=m)
            .map(|k| {
                let c = C::new(
                    qf(rng.gen_range(-4..=4), rng.gen_range(1..=3)),
                    qf(rng.gen_range(-4..=4), 2),
                );
                (Mono::new(vec![0, k], vec![0, m - k]), c)
            })
            .collect();
        let g = Poly::from_terms(2, terms);
        sum = &sum + &HermPoly::new(&g * &g.conj()).unwrap();
    }
    sum
}

#[test]
fn one_variable_coefficient_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 200 {
        let m = rng.gen_range(1..=6);
        let p = random_nonneg(&mut rng, m);
        if p.is_zero() {
            continue;
        }
        let rep = one_var_coeff_check(p.poly(), true).unwrap();
        // independent reading of the balanced coefficient
        let deg = p.total_degree() / 2;
        let c0 = p.coeff(&Mono::new(vec![0, deg], vec![0, deg])).re;
        assert_eq!(rep.c0, c0);
        assert!(rep.c0_positive && rep.all_hold);
        for (mono, c) in p.iter() {
            let n2 = &c.re * &c.re + &c.im * &c.im;
            assert!(n2 <= &c0 * &c0, "{mono:?}");
        }
        checked += 1;
    }
}

#[test]
fn coefficient_bound_violation_certifies_negativity() {
    let p = parse_poly("2Re(z2^2)", 2).unwrap();
    let rep = one_var_coeff_check(p.poly(), false).unwrap();
    assert!(!rep.all_hold);
    assert!(rep.c0.is_zero());
}

#[test]
fn mixed_example_is_refuted() {
    let p = parse_poly("2Re(z2^2 zb3^3)", 3).unwrap();
    let v = psd_verdict(&p, &PsdOptions::default());
    assert_eq!(v.kind, VerdictKind::Refuted);
    assert!(replay_verdict(&p, &v));
    let w = v.witness.unwrap();
    assert!(w.value < q(0));
    let h = complex_hessian(p.poly());
    assert_eq!(levi_value(&h, &w.z, &w.a), w.value);
    let x: Vec<f64> = w.z.iter().map(|c| f(&c.re)).collect();
    let y: Vec<f64> = w.z.iter().map(|c| f(&c.im)).collect();
    let a: Vec<(f64, f64)> = w.a.iter().map(|c| (f(&c.re), f(&c.im))).collect();
    assert!(levi_f64(p.poly(), &x, &y, &a) < 0.0);
    let rep = cauchy_schwarz_pairing(p.poly(), 4);
    assert!(!rep.certified);
}

#[test]
fn torsion_model_pairing_structure() {
    let p = torsion_p("1/10");
    let rep = cauchy_schwarz_pairing(p.poly(), 4);
    assert_eq!(rep.mixed.len(), 1);
    let e = &rep.mixed[0];
    let mut systems = e.kernels.clone();
    systems.sort();
    assert_eq!(
        systems,
        vec![
            vec![vec![0, 0, 4, 1], vec![0, 2, 1, 1]],
            vec![vec![0, 1, 2, 2], vec![0, 1, 3, 0]],
        ]
    );
    assert!(e.joint_kernel_trivial);
}

#[test]
fn torsion_model_levi_form_goes_negative() {
    // a point and direction where the torus estimate breaks down
    let p = torsion_p("1/10");
    let h = complex_hessian(p.poly());
    let z = vec![C::zero(), c_int(10), c_int(-1), c_int(10)];
    let a = vec![C::zero(), C::zero(), c_int(-1), c_int(-10)];
    let exact = levi_value(&h, &z, &a);
    assert_eq!(exact, q(-2200));
    let a64 = [(0.0, 0.0), (0.0, 0.0), (-1.0, 0.0), (-10.0, 0.0)];
    let fd = levi_f64(p.poly(), &[0.0, 10.0, -1.0, 10.0], &[0.0; 4], &a64);
    assert!((fd - f(&exact)).abs() < 1e-2 * f(&exact).abs(), "{fd} vs {exact}");
    let v = psd_verdict(&p, &PsdOptions::default());
    assert_ne!(v.kind, VerdictKind::CertifiedPsd);
    assert!(replay_verdict(&p, &v));
}

#[test]
fn pairing_certifies_a_dominated_mixed_term() {
    let p = parse_poly(
        "|z2|^6 + |z3|^6 + |z2|^4|z3|^2 + |z2|^2|z3|^4 + 1/10 Re(z2^2 zb2 z3 zb3^2)",
        3,
    )
    .unwrap();
    let rep = cauchy_schwarz_pairing(p.poly(), 4);
    if rep.certified {
        assert!(replay_pairing(p.poly(), &rep));
    }
    let v = psd_verdict(&p, &PsdOptions::default());
    assert_ne!(v.kind, VerdictKind::Refuted);
    assert!(replay_verdict(&p, &v));
}

#[test]
fn no_mixed_terms_is_trivially_certified() {
    let p = parse_poly("|z2|^4 + |z2 z3|^2", 3).unwrap();
    let rep = cauchy_schwarz_pairing(p.poly(), 4);
    assert!(rep.certified && rep.mixed.is_empty());
}

#[test]
fn dominance_and_newton_split() {
    let p = parse_poly("|z2|^4", 2).unwrap();
    assert_eq!(
        m_dominant_coefficients(p.poly(), &q(1)),
        vec![Mono::new(vec![0, 2], vec![0, 2])]
    );
    let tie = parse_poly("|z2|^4 + |z3|^4", 3).unwrap();
    assert_eq!(m_dominant_coefficients(tie.poly(), &q(1)).len(), 2);
    let p = parse_poly("|z2|^2 + Re(z2 zb3) + |z3|^2", 3).unwrap();
    let parts = newton_split_check(p.poly(), &[1]).unwrap();
    let flagged: Vec<(u32, u32)> = parts.iter().filter(|s| s.flagged).map(|s| (s.p, s.q)).collect();
    assert_eq!(flagged, vec![(0, 2), (2, 0)]);
    assert!(newton_split_check(p.poly(), &[]).is_err());
}
