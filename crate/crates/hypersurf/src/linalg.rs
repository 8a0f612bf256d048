//! Exact dense linear algebra over Gaussian rationals.

use num_traits::{One, Zero};

use crate::num::{c_inv, c_re, conj, norm2, C, Q};

pub type Mat = Vec<Vec<C>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { C::one() } else { C::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b.first().map(|r| r.len()).unwrap_or(0);
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(C::zero(), |acc, t| acc + &a[i][t] * &b[t][j]))
                .collect()
        })
        .collect()
}

pub fn adjoint(a: &Mat) -> Mat {
    let n = a.len();
    let m = a.first().map(|r| r.len()).unwrap_or(0);
    (0..m).map(|j| (0..n).map(|i| conj(&a[i][j])).collect()).collect()
}

pub fn mat_vec(a: &Mat, x: &[C]) -> Vec<C> {
    a.iter()
        .map(|row| row.iter().zip(x).fold(C::zero(), |acc, (u, v)| acc + u * v))
        .collect()
}

/// `x* H x`, real for Hermitian `H`.
pub fn quad_form(h: &Mat, x: &[C]) -> Q {
    let hx = mat_vec(h, x);
    let s = x.iter().zip(&hx).fold(C::zero(), |acc, (u, v)| acc + conj(u) * v);
    s.re
}

/// Reduced row echelon form; returns the reduced matrix and pivot columns.
pub fn rref(a: &Mat) -> (Mat, Vec<usize>) {
    let mut m = a.clone();
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = c_inv(&m[r][c]);
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] = &m[i][j] - t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank(a: &Mat) -> usize {
    rref(a).1.len()
}

/// Solves `A x = b` for square invertible `A`.
pub fn solve(a: &Mat, b: &[C]) -> Option<Vec<C>> {
    let n = a.len();
    let aug: Mat = a
        .iter()
        .zip(b)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let (m, piv) = rref(&aug);
    if piv.len() != n || piv.iter().any(|&c| c >= n) {
        return None;
    }
    Some(m.iter().map(|row| row[n].clone()).collect())
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { C::one() } else { C::zero() }));
            r
        })
        .collect();
    let (m, piv) = rref(&aug);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(m.iter().map(|row| row[n..].to_vec()).collect())
}

/// Basis of the null space of `A`.
pub fn kernel(a: &Mat, cols: usize) -> Vec<Vec<C>> {
    if a.is_empty() {
        return (0..cols)
            .map(|i| (0..cols).map(|j| if i == j { C::one() } else { C::zero() }).collect())
            .collect();
    }
    let (m, piv) = rref(a);
    let mut out = Vec::new();
    for f in (0..cols).filter(|c| !piv.contains(c)) {
        let mut v = vec![C::zero(); cols];
        v[f] = C::one();
        for (r, &p) in piv.iter().enumerate() {
            v[p] = -m[r][f].clone();
        }
        out.push(v);
    }
    out
}

/// `H = L D L*` with `L` unit lower triangular and `D` real diagonal.
#[derive(Clone, Debug)]
pub struct Ldl {
    pub l: Mat,
    pub d: Vec<Q>,
}

/// Result of the exact semidefiniteness test of a Hermitian matrix.
#[derive(Clone, Debug)]
pub enum PsdResult {
    Psd(Ldl),
    /// A vector with `x* H x < 0`, together with that value.
    Negative(Vec<C>, Q),
}

/// Symmetric Gaussian elimination without pivoting. A zero pivot is fine
/// if the rest of its row vanishes; otherwise a negative direction is built.
pub fn hermitian_psd(h: &Mat) -> PsdResult {
    let n = h.len();
    let mut a = h.clone();
    let mut l = identity(n);
    let mut d = vec![Q::zero(); n];
    for k in 0..n {
        let dk = a[k][k].re.clone();
        if dk < Q::zero() {
            return negative_from_schur(h, k, &d, None);
        }
        if dk.is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !a[j][k].is_zero()) {
                return negative_from_schur(h, k, &d, Some((j, &a)));
            }
            continue;
        }
        d[k] = dk.clone();
        let inv = c_re(dk.recip());
        for i in k + 1..n {
            l[i][k] = &a[i][k] * &inv;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &l[i][k] * &a[k][j];
                a[i][j] = &a[i][j] - t;
            }
        }
        for i in k + 1..n {
            a[i][k] = C::zero();
            a[k][i] = C::zero();
        }
    }
    PsdResult::Psd(Ldl { l, d })
}

// Builds x in the Schur complement at step k, then lifts it to the
// original coordinates.
fn negative_from_schur(h: &Mat, k: usize, d: &[Q], zero_pivot: Option<(usize, &Mat)>) -> PsdResult {
    let n = h.len();
    let mut x = vec![C::zero(); n];
    match zero_pivot {
        None => x[k] = C::one(),
        Some((j, a)) => {
            // x = e_j + t e_k with t = -s a_kj
            let akj = a[k][j].clone();
            let ajj = a[j][j].re.clone();
            let abs_ajj = if ajj < Q::zero() { -ajj } else { ajj };
            let s = (abs_ajj + Q::one()) / norm2(&akj);
            x[j] = C::one();
            x[k] = -(c_re(s) * akj);
        }
    }
    // lift through the positive pivots P: H_PP y = -H_PR x_R
    let p: Vec<usize> = (0..k).filter(|&i| d[i] > Q::zero()).collect();
    if !p.is_empty() {
        let hpp: Mat = p
            .iter()
            .map(|&i| p.iter().map(|&j| h[i][j].clone()).collect())
            .collect();
        let rhs: Vec<C> = p
            .iter()
            .map(|&i| -(k..n).fold(C::zero(), |acc, j| acc + &h[i][j] * &x[j]))
            .collect();
        let y = solve(&hpp, &rhs).expect("positive pivots give an invertible block");
        for (t, &i) in p.iter().enumerate() {
            x[i] = y[t].clone();
        }
    }
    let v = quad_form(h, &x);
    debug_assert!(v < Q::zero());
    PsdResult::Negative(x, v)
}

/// Replays an `L D L*` certificate against `H`.
pub fn check_ldl(h: &Mat, c: &Ldl) -> bool {
    let n = h.len();
    if c.l.len() != n || c.d.len() != n || c.d.iter().any(|x| *x < Q::zero()) {
        return false;
    }
    for i in 0..n {
        if !c.l[i][i].is_one() || (i + 1..n).any(|j| !c.l[i][j].is_zero()) {
            return false;
        }
    }
    let dm: Mat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { c_re(c.d[i].clone()) } else { C::zero() })
                .collect()
        })
        .collect();
    mat_mul(&mat_mul(&c.l, &dm), &adjoint(&c.l)) == *h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{c_int, q};

    fn m(rows: &[&[i64]]) -> Mat {
        rows.iter().map(|r| r.iter().map(|&x| c_int(x)).collect()).collect()
    }

    #[test]
    fn inverse_and_solve() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert_eq!(solve(&a, &[c_int(3), c_int(2)]).unwrap(), vec![c_int(1), c_int(1)]);
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(kernel(&m(&[&[1, 2]]), 2), vec![vec![c_int(-2), c_int(1)]]);
    }

    #[test]
    fn psd_certificates_and_witnesses() {
        let h = m(&[&[2, 1, 0], &[1, 1, 0], &[0, 0, 0]]);
        match hermitian_psd(&h) {
            PsdResult::Psd(c) => assert!(check_ldl(&h, &c)),
            _ => panic!("expected psd"),
        }
        for h in [
            m(&[&[1, 2], &[2, 1]]),
            m(&[&[0, 1], &[1, 0]]),
            m(&[&[1, 0, 0], &[0, 0, 3], &[0, 3, 1]]),
        ] {
            match hermitian_psd(&h) {
                PsdResult::Negative(x, v) => {
                    assert!(v < q(0));
                    assert_eq!(quad_form(&h, &x), v);
                }
                _ => panic!("expected a negative direction"),
            }
        }
    }
}
