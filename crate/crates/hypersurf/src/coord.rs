//! Weighted polynomial holomorphic changes of coordinates.

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{inverse, Mat};
use crate::model::weighted_order;
use crate::num::C;
use crate::poly::{HermPoly, Mono, Poly};
use crate::weights::Weight;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoordError {
    #[error("expected {expected} component maps, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("component z{0} is not holomorphic")]
    NotHolomorphic(usize),
    #[error("component z{0} has a constant term")]
    ConstantTerm(usize),
    #[error("component z{j} contains {mono} of weight below mu_{j}")]
    WeightTooLow { j: usize, mono: String },
    #[error("component z{j} contains the nonlinear leading term {mono}")]
    NonlinearLeading { j: usize, mono: String },
    #[error("the linear block on variables {0:?} is singular")]
    Singular(Vec<usize>),
}

/// `z_j -> maps[j](z)`, weighted with respect to `mu`. Variable numbers in
/// error messages are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordChange {
    maps: Vec<Poly>,
    mu: Weight,
}

impl CoordChange {
    pub fn new(maps: Vec<Poly>, mu: Weight) -> Result<CoordChange, CoordError> {
        let n = mu.n();
        if maps.len() != n {
            return Err(CoordError::Dimension {
                expected: n,
                got: maps.len(),
            });
        }
        for (j, f) in maps.iter().enumerate() {
            if f.n() != n {
                return Err(CoordError::Dimension {
                    expected: n,
                    got: f.n(),
                });
            }
            if !f.is_holomorphic() {
                return Err(CoordError::NotHolomorphic(j + 1));
            }
            if !f.constant_term().is_zero() {
                return Err(CoordError::ConstantTerm(j + 1));
            }
            for (m, c) in f.iter() {
                let w = weighted_order(m, &mu);
                let show = || Poly::term(n, m.clone(), c.clone()).to_string();
                if w < mu[j] {
                    return Err(CoordError::WeightTooLow { j: j + 1, mono: show() });
                }
                let touches_group = (0..n).any(|k| m.alpha[k] > 0 && mu[k] == mu[j]);
                if w == mu[j] && touches_group && m.degree() != 1 {
                    return Err(CoordError::NonlinearLeading { j: j + 1, mono: show() });
                }
            }
        }
        for group in groups(&mu) {
            let block: Mat = group
                .iter()
                .map(|&j| group.iter().map(|&k| maps[j].coeff(&lin(n, k))).collect())
                .collect();
            if inverse(&block).is_none() {
                return Err(CoordError::Singular(group.iter().map(|j| j + 1).collect()));
            }
        }
        Ok(CoordChange { maps, mu })
    }

    pub fn identity(mu: Weight) -> CoordChange {
        let n = mu.n();
        CoordChange {
            maps: (0..n).map(|j| Poly::var(n, j)).collect(),
            mu,
        }
    }

    pub fn n(&self) -> usize {
        self.mu.n()
    }

    pub fn maps(&self) -> &[Poly] {
        &self.maps
    }

    pub fn weight(&self) -> &Weight {
        &self.mu
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().enumerate().all(|(j, f)| *f == Poly::var(self.n(), j))
    }

    /// `p(c(z))`.
    pub fn apply(&self, p: &HermPoly) -> HermPoly {
        assert_eq!(p.n(), self.n(), "dimension mismatch");
        HermPoly::new(p.compose_holo(&self.maps)).expect("holomorphic substitution keeps real-valuedness")
    }

    /// The change `z -> self(other(z))`, so that applying it equals applying
    /// `self` first and `other` second.
    pub fn then(&self, other: &CoordChange) -> CoordChange {
        assert_eq!(self.n(), other.n(), "dimension mismatch");
        let maps = self.maps.iter().map(|f| f.compose_holo(&other.maps)).collect();
        CoordChange {
            maps,
            mu: self.mu.clone(),
        }
    }
}

/// `substitute(p, c)` = `p(c(z))`.
pub fn substitute(p: &HermPoly, c: &CoordChange) -> HermPoly {
    c.apply(p)
}

fn lin(n: usize, k: usize) -> Mono {
    let mut a = vec![0; n];
    a[k] = 1;
    Mono::new(a, vec![0; n])
}

/// Index groups of equal weight, in order.
pub fn groups(mu: &Weight) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for j in 0..mu.n() {
        match out.last_mut() {
            Some(g) if mu[g[0]] == mu[j] => g.push(j),
            _ => out.push(vec![j]),
        }
    }
    out
}

/// Convenience: `z_j -> coef * z_j + extra` for a single `j`.
pub fn shift(mu: &Weight, j: usize, extra: &Poly) -> Result<CoordChange, CoordError> {
    let n = mu.n();
    let mut maps: Vec<Poly> = (0..n).map(|k| Poly::var(n, k)).collect();
    maps[j] = &maps[j] + extra;
    CoordChange::new(maps, mu.clone())
}

/// Linear change on one block: `z_g -> Σ_h M[g][h] z_h` for `g, h` in `block`.
pub fn block_linear(mu: &Weight, block: &[usize], m: &Mat) -> Result<CoordChange, CoordError> {
    let n = mu.n();
    let mut maps: Vec<Poly> = (0..n).map(|k| Poly::var(n, k)).collect();
    for (a, &g) in block.iter().enumerate() {
        let mut f = Poly::zero(n);
        for (b, &h) in block.iter().enumerate() {
            f.add_term(lin(n, h), m[a][b].clone());
        }
        maps[g] = f;
    }
    CoordChange::new(maps, mu.clone())
}

pub fn scale_one(mu: &Weight, j: usize, s: &C) -> Result<CoordChange, CoordError> {
    let n = mu.n();
    let mut maps: Vec<Poly> = (0..n).map(|k| Poly::var(n, k)).collect();
    maps[j] = maps[j].scale(s);
    CoordChange::new(maps, mu.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{c_int, q, qf};
    use crate::parse::{parse_expr, parse_poly};

    fn mu(v: Vec<crate::num::Q>) -> Weight {
        Weight::new(v).unwrap()
    }

    #[test]
    fn validation() {
        let w = mu(vec![q(1), qf(1, 4), qf(1, 8)]);
        let ok = CoordChange::new(
            vec![
                parse_expr("z1", 3).unwrap(),
                parse_expr("z2 + z3^2", 3).unwrap(),
                parse_expr("z3", 3).unwrap(),
            ],
            w.clone(),
        );
        assert!(ok.is_ok());
        let low = CoordChange::new(
            vec![
                parse_expr("z1", 3).unwrap(),
                parse_expr("z2 + z3", 3).unwrap(),
                parse_expr("z3", 3).unwrap(),
            ],
            w.clone(),
        );
        assert!(matches!(low, Err(CoordError::WeightTooLow { .. })));
        let sing = CoordChange::new(
            vec![
                parse_expr("z1", 3).unwrap(),
                parse_expr("z2 + z3^2", 3).unwrap(),
                parse_expr("0", 3).unwrap(),
            ],
            w,
        );
        assert!(matches!(sing, Err(CoordError::Singular(_))));
    }

    #[test]
    fn scaling_and_identity() {
        let w = mu(vec![q(1), qf(1, 2)]);
        let p = parse_poly("|z2|^2", 2).unwrap();
        assert_eq!(substitute(&p, &CoordChange::identity(w.clone())), p);
        let c = scale_one(&w, 1, &c_int(2)).unwrap();
        assert_eq!(substitute(&p, &c), parse_poly("4|z2|^2", 2).unwrap());
    }

    #[test]
    fn square_identity() {
        // |z2|^{2p} + |z3|^{2q} + 2 eps Re(z2^p zb3^q) as a sum of squares
        let p = parse_poly("|z2|^6 + |z3|^4 + 2/5 Re(z2^3 zb3^2)", 3).unwrap();
        let s = parse_poly("|z2^3 + 1/5 z3^2|^2 + 24/25 |z3|^4", 3).unwrap();
        assert!((&p - &s).is_zero());
    }
}
