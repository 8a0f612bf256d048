//! Canonical JSON form of polynomials and weights.
//!
//! ```json
//! {"n":2,"terms":[{"alpha":[0,2],"beta":[0,2],"re":"1","im":"0"}]}
//! ```
//!
//! Terms are written in the canonical monomial order and rationals as
//! `p` or `p/q` strings, so serializing a parsed document reproduces it
//! byte for byte.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{fmt_q, parse_q, ExtQ, C};
use crate::poly::{HermPoly, Mono, NonReal, Poly};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("invalid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid rational '{0}'")]
    Rational(String),
    #[error("term {index}: exponent vectors must have length n = {n}")]
    Dimension { index: usize, n: usize },
    #[error("term {index}: duplicate or zero coefficient")]
    NotCanonical { index: usize },
    #[error(transparent)]
    NonReal(#[from] NonReal),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

impl From<&Poly> for PolyJson {
    fn from(p: &Poly) -> PolyJson {
        PolyJson {
            n: p.n(),
            terms: p
                .iter()
                .map(|(m, c)| TermJson {
                    alpha: m.alpha.clone(),
                    beta: m.beta.clone(),
                    re: fmt_q(&c.re),
                    im: fmt_q(&c.im),
                })
                .collect(),
        }
    }
}

impl PolyJson {
    pub fn to_poly(&self) -> Result<Poly, JsonError> {
        let mut p = Poly::zero(self.n);
        for (index, t) in self.terms.iter().enumerate() {
            if t.alpha.len() != self.n || t.beta.len() != self.n {
                return Err(JsonError::Dimension { index, n: self.n });
            }
            let re = parse_q(&t.re).ok_or_else(|| JsonError::Rational(t.re.clone()))?;
            let im = parse_q(&t.im).ok_or_else(|| JsonError::Rational(t.im.clone()))?;
            let m = Mono::new(t.alpha.clone(), t.beta.clone());
            let c = C::new(re, im);
            if c.is_zero() || !p.coeff(&m).is_zero() {
                return Err(JsonError::NotCanonical { index });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }
}

pub fn poly_to_value(p: &Poly) -> serde_json::Value {
    serde_json::to_value(PolyJson::from(p)).expect("polynomial JSON")
}

pub fn poly_to_json(p: &Poly) -> String {
    serde_json::to_string(&PolyJson::from(p)).expect("polynomial JSON")
}

pub fn poly_from_json(s: &str) -> Result<Poly, JsonError> {
    let j: PolyJson = serde_json::from_str(s)?;
    j.to_poly()
}

pub fn poly_from_value(v: &serde_json::Value) -> Result<Poly, JsonError> {
    let j: PolyJson = serde_json::from_value(v.clone())?;
    j.to_poly()
}

pub fn herm_from_json(s: &str) -> Result<HermPoly, JsonError> {
    Ok(HermPoly::new(poly_from_json(s)?)?)
}

/// `{"re": "p/q", "im": "p/q"}`.
pub fn c_value(c: &C) -> serde_json::Value {
    serde_json::json!({"re": fmt_q(&c.re), "im": fmt_q(&c.im)})
}

pub fn q_value(x: &crate::num::Q) -> serde_json::Value {
    serde_json::Value::String(fmt_q(x))
}

pub fn mat_value(m: &[Vec<C>]) -> serde_json::Value {
    serde_json::Value::Array(
        m.iter()
            .map(|row| serde_json::Value::Array(row.iter().map(c_value).collect()))
            .collect(),
    )
}

pub fn mono_value(m: &Mono) -> serde_json::Value {
    serde_json::json!({"alpha": m.alpha, "beta": m.beta})
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightJson {
    pub lambda: Vec<String>,
}

pub fn lambda_to_json(l: &[ExtQ]) -> String {
    serde_json::to_string(&WeightJson {
        lambda: l.iter().map(|x| x.to_string()).collect(),
    })
    .expect("weight JSON")
}

pub fn lambda_from_json(s: &str) -> Result<Vec<ExtQ>, JsonError> {
    let j: WeightJson = serde_json::from_str(s)?;
    j.lambda
        .iter()
        .map(|x| ExtQ::parse(x).ok_or_else(|| JsonError::Rational(x.clone())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    #[test]
    fn round_trip_is_byte_exact() {
        let p = parse_poly("-2Re(z1) + |z2|^4 + 2Re((1/3 - 2i) z2^3 zb3)", 3).unwrap();
        let s = poly_to_json(&p);
        let q = herm_from_json(&s).unwrap();
        assert_eq!(q, p);
        assert_eq!(poly_to_json(&q), s);
    }

    #[test]
    fn small_document() {
        let p = parse_poly("|z2|^4", 2).unwrap();
        assert_eq!(
            poly_to_json(&p),
            r#"{"n":2,"terms":[{"alpha":[0,2],"beta":[0,2],"re":"1","im":"0"}]}"#
        );
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(poly_from_json("{").is_err());
        assert!(poly_from_json(r#"{"n":2,"terms":[{"alpha":[0],"beta":[0,2],"re":"1","im":"0"}]}"#).is_err());
        assert!(poly_from_json(r#"{"n":1,"terms":[{"alpha":[1],"beta":[1],"re":"0.5","im":"0"}]}"#).is_err());
        assert!(herm_from_json(r#"{"n":1,"terms":[{"alpha":[2],"beta":[0],"re":"1","im":"0"}]}"#).is_err());
    }

    #[test]
    fn weights() {
        let l = lambda_from_json(r#"{"lambda":["1","2","inf"]}"#).unwrap();
        assert_eq!(l[2], ExtQ::Inf);
        assert_eq!(lambda_to_json(&l), r#"{"lambda":["1","2","inf"]}"#);
    }
}
