//! Exact scalar helpers: rationals, Gaussian rationals and the extended
//! rationals used by inverse weights.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary precision rational.
pub type Q = BigRational;

/// Complex number with rational real and imaginary parts.
pub type C = Complex<Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn c_re(x: Q) -> C {
    C::new(x, Q::zero())
}

pub fn c_int(n: i64) -> C {
    C::new(q(n), Q::zero())
}

pub fn c_i() -> C {
    C::new(Q::zero(), Q::one())
}

pub fn conj(z: &C) -> C {
    C::new(z.re.clone(), -z.im.clone())
}

/// |z|^2, which stays rational.
pub fn norm2(z: &C) -> Q {
    &z.re * &z.re + &z.im * &z.im
}

pub fn is_real(z: &C) -> bool {
    z.im.is_zero()
}

pub fn c_inv(z: &C) -> C {
    let d = norm2(z);
    C::new(&z.re / &d, -&z.im / &d)
}

/// Parses `p`, `-p` or `p/q` with integer `p`, `q`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a = BigInt::from_str(a.trim()).ok()?;
            let b = BigInt::from_str(b.trim()).ok()?;
            if b.is_zero() {
                None
            } else {
                Some(Q::new(a, b))
            }
        }
        None => BigInt::from_str(s).ok().map(Q::from_integer),
    }
}

/// Canonical string form of a rational (`p` or `p/q`).
pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

/// Human-readable complex coefficient.
pub fn fmt_c(z: &C) -> String {
    if z.im.is_zero() {
        fmt_q(&z.re)
    } else if z.re.is_zero() {
        format!("{}i", fmt_q(&z.im))
    } else if z.im.is_negative() {
        format!("({} - {}i)", fmt_q(&z.re), fmt_q(&-z.im.clone()))
    } else {
        format!("({} + {}i)", fmt_q(&z.re), fmt_q(&z.im))
    }
}

pub fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Nonnegative rational extended with `+inf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtQ {
    Fin(Q),
    Inf,
}

impl ExtQ {
    pub fn is_inf(&self) -> bool {
        matches!(self, ExtQ::Inf)
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtQ::Fin(x) => Some(x),
            ExtQ::Inf => None,
        }
    }

    /// Reciprocal with `0^{-1} = inf` and `inf^{-1} = 0`.
    pub fn recip(&self) -> ExtQ {
        match self {
            ExtQ::Inf => ExtQ::Fin(Q::zero()),
            ExtQ::Fin(x) if x.is_zero() => ExtQ::Inf,
            ExtQ::Fin(x) => ExtQ::Fin(x.recip()),
        }
    }

    pub fn parse(s: &str) -> Option<ExtQ> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "+inf" || t == "∞" {
            Some(ExtQ::Inf)
        } else {
            parse_q(t).map(ExtQ::Fin)
        }
    }
}

impl PartialOrd for ExtQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtQ {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtQ::Inf, ExtQ::Inf) => Ordering::Equal,
            (ExtQ::Inf, _) => Ordering::Greater,
            (_, ExtQ::Inf) => Ordering::Less,
            (ExtQ::Fin(a), ExtQ::Fin(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtQ::Inf => write!(f, "inf"),
            ExtQ::Fin(x) => write!(f, "{}", x),
        }
    }
}
