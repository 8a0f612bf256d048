//! Text syntax for polynomials.
//!
//! ```text
//! expr    = term , { ( "+" | "-" ) , term } ;
//! term    = unary , { [ "*" | "/" ] , unary } ;      (* juxtaposition multiplies *)
//! unary   = ( "+" | "-" ) , unary | power ;
//! power   = atom , [ "^" , uint ] ;
//! atom    = uint | "i" | var | cvar
//!         | ( "Re" | "Im" | "conj" ) , "(" , expr , ")"
//!         | "(" , expr , ")"
//!         | "|" , expr , "|" , "^" , even-uint ;
//! var     = "z" , index ;                            (* z1 .. zn *)
//! cvar    = "zb" , index ;                           (* conjugate of z_k *)
//! ```
//!
//! `Re(e)` is `(e + conj e)/2`, `Im(e)` is `(e - conj e)/(2i)` and
//! `|e|^(2k)` is `(e conj e)^k`. A bare `|e|` or an odd power of it is
//! rejected. Division is only allowed by a nonzero constant. Inside a
//! `|...|` group a nested `|` must be preceded by an explicit `*` since
//! it would otherwise close the group.

use thiserror::Error;

use crate::num::{c_i, c_inv, c_re, Q};
use crate::poly::{HermPoly, NonReal, Poly};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("parse error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    NonReal(#[from] NonReal),
    #[error("variable z{index} at {pos} is outside dimension n = {n}")]
    Dimension { index: usize, n: usize, pos: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let mut t = String::new();
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                t.push(chars[i].1);
                i += 1;
            }
            out.push((Tok::Num(t), pos));
        } else if c.is_ascii_alphabetic() {
            // identifiers are letters followed by an optional digit run
            let mut t = String::new();
            while i < chars.len() && chars[i].1.is_ascii_alphabetic() {
                t.push(chars[i].1);
                i += 1;
            }
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                t.push(chars[i].1);
                i += 1;
            }
            out.push((Tok::Ident(t), pos));
        } else if "+-*/^()|{}".contains(c) {
            out.push((Tok::Sym(c), pos));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected character '{}'", c),
            });
        }
    }
    out.push((Tok::End, s.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    n: usize,
    abs_depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c))
        }
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Num(_) | Tok::Ident(_) => true,
            Tok::Sym('(') => true,
            Tok::Sym('|') => self.abs_depth == 0,
            _ => false,
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if *self.peek() == Tok::Sym('/') {
                self.at += 1;
                let pos = self.pos();
                let d = self.unary()?;
                if !d.iter().all(|(m, _)| m.is_constant()) || d.is_zero() {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "division is only allowed by a nonzero constant".into(),
                    });
                }
                acc = acc.scale(&c_inv(&d.constant_term()));
            } else if self.starts_atom() {
                acc = &acc * &self.power()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        if self.eat('-') {
            Ok(-&self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let braced = self.eat('{');
        let paren = !braced && self.eat('(');
        let e = match self.peek().clone() {
            Tok::Num(t) => {
                self.at += 1;
                t.parse::<u32>().or_else(|_| self.err("exponent too large"))?
            }
            _ => return self.err("expected a nonnegative integer exponent"),
        };
        if braced {
            self.expect('}')?;
        }
        if paren {
            self.expect(')')?;
        }
        Ok(e)
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let is_abs = *self.peek() == Tok::Sym('|');
        let base = self.atom()?;
        if is_abs {
            return Ok(base);
        }
        if self.eat('^') {
            let e = self.exponent()?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn index(&self, digits: &str, pos: usize) -> Result<usize, ParseError> {
        let k: usize = digits.parse().map_err(|_| ParseError::Syntax {
            pos,
            msg: "bad variable index".into(),
        })?;
        if k == 0 || k > self.n {
            return Err(ParseError::Dimension {
                index: k,
                n: self.n,
                pos,
            });
        }
        Ok(k - 1)
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(t) => {
                self.at += 1;
                let v: num_bigint::BigInt = t.parse().unwrap();
                Ok(Poly::constant(self.n, c_re(Q::from_integer(v))))
            }
            Tok::Ident(id) => {
                self.at += 1;
                match id.as_str() {
                    "i" => Ok(Poly::constant(self.n, c_i())),
                    "Re" | "re" | "Im" | "im" | "conj" => {
                        self.expect('(')?;
                        let e = self.expr()?;
                        self.expect(')')?;
                        Ok(match id.as_str() {
                            "Re" | "re" => e.re(),
                            "Im" | "im" => e.im(),
                            _ => e.conj(),
                        })
                    }
                    _ => {
                        if let Some(d) = id.strip_prefix("zb") {
                            if !d.is_empty() {
                                return Ok(Poly::cvar(self.n, self.index(d, pos)?));
                            }
                        }
                        if let Some(d) = id.strip_prefix('z') {
                            if !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()) {
                                return Ok(Poly::var(self.n, self.index(d, pos)?));
                            }
                        }
                        Err(ParseError::Syntax {
                            pos,
                            msg: format!("unknown identifier '{}'", id),
                        })
                    }
                }
            }
            Tok::Sym('(') => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym('|') => {
                self.at += 1;
                self.abs_depth += 1;
                let e = self.expr()?;
                self.abs_depth -= 1;
                self.expect('|')?;
                if !self.eat('^') {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "modulus must be raised to an even power".into(),
                    });
                }
                let epos = self.pos();
                let k = self.exponent()?;
                if k % 2 != 0 {
                    return Err(ParseError::Syntax {
                        pos: epos,
                        msg: format!("odd power {} of a modulus is not polynomial", k),
                    });
                }
                Ok((&e * &e.conj()).pow(k / 2))
            }
            Tok::End => self.err("unexpected end of input"),
            Tok::Sym(c) => self.err(format!("unexpected '{}'", c)),
        }
    }
}

/// Parses an arbitrary (possibly complex-valued) polynomial expression.
pub fn parse_expr(text: &str, n: usize) -> Result<Poly, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        n,
        abs_depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses a real-valued polynomial.
pub fn parse_poly(text: &str, n: usize) -> Result<HermPoly, ParseError> {
    Ok(HermPoly::new(parse_expr(text, n)?)?)
}

/// Smallest `n` such that `text` only mentions `z1..zn`.
pub fn infer_dimension(text: &str) -> usize {
    let mut n = 0;
    if let Ok(toks) = lex(text) {
        for (t, _) in toks {
            if let Tok::Ident(id) = t {
                let d = id.strip_prefix("zb").or_else(|| id.strip_prefix('z'));
                if let Some(k) = d.and_then(|d| d.parse::<usize>().ok()) {
                    n = n.max(k);
                }
            }
        }
    }
    n.max(1)
}
