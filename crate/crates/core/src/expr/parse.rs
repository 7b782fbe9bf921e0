//! Recursive-descent parser for polynomial expressions in `x` and `y`.
//!
//! ```text
//! map    := expr ',' expr ',' expr ',' expr
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' natural)?
//! atom   := natural | 'x' | 'y' | '(' expr ')'
//! ```
//!
//! Juxtaposition is not multiplication: `xy` and `2x` are rejected.

use num_bigint::BigInt;
use num_traits::Zero;

use super::poly::{Poly2, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ if c.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((start, Tok::Num(n)));
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", text[start..].chars().next().unwrap()),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<Poly2> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly2> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    if d.degree().unwrap_or(0) > 0 {
                        return Err(Error::Syntax {
                            pos,
                            msg: "division by a non-constant expression".into(),
                        });
                    }
                    let c = d.constant_term();
                    if c.is_zero() {
                        return Err(Error::Syntax {
                            pos,
                            msg: "division by zero".into(),
                        });
                    }
                    acc = acc.scale(&(Rational::from_integer(1.into()) / c));
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    return self.err("implicit multiplication is not allowed; use `*`")
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly2> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly2> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            match self.bump() {
                Some(Tok::Num(n)) => {
                    let e: u32 = n
                        .try_into()
                        .ok()
                        .filter(|&e: &u32| e <= 1000)
                        .ok_or_else(|| Error::Syntax {
                            pos: self.toks[self.at - 1].0,
                            msg: "exponent too large".into(),
                        })?;
                    Ok(base.pow(e))
                }
                _ => {
                    self.at -= 1;
                    self.err("expected a natural-number exponent after `^`")
                }
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly2> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(Poly2::constant(Rational::from_integer(n))),
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Poly2::x()),
                "y" => Ok(Poly2::y()),
                _ if name.chars().all(|c| c == 'x' || c == 'y') || name.chars().next().unwrap().is_ascii_digit() => {
                    Err(Error::Syntax {
                        pos,
                        msg: format!("`{name}`: implicit multiplication is not allowed; use `*`"),
                    })
                }
                _ => Err(Error::TooManyVariables(name)),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                if self.bump() != Some(Tok::RParen) {
                    self.at -= 1;
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(_) => {
                self.at -= 1;
                self.err("expected a number, `x`, `y` or `(`")
            }
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses a comma-separated list of polynomial expressions.
pub(crate) fn parse_components(text: &str) -> Result<Vec<Poly2>> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let mut out = vec![p.expr()?];
    while p.peek() == Some(&Tok::Comma) {
        p.bump();
        out.push(p.expr()?);
    }
    if p.peek().is_some() {
        return p.err("unexpected token");
    }
    Ok(out)
}

/// Parses a single polynomial expression.
pub fn parse_poly(text: &str) -> Result<Poly2> {
    let mut comps = parse_components(text)?;
    if comps.len() != 1 {
        return Err(Error::Syntax {
            pos: 0,
            msg: "expected a single polynomial".into(),
        });
    }
    Ok(comps.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::poly::rat;

    #[test]
    fn precedence_and_unary_minus() {
        let p = parse_poly("-x^2 + 3/2*y^3 - (x - y)*(x + y)").unwrap();
        // -x^2 + 3/2 y^3 - x^2 + y^2
        assert_eq!(p.coeff(2, 0), rat(-2, 1));
        assert_eq!(p.coeff(0, 2), rat(1, 1));
        assert_eq!(p.coeff(0, 3), rat(3, 2));
    }

    #[test]
    fn rejects_implicit_multiplication() {
        assert!(matches!(parse_poly("xy"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_poly("2x"), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse_poly("2 (x)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn rejects_third_variable() {
        assert_eq!(parse_poly("x + z"), Err(Error::TooManyVariables("z".into())));
    }

    #[test]
    fn reports_position() {
        match parse_poly("x + * y") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_poly("x / y").is_err());
        assert!(parse_poly("x / 0").is_err());
        assert!(parse_poly("(x + y").is_err());
    }
}
