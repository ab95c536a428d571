//! Recursive-descent parser for graded-element expressions.
//!
//! Grammar:
//!   expr   := term (('+' | '-') term)*
//!   term   := factor (('*' | '/') factor)*
//!   factor := '-' factor | atom
//!   atom   := integer
//!           | name                      (base-field generator, e.g. i or x)
//!           | unit '^' '(' int (',' int)* ')'
//!           | unit                      (shorthand for unit^(1,0,...,0))
//!           | '(' expr ')'
//!
//! Errors carry the 1-based column of the offending token.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::basefield::BaseField;
use crate::gradedfield::{GradedElement, GradedField};
use crate::matrix::Rat;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
    LParen,
    RParen,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(input: &str) -> Result<Lexer> {
    let chars: Vec<char> = input.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let col = i + 1;
        let c = chars[i];
        match c {
            ' ' | '\t' => {
                i += 1;
            }
            '+' => {
                toks.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, col));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, col));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, col));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, col));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Int(s.parse().unwrap()), col));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                toks.push((Tok::Name(s), col));
            }
            other => {
                return Err(Error::Parse {
                    col,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    toks.push((Tok::End, chars.len() + 1));
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }
    fn next(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn expect(&mut self, want: Tok, what: &str) -> Result<usize> {
        let (t, col) = self.next();
        if t == want {
            Ok(col)
        } else {
            Err(Error::Parse {
                col,
                msg: format!("expected {what}"),
            })
        }
    }
}

struct Parser<'a> {
    field: &'a GradedField,
    lx: Lexer,
}

fn generator_name(base: &BaseField) -> Option<&str> {
    match base {
        BaseField::SimpleExtension { name, .. } => Some(name),
        BaseField::RationalFunctions { var, .. } => Some(var),
        _ => None,
    }
}

impl<'a> Parser<'a> {
    fn expr(&mut self) -> Result<GradedElement> {
        let mut acc = self.term()?;
        loop {
            match self.lx.peek().0 {
                Tok::Plus => {
                    self.lx.next();
                    let t = self.term()?;
                    acc = self.field.add(&acc, &t)?;
                }
                Tok::Minus => {
                    self.lx.next();
                    let t = self.term()?;
                    acc = self.field.sub(&acc, &t)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<GradedElement> {
        let mut acc = self.factor()?;
        loop {
            match self.lx.peek().0 {
                Tok::Star => {
                    self.lx.next();
                    let f = self.factor()?;
                    acc = self.field.mul(&acc, &f)?;
                }
                Tok::Slash => {
                    let col = self.lx.next().1;
                    let f = self.factor()?;
                    let inv = self.field.invert_homogeneous(&f).map_err(|e| match e {
                        Error::NonHomogeneous(_) | Error::ZeroElement => Error::Parse {
                            col,
                            msg: "division by a non-invertible element".into(),
                        },
                        other => other,
                    })?;
                    acc = self.field.mul(&acc, &inv)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<GradedElement> {
        if self.lx.peek().0 == Tok::Minus {
            self.lx.next();
            let f = self.factor()?;
            return self.field.neg(&f);
        }
        self.atom()
    }

    fn signed_int(&mut self) -> Result<BigInt> {
        let mut neg = false;
        loop {
            match self.lx.peek().0 {
                Tok::Minus => {
                    neg = !neg;
                    self.lx.next();
                }
                Tok::Plus => {
                    self.lx.next();
                }
                _ => break,
            }
        }
        let (t, col) = self.lx.next();
        match t {
            Tok::Int(n) => Ok(if neg { -n } else { n }),
            _ => Err(Error::Parse {
                col,
                msg: "expected an integer exponent".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<GradedElement> {
        let (t, col) = self.lx.next();
        match t {
            Tok::Int(n) => {
                let q = Rat::from(n);
                let c = self.field.base.from_rat(&q).map_err(|_| Error::Parse {
                    col,
                    msg: "constant not representable in the base field".into(),
                })?;
                Ok(self
                    .field
                    .monomial(&vec![Rat::zero(); self.field.gamma.ambient_dim], c)?)
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.lx.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Name(name) if name == self.field.unit_name => {
                if self.lx.peek().0 != Tok::Caret {
                    let mut coords = vec![BigInt::zero(); self.field.gamma.rank()];
                    coords[0] = BigInt::from(1);
                    return Ok(self.field.monomial_coords(&coords, self.field.base.one()));
                }
                self.lx.next();
                self.lx.expect(Tok::LParen, "'(' after '^'")?;
                let mut exps = vec![self.signed_int()?];
                while self.lx.peek().0 == Tok::Comma {
                    self.lx.next();
                    exps.push(self.signed_int()?);
                }
                let close = self.lx.peek().1;
                self.lx.expect(Tok::RParen, "')'")?;
                if exps.len() != self.field.gamma.rank() {
                    return Err(Error::Parse {
                        col: close,
                        msg: format!(
                            "expected {} exponent(s), found {}",
                            self.field.gamma.rank(),
                            exps.len()
                        ),
                    });
                }
                Ok(self.field.monomial_coords(&exps, self.field.base.one()))
            }
            Tok::Name(name) => {
                if generator_name(&self.field.base) == Some(name.as_str()) {
                    let g = self.field.base.generator().unwrap();
                    Ok(self
                        .field
                        .monomial(&vec![Rat::zero(); self.field.gamma.ambient_dim], g)?)
                } else {
                    Err(Error::Parse {
                        col,
                        msg: format!("unknown name '{name}'"),
                    })
                }
            }
            _ => Err(Error::Parse {
                col,
                msg: "expected a number, name, or '('".into(),
            }),
        }
    }
}

/// Parse an element expression against a graded field.
pub fn parse_element(field: &GradedField, input: &str) -> Result<GradedElement> {
    let lx = lex(input)?;
    let mut p = Parser { field, lx };
    let e = p.expr()?;
    let (t, col) = p.lx.next();
    if t != Tok::End {
        return Err(Error::Parse {
            col,
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{q_z, qi_z};
    use crate::matrix::{rat, rat_int};

    #[test]
    fn parses_reference_expressions() {
        let k = qi_z();
        let e = parse_element(&k, "(1+2*i)*u^(-1) + 3").unwrap();
        assert_eq!(k.format(&e), "(1 + 2*i)*u^(-1) + 3");
        let e = parse_element(&k, "10*u^(1)").unwrap();
        assert_eq!(k.format(&e), "10*u^(1)");
        let e = parse_element(&k, "u").unwrap();
        assert_eq!(k.format(&e), "u^(1)");
        let e = parse_element(&k, "1/5 * u^(2) - i").unwrap();
        assert_eq!(
            e,
            k.sub(
                &k.monomial(&[rat_int(2)], k.base.from_rat(&rat(1, 5)).unwrap())
                    .unwrap(),
                &k.monomial(&[rat_int(0)], crate::fixtures::i_el()).unwrap()
            )
            .unwrap()
        );
    }

    #[test]
    fn error_positions() {
        let k = q_z();
        match parse_element(&k, "u^(") {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 4),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_element(&k, "2 + * 3") {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 5),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_element(&k, "1 + i") {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 5),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_element(&k, "u^(1,2)") {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 7),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_element(&k, "1/(1+u)") {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn division_and_negation() {
        let k = q_z();
        let e = parse_element(&k, "-u^(2)/u^(3)").unwrap();
        let expect = k
            .neg(&k.monomial(&[rat_int(-1)], k.base.one()).unwrap())
            .unwrap();
        assert_eq!(e, expect);
        let e = parse_element(&k, "6/2").unwrap();
        assert_eq!(e, k.monomial(&[rat_int(0)], k.base.from_i64(3)).unwrap());
    }
}
