//! Text expressions for Cuntz polynomials.
//!
//! ```text
//! expr    := ['+' | '-'] term (('+' | '-') term)*
//! term    := postfix postfix*            juxtaposition multiplies
//! postfix := atom '*'*                   '*' is the adjoint
//! atom    := 's' digits | number | 'i' | '(' expr ')'
//! number  := digits ['.' digits] ['/' digits]
//! ```
//!
//! Decimal and fractional literals are read as exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Zero, pow};

use super::CuntzPolynomial;
use super::scalar::{Rational, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Generator(u8),
    Number(BigRational),
    I,
    Star,
    Plus,
    Minus,
    Open,
    Close,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn digits(chars: &[char], start: usize) -> usize {
    chars[start..].iter().take_while(|c| c.is_ascii_digit()).count()
}

fn tokenize(src: &str, d: usize) -> Result<Vec<(usize, Token)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let ch = chars[k];
        let pos = k + 1;
        match ch {
            c if c.is_whitespace() => k += 1,
            '*' | '+' | '-' | '(' | ')' => {
                out.push((
                    pos,
                    match ch {
                        '*' => Token::Star,
                        '+' => Token::Plus,
                        '-' => Token::Minus,
                        '(' => Token::Open,
                        _ => Token::Close,
                    },
                ));
                k += 1;
            }
            'i' => {
                out.push((pos, Token::I));
                k += 1;
            }
            's' => {
                let n = digits(&chars, k + 1);
                if n == 0 {
                    return Err(err(pos, "expected a generator index after `s`"));
                }
                let text: String = chars[k + 1..k + 1 + n].iter().collect();
                let index: usize = text.parse().map_err(|_| err(pos, "generator index too large"))?;
                if index == 0 || index > d {
                    return Err(err(pos, format!("generator s{index} outside s1..s{d}")));
                }
                out.push((pos, Token::Generator(index as u8)));
                k += 1 + n;
            }
            c if c.is_ascii_digit() => {
                let n = digits(&chars, k);
                let int: String = chars[k..k + n].iter().collect();
                let mut value = BigRational::from_integer(int.parse::<BigInt>().expect("digits"));
                k += n;
                if chars.get(k) == Some(&'.') {
                    let m = digits(&chars, k + 1);
                    if m == 0 {
                        return Err(err(k + 1, "expected digits after `.`"));
                    }
                    let frac: String = chars[k + 1..k + 1 + m].iter().collect();
                    let scale = pow(BigInt::from(10), m);
                    value += BigRational::new(frac.parse::<BigInt>().expect("digits"), scale);
                    k += 1 + m;
                }
                if chars.get(k) == Some(&'/') {
                    let m = digits(&chars, k + 1);
                    if m == 0 {
                        return Err(err(k + 1, "expected a denominator after `/`"));
                    }
                    let den: String = chars[k + 1..k + 1 + m].iter().collect();
                    let den = den.parse::<BigInt>().expect("digits");
                    if den.is_zero() {
                        return Err(err(k + 2, "zero denominator"));
                    }
                    value /= BigRational::from_integer(den);
                    k += 1 + m;
                }
                out.push((pos, Token::Number(value)));
            }
            other => return Err(err(pos, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    d: usize,
    tokens: Vec<(usize, Token)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn expr(&mut self) -> Result<CuntzPolynomial> {
        let mut sign = 1;
        match self.peek() {
            Some(Token::Minus) => {
                sign = -1;
                self.at += 1;
            }
            Some(Token::Plus) => self.at += 1,
            _ => {}
        }
        let mut acc = self.term()?.scale(&Scalar::integer(sign));
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.at += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Token::Minus) => {
                    self.at += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<CuntzPolynomial> {
        let mut acc = self.postfix()?;
        while matches!(
            self.peek(),
            Some(Token::Generator(_) | Token::Number(_) | Token::I | Token::Open)
        ) {
            acc = acc.multiply(&self.postfix()?);
        }
        Ok(acc)
    }

    fn postfix(&mut self) -> Result<CuntzPolynomial> {
        let mut x = self.atom()?;
        while self.peek() == Some(&Token::Star) {
            self.at += 1;
            x = x.adjoint();
        }
        Ok(x)
    }

    fn atom(&mut self) -> Result<CuntzPolynomial> {
        let pos = self.pos();
        let token = self.peek().cloned().ok_or_else(|| err(pos, "unexpected end of expression"))?;
        self.at += 1;
        match token {
            Token::Generator(i) => CuntzPolynomial::generator(self.d, i),
            Token::Number(q) => CuntzPolynomial::scalar(self.d, Scalar::Exact(Rational::new(q, BigRational::zero()))),
            Token::I => CuntzPolynomial::scalar(self.d, Scalar::imaginary_unit()),
            Token::Open => {
                let inner = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(err(self.pos(), "expected `)`"));
                }
                self.at += 1;
                Ok(inner)
            }
            Token::Close => Err(err(pos, "unexpected `)`")),
            Token::Star => Err(err(pos, "`*` must follow a factor")),
            Token::Plus | Token::Minus => Err(err(pos, "expected a factor")),
        }
    }
}

/// Parses an expression over `O_d` into normal form. Error positions are
/// 1-based character columns.
pub fn parse_expression(src: &str, d: usize) -> Result<CuntzPolynomial> {
    CuntzPolynomial::zero(d)?;
    let tokens = tokenize(src, d)?;
    if tokens.is_empty() {
        return Err(err(1, "empty expression"));
    }
    let mut p = Parser {
        d,
        tokens,
        at: 0,
        end: src.chars().count() + 1,
    };
    let out = p.expr()?;
    if p.at < p.tokens.len() {
        return Err(err(p.pos(), "unexpected trailing input"));
    }
    Ok(out)
}
