//! A small expression language for modular-form arithmetic, so congruences
//! can be stated on the command line exactly as they appear in print:
//! `1/2*((E4-1)/240)^2`, `(E1^2 - 1)/12`, and so on.
//!
//! Grammar (EBNF, whitespace insensitive):
//!
//! ```text
//! expr   := term   { ("+" | "-") term }
//! term   := unary  { ("*" | "/") unary }
//! unary  := "-" unary | power
//! power  := atom { "^" natural }
//! atom   := natural | "E1" | "E3" | "E" natural | "(" expr ")"
//! ```
//!
//! Precedence is `^` > unary minus > `*` `/` > `+` `-`, left associative
//! within a level. Exponents are literal nonnegative integers. Division is
//! restricted to divisors that evaluate to constants; series division is
//! not supported.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::Rational;
use crate::divcong::InhomogeneousForm;
use crate::modforms::{self, GradedComponent, ModFormsError};
use crate::qseries::IntegralityRing;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("lexical error at byte {pos}: unexpected character '{found}'")]
    UnexpectedChar { pos: usize, found: char },
    #[error("syntax error at byte {pos}: expected {expected}, found '{found}'")]
    UnexpectedToken {
        pos: usize,
        expected: &'static str,
        found: String,
    },
    #[error("syntax error at byte {pos}: unexpected end of input (expected {expected})")]
    UnexpectedEnd { pos: usize, expected: &'static str },
    #[error("exponent at byte {pos} is too large")]
    ExponentOverflow { pos: usize },
    #[error("series division unsupported: divisor is not a constant")]
    NonConstantDivisor,
    #[error("division by zero")]
    DivisionByZero,
    #[error(transparent)]
    ModForms(#[from] ModFormsError),
}

/// Abstract syntax over rational literals, the atoms E1, E3, E<k>, and the
/// arithmetic the displays use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Number(BigInt),
    E1,
    E3,
    Eisenstein(u32),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigInt),
    E1,
    E3,
    Eisenstein(u32),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(n) => write!(f, "{n}"),
            Token::E1 => write!(f, "E1"),
            Token::E3 => write!(f, "E3"),
            Token::Eisenstein(k) => write!(f, "E{k}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::Caret => write!(f, "^"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
        }
    }
}

fn lex(input: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push((i, Token::Plus));
                i += 1;
            }
            '-' => {
                tokens.push((i, Token::Minus));
                i += 1;
            }
            '*' => {
                tokens.push((i, Token::Star));
                i += 1;
            }
            '/' => {
                tokens.push((i, Token::Slash));
                i += 1;
            }
            '^' => {
                tokens.push((i, Token::Caret));
                i += 1;
            }
            '(' => {
                tokens.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                tokens.push((i, Token::RParen));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = input[start..i].parse().expect("digits parse");
                tokens.push((start, Token::Number(n)));
            }
            'E' => {
                let start = i;
                i += 1;
                let digits_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits_start {
                    return Err(ExprError::UnexpectedChar {
                        pos: start,
                        found: 'E',
                    });
                }
                let k: u32 = input[digits_start..i]
                    .parse()
                    .map_err(|_| ExprError::ExponentOverflow { pos: digits_start })?;
                tokens.push((
                    start,
                    match k {
                        1 => Token::E1,
                        3 => Token::E3,
                        _ => Token::Eisenstein(k),
                    },
                ));
            }
            other => {
                return Err(ExprError::UnexpectedChar {
                    pos: i,
                    found: other,
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [(usize, Token)],
    pos: usize,
    input_len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, expected: &'static str) -> Result<(usize, Token), ExprError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(ExprError::UnexpectedEnd {
                pos: self.input_len,
                expected,
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some((_, tok)) = self.peek() {
            match tok {
                Token::Plus => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some((_, tok)) = self.peek() {
            match tok {
                Token::Star => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Token::Slash => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some((_, Token::Minus)) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let mut base = self.atom()?;
        while let Some((_, Token::Caret)) = self.peek() {
            self.pos += 1;
            let (pos, tok) = self.next("an integer exponent")?;
            let e = match tok {
                Token::Number(n) => {
                    u32::try_from(&n).map_err(|_| ExprError::ExponentOverflow { pos })?
                }
                other => {
                    return Err(ExprError::UnexpectedToken {
                        pos,
                        expected: "an integer exponent",
                        found: other.to_string(),
                    })
                }
            };
            base = Expr::Pow(Box::new(base), e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let (pos, tok) = self.next("a number, E-atom, or '('")?;
        match tok {
            Token::Number(n) => Ok(Expr::Number(n)),
            Token::E1 => Ok(Expr::E1),
            Token::E3 => Ok(Expr::E3),
            Token::Eisenstein(k) => Ok(Expr::Eisenstein(k)),
            Token::LParen => {
                let inner = self.expr()?;
                let (pos, tok) = self.next("')'")?;
                match tok {
                    Token::RParen => Ok(inner),
                    other => Err(ExprError::UnexpectedToken {
                        pos,
                        expected: "')'",
                        found: other.to_string(),
                    }),
                }
            }
            other => Err(ExprError::UnexpectedToken {
                pos,
                expected: "a number, E-atom, or '('",
                found: other.to_string(),
            }),
        }
    }
}

/// Parse an expression; error positions are byte offsets into the input.
pub fn parse(input: &str) -> Result<Expr, ExprError> {
    let tokens = lex(input)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        input_len: input.len(),
    };
    let e = parser.expr()?;
    if let Some((pos, tok)) = parser.peek() {
        return Err(ExprError::UnexpectedToken {
            pos: *pos,
            expected: "end of input",
            found: tok.to_string(),
        });
    }
    Ok(e)
}

// printer precedence levels; parenthesize a child whose level is below what
// the grammar requires at that position
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => PREC_ADD,
            Expr::Mul(..) | Expr::Div(..) => PREC_MUL,
            Expr::Neg(..) => PREC_NEG,
            Expr::Pow(..) => PREC_POW,
            _ => PREC_ATOM,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let needs_parens = self.prec() < min;
        if needs_parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Number(n) => write!(f, "{n}")?,
            Expr::E1 => write!(f, "E1")?,
            Expr::E3 => write!(f, "E3")?,
            Expr::Eisenstein(k) => write!(f, "E{k}")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, PREC_NEG)?;
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, PREC_ADD)?;
                write!(f, " + ")?;
                b.fmt_prec(f, PREC_ADD + 1)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, PREC_ADD)?;
                write!(f, " - ")?;
                b.fmt_prec(f, PREC_ADD + 1)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, PREC_MUL)?;
                write!(f, "*")?;
                b.fmt_prec(f, PREC_MUL + 1)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, PREC_MUL)?;
                write!(f, "/")?;
                b.fmt_prec(f, PREC_MUL + 1)?;
            }
            Expr::Pow(a, e) => {
                a.fmt_prec(f, PREC_ATOM)?;
                write!(f, "^{e}")?;
            }
        }
        if needs_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Evaluate to a symbolic inhomogeneous form over Z[1/3]. Mixed-weight
/// sums are legal; `E<k>` atoms are converted to level-3 coordinates.
/// Evaluation is symbolic, so no precision enters here; expansion happens
/// afterwards at whatever precision the caller wants.
pub fn evaluate(e: &Expr) -> Result<InhomogeneousForm, ExprError> {
    let ring = IntegralityRing::level3();
    eval_inner(e, &ring)
}

fn eval_inner(e: &Expr, ring: &IntegralityRing) -> Result<InhomogeneousForm, ExprError> {
    Ok(match e {
        Expr::Number(n) => {
            InhomogeneousForm::constant(Rational::from_integer(n.clone()), ring.clone())
        }
        Expr::E1 => InhomogeneousForm::new(
            [GradedComponent::new(1, vec![Rational::one()])],
            ring.clone(),
        ),
        Expr::E3 => InhomogeneousForm::new(
            [GradedComponent::new(
                3,
                vec![Rational::zero(), Rational::one()],
            )],
            ring.clone(),
        ),
        Expr::Eisenstein(k) => {
            let coords = modforms::eisenstein_in_basis(*k)?;
            InhomogeneousForm::new([coords], ring.clone())
        }
        Expr::Neg(a) => eval_inner(a, ring)?.neg(),
        Expr::Add(a, b) => eval_inner(a, ring)?.add(&eval_inner(b, ring)?),
        Expr::Sub(a, b) => eval_inner(a, ring)?.sub(&eval_inner(b, ring)?),
        Expr::Mul(a, b) => eval_inner(a, ring)?.mul(&eval_inner(b, ring)?),
        Expr::Pow(a, e) => eval_inner(a, ring)?.pow(*e),
        Expr::Div(a, b) => {
            let divisor = eval_inner(b, ring)?;
            if divisor.max_weight().is_some_and(|w| w > 0) {
                return Err(ExprError::NonConstantDivisor);
            }
            let c = match divisor.component(0) {
                Some(comp) => comp.coords()[0].clone(),
                None => return Err(ExprError::DivisionByZero),
            };
            if c.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            eval_inner(a, ring)?.scale(&c.recip())
        }
    })
}
