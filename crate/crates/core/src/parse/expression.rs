//! Pratt parser for expression text.
//!
//! Binding powers, loosest first: `+ -`, `* /`, unary minus, `^` (right
//! associative). Exponents must fold to integer constants.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::ToPrimitive;

use super::lexer::{tokenize, Tok, Token};
use super::SourceError;
use crate::expr::{Expr, Func, SpaceOp};

const SUM_BP: (u8, u8) = (10, 11);
const PRODUCT_BP: (u8, u8) = (20, 21);
const UNARY_BP: u8 = 30;
const POW_BP: (u8, u8) = (41, 40);

/// Location of expression text inside a larger document.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Origin {
    pub line: usize,
    /// 1-based column of the first character of the expression text.
    pub column: usize,
}

pub(crate) fn parse_at(text: &str, origin: Origin) -> Result<Expr, SourceError> {
    let chars: Vec<char> = text.chars().collect();
    let locate = |pos: usize| -> (usize, usize) {
        // expression text may itself span lines when parsed standalone
        let mut line = origin.line;
        let mut col = origin.column;
        for &c in chars.iter().take(pos) {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    };
    let err_at = |pos: usize, token: &str, message: String| {
        let (line, column) = locate(pos);
        SourceError { line, column, message, token: token.to_string() }
    };

    let tokens = tokenize(text).map_err(|e| err_at(e.pos, &e.text, e.message))?;
    let mut parser = Parser { tokens, idx: 0, open: Vec::new(), len: chars.len() };
    let raw = parser.expr(0).and_then(|e| {
        let t = parser.peek().clone();
        if t.tok == Tok::Eof {
            Ok(e)
        } else {
            Err(parser.unexpected(&t))
        }
    });
    let raw = raw.map_err(|(pos, token, message)| err_at(pos, &token, message))?;
    raw.simplify().map_err(|e| err_at(0, text.trim(), e.to_string()))
}

type PErr = (usize, String, String);

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
    /// Positions of currently unclosed parentheses.
    open: Vec<usize>,
    len: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.idx]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.idx].clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn unexpected(&self, t: &Token) -> PErr {
        if t.tok == Tok::Eof {
            if let Some(&pos) = self.open.last() {
                return (pos, "(".to_string(), "unbalanced parenthesis".to_string());
            }
            let pos = self.len.saturating_sub(1);
            return (pos, String::new(), "unexpected end of input".to_string());
        }
        (t.pos, t.text.clone(), alloc::format!("unexpected token '{}'", t.text))
    }

    fn expect_close(&mut self) -> Result<(), PErr> {
        let t = self.peek().clone();
        match t.tok {
            Tok::RParen => {
                self.next();
                self.open.pop();
                Ok(())
            }
            Tok::Eof => Err(self.unexpected(&t)),
            _ => Err((t.pos, t.text.clone(), alloc::format!("expected ')' but found '{}'", t.text))),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, PErr> {
        let mut lhs = self.prefix()?;
        loop {
            let t = self.peek().clone();
            let (l_bp, r_bp) = match t.tok {
                Tok::Plus | Tok::Minus => SUM_BP,
                Tok::Star | Tok::Slash => PRODUCT_BP,
                Tok::Caret => POW_BP,
                _ => break,
            };
            if l_bp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expr(r_bp)?;
            lhs = match t.tok {
                Tok::Plus => Expr::raw_sum(alloc::vec![lhs, rhs]),
                Tok::Minus => Expr::raw_sum(alloc::vec![lhs, negate(rhs)]),
                Tok::Star => Expr::raw_product(alloc::vec![lhs, rhs]),
                Tok::Slash => Expr::raw_product(alloc::vec![lhs, Expr::raw_pow(rhs, -1)]),
                Tok::Caret => {
                    let n = integer_constant(&rhs).ok_or_else(|| {
                        (t.pos, t.text.clone(), "exponent must be an integer constant".to_string())
                    })?;
                    Expr::raw_pow(lhs, n)
                }
                _ => unreachable!("filtered above"),
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, PErr> {
        let t = self.next();
        match t.tok {
            Tok::Number(q) => Ok(Expr::constant(q)),
            Tok::Minus => Ok(negate(self.expr(UNARY_BP)?)),
            Tok::Plus => self.expr(UNARY_BP),
            Tok::LParen => {
                self.open.push(t.pos);
                let e = self.expr(0)?;
                self.expect_close()?;
                Ok(e)
            }
            Tok::Ident(ref name) => {
                if self.peek().tok == Tok::LParen {
                    self.call(&t, name)
                } else {
                    Ok(Expr::symbol(name))
                }
            }
            _ => Err(self.unexpected(&t)),
        }
    }

    fn call(&mut self, ident: &Token, name: &str) -> Result<Expr, PErr> {
        let func = Func::from_name(name);
        let arity = match (func, name) {
            (Some(_), _) | (None, "dx" | "dxx") => 1,
            (None, "shift") => 2,
            _ => {
                return Err((
                    ident.pos,
                    ident.text.clone(),
                    alloc::format!("unknown function '{name}'"),
                ))
            }
        };
        let open = self.next();
        self.open.push(open.pos);
        let mut args = alloc::vec![self.expr(0)?];
        while self.peek().tok == Tok::Comma {
            self.next();
            args.push(self.expr(0)?);
        }
        self.expect_close()?;
        if args.len() != arity {
            return Err((
                ident.pos,
                ident.text.clone(),
                alloc::format!(
                    "function '{name}' takes {arity} argument{}, got {}",
                    if arity == 1 { "" } else { "s" },
                    args.len()
                ),
            ));
        }
        let mut args = args.into_iter();
        let first = args.next().expect("arity checked");
        Ok(match (func, name) {
            (Some(f), _) => Expr::raw_func(f, first),
            (None, "dx") => Expr::raw_op(SpaceOp::Dx, first),
            (None, "dxx") => Expr::raw_op(SpaceOp::Dxx, first),
            _ => {
                let offset = args.next().expect("arity checked");
                let s = integer_constant(&offset).ok_or_else(|| {
                    (ident.pos, ident.text.clone(), "shift offset must be an integer constant".to_string())
                })?;
                Expr::raw_op(SpaceOp::Shift(s), first)
            }
        })
    }
}

fn negate(e: Expr) -> Expr {
    Expr::raw_product(alloc::vec![Expr::int(-1), e])
}

fn integer_constant(e: &Expr) -> Option<i64> {
    let folded = e.simplify().ok()?;
    let q = folded.as_const()?;
    if q.is_integer() {
        q.numer().to_i64()
    } else {
        None
    }
}
