//! Recursive-descent parser for the source language.
//!
//! ```text
//! program ::= def* "main" "=" expr
//! def     ::= "def" ident ":" type "=" expr
//! type    ::= atype ("->" type)?
//! atype   ::= "int" | "bool" | "(" type ")"
//! expr    ::= "\" ident (":" type)? "." expr
//!           | "let" ident "=" expr "in" expr
//!           | "if" expr "then" expr "else" expr
//!           | cmp
//! cmp     ::= sum (("<=" | ">") sum)?
//! sum     ::= product (("+" | "-") product)*
//! product ::= app ("*" app)*
//! app     ::= atom atom*
//! atom    ::= ident | int | "true" | "false" | "read" string | "tick" string
//!           | "(" "-" int ")" | "(" expr ")"
//! ```
//!
//! Identifiers that name a definition (the definition itself, an earlier one,
//! or any definition when referenced from `main`) and are not shadowed by a
//! local binder become [`SourceExpr::DefRef`].

use std::collections::HashSet;

use thiserror::Error;

use super::ast::{BaseType, Definition, EffectKind, PrimOp, Program, SourceExpr, SourceType};
use super::lexer::{tokenize, Pos, Spanned, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {col}: expected {}, found {found}", .expected.join(" or "))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub(crate) fn new(pos: Pos, expected: Vec<String>, found: String) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            expected,
            found,
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut parser = Parser::new(text)?;
    let program = parser.program()?;
    Ok(program)
}

/// Parse a standalone expression. Identifiers are never resolved to
/// definitions.
pub fn parse_expr(text: &str) -> Result<SourceExpr, ParseError> {
    let mut parser = Parser::new(text)?;
    let e = parser.expr()?;
    parser.expect(Token::Eof)?;
    Ok(e)
}

pub fn parse_type(text: &str) -> Result<SourceType, ParseError> {
    let mut parser = Parser::new(text)?;
    let t = parser.ty()?;
    parser.expect(Token::Eof)?;
    Ok(t)
}

struct Parser {
    tokens: Vec<Spanned>,
    index: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            index: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.index].token
    }

    fn peek_at(&self, offset: usize) -> &Token {
        let i = (self.index + offset).min(self.tokens.len() - 1);
        &self.tokens[i].token
    }

    fn pos(&self) -> Pos {
        self.tokens[self.index].pos
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.index].token.clone();
        if self.index + 1 < self.tokens.len() {
            self.index += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::new(
            self.pos(),
            expected.iter().map(|s| s.to_string()).collect(),
            self.peek().describe(),
        )
    }

    fn expect(&mut self, token: Token) -> Result<(), ParseError> {
        if *self.peek() == token {
            self.advance();
            Ok(())
        } else {
            Err(ParseError::new(
                self.pos(),
                vec![token.describe()],
                self.peek().describe(),
            ))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Token::Ident(_) => match self.advance() {
                Token::Ident(name) => Ok(name),
                _ => unreachable!(),
            },
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Token::Str(_) => match self.advance() {
                Token::Str(s) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.error(&["string literal"])),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut defs: Vec<Definition> = Vec::new();
        let mut names: Vec<String> = Vec::new();
        while *self.peek() == Token::Def {
            self.advance();
            let pos = self.pos();
            let name = self.ident()?;
            if names.contains(&name) {
                return Err(ParseError::new(
                    pos,
                    vec!["a fresh definition name".into()],
                    format!("duplicate definition `{name}`"),
                ));
            }
            self.expect(Token::Colon)?;
            let ty = self.ty()?;
            self.expect(Token::Equals)?;
            let body = self.expr()?;
            names.push(name.clone());
            let visible: HashSet<&str> = names.iter().map(String::as_str).collect();
            let body = resolve(&body, &visible, &mut Vec::new());
            defs.push(Definition { name, ty, body });
        }
        if *self.peek() != Token::Main {
            return Err(self.error(&["`def`", "`main`"]));
        }
        self.advance();
        self.expect(Token::Equals)?;
        let main = self.expr()?;
        self.expect(Token::Eof)?;
        let visible: HashSet<&str> = names.iter().map(String::as_str).collect();
        let main = resolve(&main, &visible, &mut Vec::new());
        Ok(Program { defs, main })
    }

    fn ty(&mut self) -> Result<SourceType, ParseError> {
        let from = self.atype()?;
        if *self.peek() == Token::Arrow {
            self.advance();
            let to = self.ty()?;
            Ok(SourceType::arrow(from, to))
        } else {
            Ok(from)
        }
    }

    fn atype(&mut self) -> Result<SourceType, ParseError> {
        match self.peek() {
            Token::IntTy => {
                self.advance();
                Ok(SourceType::Base(BaseType::Int))
            }
            Token::BoolTy => {
                self.advance();
                Ok(SourceType::Base(BaseType::Bool))
            }
            Token::LParen => {
                self.advance();
                let t = self.ty()?;
                self.expect(Token::RParen)?;
                Ok(t)
            }
            _ => Err(self.error(&["`int`", "`bool`", "`(`"])),
        }
    }

    fn expr(&mut self) -> Result<SourceExpr, ParseError> {
        match self.peek() {
            Token::Backslash => {
                self.advance();
                let param = self.ident()?;
                let ann = if *self.peek() == Token::Colon {
                    self.advance();
                    Some(self.ty()?)
                } else {
                    None
                };
                if *self.peek() != Token::Dot {
                    let expected: &[&str] = if ann.is_some() {
                        &["`.`", "`->`"]
                    } else {
                        &["`.`", "`:`"]
                    };
                    return Err(self.error(expected));
                }
                self.advance();
                let body = self.expr()?;
                Ok(SourceExpr::Lam {
                    param,
                    ann,
                    body: Box::new(body),
                })
            }
            Token::Let => {
                self.advance();
                let name = self.ident()?;
                self.expect(Token::Equals)?;
                let bound = self.expr()?;
                self.expect(Token::In)?;
                let body = self.expr()?;
                Ok(SourceExpr::let_in(name, bound, body))
            }
            Token::If => {
                self.advance();
                let c = self.expr()?;
                self.expect(Token::Then)?;
                let t = self.expr()?;
                self.expect(Token::Else)?;
                let e = self.expr()?;
                Ok(SourceExpr::if_then_else(c, t, e))
            }
            _ => self.cmp(),
        }
    }

    fn cmp(&mut self) -> Result<SourceExpr, ParseError> {
        let left = self.sum()?;
        let op = match self.peek() {
            Token::Leq => PrimOp::Leq,
            Token::Gt => PrimOp::Gt,
            _ => return Ok(left),
        };
        self.advance();
        let right = self.sum()?;
        Ok(SourceExpr::prim(op, left, right))
    }

    fn sum(&mut self) -> Result<SourceExpr, ParseError> {
        let mut left = self.product()?;
        loop {
            let op = match self.peek() {
                Token::Plus => PrimOp::Add,
                Token::Minus => PrimOp::Sub,
                _ => return Ok(left),
            };
            self.advance();
            let right = self.product()?;
            left = SourceExpr::prim(op, left, right);
        }
    }

    fn product(&mut self) -> Result<SourceExpr, ParseError> {
        let mut left = self.app()?;
        while *self.peek() == Token::Star {
            self.advance();
            let right = self.app()?;
            left = SourceExpr::prim(PrimOp::Mul, left, right);
        }
        Ok(left)
    }

    fn app(&mut self) -> Result<SourceExpr, ParseError> {
        let mut f = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            f = SourceExpr::app(f, arg);
        }
        Ok(f)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Token::Ident(_)
                | Token::Int(_)
                | Token::True
                | Token::False
                | Token::Read
                | Token::Tick
                | Token::LParen
        )
    }

    fn atom(&mut self) -> Result<SourceExpr, ParseError> {
        match self.peek().clone() {
            Token::Ident(name) => {
                self.advance();
                Ok(SourceExpr::Var(name))
            }
            Token::Int(n) => {
                self.advance();
                Ok(SourceExpr::Int(n))
            }
            Token::True => {
                self.advance();
                Ok(SourceExpr::Bool(true))
            }
            Token::False => {
                self.advance();
                Ok(SourceExpr::Bool(false))
            }
            Token::Read => {
                self.advance();
                Ok(SourceExpr::Effect(EffectKind::Read(self.string()?)))
            }
            Token::Tick => {
                self.advance();
                Ok(SourceExpr::Effect(EffectKind::Tick(self.string()?)))
            }
            Token::LParen => {
                self.advance();
                // `(-n)` is a negative literal.
                if *self.peek() == Token::Minus {
                    if let (Token::Int(n), Token::RParen) = (self.peek_at(1).clone(), self.peek_at(2)) {
                        self.advance();
                        self.advance();
                        self.advance();
                        return Ok(SourceExpr::Int(-n));
                    }
                }
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            _ => Err(self.error(&[
                "identifier",
                "integer",
                "`true`",
                "`false`",
                "`read`",
                "`tick`",
                "`(`",
                "`\\`",
                "`let`",
                "`if`",
            ])),
        }
    }
}

/// Turn free identifiers that name visible definitions into `DefRef`s.
fn resolve(e: &SourceExpr, defs: &HashSet<&str>, bound: &mut Vec<String>) -> SourceExpr {
    match e {
        SourceExpr::Var(x) => {
            if !bound.iter().any(|b| b == x) && defs.contains(x.as_str()) {
                SourceExpr::DefRef(x.clone())
            } else {
                e.clone()
            }
        }
        SourceExpr::Lam { param, ann, body } => {
            bound.push(param.clone());
            let body = resolve(body, defs, bound);
            bound.pop();
            SourceExpr::Lam {
                param: param.clone(),
                ann: ann.clone(),
                body: Box::new(body),
            }
        }
        SourceExpr::App(f, a) => SourceExpr::app(resolve(f, defs, bound), resolve(a, defs, bound)),
        SourceExpr::Let { name, bound: b, body } => {
            let b = resolve(b, defs, bound);
            bound.push(name.clone());
            let body = resolve(body, defs, bound);
            bound.pop();
            SourceExpr::let_in(name.clone(), b, body)
        }
        SourceExpr::Prim(op, l, r) => {
            SourceExpr::prim(*op, resolve(l, defs, bound), resolve(r, defs, bound))
        }
        SourceExpr::If(c, t, f) => SourceExpr::if_then_else(
            resolve(c, defs, bound),
            resolve(t, defs, bound),
            resolve(f, defs, bound),
        ),
        SourceExpr::Int(_) | SourceExpr::Bool(_) | SourceExpr::Effect(_) | SourceExpr::DefRef(_) => {
            e.clone()
        }
    }
}
