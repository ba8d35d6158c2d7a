//! Pretty-printers for both calculi.
//!
//! Source output re-parses to an alpha-equivalent term. Target output omits
//! lambda annotations; it is meant for reading, not for re-parsing.

use std::fmt::{self, Write};

use super::ast::{
    EffectKind, PrimOp, Program, SourceExpr, SourceType, TargetExpr, TargetProgram, TargetType,
};

// Precedence levels, loosest first.
const BINDER: u8 = 0;
const CMP: u8 = 1;
const SUM: u8 = 2;
const PRODUCT: u8 = 3;
const APP: u8 = 4;
const ATOM: u8 = 5;

fn prim_prec(op: PrimOp) -> u8 {
    match op {
        PrimOp::Leq | PrimOp::Gt => CMP,
        PrimOp::Add | PrimOp::Sub => SUM,
        PrimOp::Mul => PRODUCT,
    }
}

/// Operand precedences for `(left, right)`.
fn prim_operands(op: PrimOp) -> (u8, u8) {
    match op {
        // Comparisons do not chain.
        PrimOp::Leq | PrimOp::Gt => (SUM, SUM),
        PrimOp::Add | PrimOp::Sub => (SUM, PRODUCT),
        PrimOp::Mul => (PRODUCT, APP),
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

fn write_effect(out: &mut String, effect: &EffectKind) {
    match effect {
        EffectKind::Read(key) => {
            out.push_str("read ");
            write_string(out, key);
        }
        EffectKind::Tick(label) => {
            out.push_str("tick ");
            write_string(out, label);
        }
    }
}

fn write_int(out: &mut String, n: i64) {
    if n < 0 {
        let _ = write!(out, "(-{})", n.unsigned_abs());
    } else {
        let _ = write!(out, "{n}");
    }
}

pub fn pretty_source(e: &SourceExpr) -> String {
    let mut out = String::new();
    source(&mut out, e, BINDER);
    out
}

fn source_prec(e: &SourceExpr) -> u8 {
    match e {
        SourceExpr::Lam { .. } | SourceExpr::Let { .. } | SourceExpr::If(..) => BINDER,
        SourceExpr::Prim(op, ..) => prim_prec(*op),
        SourceExpr::App(..) | SourceExpr::Effect(_) => APP,
        SourceExpr::Var(_) | SourceExpr::DefRef(_) | SourceExpr::Int(_) | SourceExpr::Bool(_) => ATOM,
    }
}

fn source(out: &mut String, e: &SourceExpr, min: u8) {
    let parens = source_prec(e) < min;
    if parens {
        out.push('(');
    }
    match e {
        SourceExpr::Var(x) | SourceExpr::DefRef(x) => out.push_str(x),
        SourceExpr::Int(n) => write_int(out, *n),
        SourceExpr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        SourceExpr::Lam { param, ann, body } => {
            out.push('\\');
            out.push_str(param);
            if let Some(t) = ann {
                let _ = write!(out, ":{t}");
            }
            out.push_str(". ");
            source(out, body, BINDER);
        }
        SourceExpr::Let { name, bound, body } => {
            let _ = write!(out, "let {name} = ");
            source(out, bound, BINDER);
            out.push_str(" in ");
            source(out, body, BINDER);
        }
        SourceExpr::If(c, t, f) => {
            out.push_str("if ");
            source(out, c, BINDER);
            out.push_str(" then ");
            source(out, t, BINDER);
            out.push_str(" else ");
            source(out, f, BINDER);
        }
        SourceExpr::Prim(op, l, r) => {
            let (lp, rp) = prim_operands(*op);
            source(out, l, lp);
            let _ = write!(out, " {} ", op.symbol());
            source(out, r, rp);
        }
        SourceExpr::App(f, a) => {
            source(out, f, APP);
            out.push(' ');
            source(out, a, ATOM);
        }
        SourceExpr::Effect(effect) => write_effect(out, effect),
    }
    if parens {
        out.push(')');
    }
}

pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.defs {
        let _ = writeln!(out, "def {} : {} =\n  {}\n", d.name, d.ty, pretty_source(&d.body));
    }
    let _ = writeln!(out, "main = {}", pretty_source(&p.main));
    out
}

pub fn pretty_target(e: &TargetExpr) -> String {
    let mut out = String::new();
    target(&mut out, e, BINDER);
    out
}

fn target_prec(e: &TargetExpr) -> u8 {
    match e {
        TargetExpr::Lam { .. } | TargetExpr::If(..) => BINDER,
        TargetExpr::Prim(op, ..) => prim_prec(*op),
        TargetExpr::App(..)
        | TargetExpr::Effect(_)
        | TargetExpr::Unit(_)
        | TargetExpr::Bind(..)
        | TargetExpr::MAlias(_) => APP,
        TargetExpr::Var(_) | TargetExpr::DefRef(_) | TargetExpr::Int(_) | TargetExpr::Bool(_) => ATOM,
    }
}

fn target(out: &mut String, e: &TargetExpr, min: u8) {
    let parens = target_prec(e) < min;
    if parens {
        out.push('(');
    }
    match e {
        TargetExpr::Var(x) | TargetExpr::DefRef(x) => out.push_str(x),
        TargetExpr::Int(n) => write_int(out, *n),
        TargetExpr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        TargetExpr::Lam { param, body, .. } => {
            let _ = write!(out, "\\{param}. ");
            target(out, body, BINDER);
        }
        TargetExpr::If(c, t, f) => {
            out.push_str("if ");
            target(out, c, BINDER);
            out.push_str(" then ");
            target(out, t, BINDER);
            out.push_str(" else ");
            target(out, f, BINDER);
        }
        TargetExpr::Prim(op, l, r) => {
            let (lp, rp) = prim_operands(*op);
            target(out, l, lp);
            let _ = write!(out, " {} ", op.symbol());
            target(out, r, rp);
        }
        TargetExpr::App(f, a) => {
            target(out, f, APP);
            out.push(' ');
            target(out, a, ATOM);
        }
        TargetExpr::Effect(effect) => write_effect(out, effect),
        TargetExpr::Unit(inner) => {
            out.push_str("unit ");
            target(out, inner, ATOM);
        }
        TargetExpr::MAlias(inner) => {
            out.push_str("malias ");
            target(out, inner, ATOM);
        }
        TargetExpr::Bind(m, k) => {
            out.push_str("bind ");
            target(out, m, ATOM);
            out.push(' ');
            target(out, k, ATOM);
        }
    }
    if parens {
        out.push(')');
    }
}

pub fn pretty_target_program(p: &TargetProgram) -> String {
    let mut out = String::new();
    for d in &p.defs {
        let _ = writeln!(out, "def {} : {} =\n  {}\n", d.name, d.ty, pretty_target(&d.body));
    }
    let _ = writeln!(out, "main = {}", pretty_target(&p.main));
    out
}

impl fmt::Display for SourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceType::Base(b) => write!(f, "{b}"),
            SourceType::Arrow(a, b) => {
                if matches!(**a, SourceType::Arrow(..)) {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
        }
    }
}

impl TargetType {
    fn prec(&self) -> u8 {
        match self {
            TargetType::Arrow(..) => 0,
            TargetType::M(_) => 1,
            TargetType::Base(_) => 2,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.prec() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            TargetType::Base(b) => write!(f, "{b}")?,
            TargetType::Arrow(a, b) => {
                a.write_at(f, 1)?;
                f.write_str(" -> ")?;
                b.write_at(f, 0)?;
            }
            TargetType::M(inner) => {
                f.write_str("M ")?;
                inner.write_at(f, 2)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for TargetType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl fmt::Display for SourceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_source(self))
    }
}

impl fmt::Display for TargetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_target(self))
    }
}
