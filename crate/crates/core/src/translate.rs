//! The three monadic translations: call-by-name, call-by-value and
//! call-by-alias.
//!
//! Binders introduced by the translations start with `_`, which the source
//! lexer never produces, so they cannot capture source variables. Each
//! introduced binder scopes over at most one translated subterm, and such
//! subterms never mention that binder freely, so fixed names suffice.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::{
    Program, SourceExpr, SourceType, TargetDefinition, TargetExpr, TargetProgram, TargetType,
};
use crate::typecheck::{
    check_target_detailed, elaborate, SourceContext, SourceTypeError, TargetContext,
    TargetTypeError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Translation {
    /// Call-by-alias: inserts `malias` at every argument and let binding.
    Cba,
    Cbn,
    Cbv,
}

impl Translation {
    pub const ALL: [Translation; 3] = [Translation::Cba, Translation::Cbn, Translation::Cbv];

    pub fn name(self) -> &'static str {
        match self {
            Translation::Cba => "cba",
            Translation::Cbn => "cbn",
            Translation::Cbv => "cbv",
        }
    }
}

impl fmt::Display for Translation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Translation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Translation::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown translation `{s}` (expected cba, cbn or cbv)"))
    }
}

const FN: &str = "_f";
const ARG: &str = "_x";
const LEFT: &str = "_a";
const RIGHT: &str = "_b";
const COND: &str = "_c";

fn var(name: &str) -> TargetExpr {
    TargetExpr::var(name)
}

fn cont(param: &str, body: TargetExpr) -> TargetExpr {
    TargetExpr::lam(param, None, body)
}

pub fn translate_type(mode: Translation, t: &SourceType) -> TargetType {
    match t {
        SourceType::Base(b) => TargetType::Base(*b),
        SourceType::Arrow(a, r) => {
            let r = TargetType::m(translate_type(mode, r));
            let a = translate_type(mode, a);
            match mode {
                Translation::Cba | Translation::Cbn => TargetType::arrow(TargetType::m(a), r),
                Translation::Cbv => TargetType::arrow(a, r),
            }
        }
    }
}

pub fn translate_type_cba(t: &SourceType) -> TargetType {
    translate_type(Translation::Cba, t)
}

/// Type of a variable of source type `t` after translation: a computation
/// under call-by-name and call-by-alias, a value under call-by-value.
pub fn translate_binding_type(mode: Translation, t: &SourceType) -> TargetType {
    let t = translate_type(mode, t);
    match mode {
        Translation::Cba | Translation::Cbn => TargetType::m(t),
        Translation::Cbv => t,
    }
}

pub fn translate_context(mode: Translation, ctx: &SourceContext) -> TargetContext {
    let mut out = TargetContext::new();
    for (name, t) in ctx.defs() {
        out = out.with_def(name, translate_type(mode, t));
    }
    for (name, t) in ctx.bindings() {
        out.push(name, translate_binding_type(mode, t));
    }
    out
}

pub fn translate(mode: Translation, e: &SourceExpr) -> TargetExpr {
    let tr = |e: &SourceExpr| translate(mode, e);
    match e {
        SourceExpr::Var(x) => match mode {
            Translation::Cbv => TargetExpr::unit(var(x)),
            Translation::Cba | Translation::Cbn => var(x),
        },
        SourceExpr::Lam { param, ann, body } => {
            let ann = ann.as_ref().map(|t| translate_binding_type(mode, t));
            TargetExpr::unit(TargetExpr::lam(param.clone(), ann, tr(body)))
        }
        SourceExpr::App(f, a) => {
            let body = match mode {
                Translation::Cbn => TargetExpr::app(var(FN), tr(a)),
                Translation::Cbv => TargetExpr::bind(
                    tr(a),
                    cont(ARG, TargetExpr::app(var(FN), var(ARG))),
                ),
                Translation::Cba => TargetExpr::bind(TargetExpr::malias(tr(a)), var(FN)),
            };
            TargetExpr::bind(tr(f), cont(FN, body))
        }
        SourceExpr::Let { name, bound, body } => match mode {
            Translation::Cbn => TargetExpr::app(cont(name, tr(body)), tr(bound)),
            Translation::Cbv => TargetExpr::bind(tr(bound), cont(name, tr(body))),
            Translation::Cba => {
                TargetExpr::bind(TargetExpr::malias(tr(bound)), cont(name, tr(body)))
            }
        },
        SourceExpr::Int(n) => TargetExpr::unit(TargetExpr::Int(*n)),
        SourceExpr::Bool(b) => TargetExpr::unit(TargetExpr::Bool(*b)),
        SourceExpr::Prim(op, l, r) => TargetExpr::bind(
            tr(l),
            cont(
                LEFT,
                TargetExpr::bind(
                    tr(r),
                    cont(
                        RIGHT,
                        TargetExpr::unit(TargetExpr::prim(*op, var(LEFT), var(RIGHT))),
                    ),
                ),
            ),
        ),
        SourceExpr::If(c, t, f) => TargetExpr::bind(
            tr(c),
            cont(COND, TargetExpr::if_then_else(var(COND), tr(t), tr(f))),
        ),
        SourceExpr::Effect(k) => TargetExpr::Effect(k.clone()),
        SourceExpr::DefRef(name) => TargetExpr::unit(TargetExpr::DefRef(name.clone())),
    }
}

pub fn translate_cbn(e: &SourceExpr) -> TargetExpr {
    translate(Translation::Cbn, e)
}

pub fn translate_cbv(e: &SourceExpr) -> TargetExpr {
    translate(Translation::Cbv, e)
}

pub fn translate_cba(e: &SourceExpr) -> TargetExpr {
    translate(Translation::Cba, e)
}

/// Translates every definition and `main`. A definition's lambda is
/// translated without the outer `unit`, so `DefRef` denotes a plain value.
pub fn translate_program(mode: Translation, p: &Program) -> TargetProgram {
    let defs = p
        .defs
        .iter()
        .map(|d| {
            let body = match &d.body {
                SourceExpr::Lam { param, ann, body } => TargetExpr::lam(
                    param.clone(),
                    ann.as_ref().map(|t| translate_binding_type(mode, t)),
                    translate(mode, body),
                ),
                // Rejected by the type checker; kept total for robustness.
                other => match translate(mode, other) {
                    TargetExpr::Unit(inner) => (*inner).clone(),
                    e => e,
                },
            };
            TargetDefinition {
                name: d.name.clone(),
                ty: translate_type(mode, &d.ty),
                body,
            }
        })
        .collect();
    TargetProgram {
        defs,
        main: translate(mode, &p.main),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreservationError {
    #[error("source term is ill-typed: {0}")]
    Source(#[from] SourceTypeError),
    #[error("translated term does not have type {expected}: {error}")]
    Target {
        expected: TargetType,
        error: TargetTypeError,
    },
}

/// Checks that the call-by-alias translation of `e` has type `M [[t]]`,
/// where `t` is the source type of `e` and every variable `x : t'` in `ctx`
/// becomes `x : M [[t']]`. Returns the target type on success.
pub fn verify_typing_preservation(
    e: &SourceExpr,
    ctx: &SourceContext,
) -> Result<TargetType, PreservationError> {
    let (elab, t) = elaborate(ctx, e)?;
    let target = translate_cba(&elab);
    let expected = TargetType::m(translate_type_cba(&t));
    let tctx = translate_context(Translation::Cba, ctx);
    check_target_detailed(&tctx, &target, &expected).map_err(|error| PreservationError::Target {
        expected: expected.clone(),
        error,
    })?;
    Ok(expected)
}
