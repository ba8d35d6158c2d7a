//! Simple type checking for both calculi.
//!
//! The source checker is bidirectional and elaborating: it fills in missing
//! lambda annotations where the surrounding context determines them, so the
//! translations always see fully annotated terms. The target checker follows
//! the usual monadic rules (`unit : a -> M a`, `bind : M a -> (a -> M b) -> M b`,
//! `malias : M a -> M (M a)`).

use thiserror::Error;

use crate::syntax::{
    Definition, EffectKind, Program, SourceExpr, SourceType, TargetExpr, TargetType,
};

/// Ordered typing context. Later bindings shadow earlier ones; top-level
/// definitions live in their own namespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeContext<T> {
    bindings: Vec<(String, T)>,
    defs: Vec<(String, T)>,
}

pub type SourceContext = TypeContext<SourceType>;
pub type TargetContext = TypeContext<TargetType>;

impl<T> Default for TypeContext<T> {
    fn default() -> Self {
        TypeContext {
            bindings: Vec::new(),
            defs: Vec::new(),
        }
    }
}

impl<T: Clone> TypeContext<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns a copy of the context extended with `name : ty`.
    pub fn with(&self, name: impl Into<String>, ty: T) -> Self {
        let mut ctx = self.clone();
        ctx.push(name, ty);
        ctx
    }

    /// Returns a copy of the context with an extra top-level definition.
    pub fn with_def(&self, name: impl Into<String>, ty: T) -> Self {
        let mut ctx = self.clone();
        ctx.defs.push((name.into(), ty));
        ctx
    }

    pub fn push(&mut self, name: impl Into<String>, ty: T) {
        self.bindings.push((name.into(), ty));
    }

    pub fn pop(&mut self) {
        self.bindings.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&T> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn lookup_def(&self, name: &str) -> Option<&T> {
        self.defs.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &T)> {
        self.bindings.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn defs(&self) -> impl Iterator<Item = (&str, &T)> {
        self.defs.iter().map(|(n, t)| (n.as_str(), t))
    }

    /// Applies `f` to every binding and definition type.
    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> TypeContext<U> {
        TypeContext {
            bindings: self.bindings.iter().map(|(n, t)| (n.clone(), f(t))).collect(),
            defs: self.defs.iter().map(|(n, t)| (n.clone(), f(t))).collect(),
        }
    }

    fn scoped<R>(&mut self, name: &str, ty: T, body: impl FnOnce(&mut Self) -> R) -> R {
        self.push(name, ty);
        let r = body(self);
        self.pop();
        r
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceTypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown definition `{0}`")]
    UnknownDefinition(String),
    #[error("type mismatch in {context}: expected {expected}, found {found}")]
    Mismatch {
        expected: SourceType,
        found: SourceType,
        context: String,
    },
    #[error("condition must be bool, found {0}")]
    ConditionNotBool(SourceType),
    #[error("cannot apply a value of type {0}")]
    NotAFunction(SourceType),
    #[error("cannot infer the type of parameter `{0}`; add an annotation")]
    CannotInfer(String),
    #[error("lambda checked against non-function type {0}")]
    UnexpectedLambda(SourceType),
    #[error("definition `{0}` must be a lambda")]
    DefinitionNotLambda(String),
    #[error("in definition `{name}`: {error}")]
    InDefinition {
        name: String,
        error: Box<SourceTypeError>,
    },
}

fn mismatch(expected: &SourceType, found: &SourceType, context: &str) -> SourceTypeError {
    SourceTypeError::Mismatch {
        expected: expected.clone(),
        found: found.clone(),
        context: context.to_string(),
    }
}

type SourceResult<T> = Result<T, SourceTypeError>;

/// Infers the type of `e`, returning an elaborated copy in which every
/// lambda carries its parameter type.
pub fn elaborate(ctx: &SourceContext, e: &SourceExpr) -> SourceResult<(SourceExpr, SourceType)> {
    infer(&mut ctx.clone(), e)
}

/// Checks `e` against `expected`, returning the elaborated term.
pub fn elaborate_against(
    ctx: &SourceContext,
    e: &SourceExpr,
    expected: &SourceType,
) -> SourceResult<SourceExpr> {
    check(&mut ctx.clone(), e, expected)
}

pub fn infer_source(ctx: &SourceContext, e: &SourceExpr) -> SourceResult<SourceType> {
    elaborate(ctx, e).map(|(_, t)| t)
}

fn infer(ctx: &mut SourceContext, e: &SourceExpr) -> SourceResult<(SourceExpr, SourceType)> {
    match e {
        SourceExpr::Var(x) => ctx
            .lookup(x)
            .cloned()
            .map(|t| (e.clone(), t))
            .ok_or_else(|| SourceTypeError::UnboundVariable(x.clone())),
        SourceExpr::DefRef(x) => ctx
            .lookup_def(x)
            .cloned()
            .map(|t| (e.clone(), t))
            .ok_or_else(|| SourceTypeError::UnknownDefinition(x.clone())),
        SourceExpr::Lam { param, ann, body } => {
            let ann = ann
                .clone()
                .ok_or_else(|| SourceTypeError::CannotInfer(param.clone()))?;
            let (body, result) = ctx.scoped(param, ann.clone(), |ctx| infer(ctx, body))?;
            Ok((
                SourceExpr::lam_typed(param.clone(), ann.clone(), body),
                SourceType::arrow(ann, result),
            ))
        }
        SourceExpr::App(f, a) => {
            if let SourceExpr::Lam {
                param, ann: None, body,
            } = &**f
            {
                // The argument determines the parameter type.
                let (a, ta) = infer(ctx, a)?;
                let (body, result) = ctx.scoped(param, ta.clone(), |ctx| infer(ctx, body))?;
                let f = SourceExpr::lam_typed(param.clone(), ta, body);
                return Ok((SourceExpr::app(f, a), result));
            }
            let (f, tf) = infer(ctx, f)?;
            match tf {
                SourceType::Arrow(p, r) => {
                    let a = check(ctx, a, &p)?;
                    Ok((SourceExpr::app(f, a), *r))
                }
                other => Err(SourceTypeError::NotAFunction(other)),
            }
        }
        SourceExpr::Let { name, bound, body } => {
            let (bound, tb) = infer(ctx, bound)?;
            let (body, t) = ctx.scoped(name, tb, |ctx| infer(ctx, body))?;
            Ok((SourceExpr::let_in(name.clone(), bound, body), t))
        }
        SourceExpr::Int(_) => Ok((e.clone(), SourceType::INT)),
        SourceExpr::Bool(_) => Ok((e.clone(), SourceType::BOOL)),
        SourceExpr::Prim(op, l, r) => {
            let context = format!("operand of `{}`", op.symbol());
            let l = check_in(ctx, l, &SourceType::INT, &context)?;
            let r = check_in(ctx, r, &SourceType::INT, &context)?;
            let t = if op.returns_bool() {
                SourceType::BOOL
            } else {
                SourceType::INT
            };
            Ok((SourceExpr::prim(*op, l, r), t))
        }
        SourceExpr::If(c, t, f) => {
            let c = check_condition(ctx, c)?;
            let (t, tt) = infer(ctx, t)?;
            let f = check_in(ctx, f, &tt, "else branch")?;
            Ok((SourceExpr::if_then_else(c, t, f), tt))
        }
        SourceExpr::Effect(_) => Ok((e.clone(), SourceType::INT)),
    }
}

fn check_condition(ctx: &mut SourceContext, c: &SourceExpr) -> SourceResult<SourceExpr> {
    let (c, tc) = infer(ctx, c)?;
    if tc != SourceType::BOOL {
        return Err(SourceTypeError::ConditionNotBool(tc));
    }
    Ok(c)
}

fn check(ctx: &mut SourceContext, e: &SourceExpr, expected: &SourceType) -> SourceResult<SourceExpr> {
    check_in(ctx, e, expected, "expression")
}

fn check_in(
    ctx: &mut SourceContext,
    e: &SourceExpr,
    expected: &SourceType,
    context: &str,
) -> SourceResult<SourceExpr> {
    match (e, expected) {
        (SourceExpr::Lam { param, ann, body }, SourceType::Arrow(p, r)) => {
            if let Some(ann) = ann {
                if ann != &**p {
                    return Err(mismatch(p, ann, &format!("parameter `{param}`")));
                }
            }
            let body = ctx.scoped(param, (**p).clone(), |ctx| check_in(ctx, body, r, "lambda body"))?;
            Ok(SourceExpr::lam_typed(param.clone(), (**p).clone(), body))
        }
        (SourceExpr::Lam { ann: None, .. }, other) => {
            Err(SourceTypeError::UnexpectedLambda(other.clone()))
        }
        (SourceExpr::If(c, t, f), _) => {
            let c = check_condition(ctx, c)?;
            let t = check_in(ctx, t, expected, "then branch")?;
            let f = check_in(ctx, f, expected, "else branch")?;
            Ok(SourceExpr::if_then_else(c, t, f))
        }
        (SourceExpr::Let { name, bound, body }, _) => {
            let (bound, tb) = infer(ctx, bound)?;
            let body = ctx.scoped(name, tb, |ctx| check_in(ctx, body, expected, context))?;
            Ok(SourceExpr::let_in(name.clone(), bound, body))
        }
        _ => {
            let (e, found) = infer(ctx, e)?;
            if &found != expected {
                return Err(mismatch(expected, &found, context));
            }
            Ok(e)
        }
    }
}

/// Type-checks a whole program. Every definition must be a lambda of its
/// declared type; all definition types are in scope everywhere (the parser
/// has already restricted references to the current and earlier ones).
///
/// Returns the elaborated program and the type of `main`.
pub fn check_program(ctx: &SourceContext, p: &Program) -> SourceResult<(Program, SourceType)> {
    let mut ctx = ctx.clone();
    for d in &p.defs {
        ctx = ctx.with_def(d.name.clone(), d.ty.clone());
    }
    let mut defs = Vec::with_capacity(p.defs.len());
    for d in &p.defs {
        if !matches!(d.body, SourceExpr::Lam { .. }) {
            return Err(SourceTypeError::DefinitionNotLambda(d.name.clone()));
        }
        let body = check_in(&mut ctx, &d.body, &d.ty, "definition body").map_err(|error| {
            SourceTypeError::InDefinition {
                name: d.name.clone(),
                error: Box::new(error),
            }
        })?;
        defs.push(Definition {
            name: d.name.clone(),
            ty: d.ty.clone(),
            body,
        });
    }
    let (main, ty) = infer(&mut ctx, &p.main)?;
    Ok((Program { defs, main }, ty))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TargetTypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown definition `{0}`")]
    UnknownDefinition(String),
    #[error("type mismatch in {context}: expected {expected}, found {found}")]
    Mismatch {
        expected: TargetType,
        found: TargetType,
        context: String,
    },
    #[error("condition must be bool, found {0}")]
    ConditionNotBool(TargetType),
    #[error("cannot apply a value of type {0}")]
    NotAFunction(TargetType),
    #[error("expected a computation, found {found} in {context}")]
    NotAComputation { found: TargetType, context: String },
    #[error("continuation of `bind` must return a computation, found {0}")]
    ContinuationNotComputation(TargetType),
    #[error("cannot infer the type of parameter `{0}`")]
    CannotInfer(String),
}

type TargetResult<T> = Result<T, TargetTypeError>;

fn target_mismatch(expected: &TargetType, found: &TargetType, context: &str) -> TargetTypeError {
    TargetTypeError::Mismatch {
        expected: expected.clone(),
        found: found.clone(),
        context: context.to_string(),
    }
}

fn expect_m(t: TargetType, context: &str) -> TargetResult<TargetType> {
    match t {
        TargetType::M(inner) => Ok(*inner),
        found => Err(TargetTypeError::NotAComputation {
            found,
            context: context.to_string(),
        }),
    }
}

pub fn infer_target(ctx: &TargetContext, e: &TargetExpr) -> TargetResult<TargetType> {
    infer_t(&mut ctx.clone(), e)
}

/// True iff `e` has type `expected` under `ctx`.
pub fn check_target(ctx: &TargetContext, e: &TargetExpr, expected: &TargetType) -> bool {
    check_target_detailed(ctx, e, expected).is_ok()
}

/// Like [`check_target`], but reports why checking failed.
pub fn check_target_detailed(
    ctx: &TargetContext,
    e: &TargetExpr,
    expected: &TargetType,
) -> TargetResult<()> {
    check_t(&mut ctx.clone(), e, expected)
}

fn check_t(ctx: &mut TargetContext, e: &TargetExpr, expected: &TargetType) -> TargetResult<()> {
    match (e, expected) {
        (TargetExpr::Lam { param, ann, body }, TargetType::Arrow(p, r)) => {
            if let Some(ann) = ann {
                if ann != &**p {
                    return Err(target_mismatch(p, ann, &format!("parameter `{param}`")));
                }
            }
            ctx.scoped(param, (**p).clone(), |ctx| check_t(ctx, body, r))
        }
        _ => {
            let found = infer_t(ctx, e)?;
            if &found != expected {
                return Err(target_mismatch(expected, &found, "term"));
            }
            Ok(())
        }
    }
}

/// Infers the type of a function position whose domain is known to be
/// `domain`, so that unannotated continuation binders can be typed.
fn infer_fn_with_domain(
    ctx: &mut TargetContext,
    k: &TargetExpr,
    domain: &TargetType,
) -> TargetResult<TargetType> {
    if let TargetExpr::Lam { param, ann, body } = k {
        if let Some(ann) = ann {
            if ann != domain {
                return Err(target_mismatch(domain, ann, &format!("parameter `{param}`")));
            }
        }
        let result = ctx.scoped(param, domain.clone(), |ctx| infer_t(ctx, body))?;
        return Ok(TargetType::arrow(domain.clone(), result));
    }
    let t = infer_t(ctx, k)?;
    match &t {
        TargetType::Arrow(p, _) if &**p == domain => Ok(t),
        TargetType::Arrow(p, _) => Err(target_mismatch(domain, p, "continuation parameter")),
        _ => Err(TargetTypeError::NotAFunction(t)),
    }
}

fn infer_t(ctx: &mut TargetContext, e: &TargetExpr) -> TargetResult<TargetType> {
    match e {
        TargetExpr::Var(x) => ctx
            .lookup(x)
            .cloned()
            .ok_or_else(|| TargetTypeError::UnboundVariable(x.clone())),
        TargetExpr::DefRef(x) => ctx
            .lookup_def(x)
            .cloned()
            .ok_or_else(|| TargetTypeError::UnknownDefinition(x.clone())),
        TargetExpr::Lam { param, ann, body } => {
            let ann = ann
                .clone()
                .ok_or_else(|| TargetTypeError::CannotInfer(param.clone()))?;
            let result = ctx.scoped(param, ann.clone(), |ctx| infer_t(ctx, body))?;
            Ok(TargetType::arrow(ann, result))
        }
        TargetExpr::App(f, a) => {
            if let TargetExpr::Lam {
                param, ann: None, body,
            } = &**f
            {
                let ta = infer_t(ctx, a)?;
                return ctx.scoped(param, ta, |ctx| infer_t(ctx, body));
            }
            match infer_t(ctx, f)? {
                TargetType::Arrow(p, r) => {
                    check_t(ctx, a, &p)?;
                    Ok(*r)
                }
                other => Err(TargetTypeError::NotAFunction(other)),
            }
        }
        TargetExpr::Int(_) => Ok(TargetType::INT),
        TargetExpr::Bool(_) => Ok(TargetType::BOOL),
        TargetExpr::Prim(op, l, r) => {
            for operand in [l, r] {
                let t = infer_t(ctx, operand)?;
                if t != TargetType::INT {
                    return Err(target_mismatch(
                        &TargetType::INT,
                        &t,
                        &format!("operand of `{}`", op.symbol()),
                    ));
                }
            }
            Ok(if op.returns_bool() {
                TargetType::BOOL
            } else {
                TargetType::INT
            })
        }
        TargetExpr::If(c, t, f) => {
            let tc = infer_t(ctx, c)?;
            if tc != TargetType::BOOL {
                return Err(TargetTypeError::ConditionNotBool(tc));
            }
            let tt = infer_t(ctx, t)?;
            let tf = infer_t(ctx, f)?;
            if tt != tf {
                return Err(target_mismatch(&tt, &tf, "else branch"));
            }
            Ok(tt)
        }
        TargetExpr::Effect(EffectKind::Read(_) | EffectKind::Tick(_)) => {
            Ok(TargetType::m(TargetType::INT))
        }
        TargetExpr::Unit(a) => Ok(TargetType::m(infer_t(ctx, a)?)),
        TargetExpr::MAlias(a) => {
            let t = infer_t(ctx, a)?;
            let inner = expect_m(t, "argument of `malias`")?;
            Ok(TargetType::m(TargetType::m(inner)))
        }
        TargetExpr::Bind(m, k) => {
            let tm = infer_t(ctx, m)?;
            let a = expect_m(tm, "first argument of `bind`")?;
            match infer_fn_with_domain(ctx, k, &a)? {
                TargetType::Arrow(_, r) => match *r {
                    r @ TargetType::M(_) => Ok(r),
                    other => Err(TargetTypeError::ContinuationNotComputation(other)),
                },
                other => Err(TargetTypeError::NotAFunction(other)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expr, parse_program, PrimOp};
    use SourceExpr as E;
    use TargetExpr as T;

    fn int_to_int() -> SourceType {
        SourceType::arrow(SourceType::INT, SourceType::INT)
    }

    #[test]
    fn annotated_identity() {
        let e = E::lam_typed("x", SourceType::INT, E::var("x"));
        assert_eq!(infer_source(&SourceContext::new(), &e), Ok(int_to_int()));
    }

    #[test]
    fn effects_are_int() {
        assert_eq!(infer_source(&SourceContext::new(), &E::read("k")), Ok(SourceType::INT));
        assert_eq!(infer_source(&SourceContext::new(), &E::tick("t")), Ok(SourceType::INT));
    }

    #[test]
    fn applying_to_wrong_argument_fails() {
        let e = parse_expr("(\\x. x + 1) true").unwrap();
        let err = infer_source(&SourceContext::new(), &e).unwrap_err();
        assert!(matches!(
            err,
            SourceTypeError::Mismatch { expected, found, .. }
                if expected == SourceType::INT && found == SourceType::BOOL
        ));
    }

    #[test]
    fn unannotated_lambda_checked_against_arrow() {
        let e = parse_expr("(\\f:int -> int. f 1) (\\x. x * 2)").unwrap();
        let (elab, t) = elaborate(&SourceContext::new(), &e).unwrap();
        assert_eq!(t, SourceType::INT);
        let expected = parse_expr("(\\f:int -> int. f 1) (\\x:int. x * 2)").unwrap();
        assert_eq!(elab, expected);
    }

    #[test]
    fn bare_lambda_needs_annotation() {
        let e = E::lam("x", E::var("x"));
        assert_eq!(
            infer_source(&SourceContext::new(), &e),
            Err(SourceTypeError::CannotInfer("x".into()))
        );
    }

    #[test]
    fn other_errors() {
        let ctx = SourceContext::new();
        assert_eq!(
            infer_source(&ctx, &E::var("q")),
            Err(SourceTypeError::UnboundVariable("q".into()))
        );
        assert_eq!(
            infer_source(&ctx, &parse_expr("if 1 then 2 else 3").unwrap()),
            Err(SourceTypeError::ConditionNotBool(SourceType::INT))
        );
        assert_eq!(
            infer_source(&ctx, &parse_expr("1 2").unwrap()),
            Err(SourceTypeError::NotAFunction(SourceType::INT))
        );
    }

    #[test]
    fn shadowing_and_weakening() {
        let ctx = SourceContext::new().with("x", SourceType::BOOL).with("x", SourceType::INT);
        assert_eq!(infer_source(&ctx, &E::var("x")), Ok(SourceType::INT));
        let e = E::prim(PrimOp::Add, E::var("x"), E::Int(1));
        let weaker = ctx.with("unused", int_to_int());
        assert_eq!(infer_source(&ctx, &e), infer_source(&weaker, &e));
    }

    #[test]
    fn programs_with_recursion() {
        let p = parse_program(
            "def f : int -> int = \\n. if n <= 0 then 0 else f (n - 1)\nmain = f 3",
        )
        .unwrap();
        let (elab, t) = check_program(&SourceContext::new(), &p).unwrap();
        assert_eq!(t, SourceType::INT);
        assert!(matches!(
            &elab.defs[0].body,
            SourceExpr::Lam { ann: Some(a), .. } if *a == SourceType::INT
        ));
    }

    #[test]
    fn definitions_must_be_lambdas() {
        let p = parse_program("def k : int = 3\nmain = k").unwrap();
        assert_eq!(
            check_program(&SourceContext::new(), &p).map(|_| ()),
            Err(SourceTypeError::DefinitionNotLambda("k".into()))
        );
    }

    #[test]
    fn malias_at_m_int() {
        let ctx = TargetContext::new().with("m", TargetType::m(TargetType::INT));
        assert!(check_target(
            &ctx,
            &T::malias(T::var("m")),
            &TargetType::m(TargetType::m(TargetType::INT))
        ));
        assert!(!check_target(
            &TargetContext::new(),
            &T::malias(T::Int(1)),
            &TargetType::m(TargetType::m(TargetType::INT))
        ));
    }

    #[test]
    fn unit_of_literal() {
        assert!(check_target(
            &TargetContext::new(),
            &T::unit(T::Int(1)),
            &TargetType::m(TargetType::INT)
        ));
    }

    #[test]
    fn bind_continuation_must_return_computation() {
        let e = T::bind(T::unit(T::Int(1)), T::lam("x", None, T::var("x")));
        assert_eq!(
            check_target_detailed(&TargetContext::new(), &e, &TargetType::m(TargetType::INT)),
            Err(TargetTypeError::ContinuationNotComputation(TargetType::INT))
        );
        let ok = T::bind(T::unit(T::Int(1)), T::lam("x", None, T::unit(T::var("x"))));
        assert!(check_target(&TargetContext::new(), &ok, &TargetType::m(TargetType::INT)));
    }
}
