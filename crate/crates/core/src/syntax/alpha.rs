//! Alpha-equivalence through de Bruijn conversion.

use super::ast::{EffectKind, PrimOp, SourceExpr, SourceType};

/// Nameless form of a source term. Free variables keep their names.
#[derive(Debug, PartialEq, Eq)]
enum Nameless {
    Bound(usize),
    Free(String),
    Def(String),
    Lam(Option<SourceType>, Box<Nameless>),
    App(Box<Nameless>, Box<Nameless>),
    Let(Box<Nameless>, Box<Nameless>),
    Int(i64),
    Bool(bool),
    Prim(PrimOp, Box<Nameless>, Box<Nameless>),
    If(Box<Nameless>, Box<Nameless>, Box<Nameless>),
    Effect(EffectKind),
}

fn convert(e: &SourceExpr, scope: &mut Vec<String>) -> Nameless {
    match e {
        SourceExpr::Var(x) => match scope.iter().rev().position(|b| b == x) {
            Some(i) => Nameless::Bound(i),
            None => Nameless::Free(x.clone()),
        },
        SourceExpr::DefRef(x) => Nameless::Def(x.clone()),
        SourceExpr::Lam { param, ann, body } => {
            scope.push(param.clone());
            let body = convert(body, scope);
            scope.pop();
            Nameless::Lam(ann.clone(), Box::new(body))
        }
        SourceExpr::App(f, a) => {
            Nameless::App(Box::new(convert(f, scope)), Box::new(convert(a, scope)))
        }
        SourceExpr::Let { name, bound, body } => {
            let bound = convert(bound, scope);
            scope.push(name.clone());
            let body = convert(body, scope);
            scope.pop();
            Nameless::Let(Box::new(bound), Box::new(body))
        }
        SourceExpr::Int(n) => Nameless::Int(*n),
        SourceExpr::Bool(b) => Nameless::Bool(*b),
        SourceExpr::Prim(op, l, r) => Nameless::Prim(
            *op,
            Box::new(convert(l, scope)),
            Box::new(convert(r, scope)),
        ),
        SourceExpr::If(c, t, f) => Nameless::If(
            Box::new(convert(c, scope)),
            Box::new(convert(t, scope)),
            Box::new(convert(f, scope)),
        ),
        SourceExpr::Effect(k) => Nameless::Effect(k.clone()),
    }
}

/// True when `a` and `b` differ only in the names of bound variables.
pub fn alpha_eq(a: &SourceExpr, b: &SourceExpr) -> bool {
    convert(a, &mut Vec::new()) == convert(b, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use SourceExpr as E;

    #[test]
    fn renaming_binders() {
        assert!(alpha_eq(&E::lam("x", E::var("x")), &E::lam("y", E::var("y"))));
        assert!(alpha_eq(
            &E::let_in("a", E::Int(1), E::var("a")),
            &E::let_in("b", E::Int(1), E::var("b"))
        ));
    }

    #[test]
    fn free_variables_are_significant() {
        assert!(!alpha_eq(&E::lam("x", E::var("y")), &E::lam("x", E::var("z"))));
        assert!(!alpha_eq(&E::lam("x", E::var("x")), &E::lam("y", E::var("x"))));
    }

    #[test]
    fn shadowing() {
        let a = E::lam("x", E::lam("x", E::var("x")));
        let b = E::lam("x", E::lam("y", E::var("y")));
        let c = E::lam("x", E::lam("y", E::var("x")));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
    }

    #[test]
    fn let_bound_not_in_scope_of_its_own_binder() {
        let a = E::lam("x", E::let_in("x", E::var("x"), E::var("x")));
        let b = E::lam("y", E::let_in("z", E::var("y"), E::var("z")));
        assert!(alpha_eq(&a, &b));
    }
}
