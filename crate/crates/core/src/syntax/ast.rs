use std::fmt;
use std::rc::Rc;

/// Ground types shared by both calculi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseType {
    Int,
    Bool,
}

impl BaseType {
    pub fn name(self) -> &'static str {
        match self {
            BaseType::Int => "int",
            BaseType::Bool => "bool",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SourceType {
    Base(BaseType),
    Arrow(Box<SourceType>, Box<SourceType>),
}

impl SourceType {
    pub const INT: SourceType = SourceType::Base(BaseType::Int);
    pub const BOOL: SourceType = SourceType::Base(BaseType::Bool);

    pub fn arrow(from: SourceType, to: SourceType) -> Self {
        SourceType::Arrow(Box::new(from), Box::new(to))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, SourceType::Base(_))
    }
}

/// Types of the monadic target calculus. `M` may nest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetType {
    Base(BaseType),
    Arrow(Box<TargetType>, Box<TargetType>),
    M(Box<TargetType>),
}

impl TargetType {
    pub const INT: TargetType = TargetType::Base(BaseType::Int);
    pub const BOOL: TargetType = TargetType::Base(BaseType::Bool);

    pub fn arrow(from: TargetType, to: TargetType) -> Self {
        TargetType::Arrow(Box::new(from), Box::new(to))
    }

    pub fn m(inner: TargetType) -> Self {
        TargetType::M(Box::new(inner))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Leq,
    Gt,
}

impl PrimOp {
    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Mul => "*",
            PrimOp::Leq => "<=",
            PrimOp::Gt => ">",
        }
    }

    pub fn returns_bool(self) -> bool {
        matches!(self, PrimOp::Leq | PrimOp::Gt)
    }
}

/// Observable effect primitives. Both produce an `int`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EffectKind {
    Read(String),
    Tick(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceExpr {
    Var(String),
    Lam {
        param: String,
        ann: Option<SourceType>,
        body: Box<SourceExpr>,
    },
    App(Box<SourceExpr>, Box<SourceExpr>),
    Let {
        name: String,
        bound: Box<SourceExpr>,
        body: Box<SourceExpr>,
    },
    Int(i64),
    Bool(bool),
    Prim(PrimOp, Box<SourceExpr>, Box<SourceExpr>),
    If(Box<SourceExpr>, Box<SourceExpr>, Box<SourceExpr>),
    Effect(EffectKind),
    /// Reference to a top-level (possibly recursive) definition.
    DefRef(String),
}

impl SourceExpr {
    pub fn var(name: impl Into<String>) -> Self {
        SourceExpr::Var(name.into())
    }

    pub fn lam(param: impl Into<String>, body: SourceExpr) -> Self {
        SourceExpr::Lam {
            param: param.into(),
            ann: None,
            body: Box::new(body),
        }
    }

    pub fn lam_typed(param: impl Into<String>, ann: SourceType, body: SourceExpr) -> Self {
        SourceExpr::Lam {
            param: param.into(),
            ann: Some(ann),
            body: Box::new(body),
        }
    }

    pub fn app(f: SourceExpr, arg: SourceExpr) -> Self {
        SourceExpr::App(Box::new(f), Box::new(arg))
    }

    pub fn let_in(name: impl Into<String>, bound: SourceExpr, body: SourceExpr) -> Self {
        SourceExpr::Let {
            name: name.into(),
            bound: Box::new(bound),
            body: Box::new(body),
        }
    }

    pub fn prim(op: PrimOp, l: SourceExpr, r: SourceExpr) -> Self {
        SourceExpr::Prim(op, Box::new(l), Box::new(r))
    }

    pub fn if_then_else(c: SourceExpr, t: SourceExpr, e: SourceExpr) -> Self {
        SourceExpr::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn read(key: impl Into<String>) -> Self {
        SourceExpr::Effect(EffectKind::Read(key.into()))
    }

    pub fn tick(label: impl Into<String>) -> Self {
        SourceExpr::Effect(EffectKind::Tick(label.into()))
    }

    /// Number of application and let nodes; each one is a site where the
    /// call-by-alias translation inserts `malias`.
    pub fn alias_sites(&self) -> usize {
        match self {
            SourceExpr::App(f, a) => 1 + f.alias_sites() + a.alias_sites(),
            SourceExpr::Let { bound, body, .. } => 1 + bound.alias_sites() + body.alias_sites(),
            SourceExpr::Lam { body, .. } => body.alias_sites(),
            SourceExpr::Prim(_, l, r) => l.alias_sites() + r.alias_sites(),
            SourceExpr::If(c, t, e) => c.alias_sites() + t.alias_sites() + e.alias_sites(),
            SourceExpr::Var(_)
            | SourceExpr::Int(_)
            | SourceExpr::Bool(_)
            | SourceExpr::Effect(_)
            | SourceExpr::DefRef(_) => 0,
        }
    }

    /// Replace free occurrences of `name` with `replacement`.
    ///
    /// `replacement` must be closed, so no binder in `self` can capture it.
    pub fn substitute(&self, name: &str, replacement: &SourceExpr) -> SourceExpr {
        match self {
            SourceExpr::Var(x) if x == name => replacement.clone(),
            SourceExpr::Lam { param, ann, body } => SourceExpr::Lam {
                param: param.clone(),
                ann: ann.clone(),
                body: if param == name {
                    body.clone()
                } else {
                    Box::new(body.substitute(name, replacement))
                },
            },
            SourceExpr::App(f, a) => SourceExpr::app(
                f.substitute(name, replacement),
                a.substitute(name, replacement),
            ),
            SourceExpr::Let {
                name: bound_name,
                bound,
                body,
            } => SourceExpr::Let {
                name: bound_name.clone(),
                bound: Box::new(bound.substitute(name, replacement)),
                body: if bound_name == name {
                    body.clone()
                } else {
                    Box::new(body.substitute(name, replacement))
                },
            },
            SourceExpr::Prim(op, l, r) => SourceExpr::prim(
                *op,
                l.substitute(name, replacement),
                r.substitute(name, replacement),
            ),
            SourceExpr::If(c, t, e) => SourceExpr::if_then_else(
                c.substitute(name, replacement),
                t.substitute(name, replacement),
                e.substitute(name, replacement),
            ),
            other => other.clone(),
        }
    }
}

/// A top-level definition `def name : ty = body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub ty: SourceType,
    pub body: SourceExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub defs: Vec<Definition>,
    pub main: SourceExpr,
}

impl Program {
    pub fn from_main(main: SourceExpr) -> Self {
        Program {
            defs: Vec::new(),
            main,
        }
    }

    /// Substitute the literal `n` for free occurrences of the distinguished
    /// `arg` variable.
    pub fn with_arg(&self, n: i64) -> Program {
        let lit = SourceExpr::Int(n);
        Program {
            defs: self
                .defs
                .iter()
                .map(|d| Definition {
                    name: d.name.clone(),
                    ty: d.ty.clone(),
                    body: d.body.substitute(ARG_NAME, &lit),
                })
                .collect(),
            main: self.main.substitute(ARG_NAME, &lit),
        }
    }
}

/// Name of the variable replaced by `Program::with_arg`.
pub const ARG_NAME: &str = "arg";

/// Expressions of the monadic target calculus.
///
/// Children are reference counted so that closures created by the evaluator
/// can share lambda bodies without copying them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetExpr {
    Var(String),
    Lam {
        param: String,
        ann: Option<TargetType>,
        body: Rc<TargetExpr>,
    },
    App(Rc<TargetExpr>, Rc<TargetExpr>),
    Int(i64),
    Bool(bool),
    Prim(PrimOp, Rc<TargetExpr>, Rc<TargetExpr>),
    If(Rc<TargetExpr>, Rc<TargetExpr>, Rc<TargetExpr>),
    Effect(EffectKind),
    DefRef(String),
    Unit(Rc<TargetExpr>),
    Bind(Rc<TargetExpr>, Rc<TargetExpr>),
    MAlias(Rc<TargetExpr>),
}

impl TargetExpr {
    pub fn var(name: impl Into<String>) -> Self {
        TargetExpr::Var(name.into())
    }

    pub fn lam(param: impl Into<String>, ann: Option<TargetType>, body: TargetExpr) -> Self {
        TargetExpr::Lam {
            param: param.into(),
            ann,
            body: Rc::new(body),
        }
    }

    pub fn app(f: TargetExpr, arg: TargetExpr) -> Self {
        TargetExpr::App(Rc::new(f), Rc::new(arg))
    }

    pub fn unit(e: TargetExpr) -> Self {
        TargetExpr::Unit(Rc::new(e))
    }

    pub fn bind(m: TargetExpr, k: TargetExpr) -> Self {
        TargetExpr::Bind(Rc::new(m), Rc::new(k))
    }

    pub fn malias(e: TargetExpr) -> Self {
        TargetExpr::MAlias(Rc::new(e))
    }

    pub fn prim(op: PrimOp, l: TargetExpr, r: TargetExpr) -> Self {
        TargetExpr::Prim(op, Rc::new(l), Rc::new(r))
    }

    pub fn if_then_else(c: TargetExpr, t: TargetExpr, e: TargetExpr) -> Self {
        TargetExpr::If(Rc::new(c), Rc::new(t), Rc::new(e))
    }

    pub fn malias_count(&self) -> usize {
        match self {
            TargetExpr::MAlias(e) => 1 + e.malias_count(),
            TargetExpr::Lam { body, .. } => body.malias_count(),
            TargetExpr::App(a, b) | TargetExpr::Prim(_, a, b) | TargetExpr::Bind(a, b) => {
                a.malias_count() + b.malias_count()
            }
            TargetExpr::If(c, t, e) => c.malias_count() + t.malias_count() + e.malias_count(),
            TargetExpr::Unit(e) => e.malias_count(),
            TargetExpr::Var(_)
            | TargetExpr::Int(_)
            | TargetExpr::Bool(_)
            | TargetExpr::Effect(_)
            | TargetExpr::DefRef(_) => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetDefinition {
    pub name: String,
    /// Value type of the translated definition (no outer `M`).
    pub ty: TargetType,
    /// Always a `TargetExpr::Lam`.
    pub body: TargetExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetProgram {
    pub defs: Vec<TargetDefinition>,
    pub main: TargetExpr,
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
