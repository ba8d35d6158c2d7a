//! First-class effectful computations.
//!
//! A [`Comp`] is an effect tree: either a finished value, an effect request
//! with a continuation, or a suspended computation. Runners interpret the
//! requests; strategies and the evaluator only build trees.

use std::cell::Cell;
use std::fmt;
use std::rc::Rc;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IVarId(pub(crate) usize);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cell#{}", self.0)
    }
}

impl fmt::Display for IVarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ivar#{}", self.0)
    }
}

pub type Cont = Rc<dyn Fn(Value) -> Result<Comp, RunError>>;
pub type Thunk = Rc<dyn Fn() -> Result<Comp, RunError>>;
pub type Func = Rc<dyn Fn(Value) -> Result<Value, RunError>>;

/// Runtime values. Computations are values too, since translated variables
/// have computation types.
#[derive(Clone)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Unit,
    Func(Func),
    Comp(Comp),
    Cell(CellId),
    IVar(IVarId),
    /// Contents of a call-by-need cell: empty or the memoized result.
    Slot(Option<Box<Value>>),
}

impl Value {
    pub fn func(f: impl Fn(Value) -> Result<Value, RunError> + 'static) -> Self {
        Value::Func(Rc::new(f))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Unit => "unit",
            Value::Func(_) => "function",
            Value::Comp(_) => "computation",
            Value::Cell(_) => "cell",
            Value::IVar(_) => "ivar",
            Value::Slot(_) => "slot",
        }
    }

    pub fn as_int(&self) -> Result<i64, RunError> {
        match self {
            Value::Int(n) => Ok(*n),
            other => Err(RunError::TypeMismatch {
                expected: "int",
                found: other.kind(),
            }),
        }
    }

    pub fn as_bool(&self) -> Result<bool, RunError> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(RunError::TypeMismatch {
                expected: "bool",
                found: other.kind(),
            }),
        }
    }

    pub fn into_comp(self) -> Result<Comp, RunError> {
        match self {
            Value::Comp(c) => Ok(c),
            other => Err(RunError::NotAComputation(other.kind())),
        }
    }

    pub fn as_cell(&self) -> Result<CellId, RunError> {
        match self {
            Value::Cell(id) => Ok(*id),
            other => Err(RunError::TypeMismatch {
                expected: "cell",
                found: other.kind(),
            }),
        }
    }

    pub fn as_ivar(&self) -> Result<IVarId, RunError> {
        match self {
            Value::IVar(id) => Ok(*id),
            other => Err(RunError::TypeMismatch {
                expected: "ivar",
                found: other.kind(),
            }),
        }
    }

    pub fn apply(&self, arg: Value) -> Result<Value, RunError> {
        match self {
            Value::Func(f) => f(arg),
            other => Err(RunError::NotAFunction(other.kind())),
        }
    }

    pub fn observe(&self) -> Observed {
        match self {
            Value::Int(n) => Observed::Int(*n),
            Value::Bool(b) => Observed::Bool(*b),
            other => Observed::Opaque(format!("<{}>", other.kind())),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "Int({n})"),
            Value::Bool(b) => write!(f, "Bool({b})"),
            Value::Unit => f.write_str("Unit"),
            Value::Func(_) => f.write_str("Func(..)"),
            Value::Comp(c) => write!(f, "Comp({c:?})"),
            Value::Cell(id) => write!(f, "Cell({id})"),
            Value::IVar(id) => write!(f, "IVar({id})"),
            Value::Slot(s) => write!(f, "Slot({s:?})"),
        }
    }
}

/// The observable part of a value: base values compare exactly, everything
/// else is reduced to a description of its kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum Observed {
    Int(i64),
    Bool(bool),
    Opaque(String),
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Int(n) => write!(f, "{n}"),
            Observed::Bool(b) => write!(f, "{b}"),
            Observed::Opaque(s) => f.write_str(s),
        }
    }
}

#[derive(Clone)]
pub enum EffectRequest {
    Read(String),
    /// Observable marker; resumes with `0`.
    Tick(String),
    CellNew(Value),
    CellRead(CellId),
    CellWrite(CellId, Value),
    Spawn(Comp),
    Get(IVarId),
}

impl fmt::Debug for EffectRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffectRequest::Read(k) => write!(f, "Read({k:?})"),
            EffectRequest::Tick(l) => write!(f, "Tick({l:?})"),
            EffectRequest::CellNew(v) => write!(f, "CellNew({v:?})"),
            EffectRequest::CellRead(id) => write!(f, "CellRead({id})"),
            EffectRequest::CellWrite(id, v) => write!(f, "CellWrite({id}, {v:?})"),
            EffectRequest::Spawn(_) => f.write_str("Spawn(..)"),
            EffectRequest::Get(id) => write!(f, "Get({id})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("missing configuration key `{0}`")]
    MissingKey(String),
    #[error("access to unallocated {0}")]
    UnallocatedCell(CellId),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
    #[error("deadlock: every remaining task is blocked")]
    Deadlock,
    #[error("effect `{0}` is not supported by this runner")]
    UnsupportedEffect(&'static str),
    #[error("expected a computation, found {0}")]
    NotAComputation(&'static str),
    #[error("cannot apply a value of kind {0}")]
    NotAFunction(&'static str),
    #[error("unbound variable `{0}` at run time")]
    UnboundVariable(String),
    #[error("unknown definition `{0}` at run time")]
    UnknownDefinition(String),
    #[error("expected {expected}, found {found}")]
    TypeMismatch {
        expected: &'static str,
        found: &'static str,
    },
}

impl RunError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::MissingKey(_) => "MissingKey",
            RunError::UnallocatedCell(_) => "UnallocatedCell",
            RunError::FuelExhausted(_) => "FuelExhausted",
            RunError::Deadlock => "Deadlock",
            RunError::UnsupportedEffect(_) => "UnsupportedEffect",
            RunError::NotAComputation(_) => "NotAComputation",
            RunError::NotAFunction(_) => "NotAFunction",
            RunError::UnboundVariable(_) => "UnboundVariable",
            RunError::UnknownDefinition(_) => "UnknownDefinition",
            RunError::TypeMismatch { .. } => "TypeMismatch",
        }
    }

    /// Errors that abort a whole run rather than a single parallel task.
    pub fn is_global(&self) -> bool {
        matches!(self, RunError::FuelExhausted(_) | RunError::Deadlock)
    }
}

/// An effect tree.
#[derive(Clone)]
pub enum Comp {
    Pure(Box<Value>),
    Step(Box<EffectRequest>, Cont),
    /// A computation whose construction is postponed until a runner reaches
    /// it. Used for recursive calls so that building a tree never diverges.
    Delay(Thunk),
}

impl fmt::Debug for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comp::Pure(v) => write!(f, "Pure({v:?})"),
            Comp::Step(req, _) => write!(f, "Step({req:?}, ..)"),
            Comp::Delay(_) => f.write_str("Delay(..)"),
        }
    }
}

fn resume_pure() -> Cont {
    Rc::new(|v| Ok(Comp::unit(v)))
}

impl Comp {
    pub fn unit(v: Value) -> Comp {
        Comp::Pure(Box::new(v))
    }

    /// Performs a single effect and returns its result.
    pub fn effect(req: EffectRequest) -> Comp {
        Comp::Step(Box::new(req), resume_pure())
    }

    pub fn read(key: impl Into<String>) -> Comp {
        Comp::effect(EffectRequest::Read(key.into()))
    }

    pub fn tick(label: impl Into<String>) -> Comp {
        Comp::effect(EffectRequest::Tick(label.into()))
    }

    pub fn delay(f: impl Fn() -> Result<Comp, RunError> + 'static) -> Comp {
        Comp::Delay(Rc::new(f))
    }

    /// Grafts `k` onto every leaf. Binding a `Pure` applies `k` at once, so
    /// the left identity law holds by construction.
    pub fn bind(self, k: Cont) -> Result<Comp, RunError> {
        match self {
            Comp::Pure(v) => k(*v),
            Comp::Step(req, c) => Ok(Comp::Step(
                req,
                Rc::new(move |v| c(v)?.bind(k.clone())),
            )),
            Comp::Delay(t) => Ok(Comp::Delay(Rc::new(move || t()?.bind(k.clone())))),
        }
    }

    pub fn and_then(
        self,
        k: impl Fn(Value) -> Result<Comp, RunError> + 'static,
    ) -> Result<Comp, RunError> {
        self.bind(Rc::new(k))
    }

    pub fn map(self, f: impl Fn(Value) -> Result<Value, RunError> + 'static) -> Result<Comp, RunError> {
        self.and_then(move |v| Ok(Comp::unit(f(v)?)))
    }

    /// Flattens `M (M a)` into `M a`.
    pub fn join(self) -> Result<Comp, RunError> {
        self.and_then(Value::into_comp)
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Comp::Pure(_))
    }
}

/// Step budget shared by a runner and the evaluator feeding it.
#[derive(Clone, Debug)]
pub struct Fuel {
    remaining: Rc<Cell<u64>>,
    limit: u64,
}

impl Fuel {
    pub const DEFAULT: u64 = 1_000_000;

    pub fn new(limit: u64) -> Self {
        Fuel {
            remaining: Rc::new(Cell::new(limit)),
            limit,
        }
    }

    pub fn burn(&self) -> Result<(), RunError> {
        match self.remaining.get() {
            0 => Err(RunError::FuelExhausted(self.limit)),
            n => {
                self.remaining.set(n - 1);
                Ok(())
            }
        }
    }

    pub fn used(&self) -> u64 {
        self.limit - self.remaining.get()
    }
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel::new(Fuel::DEFAULT)
    }
}
