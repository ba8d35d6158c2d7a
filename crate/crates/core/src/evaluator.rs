//! Strategy-parameterized interpreter for target terms, and the full
//! parse → check → translate → evaluate → run pipeline.

use std::collections::BTreeMap;
use std::rc::Rc;

use serde::Serialize;
use thiserror::Error;

use crate::effects::{
    Comp, Config, Fuel, Machine, Observed, ParMachine, RunError, SeqMachine, Trace, Value,
};
use crate::strategies::{get_strategy, MAlias, StrategyId};
use crate::syntax::{parse_program, EffectKind, ParseError, PrimOp, Program, TargetExpr, TargetProgram};
use crate::translate::{translate_program, Translation};
use crate::typecheck::{check_program, SourceContext, SourceTypeError};

/// Persistent environment mapping variables to runtime values.
#[derive(Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

struct EnvNode {
    name: String,
    value: Value,
    next: Env,
}

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: impl Into<String>, value: Value) -> Env {
        Env(Some(Rc::new(EnvNode {
            name: name.into(),
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.name == name {
                return Some(&node.value);
            }
            cur = &node.next;
        }
        None
    }
}

struct Inner {
    defs: BTreeMap<String, (String, Rc<TargetExpr>)>,
    malias: MAlias,
    fuel: Fuel,
}

/// Evaluates target terms to runtime values; computation-typed terms
/// evaluate to `Value::Comp`. Cheap to clone.
#[derive(Clone)]
pub struct Interpreter(Rc<Inner>);

impl Interpreter {
    pub fn new(defs: &[crate::syntax::TargetDefinition], strategy: StrategyId, fuel: Fuel) -> Self {
        let defs = defs
            .iter()
            .filter_map(|d| match &d.body {
                TargetExpr::Lam { param, body, .. } => {
                    Some((d.name.clone(), (param.clone(), body.clone())))
                }
                _ => None,
            })
            .collect();
        Interpreter(Rc::new(Inner {
            defs,
            malias: get_strategy(strategy),
            fuel,
        }))
    }

    pub fn fuel(&self) -> &Fuel {
        &self.0.fuel
    }

    pub fn eval(&self, e: &TargetExpr, env: &Env) -> Result<Value, RunError> {
        match e {
            TargetExpr::Var(x) => env
                .lookup(x)
                .cloned()
                .ok_or_else(|| RunError::UnboundVariable(x.clone())),
            TargetExpr::DefRef(name) => self.def_closure(name),
            TargetExpr::Lam { param, body, .. } => {
                let (interp, param, body, env) =
                    (self.clone(), param.clone(), body.clone(), env.clone());
                Ok(Value::func(move |arg| {
                    interp.0.fuel.burn()?;
                    interp.eval(&body, &env.bind(param.clone(), arg))
                }))
            }
            TargetExpr::App(f, a) => {
                let f = self.eval(f, env)?;
                let a = self.eval(a, env)?;
                f.apply(a)
            }
            TargetExpr::Int(n) => Ok(Value::Int(*n)),
            TargetExpr::Bool(b) => Ok(Value::Bool(*b)),
            TargetExpr::Prim(op, l, r) => {
                let l = self.eval(l, env)?.as_int()?;
                let r = self.eval(r, env)?.as_int()?;
                Ok(match op {
                    PrimOp::Add => Value::Int(l.wrapping_add(r)),
                    PrimOp::Sub => Value::Int(l.wrapping_sub(r)),
                    PrimOp::Mul => Value::Int(l.wrapping_mul(r)),
                    PrimOp::Leq => Value::Bool(l <= r),
                    PrimOp::Gt => Value::Bool(l > r),
                })
            }
            TargetExpr::If(c, t, f) => {
                if self.eval(c, env)?.as_bool()? {
                    self.eval(t, env)
                } else {
                    self.eval(f, env)
                }
            }
            TargetExpr::Effect(EffectKind::Read(key)) => Ok(Value::Comp(Comp::read(key.clone()))),
            TargetExpr::Effect(EffectKind::Tick(label)) => {
                Ok(Value::Comp(Comp::tick(label.clone())))
            }
            TargetExpr::Unit(e) => Ok(Value::Comp(Comp::unit(self.eval(e, env)?))),
            TargetExpr::Bind(m, k) => {
                let m = self.eval(m, env)?.into_comp()?;
                let k = self.eval(k, env)?;
                Ok(Value::Comp(m.and_then(move |v| k.apply(v)?.into_comp())?))
            }
            TargetExpr::MAlias(e) => {
                let m = self.eval(e, env)?.into_comp()?;
                Ok(Value::Comp((self.0.malias)(m)?))
            }
        }
    }

    /// A top-level function. Its body always has a computation type, so an
    /// application returns a suspended computation; recursion then unfolds
    /// only as fast as a runner demands it.
    fn def_closure(&self, name: &str) -> Result<Value, RunError> {
        let (param, body) = self
            .0
            .defs
            .get(name)
            .cloned()
            .ok_or_else(|| RunError::UnknownDefinition(name.to_string()))?;
        let interp = self.clone();
        Ok(Value::func(move |arg| {
            interp.0.fuel.burn()?;
            let (interp, param, body) = (interp.clone(), param.clone(), body.clone());
            Ok(Value::Comp(Comp::delay(move || {
                interp
                    .eval(&body, &Env::new().bind(param.clone(), arg.clone()))?
                    .into_comp()
            })))
        }))
    }

    /// Evaluates a computation-typed term.
    pub fn eval_comp(&self, e: &TargetExpr, env: &Env) -> Result<Comp, RunError> {
        self.eval(e, env)?.into_comp()
    }
}

/// Evaluates a closed computation-typed term without top-level definitions.
pub fn eval_target(e: &TargetExpr, env: &Env, strategy: StrategyId) -> Result<Comp, RunError> {
    Interpreter::new(&[], strategy, Fuel::default()).eval_comp(e, env)
}

/// Outcome of running a program: the trace is kept even when the run fails.
#[derive(Debug, Clone)]
pub struct ProgramRun {
    pub result: Result<Value, RunError>,
    pub trace: Trace,
    /// Number of tasks, for runs on the parallel scheduler.
    pub tasks: Option<usize>,
}

/// JSON shape of a run: exactly one of `value` and `error` is present, and
/// the trace is included either way.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub strategy: StrategyId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Observed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub trace: Trace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tasks: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

impl From<&RunError> for ErrorReport {
    fn from(e: &RunError) -> Self {
        ErrorReport {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl ProgramRun {
    pub fn report(&self, strategy: StrategyId) -> RunReport {
        let (value, error) = match &self.result {
            Ok(v) => (Some(v.observe()), None),
            Err(e) => (None, Some(e.into())),
        };
        RunReport {
            strategy,
            value,
            error,
            trace: self.trace.clone(),
            tasks: self.tasks,
        }
    }
}

/// Evaluates and runs a translated program. The parallel strategy runs on
/// the virtual-time scheduler (including background work left when `main`
/// finishes); the others run sequentially.
pub fn run_target(p: &TargetProgram, strategy: StrategyId, config: &Config, fuel: Fuel) -> ProgramRun {
    let interp = Interpreter::new(&p.defs, strategy, fuel.clone());
    let main = interp.eval_comp(&p.main, &Env::new());
    if strategy.is_parallel() {
        let mut machine = ParMachine::with_fuel(config.clone(), fuel);
        let result = main
            .and_then(|m| machine.run_main(m))
            .and_then(|v| machine.drain().map(|_| v));
        ProgramRun {
            result,
            trace: machine.trace(),
            tasks: Some(machine.task_count()),
        }
    } else {
        let mut machine = SeqMachine::with_fuel(config.clone(), fuel);
        let result = main.and_then(|m| machine.run(m));
        ProgramRun {
            result,
            trace: machine.trace(),
            tasks: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("type error: {0}")]
    Type(#[from] SourceTypeError),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Parse(_) => "parse",
            PipelineError::Type(_) => "typecheck",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub fuel: u64,
    pub translation: Translation,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            fuel: Fuel::DEFAULT,
            translation: Translation::Cba,
        }
    }
}

/// Checks, translates (call-by-alias by default) and runs a program.
/// Static errors are returned as `Err`; runtime errors are part of the run.
pub fn run_program(
    p: &Program,
    strategy: StrategyId,
    config: &Config,
) -> Result<ProgramRun, PipelineError> {
    run_program_with(p, strategy, config, &RunOptions::default())
}

pub fn run_program_with(
    p: &Program,
    strategy: StrategyId,
    config: &Config,
    opts: &RunOptions,
) -> Result<ProgramRun, PipelineError> {
    let (p, _) = check_program(&SourceContext::new(), p)?;
    let target = translate_program(opts.translation, &p);
    Ok(run_target(&target, strategy, config, Fuel::new(opts.fuel)))
}

pub fn run_source(
    text: &str,
    strategy: StrategyId,
    config: &Config,
) -> Result<ProgramRun, PipelineError> {
    run_program(&parse_program(text)?, strategy, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::Event;

    const RESULT_SIZE: &str = "\
def chooseSize : int -> int -> int =
  \\new:int. \\legacy:int. if new > 0 then new else legacy
main = chooseSize (read \"new_size\") (read \"legacy_size\")
";

    fn reads(keys: &[(&str, i64)]) -> Vec<Event> {
        keys.iter().map(|(k, v)| Event::read(*k, *v)).collect()
    }

    #[test]
    fn result_size_traces() {
        let cfg = Config::new().with("new_size", 1024).with("legacy_size", 512);
        let expect = [
            (StrategyId::CbV, reads(&[("new_size", 1024), ("legacy_size", 512)])),
            (StrategyId::CbN, reads(&[("new_size", 1024), ("new_size", 1024)])),
            (StrategyId::CbNeed, reads(&[("new_size", 1024)])),
            (StrategyId::CbParNeed, reads(&[("new_size", 1024), ("legacy_size", 512)])),
        ];
        for (strategy, events) in expect {
            let run = run_source(RESULT_SIZE, strategy, &cfg).unwrap();
            assert_eq!(run.result.unwrap().as_int(), Ok(1024), "{strategy}");
            assert_eq!(run.trace.events, events, "{strategy}");
        }
    }

    #[test]
    fn cbv_crashes_on_unused_missing_key() {
        let cfg = Config::new().with("new_size", 5);
        let run = run_source(RESULT_SIZE, StrategyId::CbV, &cfg).unwrap();
        assert_eq!(run.result.unwrap_err(), RunError::MissingKey("legacy_size".into()));
        assert_eq!(run.trace.events, reads(&[("new_size", 5)]));
        for lazy in [StrategyId::CbN, StrategyId::CbNeed, StrategyId::CbParNeed] {
            let run = run_source(RESULT_SIZE, lazy, &cfg).unwrap();
            assert_eq!(run.result.unwrap().as_int(), Ok(5), "{lazy}");
        }
    }

    #[test]
    fn recursion_and_fuel() {
        let src = "def fib : int -> int = \\n:int. if n <= 1 then n else fib (n - 1) + fib (n - 2)\n\
                   main = fib 10";
        for strategy in StrategyId::ALL {
            let run = run_source(src, strategy, &Config::new()).unwrap();
            assert_eq!(run.result.unwrap().as_int(), Ok(55), "{strategy}");
            assert!(run.trace.is_empty());
        }
        let p = parse_program("def loop : int -> int = \\n:int. loop n\nmain = loop 0").unwrap();
        let opts = RunOptions {
            fuel: 10_000,
            ..RunOptions::default()
        };
        let run = run_program_with(&p, StrategyId::CbNeed, &Config::new(), &opts).unwrap();
        assert_eq!(run.result.unwrap_err(), RunError::FuelExhausted(10_000));
    }

    #[test]
    fn static_errors_carry_their_stage() {
        let err = run_source("main = (", StrategyId::CbN, &Config::new()).unwrap_err();
        assert_eq!(err.stage(), "parse");
        let err = run_source("main = 1 + true", StrategyId::CbN, &Config::new()).unwrap_err();
        assert_eq!(err.stage(), "typecheck");
    }

    #[test]
    fn env_shadowing() {
        let env = Env::new().bind("x", Value::Int(1)).bind("x", Value::Int(2));
        assert_eq!(env.lookup("x").unwrap().as_int(), Ok(2));
        assert!(env.lookup("y").is_none());
    }
}
