//! The four `malias` implementations. Each turns a computation `m` into a
//! computation whose result is the aliased computation; where the effects of
//! `m` end up (outer layer, inner layer, shared or parallel) is what
//! distinguishes the strategies.

use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use serde::Serialize;

use crate::effects::{Comp, EffectRequest, RunError, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StrategyId {
    #[serde(rename = "cbn")]
    CbN,
    #[serde(rename = "cbv")]
    CbV,
    #[serde(rename = "need")]
    CbNeed,
    #[serde(rename = "par")]
    CbParNeed,
}

pub type MAlias = fn(Comp) -> Result<Comp, RunError>;

impl StrategyId {
    pub const ALL: [StrategyId; 4] = [
        StrategyId::CbN,
        StrategyId::CbV,
        StrategyId::CbNeed,
        StrategyId::CbParNeed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::CbN => "cbn",
            StrategyId::CbV => "cbv",
            StrategyId::CbNeed => "need",
            StrategyId::CbParNeed => "par",
        }
    }

    /// Whether runs must go through the parallel scheduler.
    pub fn is_parallel(self) -> bool {
        self == StrategyId::CbParNeed
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}` (expected cbn, cbv, need or par)"))
    }
}

/// Call-by-name: no effects now, all of `m` at every use.
pub fn malias_cbn(m: Comp) -> Result<Comp, RunError> {
    Ok(Comp::unit(Value::Comp(m)))
}

/// Call-by-value: all effects now, none at use.
pub fn malias_cbv(m: Comp) -> Result<Comp, RunError> {
    m.map(|v| Ok(Value::Comp(Comp::unit(v))))
}

/// Call-by-need: allocate an empty cell now; the first use runs `m` and
/// caches its result, later uses return the cached value.
pub fn malias_need(m: Comp) -> Result<Comp, RunError> {
    Ok(Comp::Step(
        Box::new(EffectRequest::CellNew(Value::Slot(None))),
        Rc::new(move |cell| {
            let id = cell.as_cell()?;
            let m = m.clone();
            let inner = Comp::Step(
                Box::new(EffectRequest::CellRead(id)),
                Rc::new(move |slot| match slot {
                    Value::Slot(Some(v)) => Ok(Comp::unit(*v)),
                    Value::Slot(None) => m.clone().and_then(move |v| {
                        let write = EffectRequest::CellWrite(id, Value::Slot(Some(Box::new(v.clone()))));
                        Ok(Comp::Step(Box::new(write), Rc::new(move |_| Ok(Comp::unit(v.clone())))))
                    }),
                    other => Err(RunError::TypeMismatch {
                        expected: "slot",
                        found: other.kind(),
                    }),
                }),
            );
            Ok(Comp::unit(Value::Comp(inner)))
        }),
    ))
}

/// Parallel call-by-need: start `m` in the background now; uses wait for it.
pub fn malias_par(m: Comp) -> Result<Comp, RunError> {
    Ok(Comp::Step(
        Box::new(EffectRequest::Spawn(m)),
        Rc::new(|ivar| {
            let get = Comp::effect(EffectRequest::Get(ivar.as_ivar()?));
            Ok(Comp::unit(Value::Comp(get)))
        }),
    ))
}

pub fn get_strategy(id: StrategyId) -> MAlias {
    match id {
        StrategyId::CbN => malias_cbn,
        StrategyId::CbV => malias_cbv,
        StrategyId::CbNeed => malias_need,
        StrategyId::CbParNeed => malias_par,
    }
}
