//! Computation runtime: effect trees and the runners that execute them.

mod comp;
mod par;
mod seq;
mod trace;

pub use comp::{CellId, Comp, Cont, EffectRequest, Fuel, Func, IVarId, Observed, RunError, Thunk, Value};
pub use par::{run_par, ParMachine, ParReport};
pub use seq::{flatten_layers, flatten_nested, run_seq, CellStore, Layers, Machine, SeqMachine};
pub use trace::{is_sub_multiset, multiset, sorted, Config, ConfigError, Event, Trace};
