//! Sequential runner and layer-by-layer flattening of nested computations.

use super::comp::{CellId, Comp, EffectRequest, Fuel, RunError, Value};
use super::trace::{Config, Event, Trace};

/// Run-local mutable cells. Tracks how often each cell was written so that
/// call-by-need memoization can be audited.
#[derive(Debug, Default, Clone)]
pub struct CellStore {
    cells: Vec<(Value, u32)>,
}

impl CellStore {
    pub fn alloc(&mut self, v: Value) -> CellId {
        self.cells.push((v, 0));
        CellId(self.cells.len() - 1)
    }

    pub fn read(&self, id: CellId) -> Result<Value, RunError> {
        self.cells
            .get(id.0)
            .map(|(v, _)| v.clone())
            .ok_or(RunError::UnallocatedCell(id))
    }

    pub fn write(&mut self, id: CellId, v: Value) -> Result<(), RunError> {
        let cell = self.cells.get_mut(id.0).ok_or(RunError::UnallocatedCell(id))?;
        cell.0 = v;
        cell.1 += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Number of writes per allocated cell, in allocation order.
    pub fn write_counts(&self) -> impl Iterator<Item = u32> + '_ {
        self.cells.iter().map(|(_, n)| *n)
    }

    /// Handles the cell requests; returns `None` for anything else.
    pub(crate) fn perform(&mut self, req: &EffectRequest) -> Option<Result<Value, RunError>> {
        Some(match req {
            EffectRequest::CellNew(v) => Ok(Value::Cell(self.alloc(v.clone()))),
            EffectRequest::CellRead(id) => self.read(*id),
            EffectRequest::CellWrite(id, v) => self.write(*id, v.clone()).map(|_| Value::Unit),
            _ => return None,
        })
    }
}

pub(crate) fn read_config(config: &Config, key: &str) -> Result<i64, RunError> {
    config
        .get(key)
        .ok_or_else(|| RunError::MissingKey(key.to_string()))
}

/// A runner whose state (cells, scheduler, trace) persists across calls, so
/// that the layers of a nested computation can be run one after another.
pub trait Machine {
    /// Runs `m` to a value, appending observable events to the trace.
    fn run(&mut self, m: Comp) -> Result<Value, RunError>;

    /// Events recorded so far, in the order they were performed.
    fn events(&self) -> &[Event];

    /// Completes any outstanding background work. Sequential machines have
    /// none.
    fn finish(&mut self) -> Result<(), RunError> {
        Ok(())
    }

    /// Number of `run` calls so far.
    fn run_count(&self) -> usize {
        0
    }

    /// The `run` call whose work caused event `i`, when that can differ from
    /// the call during which it was recorded (background tasks).
    fn origin(&self, _event: usize) -> Option<usize> {
        None
    }
}

/// Depth-first executor for reads, ticks and cells.
pub struct SeqMachine {
    config: Config,
    fuel: Fuel,
    cells: CellStore,
    events: Vec<Event>,
}

impl SeqMachine {
    pub fn new(config: Config) -> Self {
        Self::with_fuel(config, Fuel::default())
    }

    pub fn with_fuel(config: Config, fuel: Fuel) -> Self {
        SeqMachine {
            config,
            fuel,
            cells: CellStore::default(),
            events: Vec::new(),
        }
    }

    pub fn fuel(&self) -> &Fuel {
        &self.fuel
    }

    pub fn cells(&self) -> &CellStore {
        &self.cells
    }

    pub fn trace(&self) -> Trace {
        Trace::sequential(self.events.clone())
    }

    fn perform(&mut self, req: &EffectRequest) -> Result<Value, RunError> {
        if let Some(r) = self.cells.perform(req) {
            return r;
        }
        match req {
            EffectRequest::Read(key) => {
                let value = read_config(&self.config, key)?;
                self.events.push(Event::read(key.clone(), value));
                Ok(Value::Int(value))
            }
            EffectRequest::Tick(label) => {
                self.events.push(Event::tick(label.clone()));
                Ok(Value::Int(0))
            }
            EffectRequest::Spawn(_) => Err(RunError::UnsupportedEffect("spawn")),
            EffectRequest::Get(_) => Err(RunError::UnsupportedEffect("get")),
            EffectRequest::CellNew(_) | EffectRequest::CellRead(_) | EffectRequest::CellWrite(..) => {
                unreachable!("handled by the cell store")
            }
        }
    }
}

impl Machine for SeqMachine {
    fn run(&mut self, mut m: Comp) -> Result<Value, RunError> {
        loop {
            self.fuel.burn()?;
            m = match m {
                Comp::Pure(v) => return Ok(*v),
                Comp::Delay(t) => t()?,
                Comp::Step(req, k) => {
                    let v = self.perform(&req)?;
                    k(v)?
                }
            };
        }
    }

    fn events(&self) -> &[Event] {
        &self.events
    }
}

/// Runs `m` on a fresh sequential machine.
pub fn run_seq(m: Comp, config: &Config) -> Result<(Value, Trace), RunError> {
    let mut machine = SeqMachine::new(config.clone());
    let v = machine.run(m)?;
    Ok((v, machine.trace()))
}

/// Observations of a computation nested `depth` layers deep.
#[derive(Debug, Clone)]
pub struct Layers {
    /// Events of each layer, outermost first. An event belongs to the layer
    /// whose run caused it: for background tasks that is the layer that
    /// spawned them, however late the scheduler got to them.
    pub layers: Vec<Vec<Event>>,
    pub value: Value,
}

/// Runs a computation of type `M (M ... a)` layer by layer on one machine,
/// so all layers share cells and scheduler state. `depth` counts the `M`s.
pub fn flatten_layers<R: Machine>(machine: &mut R, m: Comp, depth: usize) -> Result<Layers, RunError> {
    assert!(depth >= 1, "a computation has at least one layer");
    let first_event = machine.events().len();
    let first_run = machine.run_count();
    let mut windows = Vec::with_capacity(depth);
    let mut current = m;
    let mut value = Value::Unit;
    for layer in 0..depth {
        let start = machine.events().len();
        value = machine.run(current.clone())?;
        windows.push(start);
        if layer + 1 < depth {
            current = value.clone().into_comp()?;
        }
    }
    machine.finish()?;
    let mut layers = vec![Vec::new(); depth];
    for (i, event) in machine.events().iter().enumerate().skip(first_event) {
        let layer = match machine.origin(i) {
            Some(run) => run.saturating_sub(first_run).min(depth - 1),
            None => windows.iter().rposition(|&start| start <= i).unwrap_or(0),
        };
        layers[layer].push(event.clone());
    }
    Ok(Layers { layers, value })
}

/// Two-layer flattening on a fresh sequential machine: `(outer, inner, value)`.
pub fn flatten_nested(mm: Comp, config: &Config) -> Result<(Vec<Event>, Vec<Event>, Value), RunError> {
    let mut machine = SeqMachine::new(config.clone());
    let Layers { mut layers, value } = flatten_layers(&mut machine, mm, 2)?;
    let inner = layers.pop().unwrap_or_default();
    let outer = layers.pop().unwrap_or_default();
    Ok((outer, inner, value))
}
