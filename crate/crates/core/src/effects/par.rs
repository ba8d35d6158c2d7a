//! Virtual-time parallel runner for `spawn`/`get`.
//!
//! Every spawned task starts immediately and there are as many workers as
//! tasks. Reads and ticks take one tick of virtual time; everything else is
//! free. Among tasks that can run at the same instant, the one spawned first
//! goes first, which makes runs fully deterministic.

use std::collections::{BTreeMap, BTreeSet};

use super::comp::{Comp, Cont, EffectRequest, Fuel, IVarId, RunError, Value};
use super::seq::{read_config, CellStore, Machine};
use super::trace::{Config, Event, Trace};

enum Runnable {
    Comp(Comp),
    Resume(Cont, Value),
    Fail(RunError),
}

enum TaskState {
    Ready(Runnable),
    Sleeping(Cont, Value),
    Blocked(Cont),
    Done,
}

/// Each task's result lives in the IVar with the same index.
pub struct ParMachine {
    config: Config,
    fuel: Fuel,
    cells: CellStore,
    tasks: Vec<TaskState>,
    ivars: Vec<Option<Result<Value, RunError>>>,
    ready: BTreeSet<usize>,
    sleeping: BTreeSet<(u64, usize)>,
    waiters: BTreeMap<usize, Vec<usize>>,
    now: u64,
    work: u64,
    /// `run_main` calls so far; each task remembers the call it descends from.
    runs: usize,
    task_origin: Vec<usize>,
    event_origin: Vec<usize>,
    events: Vec<Event>,
    /// `(tick, task, sequence)` key of each event in `events`.
    stamps: Vec<(u64, usize, usize)>,
}

/// Result of a complete parallel run.
#[derive(Debug, Clone)]
pub struct ParReport {
    pub value: Value,
    pub trace: Trace,
    pub tasks: usize,
}

impl ParReport {
    /// `work / span`; `None` for runs that took no time.
    pub fn speedup(&self) -> Option<f64> {
        (self.trace.span > 0).then(|| self.trace.work as f64 / self.trace.span as f64)
    }
}

impl ParMachine {
    pub fn new(config: Config) -> Self {
        Self::with_fuel(config, Fuel::default())
    }

    pub fn with_fuel(config: Config, fuel: Fuel) -> Self {
        ParMachine {
            config,
            fuel,
            cells: CellStore::default(),
            tasks: Vec::new(),
            ivars: Vec::new(),
            ready: BTreeSet::new(),
            sleeping: BTreeSet::new(),
            waiters: BTreeMap::new(),
            now: 0,
            work: 0,
            runs: 0,
            task_origin: Vec::new(),
            event_origin: Vec::new(),
            events: Vec::new(),
            stamps: Vec::new(),
        }
    }

    pub fn fuel(&self) -> &Fuel {
        &self.fuel
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    /// Events ordered by `(tick, task, sequence)`, with the current span and
    /// work. After [`Machine::finish`] the span is the makespan of the run.
    pub fn trace(&self) -> Trace {
        let mut order: Vec<usize> = (0..self.events.len()).collect();
        order.sort_by_key(|&i| self.stamps[i]);
        Trace {
            events: order.into_iter().map(|i| self.events[i].clone()).collect(),
            span: self.now,
            work: self.work,
        }
    }

    fn spawn(&mut self, m: Comp, origin: usize) -> usize {
        let id = self.tasks.len();
        self.task_origin.push(origin);
        self.tasks.push(TaskState::Ready(Runnable::Comp(m)));
        self.ivars.push(None);
        self.ready.insert(id);
        id
    }

    fn complete(&mut self, id: usize, result: Result<Value, RunError>) {
        self.tasks[id] = TaskState::Done;
        self.ready.remove(&id);
        for w in self.waiters.remove(&id).unwrap_or_default() {
            let TaskState::Blocked(k) = std::mem::replace(&mut self.tasks[w], TaskState::Done) else {
                unreachable!("waiters are blocked");
            };
            self.tasks[w] = TaskState::Ready(match &result {
                Ok(v) => Runnable::Resume(k, v.clone()),
                Err(e) => Runnable::Fail(e.clone()),
            });
            self.ready.insert(w);
        }
        self.ivars[id] = Some(result);
    }

    /// A task-local error is stored in the task's IVar and resurfaces only
    /// in tasks that `get` it. Fuel and deadlock errors end the run.
    fn fail(&mut self, id: usize, e: RunError) -> Result<(), RunError> {
        if e.is_global() {
            return Err(e);
        }
        self.complete(id, Err(e));
        Ok(())
    }

    fn sleep(&mut self, id: usize, k: Cont, v: Value, event: Event) {
        let seq = self.events.len();
        self.events.push(event);
        self.stamps.push((self.now, id, seq));
        self.event_origin.push(self.task_origin[id]);
        self.work += 1;
        self.tasks[id] = TaskState::Sleeping(k, v);
        self.ready.remove(&id);
        self.sleeping.insert((self.now + 1, id));
    }

    fn step(&mut self, id: usize) -> Result<(), RunError> {
        let TaskState::Ready(r) = std::mem::replace(&mut self.tasks[id], TaskState::Done) else {
            unreachable!("only ready tasks are stepped");
        };
        self.fuel.burn()?;
        let comp = match r {
            Runnable::Comp(c) => c,
            Runnable::Resume(k, v) => match k(v) {
                Ok(c) => c,
                Err(e) => return self.fail(id, e),
            },
            Runnable::Fail(e) => return self.fail(id, e),
        };
        let (req, k) = match comp {
            Comp::Pure(v) => {
                self.complete(id, Ok(*v));
                return Ok(());
            }
            Comp::Delay(t) => {
                return match t() {
                    Ok(c) => {
                        self.tasks[id] = TaskState::Ready(Runnable::Comp(c));
                        Ok(())
                    }
                    Err(e) => self.fail(id, e),
                };
            }
            Comp::Step(req, k) => (*req, k),
        };
        if let Some(r) = self.cells.perform(&req) {
            return match r {
                Ok(v) => {
                    self.tasks[id] = TaskState::Ready(Runnable::Resume(k, v));
                    Ok(())
                }
                Err(e) => self.fail(id, e),
            };
        }
        match req {
            EffectRequest::Read(key) => match read_config(&self.config, &key) {
                Ok(value) => self.sleep(id, k, Value::Int(value), Event::read(key, value)),
                Err(e) => return self.fail(id, e),
            },
            EffectRequest::Tick(label) => self.sleep(id, k, Value::Int(0), Event::tick(label)),
            EffectRequest::Spawn(m) => {
                let child = self.spawn(m, self.task_origin[id]);
                self.tasks[id] = TaskState::Ready(Runnable::Resume(k, Value::IVar(IVarId(child))));
            }
            EffectRequest::Get(IVarId(iv)) => match self.ivars.get(iv) {
                None => return self.fail(id, RunError::UnsupportedEffect("get of unknown ivar")),
                Some(Some(Ok(v))) => {
                    let v = v.clone();
                    self.tasks[id] = TaskState::Ready(Runnable::Resume(k, v));
                }
                Some(Some(Err(e))) => {
                    let e = e.clone();
                    return self.fail(id, e);
                }
                Some(None) => {
                    self.tasks[id] = TaskState::Blocked(k);
                    self.ready.remove(&id);
                    self.waiters.entry(iv).or_default().push(id);
                }
            },
            EffectRequest::CellNew(_) | EffectRequest::CellRead(_) | EffectRequest::CellWrite(..) => {
                unreachable!("handled by the cell store")
            }
        }
        Ok(())
    }

    /// Advances the scheduler by one action. Returns `false` when nothing can
    /// run and nothing is asleep.
    fn tick(&mut self) -> Result<bool, RunError> {
        if let Some(&id) = self.ready.first() {
            self.step(id)?;
            return Ok(true);
        }
        let Some(&(until, _)) = self.sleeping.first() else {
            return Ok(false);
        };
        self.now = until;
        while let Some(&(t, id)) = self.sleeping.first() {
            if t != until {
                break;
            }
            self.sleeping.pop_first();
            let TaskState::Sleeping(k, v) = std::mem::replace(&mut self.tasks[id], TaskState::Done) else {
                unreachable!("sleeping set tracks sleeping tasks");
            };
            self.tasks[id] = TaskState::Ready(Runnable::Resume(k, v));
            self.ready.insert(id);
        }
        Ok(true)
    }

    /// Runs `m` as a new task until it finishes. Other tasks keep running
    /// alongside it and may still be unfinished afterwards.
    pub fn run_main(&mut self, m: Comp) -> Result<Value, RunError> {
        let id = self.spawn(m, self.runs);
        self.runs += 1;
        while self.ivars[id].is_none() {
            if !self.tick()? {
                return Err(RunError::Deadlock);
            }
        }
        self.ivars[id].clone().expect("finished")
    }

    /// Runs every remaining task to completion.
    pub fn drain(&mut self) -> Result<(), RunError> {
        while self.tick()? {}
        if self.tasks.iter().any(|t| matches!(t, TaskState::Blocked(_))) {
            return Err(RunError::Deadlock);
        }
        Ok(())
    }
}

impl Machine for ParMachine {
    fn run(&mut self, m: Comp) -> Result<Value, RunError> {
        self.run_main(m)
    }

    fn events(&self) -> &[Event] {
        &self.events
    }

    fn finish(&mut self) -> Result<(), RunError> {
        self.drain()
    }

    fn run_count(&self) -> usize {
        self.runs
    }

    fn origin(&self, event: usize) -> Option<usize> {
        self.event_origin.get(event).copied()
    }
}

/// Runs `m` and all tasks it spawns on a fresh machine.
pub fn run_par(m: Comp, config: &Config) -> Result<ParReport, RunError> {
    let mut machine = ParMachine::new(config.clone());
    let value = machine.run_main(m)?;
    machine.drain()?;
    Ok(ParReport {
        value,
        trace: machine.trace(),
        tasks: machine.task_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::seq::run_seq;

    fn spawn(m: Comp) -> Comp {
        Comp::effect(EffectRequest::Spawn(m))
    }

    fn get(v: Value) -> Result<Comp, RunError> {
        Ok(Comp::effect(EffectRequest::Get(v.as_ivar()?)))
    }

    #[test]
    fn spawned_read_then_get() {
        let m = spawn(Comp::read("k")).and_then(get).unwrap();
        let report = run_par(m, &Config::new().with("k", 1)).unwrap();
        assert_eq!(report.value.as_int(), Ok(1));
        assert_eq!((report.trace.span, report.trace.work), (1, 1));
    }

    #[test]
    fn two_parallel_reads() {
        let m = spawn(Comp::read("a"))
            .and_then(|a| {
                spawn(Comp::read("b")).and_then(move |b| {
                    let b = b.clone();
                    get(a.clone())?.and_then(move |x| {
                        get(b.clone())?.map(move |y| Ok(Value::Int(x.as_int()? + y.as_int()?)))
                    })
                })
            })
            .unwrap();
        let cfg = Config::new().with("a", 2).with("b", 3);
        let report = run_par(m, &cfg).unwrap();
        assert_eq!(report.value.as_int(), Ok(5));
        assert_eq!((report.trace.span, report.trace.work), (1, 2));
        assert_eq!(report.trace.events, vec![Event::read("a", 2), Event::read("b", 3)]);
        assert_eq!(report.speedup(), Some(2.0));
    }

    #[test]
    fn sequential_programs_match_run_seq() {
        let m = Comp::read("a")
            .and_then(|x| Comp::tick("t").map(move |_| Ok(x.clone())))
            .unwrap();
        let cfg = Config::new().with("a", 4);
        let report = run_par(m.clone(), &cfg).unwrap();
        let (v, t) = run_seq(m, &cfg).unwrap();
        assert_eq!(report.value.as_int(), v.as_int());
        assert_eq!(report.trace, t);
    }

    #[test]
    fn errors_of_unused_tasks_are_ignored() {
        let m = spawn(Comp::read("missing")).map(|_| Ok(Value::Int(0))).unwrap();
        let report = run_par(m, &Config::new()).unwrap();
        assert_eq!(report.value.as_int(), Ok(0));
    }

    #[test]
    fn errors_propagate_through_get() {
        let m = spawn(Comp::read("missing")).and_then(get).unwrap();
        assert_eq!(
            run_par(m, &Config::new()).unwrap_err(),
            RunError::MissingKey("missing".into())
        );
    }

    #[test]
    fn waiting_on_yourself_deadlocks() {
        // Task 0 waits for its own IVar.
        let m = Comp::effect(EffectRequest::Get(IVarId(0)));
        assert_eq!(run_par(m, &Config::new()).unwrap_err(), RunError::Deadlock);
    }
}
