//! Executable law suites. Every check compares observations (final value
//! plus the events of each layer), never computations themselves.

use std::fmt;

use rand::prelude::IndexedRandom;
use rand::Rng;
use serde::Serialize;

use super::gen::{gen_comp_spec, gen_config, gen_open_term, gen_program_case, gen_term_of_type, CompSpec, GenSpec, PoolFn};
use crate::effects::{
    flatten_layers, is_sub_multiset, sorted, Comp, Config, Event, Fuel, Machine, Observed,
    ParMachine, RunError, SeqMachine, Value,
};
use crate::evaluator::{run_target, Env, Interpreter, ProgramRun};
use crate::strategies::{get_strategy, MAlias, StrategyId};
use crate::syntax::{pretty_source, SourceExpr, SourceType, TargetExpr, TargetProgram};
use crate::translate::{translate, translate_cba, Translation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub counterexample: String,
}

/// Outcome of one law over a batch of generated cases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub law: String,
    pub strategy: String,
    pub cases: usize,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

impl LawReport {
    fn new(law: impl Into<String>, strategy: impl Into<String>) -> Self {
        LawReport {
            law: law.into(),
            strategy: strategy.into(),
            cases: 0,
            failures: Vec::new(),
            passed: true,
        }
    }

    fn record(&mut self, seed: u64, failure: Option<String>) {
        self.cases += 1;
        if let Some(counterexample) = failure {
            self.failures.push(Failure {
                seed,
                counterexample,
            });
            self.passed = false;
        }
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {:<18} {:<5} {} cases, {} failures",
            self.law,
            self.strategy,
            self.cases,
            self.failures.len()
        )?;
        for failure in self.failures.iter().take(3) {
            write!(f, "\n    seed {}: {}", failure.seed, failure.counterexample)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Naturality,
    Associativity,
    Computationality,
    Identity,
}

impl Law {
    pub const ALL: [Law; 4] = [
        Law::Naturality,
        Law::Associativity,
        Law::Computationality,
        Law::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::Naturality => "naturality",
            Law::Associativity => "associativity",
            Law::Computationality => "computationality",
            Law::Identity => "identity",
        }
    }
}

/// What a run looked like from the outside.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Observation {
    layers: Vec<Vec<Event>>,
    value: Observed,
}

impl Observation {
    /// Parallel runs are compared per layer as multisets, since the
    /// scheduler may interleave events differently.
    fn normalized(&self, strategy: StrategyId) -> Observation {
        if !strategy.is_parallel() {
            return self.clone();
        }
        Observation {
            layers: self.layers.iter().map(|l| sorted(l)).collect(),
            value: self.value.clone(),
        }
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "value {} layers [", self.value)?;
        for (i, layer) in self.layers.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            let events: Vec<String> = layer.iter().map(Event::to_string).collect();
            f.write_str(&events.join(", "))?;
        }
        f.write_str("]")
    }
}

type Outcome = Result<Observation, RunError>;

fn render(o: &Outcome) -> String {
    match o {
        Ok(obs) => obs.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

fn agree(strategy: StrategyId, lhs: &Outcome, rhs: &Outcome) -> bool {
    match (lhs, rhs) {
        (Ok(a), Ok(b)) => a.normalized(strategy) == b.normalized(strategy),
        (Err(a), Err(b)) => a == b,
        _ => false,
    }
}

fn render_config(config: &Config) -> String {
    let entries: Vec<String> = config
        .keys()
        .map(|k| format!("{k} = {}", config.get(k).unwrap_or_default()))
        .collect();
    format!("{{{}}}", entries.join(", "))
}

/// Runs a computation nested `depth` deep on a fresh machine suited to
/// `strategy`, with all layers sharing that machine.
fn observe_nested(
    strategy: StrategyId,
    config: &Config,
    build: impl FnOnce() -> Result<Comp, RunError>,
    depth: usize,
) -> Outcome {
    let m = build()?;
    let layers = if strategy.is_parallel() {
        flatten_layers(&mut ParMachine::new(config.clone()), m, depth)?
    } else {
        flatten_layers(&mut SeqMachine::new(config.clone()), m, depth)?
    };
    Ok(Observation {
        layers: layers.layers,
        value: layers.value.observe(),
    })
}

fn map_inner(mm: Comp, f: PoolFn) -> Result<Comp, RunError> {
    mm.map(move |inner| Ok(Value::Comp(inner.into_comp()?.map(move |v| f.apply_value(v))?)))
}

type Side = Box<dyn FnOnce() -> Result<Comp, RunError>>;

fn law_sides(
    law: Law,
    malias: MAlias,
    m: &Comp,
    f: PoolFn,
    v: i64,
) -> (Side, Side) {
    let (m1, m2) = (m.clone(), m.clone());
    match law {
        // map (map f) . malias  =  malias . map f
        Law::Naturality => (
            Box::new(move || map_inner(malias(m1)?, f)),
            Box::new(move || malias(m2.map(move |x| f.apply_value(x))?)),
        ),
        // map malias . malias  =  malias . malias
        Law::Associativity => (
            Box::new(move || malias(m1)?.map(move |inner| Ok(Value::Comp(malias(inner.into_comp()?)?)))),
            Box::new(move || malias(malias(m2)?)),
        ),
        // malias . unit  =  unit . unit
        Law::Computationality => (
            Box::new(move || malias(Comp::unit(Value::Int(v)))),
            Box::new(move || Ok(Comp::unit(Value::Comp(Comp::unit(Value::Int(v)))))),
        ),
        // join . malias  =  id
        Law::Identity => (
            Box::new(move || malias(m1)?.join()),
            Box::new(move || Ok(m2)),
        ),
    }
}

fn law_depth(law: Law) -> usize {
    match law {
        Law::Naturality | Law::Computationality => 2,
        Law::Associativity => 3,
        Law::Identity => 1,
    }
}

/// Checks the four `malias` laws for `strategy` on `cases` generated
/// computations. Returns one report per law.
pub fn check_malias_laws(strategy: StrategyId, spec: &GenSpec, cases: usize) -> Vec<LawReport> {
    let malias = get_strategy(strategy);
    let mut reports: Vec<LawReport> = Law::ALL
        .iter()
        .map(|l| LawReport::new(l.name(), strategy.name()))
        .collect();
    for i in 0..cases {
        let case = spec.case(i);
        let mut rng = case.rng();
        let config = gen_config(&case, &mut rng);
        let m_spec: CompSpec = gen_comp_spec(&case, &mut rng);
        let f = case.function_pool.choose(&mut rng).copied().unwrap_or(PoolFn::Succ);
        let v = rng.random_range(-3..=9);
        let m = m_spec.to_comp();
        for (law, report) in Law::ALL.into_iter().zip(reports.iter_mut()) {
            let (lhs, rhs) = law_sides(law, malias, &m, f, v);
            let depth = law_depth(law);
            let lhs = observe_nested(strategy, &config, lhs, depth);
            let rhs = observe_nested(strategy, &config, rhs, depth);
            let failure = (!agree(strategy, &lhs, &rhs)).then(|| {
                format!(
                    "m = {m_spec}; f = {f}; v = {v}; config = {}; lhs: {}; rhs: {}",
                    render_config(&config),
                    render(&lhs),
                    render(&rhs)
                )
            });
            report.record(case.seed, failure);
        }
    }
    reports
}

/// Runs a closed target term; the parallel strategy drains background work.
fn run_closed(target: TargetExpr, strategy: StrategyId, config: &Config) -> ProgramRun {
    let program = TargetProgram {
        defs: Vec::new(),
        main: target,
    };
    run_target(&program, strategy, config, Fuel::default())
}

fn observe_run(run: ProgramRun) -> Outcome {
    let value = run.result?;
    Ok(Observation {
        layers: vec![run.trace.events],
        value: value.observe(),
    })
}

/// The two classical translations the call-by-alias one is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Cbn,
    Cbv,
}

impl Baseline {
    pub const ALL: [Baseline; 2] = [Baseline::Cbn, Baseline::Cbv];

    pub fn translation(self) -> Translation {
        match self {
            Baseline::Cbn => Translation::Cbn,
            Baseline::Cbv => Translation::Cbv,
        }
    }

    pub fn strategy(self) -> StrategyId {
        match self {
            Baseline::Cbn => StrategyId::CbN,
            Baseline::Cbv => StrategyId::CbV,
        }
    }
}

/// Compares the call-by-alias translation run with the baseline's `malias`
/// against the baseline translation itself.
pub fn check_equivalence(baseline: Baseline, spec: &GenSpec, cases: usize) -> LawReport {
    let strategy = baseline.strategy();
    let mut report = LawReport::new(format!("equivalence-{}", baseline.translation()), strategy.name());
    for i in 0..cases {
        let case = spec.case(i);
        let (e, _, config) = gen_program_case(&case);
        let failure = equivalence_failure(baseline, &e, &config);
        report.record(case.seed, failure);
    }
    report
}

/// `None` when both pipelines agree on `e`, otherwise a description.
pub fn equivalence_failure(baseline: Baseline, e: &SourceExpr, config: &Config) -> Option<String> {
    let strategy = baseline.strategy();
    let cba = observe_run(run_closed(translate_cba(e), strategy, config));
    let direct = observe_run(run_closed(translate(baseline.translation(), e), strategy, config));
    (!agree(strategy, &cba, &direct)).then(|| {
        format!(
            "term = {}; config = {}; cba: {}; {}: {}",
            pretty_source(e),
            render_config(config),
            render(&cba),
            baseline.translation(),
            render(&direct)
        )
    })
}

fn transform_failure(strategy: StrategyId, lhs: &SourceExpr, rhs: &SourceExpr, config: &Config) -> Option<String> {
    let l = observe_run(run_closed(translate_cba(lhs), strategy, config));
    let r = observe_run(run_closed(translate_cba(rhs), strategy, config));
    (!agree(strategy, &l, &r)).then(|| {
        format!(
            "lhs = {}; rhs = {}; config = {}; lhs: {}; rhs: {}",
            pretty_source(lhs),
            pretty_source(rhs),
            render_config(config),
            render(&l),
            render(&r)
        )
    })
}

/// Checks two source rewrites under the call-by-alias translation:
/// inlining a let-bound lambda, and dropping `let x = e in x`.
pub fn check_source_transforms(strategy: StrategyId, spec: &GenSpec, cases: usize) -> Vec<LawReport> {
    let mut inline = LawReport::new("let-inline", strategy.name());
    let mut identity = LawReport::new("let-identity", strategy.name());
    let fn_types = [
        SourceType::arrow(SourceType::INT, SourceType::INT),
        SourceType::arrow(SourceType::INT, SourceType::BOOL),
        SourceType::arrow(SourceType::arrow(SourceType::INT, SourceType::INT), SourceType::INT),
    ];
    for i in 0..cases {
        let case = spec.case(i);
        let mut rng = case.rng();
        let config = gen_config(&case, &mut rng);
        let result = if rng.random_ratio(3, 4) {
            SourceType::INT
        } else {
            SourceType::BOOL
        };

        // let f = \x. e1 in e2  ~  e2[f := \x. e1]
        let fn_ty = fn_types.choose(&mut rng).cloned().expect("non-empty");
        let SourceType::Arrow(a, b) = &fn_ty else {
            unreachable!("function types only")
        };
        let body = gen_open_term(&case, &mut rng, &[("x".into(), (**a).clone())], b);
        let lam = SourceExpr::lam_typed("x", (**a).clone(), body);
        let e2 = gen_open_term(&case, &mut rng, &[("f".into(), fn_ty.clone())], &result);
        let lhs = SourceExpr::let_in("f", lam.clone(), e2.clone());
        let rhs = e2.substitute("f", &lam);
        inline.record(case.seed, transform_failure(strategy, &lhs, &rhs, &config));

        // let x = e in x  ~  e
        let e = gen_term_of_type(&case, &mut rng, &result);
        let lhs = SourceExpr::let_in("x", e.clone(), SourceExpr::var("x"));
        identity.record(case.seed, transform_failure(strategy, &lhs, &e, &config));
    }
    vec![inline, identity]
}

/// Call-by-need evaluates each aliased computation at most once: no cell is
/// written twice, the value matches call-by-name, and every event occurs at
/// most as often as under call-by-name.
pub fn check_need_at_most_once(spec: &GenSpec, cases: usize) -> LawReport {
    let mut report = LawReport::new("at-most-once", StrategyId::CbNeed.name());
    for i in 0..cases {
        let case = spec.case(i);
        let (e, _, config) = gen_program_case(&case);
        report.record(case.seed, need_failure(&e, &config));
    }
    report
}

pub fn need_failure(e: &SourceExpr, config: &Config) -> Option<String> {
    let target = translate_cba(e);
    let fuel = Fuel::default();
    let interp = Interpreter::new(&[], StrategyId::CbNeed, fuel.clone());
    let mut machine = SeqMachine::with_fuel(config.clone(), fuel);
    let need = interp
        .eval_comp(&target, &Env::new())
        .and_then(|m| machine.run(m));
    let cbn = run_closed(target, StrategyId::CbN, config);
    let describe = |problem: &str| {
        Some(format!(
            "term = {}; config = {}; {problem}",
            pretty_source(e),
            render_config(config)
        ))
    };
    let writes: Vec<u32> = machine.cells().write_counts().collect();
    if let Some(n) = writes.iter().find(|&&n| n > 1) {
        return describe(&format!("a need cell was written {n} times"));
    }
    match (&need, &cbn.result) {
        (Ok(a), Ok(b)) if a.observe() == b.observe() => {}
        (Err(a), Err(b)) if a == b => {}
        (a, b) => return describe(&format!("need gave {a:?}, cbn gave {b:?}")),
    }
    if !is_sub_multiset(machine.events(), &cbn.trace.events) {
        return describe(&format!(
            "need trace {:?} is not contained in cbn trace {:?}",
            machine.events(),
            cbn.trace.events
        ));
    }
    None
}

/// The parallel strategy computes the call-by-need value, never takes longer
/// than its total work, and performs every effect call-by-need performs.
pub fn check_par_agreement(spec: &GenSpec, cases: usize) -> LawReport {
    let mut report = LawReport::new("par-agrees-need", StrategyId::CbParNeed.name());
    for i in 0..cases {
        let case = spec.case(i);
        let (e, _, config) = gen_program_case(&case);
        report.record(case.seed, par_failure(&e, &config));
    }
    report
}

fn par_failure(e: &SourceExpr, config: &Config) -> Option<String> {
    let target = translate_cba(e);
    let need = run_closed(target.clone(), StrategyId::CbNeed, config);
    let par = run_closed(target, StrategyId::CbParNeed, config);
    let problem = match (&need.result, &par.result) {
        (Ok(a), Ok(b)) if a.observe() != b.observe() => {
            Some(format!("need gave {}, par gave {}", a.observe(), b.observe()))
        }
        (Ok(_), Ok(_)) if par.trace.span > par.trace.work => Some(format!(
            "span {} exceeds work {}",
            par.trace.span, par.trace.work
        )),
        (Ok(_), Ok(_)) if !is_sub_multiset(&need.trace.events, &par.trace.events) => {
            Some("need performed an effect that par did not".to_string())
        }
        (Ok(_), Ok(_)) => None,
        (Err(a), Err(b)) if a == b => None,
        (a, b) => Some(format!("need gave {a:?}, par gave {b:?}")),
    };
    problem.map(|p| format!("term = {}; config = {}; {p}", pretty_source(e), render_config(config)))
}

/// Groups of checks selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Malias,
    Equivalence,
    Transforms,
    Need,
    Par,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["malias", "equivalence", "transforms", "need", "par", "all"];
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "malias" => Suite::Malias,
            "equivalence" => Suite::Equivalence,
            "transforms" => Suite::Transforms,
            "need" => Suite::Need,
            "par" => Suite::Par,
            "all" => Suite::All,
            other => return Err(format!("unknown suite `{other}`")),
        })
    }
}

/// Runs a suite for `strategy`. The equivalence suite always covers both
/// baselines; `need` and `par` are only meaningful for their own strategy
/// and are included in `all` for it.
pub fn run_suite(suite: Suite, strategy: StrategyId, spec: &GenSpec, cases: usize) -> Vec<LawReport> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Malias {
        out.extend(check_malias_laws(strategy, spec, cases));
    }
    if all || suite == Suite::Equivalence {
        for baseline in Baseline::ALL {
            out.push(check_equivalence(baseline, spec, cases));
        }
    }
    if all || suite == Suite::Transforms {
        out.extend(check_source_transforms(strategy, spec, cases));
    }
    if suite == Suite::Need || (all && strategy == StrategyId::CbNeed) {
        out.push(check_need_at_most_once(spec, cases));
    }
    if suite == Suite::Par || (all && strategy == StrategyId::CbParNeed) {
        out.push(check_par_agreement(spec, cases));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_expr;

    #[test]
    fn cbv_single_term() {
        let e = parse_expr("let x = read \"k\" in x + x").unwrap();
        let config = Config::new().with("k", 4);
        assert_eq!(equivalence_failure(Baseline::Cbv, &e, &config), None);
        let run = run_closed(translate_cba(&e), StrategyId::CbV, &config);
        assert_eq!(run.result.unwrap().as_int(), Ok(8));
        assert_eq!(run.trace.events, vec![Event::read("k", 4)]);
    }

    #[test]
    fn need_identity_on_a_read() {
        let config = Config::new().with("k", 3);
        let (lhs, rhs) = law_sides(Law::Identity, get_strategy(StrategyId::CbNeed), &Comp::read("k"), PoolFn::Succ, 0);
        let l = observe_nested(StrategyId::CbNeed, &config, lhs, 1).unwrap();
        let r = observe_nested(StrategyId::CbNeed, &config, rhs, 1).unwrap();
        assert_eq!(l, r);
        assert_eq!(l.layers, vec![vec![Event::read("k", 3)]]);
        assert_eq!(l.value, Observed::Int(3));
    }

    #[test]
    fn laws_hold_for_cbn_and_cbv() {
        let spec = GenSpec::new(5);
        for strategy in [StrategyId::CbN, StrategyId::CbV] {
            for report in check_malias_laws(strategy, &spec, 200) {
                assert!(report.passed, "{report}");
                assert_eq!(report.cases, 200);
            }
        }
    }

    #[test]
    fn a_broken_malias_is_caught() {
        // Runs the effects twice: violates identity.
        fn twice(m: Comp) -> Result<Comp, RunError> {
            let again = m.clone();
            m.and_then(move |_| Ok(Comp::unit(Value::Comp(again.clone()))))
        }
        let config = Config::new().with("k", 1);
        let (lhs, rhs) = law_sides(Law::Identity, twice, &Comp::read("k"), PoolFn::Succ, 0);
        let l = observe_nested(StrategyId::CbN, &config, lhs, 1);
        let r = observe_nested(StrategyId::CbN, &config, rhs, 1);
        assert!(!agree(StrategyId::CbN, &l, &r));
    }

    #[test]
    fn transforms_with_simple_terms() {
        let config = Config::new().with("k", 2);
        let read = parse_expr("read \"k\"").unwrap();
        let lhs = SourceExpr::let_in("x", read.clone(), SourceExpr::var("x"));
        for strategy in StrategyId::ALL {
            assert_eq!(transform_failure(strategy, &lhs, &read, &config), None, "{strategy}");
        }
        let lhs = parse_expr("let x = 3 in x").unwrap();
        let run = run_closed(translate_cba(&lhs), StrategyId::CbNeed, &config);
        assert!(run.trace.is_empty());
        let lam = parse_expr("\\y:int. y + 1").unwrap();
        let body = parse_expr("f (f 1)").unwrap();
        let lhs = SourceExpr::let_in("f", lam.clone(), body.clone());
        assert_eq!(transform_failure(StrategyId::CbNeed, &lhs, &body.substitute("f", &lam), &config), None);
    }

    #[test]
    fn reports_serialize() {
        let mut r = LawReport::new("identity", "cbn");
        r.record(7, Some("x".into()));
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"law":"identity","strategy":"cbn","cases":1,"failures":[{"seed":7,"counterexample":"x"}],"passed":false}"#
        );
    }
}
