//! Seeded generators for computations, configurations and well-typed terms.
//!
//! Everything is a pure function of the seed, so any failing case can be
//! replayed from the seed printed in its report.

use std::fmt;
use std::rc::Rc;

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::effects::{Comp, Config, RunError, Value};
use crate::syntax::{PrimOp, SourceExpr, SourceType};

/// Named integer functions used by the naturality law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolFn {
    Succ,
    Double,
    Const0,
}

impl PoolFn {
    pub const ALL: [PoolFn; 3] = [PoolFn::Succ, PoolFn::Double, PoolFn::Const0];

    pub fn name(self) -> &'static str {
        match self {
            PoolFn::Succ => "succ",
            PoolFn::Double => "double",
            PoolFn::Const0 => "const0",
        }
    }

    pub fn apply(self, n: i64) -> i64 {
        match self {
            PoolFn::Succ => n.wrapping_add(1),
            PoolFn::Double => n.wrapping_mul(2),
            PoolFn::Const0 => 0,
        }
    }

    pub fn apply_value(self, v: Value) -> Result<Value, RunError> {
        Ok(Value::Int(self.apply(v.as_int()?)))
    }
}

impl fmt::Display for PoolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub seed: u64,
    pub max_depth: usize,
    pub effect_keys: Vec<String>,
    pub function_pool: Vec<PoolFn>,
}

impl GenSpec {
    pub fn new(seed: u64) -> Self {
        GenSpec {
            seed,
            max_depth: 4,
            effect_keys: ["a", "b", "c"].map(String::from).to_vec(),
            function_pool: PoolFn::ALL.to_vec(),
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    /// Settings for the `i`-th case of a suite: same settings, seed `seed + i`.
    pub fn case(&self, i: usize) -> GenSpec {
        GenSpec {
            seed: self.seed.wrapping_add(i as u64),
            ..self.clone()
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

const TICK_LABELS: [&str; 2] = ["t", "u"];

/// Generates a value for every effect key, in `-3..=9` so that both
/// branches of sign tests occur.
pub fn gen_config(spec: &GenSpec, rng: &mut impl Rng) -> Config {
    spec.effect_keys
        .iter()
        .map(|k| (k.clone(), rng.random_range(-3..=9)))
        .collect()
}

/// A first-order description of a generated computation. The running sum
/// of everything read is threaded through and added to the final constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompSpec {
    Done(i64),
    Read(String, Box<CompSpec>),
    Tick(String, Box<CompSpec>),
    /// Read `key`; continue with `positive` if the value is positive.
    Branch {
        key: String,
        positive: Box<CompSpec>,
        otherwise: Box<CompSpec>,
    },
}

impl CompSpec {
    pub fn depth(&self) -> usize {
        match self {
            CompSpec::Done(_) => 0,
            CompSpec::Read(_, next) | CompSpec::Tick(_, next) => 1 + next.depth(),
            CompSpec::Branch {
                positive, otherwise, ..
            } => 1 + positive.depth().max(otherwise.depth()),
        }
    }

    pub fn to_comp(&self) -> Comp {
        build(Rc::new(self.clone()), 0)
    }
}

fn build(spec: Rc<CompSpec>, acc: i64) -> Comp {
    match &*spec {
        CompSpec::Done(n) => Comp::unit(Value::Int(acc.wrapping_add(*n))),
        CompSpec::Read(key, next) => {
            let next = Rc::new((**next).clone());
            step(Comp::read(key.clone()), move |v| build(next.clone(), acc.wrapping_add(v)))
        }
        CompSpec::Tick(label, next) => {
            let next = Rc::new((**next).clone());
            step(Comp::tick(label.clone()), move |_| build(next.clone(), acc))
        }
        CompSpec::Branch {
            key,
            positive,
            otherwise,
        } => {
            let (pos, oth) = (Rc::new((**positive).clone()), Rc::new((**otherwise).clone()));
            step(Comp::read(key.clone()), move |v| {
                let next = if v > 0 { pos.clone() } else { oth.clone() };
                build(next, acc.wrapping_add(v))
            })
        }
    }
}

fn step(effect: Comp, k: impl Fn(i64) -> Comp + 'static) -> Comp {
    effect
        .and_then(move |v| Ok(k(v.as_int()?)))
        .expect("binding an effect step cannot fail")
}

impl fmt::Display for CompSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompSpec::Done(n) => write!(f, "done {n}"),
            CompSpec::Read(key, next) => write!(f, "read {key}; {next}"),
            CompSpec::Tick(label, next) => write!(f, "tick {label}; {next}"),
            CompSpec::Branch {
                key,
                positive,
                otherwise,
            } => write!(f, "if read {key} > 0 then ({positive}) else ({otherwise})"),
        }
    }
}

pub fn gen_comp_spec(spec: &GenSpec, rng: &mut impl Rng) -> CompSpec {
    gen_comp_at(spec, rng, spec.max_depth)
}

fn gen_comp_at(spec: &GenSpec, rng: &mut impl Rng, depth: usize) -> CompSpec {
    if depth == 0 || rng.random_ratio(1, 5) {
        return CompSpec::Done(rng.random_range(-3..=9));
    }
    let key = spec
        .effect_keys
        .choose(rng)
        .cloned()
        .unwrap_or_else(|| "a".into());
    match rng.random_range(0..4) {
        0 | 1 => CompSpec::Read(key, Box::new(gen_comp_at(spec, rng, depth - 1))),
        2 => CompSpec::Tick(
            TICK_LABELS.choose(rng).expect("non-empty").to_string(),
            Box::new(gen_comp_at(spec, rng, depth - 1)),
        ),
        _ => CompSpec::Branch {
            key,
            positive: Box::new(gen_comp_at(spec, rng, depth - 1)),
            otherwise: Box::new(gen_comp_at(spec, rng, depth - 1)),
        },
    }
}

/// A finite computation over reads and ticks, depth at most `max_depth`.
pub fn gen_comp(spec: &GenSpec) -> Comp {
    gen_comp_spec(spec, &mut spec.rng()).to_comp()
}

const NAMES: [&str; 4] = ["x", "y", "z", "w"];

fn int_to(t: SourceType) -> SourceType {
    SourceType::arrow(SourceType::INT, t)
}

/// Types the term generator draws from.
pub fn type_pool() -> Vec<SourceType> {
    vec![
        SourceType::INT,
        SourceType::BOOL,
        int_to(SourceType::INT),
        int_to(SourceType::BOOL),
        SourceType::arrow(int_to(SourceType::INT), SourceType::INT),
        int_to(int_to(SourceType::INT)),
    ]
}

/// Smallest depth of a closed term of type `t` (a literal has depth 0).
fn min_depth(t: &SourceType) -> usize {
    match t {
        SourceType::Base(_) => 0,
        SourceType::Arrow(_, r) => 1 + min_depth(r),
    }
}

/// Height of a term: leaves have depth 0.
pub fn term_depth(e: &SourceExpr) -> usize {
    match e {
        SourceExpr::Var(_)
        | SourceExpr::DefRef(_)
        | SourceExpr::Int(_)
        | SourceExpr::Bool(_)
        | SourceExpr::Effect(_) => 0,
        SourceExpr::Lam { body, .. } => 1 + term_depth(body),
        SourceExpr::App(a, b) | SourceExpr::Prim(_, a, b) => 1 + term_depth(a).max(term_depth(b)),
        SourceExpr::Let { bound, body, .. } => 1 + term_depth(bound).max(term_depth(body)),
        SourceExpr::If(c, t, f) => 1 + term_depth(c).max(term_depth(t)).max(term_depth(f)),
    }
}

struct TermGen<'a, R> {
    spec: &'a GenSpec,
    rng: &'a mut R,
    scope: Vec<(String, SourceType)>,
}

impl<R: Rng> TermGen<'_, R> {
    fn name(&mut self) -> String {
        NAMES.choose(self.rng).expect("non-empty").to_string()
    }

    fn var_of(&mut self, t: &SourceType) -> Option<SourceExpr> {
        // Only the innermost binding of each name is visible.
        let visible: Vec<&String> = self
            .scope
            .iter()
            .enumerate()
            .filter(|(i, (n, ty))| {
                ty == t && !self.scope[i + 1..].iter().any(|(m, _)| m == n)
            })
            .map(|(_, (n, _))| n)
            .collect();
        visible.choose(self.rng).map(|n| SourceExpr::var(n.as_str()))
    }

    fn effect(&mut self) -> SourceExpr {
        if self.rng.random_ratio(3, 4) {
            let key = self.spec.effect_keys.choose(self.rng).cloned().unwrap_or_else(|| "a".into());
            SourceExpr::read(key)
        } else {
            SourceExpr::tick(*TICK_LABELS.choose(self.rng).expect("non-empty"))
        }
    }

    fn lambda(&mut self, a: &SourceType, r: &SourceType, depth: usize) -> SourceExpr {
        let x = self.name();
        self.scope.push((x.clone(), a.clone()));
        let body = self.term(r, depth - 1);
        self.scope.pop();
        SourceExpr::lam_typed(x, a.clone(), body)
    }

    /// A term of type `t` and depth at most `depth`; requires
    /// `min_depth(t) <= depth`.
    fn term(&mut self, t: &SourceType, depth: usize) -> SourceExpr {
        debug_assert!(min_depth(t) <= depth);
        if depth == min_depth(t) || self.rng.random_ratio(1, 6) {
            return self.leaf(t, depth);
        }
        let choice = self.rng.random_range(0..10);
        match (t, choice) {
            (_, 0 | 1) => self.application(t, depth),
            (_, 2) => self.let_term(t, depth),
            (_, 3) => self.if_term(t, depth),
            (SourceType::Arrow(a, r), _) => self.lambda(a, r, depth),
            (SourceType::Base(_), 4 | 5) => self.prim(t, depth),
            (SourceType::Base(_), _) => {
                if t == &SourceType::INT && self.rng.random_ratio(1, 2) {
                    self.effect()
                } else {
                    self.leaf(t, depth)
                }
            }
        }
    }

    fn leaf(&mut self, t: &SourceType, depth: usize) -> SourceExpr {
        if self.rng.random_ratio(1, 2) {
            if let Some(v) = self.var_of(t) {
                return v;
            }
        }
        match t {
            SourceType::Arrow(a, r) => self.lambda(a, r, depth),
            SourceType::Base(_) if *t == SourceType::BOOL => SourceExpr::Bool(self.rng.random()),
            SourceType::Base(_) => {
                if self.spec.max_depth > 0 && self.rng.random_ratio(1, 3) {
                    self.effect()
                } else {
                    SourceExpr::Int(self.rng.random_range(-3..=9))
                }
            }
        }
    }

    /// An argument type usable at `depth - 1` (as argument) and whose
    /// function type fits too.
    fn arg_type(&mut self, result: &SourceType, depth: usize) -> Option<SourceType> {
        let candidates: Vec<SourceType> = [SourceType::INT, SourceType::BOOL, int_to(SourceType::INT)]
            .into_iter()
            .filter(|a| {
                min_depth(a) < depth
                    && min_depth(&SourceType::arrow(a.clone(), result.clone())) < depth
            })
            .collect();
        candidates.choose(self.rng).cloned()
    }

    fn application(&mut self, t: &SourceType, depth: usize) -> SourceExpr {
        let Some(a) = self.arg_type(t, depth) else {
            return self.leaf(t, depth);
        };
        let f_ty = SourceType::arrow(a.clone(), t.clone());
        let f = match self.var_of(&f_ty) {
            Some(v) if self.rng.random_ratio(1, 2) => v,
            _ => self.lambda(&a, t, depth - 1),
        };
        let arg = self.term(&a, depth - 1);
        SourceExpr::app(f, arg)
    }

    fn let_term(&mut self, t: &SourceType, depth: usize) -> SourceExpr {
        if min_depth(t) >= depth {
            return self.leaf(t, depth);
        }
        let pool: Vec<SourceType> = type_pool()
            .into_iter()
            .filter(|a| min_depth(a) < depth)
            .collect();
        let a = pool.choose(self.rng).cloned().unwrap_or(SourceType::INT);
        let bound = self.term(&a, depth - 1);
        let x = self.name();
        self.scope.push((x.clone(), a));
        let body = self.term(t, depth - 1);
        self.scope.pop();
        SourceExpr::let_in(x, bound, body)
    }

    fn if_term(&mut self, t: &SourceType, depth: usize) -> SourceExpr {
        if min_depth(t) >= depth {
            return self.leaf(t, depth);
        }
        let c = self.term(&SourceType::BOOL, depth - 1);
        let then = self.term(t, depth - 1);
        let other = self.term(t, depth - 1);
        SourceExpr::if_then_else(c, then, other)
    }

    fn prim(&mut self, t: &SourceType, depth: usize) -> SourceExpr {
        let ops: &[PrimOp] = if *t == SourceType::BOOL {
            &[PrimOp::Leq, PrimOp::Gt]
        } else {
            &[PrimOp::Add, PrimOp::Sub, PrimOp::Mul]
        };
        let op = *ops.choose(self.rng).expect("non-empty");
        let l = self.term(&SourceType::INT, depth - 1);
        let r = self.term(&SourceType::INT, depth - 1);
        SourceExpr::prim(op, l, r)
    }
}

/// A closed, fully annotated term of type `t` with depth at most
/// `max(spec.max_depth, depth needed by t)`.
pub fn gen_term_of_type(spec: &GenSpec, rng: &mut impl Rng, t: &SourceType) -> SourceExpr {
    gen_open_term(spec, rng, &[], t)
}

/// Like [`gen_term_of_type`], but the term may use the given variables.
pub fn gen_open_term(
    spec: &GenSpec,
    rng: &mut impl Rng,
    scope: &[(String, SourceType)],
    t: &SourceType,
) -> SourceExpr {
    let depth = spec.max_depth.max(min_depth(t));
    let mut g = TermGen {
        spec,
        rng,
        scope: scope.to_vec(),
    };
    g.term(t, depth)
}

/// A closed well-typed term together with its type, drawn from the type
/// pool (restricted to types that fit in `max_depth`).
pub fn gen_typed_term(spec: &GenSpec) -> (SourceExpr, SourceType) {
    let mut rng = spec.rng();
    let pool: Vec<SourceType> = type_pool()
        .into_iter()
        .filter(|t| min_depth(t) <= spec.max_depth)
        .collect();
    let t = pool.choose(&mut rng).cloned().unwrap_or(SourceType::INT);
    (gen_term_of_type(spec, &mut rng, &t), t)
}

/// A closed term of a base type together with a configuration for its
/// effects; the unit of the equivalence and call-by-need suites.
pub fn gen_program_case(spec: &GenSpec) -> (SourceExpr, SourceType, Config) {
    let mut rng = spec.rng();
    let config = gen_config(spec, &mut rng);
    let t = if rng.random_ratio(3, 4) {
        SourceType::INT
    } else {
        SourceType::BOOL
    };
    (gen_term_of_type(spec, &mut rng, &t), t, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::run_seq;
    use crate::typecheck::{infer_source, SourceContext};

    #[test]
    fn depth_zero_comp_is_pure() {
        let spec = GenSpec::new(1).with_max_depth(0);
        assert!(gen_comp(&spec).is_pure());
    }

    #[test]
    fn comp_generation_is_deterministic() {
        let spec = GenSpec::new(99);
        let a = gen_comp_spec(&spec, &mut spec.rng());
        let b = gen_comp_spec(&spec, &mut spec.rng());
        assert_eq!(a, b);
    }

    #[test]
    fn generated_comps_terminate() {
        let base = GenSpec::new(0).with_max_depth(6);
        for i in 0..10_000 {
            let spec = base.case(i);
            let mut rng = spec.rng();
            let cfg = gen_config(&spec, &mut rng);
            let c = gen_comp_spec(&spec, &mut rng);
            assert!(c.depth() <= 6);
            run_seq(c.to_comp(), &cfg).unwrap();
        }
    }

    #[test]
    fn comp_semantics() {
        let c = CompSpec::Read(
            "a".into(),
            Box::new(CompSpec::Branch {
                key: "b".into(),
                positive: Box::new(CompSpec::Done(100)),
                otherwise: Box::new(CompSpec::Tick("t".into(), Box::new(CompSpec::Done(0)))),
            }),
        );
        let cfg = Config::new().with("a", 2).with("b", -1);
        let (v, t) = run_seq(c.to_comp(), &cfg).unwrap();
        assert_eq!(v.as_int(), Ok(1));
        assert_eq!(t.len(), 3);
        assert_eq!(c.to_string(), "read a; if read b > 0 then (done 100) else (tick t; done 0)");
    }

    #[test]
    fn depth_zero_terms_are_literals() {
        for seed in 0..50 {
            let spec = GenSpec::new(seed).with_max_depth(0);
            let e = gen_term_of_type(&spec, &mut spec.rng(), &SourceType::INT);
            assert!(matches!(e, SourceExpr::Int(_)), "{e}");
        }
    }

    #[test]
    fn terms_are_well_typed_and_shallow() {
        let base = GenSpec::new(7).with_max_depth(6);
        for i in 0..2000 {
            let (e, t) = gen_typed_term(&base.case(i));
            assert_eq!(infer_source(&SourceContext::new(), &e), Ok(t), "{e}");
            assert!(term_depth(&e) <= 6, "{e}");
        }
    }
}
