pub mod effects;
pub mod evaluator;
pub mod laws;
pub mod programs;
pub mod strategies;
pub mod syntax;
pub mod translate;
pub mod typecheck;
