//! Shared workloads for the criterion benches.

use malias_core::effects::Config;
use malias_core::evaluator::{run_program, ProgramRun};
use malias_core::programs::{fib, result_size};
use malias_core::strategies::StrategyId;

/// Configuration under which the size-selection program reads both keys.
pub fn result_size_config() -> Config {
    Config::new().with("new_size", 1024).with("legacy_size", 512)
}

pub fn run_result_size(strategy: StrategyId) -> ProgramRun {
    run_program(&result_size(), strategy, &result_size_config()).expect("shipped program checks")
}

pub fn run_fib(n: i64, strategy: StrategyId) -> ProgramRun {
    run_program(&fib(n), strategy, &Config::new()).expect("shipped program checks")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_succeed() {
        for strategy in StrategyId::ALL {
            assert_eq!(run_result_size(strategy).result.unwrap().as_int(), Ok(1024));
            assert_eq!(run_fib(8, strategy).result.unwrap().as_int(), Ok(21));
        }
    }
}
