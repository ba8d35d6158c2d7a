//! Sample programs shipped with the toolkit.

use crate::syntax::{parse_program, Program};

/// Size selection with a configuration fallback; reads `new_size` and
/// `legacy_size`.
pub const RESULT_SIZE: &str = include_str!("../../../programs/resultsize.src");

/// Doubly recursive Fibonacci over the free variable `arg`.
pub const FIB: &str = include_str!("../../../programs/fib.src");

pub fn result_size() -> Program {
    parse_program(RESULT_SIZE).expect("shipped program parses")
}

/// The Fibonacci program with `arg` replaced by `n`.
pub fn fib(n: i64) -> Program {
    parse_program(FIB).expect("shipped program parses").with_arg(n)
}

/// Reference Fibonacci numbers (`fib 0 = 0`, `fib 1 = 1`).
pub fn fib_reference(n: u32) -> i64 {
    let (mut a, mut b) = (0i64, 1i64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::Config;
    use crate::evaluator::run_program;
    use crate::strategies::StrategyId;

    #[test]
    fn reference_values() {
        assert_eq!(
            (0..11).map(fib_reference).collect::<Vec<_>>(),
            vec![0, 1, 1, 2, 3, 5, 8, 13, 21, 34, 55]
        );
    }

    #[test]
    fn fib_par_shape() {
        let mut last = 0.0;
        for n in 2..=12u32 {
            let run = run_program(&fib(n as i64), StrategyId::CbParNeed, &Config::new()).unwrap();
            assert_eq!(run.result.unwrap().as_int(), Ok(fib_reference(n)));
            let (span, work) = (run.trace.span, run.trace.work);
            assert_eq!(span, n as u64);
            let ratio = work as f64 / span as f64;
            assert!(ratio > last);
            last = ratio;
        }
    }
}
