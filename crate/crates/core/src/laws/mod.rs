//! Property checks over generated computations and programs.

mod checks;
mod gen;

pub use checks::*;
pub use gen::*;
