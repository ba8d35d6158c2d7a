//! Source and target syntax: AST, parser and pretty-printers.

mod alpha;
mod ast;
mod lexer;
mod parser;
mod pretty;

pub use alpha::alpha_eq;
pub use ast::*;
pub use lexer::{is_ident_continue, is_ident_start, is_keyword};
pub use parser::{parse_expr, parse_program, parse_type, ParseError};
pub use pretty::{pretty_program, pretty_source, pretty_target, pretty_target_program};
