//! Surface language: abstract syntax, parsing and substitution.

mod parser;
mod term;

pub use parser::{
    parse_atom, parse_program, parse_query, parse_rule, parse_term, ConditionalQuery,
};
pub use term::*;
