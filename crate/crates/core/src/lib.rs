//! Exact inference for probabilistic logic programs with stratification by
//! time and predicates, query-guided bottom-up grounding and a caching
//! variable elimination procedure.

pub mod builtins;
pub mod cli;
pub mod error;
pub mod ground;
pub mod infer;
pub mod semantics;
pub mod stratify;
pub mod syntax;

pub use error::{Error, Result};
