//! Core library for the `tl` tensor language.
//!
//! A `tl` program declares a set of tensor variables with fixed extents and
//! then assigns expressions to them. Expressions combine variables with
//! element-wise arithmetic, outer products, contractions, and transpositions.
//! This crate provides the pipeline a tool needs: lexing and parsing
//! ([`syntax`]), static typing ([`typecheck`]), exact rational evaluation
//! ([`eval`]), evaluation over padded storage ([`padded`]), and simple
//! dataflow analyses ([`analysis`]).

#![forbid(unsafe_code)]

pub mod analysis;
pub mod eval;
pub mod index;
pub mod padded;
pub mod store;
pub mod storefile;
pub mod syntax;
pub mod typecheck;
pub mod value;

pub use eval::run;
pub use index::{MultiIndex, TensorType, VectorLength};
pub use padded::run_padded;
pub use store::{InitSpec, Store};
pub use syntax::parse_program;
pub use typecheck::check_program;
pub use value::Value;
