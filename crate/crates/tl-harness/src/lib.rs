//! Randomized differential testing for the tensor language.
//!
//! Three pieces. [`gen`] produces seeded random programs that typecheck by
//! construction, together with matching initial stores. [`oracle`] is a
//! second interpreter written against flat dense arrays, sharing nothing
//! with the evaluator under test beyond the value type, so agreement
//! between the two is evidence rather than tautology. [`diff`] drives both
//! interpreters plus the padded evaluator over a corpus of seeds and
//! reports every disagreement, shrinking each failing program before
//! recording it.

#![forbid(unsafe_code)]

pub mod diff;
pub mod gen;
pub mod oracle;

pub use diff::{check_simulation, DiffReport, Mismatch, Mutation};
pub use gen::{gen_init, gen_program, GenConfig, QualifierProbs};
pub use oracle::{oracle_eval, Dense};
