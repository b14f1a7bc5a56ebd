//! Language generation in the limit over countable collections.
//!
//! Languages are symbolic subsets of a countable universe ([`setalg`]).
//! [`procedures`] computes optimal complexity tables by insertion sort,
//! [`generators`] turns them into generation algorithms, [`adversary`]
//! builds enumerations to run against them, and [`harness`] ties the
//! pieces into simulations and invariant checks. [`oracle`] holds the
//! independent brute-force recomputations used for cross-checking.

pub mod adversary;
pub mod collection;
pub mod error;
pub mod generators;
pub mod harness;
pub mod oracle;
pub mod procedures;
pub mod setalg;

pub use collection::{Collection, Language, LrtLimit};
pub use error::{Error, Result};
pub use setalg::{AtomId, AtomRegistry, Cardinality, SetExpr, Token};
