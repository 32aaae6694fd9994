//! Positive 1-in-3 satisfiability through base-4 occurrence encodings.
//!
//! A formula's variables are encoded as base-4 integers whose digits mark
//! clause membership; an assignment is 1-in-3-satisfying exactly when the
//! encodings of its true variables sum to `(1…1)_4`. The crate expands the
//! input with per-clause gadgets, lays all assignments out as an implicit
//! `2^k1 × 2^k2` matrix, and searches it with a recursive quadrant-elimination
//! procedure. Brute-force oracles and property checkers sit alongside so the
//! search can be tested differentially and its running time measured.

pub mod cli;
pub mod encoding;
pub mod error;
pub mod formula;
pub mod oracle;
pub mod preprocess;
pub mod search;

pub use encoding::{BigNat, CellIndex, EncodedFormula, Rect};
pub use error::{Error, Result};
pub use formula::{Assignment, Clause, PosCnf, VarId};
pub use preprocess::ExpansionResult;
pub use search::{RDecode, SearchConfig, SearchMode, SearchResult, SearchStats};
