//! Oracle reductions from Trees-of-Connectors through non-repeating strings
//! and grid PPAD graphs to discrete Brouwer functions, with per-layer query
//! accounting.

pub mod brouwer;
pub mod counter;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod pipeline;
pub mod solver;
pub mod string;
pub mod toc;

pub use brouwer::{BrouwerFn, BrouwerOracle};
pub use counter::{Counted, Counts, Layer, QueryCounter};
pub use error::{Error, Result};
pub use graph::{GraphAnswer, GraphOracle};
pub use lattice::{Direction, GridPoint, GridSpec};
pub use pipeline::{invert_chain, Stack};
pub use solver::SolveResult;
pub use string::{IndexedString, StringAnswer, StringOracle, SymbolString};
pub use toc::{Toc, TocAnswer, TocOracle, TocSpec};
