//! Characteristic sequences of partitioned formulas over finite structures.

pub mod bitset;
pub mod configs;
pub mod constructions;
pub mod error;
pub mod formula;
pub mod localize;
pub mod report;
pub mod models;
pub mod sequence;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
pub use sequence::CharSequence;
pub use structure::{build_structure, enumerate_tuples, Elem, FiniteStructure, StructureBuilder, Tuple};
