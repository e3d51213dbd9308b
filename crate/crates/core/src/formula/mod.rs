//! First-order formulas: syntax tree, parser, evaluator and transforms.

mod ast;
mod eval;
mod parse;
mod transform;

pub use ast::{fresh_name, Formula, PartitionedFormula, Signature, Term, Var};
pub use eval::{evaluate, Compiled, CompiledFormula};
pub use parse::{check, parse_body, parse_formula};
pub use transform::{conjunct, star_localize, theta_transform};
