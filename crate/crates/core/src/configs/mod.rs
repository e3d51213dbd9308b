//! Finite configurations, their embedding into a sequence, and detectors for
//! arrays, trees, orders and shattering.

mod array;
mod detect;
mod embed;
pub(crate) mod node_labels;
mod t0;

pub use array::{
    column_count, detect_array, gap, is_sharp, lex_predecessor, lex_successor, paths, ArrayConfig, ArrayViolation, Cell,
    ColumnCount, SharpReport,
};
pub use detect::{
    detect_compatible_order, detect_diagram, detect_empty_graph, detect_empty_tuple, detect_ip_shattering,
    detect_order_property, detect_tree, p1_members, tree_nodes, CompatibleOrder, DiagramConfig, OrderConvention,
    OrderWitness, ShatterMode, ShatterWitness, TreeConfig,
};
pub use embed::{find_all_embeddings, find_embedding, matches_exactly, EmbedMode};
pub use t0::{downward_closed_families, t0_consistent, T0Config};

#[cfg(test)]
mod tests;
