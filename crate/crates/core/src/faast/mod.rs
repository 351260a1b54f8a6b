//! Flow-augmented ASTs: the syntax tree plus token, sibling, data-use and
//! control-flow edges.

mod builder;
mod graph;
pub mod io;
pub mod stats;
mod validate;

pub use builder::{
    add_ast_edges, add_control_flow_edges, add_next_sibling_edges, add_next_token_edges, add_next_use_edges, build_fa_ast,
};
pub use graph::{Edge, EdgeKind, FaAstGraph};
pub use validate::check_invariants;
