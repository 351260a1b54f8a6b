//! Numerical engine: tensors with reverse-mode gradients, the GraphConv and
//! gated graph networks, and the Adam optimizer.

mod adam;
mod kset;
mod net;
mod params;
mod tape;

use thiserror::Error;

pub use adam::Adam;
pub use kset::{kset_neighborhoods, KSetNeighborhoods, MAX_KSET_NODES};
pub use net::{
    Batch, BlockOrder, BnStats, Forward, GraphConvLayer, Mode, ModelKind, Net, NetConfig, TrainStep, BN_MOMENTUM, EMBED_INIT,
};
pub use params::{glorot, uniform, ParamStore};
pub use tape::{column_stats, edge_sum, segment_max, GraphEdge, Tape, Tensor, Var, BN_EPS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in {0}")]
    NonFiniteValue(String),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("vocabulary mismatch: {0}")]
    VocabMismatch(String),
    #[error("input too large: {0}")]
    TooLarge(String),
}
