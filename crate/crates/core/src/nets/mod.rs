//! Epsilon-nets, nested quantization chains and covering-number bounds over
//! finite subsets of Euclidean space.

mod chain;
mod covering;
mod net;
mod points;

pub use chain::{
    build_quantization_chain, compute_k0, finest_singleton_level, ChainLevel, K0Rule,
    QuantizationChain,
};
pub use covering::{covering_number_bounds, log_covering_upper};
pub use net::{greedy_epsilon_net, EpsilonNet};
pub use points::{euclidean, PointSet};
