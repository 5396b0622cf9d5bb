//! Exact information quantities on small finite bandits.
//!
//! Everything here enumerates the posterior given a frozen history; there is
//! no sampling error. The sampled action `A` is optimal for an independent
//! posterior draw, so it has the posterior law of `A*` and is independent of
//! it. Actions chosen by a random plan are observed along with their rewards.

mod lemma;
mod link;
mod model;
mod pmf;
mod sampling;
pub mod specs;

pub use lemma::{satisfies_reduction, two_point_reduction, TwoPoint, LEMMA_TOL};
pub use link::{chain_link_ratio, chain_link_reports, telescoping, ChainLinkReport, Telescoping, DENOMINATOR_FLOOR, TELESCOPING_TOL};
pub use model::{disintegrated_cmi, PosteriorModel, Target, MAX_CONFIGURATIONS};
pub use pmf::{mutual_information, JointPMF};
pub use sampling::{
    build_sampling_functions, build_sampling_functions_for, regret_difference, CellRule, ConstructionChecks,
    InequalityCheck, LevelFunction, SamplingFunctionFamily, INEQUALITY_TOL,
};

#[cfg(test)]
mod tests;
