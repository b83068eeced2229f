//! Spread random 1-factorizations of nearly complete regular bipartite
//! graphs: a random edge vortex, iterative cover-down into regular parts
//! (each part regularized with an f-factor), and a Monte Carlo estimator of
//! spreadness.

pub mod decompose;
pub mod regularize;
pub mod sampler;
pub mod spreadness;

pub use decompose::{
    cover_down_level, decompose_regular, decompose_seeded, decompose_with_labels, dominated,
    CoverDown, DecomposeConfig, DecomposeError, DecomposeTrace, Provenance, RegularDecomposition,
    SplitLabels, Violation,
};
pub use regularize::{regularize, RegularizeError, Regularized};
pub use sampler::{
    factorize_parts, replay, sample_spread_factorization, sample_with_seed, SpreadConfig,
    SpreadError, SpreadSample, SpreadTrace,
};
pub use spreadness::{
    estimate_spreadness, wilson, Probe, ProbeResult, ProbeSet, ProbeTarget, SpreadnessReport,
};
