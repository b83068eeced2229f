//! Rödl nibble on 3-uniform linear hypergraphs with exact tracked-set
//! statistics, pseudorandom matchings built from cascading nibbles, and
//! near triangle decompositions of dense graphs.

pub mod almost;
pub mod hypergraph;
pub mod nibble;

pub use almost::{almost_triangle_decomposition, AlmostConfig, AlmostDecomposition, AlmostError, TypicalityScan};
pub use hypergraph::{HypergraphError, LinearTripleHypergraph, TriangleHypergraph};
pub use nibble::{
    live_degrees, measured_degree, nibble_round, pseudo_matching, rounds_for, uncovered_counts,
    BiteRate, NibbleConfig, NibbleError, NibbleRound, NibbleRoundStats, PseudoMatching,
    SetOutcome, SetRoundStats, Thinning,
};
