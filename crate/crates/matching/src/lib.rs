//! Bipartite matching (Hopcroft–Karp with Hall witnesses), exact-degree
//! subgraphs by max-flow, 1-factorizations of regular bipartite graphs, and
//! batches of edge-disjoint perfect matchings.

pub mod factorize;
pub mod flow;
pub mod hopcroft_karp;
pub mod regular;
pub mod reservoir;

pub use factorize::{
    greedy_disjoint_matchings, many_disjoint_matchings, one_factorize, FactorizeError,
    ManyMatchingsError,
};
pub use flow::{
    f_factor, f_factor_oracle, f_factor_shuffled, DegreeSpec, FFactorError, FFactorWitness,
    OracleError,
};
pub use hopcroft_karp::{
    hall_violator, is_perfect_matching, maximum_matching, perfect_matching, MatchingError,
    MaxMatching,
};
pub use regular::random_regular_bipartite;
pub use reservoir::{
    default_ell, reservoir_matchings, ReservoirConditions, ReservoirConfig, ReservoirError,
    ReservoirInstance, ReservoirOutcome,
};
