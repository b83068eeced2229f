//! Completion solvers: list edge colouring of regular bipartite graphs,
//! Latin squares from lists, and the end-to-end builders for Steiner triple
//! systems and 1-factorizations of `K_{2n}`.

pub mod build;
pub mod bypass;
pub mod colouring;
pub mod latin;
pub mod onef;
pub mod sts;

pub use build::{split_probability, BuildError, StageRecord};
pub use bypass::sts_hill_climb;
pub use colouring::{
    exhaustive_list_colouring, solve_list_edge_colouring, Certificate, ColouringResult, Exhaustive, Outcome,
    SolveBudget, SolveError, SolveStats,
};
pub use latin::{complete_bipartite, latin_square_from_lists, random_latin_lists, LatinResult};
pub use onef::{build_one_factorization_k2n, OneFBuild, OneFConfig};
pub use sts::{build_sts, BuildMode, StsBuild, StsConfig};
