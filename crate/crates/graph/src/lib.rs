//! Core data types for the designforge toolkit: simple and bipartite
//! graphs, canonical triangles, the one-shot triangle exposure ledger,
//! random list assignments, base instances and design validators.

pub mod base;
pub mod bipartite;
pub mod graph;
pub mod io;
pub mod ledger;
pub mod lists;
pub mod rng;
pub mod triangle;
pub mod validate;

pub use base::{build_base_graph, floor_eps, sts_part_sizes, BaseKind};
pub use bipartite::{BipartiteEdges, BipartiteGraph};
pub use graph::{Graph, GraphError, Part};
pub use ledger::{Exposure, ExposureLedger, FamilyId, LedgerAudit, LedgerError};
pub use lists::{
    lists_from_triangles, sample_lists, triangle_list_correspondence, triangles_from_lists,
    ListAssignment, ListError, ListMode,
};
pub use rng::{named_stream, rng_from_seed, splitmix64, substream, DfRng};
pub use triangle::{
    enumerate_triangles, enumerate_triangles_where, triangles_on_edge, PartPattern, Triangle,
};
pub use validate::{
    validate_design, validate_latin_square, validate_one_factorization,
    validate_proper_edge_colouring, validate_sts, validate_triangle_decomposition, Design,
    DesignKind, ValidationReport, Violation,
};

/// One perfect matching, edges as `(left, right)` local pairs.
pub type Matching = Vec<(usize, usize)>;

/// Ordered perfect matchings partitioning a regular bipartite graph.
pub type OneFactorization = Vec<Matching>;
