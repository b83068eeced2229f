//! Random edge vortices over bipartite hosts and (δ, p)-quasirandomness
//! diagnostics for their parts.

pub mod decomposition;
pub mod qr;

pub use decomposition::{
    index_of, indices, label_of, random_vortex, slots, vortex_params, VortexDecomposition,
    VortexError, VortexParams, VortexRecord,
};
pub use qr::{
    qr_check, qr_check_with, Condition, Counterexample, DeltaPrimeResult, Qr1Result, QrConfig,
    QrMode, QrReport, Side, DELTA_NOTE, EXACT_LIMIT,
};

/// Default `δ` for quasirandomness checks.
pub const DEFAULT_DELTA: f64 = 0.3;
/// Default spread constant `C`.
pub const DEFAULT_C: f64 = 12.0;
