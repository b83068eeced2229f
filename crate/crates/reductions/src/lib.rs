//! The two reduction pipelines: Steiner triple systems down to a regular
//! tripartite residue, and 1-factorizations of `K_2n` down to a regular
//! bipartite residue. Also cover-down for one part, the divisibility
//! balancer and equitable edge colouring.

pub mod balance;
mod common;
pub mod coverdown;
pub mod equitable;
pub mod output;
mod packing;
pub mod red1;
pub mod red2;
pub mod tracker;

pub use balance::{
    balance_divisibility, check_divisibility, BalanceConfig, BalanceError, BalanceReport, Balanced,
};
pub use coverdown::{cover_down_part, CoverDown, CoverDownConfig, CoverDownError, CoverDownReport};
pub use equitable::{balance_colouring, equitable_edge_colouring, ColourClasses, EquitableError};
pub use output::{ReductionError, ReductionOutput, StageStats};
pub use red1::{sts_reduce, Red1Config, Red1Sets};
pub use red2::{batch_count, one_f_reduce, Red2Config, Red2Sets};
pub use tracker::{Case, Choice, DeficiencyTracker, TrackerError};
