//! Recovery of discrete signals on `Z_N x Z_T` from erased row-wise Gabor
//! transforms.
//!
//! The crate is organised bottom-up:
//!
//! * [`signal`] holds the grid-indexed complex signal and its support statistics.
//! * [`transforms`] implements the unitary 2D DFT and the row/column Gabor transforms.
//! * [`channel`] models i.i.d. Bernoulli erasure of transmitted coefficients.
//! * [`recovery`] solves the L1 (basis pursuit) recovery problems and assembles
//!   the row-then-column pipeline.
//! * [`probbounds`] evaluates exact binomial tails and the geometric-series tail bound.
//! * [`experiments`] drives seeded Monte Carlo runs and writes CSV/JSON artifacts.
//!
//! With the default `parallel` feature, rows, columns and trials are spread over
//! a rayon pool. Building with `--no-default-features` runs everything on the
//! calling thread and produces identical results.

pub mod channel;
pub mod error;
pub mod experiments;
mod parallel;
pub mod probbounds;
pub mod recovery;
pub mod signal;
pub mod transforms;

pub use channel::{apply_erasure, erasure_stats, sample_erasure, ErasurePattern, ErasureStats};
pub use error::{Error, Result};
pub use recovery::{
    ds_condition, l1_recover_1d, recover_global, recover_rows, recover_two_stage,
    uniqueness_oracle_1d, L1Domain, RecoveryProblem, RecoveryReport, RowStatus, SolverOptions,
    Stage,
};
pub use signal::{
    column_support_max, support, support_profile, GridDims, Signal2D, SupportProfile,
};
pub use transforms::{
    dft2, gabor_col, gabor_col_inverse, gabor_row, gabor_row_inverse, idft2, TransformKind,
};

pub use num_complex::Complex64;
