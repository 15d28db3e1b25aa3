//! Offline incremental, multi-prototype clustering with a fuzzy ARTMAP network
//! whose cluster assignments are driven by incremental cluster validity
//! indices (iCVIs).
//!
//! The pipeline is:
//!
//! 1. [`preprocess::prepare`] builds two views of a [`data::Dataset`]: a
//!    min-max scaled, complement-coded view for ARTa and a standardized view
//!    for the validity-index engine.
//! 2. [`trainer::fit`] seeds ARTa from k-means++ / Lloyd centroids, then
//!    presents samples one at a time. For each sample the index engine scores
//!    every possible reassignment, the best one becomes the map-field teaching
//!    signal, and the map-field prediction decides the sample's new cluster.
//!    At the end of every epoch clusters are merged while the index improves
//!    and split (along ARTa categories) until the requested cluster count is
//!    restored.
//! 3. [`metrics::ari`] scores the result against ground truth.
//!
//! The index engine ([`icvi`]) keeps per-cluster frequency, mean, compactness
//! and (for negentropy increment) covariance up to date under add, remove,
//! merge and split operations, so scoring a candidate move costs far less than
//! recomputing the index from scratch. The same trainer can run in
//! [`trainer::CviMode::Batch`], which recomputes every index value from the
//! raw data and makes identical decisions; [`bench::speed_study`] times the
//! two modes against each other.

pub mod artmap;
pub mod bench;
pub mod data;
pub mod error;
pub mod icvi;
pub mod kmeans;
pub mod metrics;
pub mod preprocess;
pub mod trainer;

mod linalg;

pub use data::{dense_relabel, Dataset, Labels, Matrix};
pub use error::{Error, Result};
pub use icvi::{CviKind, IcviState, Optimality};
pub use preprocess::{prepare, PreparedData};
pub use trainer::{fit, CviMode, RunResult, StopReason, TrainerConfig};
