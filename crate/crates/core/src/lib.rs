//! Bayesian point estimation of a clustering from posterior partition draws.
//!
//! Given `H` sampled partitions of `n` items, the estimate is the partition
//! minimizing the Monte Carlo estimate of the posterior expected loss. The
//! search is SALSO: a stochastic greedy search with sequential or random
//! initialization, one-item-at-a-time sweetening, zealous cluster-destroying
//! updates, and independent seeded restarts.
//!
//! * [`partition`]: canonical labels, draws, contingency tables, the PSM.
//! * [`cache`]: per-draw contingency tables kept in step with a working partition.
//! * [`losses`]: loss functions, expected loss, and the search objectives.
//! * [`salso`]: the search itself.
//! * [`oracle`]: exhaustive enumeration, baseline estimators, synthetic draws.
//! * [`estimators`]: named estimators selectable at runtime.

pub mod cache;
pub mod error;
pub mod estimators;
pub mod losses;
pub mod oracle;
pub mod partition;
pub mod salso;

pub use cache::TableCache;
pub use error::{Error, Result};
pub use losses::{expected_loss, LossKind, LossSpec};
pub use partition::{ClusterLabels, ContingencyTable, DrawsMatrix, SimilarityMatrix};
pub use salso::{salso, ClusterLimit, SalsoConfig, SalsoResult};
