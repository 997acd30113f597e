//! Federated learning math: data, the softmax objective, local SGD,
//! hierarchical aggregation, partitioning and evaluation.

mod aggregate;
mod data;
pub mod idx;
mod model;
mod partition;
mod train;

pub use aggregate::{aggregate_global, aggregate_partial, weighted_average, AggregationWeighting};
pub use data::{gaussian_blobs, train_test_split, DataShard, Dataset, SyntheticSpec};
pub use model::{ModelState, Objective, SoftmaxRegression};
pub use partition::{partition_data, PartitionMode};
pub use train::{evaluate, global_loss, local_loss, local_train, training_time, TrainingConfig};
