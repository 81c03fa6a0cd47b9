//! Composite index: weighting, merging, normalization and aggregation.

mod aggregate;
mod merge;
mod pipeline;
mod transform;
mod weights;

pub use aggregate::{binary_penalties, compute_index, group_scores, GroupScores};
pub use merge::merge_correlated;
pub use pipeline::{run_index, IndexRun};
pub use transform::{transform_and_normalize, ColumnTransform};
pub use weights::{resolve_weights, weights_from_ranks, MergedFeature, WeightTable};
