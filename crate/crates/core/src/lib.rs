//! Temporal multipersistence fingerprints of dynamic graphs.
//!
//! The pipeline filters every snapshot of a temporal graph by a node or edge
//! function, runs zigzag persistence along time for each filtration level,
//! vectorizes the resulting diagrams and stacks them into a tensor whose
//! first axis is the filtration level.

pub mod distance;
pub mod error;
pub mod filtration;
pub mod format;
pub mod graph;
pub mod homology;
pub mod pipeline;
pub mod vectorize;
pub mod zigzag;

pub use distance::{tmp_distance, wasserstein, zpd_matching_distance, StabilityReport};
pub use error::{Result, TmpError};
pub use filtration::{FilterFunction, FilterKind, Orientation, SimplicialComplex, ThresholdGrid};
pub use graph::{NodeId, Snapshot, TemporalGraph};
pub use pipeline::{DiagramGrid, PipelineConfig};
pub use vectorize::{TmpTensor, Vectorization};
pub use zigzag::{ZigzagComplexSequence, ZigzagDiagram};
