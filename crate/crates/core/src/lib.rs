//! Dowker persistent homology for directed temporal graphs.
//!
//! The pipeline runs: ingest a [`TemporalDigraph`], normalize its timestamps
//! into a [`WeightedDigraph`], build the filtered Dowker 2-skeleton, and
//! reduce it to degree-0 and degree-1 persistence diagrams. Diagram metrics
//! (2-Wasserstein, persistence images) and synthetic graph families live
//! alongside.

pub mod dowker;
pub mod error;
pub mod graph;
pub mod line_graph;
pub mod metrics;
pub mod persistence;
pub mod synth;

pub use dowker::{build_skeleton, skeleton_at, DowkerSkeleton, FilteredSimplex, SkeletonOptions};
pub use error::{Error, Result};
pub use graph::{
    normalize_weights, FiltrationWeight, Kind, TemporalDigraph, TemporalEdge, WeightedDigraph,
    WeightedEdge,
};
pub use line_graph::{build_line_graphs, line_graph_stats, LineGraph, LineGraphStats};
pub use persistence::{
    check_duality, diagrams, naive_oracle_pd, pd0_with_edge_map, pd1, symmetric_pd0, Death,
    DualityReport, EdgePointMap, PdPoint, PersistenceDiagram, PointClass,
};
