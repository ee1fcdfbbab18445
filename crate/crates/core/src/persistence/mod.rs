//! Persistence diagrams of Dowker filtrations.
//!
//! [`engine`] is the fast path: union-find for degree 0 and a sparse column
//! reduction over triangles for degree 1. [`oracle`] recomputes the same
//! diagrams by exhaustive enumeration for cross-checking, and [`symmetric`]
//! provides the direction-blind comparator.

mod diagram;
pub mod engine;
pub mod oracle;
pub mod symmetric;
mod union_find;

pub use diagram::{Death, EdgePoint, EdgePointMap, PdPoint, PersistenceDiagram, PointClass};
pub use engine::{
    check_duality, diagrams, pd0_with_edge_map, pd1, DualityReport, ReductionStats,
    SkeletonPersistence,
};
pub use oracle::{naive_oracle_pd, ORACLE_NODE_CAP};
pub use symmetric::symmetric_pd0;
pub use union_find::{ElderUnionFind, Merged};
