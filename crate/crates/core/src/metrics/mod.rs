//! Distances between persistence diagrams.

mod hungarian;
pub mod image;
pub mod wasserstein;

pub use hungarian::min_cost_assignment;
pub use image::{persistence_image, pie, ImageConfig, PersistenceImage};
pub use wasserstein::{
    matching_cost, optimal_matching, wasserstein2, wasserstein2_with, Matching, Slot,
    WassersteinOptions, WassersteinResult,
};
