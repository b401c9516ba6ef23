//! Detect organized co-movement in multi-agent trajectory data.
//!
//! The library ingests dense per-step agent positions, slices them into
//! sliding windows, and scores each window with three detectors:
//!
//! * a cluster-quality index (DBSCAN over a pairwise trajectory
//!   dissimilarity matrix, scored with the Silhouette Coefficient),
//! * a normalized network entropy over a thresholded agent graph,
//! * a per-coordinate histogram entropy baseline.
//!
//! Four seedable agent simulations (ant foraging, wolf pack predation,
//! bird flocking, and two competing ant colonies) provide organized and
//! disorganized reference runs for evaluating the detectors.

pub mod baseline;
pub mod clustering;
pub mod error;
pub mod graph_entropy;
pub mod pipeline;
pub mod reproduce;
pub mod sim;
pub mod similarity;
pub mod trajectory;

pub use error::{Error, Result};
