//! Unbalanced diffusion earth mover's distance (UDEMD) between signals on a graph.
//!
//! Each signal (a nonnegative function on the nodes of a fixed graph) is pushed
//! through a lazy or plain random walk at dyadic time scales `1, 2, 4, .., 2^K`.
//! Weighted differences of consecutive scales, together with the final
//! low-pass scale, form a vector whose L1 distances behave like an earth
//! mover's distance with the geodesic ground cost truncated near `2^K`.
//!
//! The crate is `no_std` + `alloc`. With the default `std` feature, embedding,
//! diffusion and pairwise distances run in parallel over signals.
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | sparse symmetric graph, loading and validation |
//! | [`diffusion`] | random-walk operator `P = D^-1 A` and mass-conserving push-forward |
//! | [`geodesic`] | exact shortest paths |
//! | [`generators`] | ring, random geometric and sphere-cluster datasets |
//! | [`signal`] | signal matrices and distance matrices |
//! | [`embed`] | the multiscale embedding and its L1 distance |
//! | [`metric`] | pairwise L1, exact kNN, TV and Euclidean baselines |
//! | [`ot`] | network simplex, dense LP, Sinkhorn, TV-unbalanced transport |
//! | [`eval`] | P@k, silhouette, ARI / NMI / AMI, k-medoids |
//! | [`stats`] | rank correlation and fitting helpers |

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod diffusion;
pub mod embed;
mod error;
pub mod eval;
pub mod generators;
pub mod geodesic;
pub mod graph;
pub(crate) mod math;
pub mod metric;
pub mod ot;
pub(crate) mod par;
pub mod signal;
pub mod stats;

pub use diffusion::{DiffusionOperator, WalkOptions};
pub use embed::{udemd_distance, udemd_embed, MultiscaleEmbedding, Subsample, UdemdConfig, WeightSign};
pub use error::{Error, Result};
pub use geodesic::{geodesic_distances, GeodesicTable};
pub use graph::{Edge, Graph, LoadReport};
pub use metric::NeighborList;
pub use signal::{DistanceMatrix, SignalSet};
