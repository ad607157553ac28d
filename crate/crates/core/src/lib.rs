//! Randomized periodic red/blue colorings of Euclidean space that contain no
//! two red points at distance one.
//!
//! The construction works on the flat torus of period `R`: a maximal
//! 1/3-separated site set is built and certified, each site is sampled with
//! probability `x`, sampled sites with another sampled site within 5/3 are
//! discarded, and the Voronoi cells of the survivors (boundaries included)
//! are colored red. Everything else is blue, and the coloring is extended to
//! `E^n` periodically.
//!
//! Besides the construction the crate provides certificates and adversarial
//! searches for red unit pairs and blue copies of target sets, plus a
//! calculator for the counting bounds that show blue copies of large
//! separated sets can be avoided.

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod bounds;
pub mod coloring;
pub mod error;
pub mod format;
pub mod index;
pub mod rng;
pub mod separated;
pub mod torus;
pub mod voronoi;

pub use error::{Error, Result};
pub use torus::{TorusPoint, TorusSpec, TAU};
