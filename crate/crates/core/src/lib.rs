//! Structure-based anomaly detection in the preference space.
//!
//! Points are embedded against a pool of geometric models sampled from the
//! data ([`models`], [`embedding`]). Anomalies are points that conform to no
//! structure; in the preference space they are the most isolated vectors.
//! Two isolation forests score them:
//!
//! * the RuzHash forest ([`forest`] + [`hashing`]), which splits nodes with a
//!   locality sensitive hash of the Ruzicka distance and never evaluates a
//!   distance explicitly;
//! * the PI-Forest baseline, which splits nodes with Voronoi cells under an
//!   exact [`distances`] kind.
//!
//! [`datagen`] produces labelled synthetic scenes and [`eval`] measures ROC
//! AUC, wall-clock time and deterministic operation counts.

pub mod datagen;
pub mod distances;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod forest;
pub mod hashing;
pub mod models;
mod rng;

pub use error::{Error, Result};
pub use rng::{derive_seed, seeded_rng, Rng};
