//! Nonparametric resampling of stationary random fields.
//!
//! The crate synthesizes grayscale textures from an observed sample by
//! kernel-weighted (or ε-match) neighborhood resampling in three pixel
//! orderings (corner, rectangular, spiral), and ships a statistical lab that
//! checks the synthesized window laws against exactly enumerable Markov mesh
//! models.

pub mod error;
pub mod field;
pub mod geometry;
pub mod lab;
pub mod pgm;
pub mod resampler;
pub mod rng;
pub mod spiral;
pub mod weighting;

pub mod cli;

mod par;

pub use error::{Error, Result};
pub use field::{enumerate_candidates, extract_vector, Field, LatticePoint, PatchVector, Shape};
pub use geometry::{CanvasGeometry, Scheme};
pub use resampler::{synthesize, Resampler, SynthesisConfig, SynthesisState};
pub use weighting::WeightingMode;
