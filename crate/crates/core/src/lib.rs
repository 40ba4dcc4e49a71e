//! Evolution of generative-art drawing programs.
//!
//! Genomes are ordered lists of parameterized drawing-technique calls
//! ([`genome`]), rendered onto raster canvases ([`techniques`]), scored on six
//! objectives ([`fitness`], [`classifier`]) and selected with ε-lexicase
//! selection ([`evolve`]). [`experiment`] runs leave-x-out sweeps over which
//! objectives take part in selection; [`report`] produces collages.

pub mod classifier;
pub mod evolve;
pub mod experiment;
pub mod fitness;
pub mod genome;
pub mod report;
pub mod techniques;
mod util;

pub use util::sha256_hex;
