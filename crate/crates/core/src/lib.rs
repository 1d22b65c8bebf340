//! Correlation-structure detection across multiple data sets.
//!
//! Each of `P` data sets observes `n` latent components through its own
//! mixing matrix. Component `i` may be correlated between any subset of the
//! sets. The eigenvalues of the composite coherence matrix above one count
//! the correlated components. The zero pattern of the matching eigenvectors
//! shows which sets each component spans. [`detect`] estimates both from
//! samples with bootstrap tests.

pub mod cli;
pub mod coherence;
pub mod detect;
pub mod error;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod rng;
pub mod synth;

pub use coherence::{
    population_coherence, sample_coherence, CoherenceDecomposition, CoherenceOptions,
};
pub use detect::{corr_dim, corr_struct, detect, DetectConfig, DetectionReport};
pub use error::{Error, Result};
pub use model::{CorrelationProfile, PairMap};
pub use rng::RngStream;
pub use synth::{generate, GenConfig, MultiDataset};
