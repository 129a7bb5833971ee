//! Multi-domain hypergraph foundation model pipeline.
//!
//! The crate covers the full loop at desk scale:
//!
//! 1. structure-aware vertex embedding — hashed TF-IDF features, a
//!    hierarchical neighbor-label tree, and level-wise trained text encoders
//!    ([`text`], [`tree`], [`embed`]);
//! 2. hierarchical multi-hypergraph construction across domains — diffusion
//!    sampling, per-domain cluster layers, bond vertices ([`multihg`]);
//! 3. self-supervised pretraining of a two-layer hypergraph network with
//!    contrastive and masked-reconstruction losses ([`hgnn`], [`pretrain`]);
//! 4. few-shot fine-tuning and the experiment harness ([`finetune`]).
//!
//! Everything is seeded and deterministic: the same configuration and seed
//! reproduce checkpoints bit-identically.

pub mod checkpoint;
pub mod dataset;
pub mod embed;
pub mod error;
pub mod finetune;
pub mod hgnn;
pub mod hypergraph;
pub mod matrix;
pub mod multihg;
pub mod numerics;
pub mod pretrain;
pub mod rng;
pub mod text;
pub mod tree;

pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, NeighborVector, SubHypergraph};
pub use matrix::DenseMatrix;
pub use rng::RngSeed;
