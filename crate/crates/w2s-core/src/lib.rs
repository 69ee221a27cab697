//! Weak-to-strong generalization (W2SG) analysis over fixed representations.
//!
//! The crate is organized around a single pipeline: synthetic representation
//! datasets ([`datagen`]), closed-form ridge heads for the weak / W2S /
//! strong-ceiling roles ([`finetune`]), principal-kernel projection operators
//! and the label-free metrics built from them ([`projection`]),
//! decomposability diagnostics ([`decomp`]), and seeded experiment drivers
//! that tie everything together ([`harness`]).

pub mod datagen;
pub mod decomp;
pub mod error;
pub mod finetune;
pub mod harness;
pub mod projection;
pub mod rng;

pub use error::{Error, Result};
pub use numlin::Matrix;
