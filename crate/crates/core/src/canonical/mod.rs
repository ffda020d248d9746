//! Canonical representatives of orbits and the constructive normalization
//! that reaches them.

pub mod b15;
pub mod layout;
pub mod normalize;
pub mod tools;

pub use b15::b15_block_normalize;
pub use layout::{block_vectors, representative, IndexLayout};
pub use normalize::{canonicalize, normalize_pair, Canonicalization, NormalizationTrace, StageRecord};
