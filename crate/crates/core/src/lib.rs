//! Orbits of triple flag varieties for the split odd orthogonal group
//! O_{2n+1} over exact fields.

pub mod canonical;
pub mod classifier;
pub mod error;
pub mod field;
pub mod form;
pub mod invariants;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod stabilizer;
pub mod suites;
pub mod witness;

pub use error::{Error, Result};
pub use field::{Fp, Gf3, Gf5, Gf7, Rational, Scalar};
pub use form::{FlagType, IsotropicFlag, OrthElement};
pub use invariants::{compute_b, enumerate_tuples, pair_shape, InvariantTuple, PairShape};
pub use linalg::{Mat, Subspace};

pub type MatQ = Mat<Rational>;
pub type SubspaceQ = Subspace<Rational>;
