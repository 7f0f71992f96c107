//! Bit-packed linear algebra over Z₂.

mod bitvec;
mod matrix;
mod subspace;

pub use bitvec::BitVec;
pub use matrix::{coordinates, BitMatrix, DEFAULT_MATRIX_RETRIES};
pub use subspace::{Coset, Subspace};
