//! Classical simulation toolkit for one-shot signatures built from coset
//! oracles over Z₂.

pub mod checks;
pub mod coset_state;
pub mod cpf;
pub mod ecc;
pub mod error;
pub mod experiments;
pub mod forgery;
pub mod gf2;
pub mod lazy_random;
pub mod oracle;
pub mod oss;
pub mod stats;
pub mod subspace_lab;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec, Coset, Subspace};
pub use lazy_random::{DeterministicRng, LazyFunction, LazyPermutation, Seed};
pub use oracle::{DualFreeOracle, DualOracle, OracleSuite, Params, PointOutput, SuiteConfig};
