//! Simulation and analysis of classical message authentication with
//! conjugate-coded tags: hashing, key generators, quantum encodings,
//! information-theoretic bounds, the protocol itself and attacks on it.

pub mod attacks;
pub mod bits;
pub mod bitsource;
pub mod bounds;
pub mod error;
pub mod experiment;
pub mod hashing;
pub mod protocol;
pub mod quantum;
pub mod seed;

pub use bits::BitBlock;
pub use bitsource::{BlockDistribution, GeneratorFamily, GeneratorSpec, LcgParams};
pub use bounds::{BoundReport, JointTable, Units};
pub use error::{Error, Result};
pub use hashing::{HashFamilyShape, HashFunction};
pub use protocol::{EveStrategy, SchemeConfig, SchemeVariant, Transcript};
pub use quantum::{DensityMatrix, Povm, PureState};
