//! Exact simulation of permutation-symmetric fermionic continuous-time
//! quantum walks.
//!
//! Operators live on fixed-particle-number sectors of the fermionic Fock
//! space. The crate builds realizations of permutations and conjugacy-class
//! Hamiltonians, diagonalizes the all-to-all hopping model analytically, and
//! checks each closed form against a dense spectral oracle.
//!
//! Integer-valued operators are generic over [`Scalar`] and can be built
//! exactly over `i64`; everything involving square roots or time evolution is
//! generic over [`Real`] (`f32` or `f64`). The aliases below fix the usual
//! choices.

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod hamiltonians;
pub mod limits;
pub mod operator;
pub mod permgroup;
pub mod scalar;
pub mod spectral;
pub mod verify;

pub use dynamics::{SpectralEvolver, SupportProfile, TimeGrid, WalkResult};
pub use error::{Error, Result};
pub use fock::{FockBasis, OccupationState, SectorBasis, WaveVector};
pub use hamiltonians::{Family, ModelSpec};
pub use limits::Limits;
pub use operator::SectorOperator;
pub use permgroup::{CycleType, Permutation};
pub use scalar::{Real, Scalar};
pub use spectral::{Level, SpectrumSummary};

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;

/// Double-precision real operator.
pub type Operator = SectorOperator<f64>;
/// Single-precision real operator.
pub type Operator32 = SectorOperator<f32>;
/// Exact integer operator.
pub type ExactOperator = SectorOperator<i64>;
pub type ComplexOperator = SectorOperator<C64>;
pub type Wave = WaveVector<f64>;
pub type Wave32 = WaveVector<f32>;
