//! Higher-dimensional Werner states, single-copy local filtering, and
//! numerical certificates of the quantum features they carry: entanglement,
//! 1-distillability, teleportation power, CHSH nonlocality, steerability,
//! dense-codability and symmetric extendibility.
//!
//! The dense linear algebra in [`qmat`] and the state constructors are
//! generic over the real scalar ([`Real`], implemented for `f32` and
//! `f64`); the exact LP oracle in [`solver::enumerate`] runs over rationals.
//! The optimization layers work in `f64`, and the aliases below name the
//! concrete types most callers want.

pub mod certify;
pub mod error;
pub mod extend;
pub mod filterops;
pub mod io;
pub mod pipeline;
pub mod qmat;
pub mod random;
pub mod solver;
pub mod scalar;
pub mod states;
pub mod steer;
pub mod tomo;

pub use error::{Error, Result};
pub use qmat::Side;
pub use scalar::Real;

/// Complex matrix in double precision.
pub type CMat = qmat::CMatrix<f64>;
/// Bipartite density matrix in double precision.
pub type Density = qmat::DensityMatrix<f64>;
/// Complex amplitude in double precision.
pub type C64 = num_complex::Complex<f64>;
