//! Unextendible maximally entangled bases (UMEBs) built from real
//! equiangular projection families.
//!
//! The pipeline is:
//!
//! 1. [`numth`] validates a prime `p` (`p = 3` or `p ≡ 7 mod 8`) and its
//!    quadratic residues.
//! 2. [`hadamard`] supplies a Hadamard matrix of order `(p+1)/2`.
//! 3. [`packing`] builds `p(p+1)/2` real rank-`(p-1)/2` projections with a
//!    common pairwise trace, plus the icosahedron lines for `d = 3`.
//! 4. [`umeb`] picks a unit phase `z` and forms `U_i = I - (1-z) P_i`, then
//!    certifies that the unitaries are trace-orthogonal, span the symmetric
//!    matrices and therefore admit no orthogonal unitary (odd `d`).
//! 5. [`channels`] checks that the uniform mixture of those unitaries is the
//!    symmetric Werner–Holevo channel, with Choi rank `d(d+1)/2`.
//!
//! Exact arithmetic is used for the integer and rational data (residues,
//! Hadamard entries, angles, phases); everything complex is `f64`.

pub mod channels;
pub mod error;
pub mod hadamard;
pub mod matcore;
pub mod numth;
pub mod packing;
pub mod umeb;

pub use channels::{MixedUnitaryDecomposition, WhReport};
pub use error::{Error, Result};
pub use hadamard::HadamardMatrix;
pub use matcore::{ComplexMatrix, Tolerance};
pub use numth::UmebPrime;
pub use packing::{EquiangularReport, ProjectionFamily};
pub use umeb::{FeasibilityReport, UmebCertificate, UnitaryFamily};

/// Exact rational used for angles and phase real parts.
pub type Rational = num_rational::Ratio<i64>;
