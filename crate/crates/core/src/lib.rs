//! Two-ring Landau–Ginzburg chiral ring `C[x]/(x^{2n} + 2c x^n - 1)`.
//!
//! The algebraic layer (ring arithmetic, pairing block forms, Chebyshev
//! reduction, coupling operator and closure data) is generic over [`Scalar`]
//! and runs in exact rational arithmetic as well as `f32`/`f64` and their
//! complex counterparts. Root-dependent quantities (residue sums, the
//! idempotent basis, the interleaved basis) and the Toda solver are `f64`.

pub mod chebyshev;
pub mod coupling;
pub mod crt;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pairing;
pub mod poly;
pub mod scalar;
pub mod toda;
pub mod verify;

pub use coupling::{c_operator, c_operator_in, closure_data, eigen_split, interleaved_basis, ClosureData, CouplingOperator, EigenSplit, InterleavedBasis, RootBranch};
pub use error::{Error, Result};
pub use model::{BasisTag, ChiralRing, ModelParams, RingElement, RootData};
pub use pairing::{eta_matrix, eta_matrix_exact, grothendieck_residue, residue_closed_form, PairingMatrix};
pub use poly::Poly;
pub use scalar::{parse_rational, Real, Scalar};

pub type Rational = num_rational::BigRational;
pub type C64 = num_complex::Complex64;
pub type C32 = num_complex::Complex32;

/// Ring over exact rationals.
pub type ExactRing = ChiralRing<Rational>;
/// Ring over double-precision complex numbers.
pub type Ring64 = ChiralRing<C64>;
/// Ring over single-precision reals.
pub type Ring32 = ChiralRing<f32>;
pub type RootData64 = RootData<f64>;
