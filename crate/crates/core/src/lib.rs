//! Isolated eigenvalues and ℓ²-eigenvectors of finitely representable
//! quasi-Toeplitz operators `A = T(a) + E`.
//!
//! The operator is given by a Laurent symbol `a(z) = Σ_{i=-m}^{n} a_i z^i`
//! and a correction `E` with finitely many nonzero entries. Eigenvalues
//! outside the curve `a(𝕋)` are characterised as zeros of `det(W·U(λ))`,
//! where `W` is a constant matrix built from `B` and `E`, and the columns of
//! `U(λ)` span the decaying solutions of the difference equation attached to
//! the symbol. Newton's method is run on that determinant, either with a
//! Vandermonde basis (roots of `a(z) - λ`) or with the Frobenius basis
//! `[I; G; G²; …]`, and is seeded from eigenvalues of a finite section.
//!
//! Module layout:
//!
//! * [`poly`]: Laurent and ordinary polynomials, Graeffe root counting, winding numbers.
//! * [`linalg`]: dense complex kernels (LU, pivoted QR, Hessenberg QR eigensolver).
//! * [`qt`]: the operator model, finite sections and residual evaluation.
//! * [`factor`]: Wiener–Hopf factors, Barnett factorisation of `G = Fᵖ` and λ-derivatives.
//! * [`nep`]: the constant matrix `W`, the two bases, `Φ(λ)` and the Newton correction.
//! * [`solver`]: single-start Newton with classification, all-eigenvalue driver, maps.

pub mod error;
pub mod factor;
pub mod linalg;
pub mod nep;
pub mod poly;
pub mod qt;
pub mod solver;

pub use error::{QtError, Result};
pub use num_complex::Complex64;

/// `|re| + |im|`, the cheap modulus used in deflation and pivot tests.
#[inline]
pub(crate) fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}
