//! Low-Rank Landscape Lab.
//!
//! Numerical tooling for rank-constrained matrix optimization through the
//! factorization `M = U Vᵀ` (or `U Uᵀ` in the positive semidefinite case):
//!
//! * dense linear-algebra primitives (rank-truncated projections, balanced
//!   factorization, Procrustes orbit distance) — [`linalg`];
//! * objective families with exact Hessian quadratic forms: linear
//!   least-squares sensing and constant-Hessian quadratic tensor objectives,
//!   plus empirical restricted-isometry / bounded-difference constant
//!   estimation — [`objectives`], [`sensing`], [`tensor`], [`estimate`];
//! * factorized objectives `h(U,V) = f(UVᵀ)`, the balance-regularized
//!   variant, full Hessian assembly, and symmetric↔asymmetric liftings —
//!   [`factorized`], [`lift`];
//! * iterative solvers: singular value projection, plain and perturbed
//!   gradient descent on the factors — [`solvers`];
//! * certification of critical points, spurious-witness feasibility checking
//!   and construction, correlation bounds, strict-saddle scans —
//!   [`certify`], [`scan`];
//! * exact constructors for the counterexample instances — [`counterexamples`].

pub mod certify;
pub mod counterexamples;
pub mod error;
pub mod estimate;
pub mod factorized;
pub mod lift;
pub mod linalg;
pub mod objectives;
pub mod report;
pub mod rng;
pub mod scan;
pub mod sensing;
pub mod solvers;
pub mod tensor;

pub use error::{Error, Result};

/// Dense real matrix carrier used throughout the crate.
pub type Mat = nalgebra::DMatrix<f64>;

/// Frobenius inner product `⟨A, B⟩ = tr(Aᵀ B)`.
pub fn frob_inner(a: &Mat, b: &Mat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Checks that every entry of `m` is finite.
pub fn ensure_finite(m: &Mat, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} contains non-finite entries")))
    }
}
