//! Exact constructors for the explicit counterexample instances, plus the
//! dialed-δ interpolation family for controlled experiments.
//!
//! All coefficients are halves and quarters, which are exact in double
//! precision, so every constructor is exact and deterministic.

use crate::certify::SpuriousWitness;
use crate::error::{Error, Result};
use crate::tensor::{OuterTensor, TensorObjective};
use crate::Mat;

fn e_outer(n: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// Rank-one instance with restricted-isometry constant exactly ½ on rank-2
/// perturbations and a spurious second-order critical point at
/// `Ũ = e₂/√2`. Ground truth `M* = e₁e₁ᵀ`.
pub fn rank1_example(n: usize) -> Result<TensorObjective> {
    if n < 2 {
        return Err(Error::Input("rank1_example: n must be ≥ 2".into()));
    }
    let terms = vec![
        (0.5, e_outer(n, 0, 0), e_outer(n, 1, 1)),
        (0.5, e_outer(n, 1, 1), e_outer(n, 0, 0)),
        (0.25, e_outer(n, 0, 1), e_outer(n, 0, 1)),
        (0.25, e_outer(n, 1, 0), e_outer(n, 1, 0)),
        (0.25, e_outer(n, 0, 1), e_outer(n, 1, 0)),
        (0.25, e_outer(n, 1, 0), e_outer(n, 0, 1)),
    ];
    let tensor = OuterTensor::new(n, n, 1.0, terms)?;
    TensorObjective::new(tensor, e_outer(n, 0, 0))
}

/// The spurious point of [`rank1_example`]: `Ũ = e₂/√2`, so `M̃ = ½e₂e₂ᵀ`.
pub fn rank1_spurious_factor(n: usize) -> Mat {
    let mut u = Mat::zeros(n, 1);
    u[(1, 0)] = 0.5_f64.sqrt();
    u
}

/// General-rank instance: `𝓗 = (3/2)𝓘` plus per-block corrections on the
/// `(2i−1, 2i)` coordinate pairs; restricted-isometry constant exactly ½ on
/// rank-2r perturbations. Ground truth `M* = Σ e_{2i−1}e_{2i−1}ᵀ`, spurious
/// point `M̃ = ½ Σ e_{2i}e_{2i}ᵀ`.
pub fn rankr_linear_example(r: usize, n: usize) -> Result<TensorObjective> {
    if r == 0 {
        return Err(Error::Input("rankr_linear_example: r must be ≥ 1".into()));
    }
    if n < 2 * r {
        return Err(Error::Input(format!("rankr_linear_example: n={n} < 2r={}", 2 * r)));
    }
    let mut terms = Vec::with_capacity(8 * r);
    for i in 0..r {
        let (a, b) = (2 * i, 2 * i + 1); // indices of e_{2i-1}, e_{2i}
        terms.push((-0.5, e_outer(n, a, a), e_outer(n, a, a)));
        terms.push((-0.5, e_outer(n, b, b), e_outer(n, b, b)));
        terms.push((0.5, e_outer(n, a, a), e_outer(n, b, b)));
        terms.push((0.5, e_outer(n, b, b), e_outer(n, a, a)));
        terms.push((-0.25, e_outer(n, a, b), e_outer(n, a, b)));
        terms.push((-0.25, e_outer(n, b, a), e_outer(n, b, a)));
        terms.push((0.25, e_outer(n, a, b), e_outer(n, b, a)));
        terms.push((0.25, e_outer(n, b, a), e_outer(n, a, b)));
    }
    let tensor = OuterTensor::new(n, n, 1.5, terms)?;
    let mut mstar = Mat::zeros(n, n);
    for i in 0..r {
        mstar[(2 * i, 2 * i)] = 1.0;
    }
    TensorObjective::new(tensor, mstar)
}

/// The spurious factor of [`rankr_linear_example`]:
/// `Ũ = (1/√2)[e₂ e₄ ⋯ e₂ᵣ]`, so `M̃ = ½ Σ e_{2i}e_{2i}ᵀ`.
pub fn rankr_spurious_factor(r: usize, n: usize) -> Mat {
    let mut u = Mat::zeros(n, r);
    for i in 0..r {
        u[(2 * i + 1, i)] = 0.5_f64.sqrt();
    }
    u
}

/// The witness tuple behind the general-rank δ = ½ construction:
/// `α = 3/5, Σ = ½I_r, Λ = ¾I_r, A = B = 0, C = D = I_r`.
pub fn theorem_witness_example(r: usize) -> Result<SpuriousWitness> {
    if r == 0 {
        return Err(Error::Input("theorem_witness_example: r must be ≥ 1".into()));
    }
    SpuriousWitness::new_asymmetric(
        0.5,
        0.6,
        Mat::identity(r, r) * 0.5,
        Mat::identity(r, r) * 0.75,
        Mat::zeros(r, r),
        Mat::zeros(r, r),
        Mat::identity(r, r),
        Mat::identity(r, r),
    )
}

/// Interpolation `𝓗(θ) = 𝓘 + θ(𝓗_base − 𝓘)`: restricted-isometry deviations
/// scale linearly, `δ(θ) = θ·δ(base)`, with the ground truth kept fixed.
pub fn dialed_delta_family(base: &TensorObjective, theta: f64) -> Result<TensorObjective> {
    base.dial(theta)
}
