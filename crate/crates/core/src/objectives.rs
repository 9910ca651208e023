//! Objective-function abstraction: value, gradient, and the Hessian
//! quadratic/bilinear forms evaluated at a base point.
//!
//! The two concrete families live in [`crate::sensing`] (linear least-squares
//! sensing, base-point-independent Hessian) and [`crate::tensor`]
//! (constant-Hessian quadratics built from fourth-order outer-product
//! tensors). Both provide exact Hessian-vector products, which the RIP
//! estimator and the Hessian assembly rely on.

use crate::{frob_inner, Mat};

pub trait Objective: Send + Sync {
    /// Ambient dimensions `(n, m)` of the matrix variable.
    fn dims(&self) -> (usize, usize);

    /// Whether the objective is a symmetric-problem objective (acts on
    /// `n×n` symmetric matrices with a symmetric gradient).
    fn is_symmetric(&self) -> bool {
        false
    }

    fn value(&self, m: &Mat) -> f64;

    fn gradient(&self, m: &Mat) -> Mat;

    /// Hessian–vector product `∇²f(m)[k]`.
    fn hess_apply(&self, m: &Mat, k: &Mat) -> Mat;

    /// Bilinear Hessian form `[∇²f(m)](k, l)`.
    fn hess_bform(&self, m: &Mat, k: &Mat, l: &Mat) -> f64 {
        frob_inner(&self.hess_apply(m, k), l)
    }

    /// Quadratic Hessian form `[∇²f(m)](k, k)`.
    fn hess_qform(&self, m: &Mat, k: &Mat) -> f64 {
        self.hess_bform(m, k, k)
    }
}

/// Central-difference gradient of `obj.value` (test oracle; step
/// `h = 1e-5·(1 + ‖M‖_F)`).
pub fn fd_gradient(obj: &dyn Objective, m: &Mat) -> Mat {
    let h = 1e-5 * (1.0 + m.norm());
    let (n, mm) = m.shape();
    let mut g = Mat::zeros(n, mm);
    for i in 0..n {
        for j in 0..mm {
            let mut plus = m.clone();
            let mut minus = m.clone();
            plus[(i, j)] += h;
            minus[(i, j)] -= h;
            g[(i, j)] = (obj.value(&plus) - obj.value(&minus)) / (2.0 * h);
        }
    }
    g
}

/// Second-order central difference of `obj.value` along `k`, an oracle for
/// `hess_qform(m, k)`.
pub fn fd_hess_qform(obj: &dyn Objective, m: &Mat, k: &Mat) -> f64 {
    let h = 1e-4 * (1.0 + m.norm()) / k.norm().max(1e-12);
    let plus = obj.value(&(m + k * h));
    let minus = obj.value(&(m - k * h));
    (plus + minus - 2.0 * obj.value(m)) / (h * h)
}
