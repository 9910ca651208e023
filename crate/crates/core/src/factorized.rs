//! Factorized objectives over the Burer–Monteiro parameterization:
//! `h_a(U,V) = f_a(UVᵀ)`, the balance-regularized
//! `ρ(U,V) = h_a(U,V) + (μ/4)‖UᵀU − VᵀV‖²` and the symmetric
//! `h_s(U) = f_s(UUᵀ)`, together with gradients, Hessian quadratic forms,
//! Hessian–vector products and dense Hessian assembly.
//!
//! The Hessian quadratic forms are the exact second directional derivatives.
//! At balanced points (`UᵀU = VᵀV`, which every critical point of ρ
//! satisfies) the regularizer contribution reduces to
//! `(μ/2)‖UᵀΔ_U + Δ_UᵀU − VᵀΔ_V − Δ_VᵀV‖²`; away from balance the extra
//! curvature term `μ⟨UᵀU − VᵀV, Δ_UᵀΔ_U − Δ_VᵀΔ_V⟩` is included so finite
//! differences of ρ agree everywhere.

use crate::error::{Error, Result};
use crate::linalg::{FactorPair, SymOp};
use crate::objectives::Objective;
use crate::{frob_inner, Mat};
use nalgebra::DVector;

/// Size guard for dense Hessian assembly: total factor dimension
/// `(n + m)·r` (or `n·r` in the symmetric case).
pub const HESSIAN_ASSEMBLY_LIMIT: usize = 4000;

/// The balance-regularized asymmetric problem `min ρ(U, V)`.
pub struct RegularizedProblem<'a> {
    pub obj: &'a dyn Objective,
    pub mu: f64,
}

impl<'a> RegularizedProblem<'a> {
    pub fn new(obj: &'a dyn Objective, mu: f64) -> Result<Self> {
        if mu < 0.0 || !mu.is_finite() {
            return Err(Error::Input(format!("regularized problem: μ={mu} must be ≥ 0")));
        }
        Ok(RegularizedProblem { obj, mu })
    }
}

fn check_dims(obj: &dyn Objective, f: &FactorPair) -> Result<()> {
    let (n, m) = obj.dims();
    if f.u.nrows() != n || f.v.nrows() != m {
        return Err(Error::Input(format!(
            "factor pair ({}×{}, {}×{}) incompatible with objective dims ({n}, {m})",
            f.u.nrows(),
            f.rank(),
            f.v.nrows(),
            f.rank()
        )));
    }
    Ok(())
}

/// `ρ(U,V) = f_a(UVᵀ) + (μ/4)‖UᵀU − VᵀV‖²`.
pub fn rho_value(p: &RegularizedProblem, f: &FactorPair) -> Result<f64> {
    check_dims(p.obj, f)?;
    let balance = f.balance_residual();
    Ok(p.obj.value(&f.product()) + 0.25 * p.mu * balance * balance)
}

/// Gradient blocks `(∇_U ρ, ∇_V ρ)`:
/// `∇_U ρ = ∇f_a(M)V + μU(UᵀU − VᵀV)`,
/// `∇_V ρ = ∇f_a(M)ᵀU − μV(UᵀU − VᵀV)`.
pub fn rho_grad(p: &RegularizedProblem, f: &FactorPair) -> Result<(Mat, Mat)> {
    check_dims(p.obj, f)?;
    let m = f.product();
    let g = p.obj.gradient(&m);
    let x = f.u.transpose() * &f.u - f.v.transpose() * &f.v;
    let gu = &g * &f.v + &f.u * &x * p.mu;
    let gv = g.transpose() * &f.u - &f.v * &x * p.mu;
    Ok((gu, gv))
}

/// Exact second directional derivative of ρ along `(Δ_U, Δ_V)`.
pub fn rho_hess_qform(p: &RegularizedProblem, f: &FactorPair, du: &Mat, dv: &Mat) -> Result<f64> {
    check_dims(p.obj, f)?;
    if du.shape() != f.u.shape() || dv.shape() != f.v.shape() {
        return Err(Error::Input("rho_hess_qform: direction shape mismatch".into()));
    }
    let m = f.product();
    let g = p.obj.gradient(&m);
    let dm = du * f.v.transpose() + &f.u * dv.transpose();
    let mut q = 2.0 * frob_inner(&g, &(du * dv.transpose())) + p.obj.hess_qform(&m, &dm);
    if p.mu != 0.0 {
        let dx = f.u.transpose() * du + du.transpose() * &f.u
            - f.v.transpose() * dv
            - dv.transpose() * &f.v;
        let x = f.u.transpose() * &f.u - f.v.transpose() * &f.v;
        let cross = du.transpose() * du - dv.transpose() * dv;
        q += 0.5 * p.mu * dx.norm_squared() + p.mu * frob_inner(&x, &cross);
    }
    Ok(q)
}

/// Hessian–vector product of ρ at `(U, V)` applied to `(Δ_U, Δ_V)`.
pub fn rho_hess_apply(p: &RegularizedProblem, f: &FactorPair, du: &Mat, dv: &Mat) -> Result<(Mat, Mat)> {
    check_dims(p.obj, f)?;
    let m = f.product();
    let g = p.obj.gradient(&m);
    let dm = du * f.v.transpose() + &f.u * dv.transpose();
    let hdm = p.obj.hess_apply(&m, &dm);
    let mut hu = &hdm * &f.v + &g * dv;
    let mut hv = hdm.transpose() * &f.u + g.transpose() * du;
    if p.mu != 0.0 {
        let x = f.u.transpose() * &f.u - f.v.transpose() * &f.v;
        let dx = f.u.transpose() * du + du.transpose() * &f.u
            - f.v.transpose() * dv
            - dv.transpose() * &f.v;
        hu += (du * &x + &f.u * &dx) * p.mu;
        hv -= (dv * &x + &f.v * &dx) * p.mu;
    }
    Ok((hu, hv))
}

fn sym_gradient(obj: &dyn Objective, m: &Mat) -> Mat {
    let g = obj.gradient(m);
    (&g + g.transpose()) * 0.5
}

/// `h_s(U) = f_s(UUᵀ)`.
pub fn hs_value(obj: &dyn Objective, u: &Mat) -> Result<f64> {
    let m = u * u.transpose();
    if m.nrows() != obj.dims().0 {
        return Err(Error::Input("hs_value: dimension mismatch".into()));
    }
    Ok(obj.value(&m))
}

/// `∇h_s(U) = 2∇f_s(UUᵀ)U`, with the gradient symmetrized structurally.
pub fn hs_grad(obj: &dyn Objective, u: &Mat) -> Result<Mat> {
    let m = u * u.transpose();
    if m.nrows() != obj.dims().0 {
        return Err(Error::Input("hs_grad: dimension mismatch".into()));
    }
    Ok(sym_gradient(obj, &m) * u * 2.0)
}

/// `[∇²h_s(U)](Δ,Δ) = 2⟨∇f_s(UUᵀ), ΔΔᵀ⟩ + [∇²f_s(UUᵀ)](UΔᵀ+ΔUᵀ, UΔᵀ+ΔUᵀ)`.
pub fn hs_hess_qform(obj: &dyn Objective, u: &Mat, d: &Mat) -> Result<f64> {
    if d.shape() != u.shape() {
        return Err(Error::Input("hs_hess_qform: direction shape mismatch".into()));
    }
    let m = u * u.transpose();
    let g = sym_gradient(obj, &m);
    let dm = u * d.transpose() + d * u.transpose();
    Ok(2.0 * frob_inner(&g, &(d * d.transpose())) + obj.hess_qform(&m, &dm))
}

/// Hessian–vector product of `h_s`.
pub fn hs_hess_apply(obj: &dyn Objective, u: &Mat, d: &Mat) -> Result<Mat> {
    if d.shape() != u.shape() {
        return Err(Error::Input("hs_hess_apply: direction shape mismatch".into()));
    }
    let m = u * u.transpose();
    let g = sym_gradient(obj, &m);
    let dm = u * d.transpose() + d * u.transpose();
    let hdm = obj.hess_apply(&m, &dm);
    let hdm = (&hdm + hdm.transpose()) * 0.5;
    Ok((hdm * u + g * d) * 2.0)
}

/// A factorized problem: either the regularized asymmetric form or the
/// symmetric form. Unifies the solver and certification code paths.
pub enum FactorizedProblem<'a> {
    Asymmetric { obj: &'a dyn Objective, mu: f64 },
    Symmetric { obj: &'a dyn Objective },
}

impl<'a> FactorizedProblem<'a> {
    pub fn objective(&self) -> &'a dyn Objective {
        match self {
            FactorizedProblem::Asymmetric { obj, .. } => *obj,
            FactorizedProblem::Symmetric { obj } => *obj,
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            FactorizedProblem::Asymmetric { mu, .. } => *mu,
            FactorizedProblem::Symmetric { .. } => 0.0,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self, FactorizedProblem::Symmetric { .. })
    }

    /// Total factor dimension of the variable (`(n+m)r` or `nr`).
    pub fn var_dim(&self, r: usize) -> usize {
        let (n, m) = self.objective().dims();
        match self {
            FactorizedProblem::Asymmetric { .. } => (n + m) * r,
            FactorizedProblem::Symmetric { .. } => {
                debug_assert_eq!(n, m);
                n * r
            }
        }
    }

    pub fn value(&self, f: &FactorPair) -> Result<f64> {
        match self {
            FactorizedProblem::Asymmetric { obj, mu } => {
                rho_value(&RegularizedProblem { obj: *obj, mu: *mu }, f)
            }
            FactorizedProblem::Symmetric { obj } => hs_value(*obj, &f.u),
        }
    }

    /// Gradient in the same container shape as the variable. For symmetric
    /// problems only the `u` block is meaningful (`v` mirrors it).
    pub fn grad(&self, f: &FactorPair) -> Result<FactorPair> {
        match self {
            FactorizedProblem::Asymmetric { obj, mu } => {
                let (gu, gv) = rho_grad(&RegularizedProblem { obj: *obj, mu: *mu }, f)?;
                FactorPair::new(gu, gv)
            }
            FactorizedProblem::Symmetric { obj } => {
                let g = hs_grad(*obj, &f.u)?;
                FactorPair::new_symmetric(g)
            }
        }
    }

    pub fn grad_norm(&self, f: &FactorPair) -> Result<f64> {
        let g = self.grad(f)?;
        Ok(if self.is_symmetric() { g.u.norm() } else { g.stacked().norm() })
    }

    pub fn hess_qform(&self, f: &FactorPair, du: &Mat, dv: &Mat) -> Result<f64> {
        match self {
            FactorizedProblem::Asymmetric { obj, mu } => {
                rho_hess_qform(&RegularizedProblem { obj: *obj, mu: *mu }, f, du, dv)
            }
            FactorizedProblem::Symmetric { obj } => hs_hess_qform(*obj, &f.u, du),
        }
    }

    pub fn hess_apply(&self, f: &FactorPair, du: &Mat, dv: &Mat) -> Result<(Mat, Mat)> {
        match self {
            FactorizedProblem::Asymmetric { obj, mu } => {
                rho_hess_apply(&RegularizedProblem { obj: *obj, mu: *mu }, f, du, dv)
            }
            FactorizedProblem::Symmetric { obj } => {
                let h = hs_hess_apply(*obj, &f.u, du)?;
                Ok((h.clone(), h))
            }
        }
    }
}

/// Point-local Hessian evaluator: caches the product matrix, the ambient
/// gradient and the Gram imbalance so repeated Hessian–vector products at
/// one point skip the expensive ambient-gradient recomputation.
pub struct HessianAt<'a, 'b> {
    prob: &'b FactorizedProblem<'a>,
    point: &'b FactorPair,
    m: Mat,
    grad_m: Mat,
    x: Mat,
}

impl<'a, 'b> HessianAt<'a, 'b> {
    pub fn new(prob: &'b FactorizedProblem<'a>, point: &'b FactorPair) -> Result<Self> {
        check_dims(prob.objective(), point)?;
        let m = point.product();
        let grad_m = if prob.is_symmetric() {
            sym_gradient(prob.objective(), &m)
        } else {
            prob.objective().gradient(&m)
        };
        let x = point.u.transpose() * &point.u - point.v.transpose() * &point.v;
        Ok(HessianAt { prob, point, m, grad_m, x })
    }

    pub fn apply(&self, du: &Mat, dv: &Mat) -> (Mat, Mat) {
        let f = self.point;
        match self.prob {
            FactorizedProblem::Symmetric { obj } => {
                let dm = &f.u * du.transpose() + du * f.u.transpose();
                let hdm = obj.hess_apply(&self.m, &dm);
                let hdm = (&hdm + hdm.transpose()) * 0.5;
                let h = (hdm * &f.u + &self.grad_m * du) * 2.0;
                (h.clone(), h)
            }
            FactorizedProblem::Asymmetric { obj, mu } => {
                let dm = du * f.v.transpose() + &f.u * dv.transpose();
                let hdm = obj.hess_apply(&self.m, &dm);
                let mut hu = &hdm * &f.v + &self.grad_m * dv;
                let mut hv = hdm.transpose() * &f.u + self.grad_m.transpose() * du;
                if *mu != 0.0 {
                    let dx = f.u.transpose() * du + du.transpose() * &f.u
                        - f.v.transpose() * dv
                        - dv.transpose() * &f.v;
                    hu += (du * &self.x + &f.u * &dx) * *mu;
                    hv -= (dv * &self.x + &f.v * &dx) * *mu;
                }
                (hu, hv)
            }
        }
    }
}

/// Dense factorized Hessian at `f`, assembled column-by-column from
/// Hessian–vector products on coordinate directions and symmetrized.
/// Coordinates are column-major over `U` then (asymmetric case) over `V`.
pub fn assemble_hessian(p: &FactorizedProblem, f: &FactorPair) -> Result<Mat> {
    let r = f.rank();
    let dim = p.var_dim(r);
    if dim > HESSIAN_ASSEMBLY_LIMIT {
        return Err(Error::Capacity(format!(
            "hessian assembly dimension {dim} exceeds {HESSIAN_ASSEMBLY_LIMIT}; use the iterative λ_min path"
        )));
    }
    let (n, m) = p.objective().dims();
    let nu = n * r;
    let at = HessianAt::new(p, f)?;
    let mut h = Mat::zeros(dim, dim);
    for j in 0..dim {
        let (du, dv) = unit_direction(p, n, m, r, j);
        let (hu, hv) = at.apply(&du, &dv);
        let col = flatten(p, &hu, &hv, nu, dim);
        h.set_column(j, &col);
    }
    let h = (&h + h.transpose()) * 0.5;
    Ok(h)
}

fn unit_direction(p: &FactorizedProblem, n: usize, m: usize, r: usize, idx: usize) -> (Mat, Mat) {
    let mut du = Mat::zeros(n, r);
    let mut dv = Mat::zeros(m, r);
    let nu = n * r;
    if idx < nu {
        du[(idx % n, idx / n)] = 1.0;
    } else {
        dv[((idx - nu) % m, (idx - nu) / m)] = 1.0;
    }
    if p.is_symmetric() {
        (du.clone(), du)
    } else {
        (du, dv)
    }
}

fn flatten(p: &FactorizedProblem, hu: &Mat, hv: &Mat, nu: usize, dim: usize) -> DVector<f64> {
    let mut col = DVector::zeros(dim);
    for (k, x) in hu.iter().enumerate() {
        col[k] = *x;
    }
    if !p.is_symmetric() {
        for (k, x) in hv.iter().enumerate() {
            col[nu + k] = *x;
        }
    }
    col
}

/// Matrix-free view of the factorized Hessian for the Lanczos path.
pub struct FactorHessianOp<'a, 'b> {
    prob: &'b FactorizedProblem<'a>,
    point: &'b FactorPair,
    at: HessianAt<'a, 'b>,
}

impl<'a, 'b> FactorHessianOp<'a, 'b> {
    pub fn new(prob: &'b FactorizedProblem<'a>, point: &'b FactorPair) -> Result<Self> {
        Ok(FactorHessianOp { prob, point, at: HessianAt::new(prob, point)? })
    }
}

impl SymOp for FactorHessianOp<'_, '_> {
    fn dim(&self) -> usize {
        self.prob.var_dim(self.point.rank())
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let (n, m) = self.prob.objective().dims();
        let r = self.point.rank();
        let nu = n * r;
        let du = Mat::from_column_slice(n, r, &v.as_slice()[..nu]);
        let dv = if self.prob.is_symmetric() {
            du.clone()
        } else {
            Mat::from_column_slice(m, r, &v.as_slice()[nu..])
        };
        let (hu, hv) = self.at.apply(&du, &dv);
        flatten(self.prob, &hu, &hv, nu, self.dim())
    }
}

/// Smallest eigenvalue of the factorized Hessian: dense assembly below the
/// size guard, Lanczos on Hessian–vector products above it.
pub fn factor_hessian_lambda_min(p: &FactorizedProblem, f: &FactorPair) -> Result<f64> {
    match assemble_hessian(p, f) {
        Ok(h) => crate::linalg::lambda_min_sym(&h),
        Err(Error::Capacity(_)) => {
            let op = FactorHessianOp::new(p, f)?;
            Ok(crate::linalg::lambda_min_op(&op, 1e-8, 0))
        }
        Err(e) => Err(e),
    }
}
