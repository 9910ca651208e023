//! Reductions between the symmetric and asymmetric problem classes.
//!
//! Asymmetric → symmetric: for `N ∈ R^{(n+m)×(n+m)}` split into blocks
//! `N = [N₁₁ N₁₂; N₂₁ N₂₂]` and set `f̃(N) = f_a(N₁₂) + f_a(N₂₁ᵀ)` and
//! `g̃(N) = ‖N₁₁‖² + ‖N₂₂‖² − ‖N₁₂‖² − ‖N₂₁‖²`; then with `W = [U; V]`,
//! `f̃(WWᵀ) = 2h_a(U,V)` and `g̃(WWᵀ) = g(U,V)`, and the rescaled
//! `(2/(1+δ))·[f̃ + (μ/2)g̃]` with `μ = (1−δ)/2` has restricted-isometry
//! constant `2δ/(1+δ)`.
//!
//! Symmetric → asymmetric: `M ↦ f_s((M+Mᵀ)/2)`, completed by `½‖M−Mᵀ‖²/2`
//! on the skew part so the Hessian acts as the identity there. Without the
//! completion the quadratic form vanishes on skew directions and the
//! restricted-isometry band could not be preserved; with it the asymmetrized
//! objective keeps the base constants and still agrees with `f_s` on
//! symmetric inputs.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::Mat;
use std::sync::Arc;

/// Symmetric lift of an asymmetric objective (the rescaled regularized form).
pub struct LiftedSymObjective {
    base: Arc<dyn Objective>,
    mu: f64,
    scale: f64,
}

/// Builds the symmetric lift with `μ = (1−δ)/2` and rescaling `2/(1+δ)`.
pub fn lift_to_symmetric(base: Arc<dyn Objective>, delta: f64) -> Result<LiftedSymObjective> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!("lift_to_symmetric: δ={delta} outside [0, 1)")));
    }
    Ok(LiftedSymObjective {
        base,
        mu: (1.0 - delta) / 2.0,
        scale: 2.0 / (1.0 + delta),
    })
}

struct Blocks {
    n11: Mat,
    n12: Mat,
    n21: Mat,
    n22: Mat,
}

impl LiftedSymObjective {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn split(&self, big: &Mat) -> Blocks {
        let (n, m) = self.base.dims();
        Blocks {
            n11: big.view((0, 0), (n, n)).into_owned(),
            n12: big.view((0, n), (n, m)).into_owned(),
            n21: big.view((n, 0), (m, n)).into_owned(),
            n22: big.view((n, n), (m, m)).into_owned(),
        }
    }

    fn join(&self, b11: &Mat, b12: &Mat, b21: &Mat, b22: &Mat) -> Mat {
        let (n, m) = self.base.dims();
        let mut out = Mat::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(b11);
        out.view_mut((0, n), (n, m)).copy_from(b12);
        out.view_mut((n, 0), (m, n)).copy_from(b21);
        out.view_mut((n, n), (m, m)).copy_from(b22);
        out
    }

    /// Unregularized part `f̃(N) = f_a(N₁₂) + f_a(N₂₁ᵀ)`.
    pub fn ftilde(&self, big: &Mat) -> f64 {
        let b = self.split(big);
        self.base.value(&b.n12) + self.base.value(&b.n21.transpose())
    }

    /// Balance part `g̃(N) = ‖N₁₁‖² + ‖N₂₂‖² − ‖N₁₂‖² − ‖N₂₁‖²`.
    pub fn gtilde(&self, big: &Mat) -> f64 {
        let b = self.split(big);
        b.n11.norm_squared() + b.n22.norm_squared() - b.n12.norm_squared() - b.n21.norm_squared()
    }
}

impl Objective for LiftedSymObjective {
    fn dims(&self) -> (usize, usize) {
        let (n, m) = self.base.dims();
        (n + m, n + m)
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn value(&self, big: &Mat) -> f64 {
        self.scale * (self.ftilde(big) + 0.5 * self.mu * self.gtilde(big))
    }

    fn gradient(&self, big: &Mat) -> Mat {
        let b = self.split(big);
        let g12 = self.base.gradient(&b.n12);
        let g21 = self.base.gradient(&b.n21.transpose()).transpose();
        let out = self.join(
            &(&b.n11 * self.mu),
            &(g12 - &b.n12 * self.mu),
            &(g21 - &b.n21 * self.mu),
            &(&b.n22 * self.mu),
        );
        out * self.scale
    }

    fn hess_apply(&self, big: &Mat, k: &Mat) -> Mat {
        let nb = self.split(big);
        let kb = self.split(k);
        let h12 = self.base.hess_apply(&nb.n12, &kb.n12);
        let h21 = self
            .base
            .hess_apply(&nb.n21.transpose(), &kb.n21.transpose())
            .transpose();
        let out = self.join(
            &(&kb.n11 * self.mu),
            &(h12 - &kb.n12 * self.mu),
            &(h21 - &kb.n21 * self.mu),
            &(&kb.n22 * self.mu),
        );
        out * self.scale
    }
}

/// Asymmetric reading of a symmetric objective: acts through the symmetric
/// part of the argument, identity on the skew part.
pub struct AsymmetrizedObjective {
    base: Arc<dyn Objective>,
}

pub fn lift_to_asymmetric(base: Arc<dyn Objective>) -> Result<AsymmetrizedObjective> {
    let (n, m) = base.dims();
    if n != m {
        return Err(Error::Input("lift_to_asymmetric: base objective must be square".into()));
    }
    Ok(AsymmetrizedObjective { base })
}

fn sym_part(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

fn skew_part(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

impl Objective for AsymmetrizedObjective {
    fn dims(&self) -> (usize, usize) {
        self.base.dims()
    }

    fn value(&self, m: &Mat) -> f64 {
        self.base.value(&sym_part(m)) + 0.5 * skew_part(m).norm_squared()
    }

    fn gradient(&self, m: &Mat) -> Mat {
        let g = self.base.gradient(&sym_part(m));
        sym_part(&g) + skew_part(m)
    }

    fn hess_apply(&self, m: &Mat, k: &Mat) -> Mat {
        let h = self.base.hess_apply(&sym_part(m), &sym_part(k));
        sym_part(&h) + skew_part(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::rank1_example;
    use crate::factorized::{rho_value, RegularizedProblem};
    use crate::linalg::FactorPair;
    use crate::objectives::fd_gradient;
    use crate::rng::{gaussian_mat, stream_rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn lift_value_identities() {
        let obj = Arc::new(rank1_example(3).unwrap());
        let lifted = lift_to_symmetric(obj.clone(), 0.5).unwrap();
        let mut rng = stream_rng(31, 0);
        for _ in 0..10 {
            let u = gaussian_mat(3, 2, &mut rng);
            let v = gaussian_mat(3, 2, &mut rng);
            let f = FactorPair::new(u.clone(), v.clone()).unwrap();
            let w = f.stacked();
            let wwt = &w * w.transpose();

            // f̃(WWᵀ) = 2 h_a(U,V)
            let ha = obj.value(&f.product());
            assert_abs_diff_eq!(lifted.ftilde(&wwt), 2.0 * ha, epsilon = 1e-12 * ha.abs().max(1.0));

            // g̃(WWᵀ) = g(U,V)
            let g = f.balance_residual().powi(2);
            assert_abs_diff_eq!(lifted.gtilde(&wwt), g, epsilon = 1e-12 * g.max(1.0));
        }
    }

    #[test]
    fn lifted_gradient_matches_finite_differences() {
        let obj = Arc::new(rank1_example(2).unwrap());
        let lifted = lift_to_symmetric(obj, 0.3).unwrap();
        let mut rng = stream_rng(32, 0);
        let big = gaussian_mat(4, 4, &mut rng);
        let g = lifted.gradient(&big);
        let fd = fd_gradient(&lifted, &big);
        assert!((g - &fd).norm() / fd.norm().max(1.0) <= 1e-6);
    }

    #[test]
    fn lifted_qform_respects_the_band_for_known_delta() {
        // dialed tensor with exactly known constant δ = 0.2
        let base = rank1_example(3).unwrap().dial(0.4).unwrap();
        let delta = 0.2;
        let lifted = lift_to_symmetric(Arc::new(base), delta).unwrap();
        let mu = lifted.mu();
        let lo = (1.0 - delta - mu).min(mu);
        let hi = (1.0 + delta - mu).max(mu);
        let mut rng = stream_rng(33, 0);
        for _ in 0..50 {
            let w = gaussian_mat(6, 2, &mut rng);
            let k = &w * gaussian_mat(2, 6, &mut rng); // rank ≤ 2 probe
            let q = lifted.hess_qform(&Mat::zeros(6, 6), &k) / lifted.scale();
            let n2 = k.norm_squared();
            assert!(q >= lo * n2 - 1e-9 && q <= hi * n2 + 1e-9);
        }
    }

    #[test]
    fn asymmetrized_value_agrees_on_symmetric_inputs() {
        let base = Arc::new(rank1_example(3).unwrap());
        let asym = lift_to_asymmetric(base.clone()).unwrap();
        let mut rng = stream_rng(34, 0);
        let raw = gaussian_mat(3, 3, &mut rng);
        let s = (&raw + raw.transpose()) * 0.5;
        assert_abs_diff_eq!(asym.value(&s), base.value(&s), epsilon = 1e-13);
    }

    #[test]
    fn asymmetrized_gradient_matches_finite_differences() {
        let base = Arc::new(rank1_example(3).unwrap());
        let asym = lift_to_asymmetric(base).unwrap();
        let mut rng = stream_rng(35, 0);
        let m = gaussian_mat(3, 3, &mut rng);
        let g = asym.gradient(&m);
        let fd = fd_gradient(&asym, &m);
        assert!((g - &fd).norm() / fd.norm().max(1.0) <= 1e-6);
    }

    #[test]
    fn asymmetrized_preserves_the_deviation_band() {
        // base: dialed rank-1 tensor with known δ = 0.3; the asymmetrized
        // objective must keep every rank-2 Rayleigh quotient inside
        // [1−δ, 1+δ]
        let base = rank1_example(3).unwrap().dial(0.6).unwrap();
        let asym = lift_to_asymmetric(Arc::new(base)).unwrap();
        let mut rng = stream_rng(36, 0);
        let z = Mat::zeros(3, 3);
        for _ in 0..100 {
            let k = gaussian_mat(3, 2, &mut rng) * gaussian_mat(2, 3, &mut rng);
            let ratio = asym.hess_qform(&z, &k) / k.norm_squared();
            assert!(ratio >= 0.7 - 1e-9 && ratio <= 1.3 + 1e-9, "ratio {ratio}");
        }
    }

    #[test]
    fn asymmetrized_rip_estimate_matches_base() {
        // base: dialed rank-1 tensor with exact constant δ = 0.3
        let base = rank1_example(3).unwrap().dial(0.6).unwrap();
        let base_delta = crate::estimate::rip_estimate(&base, 2, 32, 48, 0).unwrap();
        let asym = lift_to_asymmetric(Arc::new(base)).unwrap();
        let asym_delta = crate::estimate::rip_estimate(&asym, 2, 32, 48, 0).unwrap();
        assert!((asym_delta - base_delta).abs() <= 0.02, "base {base_delta}, asymmetrized {asym_delta}");
    }

    #[test]
    fn lifted_value_relates_to_rho() {
        // F(WWᵀ) = 2[h_a + (μ/4)g] = 2 ρ_μ(U,V) before rescaling
        let obj = Arc::new(rank1_example(2).unwrap());
        let delta = 0.5;
        let lifted = lift_to_symmetric(obj.clone(), delta).unwrap();
        let prob = RegularizedProblem { obj: obj.as_ref(), mu: lifted.mu() };
        let mut rng = stream_rng(37, 0);
        let f = FactorPair::new(gaussian_mat(2, 1, &mut rng), gaussian_mat(2, 1, &mut rng)).unwrap();
        let w = f.stacked();
        let wwt = &w * w.transpose();
        let unscaled = lifted.value(&wwt) / lifted.scale();
        assert_abs_diff_eq!(unscaled, 2.0 * rho_value(&prob, &f).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn delta_domain_checked() {
        let obj = Arc::new(rank1_example(2).unwrap());
        assert!(lift_to_symmetric(obj.clone(), 1.0).is_err());
        assert!(lift_to_symmetric(obj, -0.1).is_err());
    }
}
