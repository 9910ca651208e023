//! Certification of criticality and landscape properties: first/second-order
//! reports, fixed-point checks for the projected method, the
//! spurious-point witness conditions with their constructive converse, and
//! the correlation bound for the intermediate isometry regime.

use crate::error::{Error, Result};
use crate::factorized::{factor_hessian_lambda_min, FactorizedProblem};
use crate::linalg::{balanced_factorize, procrustes_distance, sigma_r, FactorPair};
use crate::objectives::Objective;
use crate::tensor::{OuterTensor, TensorObjective};
use crate::{ensure_finite, frob_inner, Mat};

/// Absolute tolerance for the witness equality condition (witness entries
/// are exact rationals in practice).
pub const WITNESS_EQ_TOL: f64 = 1e-9;

/// Absolute tolerance for the sufficiency flags `CBᵀ = 0`, `ADᵀ = 0`.
pub const WITNESS_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessVariant {
    Asymmetric,
    Symmetric,
}

/// The finite-dimensional witness tuple `(δ, α, Σ, Λ, A, B, C, D)` whose
/// feasibility characterizes the possible existence of spurious second-order
/// critical points at a given isometry constant. The symmetric variant
/// stores `B := A` and `D := C`.
#[derive(Debug, Clone)]
pub struct SpuriousWitness {
    pub delta: f64,
    pub alpha: f64,
    /// Diagonal `r×r`, required positive definite.
    pub sigma: Mat,
    /// Diagonal `(ℓ−r)×(ℓ−r)`; required PSD in the asymmetric variant only.
    pub lambda: Mat,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub variant: WitnessVariant,
}

fn check_diagonal(m: &Mat, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Input(format!("{what} must be square")));
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)] != 0.0 {
                return Err(Error::Input(format!("{what} must be diagonal")));
            }
        }
    }
    Ok(())
}

impl SpuriousWitness {
    #[allow(clippy::too_many_arguments)]
    pub fn new_asymmetric(
        delta: f64,
        alpha: f64,
        sigma: Mat,
        lambda: Mat,
        a: Mat,
        b: Mat,
        c: Mat,
        d: Mat,
    ) -> Result<Self> {
        let w = SpuriousWitness { delta, alpha, sigma, lambda, a, b, c, d, variant: WitnessVariant::Asymmetric };
        w.validate()?;
        Ok(w)
    }

    pub fn new_symmetric(delta: f64, alpha: f64, sigma: Mat, lambda: Mat, a: Mat, c: Mat) -> Result<Self> {
        let w = SpuriousWitness {
            delta,
            alpha,
            sigma,
            lambda,
            b: a.clone(),
            d: c.clone(),
            a,
            c,
            variant: WitnessVariant::Symmetric,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn r(&self) -> usize {
        self.sigma.nrows()
    }

    /// `ℓ − r`, the trailing block size.
    pub fn tail(&self) -> usize {
        self.lambda.nrows()
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::Input(format!("witness: δ={} outside [0, 1)", self.delta)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Input("witness: α must be finite".into()));
        }
        check_diagonal(&self.sigma, "witness Σ")?;
        check_diagonal(&self.lambda, "witness Λ")?;
        let r = self.r();
        let t = self.tail();
        for (m, what, shape) in [
            (&self.a, "A", (r, r)),
            (&self.b, "B", (r, r)),
            (&self.c, "C", (t, r)),
            (&self.d, "D", (t, r)),
        ] {
            if m.shape() != shape {
                return Err(Error::Input(format!(
                    "witness {what}: shape {:?}, expected {shape:?}",
                    m.shape()
                )));
            }
            ensure_finite(m, "witness block")?;
        }
        Ok(())
    }
}

/// One witness condition with its measured slack (≥ 0 means satisfied; for
/// the equality condition `slack` holds the absolute residual).
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConditionCheck {
    pub pass: bool,
    pub slack: f64,
}

/// Per-condition feasibility report for a witness tuple.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WitnessReport {
    pub variant: WitnessVariant,
    /// `α ∈ (1−δ, (1+δ)/2]`; empty whenever `δ ≤ 1/3`.
    pub alpha_interval: ConditionCheck,
    /// `(1+δ)·min Σᵢᵢ ≥ max Λᵢᵢ`.
    pub spectral: ConditionCheck,
    /// `Σ ≻ 0`.
    pub sigma_positive: ConditionCheck,
    /// `Λ ⪰ 0` (asymmetric variant only; trivially true otherwise).
    pub lambda_psd: ConditionCheck,
    /// `⟨Λ, CDᵀ⟩ = α[tr(Σ²) − 2⟨Σ, ABᵀ⟩ + …]` to 1e-9 absolute.
    pub equality: ConditionCheck,
    /// `tr(Λ²) ≤ α⁻¹(2α − 1 + δ²)·⟨Λ, CDᵀ⟩`.
    pub trace_bound: ConditionCheck,
    /// `⟨Λ, CDᵀ⟩ ≠ 0`.
    pub inner_nonzero: ConditionCheck,
    /// Sufficiency flags: `CBᵀ = 0` and `ADᵀ = 0` (`ACᵀ = 0` symmetric).
    pub sufficiency_cb: bool,
    pub sufficiency_ad: bool,
    pub feasible: bool,
}

impl WitnessReport {
    pub fn sufficient(&self) -> bool {
        self.feasible && self.sufficiency_cb && self.sufficiency_ad
    }
}

/// Evaluates every witness condition. The α-interval is checked first: for
/// `δ ≤ 1/3` it is empty (`1−δ ≥ (1+δ)/2`) and no witness is feasible.
pub fn witness_check(w: &SpuriousWitness) -> WitnessReport {
    let (delta, alpha) = (w.delta, w.alpha);
    let lo = 1.0 - delta;
    let hi = (1.0 + delta) / 2.0;
    let alpha_interval = ConditionCheck {
        pass: alpha > lo && alpha <= hi,
        slack: (alpha - lo).min(hi - alpha),
    };

    let min_sigma = (0..w.r()).map(|i| w.sigma[(i, i)]).fold(f64::INFINITY, f64::min);
    let max_lambda = (0..w.tail()).map(|i| w.lambda[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let spectral = ConditionCheck {
        pass: (1.0 + delta) * min_sigma >= max_lambda,
        slack: (1.0 + delta) * min_sigma - max_lambda,
    };
    let sigma_positive = ConditionCheck { pass: min_sigma > 0.0, slack: min_sigma };
    let min_lambda = (0..w.tail()).map(|i| w.lambda[(i, i)]).fold(f64::INFINITY, f64::min);
    let lambda_psd = match w.variant {
        WitnessVariant::Asymmetric => ConditionCheck { pass: min_lambda >= 0.0, slack: min_lambda },
        WitnessVariant::Symmetric => ConditionCheck { pass: true, slack: 0.0 },
    };

    let cd = &w.c * w.d.transpose();
    let inner_cd = frob_inner(&w.lambda, &cd);
    let ab = &w.a * w.b.transpose();
    let quadratic = w.sigma.norm_squared() - 2.0 * frob_inner(&w.sigma, &ab)
        + ab.norm_squared()
        + (&w.a * w.d.transpose()).norm_squared()
        + (&w.c * w.b.transpose()).norm_squared()
        + cd.norm_squared();
    let eq_residual = inner_cd - alpha * quadratic;
    let equality = ConditionCheck { pass: eq_residual.abs() <= WITNESS_EQ_TOL, slack: eq_residual.abs() };

    let tr_l2 = w.lambda.norm_squared();
    let bound = (2.0 * alpha - 1.0 + delta * delta) / alpha * inner_cd;
    let trace_bound = ConditionCheck { pass: tr_l2 <= bound + WITNESS_EQ_TOL, slack: bound - tr_l2 };

    let inner_nonzero = ConditionCheck { pass: inner_cd.abs() > WITNESS_ZERO_TOL, slack: inner_cd.abs() };

    let sufficiency_cb = (&w.c * w.b.transpose()).norm() <= WITNESS_ZERO_TOL;
    let sufficiency_ad = (&w.a * w.d.transpose()).norm() <= WITNESS_ZERO_TOL;

    let feasible = alpha_interval.pass
        && spectral.pass
        && sigma_positive.pass
        && lambda_psd.pass
        && equality.pass
        && trace_bound.pass
        && inner_nonzero.pass;

    WitnessReport {
        variant: w.variant,
        alpha_interval,
        spectral,
        sigma_positive,
        lambda_psd,
        equality,
        trace_bound,
        inner_nonzero,
        sufficiency_cb,
        sufficiency_ad,
        feasible,
    }
}

/// Output of [`witness_construct_objective`].
pub struct WitnessConstruction {
    pub objective: TensorObjective,
    pub mtilde: Mat,
    pub mstar: Mat,
    /// Eigenvalues of the core tensor on `span{M̃−M*, G̃}`; both lie in
    /// `[1−δ, 1+δ]`.
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Builds a constant-Hessian objective realizing a feasible witness with the
/// sufficiency flags set: the returned objective has isometry constant `δ`
/// on the relevant rank range, global minimum `M*`, and a spurious
/// second-order critical point at `M̃`.
///
/// The tensor is stored as `(1+δ)𝓘 + (λ₁−(1+δ))G₁⊗G₁ + (λ₂−(1+δ))G₂⊗G₂`,
/// which equals the full orthonormal-basis sum without materializing it.
/// Frames are fixed to standard-basis columns for determinism.
pub fn witness_construct_objective(w: &SpuriousWitness, n: usize, m: usize) -> Result<WitnessConstruction> {
    let r = w.r();
    if w.tail() != r {
        return Err(Error::Input(format!(
            "constructor requires the ℓ = 2r witness shape (tail {} ≠ r = {r})",
            w.tail()
        )));
    }
    if n < 2 * r || m < 2 * r {
        return Err(Error::Input(format!("constructor needs n, m ≥ 2r = {}", 2 * r)));
    }
    if w.variant == WitnessVariant::Symmetric && n != m {
        return Err(Error::Input("symmetric witness construction needs n = m".into()));
    }
    let report = witness_check(w);
    if !report.feasible {
        return Err(Error::Input("witness_construct_objective: witness fails the feasibility conditions".into()));
    }
    if !report.sufficient() {
        return Err(Error::Input(
            "witness_construct_objective: sufficiency flags CBᵀ = 0, ADᵀ = 0 are not satisfied".into(),
        ));
    }

    // embeddings with standard-basis frames
    let mut mtilde = Mat::zeros(n, m);
    for i in 0..r {
        mtilde[(i, i)] = w.sigma[(i, i)];
    }
    let mut mstar = Mat::zeros(n, m);
    let ab = &w.a * w.b.transpose();
    let ad = &w.a * w.d.transpose();
    let cb = &w.c * w.b.transpose();
    let cd = &w.c * w.d.transpose();
    for i in 0..r {
        for j in 0..r {
            mstar[(i, j)] = ab[(i, j)];
            mstar[(i, r + j)] = ad[(i, j)];
            mstar[(r + i, j)] = cb[(i, j)];
            mstar[(r + i, r + j)] = cd[(i, j)];
        }
    }
    let mut grad = Mat::zeros(n, m);
    for i in 0..r {
        grad[(r + i, r + i)] = -w.lambda[(i, i)];
    }

    let diff = &mtilde - &mstar;
    let gtilde = &grad - &diff * w.alpha;
    let d_norm = diff.norm();
    let g_norm = gtilde.norm();
    if g_norm <= 1e-14 * d_norm.max(1.0) {
        return Err(Error::Construction("witness construction degenerate: G̃ = 0".into()));
    }

    // the core tensor restricted to span{M̃−M*, G̃} is the 2×2 form
    // [[α, g], [g, 2−α]] with g = ‖G̃‖/‖M̃−M*‖
    let e1 = &diff / d_norm;
    let e2 = &gtilde / g_norm;
    let g = g_norm / d_norm;
    let core = Mat::from_row_slice(2, 2, &[w.alpha, g, g, 2.0 - w.alpha]);
    let eig = nalgebra::SymmetricEigen::new(core);
    let (l1, l2) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let g1 = &e1 * eig.eigenvectors[(0, 0)] + &e2 * eig.eigenvectors[(1, 0)];
    let g2 = &e1 * eig.eigenvectors[(0, 1)] + &e2 * eig.eigenvectors[(1, 1)];

    let c0 = 1.0 + w.delta;
    let tensor = OuterTensor::new(
        n,
        m,
        c0,
        vec![(l1 - c0, g1.clone(), g1), (l2 - c0, g2.clone(), g2)],
    )?;
    let objective = TensorObjective::new(tensor, mstar.clone())?;
    Ok(WitnessConstruction { objective, mtilde, mstar, lambda1: l1, lambda2: l2 })
}

/// Point classification used by [`criticality_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    NearGlobal,
    StrictSaddle,
    SpuriousSospCandidate,
}

/// Certification numbers for one factorized point.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CriticalityReport {
    /// `‖∇f(M)ᵀU‖_F`.
    pub grad_res_u: f64,
    /// `‖∇f(M)V‖_F`.
    pub grad_res_v: f64,
    /// `‖UᵀU − VᵀV‖_F`.
    pub balance_residual: f64,
    /// Full problem gradient norm (`‖∇ρ‖` or `‖∇h_s‖`).
    pub problem_grad_norm: f64,
    pub sigma_r: f64,
    /// `‖∇f(M)‖₂` (asymmetric) or `−λ_min(∇f_s(M))` (symmetric).
    pub grad_spectral: f64,
    pub hessian_lambda_min: f64,
    /// Distance to the ground-truth orbit in factor space.
    pub dist_to_orbit: f64,
    /// `⟨M, M*⟩/(‖M‖·‖M*‖)`, when both are nonzero.
    pub correlation: Option<f64>,
    pub value_gap: f64,
    pub classification: Classification,
}

/// Evaluates first- and second-order criticality of `(U, V)` against the
/// ground truth. A point is a spurious-SOSP candidate when the gradient is
/// below `tol_grad`, the factorized Hessian is PSD up to `tol_eig`, and the
/// objective sits strictly above the global level.
pub fn criticality_report(
    prob: &FactorizedProblem,
    f: &FactorPair,
    mstar: &Mat,
    tol_grad: f64,
    tol_eig: f64,
) -> Result<CriticalityReport> {
    let obj = prob.objective();
    let m = f.product();
    let g = obj.gradient(&m);
    let grad_res_u = (g.transpose() * &f.u).norm();
    let grad_res_v = (&g * &f.v).norm();
    let balance_residual = f.balance_residual();
    let problem_grad_norm = prob.grad_norm(f)?;
    let r = f.rank().min(m.nrows().min(m.ncols()));
    let sr = sigma_r(&m, r)?;

    let grad_spectral = if prob.is_symmetric() {
        let sym = (&g + g.transpose()) * 0.5;
        -crate::linalg::lambda_min_sym(&sym)?
    } else {
        crate::linalg::spectral_norm(&g)
    };

    let hessian_lambda_min = factor_hessian_lambda_min(prob, f)?;

    let dist_to_orbit = if prob.is_symmetric() {
        let star = balanced_factorize(mstar, f.rank())?;
        procrustes_distance(&f.u, &star.u)?
    } else {
        let star = balanced_factorize(mstar, f.rank())?;
        procrustes_distance(&f.stacked(), &star.stacked())?
    };

    let correlation = if m.norm() > 0.0 && mstar.norm() > 0.0 {
        Some(frob_inner(&m, mstar) / (m.norm() * mstar.norm()))
    } else {
        None
    };

    let value_gap = prob.value(f)? - obj.value(mstar);

    let classification = if value_gap <= tol_grad {
        Classification::NearGlobal
    } else if problem_grad_norm <= tol_grad && hessian_lambda_min >= -tol_eig {
        Classification::SpuriousSospCandidate
    } else {
        Classification::StrictSaddle
    };

    Ok(CriticalityReport {
        grad_res_u,
        grad_res_v,
        balance_residual,
        problem_grad_norm,
        sigma_r: sr,
        grad_spectral,
        hessian_lambda_min,
        dist_to_orbit,
        correlation,
        value_gap,
        classification,
    })
}

/// Fixed-point test for the projected method with step `1/(1+δ)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FixedPointReport {
    pub res_u: f64,
    pub res_v: f64,
    /// `(1+δ)σ_r(M̃) − ‖∇f(M̃)‖₂` (asymmetric) or
    /// `(1+δ)σ_r(Ũ) + λ_min(∇f_s(M̃))` (symmetric).
    pub spectral_margin: f64,
    pub is_fixed_point: bool,
}

pub fn svp_fixed_point_check(
    obj: &dyn Objective,
    mtilde: &Mat,
    r: usize,
    delta: f64,
    manifold: crate::solvers::Manifold,
) -> Result<FixedPointReport> {
    let g = obj.gradient(mtilde);
    let (res_u, res_v, spectral_margin) = match manifold {
        crate::solvers::Manifold::Asymmetric => {
            let f = balanced_factorize(mtilde, r)?;
            let res_u = (g.transpose() * &f.u).norm();
            let res_v = (&g * &f.v).norm();
            let margin = (1.0 + delta) * sigma_r(mtilde, r)? - crate::linalg::spectral_norm(&g);
            (res_u, res_v, margin)
        }
        crate::solvers::Manifold::Symmetric => {
            let f = balanced_factorize(mtilde, r)?;
            let res = (&((&g + g.transpose()) * 0.5) * &f.u).norm();
            // σ_r(Ũ) = √σ_r(M̃) for the PSD factor
            let sigma_u = sigma_r(mtilde, r)?.max(0.0).sqrt();
            let lam_min = crate::linalg::lambda_min_sym(&((&g + g.transpose()) * 0.5))?;
            let margin = (1.0 + delta) * sigma_u + lam_min;
            (res, res, margin)
        }
    };
    Ok(FixedPointReport {
        res_u,
        res_v,
        spectral_margin,
        is_fixed_point: res_u <= 1e-8 && res_v <= 1e-8 && spectral_margin >= -1e-10,
    })
}

/// The universal correlation bound `C(δ)` for `δ ∈ (0, 1/2)`: every
/// second-order critical point correlates with the ground truth at least
/// this much. Computed by minimizing `√(1 − 1/(1+η²))` with
/// `η = (1 + C₁ − √(C₁C₂))/√C₂`, `C₁ = (δ² − (1−α)²)/α²` (clamped at 0) and
/// `C₂ = (1+δ)²/α²` over a 1024-point α-grid on `[1−δ, (1+δ)/2]`, capped at
/// `1/3`.
pub fn correlation_bound(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Domain(format!("correlation_bound: δ={delta} outside (0, 1/2)")));
    }
    const GRID: usize = 1024;
    let lo = 1.0 - delta;
    let hi = (1.0 + delta) / 2.0;
    let mut best = f64::INFINITY;
    for k in 0..GRID {
        let alpha = lo + (hi - lo) * (k as f64) / ((GRID - 1) as f64);
        let c1 = ((delta * delta - (1.0 - alpha) * (1.0 - alpha)) / (alpha * alpha)).max(0.0);
        let c2 = (1.0 + delta) * (1.0 + delta) / (alpha * alpha);
        let eta = (1.0 + c1 - (c1 * c2).sqrt()) / c2.sqrt();
        let val = (1.0 - 1.0 / (1.0 + eta * eta)).sqrt();
        best = best.min(val);
    }
    Ok(best.min(1.0 / 3.0))
}

/// Normalized correlation `⟨M̃, M*⟩ / (‖M̃‖·‖M*‖) ∈ [−1, 1]`.
pub fn correlation_measure(mtilde: &Mat, mstar: &Mat) -> Result<f64> {
    ensure_finite(mtilde, "correlation M̃")?;
    ensure_finite(mstar, "correlation M*")?;
    let (nt, ns) = (mtilde.norm(), mstar.norm());
    if nt == 0.0 || ns == 0.0 {
        return Err(Error::Domain("correlation_measure: zero input".into()));
    }
    Ok((frob_inner(mtilde, mstar) / (nt * ns)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::{rank1_example, rank1_spurious_factor, theorem_witness_example};
    use crate::rng::{gaussian_mat, stream_rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn example_witness_is_feasible_with_sufficiency() {
        for r in 1..=3 {
            let w = theorem_witness_example(r).unwrap();
            let rep = witness_check(&w);
            assert!(rep.feasible, "r={r}: {rep:?}");
            assert!(rep.sufficient());
            // equality line: ⟨Λ,CDᵀ⟩ = (3/4)r on both sides
            assert!(rep.equality.slack <= 1e-12);
            // trace line is tight: slack 0
            assert!(rep.trace_bound.slack.abs() <= 1e-12);
        }
    }

    #[test]
    fn any_witness_below_one_third_is_infeasible() {
        let mut w = theorem_witness_example(2).unwrap();
        for &delta in &[0.0, 0.1, 0.2, 0.3, 1.0 / 3.0] {
            w.delta = delta;
            for &alpha in &[0.1, 0.5, 2.0 / 3.0, 0.9, 1.0] {
                w.alpha = alpha;
                let rep = witness_check(&w);
                assert!(!rep.alpha_interval.pass || delta > 1.0 / 3.0);
                assert!(!rep.feasible);
            }
        }
    }

    #[test]
    fn scaled_lambda_breaks_the_trace_bound() {
        let mut w = theorem_witness_example(2).unwrap();
        w.lambda = Mat::identity(2, 2) * 1.5;
        let rep = witness_check(&w);
        assert!(!rep.trace_bound.pass);
    }

    #[test]
    fn construction_matches_hand_computation() {
        let w = theorem_witness_example(2).unwrap();
        let c = witness_construct_objective(&w, 4, 4).unwrap();
        // λ ∈ {0.5, 1.5} exactly for this witness
        let (lo, hi) = (c.lambda1.min(c.lambda2), c.lambda1.max(c.lambda2));
        assert_abs_diff_eq!(lo, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.5, epsilon = 1e-12);

        // ∇f(M̃) = G = diag(0, 0, −¾, −¾)
        let g = c.objective.gradient(&c.mtilde);
        let mut expected = Mat::zeros(4, 4);
        expected[(2, 2)] = -0.75;
        expected[(3, 3)] = -0.75;
        assert!((g - expected).norm() <= 1e-12);

        // f(M̃) = α/2·‖M̃−M*‖² = 0.75 > f(M*) = 0
        assert_abs_diff_eq!(c.objective.value(&c.mtilde), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(c.objective.value(&c.mstar), 0.0, epsilon = 1e-15);

        // disjoint supports
        assert_eq!(frob_inner(&c.mtilde, &c.mstar), 0.0);
    }

    #[test]
    fn construction_first_and_second_order_conditions() {
        let w = theorem_witness_example(2).unwrap();
        let c = witness_construct_objective(&w, 4, 4).unwrap();
        let f = balanced_factorize(&c.mtilde, 2).unwrap();
        let g = c.objective.gradient(&c.mtilde);
        assert!((g.transpose() * &f.u).norm() <= 1e-10);
        assert!((&g * &f.v).norm() <= 1e-10);

        let prob = FactorizedProblem::Asymmetric { obj: &c.objective, mu: 0.0 };
        let lam = factor_hessian_lambda_min(&prob, &f).unwrap();
        assert!(lam >= -1e-9, "λ_min = {lam}");

        let rep = criticality_report(&prob, &f, &c.mstar, 1e-8, 1e-9).unwrap();
        assert_eq!(rep.classification, Classification::SpuriousSospCandidate);
    }

    #[test]
    fn construction_refuses_without_sufficiency() {
        let mut w = theorem_witness_example(2).unwrap();
        // break the sufficiency flags while keeping shapes: A = ε·I makes ADᵀ ≠ 0
        w.a = Mat::identity(2, 2) * 1e-3;
        w.b = Mat::zeros(2, 2);
        assert!(witness_construct_objective(&w, 4, 4).is_err());
    }

    #[test]
    fn criticality_of_rank1_counterexample() {
        let obj = rank1_example(3).unwrap();
        let u = rank1_spurious_factor(3);
        let f = FactorPair::new(u.clone(), u).unwrap();
        let prob = FactorizedProblem::Asymmetric { obj: &obj, mu: 0.1 };
        let rep = criticality_report(&prob, &f, obj.mstar(), 1e-10, 1e-10).unwrap();
        assert_eq!(rep.classification, Classification::SpuriousSospCandidate);
        assert!(rep.grad_res_u <= 1e-12 && rep.grad_res_v <= 1e-12);
        assert_abs_diff_eq!(rep.value_gap, 0.375, epsilon = 1e-12);

        // global factor classifies near-global
        let star = balanced_factorize(obj.mstar(), 1).unwrap();
        let rep_star = criticality_report(&prob, &star, obj.mstar(), 1e-10, 1e-10).unwrap();
        assert_eq!(rep_star.classification, Classification::NearGlobal);

        // random point: neither tolerance holds
        let rnd = FactorPair::new(
            gaussian_mat(3, 1, &mut stream_rng(50, 0)),
            gaussian_mat(3, 1, &mut stream_rng(50, 1)),
        )
        .unwrap();
        let rep_rnd = criticality_report(&prob, &rnd, obj.mstar(), 1e-10, 1e-10).unwrap();
        assert_eq!(rep_rnd.classification, Classification::StrictSaddle);
    }

    #[test]
    fn rank1_counterexample_is_spurious_in_both_readings() {
        // the same tensor certifies as a spurious second-order point both as
        // a symmetric problem at Ũ = e₂/√2 and as the asymmetric problem at
        // (Ũ, Ũ)
        let obj = rank1_example(4).unwrap();
        let u = rank1_spurious_factor(4);

        let sym_prob = FactorizedProblem::Symmetric { obj: &obj };
        let f_sym = FactorPair::new_symmetric(u.clone()).unwrap();
        let rep_sym = criticality_report(&sym_prob, &f_sym, obj.mstar(), 1e-10, 1e-10).unwrap();
        assert_eq!(rep_sym.classification, Classification::SpuriousSospCandidate);
        assert!(rep_sym.hessian_lambda_min >= -1e-10);

        let asym_prob = FactorizedProblem::Asymmetric { obj: &obj, mu: 0.0 };
        let f_asym = FactorPair::new(u.clone(), u).unwrap();
        let rep_asym = criticality_report(&asym_prob, &f_asym, obj.mstar(), 1e-10, 1e-10).unwrap();
        assert_eq!(rep_asym.classification, Classification::SpuriousSospCandidate);
    }

    #[test]
    fn classification_is_orbit_invariant() {
        let obj = crate::counterexamples::rankr_linear_example(2, 4).unwrap();
        let u = crate::counterexamples::rankr_spurious_factor(2, 4);
        let f = FactorPair::new(u.clone(), u.clone()).unwrap();
        let prob = FactorizedProblem::Asymmetric { obj: &obj, mu: 0.2 };
        let rep1 = criticality_report(&prob, &f, obj.mstar(), 1e-10, 1e-9).unwrap();

        // rotate by an orthogonal R
        let g = gaussian_mat(2, 2, &mut stream_rng(51, 0));
        let r = g.qr().q();
        let rotated = FactorPair::new(&u * &r, &u * &r).unwrap();
        let rep2 = criticality_report(&prob, &rotated, obj.mstar(), 1e-10, 1e-9).unwrap();
        assert_eq!(rep1.classification, rep2.classification);
        assert_abs_diff_eq!(rep1.dist_to_orbit, rep2.dist_to_orbit, epsilon = 1e-9);
    }

    #[test]
    fn fixed_point_check_on_the_symmetric_counterexample() {
        let obj = rank1_example(3).unwrap();
        let u = rank1_spurious_factor(3);
        let mtilde = &u * u.transpose();
        // δ = ½: ‖∇f‖₂ = ¾ ≤ 1.5·σ_r(Ũ) = 1.5/√2 ≈ 1.06 → fixed point
        let rep = svp_fixed_point_check(&obj, &mtilde, 1, 0.5, crate::solvers::Manifold::Symmetric).unwrap();
        assert!(rep.is_fixed_point);
        assert_abs_diff_eq!(rep.spectral_margin, 1.5 / 2.0_f64.sqrt() - 0.75, epsilon = 1e-12);

        // δ = 0.05: margin negative → not a fixed point
        let rep2 = svp_fixed_point_check(&obj, &mtilde, 1, 0.05, crate::solvers::Manifold::Symmetric).unwrap();
        assert!(!rep2.is_fixed_point);
        assert!(rep2.spectral_margin < 0.0);

        // global minimum is always a fixed point
        let rep3 = svp_fixed_point_check(&obj, obj.mstar(), 1, 0.5, crate::solvers::Manifold::Symmetric).unwrap();
        assert!(rep3.is_fixed_point);
    }

    #[test]
    fn construction_column_row_spaces_orthogonal_to_gradient() {
        let w = theorem_witness_example(3).unwrap();
        let c = witness_construct_objective(&w, 6, 6).unwrap();
        let g = c.objective.gradient(&c.mtilde);
        // ∇f(M̃)ᵀ·cols(M̃) = 0 and ∇f(M̃)·rows(M̃) = 0
        assert!((g.transpose() * &c.mtilde).norm() <= 1e-10);
        assert!((&g * c.mtilde.transpose()).norm() <= 1e-10);
        assert!(c.lambda1 >= 0.5 - 1e-12 && c.lambda1 <= 1.5 + 1e-12);
        assert!(c.lambda2 >= 0.5 - 1e-12 && c.lambda2 <= 1.5 + 1e-12);
    }

    #[test]
    fn correlation_bound_values() {
        // capped at 1/3 and strictly positive on the whole domain
        for &d in &[0.35, 0.4, 0.45, 0.49] {
            let c = correlation_bound(d).unwrap();
            assert!(c > 0.0 && c <= 1.0 / 3.0 + 1e-15, "C({d}) = {c}");
        }
        // frozen regression value from the α-grid minimization oracle
        assert_abs_diff_eq!(correlation_bound(0.4).unwrap(), 0.18916696361961252, epsilon = 1e-12);
        assert!(correlation_bound(0.49).unwrap() > 0.0);
        assert!(correlation_bound(0.5).is_err());
        assert!(correlation_bound(0.0).is_err());
    }

    #[test]
    fn correlation_measure_basics() {
        let m = gaussian_mat(3, 3, &mut stream_rng(52, 0));
        assert_abs_diff_eq!(correlation_measure(&m, &m).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(correlation_measure(&m, &(-&m)).unwrap(), -1.0, epsilon = 1e-12);
        assert!(correlation_measure(&m, &Mat::zeros(3, 3)).is_err());

        // disjoint supports of the general-rank counterexample pair
        let obj = crate::counterexamples::rankr_linear_example(2, 4).unwrap();
        let u = crate::counterexamples::rankr_spurious_factor(2, 4);
        let mtilde = &u * u.transpose();
        assert_abs_diff_eq!(correlation_measure(&mtilde, obj.mstar()).unwrap(), 0.0, epsilon = 1e-15);
    }
}
