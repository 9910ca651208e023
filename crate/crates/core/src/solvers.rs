//! Iterative solvers: singular value projection on both low-rank manifolds,
//! plain gradient descent on the factorized objectives, and perturbed
//! gradient descent for saddle escape.

use crate::error::{Error, Result};
use crate::factorized::FactorizedProblem;
use crate::linalg::{psd_truncated_project, truncated_svd_project, FactorPair};
use crate::objectives::Objective;
use crate::rng::stream_rng;
use crate::Mat;
use std::time::Instant;

/// Which low-rank manifold the matrix-space solver projects onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manifold {
    /// `{rank ≤ r}` via truncated SVD.
    Asymmetric,
    /// `{rank ≤ r, symmetric, PSD}` via truncated eigendecomposition.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
    /// A perturbation failed to produce the required decrease: the iterate is
    /// reported as an approximate second-order critical point.
    Stuck,
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iter: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub sigma_r: f64,
    pub event: String,
}

/// Per-iteration solver history plus the terminal state.
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
    pub status: Status,
    pub final_matrix: Mat,
    pub final_factors: Option<FactorPair>,
    pub wall_seconds: f64,
}

impl SolverTrace {
    pub fn final_value(&self) -> f64 {
        self.rows.last().map(|r| r.f).unwrap_or(f64::NAN)
    }

    /// CSV serialization with the mandatory header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,f,grad_norm,sigma_r,event\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.iter, r.f, r.grad_norm, r.sigma_r, r.event));
        }
        out
    }

    /// Per-iteration gap contraction ratios `(f_{t+1} − f_lb)/(f_t − f_lb)`.
    pub fn gap_ratios(&self, f_lb: f64) -> Vec<f64> {
        self.rows
            .windows(2)
            .filter(|w| w[0].f - f_lb > 0.0)
            .map(|w| (w[1].f - f_lb) / (w[0].f - f_lb))
            .collect()
    }
}

fn project(manifold: Manifold, m: &Mat, r: usize) -> Result<Mat> {
    match manifold {
        Manifold::Asymmetric => truncated_svd_project(m, r),
        Manifold::Symmetric => psd_truncated_project(m, r),
    }
}

fn check_on_manifold(manifold: Manifold, m: &Mat, r: usize) -> Result<()> {
    crate::ensure_finite(m, "initial iterate")?;
    let sv = crate::linalg::singular_values(m);
    let kmax = m.nrows().min(m.ncols());
    if r < kmax && sv[r] > 1e-8 * sv[0].max(1.0) {
        return Err(Error::Input(format!(
            "initial iterate is off-manifold: σ_{}={:.3e}",
            r + 1,
            sv[r]
        )));
    }
    if manifold == Manifold::Symmetric {
        if !m.is_square() {
            return Err(Error::Input("symmetric manifold requires a square iterate".into()));
        }
        if (m - m.transpose()).norm() > 1e-10 * m.norm().max(1.0) {
            return Err(Error::Input("initial iterate is not symmetric".into()));
        }
        let lam_min = crate::linalg::lambda_min_sym(&((m + m.transpose()) * 0.5))?;
        if lam_min < -1e-10 * sv[0].max(1.0) {
            return Err(Error::Input(format!("initial iterate is not PSD: λ_min={lam_min:.3e}")));
        }
    }
    Ok(())
}

/// Singular value projection: gradient step `M − η∇f(M)` followed by
/// projection onto the manifold. Stops when `f(M_t) ≤ tol` (the lower bound
/// is 0 for noiseless sensing and tensor objectives) or after `t_max`
/// iterations.
///
/// When the projection of the update is no closer to the update than the
/// current iterate is (a singular-value tie at the cut), the current iterate
/// is kept; this makes fixed points of the projection step exact fixed
/// points of the solver.
pub fn svp(
    obj: &dyn Objective,
    manifold: Manifold,
    r: usize,
    m0: &Mat,
    eta: f64,
    t_max: usize,
    tol: f64,
) -> Result<SolverTrace> {
    if eta <= 0.0 || !eta.is_finite() {
        return Err(Error::Input(format!("svp: step size η={eta} must be > 0")));
    }
    if r == 0 {
        return Err(Error::Input("svp: rank must be ≥ 1".into()));
    }
    check_on_manifold(manifold, m0, r)?;
    let started = Instant::now();
    let f_lb = 0.0;
    let mut m = m0.clone();
    let mut rows = Vec::new();
    let mut status = Status::MaxIters;

    for t in 0..=t_max {
        let f = obj.value(&m);
        if !f.is_finite() {
            status = Status::Diverged;
            rows.push(TraceRow { iter: t, f, grad_norm: f64::NAN, sigma_r: f64::NAN, event: "diverged".into() });
            break;
        }
        let g = obj.gradient(&m);
        let sr = crate::linalg::sigma_r(&m, r.min(m.nrows().min(m.ncols())))?;
        let mut event = String::new();

        if f - f_lb <= tol {
            rows.push(TraceRow { iter: t, f, grad_norm: g.norm(), sigma_r: sr, event: "converged".into() });
            status = Status::Converged;
            break;
        }
        if t == t_max {
            rows.push(TraceRow { iter: t, f, grad_norm: g.norm(), sigma_r: sr, event: String::new() });
            break;
        }

        let update = &m - &g * eta;
        let candidate = project(manifold, &update, r)?;
        let keep_current = (&m - &update).norm() <= (&candidate - &update).norm() * (1.0 + 1e-12) + 1e-15;
        if keep_current {
            event = "fixed-point".into();
        }
        rows.push(TraceRow { iter: t, f, grad_norm: g.norm(), sigma_r: sr, event });
        if !keep_current {
            m = candidate;
        }
    }

    Ok(SolverTrace {
        rows,
        status,
        final_matrix: m,
        final_factors: None,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Iteration count sufficient for the projected method to reach gap `eps`
/// from `initial_gap` under restricted isometry `delta < 1/3`:
/// `⌈ log(initial_gap/eps) / log[(1−δ)/(2δ)] ⌉`.
pub fn svp_iteration_bound(delta: f64, initial_gap: f64, eps: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(Error::Domain(format!(
            "svp_iteration_bound: δ={delta} outside (0, 1/3); the contraction rate 2δ/(1−δ) reaches 1"
        )));
    }
    if initial_gap <= 0.0 || eps <= 0.0 {
        return Err(Error::Input("svp_iteration_bound: gap and eps must be positive".into()));
    }
    if initial_gap <= eps {
        return Ok(0);
    }
    let t = (initial_gap / eps).ln() / ((1.0 - delta) / (2.0 * delta)).ln();
    Ok(t.ceil().max(0.0) as usize)
}

fn step_halving_update(
    prob: &FactorizedProblem,
    f: &FactorPair,
    grad: &FactorPair,
    value: f64,
    step: &mut f64,
) -> Result<(FactorPair, bool)> {
    let mut halved = false;
    loop {
        let cand = apply_step(f, grad, *step);
        let cand_val = prob.value(&cand)?;
        if cand_val <= value || *step < 1e-14 {
            return Ok((cand, halved));
        }
        *step *= 0.5;
        halved = true;
    }
}

fn apply_step(f: &FactorPair, grad: &FactorPair, step: f64) -> FactorPair {
    if f.symmetric {
        let u = &f.u - &grad.u * step;
        FactorPair { v: u.clone(), u, symmetric: true }
    } else {
        FactorPair {
            u: &f.u - &grad.u * step,
            v: &f.v - &grad.v * step,
            symmetric: false,
        }
    }
}

fn factor_sigma_r(f: &FactorPair) -> f64 {
    let m = f.product();
    let k = f.rank().min(m.nrows().min(m.ncols()));
    if k == 0 {
        return 0.0;
    }
    crate::linalg::singular_values(&m)[k - 1]
}

/// Plain gradient descent on a factorized problem with step halving on
/// objective increase. Stops when the gradient norm reaches `tol`.
pub fn gd_factorized(
    prob: &FactorizedProblem,
    f0: &FactorPair,
    step0: f64,
    t_max: usize,
    tol: f64,
) -> Result<SolverTrace> {
    if step0 <= 0.0 {
        return Err(Error::Input("gd: step must be > 0".into()));
    }
    let started = Instant::now();
    let mut f = f0.clone();
    let mut step = step0;
    let mut rows = Vec::new();
    let mut status = Status::MaxIters;

    for t in 0..=t_max {
        let value = prob.value(&f)?;
        if !value.is_finite() || value > 1e12 {
            rows.push(TraceRow { iter: t, f: value, grad_norm: f64::NAN, sigma_r: f64::NAN, event: "diverged".into() });
            status = Status::Diverged;
            break;
        }
        let grad = prob.grad(&f)?;
        let gnorm = if f.symmetric { grad.u.norm() } else { grad.stacked().norm() };
        let sr = factor_sigma_r(&f);

        if gnorm <= tol {
            rows.push(TraceRow { iter: t, f: value, grad_norm: gnorm, sigma_r: sr, event: "converged".into() });
            status = Status::Converged;
            break;
        }
        if t == t_max {
            rows.push(TraceRow { iter: t, f: value, grad_norm: gnorm, sigma_r: sr, event: String::new() });
            break;
        }
        let (next, halved) = step_halving_update(prob, &f, &grad, value, &mut step)?;
        rows.push(TraceRow {
            iter: t,
            f: value,
            grad_norm: gnorm,
            sigma_r: sr,
            event: if halved { "step-halved".into() } else { String::new() },
        });
        f = next;
    }

    Ok(SolverTrace {
        final_matrix: f.product(),
        final_factors: Some(f),
        rows,
        status,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Hyperparameters of the perturbed gradient descent schedule.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PerturbSchedule {
    /// Perturbation ball radius.
    pub radius: f64,
    /// Steps between a perturbation and its escape check (and the minimum
    /// spacing between perturbations).
    pub t_thres: usize,
    /// Required objective decrease for an escape to count.
    pub f_thres: f64,
    /// Gradient norm below which the iterate is considered near-critical and
    /// a perturbation is injected.
    pub g_thres: f64,
}

impl Default for PerturbSchedule {
    fn default() -> Self {
        PerturbSchedule { radius: 1e-3, t_thres: 100, f_thres: 1e-8, g_thres: 1e-4 }
    }
}

/// Perturbed gradient descent: plain descent plus uniform ball noise whenever
/// the gradient is small, with a stuck report when a perturbation fails to
/// escape. Stops when `f ≤ f_target` (the known lower bound of the noiseless
/// models is 0). Deterministic for a fixed seed.
#[allow(clippy::too_many_arguments)]
pub fn perturbed_gd(
    prob: &FactorizedProblem,
    f0: &FactorPair,
    step0: f64,
    sched: &PerturbSchedule,
    t_max: usize,
    f_target: f64,
    seed: u64,
) -> Result<SolverTrace> {
    if step0 <= 0.0 || sched.radius <= 0.0 || sched.t_thres == 0 || sched.f_thres <= 0.0 {
        return Err(Error::Input("pgd: all schedule parameters must be positive".into()));
    }
    let started = Instant::now();
    let mut rng = stream_rng(seed, 0);
    let mut f = f0.clone();
    let mut step = step0;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut status = Status::MaxIters;
    // (iteration, value before perturbation) of the pending escape check
    let mut pending: Option<(usize, f64)> = None;
    let mut last_perturb: Option<usize> = None;

    for t in 0..=t_max {
        let value = prob.value(&f)?;
        if !value.is_finite() || value > 1e12 {
            rows.push(TraceRow { iter: t, f: value, grad_norm: f64::NAN, sigma_r: f64::NAN, event: "diverged".into() });
            status = Status::Diverged;
            break;
        }
        let grad = prob.grad(&f)?;
        let gnorm = if f.symmetric { grad.u.norm() } else { grad.stacked().norm() };
        let sr = factor_sigma_r(&f);

        if value <= f_target {
            rows.push(TraceRow { iter: t, f: value, grad_norm: gnorm, sigma_r: sr, event: "converged".into() });
            status = Status::Converged;
            break;
        }

        if let Some((t_pert, f_before)) = pending {
            if t - t_pert >= sched.t_thres {
                if f_before - value < sched.f_thres {
                    rows.push(TraceRow { iter: t, f: value, grad_norm: gnorm, sigma_r: sr, event: "stuck".into() });
                    status = Status::Stuck;
                    break;
                }
                pending = None;
            }
        }

        if t == t_max {
            rows.push(TraceRow { iter: t, f: value, grad_norm: gnorm, sigma_r: sr, event: String::new() });
            break;
        }

        let spaced_out = last_perturb.is_none_or(|tp| t - tp > sched.t_thres);
        if gnorm <= sched.g_thres && pending.is_none() && spaced_out {
            let (n, m, r) = (f.u.nrows(), f.v.nrows(), f.rank());
            let noise_rows = if f.symmetric { n } else { n + m };
            let noise = crate::rng::uniform_ball_mat(noise_rows, r, sched.radius, &mut rng);
            if f.symmetric {
                let u = &f.u + noise;
                f = FactorPair { v: u.clone(), u, symmetric: true };
            } else {
                f = FactorPair {
                    u: &f.u + noise.view((0, 0), (n, r)).into_owned(),
                    v: &f.v + noise.view((n, 0), (m, r)).into_owned(),
                    symmetric: false,
                };
            }
            pending = Some((t, value));
            last_perturb = Some(t);
            rows.push(TraceRow { iter: t, f: value, grad_norm: gnorm, sigma_r: sr, event: "perturb".into() });
            continue;
        }

        let (next, halved) = step_halving_update(prob, &f, &grad, value, &mut step)?;
        rows.push(TraceRow {
            iter: t,
            f: value,
            grad_norm: gnorm,
            sigma_r: sr,
            event: if halved { "step-halved".into() } else { String::new() },
        });
        f = next;
    }

    Ok(SolverTrace {
        final_matrix: f.product(),
        final_factors: Some(f),
        rows,
        status,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexamples::{rank1_example, rank1_spurious_factor, rankr_linear_example, rankr_spurious_factor};
    use crate::linalg::{balanced_factorize, truncated_svd_project};
    use crate::rng::{gaussian_mat, stream_rng};
    use crate::tensor::{OuterTensor, TensorObjective};

    #[test]
    fn svp_terminates_immediately_at_global_minimum() {
        let obj = rank1_example(3).unwrap();
        let trace = svp(&obj, Manifold::Asymmetric, 1, obj.mstar(), 0.5, 100, 1e-10).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].iter, 0);
    }

    #[test]
    fn svp_rejects_off_manifold_start() {
        let obj = rank1_example(3).unwrap();
        let m0 = Mat::identity(3, 3); // rank 3 > 1
        assert!(svp(&obj, Manifold::Asymmetric, 1, &m0, 0.5, 10, 1e-8).is_err());
    }

    #[test]
    fn svp_monotone_on_identity_tensor() {
        let mstar = {
            let mut rng = stream_rng(41, 0);
            let u = gaussian_mat(5, 2, &mut rng);
            let v = gaussian_mat(5, 2, &mut rng);
            u * v.transpose()
        };
        let obj =
            TensorObjective::new(OuterTensor::identity(5, 5, 1.0), truncated_svd_project(&mstar, 2).unwrap())
                .unwrap();
        let trace = svp(&obj, Manifold::Asymmetric, 2, &Mat::zeros(5, 5), 1.0, 200, 1e-12).unwrap();
        assert_eq!(trace.status, Status::Converged);
        for w in trace.rows.windows(2) {
            assert!(w[1].f <= w[0].f + 1e-12);
        }
    }

    #[test]
    fn rankr_spurious_point_is_an_svp_fixed_point() {
        // at M̃ the update M̃ − η∇f with η = (1+½)⁻¹ has an exact singular
        // value tie; the solver must keep the iterate unchanged
        for r in 1..=3 {
            let n = 2 * r;
            let obj = rankr_linear_example(r, n).unwrap();
            let u = rankr_spurious_factor(r, n);
            let mtilde = &u * u.transpose();
            let eta = 1.0 / 1.5;
            let trace = svp(&obj, Manifold::Asymmetric, r, &mtilde, eta, 10, 1e-12).unwrap();
            assert!((trace.final_matrix - &mtilde).norm() <= 1e-10);
            assert!(trace.rows.iter().any(|row| row.event == "fixed-point"));
        }
    }

    #[test]
    fn svp_symmetric_iterates_stay_psd() {
        let obj = rank1_example(3).unwrap();
        let mut m0 = Mat::zeros(3, 3);
        m0[(2, 2)] = 0.7;
        let trace = svp(&obj, Manifold::Symmetric, 1, &m0, 0.6, 50, 1e-14).unwrap();
        for row in &trace.rows {
            assert!(row.f.is_finite());
        }
        let lam = crate::linalg::lambda_min_sym(&trace.final_matrix).unwrap();
        assert!(lam >= -1e-10);
    }

    #[test]
    fn iteration_bound_formula() {
        // δ = 0.2: rate (1−δ)/(2δ) = 2, so ⌈ln(1e8)/ln 2⌉ = 27
        assert_eq!(svp_iteration_bound(0.2, 1e8, 1.0).unwrap(), 27);
        assert_eq!(svp_iteration_bound(0.2, 0.5, 1.0).unwrap(), 0);
        assert!(svp_iteration_bound(0.333, 10.0, 1.0).unwrap() > 1000);
        assert!(svp_iteration_bound(1.0 / 3.0, 10.0, 1.0).is_err());
        assert!(svp_iteration_bound(0.4, 10.0, 1.0).is_err());
    }

    #[test]
    fn gd_stays_at_global_factor() {
        let obj = rank1_example(3).unwrap();
        let prob = FactorizedProblem::Asymmetric { obj: &obj, mu: 0.5 };
        let f0 = balanced_factorize(obj.mstar(), 1).unwrap();
        let trace = gd_factorized(&prob, &f0, 0.1, 100, 1e-12).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert_eq!(trace.rows.len(), 1);
        assert!(trace.final_value() <= 1e-14);
    }

    #[test]
    fn gd_freezes_at_exact_spurious_critical_point() {
        // θ = 1: the start is exactly critical; the gradient stays ≤ 1e-12
        let obj = rank1_example(3).unwrap();
        let u = rank1_spurious_factor(3);
        let prob = FactorizedProblem::Symmetric { obj: &obj };
        let f0 = FactorPair::new_symmetric(u).unwrap();
        let trace = gd_factorized(&prob, &f0, 0.1, 50, 1e-12).unwrap();
        assert_eq!(trace.status, Status::Converged);
        for row in &trace.rows {
            assert!(row.grad_norm <= 1e-12);
        }
    }

    #[test]
    fn gd_from_dialed_start_descends_to_the_ray_saddle() {
        // the e₂-ray is invariant under gradient descent: from e₂/√2 the
        // iterates converge to the spurious first-order point at
        // f = ½ − θ²/8, not to the global minimum
        let theta = 0.6;
        let obj = rank1_example(3).unwrap().dial(theta).unwrap();
        let prob = FactorizedProblem::Symmetric { obj: &obj };
        let f0 = FactorPair::new_symmetric(rank1_spurious_factor(3)).unwrap();
        let g0 = prob.grad_norm(&f0).unwrap();
        assert!((g0 - (1.0 - theta) / 2.0_f64.sqrt()).abs() <= 1e-10);
        let trace = gd_factorized(&prob, &f0, 0.1, 20_000, 1e-10).unwrap();
        let expected_saddle_value = 0.5 - theta * theta / 8.0;
        assert!((trace.final_value() - expected_saddle_value).abs() <= 1e-6);
        // the iterate never leaves span{e₂}
        let fin = trace.final_factors.unwrap();
        assert!(fin.u[(0, 0)].abs() == 0.0 && fin.u[(2, 0)].abs() == 0.0);
    }

    #[test]
    fn pgd_escapes_the_dialed_ray_saddle() {
        // same start as above: the ball perturbation leaves the invariant
        // subspace and the strict saddle is escaped
        let theta = 0.6;
        let obj = rank1_example(3).unwrap().dial(theta).unwrap();
        let prob = FactorizedProblem::Symmetric { obj: &obj };
        let f0 = FactorPair::new_symmetric(rank1_spurious_factor(3)).unwrap();
        let sched = PerturbSchedule::default();
        let trace = perturbed_gd(&prob, &f0, 0.1, &sched, 50_000, 1e-9, 7).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert!(trace.final_value() <= 1e-9);
        assert!(trace.rows.iter().any(|r| r.event == "perturb"));
    }

    #[test]
    fn pgd_converges_on_identity_tensor_from_random_init() {
        let mstar = {
            let mut rng = stream_rng(42, 0);
            let u = gaussian_mat(4, 1, &mut rng);
            &u * u.transpose()
        };
        let obj = TensorObjective::new(OuterTensor::identity(4, 4, 1.0), mstar).unwrap();
        let prob = FactorizedProblem::Symmetric { obj: &obj };
        let f0 = FactorPair::new_symmetric(gaussian_mat(4, 1, &mut stream_rng(43, 0))).unwrap();
        let trace = perturbed_gd(&prob, &f0, 0.1, &PerturbSchedule::default(), 100_000, 1e-10, 1).unwrap();
        assert_eq!(trace.status, Status::Converged);
        assert!(trace.final_value() <= 1e-10);
    }

    #[test]
    fn pgd_reports_stuck_at_the_spurious_sosp() {
        let obj = rank1_example(3).unwrap();
        let prob = FactorizedProblem::Asymmetric { obj: &obj, mu: 0.5 };
        let u = rank1_spurious_factor(3);
        let f0 = FactorPair::new(u.clone(), u).unwrap();
        let trace = perturbed_gd(&prob, &f0, 0.05, &PerturbSchedule::default(), 20_000, 1e-8, 3).unwrap();
        assert_eq!(trace.status, Status::Stuck);
        assert!(trace.final_value() > 0.3); // still at the spurious level 3/8
        assert!(trace.rows.iter().any(|r| r.event == "perturb"));
    }

    #[test]
    fn traces_serialize_with_header() {
        let obj = rank1_example(2).unwrap();
        let trace = svp(&obj, Manifold::Asymmetric, 1, obj.mstar(), 0.5, 5, 1e-10).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("iter,f,grad_norm,sigma_r,event\n"));
        assert_eq!(csv.lines().count(), trace.rows.len() + 1);
    }

    #[test]
    fn determinism_for_fixed_seed() {
        let obj = rank1_example(3).unwrap();
        let prob = FactorizedProblem::Symmetric { obj: &obj };
        let f0 = FactorPair::new_symmetric(gaussian_mat(3, 1, &mut stream_rng(44, 0))).unwrap();
        let sched = PerturbSchedule::default();
        let a = perturbed_gd(&prob, &f0, 0.1, &sched, 5_000, 1e-10, 11).unwrap();
        let b = perturbed_gd(&prob, &f0, 0.1, &sched, 5_000, 1e-10, 11).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }
}
