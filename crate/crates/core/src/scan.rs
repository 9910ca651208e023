//! Strict-saddle trichotomy scans: sample the factor space, classify every
//! point by which of the three disjuncts it satisfies (close to the solution
//! orbit, large gradient, or strictly negative curvature), and report the
//! empirically achievable `(α, β, γ)` frontier.

use crate::error::Result;
use crate::factorized::{factor_hessian_lambda_min, FactorizedProblem};
use crate::linalg::{balanced_factorize, procrustes_distance, FactorPair};
use crate::rng::{stream_rng, uniform_ball_mat};
use crate::solvers::gd_factorized;
use crate::Mat;

/// How scan points are produced: uniform draws from a Frobenius ball around
/// the origin, near-critical points harvested from short gradient-descent
/// runs, and optional caller-supplied candidates.
#[derive(Debug, Clone)]
pub struct SamplingSpec {
    pub ball_radius: f64,
    /// Fraction of points taken from gradient-descent endpoints.
    pub gd_fraction: f64,
    pub gd_iters: usize,
    pub gd_step: f64,
    pub extra_points: Vec<FactorPair>,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec { ball_radius: 2.0, gd_fraction: 0.2, gd_iters: 400, gd_step: 0.05, extra_points: Vec::new() }
    }
}

/// Per-point scan record.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScanPoint {
    pub index: usize,
    pub dist: f64,
    pub grad_norm: f64,
    pub hessian_lambda_min: f64,
    /// Which disjuncts hold at the queried `(α, β, γ)`.
    pub near: bool,
    pub large_gradient: bool,
    pub negative_curvature: bool,
    pub violates: bool,
    pub source: &'static str,
}

/// A vertex `(beta, gamma)` of the feasible staircase at a fixed `alpha`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FrontierVertex {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ScanReport {
    pub n_points: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub violation_count: usize,
    pub violations: Vec<ScanPoint>,
    pub points: Vec<ScanPoint>,
    /// Maximal `(β, γ)` pairs with zero violations, for a few `α` levels
    /// taken from the distance quantiles of the sample.
    pub frontier: Vec<FrontierVertex>,
    /// Points that pin the frontier down to (numerically) zero `β`/`γ` at
    /// some `α` below their distance: near-critical, PSD-Hessian points far
    /// from the orbit.
    pub obstructions: Vec<usize>,
}

/// Runs the scan. Every sampled point is scored with its orbit distance,
/// problem gradient norm, and factorized-Hessian smallest eigenvalue;
/// a point violates `(α, β, γ)` when none of the three disjuncts holds.
#[allow(clippy::too_many_arguments)]
pub fn strict_saddle_scan(
    prob: &FactorizedProblem,
    mstar: &Mat,
    rank: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    n_points: usize,
    spec: &SamplingSpec,
    seed: u64,
) -> Result<ScanReport> {
    let (n, m) = prob.objective().dims();
    let star = balanced_factorize(mstar, rank)?;
    let star_w = if prob.is_symmetric() { star.u.clone() } else { star.stacked() };

    let n_gd = ((n_points as f64) * spec.gd_fraction).round() as usize;
    let n_ball = n_points.saturating_sub(n_gd).saturating_sub(spec.extra_points.len());

    let mut candidates: Vec<(FactorPair, &'static str)> = Vec::with_capacity(n_points);
    for f in &spec.extra_points {
        candidates.push((f.clone(), "extra"));
    }
    for i in 0..n_ball {
        let mut rng = stream_rng(seed, 2 * i as u64);
        let f = if prob.is_symmetric() {
            FactorPair::new_symmetric(uniform_ball_mat(n, rank, spec.ball_radius, &mut rng))?
        } else {
            let w = uniform_ball_mat(n + m, rank, spec.ball_radius, &mut rng);
            FactorPair::new(w.view((0, 0), (n, rank)).into_owned(), w.view((n, 0), (m, rank)).into_owned())?
        };
        candidates.push((f, "ball"));
    }
    for i in 0..n_gd {
        let mut rng = stream_rng(seed, 2 * i as u64 + 1);
        let f0 = if prob.is_symmetric() {
            FactorPair::new_symmetric(uniform_ball_mat(n, rank, spec.ball_radius, &mut rng))?
        } else {
            let w = uniform_ball_mat(n + m, rank, spec.ball_radius, &mut rng);
            FactorPair::new(w.view((0, 0), (n, rank)).into_owned(), w.view((n, 0), (m, rank)).into_owned())?
        };
        let trace = gd_factorized(prob, &f0, spec.gd_step, spec.gd_iters, 1e-9)?;
        candidates.push((trace.final_factors.expect("gd returns factors"), "gd"));
    }

    let mut points = Vec::with_capacity(candidates.len());
    let mut violations = Vec::new();
    for (index, (f, source)) in candidates.iter().enumerate() {
        let w = if prob.is_symmetric() { f.u.clone() } else { f.stacked() };
        let dist = procrustes_distance(&w, &star_w)?;
        let grad_norm = prob.grad_norm(f)?;
        let lam = factor_hessian_lambda_min(prob, f)?;
        let near = dist <= alpha;
        let large_gradient = grad_norm >= beta;
        let negative_curvature = lam <= -gamma;
        let violates = !(near || large_gradient || negative_curvature);
        let p = ScanPoint {
            index,
            dist,
            grad_norm,
            hessian_lambda_min: lam,
            near,
            large_gradient,
            negative_curvature,
            violates,
            source,
        };
        if violates {
            violations.push(p.clone());
        }
        points.push(p);
    }

    let frontier = empirical_frontier(&points);
    let obstructions = points
        .iter()
        .filter(|p| p.grad_norm <= beta && p.hessian_lambda_min >= -gamma && p.dist > alpha)
        .map(|p| p.index)
        .collect();

    Ok(ScanReport {
        n_points: points.len(),
        alpha,
        beta,
        gamma,
        violation_count: violations.len(),
        violations,
        frontier,
        obstructions,
        points,
    })
}

/// For a handful of α levels (distance quantiles of the sample) lists the
/// Pareto-maximal `(β, γ)` with zero violations: feasibility means every
/// point farther than α has `grad ≥ β` or `−λ_min ≥ γ`.
fn empirical_frontier(points: &[ScanPoint]) -> Vec<FrontierVertex> {
    if points.is_empty() {
        return Vec::new();
    }
    let mut dists: Vec<f64> = points.iter().map(|p| p.dist).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::new();
    for q in [0.1, 0.25, 0.5] {
        let alpha = dists[((dists.len() - 1) as f64 * q) as usize];
        let mut far: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.dist > alpha)
            .map(|p| (p.grad_norm, -p.hessian_lambda_min))
            .collect();
        if far.is_empty() {
            continue;
        }
        far.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        // feasible γ for a given β is min{curv_i : grad_i < β}; walk the
        // staircase of Pareto-maximal pairs
        let mut best_gamma = f64::INFINITY;
        let mut vertices: Vec<(f64, f64)> = Vec::new();
        for &(g, curv) in far.iter() {
            // β can be pushed just above this gradient; γ capped by the
            // smallest curvature seen so far
            let beta = g;
            if curv < best_gamma {
                best_gamma = curv;
            }
            vertices.push((beta, best_gamma));
        }
        // thin to Pareto-maximal (β increasing, γ non-increasing): keep the
        // last entry per γ level
        let mut thinned: Vec<(f64, f64)> = Vec::new();
        for (b, g) in vertices {
            if let Some(last) = thinned.last_mut() {
                if (last.1 - g).abs() <= f64::EPSILON * g.abs().max(1.0) {
                    last.0 = b;
                    continue;
                }
            }
            thinned.push((b, g));
        }
        for (beta, gamma) in thinned.into_iter().take(8) {
            out.push(FrontierVertex { alpha, beta, gamma });
        }
    }
    out
}
