//! Empirical estimation of restricted-isometry and bounded-difference
//! constants.
//!
//! Exact computation of these constants is intractable in general, so both
//! estimators report **lower bounds**: the worst deviation found over seeded
//! random rank-constrained samples, optionally sharpened by projected
//! gradient ascent. Sample `i` draws from stream `i` of the seed, so
//! enlarging `n_samples` only appends candidates and the estimate is monotone
//! non-decreasing in `n_samples`.

use crate::linalg::truncated_svd_project;
use crate::objectives::Objective;
use crate::rng::{gaussian_mat, stream_rng};
use crate::{Error, Mat, Result};

/// Lower bound on the rank-`(rank, rank)` restricted-isometry constant:
/// the maximum of `|hess_qform(M, K)/‖K‖² − 1|` over sampled rank-≤`rank`
/// pairs `(M, K)`, each refined by `n_refine` projected-gradient-ascent steps
/// on the Rayleigh deviation (step on `K`, retraction through the truncated
/// SVD). Deterministic for a fixed seed.
pub fn rip_estimate(
    obj: &dyn Objective,
    rank: usize,
    n_samples: usize,
    n_refine: usize,
    seed: u64,
) -> Result<f64> {
    if rank == 0 {
        return Err(Error::Input("rip_estimate: rank must be ≥ 1".into()));
    }
    let (n, m) = obj.dims();
    let mut best = 0.0_f64;
    for i in 0..n_samples {
        let mut rng = stream_rng(seed, i as u64);
        let base = truncated_svd_project(&gaussian_mat(n, m, &mut rng), rank)?;
        let k = truncated_svd_project(&gaussian_mat(n, m, &mut rng), rank)?;
        if k.norm() == 0.0 {
            continue;
        }
        let dev = refine_deviation(obj, &base, k, rank, n_refine)?;
        best = best.max(dev);
    }
    Ok(best)
}

/// `|q(K)/‖K‖² − 1|` in ratio form, so an exact isometry yields an exact
/// zero.
fn deviation(obj: &dyn Objective, base: &Mat, k: &Mat) -> f64 {
    (obj.hess_qform(base, k) / crate::frob_inner(k, k) - 1.0).abs()
}

/// Ascends the Rayleigh deviation over rank-≤`rank` matrices starting from
/// `k`. Step halving on failure; a candidate is kept only when the deviation
/// strictly improves, so refinement can only sharpen the sampled lower
/// bound.
fn refine_deviation(
    obj: &dyn Objective,
    base: &Mat,
    mut k: Mat,
    rank: usize,
    n_refine: usize,
) -> Result<f64> {
    k /= k.norm();
    let mut best = deviation(obj, base, &k);
    let mut step = 0.5_f64;
    for _ in 0..n_refine {
        // gradient of the Rayleigh quotient at (near-)unit norm, signed
        // toward whichever side of 1 the current deviation sits on
        let q = obj.hess_qform(base, &k) / crate::frob_inner(&k, &k);
        let sign = if q >= 1.0 { 1.0 } else { -1.0 };
        let grad = (obj.hess_apply(base, &k) - &k * q) * (2.0 * sign);
        let cand = truncated_svd_project(&(&k + grad * step), rank)?;
        let norm = cand.norm();
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        let cand = cand / norm;
        let dev = deviation(obj, base, &cand);
        if dev > best {
            best = dev;
            k = cand;
        } else {
            step *= 0.5;
            if step < 1e-8 {
                break;
            }
        }
    }
    Ok(best)
}

/// Lower bound on the rank-`rank` bounded-difference constant: the maximum of
/// `|[∇²f(M) − ∇²f(M')](K, L)| / (‖K‖·‖L‖)` over sampled rank-constrained
/// quadruples. Exactly zero for objectives with a constant Hessian.
pub fn bdp_estimate(obj: &dyn Objective, rank: usize, n_samples: usize, seed: u64) -> Result<f64> {
    if rank == 0 {
        return Err(Error::Input("bdp_estimate: rank must be ≥ 1".into()));
    }
    let (n, m) = obj.dims();
    let mut best = 0.0_f64;
    for i in 0..n_samples {
        let mut rng = stream_rng(seed, i as u64);
        let ma = truncated_svd_project(&gaussian_mat(n, m, &mut rng), rank)?;
        let mb = truncated_svd_project(&gaussian_mat(n, m, &mut rng), rank)?;
        let k = truncated_svd_project(&gaussian_mat(n, m, &mut rng), rank)?;
        let l = truncated_svd_project(&gaussian_mat(n, m, &mut rng), rank)?;
        let denom = k.norm() * l.norm();
        if denom == 0.0 {
            continue;
        }
        let diff = obj.hess_bform(&ma, &k, &l) - obj.hess_bform(&mb, &k, &l);
        best = best.max(diff.abs() / denom);
    }
    Ok(best)
}
