//! Dense linear-algebra primitives: rank-truncated projections onto the two
//! low-rank manifolds, balanced factorization, singular/eigen extremes and
//! the distance to a solution orbit.
//!
//! All routines are pure functions over immutable inputs.

use crate::error::{Error, Result};
use crate::{ensure_finite, Mat};
use nalgebra::DVector;

/// Dimension above which `lambda_min_sym` switches from a dense symmetric
/// eigendecomposition to a matrix-free Lanczos iteration.
pub const DENSE_EIG_LIMIT: usize = 2000;

/// Asymmetry gate for routines that require a symmetric input: the input is
/// rejected when `‖S − Sᵀ‖_F > 1e-12 · max(1, ‖S‖_F)`, otherwise silently
/// symmetrized as `(S + Sᵀ)/2`.
pub const SYMMETRY_GATE: f64 = 1e-12;

/// Relative singular-value tolerance used by `balanced_factorize` to decide
/// whether the input genuinely has rank ≤ r.
pub const RANK_TOL: f64 = 1e-10;

fn check_symmetric(s: &Mat, what: &str) -> Result<Mat> {
    if !s.is_square() {
        return Err(Error::Input(format!("{what}: expected a square matrix, got {}×{}", s.nrows(), s.ncols())));
    }
    ensure_finite(s, what)?;
    let sym = (s + s.transpose()) * 0.5;
    let asym = (s - s.transpose()).norm();
    if asym > SYMMETRY_GATE * s.norm().max(1.0) {
        return Err(Error::Input(format!("{what}: asymmetry {asym:.3e} exceeds the 1e-12 gate")));
    }
    Ok(sym)
}

/// Thin singular value decomposition `M = U Σ Vᵀ` with `min(n,m)` triples,
/// singular values sorted in descending order; ties keep the sweep's
/// canonical column order, so results are deterministic.
pub struct Svd {
    pub u: Mat,
    pub singular_values: DVector<f64>,
    pub v_t: Mat,
}

/// One-sided Jacobi SVD. Chosen over the library bidiagonalization SVD,
/// which mis-pairs factors on some near-rank-deficient inputs; Jacobi
/// rotations give high relative accuracy at these desk-scale sizes.
pub fn svd(m: &Mat) -> Svd {
    let (n, mm) = m.shape();
    if n < mm {
        let t = svd(&m.transpose());
        return Svd { u: t.v_t.transpose(), singular_values: t.singular_values, v_t: t.u.transpose() };
    }
    let mut a = m.clone();
    let cols = mm;
    let mut v = Mat::identity(cols, cols);
    let tol = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let ap = a.column(p);
                let aq = a.column(q);
                let app: f64 = ap.dot(&ap);
                let aqq: f64 = aq.dot(&aq);
                let apq: f64 = ap.dot(&aq);
                if apq.abs() <= tol * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * x - s * y;
                    a[(i, q)] = s * x + c * y;
                }
                for i in 0..cols {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut triples: Vec<(f64, usize)> = (0..cols).map(|j| (a.column(j).norm(), j)).collect();
    triples.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let mut u = Mat::zeros(n, cols);
    let mut vt = Mat::zeros(cols, cols);
    let mut sv = DVector::zeros(cols);
    for (k, (sigma, j)) in triples.into_iter().enumerate() {
        sv[k] = sigma;
        if sigma > 0.0 {
            u.set_column(k, &(a.column(j) / sigma));
        }
        vt.set_row(k, &v.column(j).transpose());
    }
    Svd { u, singular_values: sv, v_t: vt }
}

/// Singular values only, descending.
pub fn singular_values(m: &Mat) -> DVector<f64> {
    svd(m).singular_values
}

/// Operator 2-norm.
pub fn spectral_norm(m: &Mat) -> f64 {
    singular_values(m)[0]
}

/// Eigendecomposition of a (symmetrized) matrix, eigenvalues descending.
fn sym_eigen_sorted(s: &Mat) -> (Vec<f64>, Vec<DVector<f64>>) {
    let eig = nalgebra::SymmetricEigen::new(s.clone());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (vals, vecs)
}

/// Nearest (Frobenius) matrix of rank at most `r`: keeps the `r` largest
/// singular triples. When `σ_r = σ_{r+1}` the projection is set-valued; this
/// returns the minimizer built from the decomposition's canonical order.
pub fn truncated_svd_project(m: &Mat, r: usize) -> Result<Mat> {
    if r == 0 {
        return Err(Error::Input("truncated_svd_project: rank must be ≥ 1".into()));
    }
    ensure_finite(m, "truncated_svd_project input")?;
    let k = r.min(m.nrows().min(m.ncols()));
    let Svd { u, singular_values: s, v_t } = svd(m);
    let mut out = Mat::zeros(m.nrows(), m.ncols());
    for i in 0..k {
        if s[i] == 0.0 {
            break;
        }
        out += u.column(i) * v_t.row(i) * s[i];
    }
    Ok(out)
}

/// Nearest member of `{rank ≤ r, symmetric, PSD}`: keeps the `r` largest
/// eigenvalues and drops every negative one.
pub fn psd_truncated_project(s: &Mat, r: usize) -> Result<Mat> {
    if r == 0 {
        return Err(Error::Input("psd_truncated_project: rank must be ≥ 1".into()));
    }
    let sym = check_symmetric(s, "psd_truncated_project input")?;
    let (vals, vecs) = sym_eigen_sorted(&sym);
    let n = sym.nrows();
    let mut out = Mat::zeros(n, n);
    for i in 0..r.min(n) {
        if vals[i] <= 0.0 {
            break;
        }
        out += &vecs[i] * vecs[i].transpose() * vals[i];
    }
    Ok(out)
}

/// Factor pair `(U, V)` together with the symmetric-case flag.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub u: Mat,
    pub v: Mat,
    /// When set, `v` is identical to `u` and the pair parameterizes `U Uᵀ`.
    pub symmetric: bool,
}

impl FactorPair {
    pub fn new(u: Mat, v: Mat) -> Result<Self> {
        if u.ncols() != v.ncols() {
            return Err(Error::Input(format!(
                "factor pair: U has {} columns but V has {}",
                u.ncols(),
                v.ncols()
            )));
        }
        ensure_finite(&u, "factor U")?;
        ensure_finite(&v, "factor V")?;
        Ok(FactorPair { u, v, symmetric: false })
    }

    pub fn new_symmetric(u: Mat) -> Result<Self> {
        ensure_finite(&u, "factor U")?;
        Ok(FactorPair { v: u.clone(), u, symmetric: true })
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    /// The product matrix `U Vᵀ`.
    pub fn product(&self) -> Mat {
        &self.u * self.v.transpose()
    }

    /// Stacked variable `W = [U; V]`.
    pub fn stacked(&self) -> Mat {
        let (n, m, r) = (self.u.nrows(), self.v.nrows(), self.rank());
        let mut w = Mat::zeros(n + m, r);
        w.view_mut((0, 0), (n, r)).copy_from(&self.u);
        w.view_mut((n, 0), (m, r)).copy_from(&self.v);
        w
    }

    /// Balance residual `‖UᵀU − VᵀV‖_F`.
    pub fn balance_residual(&self) -> f64 {
        (self.u.transpose() * &self.u - self.v.transpose() * &self.v).norm()
    }
}

/// Balanced factorization `M = U Vᵀ` with `UᵀU = VᵀV`, built from the SVD as
/// `U = U_s Σ^{1/2}`, `V = V_s Σ^{1/2}`. Fails when the effective rank of `M`
/// exceeds `r` (`σ_{r+1} > 1e-10 · σ_1`).
pub fn balanced_factorize(m: &Mat, r: usize) -> Result<FactorPair> {
    if r == 0 {
        return Err(Error::Input("balanced_factorize: rank must be ≥ 1".into()));
    }
    ensure_finite(m, "balanced_factorize input")?;
    let Svd { u, singular_values: s, v_t } = svd(m);
    let kmax = m.nrows().min(m.ncols());
    if r < kmax && s[r] > RANK_TOL * s[0] {
        return Err(Error::Rank(format!(
            "balanced_factorize: σ_{}={:.3e} exceeds {RANK_TOL:e}·σ_1={:.3e}",
            r + 1,
            s[r],
            RANK_TOL * s[0]
        )));
    }
    let k = r.min(kmax);
    let mut uf = Mat::zeros(m.nrows(), r);
    let mut vf = Mat::zeros(m.ncols(), r);
    for i in 0..k {
        let root = s[i].max(0.0).sqrt();
        uf.set_column(i, &(u.column(i) * root));
        vf.set_column(i, &(v_t.row(i).transpose() * root));
    }
    FactorPair::new(uf, vf)
}

/// The `r`-th largest singular value (1-indexed).
pub fn sigma_r(m: &Mat, r: usize) -> Result<f64> {
    let k = m.nrows().min(m.ncols());
    if r == 0 || r > k {
        return Err(Error::Input(format!("sigma_r: r={r} out of range 1..={k}")));
    }
    ensure_finite(m, "sigma_r input")?;
    Ok(singular_values(m)[r - 1])
}

/// Symmetric linear operator given by matrix-vector products; used by the
/// Lanczos path of the extreme-eigenvalue routines.
pub trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
}

impl SymOp for Mat {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self * v
    }
}

/// Smallest eigenvalue of a symmetric operator via Lanczos with full
/// reorthogonalization, residual tolerance `tol` on `‖A q − θ q‖`.
pub fn lambda_min_op(op: &dyn SymOp, tol: f64, seed: u64) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    let max_iters = (4 * n).clamp(32, 600);
    let mut rng = crate::rng::stream_rng(seed, 0x4c414e43);
    let mut q = DVector::from_fn(n, |_, _| {
        use rand_distr::Distribution;
        rand_distr::StandardNormal.sample(&mut rng)
    });
    q /= q.norm();

    let mut basis: Vec<DVector<f64>> = vec![q.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;

    for k in 0..max_iters {
        let mut w = op.apply(&basis[k]);
        let alpha = basis[k].dot(&w);
        alphas.push(alpha);
        w -= &basis[k] * alpha;
        if k > 0 {
            w -= &basis[k - 1] * betas[k - 1];
        }
        // full reorthogonalization keeps the basis numerically orthonormal
        for b in &basis {
            let c = b.dot(&w);
            w -= b * c;
        }
        let beta = w.norm();

        // Ritz extraction from the tridiagonal matrix
        let m = alphas.len();
        let mut t = Mat::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(t);
        let mut min_idx = 0;
        for i in 0..m {
            if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
                min_idx = i;
            }
        }
        let theta = eig.eigenvalues[min_idx];
        best = theta;
        // residual bound for the minimal Ritz pair: |beta * last component|
        let resid = beta * eig.eigenvectors[(m - 1, min_idx)].abs();
        if resid <= tol || beta <= 1e-14 || m == n {
            break;
        }
        betas.push(beta);
        basis.push(w / beta);
    }
    best
}

/// Smallest eigenvalue of a symmetric matrix. Dense eigendecomposition up to
/// [`DENSE_EIG_LIMIT`], Lanczos with residual tolerance `1e-8` above it.
pub fn lambda_min_sym(s: &Mat) -> Result<f64> {
    let sym = check_symmetric(s, "lambda_min_sym input")?;
    if sym.nrows() <= DENSE_EIG_LIMIT {
        let eig = nalgebra::SymmetricEigen::new(sym);
        Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
    } else {
        Ok(lambda_min_op(&sym, 1e-8, 0))
    }
}

/// Distance from `W` to the orthogonal orbit `{W* R : RᵀR = I}`:
/// `min_R ‖W − W* R‖_F`, with the optimal rotation taken from the SVD of
/// `W*ᵀ W`. Evaluated through the aligned representative rather than the
/// trace identity `‖W‖² + ‖W*‖² − 2Σσ`, whose cancellation floors the
/// result near `‖W‖·√ε` on the orbit itself.
pub fn procrustes_distance(w: &Mat, w_star: &Mat) -> Result<f64> {
    Ok((w - procrustes_align(w, w_star)?).norm())
}

/// Orbit representative `W* R` closest to `W` (the aligned minimizer behind
/// [`procrustes_distance`]).
///
/// When `W*ᵀW` is rank-deficient the optimal rotation is not unique; the
/// zero-σ columns of the SVD factor are completed to an orthonormal basis
/// (deterministically, from standard basis candidates), and every such
/// completion attains the same minimal distance.
pub fn procrustes_align(w: &Mat, w_star: &Mat) -> Result<Mat> {
    if w.shape() != w_star.shape() {
        return Err(Error::Input(format!(
            "procrustes alignment: shape mismatch {:?} vs {:?}",
            w.shape(),
            w_star.shape()
        )));
    }
    ensure_finite(w, "procrustes W")?;
    ensure_finite(w_star, "procrustes W*")?;
    let Svd { mut u, singular_values: s, v_t } = svd(&(w_star.transpose() * w));
    let filled = s.iter().take_while(|&&x| x > 0.0).count();
    complete_orthonormal(&mut u, filled);
    Ok(w_star * (u * v_t))
}

/// Fills columns `start..` of `u` (whose first `start` columns are
/// orthonormal) with an orthonormal completion built from standard basis
/// candidates.
fn complete_orthonormal(u: &mut Mat, start: usize) {
    let r = u.nrows();
    let mut col = start;
    let mut cand = 0usize;
    while col < u.ncols() && cand < 2 * r {
        let mut v = DVector::zeros(r);
        v[cand % r] = 1.0;
        for j in 0..col {
            let c = u.column(j).dot(&v);
            v -= u.column(j) * c;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            u.set_column(col, &(v / norm));
            col += 1;
        }
        cand += 1;
    }
}
