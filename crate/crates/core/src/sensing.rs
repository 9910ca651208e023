//! Linear least-squares sensing: `f(M) = ½‖𝒜(M) − b‖²` for a measurement
//! ensemble `𝒜(M)_i = ⟨A_i, M⟩`.
//!
//! The gradient is `Σ_i (⟨A_i,M⟩ − b_i) A_i` and the Hessian form
//! `[∇²f](K,L) = Σ_i ⟨A_i,K⟩⟨A_i,L⟩` is independent of the base point.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::rng::{gaussian_mat, stream_rng};
use crate::{ensure_finite, frob_inner, Mat};
use std::io::{BufRead, Write};
use std::sync::Arc;

/// A linear measurement ensemble with observations and optional ground truth.
#[derive(Debug, Clone)]
pub struct SensingEnsemble {
    mats: Vec<Mat>,
    b: Vec<f64>,
    mstar: Option<Mat>,
    /// Provenance recorded for serialization (0 when hand-built).
    pub seed: u64,
    /// Per-entry scale of the sensing matrices (1/√p for Gaussian draws).
    pub scale: f64,
}

impl SensingEnsemble {
    pub fn new(mats: Vec<Mat>, b: Vec<f64>, mstar: Option<Mat>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::Input("sensing ensemble: no measurement matrices".into()));
        }
        let shape = mats[0].shape();
        for (i, a) in mats.iter().enumerate() {
            if a.shape() != shape {
                return Err(Error::Input(format!(
                    "sensing ensemble: A_{i} has shape {:?}, expected {:?}",
                    a.shape(),
                    shape
                )));
            }
            ensure_finite(a, "sensing matrix")?;
        }
        if b.len() != mats.len() {
            return Err(Error::Input(format!(
                "sensing ensemble: {} matrices but {} observations",
                mats.len(),
                b.len()
            )));
        }
        if let Some(ms) = &mstar {
            if ms.shape() != shape {
                return Err(Error::Input("sensing ensemble: ground truth shape mismatch".into()));
            }
            // noiseless model: observations must be consistent with M*
            for (i, a) in mats.iter().enumerate() {
                let pred = frob_inner(a, ms);
                if (pred - b[i]).abs() > 1e-12 * (1.0 + pred.abs()) {
                    return Err(Error::Input(format!(
                        "sensing ensemble: b_{i} inconsistent with ground truth ({} vs {})",
                        b[i], pred
                    )));
                }
            }
        }
        Ok(SensingEnsemble { mats, b, mstar, seed: 0, scale: 1.0 })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.mats[0].shape()
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[Mat] {
        &self.mats
    }

    pub fn observations(&self) -> &[f64] {
        &self.b
    }

    pub fn mstar(&self) -> Option<&Mat> {
        self.mstar.as_ref()
    }

    /// Applies the measurement operator, `𝒜(M)`.
    pub fn measure(&self, m: &Mat) -> Vec<f64> {
        self.mats.iter().map(|a| frob_inner(a, m)).collect()
    }

    /// Serializes as a JSON header line followed by CSV payload rows: one row
    /// of row-major entries per sensing matrix, then one row holding `b`,
    /// then (if present) one row of row-major ground-truth entries.
    pub fn save(&self, w: &mut impl Write) -> Result<()> {
        let (n, m) = self.dims();
        let header = serde_json::json!({
            "schema": "sensing-ensemble/1",
            "n": n, "m": m, "p": self.len(),
            "seed": self.seed, "scale": self.scale,
            "has_mstar": self.mstar.is_some(),
            "generator": crate::rng::GENERATOR,
        });
        writeln!(w, "{header}")?;
        for a in &self.mats {
            writeln!(w, "{}", row_major_csv(a))?;
        }
        writeln!(w, "{}", self.b.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(","))?;
        if let Some(ms) = &self.mstar {
            writeln!(w, "{}", row_major_csv(ms))?;
        }
        Ok(())
    }

    pub fn load(r: &mut impl BufRead) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let h: serde_json::Value = serde_json::from_str(header.trim())?;
        if h["schema"] != "sensing-ensemble/1" {
            return Err(Error::Input(format!("unknown ensemble schema {}", h["schema"])));
        }
        let n = h["n"].as_u64().ok_or_else(|| Error::Input("bad header: n".into()))? as usize;
        let m = h["m"].as_u64().ok_or_else(|| Error::Input("bad header: m".into()))? as usize;
        let p = h["p"].as_u64().ok_or_else(|| Error::Input("bad header: p".into()))? as usize;
        let has_mstar = h["has_mstar"].as_bool().unwrap_or(false);
        let mut lines = r.lines();
        let mut next_row = |what: &str| -> Result<Vec<f64>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Input(format!("ensemble payload truncated at {what}")))??;
            line.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Input(format!("{what}: {e}"))))
                .collect()
        };
        let mut mats = Vec::with_capacity(p);
        for i in 0..p {
            let row = next_row(&format!("A_{i}"))?;
            if row.len() != n * m {
                return Err(Error::Input(format!("A_{i}: expected {} entries, got {}", n * m, row.len())));
            }
            mats.push(Mat::from_row_slice(n, m, &row));
        }
        let b = next_row("b")?;
        let mstar = if has_mstar {
            let row = next_row("mstar")?;
            Some(Mat::from_row_slice(n, m, &row))
        } else {
            None
        };
        let mut ens = SensingEnsemble::new(mats, b, mstar)?;
        ens.seed = h["seed"].as_u64().unwrap_or(0);
        ens.scale = h["scale"].as_f64().unwrap_or(1.0);
        Ok(ens)
    }
}

fn row_major_csv(m: &Mat) -> String {
    let mut parts = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            parts.push(format!("{}", m[(i, j)]));
        }
    }
    parts.join(",")
}

/// Gaussian ensemble: `p` matrices with i.i.d. `N(0, 1/p)` entries (so the
/// expected Hessian form is the identity) and noiseless observations
/// `b = 𝒜(M*)`. Deterministic for a fixed seed.
pub fn gaussian_sensing(
    n: usize,
    m: usize,
    r: usize,
    p: usize,
    mstar: Mat,
    seed: u64,
) -> Result<(Arc<SensingEnsemble>, LinearObjective)> {
    if p == 0 {
        return Err(Error::Input("gaussian_sensing: p must be ≥ 1".into()));
    }
    if mstar.shape() != (n, m) {
        return Err(Error::Input(format!(
            "gaussian_sensing: M* has shape {:?}, expected ({n},{m})",
            mstar.shape()
        )));
    }
    let k = r.min(n.min(m));
    let sv = crate::linalg::singular_values(&mstar);
    if k < n.min(m) && sv[k] > 1e-10 * sv[0].max(1.0) {
        return Err(Error::Rank(format!("gaussian_sensing: rank(M*) exceeds {r}")));
    }
    let scale = 1.0 / (p as f64).sqrt();
    let mut mats = Vec::with_capacity(p);
    for i in 0..p {
        let mut rng = stream_rng(seed, i as u64);
        mats.push(gaussian_mat(n, m, &mut rng) * scale);
    }
    let b: Vec<f64> = mats.iter().map(|a| frob_inner(a, &mstar)).collect();
    let ens = Arc::new(SensingEnsemble { mats, b, mstar: Some(mstar), seed, scale });
    Ok((ens.clone(), LinearObjective::new(ens)))
}

/// `f(M) = ½‖𝒜(M) − b‖²` over a shared ensemble.
#[derive(Clone)]
pub struct LinearObjective {
    ens: Arc<SensingEnsemble>,
}

impl LinearObjective {
    pub fn new(ens: Arc<SensingEnsemble>) -> Self {
        LinearObjective { ens }
    }

    pub fn ensemble(&self) -> &SensingEnsemble {
        &self.ens
    }

    fn residual(&self, m: &Mat) -> Vec<f64> {
        self.ens
            .mats
            .iter()
            .zip(&self.ens.b)
            .map(|(a, bi)| frob_inner(a, m) - bi)
            .collect()
    }
}

impl Objective for LinearObjective {
    fn dims(&self) -> (usize, usize) {
        self.ens.dims()
    }

    fn value(&self, m: &Mat) -> f64 {
        0.5 * self.residual(m).iter().map(|r| r * r).sum::<f64>()
    }

    fn gradient(&self, m: &Mat) -> Mat {
        let (n, mm) = self.dims();
        let mut g = Mat::zeros(n, mm);
        for (a, bi) in self.ens.mats.iter().zip(&self.ens.b) {
            let ri = frob_inner(a, m) - bi;
            for (go, ae) in g.iter_mut().zip(a.iter()) {
                *go += ri * ae;
            }
        }
        g
    }

    fn hess_apply(&self, _m: &Mat, k: &Mat) -> Mat {
        let (n, mm) = self.dims();
        let mut out = Mat::zeros(n, mm);
        for a in &self.ens.mats {
            let c = frob_inner(a, k);
            for (oe, ae) in out.iter_mut().zip(a.iter()) {
                *oe += c * ae;
            }
        }
        out
    }

    fn hess_bform(&self, _m: &Mat, k: &Mat, l: &Mat) -> f64 {
        self.ens
            .mats
            .iter()
            .map(|a| frob_inner(a, k) * frob_inner(a, l))
            .sum()
    }
}
