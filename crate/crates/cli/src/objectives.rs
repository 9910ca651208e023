//! Objective construction shared by the subcommands.

use lrll::counterexamples::{
    dialed_delta_family, rank1_example, rank1_spurious_factor, rankr_linear_example,
    rankr_spurious_factor, theorem_witness_example,
};
use lrll::certify::witness_construct_objective;
use lrll::linalg::{balanced_factorize, FactorPair};
use lrll::objectives::Objective;
use lrll::rng::{gaussian_mat, stream_rng};
use lrll::sensing::{gaussian_sensing, LinearObjective};
use lrll::tensor::{OuterTensor, TensorObjective};
use lrll::{Error, Mat, Result};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SensingSpec {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub p: usize,
}

/// Parses `n=30,m=30,r=3,p=900`.
pub fn parse_sensing_spec(s: &str) -> Result<SensingSpec> {
    let mut n = None;
    let mut m = None;
    let mut r = None;
    let mut p = None;
    for part in s.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("sensing spec: expected key=value, got `{part}`")))?;
        let v: usize = value
            .trim()
            .parse()
            .map_err(|e| Error::Input(format!("sensing spec {key}: {e}")))?;
        match key.trim() {
            "n" => n = Some(v),
            "m" => m = Some(v),
            "r" => r = Some(v),
            "p" => p = Some(v),
            other => return Err(Error::Input(format!("sensing spec: unknown key `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::Input("sensing spec: missing n".into()))?;
    let m = m.unwrap_or(n);
    let r = r.ok_or_else(|| Error::Input("sensing spec: missing r".into()))?;
    let p = p.ok_or_else(|| Error::Input("sensing spec: missing p".into()))?;
    Ok(SensingSpec { n, m, r, p })
}

/// Unit-Frobenius rank-r ground truth drawn from the seed's dedicated
/// stream (stream 9 000 000), matching the convention of the test suites.
pub fn random_mstar(n: usize, m: usize, r: usize, seed: u64) -> Mat {
    let mut rng = stream_rng(seed, 9_000_000);
    let mstar = gaussian_mat(n, r, &mut rng) * gaussian_mat(r, m, &mut rng);
    let norm = mstar.norm();
    mstar / norm
}

pub enum BuiltObjective {
    Tensor(TensorObjective),
    Linear(LinearObjective),
}

impl BuiltObjective {
    pub fn as_dyn(&self) -> &dyn Objective {
        match self {
            BuiltObjective::Tensor(t) => t,
            BuiltObjective::Linear(l) => l,
        }
    }

    pub fn mstar(&self) -> Result<Mat> {
        match self {
            BuiltObjective::Tensor(t) => Ok(t.mstar().clone()),
            BuiltObjective::Linear(l) => l
                .ensemble()
                .mstar()
                .cloned()
                .ok_or_else(|| Error::Input("sensing ensemble carries no ground truth".into())),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum ObjectiveSelector {
    Rank1 { n: usize },
    Rankr { r: usize, n: usize },
    Dialed { theta: f64, n: usize },
    Identity { n: usize, m: usize },
    WitnessExample4 { r: usize },
    Sensing { spec: SensingSpec, seed: u64 },
}

impl ObjectiveSelector {
    /// Default spurious/interesting rank for solver and certification runs.
    pub fn default_rank(&self) -> usize {
        match self {
            ObjectiveSelector::Rank1 { .. } | ObjectiveSelector::Dialed { .. } | ObjectiveSelector::Identity { .. } => 1,
            ObjectiveSelector::Rankr { r, .. } | ObjectiveSelector::WitnessExample4 { r } => *r,
            ObjectiveSelector::Sensing { spec, .. } => spec.r,
        }
    }

    pub fn build(&self) -> Result<BuiltObjective> {
        match self {
            ObjectiveSelector::Rank1 { n } => Ok(BuiltObjective::Tensor(rank1_example(*n)?)),
            ObjectiveSelector::Rankr { r, n } => Ok(BuiltObjective::Tensor(rankr_linear_example(*r, *n)?)),
            ObjectiveSelector::Dialed { theta, n } => {
                Ok(BuiltObjective::Tensor(dialed_delta_family(&rank1_example(*n)?, *theta)?))
            }
            ObjectiveSelector::Identity { n, m } => Ok(BuiltObjective::Tensor(TensorObjective::new(
                OuterTensor::identity(*n, *m, 1.0),
                Mat::zeros(*n, *m),
            )?)),
            ObjectiveSelector::WitnessExample4 { r } => {
                let w = theorem_witness_example(*r)?;
                let c = witness_construct_objective(&w, 2 * r, 2 * r)?;
                Ok(BuiltObjective::Tensor(c.objective))
            }
            ObjectiveSelector::Sensing { spec, seed } => {
                let mstar = random_mstar(spec.n, spec.m, spec.r, *seed);
                let (_, obj) = gaussian_sensing(spec.n, spec.m, spec.r, spec.p, mstar, *seed)?;
                Ok(BuiltObjective::Linear(obj))
            }
        }
    }
}

/// Named starting points for solvers and certification.
pub fn build_point(name: &str, sel: &ObjectiveSelector, obj: &BuiltObjective, rank: usize, seed: u64) -> Result<FactorPair> {
    let (n, m) = obj.as_dyn().dims();
    match name {
        "global" => balanced_factorize(&obj.mstar()?, rank),
        "zero" => FactorPair::new(Mat::zeros(n, rank), Mat::zeros(m, rank)),
        "random" => {
            let mut rng = stream_rng(seed, 7_000);
            let scale = (rank as f64).sqrt();
            FactorPair::new(gaussian_mat(n, rank, &mut rng) / scale, gaussian_mat(m, rank, &mut rng) / scale)
        }
        "e2-over-sqrt2" => {
            let u = rank1_spurious_factor(n.max(2));
            FactorPair::new(u.clone(), u)
        }
        "spurious" => match sel {
            ObjectiveSelector::Rank1 { n } | ObjectiveSelector::Dialed { n, .. } => {
                let u = rank1_spurious_factor(*n);
                FactorPair::new(u.clone(), u)
            }
            ObjectiveSelector::Rankr { r, n } => {
                let u = rankr_spurious_factor(*r, *n);
                FactorPair::new(u.clone(), u)
            }
            ObjectiveSelector::WitnessExample4 { r } => {
                let w = theorem_witness_example(*r)?;
                let c = witness_construct_objective(&w, 2 * r, 2 * r)?;
                balanced_factorize(&c.mtilde, *r)
            }
            _ => Err(Error::Input("no canonical spurious point for this objective".into())),
        },
        other => Err(Error::Input(format!(
            "unknown point `{other}` (expected global|zero|random|e2-over-sqrt2|spurious)"
        ))),
    }
}

/// Serializes a tensor objective as a standalone JSON document.
pub fn tensor_spec_json(t: &TensorObjective) -> serde_json::Value {
    let (n, m) = t.tensor().dims();
    let terms: Vec<serde_json::Value> = t
        .tensor()
        .terms()
        .iter()
        .map(|(c, l, r)| {
            serde_json::json!({
                "coeff": c,
                "l": row_major(l),
                "r": row_major(r),
            })
        })
        .collect();
    serde_json::json!({
        "schema": "objective-spec/1",
        "kind": "tensor",
        "n": n,
        "m": m,
        "c0": t.tensor().c0(),
        "terms": terms,
        "mstar": row_major(t.mstar()),
    })
}

pub fn row_major(m: &Mat) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}
