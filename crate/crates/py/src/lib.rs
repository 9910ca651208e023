//! Python bindings: the main objective families, linear-algebra primitives,
//! solvers and certification entry points, with matrices passed as nested
//! lists of floats (row-major).

use lrll::certify::{
    correlation_bound, correlation_measure, criticality_report, witness_check,
    witness_construct_objective,
};
use lrll::counterexamples::{
    rank1_example, rank1_spurious_factor, rankr_linear_example, rankr_spurious_factor,
    theorem_witness_example,
};
use lrll::estimate::{bdp_estimate, rip_estimate};
use lrll::factorized::FactorizedProblem;
use lrll::linalg;
use lrll::objectives::Objective;
use lrll::sensing::{gaussian_sensing, LinearObjective};
use lrll::solvers::{self, Manifold};
use lrll::tensor::TensorObjective;
use lrll::Mat;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py_err(e: lrll::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mat_from_rows(rows: Vec<Vec<f64>>) -> PyResult<Mat> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("matrix needs at least one row"));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("matrix rows must be non-empty and equal length"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Mat::from_row_slice(rows.len(), ncols, &flat))
}

type Rows = Vec<Vec<f64>>;

fn mat_to_rows(m: &Mat) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// A constant-Hessian quadratic objective built from a fourth-order tensor.
#[pyclass(name = "TensorObjective")]
struct PyTensorObjective {
    inner: TensorObjective,
}

#[pymethods]
impl PyTensorObjective {
    /// The rank-one instance with isometry constant ½ and ground truth e₁e₁ᵀ.
    #[staticmethod]
    fn rank1(n: usize) -> PyResult<Self> {
        Ok(PyTensorObjective { inner: rank1_example(n).map_err(to_py_err)? })
    }

    /// The general-rank instance on n ≥ 2r coordinates.
    #[staticmethod]
    fn rankr(r: usize, n: usize) -> PyResult<Self> {
        Ok(PyTensorObjective { inner: rankr_linear_example(r, n).map_err(to_py_err)? })
    }

    /// Interpolation toward the identity tensor: isometry constant θ·δ_base.
    fn dialed(&self, theta: f64) -> PyResult<Self> {
        Ok(PyTensorObjective { inner: self.inner.dial(theta).map_err(to_py_err)? })
    }

    /// Realizes the built-in witness tuple (δ=½, α=3/5, …) at rank r.
    #[staticmethod]
    fn from_witness_example(r: usize) -> PyResult<Self> {
        let w = theorem_witness_example(r).map_err(to_py_err)?;
        let c = witness_construct_objective(&w, 2 * r, 2 * r).map_err(to_py_err)?;
        Ok(PyTensorObjective { inner: c.objective })
    }

    fn dims(&self) -> (usize, usize) {
        self.inner.dims()
    }

    fn value(&self, m: Vec<Vec<f64>>) -> PyResult<f64> {
        Ok(self.inner.value(&mat_from_rows(m)?))
    }

    fn gradient(&self, m: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(mat_to_rows(&self.inner.gradient(&mat_from_rows(m)?)))
    }

    fn hess_qform(&self, m: Vec<Vec<f64>>, k: Vec<Vec<f64>>) -> PyResult<f64> {
        Ok(self.inner.hess_qform(&mat_from_rows(m)?, &mat_from_rows(k)?))
    }

    fn mstar(&self) -> Vec<Vec<f64>> {
        mat_to_rows(self.inner.mstar())
    }

    /// The canonical spurious factor of the rank-1/rank-r families.
    #[staticmethod]
    fn spurious_factor(r: usize, n: usize) -> Vec<Vec<f64>> {
        if r == 1 {
            mat_to_rows(&rank1_spurious_factor(n))
        } else {
            mat_to_rows(&rankr_spurious_factor(r, n))
        }
    }
}

/// Linear least-squares sensing objective over a Gaussian ensemble.
#[pyclass(name = "SensingObjective")]
struct PySensingObjective {
    inner: LinearObjective,
}

#[pymethods]
impl PySensingObjective {
    #[staticmethod]
    fn gaussian(n: usize, m: usize, r: usize, p: usize, mstar: Vec<Vec<f64>>, seed: u64) -> PyResult<Self> {
        let (_, obj) = gaussian_sensing(n, m, r, p, mat_from_rows(mstar)?, seed).map_err(to_py_err)?;
        Ok(PySensingObjective { inner: obj })
    }

    fn dims(&self) -> (usize, usize) {
        self.inner.dims()
    }

    fn value(&self, m: Vec<Vec<f64>>) -> PyResult<f64> {
        Ok(self.inner.value(&mat_from_rows(m)?))
    }

    fn gradient(&self, m: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(mat_to_rows(&self.inner.gradient(&mat_from_rows(m)?)))
    }

    fn mstar(&self) -> PyResult<Vec<Vec<f64>>> {
        self.inner
            .ensemble()
            .mstar()
            .map(mat_to_rows)
            .ok_or_else(|| PyValueError::new_err("no ground truth stored"))
    }
}

macro_rules! with_objective {
    ($obj:expr, $name:ident, $body:expr) => {{
        if let Ok(t) = $obj.extract::<PyRef<'_, PyTensorObjective>>() {
            let $name: &dyn Objective = &t.inner;
            $body
        } else if let Ok(s) = $obj.extract::<PyRef<'_, PySensingObjective>>() {
            let $name: &dyn Objective = &s.inner;
            $body
        } else {
            Err(PyValueError::new_err("expected a TensorObjective or SensingObjective"))
        }
    }};
}

#[pyfunction]
fn truncated_svd_project(m: Vec<Vec<f64>>, r: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(mat_to_rows(&linalg::truncated_svd_project(&mat_from_rows(m)?, r).map_err(to_py_err)?))
}

#[pyfunction]
fn psd_truncated_project(s: Vec<Vec<f64>>, r: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(mat_to_rows(&linalg::psd_truncated_project(&mat_from_rows(s)?, r).map_err(to_py_err)?))
}

#[pyfunction]
fn sigma_r(m: Vec<Vec<f64>>, r: usize) -> PyResult<f64> {
    linalg::sigma_r(&mat_from_rows(m)?, r).map_err(to_py_err)
}

#[pyfunction]
fn lambda_min_sym(s: Vec<Vec<f64>>) -> PyResult<f64> {
    linalg::lambda_min_sym(&mat_from_rows(s)?).map_err(to_py_err)
}

#[pyfunction]
fn procrustes_distance(w: Vec<Vec<f64>>, w_star: Vec<Vec<f64>>) -> PyResult<f64> {
    linalg::procrustes_distance(&mat_from_rows(w)?, &mat_from_rows(w_star)?).map_err(to_py_err)
}

#[pyfunction]
fn balanced_factorize(m: Vec<Vec<f64>>, r: usize) -> PyResult<(Rows, Rows)> {
    let f = linalg::balanced_factorize(&mat_from_rows(m)?, r).map_err(to_py_err)?;
    Ok((mat_to_rows(&f.u), mat_to_rows(&f.v)))
}

#[pyfunction]
#[pyo3(name = "correlation_bound")]
fn py_correlation_bound(delta: f64) -> PyResult<f64> {
    correlation_bound(delta).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(name = "correlation_measure")]
fn py_correlation_measure(mtilde: Vec<Vec<f64>>, mstar: Vec<Vec<f64>>) -> PyResult<f64> {
    correlation_measure(&mat_from_rows(mtilde)?, &mat_from_rows(mstar)?).map_err(to_py_err)
}

#[pyfunction]
fn svp_iteration_bound(delta: f64, initial_gap: f64, eps: f64) -> PyResult<usize> {
    solvers::svp_iteration_bound(delta, initial_gap, eps).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(name = "witness_example_report")]
fn py_witness_example_report(py: Python<'_>, r: usize) -> PyResult<Py<PyDict>> {
    let w = theorem_witness_example(r).map_err(to_py_err)?;
    let rep = witness_check(&w);
    let d = PyDict::new(py);
    d.set_item("feasible", rep.feasible)?;
    d.set_item("sufficient", rep.sufficient())?;
    d.set_item("equality_residual", rep.equality.slack)?;
    d.set_item("trace_slack", rep.trace_bound.slack)?;
    Ok(d.into())
}

/// Lower bound on the restricted-isometry constant of an objective.
#[pyfunction]
#[pyo3(name = "rip_estimate", signature = (obj, rank, n_samples=64, n_refine=48, seed=0))]
fn py_rip_estimate(
    obj: &Bound<'_, PyAny>,
    rank: usize,
    n_samples: usize,
    n_refine: usize,
    seed: u64,
) -> PyResult<f64> {
    with_objective!(obj, o, rip_estimate(o, rank, n_samples, n_refine, seed).map_err(to_py_err))
}

/// Lower bound on the bounded-difference constant of an objective.
#[pyfunction]
#[pyo3(name = "bdp_estimate", signature = (obj, rank, n_samples=64, seed=0))]
fn py_bdp_estimate(obj: &Bound<'_, PyAny>, rank: usize, n_samples: usize, seed: u64) -> PyResult<f64> {
    with_objective!(obj, o, bdp_estimate(o, rank, n_samples, seed).map_err(to_py_err))
}

/// Certifies a factor pair; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (obj, u, v, mstar, mu=0.0, symmetric=false, tol_grad=1e-8, tol_eig=1e-9))]
#[allow(clippy::too_many_arguments)]
fn certify(
    py: Python<'_>,
    obj: &Bound<'_, PyAny>,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    mstar: Vec<Vec<f64>>,
    mu: f64,
    symmetric: bool,
    tol_grad: f64,
    tol_eig: f64,
) -> PyResult<Py<PyDict>> {
    let uu = mat_from_rows(u)?;
    let vv = mat_from_rows(v)?;
    let pair = if symmetric {
        linalg::FactorPair::new_symmetric(uu).map_err(to_py_err)?
    } else {
        linalg::FactorPair::new(uu, vv).map_err(to_py_err)?
    };
    let ms = mat_from_rows(mstar)?;
    with_objective!(obj, o, {
        let prob = if symmetric {
            FactorizedProblem::Symmetric { obj: o }
        } else {
            FactorizedProblem::Asymmetric { obj: o, mu }
        };
        let rep = criticality_report(&prob, &pair, &ms, tol_grad, tol_eig).map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("classification", format!("{:?}", rep.classification))?;
        d.set_item("grad_res_u", rep.grad_res_u)?;
        d.set_item("grad_res_v", rep.grad_res_v)?;
        d.set_item("balance_residual", rep.balance_residual)?;
        d.set_item("problem_grad_norm", rep.problem_grad_norm)?;
        d.set_item("hessian_lambda_min", rep.hessian_lambda_min)?;
        d.set_item("value_gap", rep.value_gap)?;
        d.set_item("dist_to_orbit", rep.dist_to_orbit)?;
        d.set_item("correlation", rep.correlation)?;
        Ok(d.into())
    })
}

/// Runs the projected method; returns status, iteration count, final value
/// and the per-iteration objective values.
#[pyfunction]
#[pyo3(signature = (obj, rank, m0, eta, t_max=500, tol=1e-8, symmetric=false))]
#[allow(clippy::too_many_arguments)]
fn svp_solve(
    py: Python<'_>,
    obj: &Bound<'_, PyAny>,
    rank: usize,
    m0: Vec<Vec<f64>>,
    eta: f64,
    t_max: usize,
    tol: f64,
    symmetric: bool,
) -> PyResult<Py<PyDict>> {
    let m0 = mat_from_rows(m0)?;
    let manifold = if symmetric { Manifold::Symmetric } else { Manifold::Asymmetric };
    with_objective!(obj, o, {
        let trace = solvers::svp(o, manifold, rank, &m0, eta, t_max, tol).map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("status", format!("{:?}", trace.status))?;
        d.set_item("iterations", trace.rows.len().saturating_sub(1))?;
        d.set_item("final_f", trace.final_value())?;
        d.set_item("objective_values", trace.rows.iter().map(|r| r.f).collect::<Vec<_>>())?;
        d.set_item("final_matrix", mat_to_rows(&trace.final_matrix))?;
        Ok(d.into())
    })
}

#[pymodule]
fn lrll_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensorObjective>()?;
    m.add_class::<PySensingObjective>()?;
    m.add_function(wrap_pyfunction!(truncated_svd_project, m)?)?;
    m.add_function(wrap_pyfunction!(psd_truncated_project, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_r, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_min_sym, m)?)?;
    m.add_function(wrap_pyfunction!(procrustes_distance, m)?)?;
    m.add_function(wrap_pyfunction!(balanced_factorize, m)?)?;
    m.add_function(wrap_pyfunction!(py_correlation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_correlation_measure, m)?)?;
    m.add_function(wrap_pyfunction!(svp_iteration_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_witness_example_report, m)?)?;
    m.add_function(wrap_pyfunction!(py_rip_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(py_bdp_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(svp_solve, m)?)?;
    Ok(())
}
