//! Fourth-order tensors in identity-plus-outer-products form and the
//! quadratic objectives they induce.
//!
//! A tensor `𝓗 = c₀·𝓘 + Σ_t c_t · L_t ⊗ R_t` acts on matrices through
//! `𝓗:K = c₀·K + Σ_t c_t ⟨R_t, K⟩ L_t` and the quadratic form
//! `K:𝓗:K = c₀‖K‖² + Σ_t c_t ⟨L_t,K⟩⟨R_t,K⟩`. Term lists are symmetrized at
//! construction (each `(c, L, R)` stored as `(c/2, L, R) + (c/2, R, L)`) so
//! the bilinear form is symmetric in its arguments.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::{ensure_finite, frob_inner, Mat};

#[derive(Debug, Clone)]
pub struct OuterTensor {
    c0: f64,
    terms: Vec<(f64, Mat, Mat)>,
    dims: (usize, usize),
}

impl OuterTensor {
    /// Identity tensor `c₀·𝓘` on `n×m` matrices.
    pub fn identity(n: usize, m: usize, c0: f64) -> Self {
        OuterTensor { c0, terms: Vec::new(), dims: (n, m) }
    }

    /// Builds `c₀·𝓘 + Σ c_t·L_t ⊗ R_t`, symmetrizing the term list.
    pub fn new(n: usize, m: usize, c0: f64, terms: Vec<(f64, Mat, Mat)>) -> Result<Self> {
        let mut sym_terms = Vec::with_capacity(2 * terms.len());
        for (c, l, r) in terms {
            if l.shape() != (n, m) || r.shape() != (n, m) {
                return Err(Error::Input(format!(
                    "outer tensor term has shape {:?}⊗{:?}, expected ({n},{m}) on both sides",
                    l.shape(),
                    r.shape()
                )));
            }
            ensure_finite(&l, "outer tensor term")?;
            ensure_finite(&r, "outer tensor term")?;
            if l == r {
                sym_terms.push((c, l, r));
            } else {
                sym_terms.push((0.5 * c, l.clone(), r.clone()));
                sym_terms.push((0.5 * c, r, l));
            }
        }
        Ok(OuterTensor { c0, terms: sym_terms, dims: (n, m) })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn terms(&self) -> &[(f64, Mat, Mat)] {
        &self.terms
    }

    /// Tensor–matrix contraction `𝓗:K`.
    pub fn apply(&self, k: &Mat) -> Mat {
        let mut out = k * self.c0;
        for (c, l, r) in &self.terms {
            out += l * (*c * frob_inner(r, k));
        }
        out
    }

    /// Bilinear form `K:𝓗:L`.
    pub fn bform(&self, k: &Mat, l: &Mat) -> f64 {
        frob_inner(&self.apply(k), l)
    }

    /// Quadratic form `K:𝓗:K`.
    pub fn qform(&self, k: &Mat) -> f64 {
        self.bform(k, k)
    }

    /// Convex path toward the identity: `𝓘 + θ(𝓗 − 𝓘)`.
    pub fn dial(&self, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("dial: θ={theta} outside [0, 1]")));
        }
        let terms = self
            .terms
            .iter()
            .map(|(c, l, r)| (theta * c, l.clone(), r.clone()))
            .collect();
        Ok(OuterTensor {
            c0: 1.0 + theta * (self.c0 - 1.0),
            terms,
            dims: self.dims,
        })
    }
}

/// Quadratic objective `f(M) = ½ (M − M*) : 𝓗 : (M − M*)` with constant
/// Hessian `𝓗`, so `∇f(M) = 𝓗:(M − M*)`, `f(M*) = 0` and `∇f(M*) = 0`.
#[derive(Debug, Clone)]
pub struct TensorObjective {
    tensor: OuterTensor,
    mstar: Mat,
    symmetric: bool,
}

impl TensorObjective {
    pub fn new(tensor: OuterTensor, mstar: Mat) -> Result<Self> {
        if mstar.shape() != tensor.dims() {
            return Err(Error::Input(format!(
                "tensor objective: M* has shape {:?}, tensor acts on {:?}",
                mstar.shape(),
                tensor.dims()
            )));
        }
        ensure_finite(&mstar, "tensor objective M*")?;
        let symmetric = mstar.is_square() && (&mstar - mstar.transpose()).norm() <= 1e-12 * mstar.norm().max(1.0);
        Ok(TensorObjective { tensor, mstar, symmetric })
    }

    pub fn tensor(&self) -> &OuterTensor {
        &self.tensor
    }

    pub fn mstar(&self) -> &Mat {
        &self.mstar
    }

    /// Same tensor dialed by `θ`, ground truth preserved.
    pub fn dial(&self, theta: f64) -> Result<TensorObjective> {
        TensorObjective::new(self.tensor.dial(theta)?, self.mstar.clone())
    }
}

impl Objective for TensorObjective {
    fn dims(&self) -> (usize, usize) {
        self.tensor.dims()
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn value(&self, m: &Mat) -> f64 {
        let k = m - &self.mstar;
        0.5 * self.tensor.qform(&k)
    }

    fn gradient(&self, m: &Mat) -> Mat {
        self.tensor.apply(&(m - &self.mstar))
    }

    fn hess_apply(&self, _m: &Mat, k: &Mat) -> Mat {
        self.tensor.apply(k)
    }
}
