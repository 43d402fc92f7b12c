//! Functional calculus, generalized singular value functions and trace evaluation.
//!
//! For an element `x` of a weighted block algebra the distribution function
//! `λ ↦ τ(e^{|x|}(λ, ∞))` counts, with block weights, the singular values of
//! `x` above `λ`. Its generalized inverse `μ_t(x)` is therefore a decreasing
//! right-continuous step function on `[0, τ(1))`; past `τ(1)` it is identically
//! zero and is not stored. Traces of functions of `|x|` can be computed either
//! in the eigenbasis of each block or as the step-function integral
//! `∫ f(μ_t(x)) dt`; the two routes must agree.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::algebra::{AlgebraElement, C64};
use crate::error::{Error, Result};
use crate::functions::{FunctionChoice, FunctionForm, ScalarFunction};

/// Relative asymmetry tolerated before an element is rejected as not self-adjoint.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Per-dimension relative slack for round-off negative eigenvalues of positive elements.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-12;

/// A function applied to spectra.
pub trait SpectralFunction {
    fn value(&self, t: f64) -> Result<f64>;
}

impl SpectralFunction for ScalarFunction {
    fn value(&self, t: f64) -> Result<f64> {
        self.eval(t)
    }
}

impl SpectralFunction for FunctionChoice {
    fn value(&self, t: f64) -> Result<f64> {
        self.eval(t)
    }
}

/// Eigen-decomposition of one Hermitian block, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct BlockEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl BlockEigen {
    /// `V diag(g(λ)) V*`.
    pub fn recompose(&self, g: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = C64::new(g(self.values[j]), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Blockwise eigen-decomposition of a self-adjoint element.
///
/// The element is symmetrized as `(x + x*)/2` after the hermiticity check.
pub fn hermitian_eigen(x: &AlgebraElement) -> Result<Vec<BlockEigen>> {
    let allowed = HERMITICITY_TOL * x.frobenius_norm();
    let asymmetry = x.asymmetry();
    if asymmetry > allowed {
        return Err(Error::NotSelfAdjoint { asymmetry, allowed });
    }
    Ok(x.blocks().iter().map(block_eigen).collect())
}

fn block_eigen(m: &DMatrix<C64>) -> BlockEigen {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    BlockEigen { values, vectors }
}

/// Eigen-decomposition of a positive element with round-off negatives clamped to 0.
///
/// Eigenvalues below `-dim · 1e-12 · ‖a‖` are a hard error.
pub fn positive_eigen(a: &AlgebraElement) -> Result<Vec<BlockEigen>> {
    let mut eig = hermitian_eigen(a)?;
    let norm = eig
        .iter()
        .flat_map(|e| e.values.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    for (e, block) in eig.iter_mut().zip(a.algebra().blocks()) {
        let allowed = -(block.dim as f64) * NEGATIVE_EIGEN_TOL * norm;
        for v in e.values.iter_mut() {
            if *v < allowed {
                return Err(Error::NotPositive {
                    eigenvalue: *v,
                    allowed,
                });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
    }
    Ok(eig)
}

/// Checks that `a` is positive semidefinite within round-off.
pub fn ensure_positive(a: &AlgebraElement) -> Result<()> {
    positive_eigen(a).map(|_| ())
}

/// `|x| = (x* x)^{1/2}`.
pub fn abs_op(x: &AlgebraElement) -> Result<AlgebraElement> {
    let eig = positive_eigen(&x.abs_squared())?;
    let blocks = eig.iter().map(|e| e.recompose(f64::sqrt)).collect();
    AlgebraElement::from_blocks(x.algebra(), blocks)
}

/// `f(a)` for positive `a`, through the eigenbasis of each block.
///
/// Clamped zero eigenvalues map to exactly `0 = f(0)`.
pub fn apply_scalar_function(f: &impl SpectralFunction, a: &AlgebraElement) -> Result<AlgebraElement> {
    let eig = positive_eigen(a)?;
    let mut blocks = Vec::with_capacity(eig.len());
    for e in &eig {
        let mapped = e
            .values
            .iter()
            .map(|&v| if v == 0.0 { Ok(0.0) } else { f.value(v) })
            .collect::<Result<Vec<_>>>()?;
        let mapped_eig = BlockEigen {
            values: mapped,
            vectors: e.vectors.clone(),
        };
        blocks.push(mapped_eig.recompose(|v| v));
    }
    AlgebraElement::from_blocks(a.algebra(), blocks)
}

/// Singular values of each block, descending, from a per-block SVD.
pub fn block_singular_values(x: &AlgebraElement) -> Vec<Vec<f64>> {
    x.blocks()
        .iter()
        .map(|m| {
            let svd = SVD::new(m.clone(), false, false);
            let mut s: Vec<f64> = svd.singular_values.iter().map(|v| v.max(0.0)).collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        })
        .collect()
}

/// `λ ↦ τ(e^{|x|}(λ, ∞))`: total weight of singular values strictly above `λ`.
pub fn distribution_function(x: &AlgebraElement, lambda: f64) -> f64 {
    distribution_from_singular_values(x, &block_singular_values(x), lambda)
}

/// Distribution function evaluated from precomputed block singular values.
pub fn distribution_from_singular_values(x: &AlgebraElement, singular: &[Vec<f64>], lambda: f64) -> f64 {
    singular
        .iter()
        .zip(x.algebra().blocks())
        .map(|(s, b)| b.weight * s.iter().filter(|&&v| v > lambda).count() as f64)
        .sum()
}

/// The generalized singular value function `t ↦ μ_t(x)` on `[0, τ(1))`.
pub fn singular_values(x: &AlgebraElement) -> StepFunction {
    let singular = block_singular_values(x);
    let pairs = singular
        .iter()
        .zip(x.algebra().blocks())
        .flat_map(|(s, b)| s.iter().map(move |&v| (v, b.weight)))
        .collect();
    StepFunction::from_unsorted(pairs)
}

/// Eigenbasis route: `Σ_b w_b Σ_i f(s_i)` over the singular values of each block.
pub fn trace_function_spectral(f: &impl SpectralFunction, x: &AlgebraElement) -> Result<f64> {
    let singular = block_singular_values(x);
    let mut total = 0.0;
    for (s, b) in singular.iter().zip(x.algebra().blocks()) {
        let mut block_sum = 0.0;
        for &v in s {
            block_sum += f.value(v)?;
        }
        total += b.weight * block_sum;
    }
    Ok(total)
}

/// Step-function route: `∫_0^{τ(1)} f(μ_t(x)) dt`.
pub fn trace_function_mu(f: &impl SpectralFunction, x: &AlgebraElement) -> Result<f64> {
    singular_values(x).integrate(f)
}

/// `τ(g(a))` for positive `a`, from its clamped eigenvalues.
pub fn trace_of_positive(g: &impl SpectralFunction, a: &AlgebraElement) -> Result<f64> {
    let eig = positive_eigen(a)?;
    let mut total = 0.0;
    for (e, b) in eig.iter().zip(a.algebra().blocks()) {
        let mut block_sum = 0.0;
        for &v in &e.values {
            block_sum += g.value(v)?;
        }
        total += b.weight * block_sum;
    }
    Ok(total)
}

/// `τ(φ(a^{1/2})) = τ(ψ(a))` for positive `a`.
pub fn trace_phi_of_sqrt(f: &ScalarFunction, a: &AlgebraElement) -> Result<f64> {
    trace_of_positive(
        &FunctionChoice {
            function: *f,
            form: FunctionForm::Psi,
        },
        a,
    )
}

/// `‖x‖_p = τ(|x|^p)^{1/p}`; a quasi-norm for `0 < p < 1`.
pub fn schatten_p_norm(x: &AlgebraElement, p: f64) -> Result<f64> {
    Ok(schatten_p_power(x, p)?.powf(1.0 / p))
}

/// `‖x‖_p^p = τ(|x|^p)`.
pub fn schatten_p_power(x: &AlgebraElement, p: f64) -> Result<f64> {
    let f = ScalarFunction::power(p)?;
    trace_function_spectral(&f, x)
}

/// Rounds to 12 significant digits; the equality used when merging steps.
fn round_sig12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// A decreasing right-continuous step function on `[0, L)`.
///
/// Step `i` takes value `steps[i].0` on `[c_i, c_i + steps[i].1)` where `c_i` is
/// the sum of the preceding lengths. Adjacent values that agree to 12
/// significant digits are merged, keeping the larger value.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    steps: Vec<(f64, f64)>,
}

impl StepFunction {
    /// Builds from `(value, length)` pairs in any order.
    pub fn from_unsorted(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut steps: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (value, length) in pairs {
            if length <= 0.0 {
                continue;
            }
            match steps.last_mut() {
                Some(last) if round_sig12(last.0) == round_sig12(value) => last.1 += length,
                _ => steps.push((value, length)),
            }
        }
        StepFunction { steps }
    }

    /// Builds from pairs that must already be non-increasing in value with positive lengths.
    pub fn from_steps(pairs: Vec<(f64, f64)>) -> Result<Self> {
        for w in pairs.windows(2) {
            if w[1].0 > w[0].0 {
                return Err(Error::InvalidConfig("step values must be non-increasing".into()));
            }
        }
        if pairs.iter().any(|&(v, l)| !(l > 0.0) || !(v >= 0.0)) {
            return Err(Error::InvalidConfig(
                "step values must be non-negative and lengths positive".into(),
            ));
        }
        Ok(Self::from_unsorted(pairs))
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn total_length(&self) -> f64 {
        self.steps.iter().map(|s| s.1).sum()
    }

    /// Left endpoints of each step followed by the right end of the domain.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for &(_, l) in &self.steps {
            acc += l;
            out.push(acc);
        }
        out
    }

    /// `μ_t`; zero for `t` at or past the end of the domain.
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, l) in &self.steps {
            acc += l;
            if t < acc {
                return v;
            }
        }
        0.0
    }

    /// `Σ f(value) · length`, the exact integral of `f ∘ μ`.
    pub fn integrate(&self, f: &impl SpectralFunction) -> Result<f64> {
        let mut total = 0.0;
        for &(v, l) in &self.steps {
            total += f.value(v)? * l;
        }
        Ok(total)
    }

    /// `t ↦ g(μ_t)`; `g` should be increasing for the result to stay decreasing.
    pub fn map_values(&self, g: &impl SpectralFunction) -> Result<Self> {
        let pairs = self
            .steps
            .iter()
            .map(|&(v, l)| Ok((g.value(v)?, l)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_unsorted(pairs))
    }

    /// Largest pointwise gap, checked on every interval of the common refinement.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut cuts: Vec<f64> = self.breakpoints();
        cuts.extend(other.breakpoints());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut gap = 0.0_f64;
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                let mid = 0.5 * (w[0] + w[1]);
                gap = gap.max((self.eval(mid) - other.eval(mid)).abs());
            }
        }
        gap
    }
}
