//! Finite-dimensional weighted block-trace algebras.
//!
//! An algebra is a direct sum of full matrix blocks `M_{d_1} ⊕ … ⊕ M_{d_k}`
//! equipped with the faithful trace `τ(x) = Σ_b w_b · Tr(x_b)`. Every element
//! is bounded, so every element is measurable with respect to `τ`; the
//! strong sum and product reduce to ordinary blockwise matrix arithmetic.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// One diagonal block: a full `dim × dim` matrix algebra carrying trace weight `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

/// Block structure and trace weights of `⊕_b M_{d_b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracialAlgebra {
    blocks: Vec<Block>,
}

impl TracialAlgebra {
    /// Validates `(dim, weight)` pairs and builds the algebra.
    pub fn new(blocks: &[(usize, f64)]) -> Result<Arc<Self>> {
        if blocks.is_empty() {
            return Err(Error::EmptyAlgebra);
        }
        for (index, &(dim, weight)) in blocks.iter().enumerate() {
            if dim == 0 {
                return Err(Error::ZeroDimension { index });
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::NonpositiveWeight { index, weight });
            }
        }
        Ok(Arc::new(TracialAlgebra {
            blocks: blocks
                .iter()
                .map(|&(dim, weight)| Block { dim, weight })
                .collect(),
        }))
    }

    /// The scalar model `C` with `τ(1) = 1`.
    pub fn scalar() -> Arc<Self> {
        Self::new(&[(1, 1.0)]).expect("valid scalar algebra")
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.weight).collect()
    }

    /// `τ(1) = Σ_b w_b · d_b`.
    pub fn trace_of_identity(&self) -> f64 {
        self.blocks.iter().map(|b| b.weight * b.dim as f64).sum()
    }

    /// Largest block dimension.
    pub fn max_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).max().unwrap_or(0)
    }
}

impl fmt::Display for TracialAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("M{}(w={})", b.dim, b.weight))
            .collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// A block-diagonal complex matrix in a [`TracialAlgebra`].
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    algebra: Arc<TracialAlgebra>,
    blocks: Vec<DMatrix<C64>>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.algebra == other.algebra && self.blocks == other.blocks
    }
}

impl AlgebraElement {
    /// Builds an element from per-block matrices, checking shapes and finiteness.
    pub fn from_blocks(algebra: &Arc<TracialAlgebra>, blocks: Vec<DMatrix<C64>>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::LengthMismatch {
                expected: algebra.num_blocks(),
                actual: blocks.len(),
            });
        }
        for (index, (m, b)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return Err(Error::ShapeMismatch {
                    index,
                    expected: b.dim,
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(AlgebraElement {
            algebra: Arc::clone(algebra),
            blocks,
        })
    }

    /// Builds a diagonal element from per-block real diagonals.
    pub fn from_diagonals(algebra: &Arc<TracialAlgebra>, diagonals: &[Vec<f64>]) -> Result<Self> {
        let blocks = diagonals
            .iter()
            .map(|d| {
                let n = d.len();
                DMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        C64::new(d[i], 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self::from_blocks(algebra, blocks)
    }

    /// Element of the scalar algebra `C`.
    pub fn scalar(value: C64) -> Self {
        let algebra = TracialAlgebra::scalar();
        AlgebraElement {
            algebra,
            blocks: vec![DMatrix::from_element(1, 1, value)],
        }
    }

    pub fn real_scalar(value: f64) -> Self {
        Self::scalar(C64::new(value, 0.0))
    }

    pub fn zeros(algebra: &Arc<TracialAlgebra>) -> Self {
        AlgebraElement {
            algebra: Arc::clone(algebra),
            blocks: algebra
                .blocks()
                .iter()
                .map(|b| DMatrix::zeros(b.dim, b.dim))
                .collect(),
        }
    }

    /// The unit element: the blockwise identity.
    pub fn identity(algebra: &Arc<TracialAlgebra>) -> Self {
        AlgebraElement {
            algebra: Arc::clone(algebra),
            blocks: algebra
                .blocks()
                .iter()
                .map(|b| DMatrix::identity(b.dim, b.dim))
                .collect(),
        }
    }

    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<DMatrix<C64>> {
        self.blocks
    }

    /// Mutable access to one entry, used by perturbation tests.
    pub fn entry_mut(&mut self, block: usize, row: usize, col: usize) -> &mut C64 {
        &mut self.blocks[block][(row, col)]
    }

    pub fn same_algebra(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra
    }

    fn ensure_same(&self, other: &Self) -> Result<()> {
        if self.same_algebra(other) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>) -> Result<Self> {
        self.ensure_same(other)?;
        Ok(AlgebraElement {
            algebra: Arc::clone(&self.algebra),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| op(a, b))
                .collect(),
        })
    }

    pub fn map_blocks(&self, op: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Self {
        AlgebraElement {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().map(op).collect(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|a| a * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_blocks(|a| a * C64::new(c, 0.0))
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.map_blocks(|a| a.adjoint())
    }

    /// `x* x`, the square of the absolute value.
    pub fn abs_squared(&self) -> Self {
        self.map_blocks(|a| a.adjoint() * a)
    }

    /// `Σ_i c_i x_i`; all terms must share one algebra.
    pub fn linear_combination(terms: &[(C64, &AlgebraElement)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or(Error::TupleTooShort { min: 1, actual: 0 })?;
        let mut acc = AlgebraElement::zeros(&first.algebra);
        for (c, x) in terms {
            acc.ensure_same(x)?;
            for (a, b) in acc.blocks.iter_mut().zip(&x.blocks) {
                *a += b * *c;
            }
        }
        Ok(acc)
    }

    /// Sum of elements; errors on an empty list or mixed algebras.
    pub fn sum<'a>(xs: impl IntoIterator<Item = &'a AlgebraElement>) -> Result<Self> {
        let mut iter = xs.into_iter();
        let first = iter.next().ok_or(Error::TupleTooShort { min: 1, actual: 0 })?;
        let mut acc = first.clone();
        for x in iter {
            acc.ensure_same(x)?;
            for (a, b) in acc.blocks.iter_mut().zip(&x.blocks) {
                *a += b;
            }
        }
        Ok(acc)
    }

    /// `τ(x) = Σ_b w_b · Tr(x_b)`.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(m, b)| m.trace() * b.weight)
            .sum()
    }

    /// Largest singular value over all blocks, from the top eigenvalue of `x* x`.
    pub fn operator_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| {
                let gram = m.adjoint() * m;
                gram.symmetric_eigenvalues()
                    .iter()
                    .fold(0.0_f64, |acc, &v| acc.max(v))
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Unweighted Frobenius norm of the block-diagonal matrix.
    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| m.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖x - x*‖_F`, zero exactly for self-adjoint elements.
    pub fn asymmetry(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| (m - m.adjoint()).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.ensure_same(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).norm()))
            .fold(0.0, f64::max))
    }
}
