//! Random algebras, elements, unitaries and weights.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rng::TrialRng;
use crate::algebra::{AlgebraElement, TracialAlgebra, C64};
use crate::error::{Error, Result};
use crate::identities::{ConstraintMode, WeightVector};

/// Norm cap on generated elements when an exponential function is in play.
pub const EXP_NORM_CAP: f64 = 3.0;

/// Raw weights are drawn uniformly from this interval before normalization.
pub const RAW_WEIGHT_RANGE: (f64, f64) = (0.25, 1.0);

/// Inclusive integer range, written `a..b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
}

/// Closed real range, written `a..b` or `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatRange {
    pub lo: f64,
    pub hi: f64,
}

fn split_range(s: &str) -> (&str, &str) {
    match s.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim_start_matches('=').trim()),
        None => (s.trim(), s.trim()),
    }
}

impl FromStr for IntRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = split_range(s);
        let bad = || Error::InvalidConfig(format!("malformed integer range `{s}`"));
        let r = IntRange {
            lo: a.parse().map_err(|_| bad())?,
            hi: b.parse().map_err(|_| bad())?,
        };
        if r.lo > r.hi {
            return Err(Error::InvalidConfig(format!("empty range `{s}`")));
        }
        Ok(r)
    }
}

impl FromStr for FloatRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = split_range(s);
        let bad = || Error::InvalidConfig(format!("malformed range `{s}`"));
        let r = FloatRange {
            lo: a.parse().map_err(|_| bad())?,
            hi: b.parse().map_err(|_| bad())?,
        };
        if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
            return Err(Error::InvalidConfig(format!("empty range `{s}`")));
        }
        Ok(r)
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl fmt::Display for FloatRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}..{:?}", self.lo, self.hi)
    }
}

macro_rules! serde_via_str {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_str!(IntRange);
serde_via_str!(FloatRange);

/// Dimension and weight ranges for one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub dims: IntRange,
    pub weights: FloatRange,
}

impl BlockSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.lo == 0 {
            return Err(Error::InvalidConfig("block dimensions must be at least 1".into()));
        }
        if self.weights.lo <= 0.0 {
            return Err(Error::InvalidConfig("block weights must be positive".into()));
        }
        Ok(())
    }
}

pub fn random_algebra(spec: &[BlockSpec], rng: &mut TrialRng) -> Result<Arc<TracialAlgebra>> {
    let blocks: Vec<(usize, f64)> = spec
        .iter()
        .map(|b| (rng.int_in(b.dims.lo, b.dims.hi), rng.uniform_in(b.weights.lo, b.weights.hi)))
        .collect();
    TracialAlgebra::new(&blocks)
}

fn gaussian_block(d: usize, rng: &mut TrialRng) -> DMatrix<C64> {
    // Row-major fill so the bitstream order reads naturally.
    let mut m = DMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            m[(r, c)] = rng.complex_gaussian();
        }
    }
    m
}

/// Independent standard complex Gaussian entries in every block.
pub fn random_element(algebra: &Arc<TracialAlgebra>, rng: &mut TrialRng) -> AlgebraElement {
    let blocks = algebra.blocks().iter().map(|b| gaussian_block(b.dim, rng)).collect();
    AlgebraElement::from_blocks(algebra, blocks).expect("generated blocks match the algebra")
}

/// [`random_element`], rescaled so that its operator norm is at most `cap`.
pub fn random_element_capped(algebra: &Arc<TracialAlgebra>, rng: &mut TrialRng, cap: Option<f64>) -> AlgebraElement {
    let x = random_element(algebra, rng);
    match cap {
        Some(cap) => {
            let norm = x.operator_norm();
            if norm > cap {
                x.scale_real(cap / norm)
            } else {
                x
            }
        }
        None => x,
    }
}

/// `g* g` for a random `g`.
pub fn random_positive(algebra: &Arc<TracialAlgebra>, rng: &mut TrialRng) -> AlgebraElement {
    random_element(algebra, rng).abs_squared()
}

/// `g* g` with `‖g‖ ≤ cap`.
pub fn random_positive_capped(algebra: &Arc<TracialAlgebra>, rng: &mut TrialRng, cap: Option<f64>) -> AlgebraElement {
    random_element_capped(algebra, rng, cap).abs_squared()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionKind {
    Unitary,
    Contraction,
}

/// Haar unitary per block (QR of a Gaussian block with the phases of `R` removed),
/// optionally scaled by `s` uniform in `(0, 1]`.
pub fn random_unitary_contraction(algebra: &Arc<TracialAlgebra>, rng: &mut TrialRng, kind: ContractionKind) -> AlgebraElement {
    let blocks = algebra
        .blocks()
        .iter()
        .map(|b| {
            let qr = gaussian_block(b.dim, rng).qr();
            let r = qr.r();
            let mut q = qr.q();
            for (j, mut col) in q.column_iter_mut().enumerate() {
                let d = r[(j, j)];
                let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
                col *= phase;
            }
            q
        })
        .collect();
    let u = AlgebraElement::from_blocks(algebra, blocks).expect("generated blocks match the algebra");
    match kind {
        ContractionKind::Unitary => u,
        ContractionKind::Contraction => u.scale_real(rng.uniform_open_closed()),
    }
}

/// Rescales positive raw weights to satisfy `mode` exactly (up to rounding).
pub fn weights_from_raw(raw: &[f64], mode: ConstraintMode) -> Result<WeightVector> {
    let alphas: Vec<f64> = match mode {
        ConstraintMode::SumOne => {
            let s: f64 = raw.iter().sum();
            raw.iter().map(|r| r / s).collect()
        }
        ConstraintMode::SumInverseOne => {
            let s: f64 = raw.iter().map(|r| 1.0 / r).sum();
            raw.iter().map(|r| r * s).collect()
        }
        ConstraintMode::SumInvSqrtPairsOne => {
            let s: f64 = raw.iter().map(|r| 1.0 / r.sqrt()).sum();
            raw.iter().map(|r| r * s * s).collect()
        }
        ConstraintMode::None => raw.to_vec(),
    };
    WeightVector::new(alphas, mode)
}

pub fn random_weights(n: usize, mode: ConstraintMode, rng: &mut TrialRng) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::TupleTooShort { min: 1, actual: 0 });
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.uniform_in(RAW_WEIGHT_RANGE.0, RAW_WEIGHT_RANGE.1)).collect();
    weights_from_raw(&raw, mode)
}
