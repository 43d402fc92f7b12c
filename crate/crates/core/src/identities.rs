//! Operator-valued residuals of the algebraic identities behind the inequalities.
//!
//! Each identity is evaluated as two elements (`lhs`, `rhs`) and reported as
//! the operator norm of their difference together with a scale, so that the
//! residual can be judged relative to the size of the inputs.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, C64};
use crate::error::{Error, Result};

/// Tolerance on weight constraints.
pub const WEIGHT_CONSTRAINT_TOL: f64 = 1e-12;

/// Normalization imposed on a weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintMode {
    /// `Σ α_j = 1`.
    SumOne,
    /// `Σ 1/α_j = 1`.
    SumInverseOne,
    /// `Σ_{i,j} (α_i α_j)^{-1/2} = 1`, i.e. `Σ α_j^{-1/2} = 1`.
    SumInvSqrtPairsOne,
    None,
}

impl ConstraintMode {
    /// Signed deviation of `alphas` from the constraint.
    pub fn residual(self, alphas: &[f64]) -> f64 {
        match self {
            ConstraintMode::SumOne => alphas.iter().sum::<f64>() - 1.0,
            ConstraintMode::SumInverseOne => alphas.iter().map(|a| 1.0 / a).sum::<f64>() - 1.0,
            ConstraintMode::SumInvSqrtPairsOne => {
                let mut total = 0.0;
                for &a in alphas {
                    for &b in alphas {
                        total += 1.0 / (a * b).sqrt();
                    }
                }
                total - 1.0
            }
            ConstraintMode::None => 0.0,
        }
    }
}

impl fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintMode::SumOne => "sum-one",
            ConstraintMode::SumInverseOne => "sum-inverse-one",
            ConstraintMode::SumInvSqrtPairsOne => "sum-inv-sqrt-pairs-one",
            ConstraintMode::None => "none",
        })
    }
}

/// Positive weights `α_0, …, α_{n-1}` satisfying a [`ConstraintMode`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    alphas: Vec<f64>,
    mode: ConstraintMode,
}

impl WeightVector {
    pub fn new(alphas: Vec<f64>, mode: ConstraintMode) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::TupleTooShort { min: 1, actual: 0 });
        }
        if alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::NonpositiveAlpha);
        }
        let residual = mode.residual(&alphas);
        if residual.abs() > WEIGHT_CONSTRAINT_TOL {
            return Err(Error::WeightConstraintViolated {
                mode: mode.to_string(),
                residual,
            });
        }
        Ok(WeightVector { alphas, mode })
    }

    /// Equal weights `1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n], ConstraintMode::SumOne)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn mode(&self) -> ConstraintMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Re-checks the constraint for `mode`, whatever mode the vector was built with.
    pub fn require(&self, mode: ConstraintMode) -> Result<()> {
        let residual = mode.residual(&self.alphas);
        if residual.abs() > WEIGHT_CONSTRAINT_TOL {
            Err(Error::WeightConstraintViolated {
                mode: mode.to_string(),
                residual,
            })
        } else {
            Ok(())
        }
    }
}

/// The `n`-th roots of unity `ω_j = e^{2πij/n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnityRoots {
    n: usize,
}

impl UnityRoots {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::TupleTooShort { min: 1, actual: 0 });
        }
        Ok(UnityRoots { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omegas(&self) -> Vec<C64> {
        (0..self.n).map(|j| self.power(j, 1)).collect()
    }

    /// `ω_j^k`, reduced modulo `n` before exponentiating.
    pub fn power(&self, j: usize, k: usize) -> C64 {
        let m = (j * k) % self.n;
        if (4 * m) % self.n == 0 {
            // Exact values at quarter turns.
            return match (4 * m) / self.n {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
        }
        Complex::from_polar(1.0, std::f64::consts::TAU * m as f64 / self.n as f64)
    }

    /// `Σ_j ω_j^k x_j`.
    pub fn mixed_sum(&self, xs: &[AlgebraElement], k: usize) -> Result<AlgebraElement> {
        let terms: Vec<(C64, &AlgebraElement)> =
            xs.iter().enumerate().map(|(j, x)| (self.power(j, k), x)).collect();
        AlgebraElement::linear_combination(&terms)
    }

    /// All `n` mixed sums, `k = 0..n`.
    pub fn mixed_sums(&self, xs: &[AlgebraElement]) -> Result<Vec<AlgebraElement>> {
        if xs.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: xs.len(),
            });
        }
        (0..self.n).map(|k| self.mixed_sum(xs, k)).collect()
    }
}

impl FromStr for ConstraintMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ConstraintMode::SumOne,
            ConstraintMode::SumInverseOne,
            ConstraintMode::SumInvSqrtPairsOne,
            ConstraintMode::None,
        ]
        .into_iter()
        .find(|m| m.to_string() == s.trim())
        .ok_or_else(|| Error::InvalidConfig(format!("unknown constraint mode `{}`", s.trim())))
    }
}

/// Which identity is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    /// `|Σα_j x_j|² + Σ_{j<k} α_jα_k|x_j - x_k|² = Σα_j|x_j|²` with `Σα = 1`.
    Id1,
    /// `(1/n)Σ_k|Σ_j ω_j^k x_j|² = Σ_j|x_j|²`.
    Ibk,
    /// The two-tuple weighted parallelogram identity, any positive weights.
    Mo1,
    /// Its `y = 0` specialization with `Σ 1/α = 1`.
    Mo2,
}

impl IdentityId {
    pub const ALL: [IdentityId; 4] = [IdentityId::Id1, IdentityId::Ibk, IdentityId::Mo1, IdentityId::Mo2];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::Id1 => "id1",
            IdentityId::Ibk => "ibk",
            IdentityId::Mo1 => "mo1",
            IdentityId::Mo2 => "mo2",
        }
    }

    /// Constraint the identity needs on its weights, if it takes weights.
    pub fn constraint(self) -> Option<ConstraintMode> {
        match self {
            IdentityId::Id1 => Some(ConstraintMode::SumOne),
            IdentityId::Ibk => None,
            IdentityId::Mo1 => Some(ConstraintMode::None),
            IdentityId::Mo2 => Some(ConstraintMode::SumInverseOne),
        }
    }

    pub fn uses_second_tuple(self) -> bool {
        self == IdentityId::Mo1
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownIdentityId(s.to_string()))
    }
}

/// Both sides of an identity, as elements.
#[derive(Debug, Clone)]
pub struct IdentitySides {
    pub lhs: AlgebraElement,
    pub rhs: AlgebraElement,
}

/// Operator norm of `lhs - rhs` and the scale it is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub norm: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.norm / self.scale
    }

    pub fn within(&self, factor: f64) -> bool {
        self.norm <= factor * self.scale
    }
}

fn check_tuple(xs: &[AlgebraElement], expected: usize) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::TupleTooShort { min: 1, actual: 0 });
    }
    if xs.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: xs.len(),
        });
    }
    if xs.iter().any(|x| !x.same_algebra(&xs[0])) {
        return Err(Error::AlgebraMismatch);
    }
    Ok(())
}

fn real(c: f64) -> C64 {
    C64::new(c, 0.0)
}

/// `√(α_i/α_j) u - √(α_j/α_i) v`.
pub(crate) fn weighted_difference(
    alphas: &[f64],
    i: usize,
    j: usize,
    u: &AlgebraElement,
    v: &AlgebraElement,
) -> Result<AlgebraElement> {
    let a = (alphas[i] / alphas[j]).sqrt();
    let b = (alphas[j] / alphas[i]).sqrt();
    AlgebraElement::linear_combination(&[(real(a), u), (real(-b), v)])
}

/// `Σ_{i<j} |√(α_i/α_j) x_i - √(α_j/α_i) x_j|²`.
fn pairwise_weighted_gram(xs: &[AlgebraElement], alphas: &[f64]) -> Result<AlgebraElement> {
    let mut acc = AlgebraElement::zeros(xs[0].algebra());
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let d = weighted_difference(alphas, i, j, &xs[i], &xs[j])?;
            acc = acc.checked_add(&d.abs_squared())?;
        }
    }
    Ok(acc)
}

/// `Σ_j c_j |x_j|²`.
fn weighted_gram_sum(xs: &[AlgebraElement], coeffs: &[f64]) -> Result<AlgebraElement> {
    let grams: Vec<AlgebraElement> = xs.iter().map(|x| x.abs_squared()).collect();
    let terms: Vec<(C64, &AlgebraElement)> = coeffs.iter().map(|&c| real(c)).zip(grams.iter()).collect();
    AlgebraElement::linear_combination(&terms)
}

pub fn sides_id1(xs: &[AlgebraElement], w: &WeightVector) -> Result<IdentitySides> {
    check_tuple(xs, w.len())?;
    w.require(ConstraintMode::SumOne)?;
    let alphas = w.alphas();
    let terms: Vec<(C64, &AlgebraElement)> = alphas.iter().map(|&a| real(a)).zip(xs.iter()).collect();
    let mut lhs = AlgebraElement::linear_combination(&terms)?.abs_squared();
    for j in 0..xs.len() {
        for k in j + 1..xs.len() {
            let d = xs[j].checked_sub(&xs[k])?.abs_squared();
            lhs = lhs.checked_add(&d.scale_real(alphas[j] * alphas[k]))?;
        }
    }
    let rhs = weighted_gram_sum(xs, alphas)?;
    Ok(IdentitySides { lhs, rhs })
}

pub fn sides_ibk(xs: &[AlgebraElement]) -> Result<IdentitySides> {
    check_tuple(xs, xs.len())?;
    let n = xs.len();
    let roots = UnityRoots::new(n)?;
    let grams: Vec<AlgebraElement> = roots.mixed_sums(xs)?.iter().map(|z| z.abs_squared()).collect();
    let lhs = AlgebraElement::sum(&grams)?.scale_real(1.0 / n as f64);
    let rhs = weighted_gram_sum(xs, &vec![1.0; n])?;
    Ok(IdentitySides { lhs, rhs })
}

pub fn sides_mo1(xs: &[AlgebraElement], ys: &[AlgebraElement], w: &WeightVector) -> Result<IdentitySides> {
    check_tuple(xs, w.len())?;
    check_tuple(ys, w.len())?;
    if !xs[0].same_algebra(&ys[0]) {
        return Err(Error::AlgebraMismatch);
    }
    let alphas = w.alphas();
    let lhs = pairwise_weighted_gram(xs, alphas)?.checked_add(&pairwise_weighted_gram(ys, alphas)?)?;
    let mut cross = AlgebraElement::zeros(xs[0].algebra());
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            let d = weighted_difference(alphas, i, j, &xs[i], &ys[j])?;
            cross = cross.checked_add(&d.abs_squared())?;
        }
    }
    let drift = AlgebraElement::sum(xs)?.checked_sub(&AlgebraElement::sum(ys)?)?;
    let rhs = cross.checked_sub(&drift.abs_squared())?;
    Ok(IdentitySides { lhs, rhs })
}

pub fn sides_mo2(xs: &[AlgebraElement], w: &WeightVector) -> Result<IdentitySides> {
    check_tuple(xs, w.len())?;
    w.require(ConstraintMode::SumInverseOne)?;
    let lhs = pairwise_weighted_gram(xs, w.alphas())?;
    let rhs = weighted_gram_sum(xs, w.alphas())?.checked_sub(&AlgebraElement::sum(xs)?.abs_squared())?;
    Ok(IdentitySides { lhs, rhs })
}

/// Largest α-dependent coefficient appearing in the expanded identity, at least 1.
fn coefficient_bound(id: IdentityId, alphas: &[f64]) -> f64 {
    match id {
        IdentityId::Id1 | IdentityId::Ibk => 1.0,
        IdentityId::Mo1 | IdentityId::Mo2 => {
            let max = alphas.iter().cloned().fold(f64::MIN, f64::max);
            let min = alphas.iter().cloned().fold(f64::MAX, f64::min);
            let inverse_sum: f64 = alphas.iter().map(|a| 1.0 / a).sum();
            (max / min).max(max * inverse_sum).max(1.0)
        }
    }
}

/// `(Σ‖x_j‖ + Σ‖y_j‖)² · max(α-coefficients, 1)`, floored at the smallest positive double.
pub fn identity_scale(id: IdentityId, xs: &[AlgebraElement], ys: &[AlgebraElement], alphas: &[f64]) -> f64 {
    let total: f64 = xs.iter().chain(ys).map(|x| x.operator_norm()).sum();
    (total * total * coefficient_bound(id, alphas)).max(f64::MIN_POSITIVE)
}

fn residual_of(sides: &IdentitySides, scale: f64) -> Result<Residual> {
    Ok(Residual {
        norm: sides.lhs.checked_sub(&sides.rhs)?.operator_norm(),
        scale,
    })
}

pub fn residual_id1(xs: &[AlgebraElement], w: &WeightVector) -> Result<Residual> {
    let sides = sides_id1(xs, w)?;
    residual_of(&sides, identity_scale(IdentityId::Id1, xs, &[], w.alphas()))
}

pub fn residual_ibk(xs: &[AlgebraElement]) -> Result<Residual> {
    let sides = sides_ibk(xs)?;
    residual_of(&sides, identity_scale(IdentityId::Ibk, xs, &[], &[]))
}

pub fn residual_mo1(xs: &[AlgebraElement], ys: &[AlgebraElement], w: &WeightVector) -> Result<Residual> {
    let sides = sides_mo1(xs, ys, w)?;
    residual_of(&sides, identity_scale(IdentityId::Mo1, xs, ys, w.alphas()))
}

pub fn residual_mo2(xs: &[AlgebraElement], w: &WeightVector) -> Result<Residual> {
    let sides = sides_mo2(xs, w)?;
    residual_of(&sides, identity_scale(IdentityId::Mo2, xs, &[], w.alphas()))
}

/// Sides of any identity; `ys` and `w` are ignored where the identity does not use them.
pub fn sides_of(
    id: IdentityId,
    xs: &[AlgebraElement],
    ys: &[AlgebraElement],
    w: &WeightVector,
) -> Result<IdentitySides> {
    match id {
        IdentityId::Id1 => sides_id1(xs, w),
        IdentityId::Ibk => sides_ibk(xs),
        IdentityId::Mo1 => sides_mo1(xs, ys, w),
        IdentityId::Mo2 => sides_mo2(xs, w),
    }
}

/// Residual of any identity.
pub fn residual_of_identity(
    id: IdentityId,
    xs: &[AlgebraElement],
    ys: &[AlgebraElement],
    w: &WeightVector,
) -> Result<Residual> {
    let sides = sides_of(id, xs, ys, w)?;
    let ys_used: &[AlgebraElement] = if id.uses_second_tuple() { ys } else { &[] };
    residual_of(&sides, identity_scale(id, xs, ys_used, w.alphas()))
}
