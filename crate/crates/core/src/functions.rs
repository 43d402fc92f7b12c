//! Catalog of scalar functions `φ` with the convexity class of `ψ(t) = φ(√t)`.
//!
//! Every entry is continuous and strictly increasing on `[0, ∞)` with `φ(0) = 0`.
//! The convexity of `ψ` decides which way the Clarkson-type trace inequalities
//! point, so classes come from a fixed table rather than from user input. New
//! entries extend [`FunctionKind`] together with the two class tables below.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this argument `e^{t²} - 1` is refused.
pub const EXP_SQUARE_GUARD: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionKind {
    /// `t^p`, `p > 0`.
    Power(f64),
    /// `e^{t²} - 1`.
    ExpSquareMinusOne,
    /// `log(1 + t)`.
    LogOnePlus,
    /// `t`.
    Identity,
}

/// Convexity class of a function on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConvexityClass {
    Convex,
    Concave,
    /// Affine: both convex and concave.
    Both,
    Neither,
}

impl ConvexityClass {
    pub fn is_convex(self) -> bool {
        matches!(self, ConvexityClass::Convex | ConvexityClass::Both)
    }

    pub fn is_concave(self) -> bool {
        matches!(self, ConvexityClass::Concave | ConvexityClass::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConvexityClass::Convex => "convex",
            ConvexityClass::Concave => "concave",
            ConvexityClass::Both => "affine",
            ConvexityClass::Neither => "neither",
        }
    }
}

impl fmt::Display for ConvexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which composite of a catalog entry is evaluated: `φ(t)` itself or `ψ(t) = φ(√t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionForm {
    Phi,
    Psi,
}

/// A catalog entry `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarFunction {
    kind: FunctionKind,
}

impl ScalarFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::NonpositiveP(p));
        }
        Ok(ScalarFunction {
            kind: FunctionKind::Power(p),
        })
    }

    pub fn exp_square_minus_one() -> Self {
        ScalarFunction {
            kind: FunctionKind::ExpSquareMinusOne,
        }
    }

    pub fn log_one_plus() -> Self {
        ScalarFunction {
            kind: FunctionKind::LogOnePlus,
        }
    }

    pub fn identity() -> Self {
        ScalarFunction {
            kind: FunctionKind::Identity,
        }
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    /// True for entries whose growth needs the norm cap in random campaigns.
    pub fn is_exponential(&self) -> bool {
        matches!(self.kind, FunctionKind::ExpSquareMinusOne)
    }

    /// Stable string id: `power:<p>`, `expsq`, `log1p`, `id`.
    pub fn id(&self) -> String {
        match self.kind {
            FunctionKind::Power(p) => format!("power:{p}"),
            FunctionKind::ExpSquareMinusOne => "expsq".into(),
            FunctionKind::LogOnePlus => "log1p".into(),
            FunctionKind::Identity => "id".into(),
        }
    }

    /// `φ(t)` for `t ≥ 0`; `eval(0) == 0` exactly.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = t.max(0.0);
        if t == 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            FunctionKind::Power(p) => Ok(if p == 1.0 {
                t
            } else if p == 2.0 {
                t * t
            } else {
                t.powf(p)
            }),
            FunctionKind::ExpSquareMinusOne => {
                if t > EXP_SQUARE_GUARD {
                    return Err(self.overflow(t));
                }
                Ok((t * t).exp_m1())
            }
            FunctionKind::LogOnePlus => Ok(t.ln_1p()),
            FunctionKind::Identity => Ok(t),
        }
    }

    /// `ψ(t) = φ(√t)` evaluated without a round trip through `√t` where possible.
    pub fn eval_psi(&self, t: f64) -> Result<f64> {
        let t = t.max(0.0);
        if t == 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            FunctionKind::Power(p) => Ok(if p == 2.0 { t } else { t.powf(p / 2.0) }),
            FunctionKind::ExpSquareMinusOne => {
                if t > EXP_SQUARE_GUARD * EXP_SQUARE_GUARD {
                    return Err(self.overflow(t.sqrt()));
                }
                Ok(t.exp_m1())
            }
            FunctionKind::LogOnePlus => Ok(t.sqrt().ln_1p()),
            FunctionKind::Identity => Ok(t.sqrt()),
        }
    }

    pub fn eval_form(&self, form: FunctionForm, t: f64) -> Result<f64> {
        match form {
            FunctionForm::Phi => self.eval(t),
            FunctionForm::Psi => self.eval_psi(t),
        }
    }

    fn overflow(&self, argument: f64) -> Error {
        Error::DomainOverflow {
            function: self.id(),
            argument,
        }
    }

    /// Convexity of `φ` itself on `[0, ∞)`.
    pub fn phi_class(&self) -> ConvexityClass {
        match self.kind {
            FunctionKind::Power(p) if p == 1.0 => ConvexityClass::Both,
            FunctionKind::Power(p) if p > 1.0 => ConvexityClass::Convex,
            FunctionKind::Power(_) => ConvexityClass::Concave,
            FunctionKind::ExpSquareMinusOne => ConvexityClass::Convex,
            FunctionKind::LogOnePlus => ConvexityClass::Concave,
            FunctionKind::Identity => ConvexityClass::Both,
        }
    }

    /// Convexity of `ψ(t) = φ(√t)` from the fixed table.
    pub fn psi_class(&self) -> ConvexityClass {
        match self.kind {
            FunctionKind::Power(p) if p == 2.0 => ConvexityClass::Both,
            FunctionKind::Power(p) if p > 2.0 => ConvexityClass::Convex,
            FunctionKind::Power(_) => ConvexityClass::Concave,
            FunctionKind::ExpSquareMinusOne => ConvexityClass::Convex,
            FunctionKind::LogOnePlus => ConvexityClass::Concave,
            FunctionKind::Identity => ConvexityClass::Concave,
        }
    }

    pub fn class_of(&self, form: FunctionForm) -> ConvexityClass {
        match form {
            FunctionForm::Phi => self.phi_class(),
            FunctionForm::Psi => self.psi_class(),
        }
    }

    /// Table class of `ψ`, confirmed by sampled second differences.
    pub fn classify_psi(&self) -> Result<ConvexityClass> {
        let class = self.psi_class();
        let observed = sampled_class(|t| self.eval_psi(t))?;
        if class_consistent(class, observed) {
            Ok(class)
        } else {
            Err(Error::ClassificationMismatch {
                function: self.id(),
                expected: class.to_string(),
            })
        }
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for ScalarFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "expsq" => Ok(Self::exp_square_minus_one()),
            "log1p" => Ok(Self::log_one_plus()),
            "id" => Ok(Self::identity()),
            _ => {
                let p = s
                    .strip_prefix("power:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownFunctionId(s.to_string()))?;
                Self::power(p)
            }
        }
    }
}

/// A catalog entry together with the composite actually evaluated.
///
/// Selected by `<id>` for `φ` and `psi:<id>` for `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionChoice {
    pub function: ScalarFunction,
    pub form: FunctionForm,
}

impl FunctionChoice {
    pub fn phi(function: ScalarFunction) -> Self {
        FunctionChoice {
            function,
            form: FunctionForm::Phi,
        }
    }

    pub fn id(&self) -> String {
        match self.form {
            FunctionForm::Phi => self.function.id(),
            FunctionForm::Psi => format!("psi:{}", self.function.id()),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.function.eval_form(self.form, t)
    }

    /// Convexity of the evaluated composite.
    pub fn class(&self) -> ConvexityClass {
        self.function.class_of(self.form)
    }
}

impl fmt::Display for FunctionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for FunctionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix("psi:") {
            Some(rest) => Ok(FunctionChoice {
                function: rest.parse()?,
                form: FunctionForm::Psi,
            }),
            None => Ok(FunctionChoice::phi(s.parse()?)),
        }
    }
}

const SAMPLE_POINTS: usize = 200;
const SAMPLE_LO: f64 = 1e-6;
const SAMPLE_HI: f64 = 10.0;
const CURVATURE_TOL: f64 = 1e-9;

/// Classifies a function from normalized second divided differences on a
/// 200-point log grid over `[1e-6, 10]`.
fn sampled_class(f: impl Fn(f64) -> Result<f64>) -> Result<ConvexityClass> {
    let ratio = (SAMPLE_HI / SAMPLE_LO).ln() / (SAMPLE_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SAMPLE_POINTS)
        .map(|i| SAMPLE_LO * (ratio * i as f64).exp())
        .collect();
    let values = grid.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let (mut pos, mut neg) = (false, false);
    for i in 1..SAMPLE_POINTS - 1 {
        let (t0, t1, t2) = (grid[i - 1], grid[i], grid[i + 1]);
        let (f0, f1, f2) = (values[i - 1], values[i], values[i + 1]);
        let slope_lo = (f1 - f0) / (t1 - t0);
        let slope_hi = (f2 - f1) / (t2 - t1);
        let second = (slope_hi - slope_lo) / (t2 - t0);
        // Scale-free curvature: second difference relative to the local magnitude.
        let magnitude = f0.abs().max(f1.abs()).max(f2.abs()).max(f64::MIN_POSITIVE);
        let curvature = second * (t2 - t0) * (t2 - t0) / magnitude;
        if curvature > CURVATURE_TOL {
            pos = true;
        } else if curvature < -CURVATURE_TOL {
            neg = true;
        }
    }
    Ok(match (pos, neg) {
        (false, false) => ConvexityClass::Both,
        (true, false) => ConvexityClass::Convex,
        (false, true) => ConvexityClass::Concave,
        (true, true) => ConvexityClass::Neither,
    })
}

fn class_consistent(table: ConvexityClass, observed: ConvexityClass) -> bool {
    match table {
        ConvexityClass::Both => observed == ConvexityClass::Both,
        ConvexityClass::Convex => matches!(observed, ConvexityClass::Convex | ConvexityClass::Both),
        ConvexityClass::Concave => matches!(observed, ConvexityClass::Concave | ConvexityClass::Both),
        ConvexityClass::Neither => true,
    }
}

/// The standard function catalog: six powers, the exponential and log entries, and the identity.
pub fn default_catalog() -> Vec<ScalarFunction> {
    [0.5, 1.0, 1.5, 2.0, 3.0, 4.0]
        .into_iter()
        .map(|p| ScalarFunction::power(p).expect("positive exponent"))
        .chain([
            ScalarFunction::exp_square_minus_one(),
            ScalarFunction::log_one_plus(),
            ScalarFunction::identity(),
        ])
        .collect()
}
