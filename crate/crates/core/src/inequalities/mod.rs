//! Checkers for the trace inequalities.
//!
//! Every checker evaluates each side of a chain independently, then judges the
//! chain with a [`Tolerance`]. Which way a chain points is a pure function of the
//! convexity class of the function involved: for `ψ(t) = φ(√t)` convex the
//! Clarkson-type chains read one way, for `ψ` concave they reverse, and for
//! `ψ` affine they collapse to equalities.

mod report;

use std::fmt;
use std::str::FromStr;

pub use report::{
    from_hex_bits, hex_bits, ContextBits, InequalityReport, Relation, Side, Tolerance, TrialContext, Verdict,
};

use crate::algebra::{AlgebraElement, C64};
use crate::error::{Error, Result};
use crate::functions::{ConvexityClass, FunctionChoice, FunctionForm, ScalarFunction};
use crate::identities::{weighted_difference, ConstraintMode, UnityRoots, WeightVector};
use crate::spectral::{abs_op, ensure_positive, trace_function_spectral, trace_of_positive, trace_phi_of_sqrt};

/// Stable claim ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Claim {
    Fk1,
    Fk2,
    Fk3,
    Fk4,
    Mt1,
    Mt2,
    ClarksonP,
    Tr1,
    Tr2,
    Cor33,
    Cor34,
    Cor34Literal,
    Cor35,
    TlLiteral,
    TlChain,
    Tl1,
    Cor43,
}

impl Claim {
    pub const ALL: [Claim; 17] = [
        Claim::Fk1,
        Claim::Fk2,
        Claim::Fk3,
        Claim::Fk4,
        Claim::Mt1,
        Claim::Mt2,
        Claim::ClarksonP,
        Claim::Tr1,
        Claim::Tr2,
        Claim::Cor33,
        Claim::Cor34,
        Claim::Cor34Literal,
        Claim::Cor35,
        Claim::TlLiteral,
        Claim::TlChain,
        Claim::Tl1,
        Claim::Cor43,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Claim::Fk1 => "fk1",
            Claim::Fk2 => "fk2",
            Claim::Fk3 => "fk3",
            Claim::Fk4 => "fk4",
            Claim::Mt1 => "mt1",
            Claim::Mt2 => "mt2",
            Claim::ClarksonP => "clarkson-p",
            Claim::Tr1 => "tr1",
            Claim::Tr2 => "tr2",
            Claim::Cor33 => "cor3.3",
            Claim::Cor34 => "cor3.4",
            Claim::Cor34Literal => "cor3.4-literal",
            Claim::Cor35 => "cor3.5",
            Claim::TlLiteral => "tl-literal",
            Claim::TlChain => "tl-chain",
            Claim::Tl1 => "tl1",
            Claim::Cor43 => "cor4.3",
        }
    }

    /// Probes record findings and are expected to contain violations.
    pub fn is_probe(self) -> bool {
        matches!(self, Claim::TlLiteral | Claim::TlChain | Claim::Cor34Literal)
    }

    /// Claims parameterized by an exponent `p` rather than a catalog function.
    pub fn uses_p(self) -> bool {
        matches!(self, Claim::ClarksonP | Claim::Cor33 | Claim::Cor43)
    }

    /// Fixed function for the claims that name one.
    pub fn fixed_function(self) -> Option<ScalarFunction> {
        match self {
            Claim::Cor34 => Some(ScalarFunction::exp_square_minus_one()),
            Claim::Cor35 | Claim::Cor34Literal => Some(ScalarFunction::log_one_plus()),
            _ => None,
        }
    }

    /// Whether `choice` satisfies the claim's hypothesis on the function: the
    /// Jensen-type claims constrain the evaluated function itself, the others `ψ`.
    pub fn admits(self, choice: &FunctionChoice) -> bool {
        if let Some(fixed) = self.fixed_function() {
            return choice.form == FunctionForm::Phi && choice.function == fixed;
        }
        match self {
            Claim::Fk1 | Claim::Fk3 => choice.class().is_convex(),
            Claim::Fk2 | Claim::Fk4 => choice.class().is_concave(),
            _ if choice.form == FunctionForm::Psi => false,
            Claim::Mt1 | Claim::Tr1 => choice.function.psi_class().is_convex(),
            Claim::Mt2 | Claim::Tr2 => choice.function.psi_class().is_concave(),
            Claim::TlLiteral | Claim::TlChain | Claim::Tl1 => choice.function.psi_class() != ConvexityClass::Neither,
            _ => false,
        }
    }

    pub fn weight_mode(self) -> Option<ConstraintMode> {
        match self {
            Claim::Fk1 | Claim::Fk2 | Claim::Mt1 | Claim::Mt2 => Some(ConstraintMode::SumOne),
            Claim::TlLiteral | Claim::TlChain => Some(ConstraintMode::SumInvSqrtPairsOne),
            Claim::Tl1 | Claim::Cor43 => Some(ConstraintMode::SumInverseOne),
            _ => None,
        }
    }

    /// Inputs are positive elements.
    pub fn needs_positive(self) -> bool {
        matches!(self, Claim::Fk1 | Claim::Fk2 | Claim::Fk3 | Claim::Fk4)
    }

    /// Takes a second tuple `y`.
    pub fn needs_second_tuple(self) -> bool {
        matches!(self, Claim::TlLiteral | Claim::TlChain)
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Claim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        // The literal log form also parses under its alternate id.
        if s == "cor3.5-literal" {
            return Ok(Claim::Cor34Literal);
        }
        Claim::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownClaimId(s.to_string()))
    }
}

/// The four Jensen-type trace inequalities for positive operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FkVariant {
    /// `τ f(Σα_j x_j) ≤ Σα_j τ f(x_j)`, `f` convex.
    Fk1,
    /// Reverse of `Fk1`, `f` concave.
    Fk2,
    /// `Σ τ f(x_j) ≤ τ f(Σ x_j)`, `f` convex.
    Fk3,
    /// Reverse of `Fk3`, `f` concave.
    Fk4,
}

impl FkVariant {
    pub fn claim(self) -> Claim {
        match self {
            FkVariant::Fk1 => Claim::Fk1,
            FkVariant::Fk2 => Claim::Fk2,
            FkVariant::Fk3 => Claim::Fk3,
            FkVariant::Fk4 => Claim::Fk4,
        }
    }

    fn weighted(self) -> bool {
        matches!(self, FkVariant::Fk1 | FkVariant::Fk2)
    }

    fn wants_convex(self) -> bool {
        matches!(self, FkVariant::Fk1 | FkVariant::Fk3)
    }

    /// Relation of `[combined, sum]` for a strictly convex/concave `f`.
    fn relation(self) -> Relation {
        match self {
            FkVariant::Fk1 | FkVariant::Fk4 => Relation::Le,
            FkVariant::Fk2 | FkVariant::Fk3 => Relation::Ge,
        }
    }
}

/// Forced reading of the direction of a chain, overriding the function's class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reading {
    Convex,
    Concave,
}

impl FromStr for Reading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "convex" => Ok(Reading::Convex),
            "concave" => Ok(Reading::Concave),
            other => Err(Error::InvalidConfig(format!("unknown reading `{other}`"))),
        }
    }
}

/// Relation for a chain whose convex-ψ form reads `convex_relation`.
fn relation_for(class: ConvexityClass, convex_relation: Relation, claim: Claim, function: &str) -> Result<Relation> {
    match class {
        ConvexityClass::Convex => Ok(convex_relation),
        ConvexityClass::Concave => Ok(convex_relation.flipped()),
        ConvexityClass::Both => Ok(Relation::Eq),
        ConvexityClass::Neither => Err(Error::WrongConvexityClass {
            claim: claim.to_string(),
            function: function.to_string(),
            required: "convex or concave".into(),
            actual: class.to_string(),
        }),
    }
}

/// Relation for a p-norm chain: `p > 2` reads like convex ψ.
fn relation_for_p(p: f64, convex_relation: Relation) -> Relation {
    if p > 2.0 {
        convex_relation
    } else if p < 2.0 {
        convex_relation.flipped()
    } else {
        Relation::Eq
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveP(p))
    }
}

fn check_tuple(xs: &[AlgebraElement], min: usize) -> Result<()> {
    if xs.len() < min {
        return Err(Error::TupleTooShort { min, actual: xs.len() });
    }
    if xs.iter().any(|x| !x.same_algebra(&xs[0])) {
        return Err(Error::AlgebraMismatch);
    }
    Ok(())
}

fn check_weights(w: &WeightVector, n: usize, mode: ConstraintMode) -> Result<()> {
    if w.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: w.len(),
        });
    }
    w.require(mode)
}

fn real(c: f64) -> C64 {
    C64::new(c, 0.0)
}

fn tau_phi(phi: &ScalarFunction, z: &AlgebraElement) -> Result<f64> {
    trace_function_spectral(phi, z)
}

/// Turns side evaluation into a report; overflow becomes a degenerate verdict.
fn finish(
    claim: Claim,
    labels: &[&str],
    values: Result<Vec<f64>>,
    direction: Vec<Relation>,
    policy: Tolerance,
    context: TrialContext,
) -> Result<InequalityReport> {
    match values {
        Ok(values) => {
            let sides = labels
                .iter()
                .zip(values)
                .map(|(l, value)| Side {
                    label: (*l).to_string(),
                    value,
                })
                .collect();
            Ok(InequalityReport::evaluate(claim.as_str(), sides, direction, policy, context))
        }
        Err(e @ Error::DomainOverflow { .. }) => Ok(InequalityReport::degenerate(
            claim.as_str(),
            labels,
            direction,
            policy,
            context,
            e.to_string(),
        )),
        Err(e) => Err(e),
    }
}

fn context(xs: &[AlgebraElement], alphas: &[f64], function: String, p: Option<f64>) -> TrialContext {
    TrialContext::new(xs[0].algebra(), xs.len(), alphas, function, p)
}

/// Jensen-type trace inequalities for positive `x_j`.
///
/// Sides are `[τ f(combined), Σ (weighted) τ f(x_j)]` where `combined` is
/// `Σα_j x_j` for the weighted variants and `Σ x_j` otherwise.
pub fn check_fk(
    f: &FunctionChoice,
    xs: &[AlgebraElement],
    w: &WeightVector,
    variant: FkVariant,
    policy: Tolerance,
) -> Result<InequalityReport> {
    let claim = variant.claim();
    check_tuple(xs, 1)?;
    let class = f.class();
    let admissible = if variant.wants_convex() {
        class.is_convex()
    } else {
        class.is_concave()
    };
    if !admissible {
        return Err(Error::WrongConvexityClass {
            claim: claim.to_string(),
            function: f.id(),
            required: if variant.wants_convex() { "convex" } else { "concave" }.into(),
            actual: class.to_string(),
        });
    }
    for x in xs {
        ensure_positive(x)?;
    }
    let alphas: Vec<f64> = if variant.weighted() {
        check_weights(w, xs.len(), ConstraintMode::SumOne)?;
        w.alphas().to_vec()
    } else {
        vec![1.0; xs.len()]
    };
    let relation = if class == ConvexityClass::Both {
        Relation::Eq
    } else {
        variant.relation()
    };
    let values = (|| {
        let terms: Vec<(C64, &AlgebraElement)> = alphas.iter().map(|&a| real(a)).zip(xs).collect();
        let combined = AlgebraElement::linear_combination(&terms)?;
        let left = trace_of_positive(f, &combined)?;
        let mut right = 0.0;
        for (a, x) in alphas.iter().zip(xs) {
            right += a * trace_of_positive(f, x)?;
        }
        Ok(vec![left, right])
    })();
    let labels: &[&str] = if variant.weighted() {
        &["tau f(sum a_j x_j)", "sum a_j tau f(x_j)"]
    } else {
        &["tau f(sum x_j)", "sum tau f(x_j)"]
    };
    let ctx_alphas: &[f64] = if variant.weighted() { w.alphas() } else { &[] };
    finish(claim, labels, values, vec![relation], policy, context(xs, ctx_alphas, f.id(), None))
}

/// Weighted n-tuple Clarkson inequality for general `φ`.
///
/// Sides are `[τφ(|Σα_j x_j|) + Σ_{j<k} τφ(√(α_jα_k)|x_j - x_k|), Σα_j τφ(|x_j|)]`,
/// `≤` for convex ψ and `≥` for concave ψ.
pub fn check_weighted_clarkson(
    phi: &ScalarFunction,
    xs: &[AlgebraElement],
    w: &WeightVector,
    policy: Tolerance,
) -> Result<InequalityReport> {
    check_tuple(xs, 1)?;
    check_weights(w, xs.len(), ConstraintMode::SumOne)?;
    let class = phi.psi_class();
    let claim = if class == ConvexityClass::Concave { Claim::Mt2 } else { Claim::Mt1 };
    let relation = relation_for(class, Relation::Le, claim, &phi.id())?;
    let alphas = w.alphas();
    let values = (|| {
        let terms: Vec<(C64, &AlgebraElement)> = alphas.iter().map(|&a| real(a)).zip(xs).collect();
        let mut left = tau_phi(phi, &AlgebraElement::linear_combination(&terms)?)?;
        for j in 0..xs.len() {
            for k in j + 1..xs.len() {
                let d = xs[j].checked_sub(&xs[k])?.scale_real((alphas[j] * alphas[k]).sqrt());
                left += tau_phi(phi, &d)?;
            }
        }
        let mut right = 0.0;
        for (a, x) in alphas.iter().zip(xs) {
            right += a * tau_phi(phi, x)?;
        }
        Ok(vec![left, right])
    })();
    finish(
        claim,
        &["tau phi(|sum a_j x_j|) + sum_{j<k} tau phi(sqrt(a_j a_k)|x_j - x_k|)", "sum a_j tau phi(|x_j|)"],
        values,
        vec![relation],
        policy,
        context(xs, alphas, phi.id(), None),
    )
}

/// Two-sided p-norm Clarkson chain for an n-tuple (`n = 2` gives `x ± y`).
///
/// Sides are `[n Σ‖x_j‖_p^p, Σ_k ‖Σ_j ω_j^k x_j‖_p^p, n^{p-1} Σ‖x_j‖_p^p]`,
/// `≤ ≤` for `p ≥ 2` and `≥ ≥` for `p ≤ 2`.
pub fn check_clarkson_pnorm(xs: &[AlgebraElement], p: f64, policy: Tolerance) -> Result<InequalityReport> {
    check_p(p)?;
    check_tuple(xs, 1)?;
    let n = xs.len();
    let roots = UnityRoots::new(n)?;
    let f = ScalarFunction::power(p)?;
    let values = (|| {
        let mut sum = 0.0;
        for x in xs {
            sum += tau_phi(&f, x)?;
        }
        let mut middle = 0.0;
        for z in roots.mixed_sums(xs)? {
            middle += tau_phi(&f, &z)?;
        }
        let nf = n as f64;
        Ok(vec![nf * sum, middle, nf.powf(p - 1.0) * sum])
    })();
    let rel = relation_for_p(p, Relation::Le);
    finish(
        Claim::ClarksonP,
        &["n sum |x_j|_p^p", "sum_k |sum_j w_j^k x_j|_p^p", "n^(p-1) sum |x_j|_p^p"],
        values,
        vec![rel, rel],
        policy,
        context(xs, &[], f.id(), Some(p)),
    )
}

fn roots_refinement_values(phi: &ScalarFunction, xs: &[AlgebraElement]) -> Result<Vec<f64>> {
    let n = xs.len();
    let roots = UnityRoots::new(n)?;
    let mixed = roots.mixed_sums(xs)?;
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let mut left = 0.0;
    let mut right = 0.0;
    for z in &mixed {
        left += tau_phi(phi, &z.scale_real(inv_sqrt_n))?;
        right += tau_phi(phi, z)?;
    }
    let grams: Vec<AlgebraElement> = xs.iter().map(|x| x.abs_squared()).collect();
    let middle = trace_phi_of_sqrt(phi, &AlgebraElement::sum(&grams)?)?;
    Ok(vec![left, middle, right / n as f64])
}

/// Roots-of-unity refinement of the n-tuple Clarkson inequality.
///
/// Sides are `[Σ_k τφ(n^{-1/2}|Σ_j ω_j^k x_j|), τφ((Σ|x_j|²)^{1/2}), (1/n) Σ_k τφ(|Σ_j ω_j^k x_j|)]`.
pub fn check_roots_refinement(phi: &ScalarFunction, xs: &[AlgebraElement], policy: Tolerance) -> Result<InequalityReport> {
    let claim = if phi.psi_class() == ConvexityClass::Concave { Claim::Tr2 } else { Claim::Tr1 };
    roots_refinement_report(claim, phi, xs, policy)
}

/// [`check_roots_refinement`] for `φ(t) = e^{t²} - 1`.
pub fn check_exp_refinement(xs: &[AlgebraElement], policy: Tolerance) -> Result<InequalityReport> {
    roots_refinement_report(Claim::Cor34, &ScalarFunction::exp_square_minus_one(), xs, policy)
}

/// [`check_roots_refinement`] for `φ(t) = log(1 + t)`.
pub fn check_log_refinement(xs: &[AlgebraElement], policy: Tolerance) -> Result<InequalityReport> {
    roots_refinement_report(Claim::Cor35, &ScalarFunction::log_one_plus(), xs, policy)
}

fn roots_refinement_report(
    claim: Claim,
    phi: &ScalarFunction,
    xs: &[AlgebraElement],
    policy: Tolerance,
) -> Result<InequalityReport> {
    check_tuple(xs, 1)?;
    let rel = relation_for(phi.psi_class(), Relation::Le, claim, &phi.id())?;
    finish(
        claim,
        &[
            "sum_k tau phi(n^(-1/2)|sum_j w_j^k x_j|)",
            "tau phi((sum |x_j|^2)^(1/2))",
            "(1/n) sum_k tau phi(|sum_j w_j^k x_j|)",
        ],
        roots_refinement_values(phi, xs),
        vec![rel, rel],
        policy,
        context(xs, &[], phi.id(), None),
    )
}

/// p-norm form of the roots-of-unity refinement.
pub fn check_schatten_refinement(xs: &[AlgebraElement], p: f64, policy: Tolerance) -> Result<InequalityReport> {
    check_p(p)?;
    check_tuple(xs, 1)?;
    let f = ScalarFunction::power(p)?;
    let rel = relation_for_p(p, Relation::Le);
    finish(
        Claim::Cor33,
        &[
            "n^(-p/2) sum_k |sum_j w_j^k x_j|_p^p",
            "|(sum |x_j|^2)^(1/2)|_p^p",
            "(1/n) sum_k |sum_j w_j^k x_j|_p^p",
        ],
        roots_refinement_values(&f, xs),
        vec![rel, rel],
        policy,
        context(xs, &[], f.id(), Some(p)),
    )
}

/// The logarithmic refinement evaluated exactly as printed, as a probe.
///
/// Sides are `[(1/n)Σ_k τ log(|Σ_j ω_j^k x_j| + 1), τ log((Σ|x_j|)^{1/2} + 1),
/// (1/n)Σ_k τ log((1/n)|Σ_j ω_j^k x_j| + 1)]` with `≤ ≤`.
pub fn check_log_refinement_literal(xs: &[AlgebraElement], policy: Tolerance) -> Result<InequalityReport> {
    check_tuple(xs, 1)?;
    let log = ScalarFunction::log_one_plus();
    let n = xs.len();
    let values = (|| {
        let roots = UnityRoots::new(n)?;
        let mut left = 0.0;
        let mut right = 0.0;
        for z in roots.mixed_sums(xs)? {
            left += tau_phi(&log, &z)?;
            right += tau_phi(&log, &z.scale_real(1.0 / n as f64))?;
        }
        let abs: Vec<AlgebraElement> = xs.iter().map(abs_op).collect::<Result<_>>()?;
        let middle = trace_phi_of_sqrt(&log, &AlgebraElement::sum(&abs)?)?;
        Ok(vec![left / n as f64, middle, right / n as f64])
    })();
    finish(
        Claim::Cor34Literal,
        &[
            "(1/n) sum_k tau log(|sum_j w_j^k x_j| + 1)",
            "tau log((sum |x_j|)^(1/2) + 1)",
            "(1/n) sum_k tau log((1/n)|sum_j w_j^k x_j| + 1)",
        ],
        values,
        vec![Relation::Le, Relation::Le],
        policy,
        context(xs, &[], log.id(), None),
    )
}

fn check_pair_tuples(xs: &[AlgebraElement], ys: &[AlgebraElement]) -> Result<()> {
    check_tuple(xs, 1)?;
    check_tuple(ys, 1)?;
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if !xs[0].same_algebra(&ys[0]) {
        return Err(Error::AlgebraMismatch);
    }
    Ok(())
}

/// `Σ_{i<j} τφ(|√(α_i/α_j) x_i - √(α_j/α_i) x_j|)`.
fn pairwise_term(phi: &ScalarFunction, xs: &[AlgebraElement], alphas: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            total += tau_phi(phi, &weighted_difference(alphas, i, j, &xs[i], &xs[j])?)?;
        }
    }
    Ok(total)
}

fn sum_difference(xs: &[AlgebraElement], ys: &[AlgebraElement]) -> Result<AlgebraElement> {
    AlgebraElement::sum(xs)?.checked_sub(&AlgebraElement::sum(ys)?)
}

fn tl_relation(phi: &ScalarFunction, reading: Option<Reading>) -> Result<Relation> {
    match reading {
        Some(Reading::Convex) => Ok(Relation::Ge),
        Some(Reading::Concave) => Ok(Relation::Le),
        None => relation_for(phi.psi_class(), Relation::Ge, Claim::TlLiteral, &phi.id()),
    }
}

/// The two-tuple weighted parallelogram inequality evaluated exactly as stated.
///
/// Sides are `[Σ_{i,j} (α_iα_j)^{-1/2} τφ(|α_i x_i - α_j y_j|),
/// Σ_{i<j} τφ(|√(α_i/α_j)x_i - √(α_j/α_i)x_j|) + (same in y) + τφ(|Σ(x_i - y_i)|)]`,
/// `≥` for convex ψ and `≤` for concave ψ unless `reading` forces a direction.
pub fn check_tl_literal(
    xs: &[AlgebraElement],
    ys: &[AlgebraElement],
    w: &WeightVector,
    phi: &ScalarFunction,
    reading: Option<Reading>,
    policy: Tolerance,
) -> Result<InequalityReport> {
    check_pair_tuples(xs, ys)?;
    check_weights(w, xs.len(), ConstraintMode::SumInvSqrtPairsOne)?;
    let rel = tl_relation(phi, reading)?;
    let alphas = w.alphas();
    let values = (|| {
        let mut left = 0.0;
        for i in 0..xs.len() {
            for j in 0..ys.len() {
                let z = AlgebraElement::linear_combination(&[(real(alphas[i]), &xs[i]), (real(-alphas[j]), &ys[j])])?;
                left += tau_phi(phi, &z)? / (alphas[i] * alphas[j]).sqrt();
            }
        }
        let right = pairwise_term(phi, xs, alphas)?
            + pairwise_term(phi, ys, alphas)?
            + tau_phi(phi, &sum_difference(xs, ys)?)?;
        Ok(vec![left, right])
    })();
    finish(
        Claim::TlLiteral,
        &[
            "sum_{i,j} (a_i a_j)^(-1/2) tau phi(|a_i x_i - a_j y_j|)",
            "pairwise x + pairwise y + tau phi(|sum (x_i - y_i)|)",
        ],
        values,
        vec![rel],
        policy,
        context(xs, alphas, phi.id(), None),
    )
}

/// Step-by-step evaluation of the argument for [`check_tl_literal`].
///
/// Returns three reports, claim ids `tl-chain/fk1`, `tl-chain/mo1`, `tl-chain/fk3`:
/// the Jensen step `Σ c_ij τψ(|z_ij|²) ≥ τψ(Σ c_ij |z_ij|²)` with
/// `z_ij = α_i x_i - α_j y_j` and `c_ij = (α_iα_j)^{-1/2}`; the claimed equality
/// between `Σ c_ij |z_ij|²` and the parallelogram-identity right side (compared
/// under `τψ`); and the superadditivity step splitting that right side.
pub fn check_tl_proof_chain(
    xs: &[AlgebraElement],
    ys: &[AlgebraElement],
    w: &WeightVector,
    phi: &ScalarFunction,
    policy: Tolerance,
) -> Result<Vec<InequalityReport>> {
    check_pair_tuples(xs, ys)?;
    check_weights(w, xs.len(), ConstraintMode::SumInvSqrtPairsOne)?;
    tl_chain_steps(xs, ys, w.alphas(), phi, policy)
}

/// Proof-chain steps for arbitrary positive weights.
///
/// The substitution step holds exactly when `α_iα_j = 1` for all pairs.
pub fn tl_chain_steps(
    xs: &[AlgebraElement],
    ys: &[AlgebraElement],
    alphas: &[f64],
    phi: &ScalarFunction,
    policy: Tolerance,
) -> Result<Vec<InequalityReport>> {
    check_pair_tuples(xs, ys)?;
    if alphas.len() != xs.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            actual: alphas.len(),
        });
    }
    let class = phi.psi_class();
    let convex_ge = relation_for(class, Relation::Ge, Claim::TlChain, &phi.id())?;
    let psi = FunctionChoice {
        function: *phi,
        form: FunctionForm::Psi,
    };
    let ctx = context(xs, alphas, phi.id(), None);
    let algebra = xs[0].algebra();

    // Operator quantities shared by the steps.
    let mut jensen_terms = 0.0_f64;
    let mut jensen_terms_err = None;
    let mut combined = AlgebraElement::zeros(algebra);
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            let z = AlgebraElement::linear_combination(&[(real(alphas[i]), &xs[i]), (real(-alphas[j]), &ys[j])])?;
            let c = 1.0 / (alphas[i] * alphas[j]).sqrt();
            match tau_phi(phi, &z) {
                Ok(v) => jensen_terms += c * v,
                Err(e) => jensen_terms_err = Some(e),
            }
            combined = combined.checked_add(&z.abs_squared().scale_real(c))?;
        }
    }
    let mut pieces: Vec<AlgebraElement> = Vec::new();
    for tuple in [xs, ys] {
        for i in 0..tuple.len() {
            for j in i + 1..tuple.len() {
                pieces.push(weighted_difference(alphas, i, j, &tuple[i], &tuple[j])?);
            }
        }
    }
    pieces.push(sum_difference(xs, ys)?);
    let substituted = AlgebraElement::sum(&pieces.iter().map(|p| p.abs_squared()).collect::<Vec<_>>())?;
    let operator_gap = combined.checked_sub(&substituted)?.operator_norm();

    let step1 = (|| {
        if let Some(e) = jensen_terms_err.clone() {
            return Err(e);
        }
        Ok(vec![jensen_terms, trace_of_positive(&psi, &combined)?])
    })();
    let step2 = (|| Ok(vec![trace_of_positive(&psi, &combined)?, trace_of_positive(&psi, &substituted)?]))();
    let step3 = (|| {
        let mut split = 0.0;
        for p in &pieces {
            split += tau_phi(phi, p)?;
        }
        Ok(vec![trace_of_positive(&psi, &substituted)?, split])
    })();

    let mut reports = vec![
        finish(
            Claim::TlChain,
            &["sum c_ij tau psi(|z_ij|^2)", "tau psi(sum c_ij |z_ij|^2)"],
            step1,
            vec![convex_ge],
            policy,
            ctx.clone(),
        )?,
        finish(
            Claim::TlChain,
            &["tau psi(sum c_ij |z_ij|^2)", "tau psi(identity right side)"],
            step2,
            vec![Relation::Eq],
            policy,
            ctx.clone(),
        )?,
        finish(
            Claim::TlChain,
            &["tau psi(identity right side)", "sum of tau phi over its terms"],
            step3,
            vec![convex_ge],
            policy,
            ctx,
        )?,
    ];
    for (report, step) in reports.iter_mut().zip(["fk1", "mo1", "fk3"]) {
        report.claim = format!("{}/{step}", Claim::TlChain);
    }
    reports[1].note = Some(format!("operator residual {operator_gap:e}"));
    Ok(reports)
}

/// The `y = 0` case of the parallelogram inequality with `Σ 1/α_j = 1`.
///
/// Sides are `[Σ_j (1/α_j) τφ(α_j|x_j|), Σ_{i<j} τφ(|√(α_i/α_j)x_i - √(α_j/α_i)x_j|) + τφ(|Σx_i|)]`,
/// `≥` for convex ψ and `≤` for concave ψ.
pub fn check_tl1(xs: &[AlgebraElement], w: &WeightVector, phi: &ScalarFunction, policy: Tolerance) -> Result<InequalityReport> {
    check_tuple(xs, 1)?;
    check_weights(w, xs.len(), ConstraintMode::SumInverseOne)?;
    let rel = relation_for(phi.psi_class(), Relation::Ge, Claim::Tl1, &phi.id())?;
    let alphas = w.alphas();
    let values = (|| {
        let mut left = 0.0;
        for (a, x) in alphas.iter().zip(xs) {
            left += tau_phi(phi, &x.scale_real(*a))? / a;
        }
        let right = pairwise_term(phi, xs, alphas)? + tau_phi(phi, &AlgebraElement::sum(xs)?)?;
        Ok(vec![left, right])
    })();
    finish(
        Claim::Tl1,
        &[
            "sum (1/a_j) tau phi(a_j |x_j|)",
            "sum_{i<j} tau phi(|sqrt(a_i/a_j) x_i - sqrt(a_j/a_i) x_j|) + tau phi(|sum x_i|)",
        ],
        values,
        vec![rel],
        policy,
        context(xs, alphas, phi.id(), None),
    )
}

/// p-norm form of [`check_tl1`]: `Σ α_i^{p-1}‖x_i‖_p^p` against the pairwise sum.
pub fn check_pnorm_parallelogram(xs: &[AlgebraElement], w: &WeightVector, p: f64, policy: Tolerance) -> Result<InequalityReport> {
    check_p(p)?;
    check_tuple(xs, 1)?;
    check_weights(w, xs.len(), ConstraintMode::SumInverseOne)?;
    let f = ScalarFunction::power(p)?;
    let alphas = w.alphas();
    let values = (|| {
        let mut left = 0.0;
        for (a, x) in alphas.iter().zip(xs) {
            left += a.powf(p - 1.0) * tau_phi(&f, x)?;
        }
        let right = pairwise_term(&f, xs, alphas)? + tau_phi(&f, &AlgebraElement::sum(xs)?)?;
        Ok(vec![left, right])
    })();
    finish(
        Claim::Cor43,
        &[
            "sum a_i^(p-1) |x_i|_p^p",
            "sum_{i<j} |sqrt(a_i/a_j) x_i - sqrt(a_j/a_i) x_j|_p^p + |sum x_i|_p^p",
        ],
        values,
        vec![relation_for_p(p, Relation::Ge)],
        policy,
        context(xs, alphas, f.id(), Some(p)),
    )
}

#[cfg(test)]
mod tests;
