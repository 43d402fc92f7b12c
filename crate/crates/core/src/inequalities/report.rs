//! Evaluated inequality chains and their verdicts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::TracialAlgebra;

/// Relation between two consecutive sides of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl Relation {
    /// The opposite direction; equality is its own flip.
    pub fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    }

    /// Signed amount by which `a rel b` holds; negative when it fails.
    pub fn slack(self, a: f64, b: f64) -> f64 {
        match self {
            Relation::Le => b - a,
            Relation::Ge => a - b,
            Relation::Eq => -(a - b).abs(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Violation,
    Degenerate,
}

/// Scale-aware slack: `a ≤ b` passes iff `a ≤ b + atol + rtol · max(|a|, |b|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance { atol: 1e-10, rtol: 1e-8 };
    /// Wider relative slack for the exponential catalog entry.
    pub const EXPONENTIAL: Tolerance = Tolerance { atol: 1e-10, rtol: 1e-7 };

    pub fn slack_for(&self, a: f64, b: f64) -> f64 {
        self.atol + self.rtol * a.abs().max(b.abs()).max(1.0)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::DEFAULT
    }
}

/// One labelled side of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Side {
    pub label: String,
    #[serde(with = "nullable_f64")]
    pub value: f64,
}

/// Parameters sufficient to replay a trial.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialContext {
    /// Hex of the derived 32-byte trial seed; empty for hand-built inputs.
    pub seed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub dims: Vec<usize>,
    pub weights: Vec<f64>,
    pub n: usize,
    pub alphas: Vec<f64>,
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// IEEE-754 bit patterns of `weights`, `alphas` and `p`, as 16-digit hex.
    pub bits: ContextBits,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContextBits {
    pub weights: Vec<String>,
    pub alphas: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
}

pub fn hex_bits(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

pub fn from_hex_bits(s: &str) -> Option<f64> {
    u64::from_str_radix(s, 16).ok().map(f64::from_bits)
}

impl TrialContext {
    pub fn new(algebra: &TracialAlgebra, n: usize, alphas: &[f64], function: String, p: Option<f64>) -> Self {
        let weights = algebra.weights();
        TrialContext {
            seed: String::new(),
            master_seed: None,
            trial_index: None,
            variant: None,
            dims: algebra.dims(),
            bits: ContextBits {
                weights: weights.iter().map(|&w| hex_bits(w)).collect(),
                alphas: alphas.iter().map(|&a| hex_bits(a)).collect(),
                p: p.map(hex_bits),
            },
            weights,
            n,
            alphas: alphas.to_vec(),
            function,
            p,
        }
    }
}

/// A fully evaluated chain `s_0 r_0 s_1 r_1 … s_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub claim: String,
    pub verdict: Verdict,
    pub sides: Vec<Side>,
    pub direction: Vec<Relation>,
    /// Minimum signed slack over the chain.
    #[serde(with = "nullable_f64")]
    pub margin: f64,
    /// Slack allowed at the pair attaining the margin.
    #[serde(with = "nullable_f64")]
    pub tolerance: f64,
    pub policy: Tolerance,
    pub context: TrialContext,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InequalityReport {
    /// Evaluates the chain and assigns a verdict.
    pub fn evaluate(
        claim: &str,
        sides: Vec<Side>,
        direction: Vec<Relation>,
        policy: Tolerance,
        context: TrialContext,
    ) -> Self {
        assert_eq!(sides.len(), direction.len() + 1, "chain shape");
        let mut report = InequalityReport {
            claim: claim.to_string(),
            verdict: Verdict::Pass,
            sides,
            direction,
            margin: f64::NAN,
            tolerance: f64::NAN,
            policy,
            context,
            note: None,
        };
        report.rejudge();
        report
    }

    /// A chain whose sides could not be evaluated.
    pub fn degenerate(claim: &str, labels: &[&str], direction: Vec<Relation>, policy: Tolerance, context: TrialContext, note: String) -> Self {
        InequalityReport {
            claim: claim.to_string(),
            verdict: Verdict::Degenerate,
            sides: labels
                .iter()
                .map(|l| Side {
                    label: (*l).to_string(),
                    value: f64::NAN,
                })
                .collect(),
            direction,
            margin: f64::NAN,
            tolerance: f64::NAN,
            policy,
            context,
            note: Some(note),
        }
    }

    fn rejudge(&mut self) {
        if self.sides.iter().any(|s| !s.value.is_finite()) {
            self.verdict = Verdict::Degenerate;
            self.margin = f64::NAN;
            self.tolerance = f64::NAN;
            return;
        }
        let mut margin = f64::INFINITY;
        let mut tolerance = 0.0;
        let mut pass = true;
        for (pair, rel) in self.sides.windows(2).zip(&self.direction) {
            let (a, b) = (pair[0].value, pair[1].value);
            let slack = rel.slack(a, b);
            let allowed = self.policy.slack_for(a, b);
            if slack < -allowed {
                pass = false;
            }
            if slack < margin {
                margin = slack;
                tolerance = allowed;
            }
        }
        if self.direction.is_empty() {
            margin = 0.0;
        }
        self.margin = margin;
        self.tolerance = tolerance;
        self.verdict = if pass { Verdict::Pass } else { Verdict::Violation };
    }

    /// The same sides judged against the inverted relations.
    pub fn flipped(&self) -> Self {
        let mut out = self.clone();
        out.direction = out.direction.iter().map(|r| r.flipped()).collect();
        if out.verdict != Verdict::Degenerate {
            out.rejudge();
        }
        out
    }

    pub fn is_equality(&self) -> bool {
        self.direction.iter().all(|r| *r == Relation::Eq)
    }

    pub fn side_values(&self) -> Vec<f64> {
        self.sides.iter().map(|s| s.value).collect()
    }
}

/// Non-finite doubles serialize as `null` and read back as NaN.
pub(crate) mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sides(values: &[f64]) -> Vec<Side> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| Side {
                label: format!("s{i}"),
                value: v,
            })
            .collect()
    }

    #[test]
    fn chain_verdicts() {
        let r = InequalityReport::evaluate("t", sides(&[1.0, 2.0, 3.0]), vec![Relation::Le, Relation::Le], Tolerance::DEFAULT, TrialContext::default());
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.margin, 1.0);
        let f = r.flipped();
        assert_eq!(f.verdict, Verdict::Violation);
        assert_eq!(f.margin, -1.0);
        assert_eq!(f.direction, vec![Relation::Ge, Relation::Ge]);
    }

    #[test]
    fn tolerance_is_scale_aware() {
        let big = 1e6;
        let r = InequalityReport::evaluate("t", sides(&[big + 1e-3, big]), vec![Relation::Le], Tolerance::DEFAULT, TrialContext::default());
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin < 0.0);
        let r = InequalityReport::evaluate("t", sides(&[big + 1.0, big]), vec![Relation::Le], Tolerance::DEFAULT, TrialContext::default());
        assert_eq!(r.verdict, Verdict::Violation);
    }

    #[test]
    fn equality_relation() {
        let r = InequalityReport::evaluate("t", sides(&[40.0, 10.0]), vec![Relation::Eq], Tolerance::DEFAULT, TrialContext::default());
        assert_eq!(r.verdict, Verdict::Violation);
        assert_eq!(r.margin, -30.0);
        assert!(r.is_equality());
        assert_eq!(r.flipped().verdict, Verdict::Violation);
    }

    #[test]
    fn non_finite_sides_are_degenerate() {
        let r = InequalityReport::evaluate("t", sides(&[f64::INFINITY, 1.0]), vec![Relation::Ge], Tolerance::DEFAULT, TrialContext::default());
        assert_eq!(r.verdict, Verdict::Degenerate);
        assert_eq!(r.flipped().verdict, Verdict::Degenerate);
    }

    #[test]
    fn json_round_trip_with_nan() {
        let alg = TracialAlgebra::new(&[(2, 0.5)]).unwrap();
        let ctx = TrialContext::new(&alg, 2, &[0.1, 0.9], "power:3".into(), None);
        let r = InequalityReport::degenerate("mt1", &["a", "b"], vec![Relation::Le], Tolerance::DEFAULT, ctx, "overflow".into());
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"value\":null"));
        let back: InequalityReport = serde_json::from_str(&text).unwrap();
        assert!(back.sides[0].value.is_nan());
        assert_eq!(back.context, r.context);
        assert_eq!(from_hex_bits(&back.context.bits.alphas[0]), Some(0.1));
    }
}
