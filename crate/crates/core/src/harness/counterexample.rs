//! Search for the smallest violating instance of a claim or identity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::campaign::{draw_inputs, evaluate, min_tuple_size, variants_for, TrialInputs};
use super::config::TrialConfig;
use super::generate::{BlockSpec, IntRange};
use super::identity::draw_identity_inputs;
use super::rng::{trial_seed, TrialRng};
use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::identities::{residual_of_identity, IdentityId, Residual};
use crate::inequalities::{Claim, InequalityReport, Verdict};

/// Relative residual above which an identity instance counts as a counterexample.
pub const IDENTITY_RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchTarget {
    Claim(Claim),
    Identity(IdentityId),
}

impl fmt::Display for SearchTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchTarget::Claim(c) => c.fmt(f),
            SearchTarget::Identity(i) => i.fmt(f),
        }
    }
}

impl FromStr for SearchTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(id) = s.parse::<IdentityId>() {
            return Ok(SearchTarget::Identity(id));
        }
        s.parse::<Claim>().map(SearchTarget::Claim)
    }
}

/// Search space: total dimension `1..=max_dim` (one block), then tuple size up to
/// `max_n`, with `trials` random draws per variant at each level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub trials: usize,
    pub max_dim: usize,
    pub max_n: usize,
}

impl SearchBudget {
    pub fn is_empty(&self) -> bool {
        self.trials == 0 || self.max_dim == 0 || self.max_n == 0
    }
}

/// Exact entries of an element, block by block, as row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&AlgebraElement> for ElementRecord {
    fn from(x: &AlgebraElement) -> Self {
        ElementRecord {
            blocks: x
                .blocks()
                .iter()
                .map(|m| {
                    (0..m.nrows())
                        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub dims: Vec<usize>,
    pub weights: Vec<f64>,
    pub alphas: Vec<f64>,
    pub xs: Vec<ElementRecord>,
    pub ys: Vec<ElementRecord>,
}

impl From<&TrialInputs> for InputRecord {
    fn from(t: &TrialInputs) -> Self {
        InputRecord {
            dims: t.algebra.dims(),
            weights: t.algebra.weights(),
            alphas: t.weights.alphas().to_vec(),
            xs: t.xs.iter().map(ElementRecord::from).collect(),
            ys: t.ys.iter().map(ElementRecord::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub target: String,
    pub dim: usize,
    pub n: usize,
    pub variant: Option<String>,
    pub seed: String,
    pub report: Option<InequalityReport>,
    pub residual: Option<Residual>,
    pub inputs: InputRecord,
}

/// Returns the first violation in order of dimension, tuple size, variant, trial.
pub fn search_counterexample(target: SearchTarget, config: &TrialConfig, budget: SearchBudget) -> Result<Option<Counterexample>> {
    config.validate()?;
    if budget.is_empty() {
        return Err(Error::InvalidConfig("empty search budget".into()));
    }
    let weights = config.block_spec[0].weights;
    let min_n = match target {
        SearchTarget::Claim(c) => min_tuple_size(c),
        SearchTarget::Identity(_) => 1,
    };
    for dim in 1..=budget.max_dim {
        let spec = [BlockSpec {
            dims: IntRange { lo: dim, hi: dim },
            weights,
        }];
        for n in min_n..=budget.max_n {
            let found = match target {
                SearchTarget::Claim(claim) => search_claim(claim, config, &spec, n, budget.trials)?,
                SearchTarget::Identity(id) => search_identity(id, config, &spec, n, budget.trials)?,
            };
            if let Some(mut c) = found {
                c.dim = dim;
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

fn search_claim(claim: Claim, config: &TrialConfig, spec: &[BlockSpec], n: usize, trials: usize) -> Result<Option<Counterexample>> {
    for variant in variants_for(claim, config)? {
        let stream = format!("search|{claim}|d={}|n={n}|{}", spec[0].dims.lo, variant.label);
        for i in 0..trials as u64 {
            let seed = trial_seed(config.master_seed, &stream, i);
            let mut rng = TrialRng::from_seed(seed);
            let inputs = draw_inputs(claim, &variant, config, spec, n, &mut rng)?;
            let reports = evaluate(claim, &variant, &inputs, config.policy(variant.is_exponential()), config.reading())?;
            if let Some(mut r) = reports.into_iter().find(|r| r.verdict == Verdict::Violation) {
                r.context.seed = hex::encode(seed);
                r.context.master_seed = Some(config.master_seed);
                r.context.trial_index = Some(i);
                return Ok(Some(Counterexample {
                    target: claim.to_string(),
                    dim: 0,
                    n,
                    variant: Some(variant.label.clone()),
                    seed: hex::encode(seed),
                    report: Some(r),
                    residual: None,
                    inputs: InputRecord::from(&inputs),
                }));
            }
        }
    }
    Ok(None)
}

fn search_identity(id: IdentityId, config: &TrialConfig, spec: &[BlockSpec], n: usize, trials: usize) -> Result<Option<Counterexample>> {
    let stream = format!("search|{id}|d={}|n={n}", spec[0].dims.lo);
    let mode = id.constraint().map(|m| config.constraint_for(id.as_str(), m));
    for i in 0..trials as u64 {
        let seed = trial_seed(config.master_seed, &stream, i);
        let mut rng = TrialRng::from_seed(seed);
        let inputs = draw_identity_inputs(id, mode, spec, n, &mut rng)?;
        let residual = residual_of_identity(id, &inputs.xs, &inputs.ys, &inputs.weights)?;
        if !residual.within(IDENTITY_RESIDUAL_TOL) {
            return Ok(Some(Counterexample {
                target: id.to_string(),
                dim: 0,
                n,
                variant: None,
                seed: hex::encode(seed),
                report: None,
                residual: Some(residual),
                inputs: InputRecord::from(&inputs),
            }));
        }
    }
    Ok(None)
}
