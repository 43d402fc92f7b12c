//! Seeded campaigns over claims.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::TrialConfig;
use super::generate::{random_algebra, random_element_capped, random_positive_capped, random_weights, BlockSpec, EXP_NORM_CAP};
use super::rng::{trial_seed, Seed, TrialRng};
use crate::algebra::{AlgebraElement, TracialAlgebra};
use crate::error::{Error, Result};
use crate::functions::{FunctionChoice, FunctionForm, ScalarFunction, EXP_SQUARE_GUARD};
use crate::identities::{ConstraintMode, WeightVector};
use crate::inequalities::{
    check_clarkson_pnorm, check_exp_refinement, check_fk, check_log_refinement, check_log_refinement_literal,
    check_pnorm_parallelogram, check_roots_refinement, check_schatten_refinement, check_tl1, check_tl_literal,
    check_tl_proof_chain, check_weighted_clarkson, Claim, FkVariant, InequalityReport, Reading, Tolerance, Verdict,
};

/// What a campaign varies besides the random inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariantKind {
    Function(FunctionChoice),
    Exponent(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub kind: VariantKind,
}

impl Variant {
    pub fn function(choice: FunctionChoice) -> Self {
        Variant {
            label: choice.id(),
            kind: VariantKind::Function(choice),
        }
    }

    pub fn exponent(p: f64) -> Self {
        Variant {
            label: format!("p={p:?}"),
            kind: VariantKind::Exponent(p),
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.kind, VariantKind::Function(c) if c.function.is_exponential())
    }

    fn choice(&self) -> Option<FunctionChoice> {
        match self.kind {
            VariantKind::Function(c) => Some(c),
            VariantKind::Exponent(_) => None,
        }
    }
}

/// Smallest tuple size the claim is stated for.
pub fn min_tuple_size(claim: Claim) -> usize {
    match claim {
        Claim::Mt1 | Claim::Mt2 | Claim::TlLiteral | Claim::TlChain | Claim::Tl1 | Claim::Cor43 => 2,
        _ => 1,
    }
}

/// Variants of `claim` selected by the configuration, in configuration order.
pub fn variants_for(claim: Claim, config: &TrialConfig) -> Result<Vec<Variant>> {
    if claim.uses_p() {
        return Ok(config.p_values.iter().map(|&p| Variant::exponent(p)).collect());
    }
    if let Some(f) = claim.fixed_function() {
        return Ok(vec![Variant::function(FunctionChoice::phi(f))]);
    }
    let mut out: Vec<Variant> = Vec::new();
    for choice in config.function_choices()? {
        if claim.admits(&choice) && !out.iter().any(|v| v.label == choice.id()) {
            out.push(Variant::function(choice));
        }
    }
    Ok(out)
}

/// Inputs of one trial.
#[derive(Debug, Clone)]
pub struct TrialInputs {
    pub algebra: Arc<TracialAlgebra>,
    pub xs: Vec<AlgebraElement>,
    pub ys: Vec<AlgebraElement>,
    pub weights: WeightVector,
}

fn weight_mode(claim: Claim, config: &TrialConfig) -> Option<ConstraintMode> {
    claim.weight_mode().map(|m| config.constraint_for(claim.as_str(), m))
}

/// Largest factor by which a generated element's norm can be multiplied inside `φ`.
fn amplification(claim: Claim, n: usize, alphas: &[f64]) -> f64 {
    let nf = n as f64;
    let amax = alphas.iter().cloned().fold(1.0, f64::max);
    let mut pair: f64 = 0.0;
    for &a in alphas {
        for &b in alphas {
            pair = pair.max((a / b).sqrt() + (b / a).sqrt());
        }
    }
    match claim {
        Claim::Mt1 | Claim::Mt2 => 1.0,
        Claim::Tl1 | Claim::Cor43 => amax.max(pair).max(nf),
        Claim::TlLiteral | Claim::TlChain => (2.0 * amax).max(pair).max(2.0 * nf),
        _ => nf,
    }
}

/// Norm cap keeping every argument of `e^{t²} - 1` below its guard.
fn exp_cap(claim: Claim, choice: FunctionChoice, n: usize, alphas: &[f64]) -> f64 {
    let limit = 0.95 * EXP_SQUARE_GUARD;
    let nf = n as f64;
    if claim.needs_positive() {
        // Arguments are sums of at most n elements g*g.
        return match choice.form {
            FunctionForm::Phi => EXP_NORM_CAP.min((limit / nf).sqrt()),
            FunctionForm::Psi => EXP_NORM_CAP.min(limit / nf.sqrt()),
        };
    }
    let amp = amplification(claim, n, alphas);
    let mut cap = EXP_NORM_CAP.min(limit / amp);
    if claim == Claim::TlChain {
        // The substituted operator sums n(n-1) + 1 squared pieces under ψ.
        let pieces = (n * (n - 1) + 1) as f64;
        cap = cap.min(limit / (amp * pieces.sqrt()));
    }
    cap
}

/// Draws the inputs of one trial: algebra, then weights, then `xs`, then `ys`.
pub fn draw_inputs(
    claim: Claim,
    variant: &Variant,
    config: &TrialConfig,
    spec: &[BlockSpec],
    n: usize,
    rng: &mut TrialRng,
) -> Result<TrialInputs> {
    let algebra = random_algebra(spec, rng)?;
    let weights = match weight_mode(claim, config) {
        Some(mode) => random_weights(n, mode, rng)?,
        None => WeightVector::new(vec![1.0; n], ConstraintMode::None)?,
    };
    let cap = match variant.choice() {
        Some(c) if c.function.is_exponential() => Some(exp_cap(claim, c, n, weights.alphas())),
        _ => None,
    };
    let xs: Vec<AlgebraElement> = (0..n)
        .map(|_| {
            if claim.needs_positive() {
                random_positive_capped(&algebra, rng, cap)
            } else {
                random_element_capped(&algebra, rng, cap)
            }
        })
        .collect();
    let ys = if claim.needs_second_tuple() {
        (0..n).map(|_| random_element_capped(&algebra, rng, cap)).collect()
    } else {
        Vec::new()
    };
    Ok(TrialInputs {
        algebra,
        xs,
        ys,
        weights,
    })
}

fn fk_variant(claim: Claim) -> Option<FkVariant> {
    match claim {
        Claim::Fk1 => Some(FkVariant::Fk1),
        Claim::Fk2 => Some(FkVariant::Fk2),
        Claim::Fk3 => Some(FkVariant::Fk3),
        Claim::Fk4 => Some(FkVariant::Fk4),
        _ => None,
    }
}

fn phi_of(variant: &Variant) -> Result<ScalarFunction> {
    match variant.kind {
        VariantKind::Function(c) if c.form == FunctionForm::Phi => Ok(c.function),
        VariantKind::Function(c) => Err(Error::InvalidConfig(format!("`{}` needs a φ-form function", c.id()))),
        VariantKind::Exponent(p) => ScalarFunction::power(p),
    }
}

fn exponent_of(variant: &Variant) -> Result<f64> {
    match variant.kind {
        VariantKind::Exponent(p) => Ok(p),
        VariantKind::Function(c) => Err(Error::InvalidConfig(format!("`{}` needs an exponent, got a function", c.id()))),
    }
}

/// Evaluates `claim` on given inputs; `tl-chain` yields three reports, every other claim one.
pub fn evaluate(
    claim: Claim,
    variant: &Variant,
    inputs: &TrialInputs,
    policy: Tolerance,
    reading: Option<Reading>,
) -> Result<Vec<InequalityReport>> {
    let (xs, ys, w) = (&inputs.xs, &inputs.ys, &inputs.weights);
    let single = |r: Result<InequalityReport>| r.map(|r| vec![r]);
    let mut reports = match claim {
        Claim::Fk1 | Claim::Fk2 | Claim::Fk3 | Claim::Fk4 => {
            let choice = variant
                .choice()
                .ok_or_else(|| Error::InvalidConfig("the Jensen-type claims take a function".into()))?;
            single(check_fk(&choice, xs, w, fk_variant(claim).expect("fk claim"), policy))?
        }
        Claim::Mt1 | Claim::Mt2 => single(check_weighted_clarkson(&phi_of(variant)?, xs, w, policy))?,
        Claim::ClarksonP => single(check_clarkson_pnorm(xs, exponent_of(variant)?, policy))?,
        Claim::Tr1 | Claim::Tr2 => single(check_roots_refinement(&phi_of(variant)?, xs, policy))?,
        Claim::Cor33 => single(check_schatten_refinement(xs, exponent_of(variant)?, policy))?,
        Claim::Cor34 => single(check_exp_refinement(xs, policy))?,
        Claim::Cor35 => single(check_log_refinement(xs, policy))?,
        Claim::Cor34Literal => single(check_log_refinement_literal(xs, policy))?,
        Claim::TlLiteral => single(check_tl_literal(xs, ys, w, &phi_of(variant)?, reading, policy))?,
        Claim::TlChain => check_tl_proof_chain(xs, ys, w, &phi_of(variant)?, policy)?,
        Claim::Tl1 => single(check_tl1(xs, w, &phi_of(variant)?, policy))?,
        Claim::Cor43 => single(check_pnorm_parallelogram(xs, w, exponent_of(variant)?, policy))?,
    };
    for r in &mut reports {
        if claim != Claim::TlChain {
            r.claim = claim.as_str().to_string();
        }
        r.context.variant = Some(variant.label.clone());
    }
    Ok(reports)
}

/// Stream name hashed into per-trial seeds.
pub fn stream_name(claim: Claim, variant: &Variant) -> String {
    format!("{claim}|{}", variant.label)
}

/// Runs trial `index` of `claim` under `variant` from its derived seed.
pub fn run_trial(claim: Claim, variant: &Variant, config: &TrialConfig, index: u64) -> Result<Vec<InequalityReport>> {
    let seed = trial_seed(config.master_seed, &stream_name(claim, variant), index);
    run_seeded(claim, variant, config, &config.block_spec, config.tuple_size, seed, Some(index))
}

pub(crate) fn run_seeded(
    claim: Claim,
    variant: &Variant,
    config: &TrialConfig,
    spec: &[BlockSpec],
    n: usize,
    seed: Seed,
    index: Option<u64>,
) -> Result<Vec<InequalityReport>> {
    let mut rng = TrialRng::from_seed(seed);
    let inputs = draw_inputs(claim, variant, config, spec, n, &mut rng)?;
    let mut reports = evaluate(claim, variant, &inputs, config.policy(variant.is_exponential()), config.reading())?;
    for r in &mut reports {
        r.context.seed = hex::encode(seed);
        r.context.master_seed = Some(config.master_seed);
        r.context.trial_index = index;
    }
    Ok(reports)
}

/// Aggregate over the reports of one claim id and variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub claim: String,
    pub variant: String,
    pub probe: bool,
    pub trials: usize,
    pub pass: usize,
    pub violation: usize,
    pub degenerate: usize,
    pub min_margin: Option<f64>,
    /// The degenerate report if any, else the one with the smallest margin relative to its slack.
    pub worst: Option<InequalityReport>,
}

impl CampaignSummary {
    fn new(claim: &str, variant: &str, probe: bool) -> Self {
        CampaignSummary {
            claim: claim.to_string(),
            variant: variant.to_string(),
            probe,
            trials: 0,
            pass: 0,
            violation: 0,
            degenerate: 0,
            min_margin: None,
            worst: None,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.violation == 0 && self.degenerate == 0
    }

    fn add(&mut self, r: &InequalityReport) {
        self.trials += 1;
        match r.verdict {
            Verdict::Pass => self.pass += 1,
            Verdict::Violation => self.violation += 1,
            Verdict::Degenerate => self.degenerate += 1,
        }
        if r.margin.is_finite() {
            self.min_margin = Some(self.min_margin.map_or(r.margin, |m| m.min(r.margin)));
        }
        let replace = match &self.worst {
            None => true,
            Some(w) => severity(r) > severity(w),
        };
        if replace {
            self.worst = Some(r.clone());
        }
    }
}

/// Larger is worse; degenerate reports rank above everything else.
fn severity(r: &InequalityReport) -> f64 {
    if r.verdict == Verdict::Degenerate {
        f64::INFINITY
    } else {
        -r.margin / r.tolerance.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub summaries: Vec<CampaignSummary>,
    pub reports: Vec<InequalityReport>,
}

impl CampaignResult {
    pub fn all_pass(&self) -> bool {
        self.summaries.iter().all(CampaignSummary::all_pass)
    }

    /// Whether every non-probe summary passes.
    pub fn gate_passes(&self, include_probes: bool) -> bool {
        self.summaries.iter().filter(|s| include_probes || !s.probe).all(CampaignSummary::all_pass)
    }
}

/// Runs `config.trials` trials of every variant of every claim.
///
/// Trials run on the current rayon pool; the result does not depend on its size.
pub fn run_campaign(config: &TrialConfig, claims: &[Claim]) -> Result<CampaignResult> {
    config.validate()?;
    let mut result = CampaignResult::default();
    let mut seeds = HashSet::new();
    for &claim in claims {
        let min = min_tuple_size(claim);
        if config.tuple_size < min {
            return Err(Error::InvalidConfig(format!(
                "claim `{claim}` needs a tuple size of at least {min}, got {}",
                config.tuple_size
            )));
        }
        for variant in variants_for(claim, config)? {
            let stream = stream_name(claim, &variant);
            for index in 0..config.trials as u64 {
                if !seeds.insert(trial_seed(config.master_seed, &stream, index)) {
                    return Err(Error::InvalidConfig(format!("trial seed collision in stream `{stream}`")));
                }
            }
            let trials: Vec<Vec<InequalityReport>> = (0..config.trials as u64)
                .into_par_iter()
                .map(|i| run_trial(claim, &variant, config, i))
                .collect::<Result<_>>()?;
            let start = result.summaries.len();
            for r in trials.into_iter().flatten() {
                let pos = result.summaries[start..].iter().position(|s| s.claim == r.claim);
                let summary = match pos {
                    Some(p) => &mut result.summaries[start + p],
                    None => {
                        result.summaries.push(CampaignSummary::new(&r.claim, &variant.label, claim.is_probe()));
                        result.summaries.last_mut().expect("just pushed")
                    }
                };
                summary.add(&r);
                result.reports.push(r);
            }
            if config.trials == 0 {
                result.summaries.push(CampaignSummary::new(claim.as_str(), &variant.label, claim.is_probe()));
            }
        }
    }
    Ok(result)
}
