//! Residual campaigns for the operator identities.

use serde::{Deserialize, Serialize};

use super::campaign::TrialInputs;
use super::config::TrialConfig;
use super::generate::{random_algebra, random_element, random_weights, BlockSpec};
use super::rng::{trial_seed, TrialRng};
use crate::algebra::AlgebraElement;
use crate::error::Result;
use crate::identities::{identity_scale, residual_of_identity, sides_of, ConstraintMode, IdentityId, Residual, WeightVector};

/// Relative size of the perturbation used by the mutation check.
pub const MUTATION_SIZE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityTrial {
    pub index: u64,
    pub seed: String,
    pub dims: Vec<usize>,
    pub alphas: Vec<f64>,
    pub residual: Residual,
    /// Smallest relative residual over all single-input perturbations.
    pub mutated_relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub identity: String,
    pub trials: usize,
    pub max_relative_residual: f64,
    pub min_mutated_relative: Option<f64>,
    pub worst: Option<IdentityTrial>,
}

pub(crate) fn draw_identity_inputs(id: IdentityId, mode: Option<ConstraintMode>, spec: &[BlockSpec], n: usize, rng: &mut TrialRng) -> Result<TrialInputs> {
    let algebra = random_algebra(spec, rng)?;
    let weights = match mode {
        Some(mode) => random_weights(n, mode, rng)?,
        None => WeightVector::new(vec![1.0; n], ConstraintMode::None)?,
    };
    let xs = (0..n).map(|_| random_element(&algebra, rng)).collect();
    let ys = if id.uses_second_tuple() {
        (0..n).map(|_| random_element(&algebra, rng)).collect()
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

/// Perturbs one input at a time by `MUTATION_SIZE · ‖input‖` and compares the
/// perturbed left side with the unperturbed right side.
fn mutated_relative(id: IdentityId, inputs: &TrialInputs, rng: &mut TrialRng) -> Result<f64> {
    let sides = sides_of(id, &inputs.xs, &inputs.ys, &inputs.weights)?;
    let ys_used: &[AlgebraElement] = if id.uses_second_tuple() { &inputs.ys } else { &[] };
    let scale = identity_scale(id, &inputs.xs, ys_used, inputs.weights.alphas());
    let total = inputs.xs.len() + ys_used.len();
    let mut smallest = f64::INFINITY;
    for k in 0..total {
        let mut xs = inputs.xs.clone();
        let mut ys = inputs.ys.clone();
        let target = if k < xs.len() { &mut xs[k] } else { &mut ys[k - inputs.xs.len()] };
        let direction = random_element(&inputs.algebra, rng);
        let size = MUTATION_SIZE * target.operator_norm().max(1.0) / direction.operator_norm();
        *target = target.checked_add(&direction.scale_real(size))?;
        let mutated = sides_of(id, &xs, &ys, &inputs.weights)?;
        let gap = mutated.lhs.checked_sub(&sides.rhs)?.operator_norm();
        smallest = smallest.min(gap / scale);
    }
    Ok(smallest)
}

pub fn run_identity_trial(id: IdentityId, config: &TrialConfig, index: u64) -> Result<IdentityTrial> {
    let seed = trial_seed(config.master_seed, &format!("identity|{id}"), index);
    let mut rng = TrialRng::from_seed(seed);
    let mode = id.constraint().map(|m| config.constraint_for(id.as_str(), m));
    let inputs = draw_identity_inputs(id, mode, &config.block_spec, config.tuple_size, &mut rng)?;
    let residual = residual_of_identity(id, &inputs.xs, &inputs.ys, &inputs.weights)?;
    let mutated = mutated_relative(id, &inputs, &mut rng)?;
    Ok(IdentityTrial {
        index,
        seed: hex::encode(seed),
        dims: inputs.algebra.dims(),
        alphas: inputs.weights.alphas().to_vec(),
        residual,
        mutated_relative: mutated,
    })
}

/// Runs `config.trials` residual trials of `id`.
pub fn run_identity_campaign(id: IdentityId, config: &TrialConfig) -> Result<(IdentitySummary, Vec<IdentityTrial>)> {
    use rayon::prelude::*;
    config.validate()?;
    let trials: Vec<IdentityTrial> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| run_identity_trial(id, config, i))
        .collect::<Result<_>>()?;
    let mut summary = IdentitySummary {
        identity: id.to_string(),
        trials: trials.len(),
        max_relative_residual: 0.0,
        min_mutated_relative: None,
        worst: None,
    };
    for t in &trials {
        let rel = t.residual.relative();
        if summary.worst.is_none() || rel > summary.max_relative_residual {
            summary.max_relative_residual = rel;
            summary.worst = Some(t.clone());
        }
        if t.mutated_relative.is_finite() {
            summary.min_mutated_relative = Some(summary.min_mutated_relative.map_or(t.mutated_relative, |m| m.min(t.mutated_relative)));
        }
    }
    Ok((summary, trials))
}
