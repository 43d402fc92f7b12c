//! Mutation self-test: re-judging reports against inverted relations must find violations.

use serde::{Deserialize, Serialize};

use super::campaign::{min_tuple_size, run_trial, variants_for};
use super::config::TrialConfig;
use crate::error::{Error, Result};
use crate::inequalities::{Claim, InequalityReport, Verdict};

/// Trial budget within which a flipped claim must be caught.
pub const SELFTEST_BUDGET: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SelftestOutcome {
    /// The flipped relation failed on trial `trial`.
    Detected { trial: u64, report: Box<InequalityReport> },
    /// No violation within the budget.
    Missed { trials: usize },
    /// The chain is an equality and has no direction to flip.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestEntry {
    pub claim: String,
    pub probe: bool,
    pub variant: String,
    #[serde(flatten)]
    pub outcome: SelftestOutcome,
}

impl SelftestEntry {
    pub fn ok(&self) -> bool {
        !matches!(self.outcome, SelftestOutcome::Missed { .. })
    }
}

/// Flips every relation of every variant of `claim` and looks for a violation
/// within `min(config.trials, 100)` trials.
///
/// Entries are per report claim id, so `tl-chain` yields one per proof step.
pub fn mutation_selftest(claim: Claim, config: &TrialConfig) -> Result<Vec<SelftestEntry>> {
    config.validate()?;
    if config.tuple_size < min_tuple_size(claim).max(2) {
        return Err(Error::InvalidConfig(format!(
            "the self-test of `{claim}` needs a tuple size of at least 2"
        )));
    }
    let budget = config.trials.min(SELFTEST_BUDGET);
    let mut entries: Vec<SelftestEntry> = Vec::new();
    for variant in variants_for(claim, config)? {
        let start = entries.len();
        for index in 0..budget as u64 {
            let reports = run_trial(claim, &variant, config, index)?;
            for r in reports {
                let pos = entries[start..].iter().position(|e| e.claim == r.claim);
                let entry = match pos {
                    Some(p) => &mut entries[start + p],
                    None => {
                        let outcome = if r.is_equality() {
                            SelftestOutcome::NotApplicable
                        } else {
                            SelftestOutcome::Missed { trials: 0 }
                        };
                        entries.push(SelftestEntry {
                            claim: r.claim.clone(),
                            probe: claim.is_probe(),
                            variant: variant.label.clone(),
                            outcome,
                        });
                        entries.last_mut().expect("just pushed")
                    }
                };
                if let SelftestOutcome::Missed { trials } = &mut entry.outcome {
                    *trials += 1;
                    let flipped = r.flipped();
                    if flipped.verdict == Verdict::Violation {
                        entry.outcome = SelftestOutcome::Detected {
                            trial: index,
                            report: Box::new(flipped),
                        };
                    }
                }
            }
            let done = entries[start..]
                .iter()
                .all(|e| !matches!(e.outcome, SelftestOutcome::Missed { .. }));
            if done && entries.len() > start {
                break;
            }
        }
    }
    Ok(entries)
}
