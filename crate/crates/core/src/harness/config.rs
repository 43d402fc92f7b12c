//! Campaign configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::generate::{BlockSpec, FloatRange, IntRange};
use crate::error::{Error, Result};
use crate::functions::{default_catalog, FunctionChoice, FunctionForm};
use crate::identities::ConstraintMode;
use crate::inequalities::{Reading, Tolerance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub master_seed: u64,
    pub trials: usize,
    pub block_spec: Vec<BlockSpec>,
    pub tuple_size: usize,
    /// Function ids; `psi:<id>` selects the composite `φ(√t)`.
    pub functions: Vec<String>,
    pub p_values: Vec<f64>,
    /// Weight normalization per claim or identity id, replacing the one it requires.
    #[serde(default)]
    pub constraint_modes: BTreeMap<String, ConstraintMode>,
    /// Replaces the default policy for every campaign.
    #[serde(default)]
    pub tolerance: Option<Tolerance>,
    /// Forced direction for the literal parallelogram inequality.
    #[serde(default)]
    pub reading: Option<ReadingName>,
}

/// Serializable form of [`Reading`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadingName {
    Convex,
    Concave,
}

impl From<ReadingName> for Reading {
    fn from(r: ReadingName) -> Self {
        match r {
            ReadingName::Convex => Reading::Convex,
            ReadingName::Concave => Reading::Concave,
        }
    }
}

impl From<Reading> for ReadingName {
    fn from(r: Reading) -> Self {
        match r {
            Reading::Convex => ReadingName::Convex,
            Reading::Concave => ReadingName::Concave,
        }
    }
}

pub const DEFAULT_P_VALUES: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0];

/// Every catalog entry, first as `φ` and then as `ψ`.
pub fn default_function_ids() -> Vec<String> {
    let catalog = default_catalog();
    let phis = catalog.iter().map(|f| FunctionChoice::phi(*f).id());
    let psis = catalog.iter().map(|f| {
        FunctionChoice {
            function: *f,
            form: FunctionForm::Psi,
        }
        .id()
    });
    phis.chain(psis).collect()
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            master_seed: 0,
            trials: 100,
            block_spec: vec![
                BlockSpec {
                    dims: IntRange { lo: 1, hi: 4 },
                    weights: FloatRange { lo: 0.25, hi: 2.0 },
                };
                2
            ],
            tuple_size: 3,
            functions: default_function_ids(),
            p_values: DEFAULT_P_VALUES.to_vec(),
            constraint_modes: BTreeMap::new(),
            tolerance: None,
            reading: None,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_spec.is_empty() {
            return Err(Error::InvalidConfig("at least one block is required".into()));
        }
        for b in &self.block_spec {
            b.validate()?;
        }
        if self.tuple_size == 0 {
            return Err(Error::InvalidConfig("tuple size must be at least 1".into()));
        }
        for &p in &self.p_values {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::NonpositiveP(p));
            }
        }
        self.function_choices()?;
        if let Some(t) = self.tolerance {
            if !(t.atol >= 0.0 && t.rtol >= 0.0 && t.atol.is_finite() && t.rtol.is_finite()) {
                return Err(Error::InvalidConfig("tolerances must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn function_choices(&self) -> Result<Vec<FunctionChoice>> {
        self.functions.iter().map(|s| s.parse()).collect()
    }

    pub fn reading(&self) -> Option<Reading> {
        self.reading.map(Reading::from)
    }

    /// Policy for a campaign, widened for the exponential catalog entry.
    pub fn policy(&self, exponential: bool) -> Tolerance {
        match self.tolerance {
            Some(t) => t,
            None if exponential => Tolerance::EXPONENTIAL,
            None => Tolerance::DEFAULT,
        }
    }

    pub fn constraint_for(&self, id: &str, required: ConstraintMode) -> ConstraintMode {
        self.constraint_modes.get(id).copied().unwrap_or(required)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = TrialConfig::default();
        c.validate().unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<TrialConfig>(&json).unwrap(), c);
        assert!(c.functions.contains(&"psi:expsq".to_string()));
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut c = TrialConfig::default();
        c.functions.push("nosuch".into());
        assert!(matches!(c.validate(), Err(Error::UnknownFunctionId(_))));
        let mut c = TrialConfig::default();
        c.block_spec.clear();
        assert!(c.validate().is_err());
        let mut c = TrialConfig::default();
        c.p_values = vec![-1.0];
        assert!(matches!(c.validate(), Err(Error::NonpositiveP(_))));
        let mut c = TrialConfig::default();
        c.tuple_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v = serde_json::to_value(TrialConfig::default()).unwrap();
        v["bogus"] = 2.into();
        assert!(serde_json::from_value::<TrialConfig>(v).is_err());
    }
}
