//! Seeded generation, campaigns, self-tests and counterexample search.
//!
//! Everything here is a pure function of a [`TrialConfig`]: each trial derives
//! its own seed from the master seed, the claim, the variant and its index, so
//! results do not depend on scheduling.

mod campaign;
mod config;
mod counterexample;
mod generate;
mod identity;
pub mod rng;
mod selftest;

pub use campaign::{
    draw_inputs, evaluate, min_tuple_size, run_campaign, run_trial, stream_name, variants_for, CampaignResult,
    CampaignSummary, TrialInputs, Variant, VariantKind,
};
pub use config::{default_function_ids, ReadingName, TrialConfig, DEFAULT_P_VALUES};
pub use counterexample::{
    search_counterexample, Counterexample, ElementRecord, InputRecord, SearchBudget, SearchTarget, IDENTITY_RESIDUAL_TOL,
};
pub use generate::{
    random_algebra, random_element, random_element_capped, random_positive, random_positive_capped,
    random_unitary_contraction, random_weights, weights_from_raw, BlockSpec, ContractionKind, FloatRange, IntRange,
    EXP_NORM_CAP, RAW_WEIGHT_RANGE,
};
pub use identity::{run_identity_campaign, run_identity_trial, IdentitySummary, IdentityTrial, MUTATION_SIZE};
pub use rng::{trial_seed, TrialRng, RNG_VERSION};
pub use selftest::{mutation_selftest, SelftestEntry, SelftestOutcome, SELFTEST_BUDGET};
