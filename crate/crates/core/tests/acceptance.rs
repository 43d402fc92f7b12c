//! Acceptance criteria at desk scale: up to 3 blocks of dimension ≤ 8, tuples
//! of size ≤ 5, 1000 trials per configuration.
//!
//! Each test prints one `PASS` or `FAIL` line (written straight to stdout so it
//! shows without `--nocapture`) and then asserts.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use tracelab::harness::{
    mutation_selftest, random_algebra, random_element_capped, random_unitary_contraction, run_campaign,
    run_identity_campaign, search_counterexample, BlockSpec, CampaignResult, ContractionKind, FloatRange, IntRange,
    ReadingName, SearchBudget, SearchTarget, SelftestOutcome, TrialConfig, TrialRng,
};
use tracelab::identities::{ConstraintMode, IdentityId, WeightVector};
use tracelab::inequalities::{
    check_pnorm_parallelogram, check_roots_refinement, check_schatten_refinement, check_tl1, check_tl_proof_chain,
    Claim, InequalityReport, Tolerance, Verdict,
};
use tracelab::spectral::{apply_scalar_function, singular_values, trace_function_mu, trace_function_spectral};
use tracelab::{functions::default_catalog, AlgebraElement, ScalarFunction};

const TRIALS: usize = 1000;
const TUPLE_SIZES: [usize; 4] = [2, 3, 4, 5];

/// Collects failures of one criterion and prints its verdict line.
struct Criterion {
    name: &'static str,
    started: Instant,
    failures: Vec<String>,
    facts: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion {
            name,
            started: Instant::now(),
            failures: Vec::new(),
            facts: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn fact(&mut self, what: impl Into<String>) {
        self.facts.push(what.into());
    }

    fn finish(self) {
        let ok = self.failures.is_empty();
        let detail = if ok { self.facts.join("; ") } else { self.failures.join("; ") };
        let line = format!(
            "{} {} ({:.1} s): {}\n",
            if ok { "PASS" } else { "FAIL" },
            self.name,
            self.started.elapsed().as_secs_f64(),
            detail
        );
        let mut out = std::io::stdout().lock();
        out.write_all(line.as_bytes()).unwrap();
        out.flush().unwrap();
        assert!(ok, "{line}");
    }
}

fn block_spec() -> Vec<BlockSpec> {
    [(1, 8), (1, 4), (1, 2)]
        .into_iter()
        .map(|(lo, hi)| BlockSpec {
            dims: IntRange { lo, hi },
            weights: FloatRange { lo: 0.25, hi: 2.0 },
        })
        .collect()
}

fn config(n: usize) -> TrialConfig {
    TrialConfig {
        master_seed: 20240601,
        trials: TRIALS,
        block_spec: block_spec(),
        tuple_size: n,
        ..TrialConfig::default()
    }
}

fn scalars(values: &[f64]) -> Vec<AlgebraElement> {
    values.iter().map(|&v| AlgebraElement::real_scalar(v)).collect()
}

fn sides_match(r: &InequalityReport, expected: &[f64], eps: f64) -> bool {
    let got = r.side_values();
    got.len() == expected.len() && got.iter().zip(expected).all(|(g, e)| (g - e).abs() <= eps)
}

/// Largest gap between consecutive sides relative to `max(1, |side|)`.
fn equality_gap(r: &InequalityReport) -> f64 {
    r.side_values()
        .windows(2)
        .map(|w| (w[0] - w[1]).abs() / w[0].abs().max(w[1].abs()).max(1.0))
        .fold(0.0, f64::max)
}

/// Records every summary of `result`: zero violations and zero degenerate trials.
fn require_clean(c: &mut Criterion, result: &CampaignResult, n: usize) {
    for s in &result.summaries {
        c.check(
            s.trials == TRIALS && s.all_pass(),
            format!(
                "{} [{}] n={n}: {} violations, {} degenerate of {}",
                s.claim, s.variant, s.violation, s.degenerate, s.trials
            ),
        );
    }
}

fn summary_count(result: &CampaignResult) -> usize {
    result.summaries.len()
}

#[test]
fn identities_hold_and_detect_mutation() {
    let mut c = Criterion::new("identities id1/ibk/mo1/mo2");
    for id in IdentityId::ALL {
        let mut worst: f64 = 0.0;
        let mut least_mutated = f64::INFINITY;
        for n in TUPLE_SIZES {
            let (summary, _) = run_identity_campaign(id, &config(n)).unwrap();
            c.check(summary.trials == TRIALS, format!("{id} n={n}: {} trials", summary.trials));
            worst = worst.max(summary.max_relative_residual);
            least_mutated = least_mutated.min(summary.min_mutated_relative.unwrap_or(0.0));
        }
        c.check(worst <= 1e-10, format!("{id}: residual {worst:e} > 1e-10·scale"));
        c.check(least_mutated > 1e-8, format!("{id}: mutated residual {least_mutated:e} ≤ 1e-8·scale"));
        c.fact(format!("{id} max {worst:.1e}, mutated min {least_mutated:.1e}"));
    }
    c.finish();
}

#[test]
fn two_path_trace_agreement() {
    let mut c = Criterion::new("trace of f(|x|), eigenvalue path vs μ path");
    let catalog = default_catalog();
    let mut rng = TrialRng::from_u64(7001);
    let mut worst: f64 = 0.0;
    for i in 0..TRIALS {
        let f = catalog[i % catalog.len()];
        let algebra = random_algebra(&block_spec(), &mut rng).unwrap();
        let x = random_element_capped(&algebra, &mut rng, f.is_exponential().then_some(3.0));
        let spectral = trace_function_spectral(&f, &x).unwrap();
        let mu = trace_function_mu(&f, &x).unwrap();
        let gap = (spectral - mu).abs() / (1.0 + spectral.abs());
        worst = worst.max(gap);
        c.check(gap <= 1e-10, format!("{f} trial {i}: {spectral} vs {mu}"));
    }
    c.fact(format!("{TRIALS} pairs over {} functions, max gap {worst:.1e}·(1+value)", catalog.len()));
    c.finish();
}

#[test]
fn singular_value_function_properties() {
    let mut c = Criterion::new("μ(f(x)) = f(μ(x)), contraction and unitary invariance");
    let catalog = default_catalog();
    let mut rng = TrialRng::from_u64(7002);
    let (mut calc, mut contraction, mut unitary): (f64, f64, f64) = (0.0, f64::NEG_INFINITY, 0.0);
    for i in 0..TRIALS {
        let f = catalog[i % catalog.len()];
        let algebra = random_algebra(&block_spec(), &mut rng).unwrap();
        // |x|² has norm at most 3 for the exponential entry.
        let x = random_element_capped(&algebra, &mut rng, f.is_exponential().then_some(3f64.sqrt()));
        let a = x.abs_squared();
        let lhs = singular_values(&apply_scalar_function(&f, &a).unwrap());
        let rhs = singular_values(&a).map_values(&f).unwrap();
        let top = lhs.eval(0.0).max(rhs.eval(0.0));
        let gap = lhs.max_abs_diff(&rhs) / (1.0 + top);
        calc = calc.max(gap);
        c.check(gap <= 1e-10, format!("{f} trial {i}: stepwise gap {gap:e}"));

        let mx = singular_values(&x);
        let u = random_unitary_contraction(&algebra, &mut rng, ContractionKind::Contraction);
        let v = random_unitary_contraction(&algebra, &mut rng, ContractionKind::Contraction);
        let my = singular_values(&u.checked_mul(&x).unwrap().checked_mul(&v).unwrap());
        let mut cuts = mx.breakpoints();
        cuts.extend(my.breakpoints());
        cuts.push(0.0);
        for t in cuts {
            let excess = my.eval(t) - mx.eval(t);
            contraction = contraction.max(excess);
            c.check(excess <= 1e-10, format!("trial {i}: μ_{t}(uxv) exceeds μ_{t}(x) by {excess:e}"));
        }

        let u = random_unitary_contraction(&algebra, &mut rng, ContractionKind::Unitary);
        let v = random_unitary_contraction(&algebra, &mut rng, ContractionKind::Unitary);
        let mz = singular_values(&u.checked_mul(&x).unwrap().checked_mul(&v).unwrap());
        let gap = mz.max_abs_diff(&mx);
        unitary = unitary.max(gap);
        c.check(gap <= 1e-10 * (1.0 + mx.eval(0.0)), format!("trial {i}: unitary gap {gap:e}"));
    }
    c.fact(format!(
        "{TRIALS} trials, calculus gap {calc:.1e}, contraction excess {contraction:.1e}, unitary gap {unitary:.1e}"
    ));
    c.finish();
}

#[test]
fn jensen_type_trace_inequalities() {
    let mut c = Criterion::new("fk1-fk4 on positive tuples");
    let claims = [Claim::Fk1, Claim::Fk2, Claim::Fk3, Claim::Fk4];
    let result = run_campaign(&config(3), &claims).unwrap();
    require_clean(&mut c, &result, 3);
    let has = |claim: &str, variant: &str| result.summaries.iter().any(|s| s.claim == claim && s.variant == variant);
    for claim in ["fk1", "fk3"] {
        for v in ["power:2", "power:3", "power:4", "psi:power:3", "psi:power:4", "psi:expsq"] {
            c.check(has(claim, v), format!("{claim} misses {v}"));
        }
    }
    for claim in ["fk2", "fk4"] {
        for v in ["power:0.5", "power:1", "log1p", "psi:power:1", "psi:power:1.5", "psi:log1p"] {
            c.check(has(claim, v), format!("{claim} misses {v}"));
        }
    }
    c.fact(format!("{} (claim, function) campaigns of {TRIALS} trials, 0 violations", summary_count(&result)));
    c.finish();
}

#[test]
fn weighted_and_roots_of_unity_clarkson() {
    let mut c = Criterion::new("mt1/mt2 per (function, n), t² collapses to equality");
    let mut campaigns = 0;
    let mut square_gap: f64 = 0.0;
    for n in TUPLE_SIZES {
        let cfg = TrialConfig {
            functions: ["power:4", "power:3", "expsq", "power:1", "power:1.5", "log1p", "power:2"]
                .map(String::from)
                .to_vec(),
            ..config(n)
        };
        let result = run_campaign(&cfg, &[Claim::Mt1, Claim::Mt2]).unwrap();
        require_clean(&mut c, &result, n);
        for (claim, v) in [("mt1", "power:4"), ("mt1", "power:3"), ("mt1", "expsq"), ("mt2", "power:1"), ("mt2", "power:1.5"), ("mt2", "log1p")] {
            let covered = result.summaries.iter().any(|s| s.claim == claim && s.variant == v);
            c.check(covered, format!("{claim} n={n} misses {v}"));
        }
        let squares: Vec<_> = result.reports.iter().filter(|r| r.context.function == "power:2").collect();
        c.check(squares.len() >= TRIALS, format!("n={n}: only {} t² trials", squares.len()));
        for r in squares {
            square_gap = square_gap.max(equality_gap(r));
        }
        campaigns += summary_count(&result);
    }
    c.check(square_gap <= 1e-10, format!("t² sides differ by {square_gap:e}·scale"));
    c.fact(format!("{campaigns} campaigns of {TRIALS} trials, 0 violations, t² gap {square_gap:.1e}"));
    c.finish();
}

#[test]
fn clarkson_p_norm_chains() {
    let mut c = Criterion::new("clarkson-p at p ∈ {0.5, 1, 1.5, 3, 4}, equality at p = 2");
    let mut square_gap: f64 = 0.0;
    for n in TUPLE_SIZES {
        let result = run_campaign(&config(n), &[Claim::ClarksonP]).unwrap();
        require_clean(&mut c, &result, n);
        for p in ["p=0.5", "p=1.0", "p=1.5", "p=2.0", "p=3.0", "p=4.0"] {
            c.check(result.summaries.iter().any(|s| s.variant == p), format!("n={n} misses {p}"));
        }
        for r in result.reports.iter().filter(|r| r.context.p == Some(2.0)) {
            square_gap = square_gap.max(equality_gap(r));
        }
    }
    c.check(square_gap <= 1e-10, format!("p = 2 sides differ by {square_gap:e}·scale"));
    c.fact(format!("n = 2..5, 0 violations, p = 2 gap {square_gap:.1e}"));
    c.finish();
}

#[test]
fn roots_of_unity_refinements() {
    let mut c = Criterion::new("tr1/tr2, cor3.3, cor3.4, cor3.5 for n = 2..5");
    let claims = [Claim::Tr1, Claim::Tr2, Claim::Cor33, Claim::Cor34, Claim::Cor35];
    let mut campaigns = 0;
    for n in TUPLE_SIZES {
        let result = run_campaign(&config(n), &claims).unwrap();
        require_clean(&mut c, &result, n);
        for claim in ["tr1", "tr2", "cor3.3", "cor3.4", "cor3.5"] {
            c.check(result.summaries.iter().any(|s| s.claim == claim), format!("n={n} misses {claim}"));
        }
        campaigns += summary_count(&result);
    }
    let xs = scalars(&[1.0, 2.0]);
    let expected = [20.5, 25.0, 41.0];
    let r = check_roots_refinement(&ScalarFunction::power(4.0).unwrap(), &xs, Tolerance::DEFAULT).unwrap();
    c.check(sides_match(&r, &expected, 1e-12), format!("tr1 scalar sides {:?}", r.side_values()));
    let r = check_schatten_refinement(&xs, 4.0, Tolerance::DEFAULT).unwrap();
    c.check(sides_match(&r, &expected, 1e-12), format!("cor3.3 scalar sides {:?}", r.side_values()));
    c.fact(format!("{campaigns} campaigns of {TRIALS} trials, 0 violations; (1,2), p=4 gives (20.5, 25, 41)"));
    c.finish();
}

#[test]
fn weighted_parallelogram_inequalities() {
    let mut c = Criterion::new("tl1 and cor4.3");
    let mut campaigns = 0;
    for n in TUPLE_SIZES {
        let result = run_campaign(&config(n), &[Claim::Tl1, Claim::Cor43]).unwrap();
        require_clean(&mut c, &result, n);
        campaigns += summary_count(&result);
    }
    let w = WeightVector::new(vec![2.0, 2.0], ConstraintMode::SumInverseOne).unwrap();
    let xs = scalars(&[1.0, 2.0]);
    let r = check_tl1(&xs, &w, &ScalarFunction::power(4.0).unwrap(), Tolerance::DEFAULT).unwrap();
    c.check(sides_match(&r, &[136.0, 82.0], 1e-12), format!("tl1 scalar sides {:?}", r.side_values()));
    let r = check_pnorm_parallelogram(&xs, &w, 4.0, Tolerance::DEFAULT).unwrap();
    c.check(sides_match(&r, &[136.0, 82.0], 1e-12), format!("cor4.3 scalar sides {:?}", r.side_values()));
    c.fact(format!("{campaigns} campaigns of {TRIALS} trials, 0 violations; α=(2,2), x=(1,2), t⁴ gives (136, 82)"));
    c.finish();
}

#[test]
fn literal_parallelogram_probe() {
    let mut c = Criterion::new("tl-literal counterexample and proof-chain localization");
    let cfg = TrialConfig {
        trials: 50,
        reading: Some(ReadingName::Concave),
        ..TrialConfig::default()
    };
    let budget = SearchBudget {
        trials: 50,
        max_dim: 4,
        max_n: 4,
    };
    match search_counterexample(SearchTarget::Claim(Claim::TlLiteral), &cfg, budget).unwrap() {
        Some(found) => {
            let violated = found.report.as_ref().is_some_and(|r| r.verdict == Verdict::Violation);
            c.check(found.dim == 1 && found.n == 2 && violated, format!("first hit at dim {} n {}", found.dim, found.n));
            c.fact(format!("scalar counterexample at n = 2 for {}", found.variant.unwrap_or_default()));
        }
        None => c.check(false, "no counterexample within budget"),
    }

    let w = WeightVector::new(vec![4.0, 4.0], ConstraintMode::SumInvSqrtPairsOne).unwrap();
    let steps = check_tl_proof_chain(
        &scalars(&[1.0, 2.0]),
        &scalars(&[0.0, 0.0]),
        &w,
        &ScalarFunction::power(2.0).unwrap(),
        Tolerance::DEFAULT,
    )
    .unwrap();
    let verdicts: Vec<_> = steps.iter().map(|r| (r.claim.as_str(), r.verdict)).collect();
    c.check(
        verdicts == [("tl-chain/fk1", Verdict::Pass), ("tl-chain/mo1", Verdict::Violation), ("tl-chain/fk3", Verdict::Pass)],
        format!("scalar chain verdicts {verdicts:?}"),
    );
    c.check(sides_match(&steps[1], &[40.0, 10.0], 1e-12), format!("substitution sides {:?}", steps[1].side_values()));

    let result = run_campaign(&config(3), &[Claim::TlChain]).unwrap();
    let mut substitution_failures = 0;
    for s in &result.summaries {
        if s.claim == "tl-chain/mo1" {
            substitution_failures += s.violation;
        } else {
            c.check(s.all_pass(), format!("{} [{}]: {} violations", s.claim, s.variant, s.violation));
        }
    }
    c.check(substitution_failures > 0, "substitution step never fails");
    c.fact(format!(
        "α=(4,4), x=(1,2), y=0, t²: 40 vs 10 at the substitution step; campaign: {substitution_failures} substitution failures, Jensen steps clean"
    ));
    c.finish();
}

#[test]
fn flipped_claims_are_detected() {
    let mut c = Criterion::new("mutation self-test");
    let cfg = TrialConfig {
        block_spec: block_spec(),
        ..TrialConfig::default()
    };
    let (mut detected, mut not_applicable) = (0, 0);
    for claim in Claim::ALL {
        let entries = mutation_selftest(claim, &cfg).unwrap();
        let mut caught = false;
        for e in &entries {
            match e.outcome {
                SelftestOutcome::Detected { .. } => {
                    detected += 1;
                    caught = true;
                }
                SelftestOutcome::NotApplicable => not_applicable += 1,
                SelftestOutcome::Missed { trials } => {
                    c.check(claim.is_probe(), format!("{} [{}] not caught in {trials} trials", e.claim, e.variant))
                }
            }
        }
        c.check(caught, format!("{claim}: no variant caught"));
    }
    c.fact(format!("{detected} directional variants caught, {not_applicable} equality variants skipped"));
    c.finish();
}

fn tracelab(args: &[&str], threads: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tracelab"))
        .args(args)
        .env("TRACELAB_THREADS", threads)
        .output()
        .unwrap()
}

#[test]
fn reports_are_reproducible() {
    let mut c = Criterion::new("byte-identical reports and exit codes");
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let args = ["verify", "--claim", "all", "--trials", "200", "--seed", "7", "--out", path.to_str().unwrap()];
        let code = tracelab(&args, threads).status.code();
        (code, std::fs::read(path).unwrap())
    };
    let (code_a, a) = run("a.json", "1");
    let (code_b, b) = run("b.json", "4");
    c.check(code_a == Some(0) && code_b == Some(0), format!("exit codes {code_a:?}, {code_b:?}"));
    c.check(a == b, "reports differ");

    let probes = tracelab(&["verify", "--claim", "all", "--trials", "20", "--include-probes", "--detail", "none"], "2");
    c.check(probes.status.code() == Some(1), format!("probes gated: exit {:?}", probes.status.code()));
    let usage = tracelab(&["verify", "--claim", "nosuch"], "2");
    c.check(usage.status.code() == Some(2), format!("unknown claim: exit {:?}", usage.status.code()));
    c.fact(format!("two {} byte reports identical across 1 and 4 threads; exits 0 / 1 / 2", a.len()));
    c.finish();
}
