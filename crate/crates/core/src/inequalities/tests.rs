use super::*;
use crate::algebra::TracialAlgebra;

fn scalars(values: &[f64]) -> Vec<AlgebraElement> {
    values.iter().map(|&v| AlgebraElement::real_scalar(v)).collect()
}

fn power(p: f64) -> ScalarFunction {
    ScalarFunction::power(p).unwrap()
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn assert_sides(report: &InequalityReport, expected: &[f64], eps: f64) {
    let got = report.side_values();
    assert_eq!(got.len(), expected.len(), "{report:?}");
    for (g, e) in got.iter().zip(expected) {
        assert!((g - e).abs() <= eps, "sides {got:?} vs {expected:?}");
    }
}

fn sample_tuple(n: usize) -> Vec<AlgebraElement> {
    let algebra = TracialAlgebra::new(&[(2, 0.5), (3, 1.5)]).unwrap();
    (0..n)
        .map(|j| {
            let mut x = AlgebraElement::zeros(&algebra);
            for b in 0..2 {
                let d = algebra.blocks()[b].dim;
                for r in 0..d {
                    for c in 0..d {
                        let s = (j * 7 + b * 5 + r * 3 + c) as f64;
                        *x.entry_mut(b, r, c) = C64::new((s * 0.37).sin(), (s * 0.91).cos() * 0.5);
                    }
                }
            }
            x
        })
        .collect()
}

#[test]
fn claim_ids_round_trip() {
    for claim in Claim::ALL {
        assert_eq!(claim.as_str().parse::<Claim>().unwrap(), claim);
    }
    assert!(matches!("nosuch".parse::<Claim>(), Err(Error::UnknownClaimId(_))));
    assert!(Claim::TlLiteral.is_probe() && Claim::Cor34Literal.is_probe());
    assert!(!Claim::Tl1.is_probe());
}

#[test]
fn fk_scalar_examples() {
    let sq = FunctionChoice::phi(power(2.0));
    let half = WeightVector::new(vec![0.5, 0.5], ConstraintMode::SumOne).unwrap();
    let r = check_fk(&sq, &scalars(&[1.0, 3.0]), &half, FkVariant::Fk1, tol()).unwrap();
    assert_sides(&r, &[4.0, 5.0], 1e-12);
    assert_eq!(r.verdict, Verdict::Pass);
    assert!((r.margin - 1.0).abs() < 1e-12);

    let none = WeightVector::new(vec![1.0, 1.0], ConstraintMode::None).unwrap();
    let r = check_fk(&sq, &scalars(&[1.0, 2.0]), &none, FkVariant::Fk3, tol()).unwrap();
    assert_sides(&r, &[9.0, 5.0], 1e-12);
    assert_eq!(r.verdict, Verdict::Pass);

    let lin = FunctionChoice::phi(power(1.0));
    let r = check_fk(&lin, &sample_tuple(3).iter().map(|x| x.abs_squared()).collect::<Vec<_>>(), &WeightVector::uniform(3).unwrap(), FkVariant::Fk1, tol()).unwrap();
    assert_eq!(r.direction, vec![Relation::Eq]);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn fk_rejects_wrong_class_and_non_positive() {
    let sq = FunctionChoice::phi(power(2.0));
    let half = WeightVector::uniform(2).unwrap();
    let err = check_fk(&sq, &scalars(&[1.0, 3.0]), &half, FkVariant::Fk2, tol()).unwrap_err();
    assert!(matches!(err, Error::WrongConvexityClass { .. }));
    let err = check_fk(&sq, &scalars(&[-1.0, 3.0]), &half, FkVariant::Fk1, tol()).unwrap_err();
    assert!(matches!(err, Error::NotPositive { .. }));
}

#[test]
fn weighted_clarkson_scalar_example() {
    let half = WeightVector::uniform(2).unwrap();
    let r = check_weighted_clarkson(&power(4.0), &scalars(&[1.0, 3.0]), &half, tol()).unwrap();
    assert_eq!(r.claim, "mt1");
    assert_sides(&r, &[17.0, 41.0], 1e-12);
    assert_eq!(r.direction, vec![Relation::Le]);
    assert_eq!(r.verdict, Verdict::Pass);

    let r = check_weighted_clarkson(&power(1.0), &scalars(&[1.0, 3.0]), &half, tol()).unwrap();
    assert_eq!(r.claim, "mt2");
    assert_eq!(r.direction, vec![Relation::Ge]);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn power_two_collapses_every_chain() {
    let xs = sample_tuple(3);
    let sq = power(2.0);
    let w = WeightVector::new(vec![0.2, 0.3, 0.5], ConstraintMode::SumOne).unwrap();
    let reports = [
        check_weighted_clarkson(&sq, &xs, &w, tol()).unwrap(),
        check_roots_refinement(&sq, &xs, tol()).unwrap(),
        check_clarkson_pnorm(&xs, 2.0, tol()).unwrap(),
        check_schatten_refinement(&xs, 2.0, tol()).unwrap(),
        check_tl1(&xs, &WeightVector::new(vec![3.0, 3.0, 3.0], ConstraintMode::SumInverseOne).unwrap(), &sq, tol()).unwrap(),
    ];
    for r in &reports {
        assert!(r.is_equality(), "{}", r.claim);
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let v = r.side_values();
        let scale = v.iter().fold(1.0_f64, |m, s| m.max(s.abs()));
        for s in &v {
            assert!((s - v[0]).abs() <= 1e-10 * scale, "{}: {v:?}", r.claim);
        }
    }
}

#[test]
fn equal_pair_has_no_difference_term() {
    let x = sample_tuple(1).remove(0);
    let r = check_weighted_clarkson(&power(4.0), &[x.clone(), x], &WeightVector::uniform(2).unwrap(), tol()).unwrap();
    let v = r.side_values();
    assert!((v[0] - v[1]).abs() <= 1e-10 * v[1]);
}

#[test]
fn clarkson_pnorm_examples() {
    let r = check_clarkson_pnorm(&scalars(&[1.0, 2.0]), 4.0, tol()).unwrap();
    assert_sides(&r, &[34.0, 82.0, 136.0], 1e-12);
    assert_eq!(r.verdict, Verdict::Pass);

    let x = sample_tuple(1).remove(0);
    let r = check_clarkson_pnorm(&[x.clone(), x], 3.0, tol()).unwrap();
    let v = r.side_values();
    assert!((v[1] - v[2]).abs() <= 1e-10 * v[2]);
    assert_eq!(r.verdict, Verdict::Pass);

    let r = check_clarkson_pnorm(&scalars(&[1.0, 2.0]), 1.0, tol()).unwrap();
    assert_eq!(r.direction, vec![Relation::Ge, Relation::Ge]);
    assert!(matches!(check_clarkson_pnorm(&scalars(&[1.0]), 0.0, tol()), Err(Error::NonpositiveP(_))));
}

#[test]
fn roots_refinement_examples() {
    let r = check_roots_refinement(&power(4.0), &scalars(&[1.0, 2.0]), tol()).unwrap();
    assert_eq!(r.claim, "tr1");
    assert_sides(&r, &[20.5, 25.0, 41.0], 1e-12);
    let r = check_schatten_refinement(&scalars(&[1.0, 2.0]), 4.0, tol()).unwrap();
    assert_sides(&r, &[20.5, 25.0, 41.0], 1e-12);

    let x = sample_tuple(1);
    let r = check_roots_refinement(&power(3.0), &x, tol()).unwrap();
    let v = r.side_values();
    assert!((v[0] - v[1]).abs() <= 1e-10 * v[0] && (v[1] - v[2]).abs() <= 1e-10 * v[0]);

    let r = check_roots_refinement(&ScalarFunction::log_one_plus(), &sample_tuple(4), tol()).unwrap();
    assert_eq!(r.claim, "tr2");
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_log_refinement(&sample_tuple(4), tol()).unwrap();
    assert_eq!(r.claim, "cor3.5");
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_exp_refinement(&sample_tuple(3), Tolerance::EXPONENTIAL).unwrap();
    assert_eq!(r.claim, "cor3.4");
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn exp_overflow_is_degenerate() {
    let r = check_exp_refinement(&scalars(&[30.0, 1.0]), Tolerance::EXPONENTIAL).unwrap();
    assert_eq!(r.verdict, Verdict::Degenerate);
    assert!(r.note.is_some());
}

#[test]
fn literal_log_refinement_is_evaluated_as_printed() {
    // (1/2)[log 4 + log 2], log(√3 + 1), (1/2)[log 2.5 + log 1.5]
    let r = check_log_refinement_literal(&scalars(&[1.0, 2.0]), tol()).unwrap();
    let expected = [
        0.5 * (4.0_f64.ln() + 2.0_f64.ln()),
        (3.0_f64.sqrt() + 1.0).ln(),
        0.5 * (2.5_f64.ln() + 1.5_f64.ln()),
    ];
    assert_sides(&r, &expected, 1e-12);
    assert_eq!(r.verdict, Verdict::Violation);
}

#[test]
fn tl_literal_scalar_instance() {
    let w = WeightVector::new(vec![4.0, 4.0], ConstraintMode::SumInvSqrtPairsOne).unwrap();
    let xs = scalars(&[1.0, 2.0]);
    let ys = scalars(&[0.0, 0.0]);
    let r = check_tl_literal(&xs, &ys, &w, &power(2.0), Some(Reading::Convex), tol()).unwrap();
    assert_sides(&r, &[40.0, 10.0], 1e-12);
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_tl_literal(&xs, &ys, &w, &power(2.0), Some(Reading::Concave), tol()).unwrap();
    assert_eq!(r.verdict, Verdict::Violation);
    let r = check_tl_literal(&xs, &ys, &w, &power(2.0), None, tol()).unwrap();
    assert_eq!(r.direction, vec![Relation::Eq]);
    assert_eq!(r.verdict, Verdict::Violation);

    let bad = WeightVector::new(vec![1.0, 1.0], ConstraintMode::None).unwrap();
    assert!(matches!(
        check_tl_literal(&xs, &ys, &bad, &power(2.0), None, tol()),
        Err(Error::WeightConstraintViolated { .. })
    ));
}

#[test]
fn tl_literal_with_equal_tuples_drops_last_term() {
    let w = WeightVector::new(vec![4.0, 4.0], ConstraintMode::SumInvSqrtPairsOne).unwrap();
    let xs = scalars(&[1.0, 2.0]);
    let r = check_tl_literal(&xs, &xs, &w, &power(4.0), None, tol()).unwrap();
    // RHS: two copies of |x0 - x1|^4 = 1 plus τφ(0) = 0.
    assert!((r.side_values()[1] - 2.0).abs() < 1e-12);
}

#[test]
fn tl_chain_localizes_the_substitution() {
    let w = WeightVector::new(vec![4.0, 4.0], ConstraintMode::SumInvSqrtPairsOne).unwrap();
    let reports = check_tl_proof_chain(&scalars(&[1.0, 2.0]), &scalars(&[0.0, 0.0]), &w, &power(2.0), tol()).unwrap();
    let claims: Vec<&str> = reports.iter().map(|r| r.claim.as_str()).collect();
    assert_eq!(claims, ["tl-chain/fk1", "tl-chain/mo1", "tl-chain/fk3"]);
    assert_eq!(reports[0].verdict, Verdict::Pass);
    assert_sides(&reports[0], &[40.0, 40.0], 1e-12);
    assert_eq!(reports[1].verdict, Verdict::Violation);
    assert_sides(&reports[1], &[40.0, 10.0], 1e-12);
    assert_eq!(reports[2].verdict, Verdict::Pass);
    assert_sides(&reports[2], &[10.0, 10.0], 1e-12);
}

#[test]
fn tl_chain_substitution_holds_for_reciprocal_pairs() {
    let xs = sample_tuple(2);
    let ys: Vec<_> = sample_tuple(4).split_off(2);
    let reports = tl_chain_steps(&xs, &ys, &[1.0, 1.0], &power(4.0), tol()).unwrap();
    // Only the substitution step is meaningful here: the Jensen step needs Σ c_ij = 1.
    assert_eq!(reports[1].verdict, Verdict::Pass, "{:?}", reports[1]);
    assert_eq!(reports[2].verdict, Verdict::Pass);
    let v = reports[1].side_values();
    assert!((v[0] - v[1]).abs() <= 1e-10 * v[0]);

    let zero = scalars(&[0.0, 0.0]);
    let w = WeightVector::new(vec![4.0, 4.0], ConstraintMode::SumInvSqrtPairsOne).unwrap();
    for r in check_tl_proof_chain(&zero, &zero, &w, &power(2.0), tol()).unwrap() {
        assert_eq!(r.side_values(), vec![0.0, 0.0]);
        assert_eq!(r.verdict, Verdict::Pass);
    }
}

#[test]
fn tl1_scalar_examples() {
    let w = WeightVector::new(vec![2.0, 2.0], ConstraintMode::SumInverseOne).unwrap();
    let r = check_tl1(&scalars(&[1.0, 2.0]), &w, &power(4.0), tol()).unwrap();
    assert_sides(&r, &[136.0, 82.0], 1e-12);
    assert_eq!(r.verdict, Verdict::Pass);
    let r = check_tl1(&scalars(&[1.0, 1.0]), &w, &power(4.0), tol()).unwrap();
    assert_sides(&r, &[16.0, 16.0], 1e-12);
    let r = check_pnorm_parallelogram(&scalars(&[1.0, 2.0]), &w, 4.0, tol()).unwrap();
    assert_sides(&r, &[136.0, 82.0], 1e-12);
    assert_eq!(r.claim, "cor4.3");
    let r = check_pnorm_parallelogram(&sample_tuple(2), &w, 1.5, tol()).unwrap();
    assert_eq!(r.direction, vec![Relation::Le]);
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn direction_flips_across_two() {
    let xs = sample_tuple(3);
    let w = WeightVector::uniform(3).unwrap();
    let hi = check_weighted_clarkson(&power(4.0), &xs, &w, tol()).unwrap();
    let lo = check_weighted_clarkson(&power(1.0), &xs, &w, tol()).unwrap();
    assert_eq!(hi.direction[0], lo.direction[0].flipped());
    assert_eq!(hi.verdict, Verdict::Pass);
    assert_eq!(lo.verdict, Verdict::Pass);
    assert_eq!(hi.flipped().verdict, Verdict::Violation);
}
