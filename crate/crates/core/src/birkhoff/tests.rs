use super::*;
use crate::field::{CirclePoint, RotationParams};
use crate::return_time::{build_T, build_Tn, LayeredReturnTime};
use crate::tower::{convergents, interval_in};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn params(a: u64) -> RotationParams {
    RotationParams::new(a).unwrap()
}

fn point(p: &RotationParams, num: i64, den: i64) -> CirclePoint {
    CirclePoint::reduce(&p.frac(num, den))
}

#[test]
fn naive_empty_sum_is_zero() {
    let p = params(2);
    let (t, _) = build_T(&p, 2).unwrap();
    let x = point(&p, 1, 7);
    assert!(birkhoff_naive(&t, &p, &x, &0.into(), 10).unwrap().is_zero());
    assert_eq!(
        birkhoff_naive(&t, &p, &x, &1.into(), 10).unwrap(),
        t.eval(&x)
    );
}

#[test]
fn naive_guards() {
    let p = params(2);
    let (t, _) = build_T(&p, 2).unwrap();
    let x = point(&p, 1, 7);
    assert!(matches!(
        birkhoff_naive(&t, &p, &x, &11.into(), 10),
        Err(Error::GuardExceeded { .. })
    ));
    assert!(birkhoff_naive(&t, &p, &x, &(-1).into(), 10).is_err());
    assert!(matches!(
        birkhoff_naive(&t, &params(3), &CirclePoint::zero(3), &1.into(), 10),
        Err(Error::ParameterMismatch { .. })
    ));
}

#[test]
fn cocycle_identity() {
    let p = params(3);
    let f = LayeredReturnTime::truncated(&p, 4).unwrap();
    let x = point(&p, 5, 13);
    for (i, j) in [
        (3i64, 4i64),
        (0, 17),
        (40, -15),
        (-8, -9),
        (123456789, 987654321),
    ] {
        let (i, j) = (BigInt::from(i), BigInt::from(j));
        let lhs = f.birkhoff_fast(&x, &(&i + &j));
        let xi = crate::tower::rotate(&p, &x, &i);
        let rhs = f.birkhoff_fast(&x, &i) + f.birkhoff_fast(&xi, &j);
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn full_tower_sum_vanishes() {
    // a = 2: q_3 = 12 and T_2^{(12)}(x) = 0 on I_2
    let p = params(2);
    assert_eq!(convergents(&p, 3)[3].q, BigInt::from(12));
    let layer = LayeredReturnTime::layer(&p, 2);
    let (i2, _) = interval_in(&p, 2);
    for t in [(1, 3), (1, 2), (5, 7)] {
        let x = i2.point_at(&BigRational::new(t.0.into(), t.1.into()));
        assert!(birkhoff_naive(&layer, &p, &x, &12.into(), 100)
            .unwrap()
            .is_zero());
        assert!(birkhoff_fast(&layer, &x, &12.into()).is_zero());
    }
}

#[test]
fn fast_matches_naive_on_explicit_functions() {
    for a in [1u64, 2, 3, 10] {
        let p = params(a);
        let layered = LayeredReturnTime::truncated(&p, 3).unwrap();
        let (t, _) = build_T(&p, 3).unwrap();
        for (num, i) in [(0i64, 1i64), (3, 50), (77, 333), (1000, 1021)] {
            let x = point(&p, num, 1024);
            let i = BigInt::from(i);
            assert_eq!(
                birkhoff_fast(&layered, &x, &i),
                birkhoff_naive(&t, &p, &x, &i, 10_000).unwrap(),
                "a={a}"
            );
        }
    }
}

#[test]
fn report_picks_evaluator() {
    let p = params(2);
    let f = LayeredReturnTime::truncated(&p, 3).unwrap();
    let x = point(&p, 1, 3);
    let small = birkhoff_report(&f, &x, &100.into(), 1000).unwrap();
    assert_eq!(small.evaluator, Evaluator::Naive);
    let big = birkhoff_report(&f, &x, &5000.into(), 1000).unwrap();
    assert_eq!(big.evaluator, Evaluator::Fast);
    assert_eq!(big.tail, f.tail_bound().scale_int(&5000.into()));
    let again = birkhoff_report(&f, &x, &100.into(), 10).unwrap();
    assert_eq!(again.value, small.value);
}

#[test]
fn context_examples() {
    let ctx = make_context(&params(2), 1, Sample::Midpoint).unwrap();
    assert_eq!(ctx.i, BigInt::from(2));
    let ctx = make_context(&params(10), 2, Sample::Midpoint).unwrap();
    assert_eq!(ctx.i, BigInt::from(510));
    for s in [Sample::OuterEnd, Sample::InnerEnd, Sample::Random(4)] {
        let ctx = make_context(&params(10), 3, s).unwrap();
        assert!(ctx.jn().contains(&ctx.x));
    }
    assert!(make_context(&params(10), 0, Sample::Midpoint).is_err());
}

#[test]
fn truncation_must_cover_neighbours() {
    let p = params(10);
    let ctx = make_context(&p, 2, Sample::Midpoint).unwrap();
    assert!(evaluate_context(&p, &ctx, 3, NAIVE_CAP).is_err());
    assert!(evaluate_context(&params(11), &ctx, 5, NAIVE_CAP).is_err());
}

#[test]
fn naive_and_fast_contexts_agree() {
    let p = params(10);
    let ctx = make_context(&p, 2, Sample::Random(1)).unwrap();
    let naive = evaluate_context(&p, &ctx, 5, NAIVE_CAP).unwrap();
    let fast = evaluate_context(&p, &ctx, 5, 100).unwrap();
    assert_eq!(naive.evaluator, Evaluator::Naive);
    assert_eq!(fast.evaluator, Evaluator::Fast);
    assert_eq!(fast.spot_check, Some(true));
    for nu in 1..=5 {
        assert_eq!(naive.at_x(nu), fast.at_x(nu));
        assert_eq!(naive.at_zero(nu), fast.at_zero(nu));
    }
}

fn structural_ok(r: &PropCheckResult) -> bool {
    r.checks.iter().filter(|c| c.structural).all(|c| c.holds)
}

#[test]
fn structural_identities_hold_for_small_a() {
    for a in [2u64, 3, 10] {
        let p = params(a);
        for n in 1..=3 {
            for s in [Sample::Midpoint, Sample::OuterEnd, Sample::InnerEnd] {
                for r in all_checks(&p, n, s, NAIVE_CAP).unwrap() {
                    assert!(structural_ok(&r), "a={a} n={n} {:?} {:?}", s, r.id);
                    assert_ne!(r.verdict, Verdict::Fail, "a={a} n={n} {:?}", r.id);
                }
            }
        }
    }
}

#[test]
fn p2_closed_form_and_zero() {
    let p = params(10);
    let ctx = make_context(&p, 2, Sample::Midpoint).unwrap();
    let sums = evaluate_context(&p, &ctx, 4, NAIVE_CAP).unwrap();
    let r = check_p2(&sums);
    assert!(r.check("closed-form").unwrap().holds);
    assert!(r.check("zero-at-origin").unwrap().holds);
    assert!(r.check("sign").unwrap().holds);
    // n = 2 is even, so the layer pushes upward
    assert!(sums.diff(2).is_positive());
}

#[test]
fn p3_needs_large_enough_a() {
    // the lower layer cancels exactly from a = 5 on, not below
    for (a, exact) in [(2u64, false), (4, false), (5, true), (10, true)] {
        let p = params(a);
        let ctx = make_context(&p, 2, Sample::Midpoint).unwrap();
        let sums = evaluate_context(&p, &ctx, 4, NAIVE_CAP).unwrap();
        let r = check_p3(&sums);
        assert_eq!(r.passed(), exact, "a={a}");
        if !exact {
            assert_eq!(r.verdict, Verdict::OutOfRegime);
        }
    }
}

#[test]
fn p3_is_vacuous_at_level_one() {
    let p = params(10);
    let ctx = make_context(&p, 1, Sample::Midpoint).unwrap();
    let sums = evaluate_context(&p, &ctx, 3, NAIVE_CAP).unwrap();
    assert!(sums.diff(0).is_zero());
    assert!(check_p3(&sums).passed());
}

#[test]
fn large_a_passes_every_check() {
    let p = params(1000);
    assert!(budget_closes(&p));
    for n in [2usize, 3] {
        for r in all_checks(&p, n, Sample::Midpoint, NAIVE_CAP).unwrap() {
            assert!(r.passed(), "n={n} {:?} margin {}", r.id, r.margin);
        }
    }
}

#[test]
fn small_a_is_out_of_regime_not_fail() {
    let p = params(10);
    assert!(!budget_closes(&p));
    let rows = regime_frontier(&[10], &[2], &[Sample::Midpoint], NAIVE_CAP).unwrap();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.verdict != Verdict::Fail));
}

#[test]
fn budget_threshold() {
    assert!(!budget_closes(&params(899)));
    assert!(budget_closes(&params(900)));
}

#[test]
fn first_return_examples() {
    for a in [2u64, 3, 10] {
        let p = params(a);
        let r = first_return_check(&p, 1, 3, NAIVE_CAP).unwrap();
        assert!(r.holds, "a={a}");
        assert!(r.max_return.unwrap() <= 2 * u64::try_from(&convergents(&p, 2)[2].q).unwrap());
    }
    assert!(first_return_check(&params(2), 1, 2, NAIVE_CAP).is_err());
}

#[test]
fn window_levels_chain() {
    let p = params(3);
    let conv = convergents(&p, 8);
    let half = BigRational::new(1.into(), 2.into());
    for n in 1..6 {
        let hi = conv[n].offset(&p).abs().scale(&half);
        let lo = conv[n + 1].offset(&p).abs().scale(&half);
        let mid = (&hi + &lo).scale(&half);
        assert_eq!(window_level(&p, &mid), Some(n));
        assert_eq!(window_level(&p, &lo), Some(n));
        if n > 1 {
            assert_eq!(window_level(&p, &hi), Some(n - 1));
        }
    }
    assert_eq!(window_level(&p, &p.zero()), None);
    assert_eq!(window_level(&p, &p.frac(1, 2)), None);
}

#[test]
fn lemma1_trivial_witness() {
    // x = x_r is its own return: q = 0 works whenever δ is below the model
    // margin.
    let p = params(10);
    let conv = convergents(&p, 3);
    let half = BigRational::new(1.into(), 2.into());
    let hi = conv[2].offset(&p).abs().scale(&half);
    let lo = conv[3].offset(&p).abs().scale(&half);
    let r = (&hi + &lo).scale(&half);
    let delta = p.alpha().scale(&BigRational::new(1.into(), 600.into()));
    let res = lemma1_scan(&p, &CirclePoint::zero(10), &r, &delta, 8).unwrap();
    assert_eq!(res.n, 2);
    assert!(res.x_r.is_zero());
    assert!(res.q.is_zero());
    assert!(res.holds);
}

#[test]
fn certificate_small_grid() {
    let p = params(10);
    let grid = GridSpec {
        levels: vec![1, 2],
        pairs_per_level: 6,
        seed: 3,
        search_depth: 10,
    };
    let cert = separation_certificate(&p, &grid).unwrap();
    assert_eq!(cert.pairs.len(), 12);
    assert!(cert.delta.is_positive());
    assert!(cert.delta <= cert.delta_cap);
    assert!(cert.holds, "worst {:?}", cert.worst.map(|w| &cert.pairs[w]));
    let again = separation_certificate(&p, &grid).unwrap();
    assert_eq!(cert, again);
}

#[test]
fn layer_sums_sum_to_total() {
    let p = params(3);
    let f = LayeredReturnTime::truncated(&p, 4).unwrap();
    let x = point(&p, 2, 9);
    let i = BigInt::from(200);
    let total = f
        .layer_sums_naive(&x, &i, 1000)
        .unwrap()
        .into_iter()
        .fold(p.zero(), |a, b| a + b);
    assert_eq!(total, f.birkhoff_fast(&x, &i));
    let (_, t2) = build_Tn(&p, 2).unwrap();
    assert_eq!(
        f.layer_sums_fast(&x, &i)[1],
        birkhoff_naive(&t2, &p, &x, &i, 1000).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_equals_naive(a in 1u64..12, num in 0i64..1 << 20, i in 0i64..400) {
        let p = params(a);
        let f = LayeredReturnTime::truncated(&p, 3).unwrap();
        let x = point(&p, num, 1 << 20);
        let i = BigInt::from(i);
        prop_assert_eq!(f.birkhoff_fast(&x, &i), birkhoff_naive(&f, &p, &x, &i, 1000).unwrap());
    }
}
