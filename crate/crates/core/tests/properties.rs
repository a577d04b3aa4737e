//! Cross-module invariants: certified schedules satisfy their own MSE
//! condition, regime orderings hold, and the contracting-normals model
//! satisfies its drift inequality empirically.

use driftbound::baxendale::ErgodicityRate;
use driftbound::bounds::EstimationSetup;
use driftbound::models::{cn_step, ContractingNormals};
use driftbound::{ChainClass, ChainModel, DriftParams, FunctionNorms, NuOnC, StartSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const CLASSES: [ChainClass; 3] = [ChainClass::General, ChainClass::Reversible, ChainClass::ReversiblePositive];

fn drift_params() -> impl Strategy<Value = DriftParams> {
    (prop_oneof![Just(1.0), 0.05f64..0.95], 0.05f64..0.95, 0.0f64..8.0, 0.1f64..1.0, 0u8..3).prop_map(
        |(bt, lambda, dk, bf, nu)| {
            let nu_on_c = match nu {
                0 => NuOnC::ConcentratedOnC,
                1 => NuOnC::VIntegralBound { k_tilde: 2.0 },
                _ => NuOnC::Unknown,
            };
            DriftParams::new(bt, lambda, 1.0 + dk, bt * bf, nu_on_c).unwrap()
        },
    )
    .prop_filter("alpha_1 must be positive", |p| (p.k_const - p.beta_tilde) / (1.0 - p.beta) > p.lambda)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn m_finite_inside_and_rejected_outside(p in drift_params()) {
        for class in CLASSES {
            let rate = ErgodicityRate::new(&p, class).unwrap();
            prop_assert!(rate.rho > 0.0 && rate.rho < 1.0);
            for i in 1..10 {
                let g = rate.rho + (1.0 - rate.rho) * i as f64 / 10.0;
                let m = rate.m_const(g).unwrap();
                prop_assert!(m.is_finite() && m > 0.0);
            }
            prop_assert!(rate.m_const(rate.rho).is_err());
            prop_assert!(rate.m_const(1.0).is_err());
        }
    }

    #[test]
    fn positive_rate_never_exceeds_reversible(p in drift_params()) {
        let pos = ErgodicityRate::new(&p, ChainClass::ReversiblePositive).unwrap().rho;
        let rev = ErgodicityRate::new(&p, ChainClass::Reversible).unwrap().rho;
        prop_assert!(pos <= rev);
    }

    #[test]
    fn solve_r1_residual(beta in 0.001f64..1.0, big_r in 1.001f64..20.0, big_l in 1.001f64..1e4) {
        let r = driftbound::baxendale::solve_r1(beta, big_r, big_l).unwrap();
        prop_assert!(r > 1.0 && r < big_r);
        let lhs = driftbound::baxendale::r1_lhs(r, big_r);
        let rhs = driftbound::baxendale::r1_rhs(beta, big_r, big_l);
        // r - 1 carries only ulp(r) of absolute precision near r = 1
        let floor = 8.0 * f64::EPSILON * r / (r - 1.0);
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-10 + floor, "residual {}", lhs / rhs - 1.0);
    }

    #[test]
    fn emitted_schedules_meet_chebyshev_condition(
        p in drift_params(),
        pi_v in 1.0f64..10.0,
        fc in 0.1f64..30.0,
        vx in 1.0f64..50.0,
        eps in 0.01f64..1.0,
        log_alpha in -6.0f64..-0.5,
        start_kind in 0u8..3,
    ) {
        let alpha = 10f64.powf(log_alpha);
        let class = ChainClass::ReversiblePositive;
        let rate = ErgodicityRate::new(&p, class).unwrap();
        let rate_r = ErgodicityRate::new(&p.transform_r(2.0).unwrap(), class);
        prop_assume!(rate_r.is_ok());
        let rate_r = rate_r.unwrap();
        let start = match start_kind {
            0 => StartSpec::Stationary,
            1 => StartSpec::Deterministic { v_at_x: vx },
            _ => StartSpec::GeneralInit { min_bound: vx },
        };
        let setup = EstimationSetup {
            norms: FunctionNorms { f_p_norm: 1.0, p: 2.0, fc_norm_2p: fc, pi_v, b_v: 1.0, pi_c: 1.0 },
            cert_v: rate.certificate(0.5 * (rate.rho + 1.0)).unwrap(),
            cert_vr: rate_r.certificate(0.5 * (rate_r.rho + 1.0)).unwrap(),
            r: 2.0,
            start,
        };
        if let Ok(s) = setup.one_walk(eps, alpha) {
            prop_assert_eq!(s.total_cost, s.t + s.n);
            let mse = setup.mse_bound(s.t, s.n).unwrap();
            prop_assert!(mse <= eps * eps * alpha * (1.0 + 1e-9), "mse {} > {}", mse, eps * eps * alpha);
            let tighter = setup.one_walk(eps * 0.5, alpha).unwrap();
            prop_assert!(tighter.n >= s.n && tighter.total_cost >= s.total_cost);
        }
        if let Ok(ma) = setup.median_of_averages(eps, alpha, 0.11969) {
            prop_assert!(ma.m % 2 == 1);
            prop_assert_eq!(ma.total_cost, ma.m * (ma.t + ma.n));
        }
    }
}

#[test]
fn contracting_normals_drift_inequality_holds_empirically() {
    let model = ContractingNormals::new(0.5, 1.6226).unwrap();
    let drift = *model.drift();
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let reps = 20_000;
    for i in 0..100 {
        let x = -6.0 + 12.0 * i as f64 / 99.0;
        let vs: Vec<f64> = (0..reps).map(|_| model.v(&model.step(&x, &mut rng))).collect();
        let mean = vs.iter().sum::<f64>() / reps as f64;
        let sd = (vs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        let se = sd / (reps as f64).sqrt();
        let ceiling = if x.abs() <= model.d() { drift.k_const } else { drift.lambda * model.v(&x) };
        assert!(mean <= ceiling + 5.0 * se, "x = {x}: E V(X_1) ~ {mean} > {ceiling}");
    }
}

#[test]
fn stationary_law_is_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 200_000;
    let mut xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    for _ in 0..5 {
        xs.iter_mut().for_each(|x| *x = cn_step(*x, 0.5, &mut rng));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let second = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let fourth = xs.iter().map(|x| x.powi(4)).sum::<f64>() / n as f64;
    let nf = n as f64;
    assert!(mean.abs() < 4.0 / nf.sqrt(), "mean {mean}");
    assert!((second - 1.0).abs() < 4.0 * 2f64.sqrt() / nf.sqrt(), "second moment {second}");
    assert!((fourth - 3.0).abs() < 4.0 * 96f64.sqrt() / nf.sqrt(), "fourth moment {fourth}");
}
