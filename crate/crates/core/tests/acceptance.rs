//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p driftbound --test acceptance -- --nocapture` to
//! see the report lines.

use std::time::{Duration, Instant};

use driftbound::baxendale::{rho, solve_r1, r1_lhs, r1_rhs, ErgodicityRate};
use driftbound::bounds::{median_runs, EstimationSetup, DEFAULT_MEDIAN_A};
use driftbound::models::{cn_drift_params, cn_norms, cn_step, ContractingNormals, NormsSetting};
use driftbound::optimizer::{CostProblem, Estimator, SmallSetObjective, SmallSetProblem};
use driftbound::simulate::{coverage_experiment, empirical_mse, stream_seed};
use driftbound::{ChainClass, DriftParams, NuOnC, StartSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THETA: f64 = 0.5;
const D: f64 = 1.6226;
const EPS: f64 = 0.1;
const CLASS: ChainClass = ChainClass::ReversiblePositive;
const GAMMA: f64 = 0.915;
const GAMMA_2: f64 = 0.971;

fn check(criterion: &str, label: &str, pass: bool, detail: String) -> bool {
    println!("[{}] criterion {criterion}: {label} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value / target - 1.0).abs() <= rel
}

fn setup(setting: NormsSetting) -> EstimationSetup {
    let p = cn_drift_params(THETA, D).unwrap();
    EstimationSetup {
        norms: cn_norms(THETA, D, setting).unwrap(),
        cert_v: ErgodicityRate::new(&p, CLASS).unwrap().certificate(GAMMA).unwrap(),
        cert_vr: ErgodicityRate::new(&p.transform_r(2.0).unwrap(), CLASS)
            .unwrap()
            .certificate(GAMMA_2)
            .unwrap(),
        r: 2.0,
        start: StartSpec::Deterministic { v_at_x: 1.0 },
    }
}

fn finish(results: &[bool], started: Instant, limit: Duration, criterion: &str) {
    let elapsed = started.elapsed();
    let fast = check(criterion, "runtime", elapsed < limit, format!("{elapsed:.2?} < {limit:?}"));
    assert!(results.iter().all(|&r| r) && fast, "criterion {criterion} failed");
}

#[test]
fn criterion_1_constants() {
    let started = Instant::now();
    let p = cn_drift_params(THETA, D).unwrap();
    let p2 = p.transform_r(2.0).unwrap();
    let rate = ErgodicityRate::new(&p, CLASS).unwrap();
    let rate2 = ErgodicityRate::new(&p2, CLASS).unwrap();
    let m = rate.m_const(GAMMA).unwrap();
    let m2 = rate2.m_const(GAMMA_2).unwrap();
    let results = [
        check("1", "rho = .895 +/- 0.5%", within(rate.rho, 0.895, 0.005), format!("rho = {:.5}", rate.rho)),
        check("1", "rho_2 = .899 +/- 0.5%", within(rate2.rho, 0.899, 0.005), format!("rho_2 = {:.5}", rate2.rho)),
        check("1", "M(.915) = 3.64e4 +/- 2%", within(m, 3.64e4, 0.02), format!("M = {m:.6e}")),
        check("1", "M_2(.971) = 748 +/- 2%", within(m2, 748.0, 0.02), format!("M_2 = {m2:.2}")),
    ];
    finish(&results, started, Duration::from_secs(1), "1");
}

#[test]
fn criterion_2_setting_two_schedules() {
    let started = Instant::now();
    let s = setup(NormsSetting::Exact);
    let mut results = Vec::new();
    for (alpha, n_target) in [(0.1, 1.01e8), (1e-3, 1.01e10), (1e-5, 1.01e12)] {
        let sch = s.one_walk(EPS, alpha).unwrap();
        results.push(check(
            "2",
            &format!("alpha={alpha}: t=229, n={n_target:.2e} +/- 2%"),
            within(sch.t as f64, 229.0, 0.02) && within(sch.n as f64, n_target, 0.02),
            format!("t = {}, n = {:.4e}", sch.t, sch.n as f64),
        ));
    }
    finish(&results, started, Duration::from_secs(1), "2");
}

#[test]
fn criterion_3_setting_one_schedules() {
    let started = Instant::now();
    let s = setup(NormsSetting::LemmaBounds);
    let ow = s.one_walk(EPS, 0.1).unwrap();
    let ma = s.median_of_averages(EPS, 1e-3, DEFAULT_MEDIAN_A).unwrap();
    let results = [
        check(
            "3",
            "one walk alpha=.1: t=218, n=6.46e9 +/- 2%",
            within(ow.t as f64, 218.0, 0.02) && within(ow.n as f64, 6.46e9, 0.02),
            format!("t = {}, n = {:.4e}", ow.t, ow.n as f64),
        ),
        check(
            "3",
            "MA alpha=1e-3, a=.11969: m=15, n=5.40e9, total 8.10e10 +/- 2%",
            ma.m == 15 && within(ma.n as f64, 5.40e9, 0.02) && within(ma.total_cost as f64, 8.10e10, 0.02),
            format!("m = {}, t = {}, n = {:.4e}, total = {:.4e}", ma.m, ma.t, ma.n as f64, ma.total_cost as f64),
        ),
    ];
    finish(&results, started, Duration::from_secs(1), "3");
}

#[test]
fn criterion_4_median_counts() {
    let m3 = median_runs(DEFAULT_MEDIAN_A, 1e-3).unwrap();
    let m5 = median_runs(DEFAULT_MEDIAN_A, 1e-5).unwrap();
    let results = [
        check("4", "median_runs(.11969, 1e-3) = 15", m3 == 15, format!("m = {m3}")),
        check("4", "median_runs(.11969, 1e-5) = 27", m5 == 27, format!("m = {m5}")),
    ];
    assert!(results.iter().all(|&r| r));
}

#[test]
fn criterion_5_optimizers() {
    let started = Instant::now();
    let sp = SmallSetProblem {
        theta: THETA,
        eps: EPS,
        alpha: 0.1,
        setting: NormsSetting::Exact,
        class: CLASS,
        r: 2.0,
        start: StartSpec::Deterministic { v_at_x: 1.0 },
        estimator: Estimator::OneWalk,
    };
    let d = sp.optimize(SmallSetObjective::MinRhoR).unwrap().d;
    let problem: CostProblem = sp.cost_problem(D).unwrap();
    let search = problem.optimize_gammas().unwrap();
    let published = problem.schedule_at(GAMMA, GAMMA_2).unwrap();
    let results = [
        check("5", "small-set d = 1.6226 +/- 1e-3", (d - 1.6226).abs() <= 1e-3, format!("d = {d:.5}")),
        check(
            "5",
            "optimised cost <= cost at (.915, .971)",
            search.schedule.total_cost <= published.total_cost,
            format!(
                "gamma = {:.4}, gamma_2 = {:.4}, cost = {} vs {}",
                search.gamma, search.gamma_r, search.schedule.total_cost, published.total_cost
            ),
        ),
    ];
    finish(&results, started, Duration::from_secs(60), "5");
}

#[test]
fn criterion_6_empirical_coverage() {
    let started = Instant::now();
    let model = ContractingNormals::new(THETA, D).unwrap();
    let mut results = Vec::new();
    for (label, t, n, m, reps, threshold) in [
        ("one walk t=0, n=811, 1000 reps: coverage >= .88", 0, 811, 1, 1_000, 0.88),
        ("one walk t=0, n=3248, 1e4 reps: coverage >= .995", 0, 3248, 1, 10_000, 0.995),
        ("MA m=7, t=0, n=726, 2000 reps: coverage >= .993", 0, 726, 7, 2_000, 0.993),
    ] {
        let rep = coverage_experiment(&model, t, n, m, EPS, reps, 42).unwrap();
        results.push(check(
            "6",
            label,
            rep.coverage >= threshold,
            format!(
                "coverage = {:.4}, Wilson 95% = [{:.4}, {:.4}]",
                rep.coverage, rep.wilson.lower, rep.wilson.upper
            ),
        ));
    }
    finish(&results, started, Duration::from_secs(120), "6");
}

#[test]
fn criterion_7_mse_soundness() {
    let model = ContractingNormals::new(THETA, D).unwrap();
    let s = setup(NormsSetting::Exact);
    let mut results = Vec::new();
    for t in [0u64, 10, 100] {
        for n in [100u64, 1_000, 10_000] {
            let emp = empirical_mse(&model, t, n, 2_000, stream_seed(7, t * 100_000 + n)).unwrap();
            let bound = s.mse_bound(t, n).unwrap();
            results.push(check(
                "7",
                &format!("t={t}, n={n}: empirical MSE <= bound"),
                emp.mse <= bound,
                format!("empirical = {:.4e} +/- {:.1e}, bound = {bound:.4e}", emp.mse, emp.std_error),
            ));
        }
    }
    assert!(results.iter().all(|&r| r));
}

/// Sample moments of `X_n` started at `x0` with parameter `theta`.
fn moments(theta: f64, x0: f64, steps: usize, reps: usize, seed: u64) -> [(f64, f64); 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = [[0.0f64; 2]; 3];
    for _ in 0..reps {
        let mut x = x0;
        for _ in 0..steps {
            x = cn_step(x, theta, &mut rng);
        }
        for (k, s) in sums.iter_mut().enumerate() {
            let v = x.powi(k as i32 + 1);
            s[0] += v;
            s[1] += v * v;
        }
    }
    sums.map(|[s, s2]| {
        let mean = s / reps as f64;
        let var = s2 / reps as f64 - mean * mean;
        (mean, (var / reps as f64).sqrt())
    })
}

#[test]
fn criterion_8_self_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let beta = rng.random_range(0.01..1.0);
        let big_r = rng.random_range(1.01..5.0);
        let big_l = rng.random_range(1.01..50.0);
        let r = solve_r1(beta, big_r, big_l).unwrap();
        worst = worst.max((r1_lhs(r, big_r) / r1_rhs(beta, big_r, big_l) - 1.0).abs());
    }
    let residuals = check("8", "solve_r1 relative residual <= 1e-10 on 100 draws", worst <= 1e-10, format!("max = {worst:.2e}"));

    let mut worst_z = 0.0f64;
    for (i, steps) in [1usize, 2, 5].into_iter().enumerate() {
        let pos = moments(0.5, 2.0, steps, 100_000, 1000 + i as u64);
        let sign = if steps % 2 == 0 { 1.0 } else { -1.0 };
        let neg = moments(-0.5, sign * 2.0, steps, 100_000, 2000 + i as u64);
        for ((m1, s1), (m2, s2)) in pos.into_iter().zip(neg) {
            worst_z = worst_z.max((m1 - m2).abs() / (s1 * s1 + s2 * s2).sqrt());
        }
    }
    let symmetry = check("8", "symmetry-lemma moments agree within 4 SE", worst_z <= 4.0, format!("max |z| = {worst_z:.2}"));

    let mut violations = 0;
    for i in 0..50 {
        let atomic = i % 5 == 0;
        let bt = if atomic { 1.0 } else { rng.random_range(0.05..0.95) };
        let lambda = rng.random_range(0.05..0.95);
        let k = 1.0 + rng.random_range(0.0..10.0);
        let beta = bt * rng.random_range(0.1..1.0);
        let p = DriftParams::new(bt, lambda, k, beta, NuOnC::ConcentratedOnC).unwrap();
        let pos = rho(&p, ChainClass::ReversiblePositive).unwrap();
        let rev = rho(&p, ChainClass::Reversible).unwrap();
        if pos > rev {
            violations += 1;
        }
    }
    let ordering = check("8", "rho(reversible positive) <= rho(reversible) on 50 draws", violations == 0, format!("violations = {violations}"));

    assert!(residuals && symmetry && ordering);
}
