use std::path::Path;

use driftbound::baxendale::ErgodicityRate;
use driftbound::bounds::{EstimationSetup, DEFAULT_MEDIAN_A};
use driftbound::models::{cn_drift_params, cn_norms, ContractingNormals, NormsSetting};
use driftbound::optimizer::{optimize_a, CostProblem, Estimator, GammaProbe, SmallSetObjective, SmallSetProblem};
use driftbound::simulate::{coverage_experiment, empirical_mse, CoverageReport, MseEstimate};
use driftbound::{ChainClass, ChainModel, DriftParams, ErgodicityCertificate, FunctionNorms, Schedule, StartSpec};
use serde::Serialize;

use crate::config::{require, Choice, Config, EstimatorKind, NormsSpec, Real};
use crate::error::CliError;
use crate::report::{to_json, write_probes, write_rows, Row};

type Res<T> = Result<T, CliError>;

pub struct Output {
    pub json: String,
    /// Set when the report was produced but a soundness check failed.
    pub violation: Option<String>,
}

impl Output {
    fn ok<T: Serialize>(report: &T) -> Output {
        Output { json: to_json(report), violation: None }
    }
}

#[derive(Debug, Clone, Serialize)]
struct SmallSetSummary {
    objective: SmallSetObjective,
    d: f64,
    objective_value: f64,
    evaluations: usize,
}

/// Everything that does not depend on `gamma`, `gamma_r` or `alpha`.
struct Base {
    theta: Option<f64>,
    d: Option<f64>,
    params_v: DriftParams,
    params_vr: DriftParams,
    class: ChainClass,
    r: f64,
    norms: Option<NormsSpec>,
    start: Option<StartSpec>,
    small_set: Option<SmallSetSummary>,
}

fn v_of(x0: f64) -> f64 {
    1.0 + x0 * x0
}

fn estimator_of(cfg: &Config) -> (EstimatorKind, Choice) {
    let kind = cfg.estimator.unwrap_or(EstimatorKind::OneWalk);
    (kind, cfg.a.unwrap_or(Choice::Fixed(DEFAULT_MEDIAN_A)))
}

/// Estimator handed to the grid search; an `a` still to be optimised is
/// held at its default meanwhile.
fn search_estimator(kind: EstimatorKind, a: Choice) -> Estimator {
    match (kind, a) {
        (EstimatorKind::OneWalk, _) => Estimator::OneWalk,
        (EstimatorKind::Ma, Choice::Fixed(a)) => Estimator::MedianOfAverages { a },
        (EstimatorKind::Ma, Choice::Optimize) => Estimator::MedianOfAverages { a: DEFAULT_MEDIAN_A },
    }
}

fn eps_of(cfg: &Config) -> Res<f64> {
    Ok(require(&cfg.eps, "eps")?.0)
}

fn resolve(cfg: &Config) -> Res<Base> {
    let r = cfg.r.unwrap_or(2.0);
    match (cfg.theta, cfg.drift) {
        (Some(_), Some(_)) => Err(CliError::Config("give either `theta` (with `d`) or `drift`, not both".into())),
        (None, Some(params)) => {
            if cfg.d.is_some() {
                return Err(CliError::Config("`d` only applies to the contracting-normals model".into()));
            }
            Ok(Base {
                theta: None,
                d: None,
                params_v: params,
                params_vr: params.transform_r(r)?,
                class: require(&cfg.class, "class")?,
                r,
                norms: cfg.norms,
                start: cfg.start,
                small_set: None,
            })
        }
        (None, None) => Err(CliError::Config("missing required field `theta` (or `drift`)".into())),
        (Some(theta), None) => {
            let class = cfg.class.unwrap_or(ChainClass::ReversiblePositive);
            let start = cfg.start.unwrap_or(StartSpec::Deterministic { v_at_x: v_of(cfg.x0.unwrap_or(0.0)) });
            let norms = cfg.norms.unwrap_or(NormsSpec::Setting(NormsSetting::Exact));
            let (d, small_set) = match require(&cfg.d, "d")? {
                Choice::Fixed(d) => (d, None),
                Choice::Optimize => {
                    let NormsSpec::Setting(setting) = norms else {
                        return Err(CliError::Config("`d = \"optimize\"` needs `norms` to be a named setting".into()));
                    };
                    let (kind, a) = estimator_of(cfg);
                    let objective = cfg.objective.unwrap_or(SmallSetObjective::MinRhoR);
                    let search = SmallSetProblem {
                        theta,
                        eps: eps_of(cfg)?,
                        alpha: require(&cfg.alpha, "alpha")?,
                        setting,
                        class,
                        r,
                        start,
                        estimator: search_estimator(kind, a),
                    }
                    .optimize(objective)?;
                    let summary = SmallSetSummary {
                        objective,
                        d: search.d,
                        objective_value: search.objective_value,
                        evaluations: search.probes.len(),
                    };
                    (search.d, Some(summary))
                }
            };
            let params_v = cn_drift_params(theta, d)?;
            Ok(Base {
                theta: Some(theta),
                d: Some(d),
                params_v,
                params_vr: params_v.transform_r(r)?,
                class,
                r,
                norms: Some(norms),
                start: Some(start),
                small_set,
            })
        }
    }
}

impl Base {
    fn norms(&self) -> Res<FunctionNorms> {
        match require(&self.norms, "norms")? {
            NormsSpec::Explicit(n) => {
                n.validate()?;
                Ok(n)
            }
            NormsSpec::Setting(s) => match (self.theta, self.d) {
                (Some(theta), Some(d)) => Ok(cn_norms(theta, d, s)?),
                _ => Err(CliError::Config("named `norms` settings need the contracting-normals model".into())),
            },
        }
    }

    fn rates(&self) -> Res<(ErgodicityRate, ErgodicityRate)> {
        Ok((ErgodicityRate::new(&self.params_v, self.class)?, ErgodicityRate::new(&self.params_vr, self.class)?))
    }

    fn cost_problem(&self, eps: f64, alpha: f64, estimator: Estimator) -> Res<CostProblem> {
        Ok(CostProblem {
            params_v: self.params_v,
            params_vr: self.params_vr,
            class: self.class,
            norms: self.norms()?,
            r: self.r,
            start: require(&self.start, "start")?,
            eps,
            alpha,
            estimator,
        })
    }

    fn echo(&self) -> ParamsEcho {
        ParamsEcho {
            theta: self.theta,
            d: self.d,
            class: self.class,
            r: self.r,
            v: self.params_v,
            v_r: self.params_vr,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ParamsEcho {
    theta: Option<f64>,
    d: Option<f64>,
    class: ChainClass,
    r: f64,
    v: DriftParams,
    v_r: DriftParams,
}

/// Fixed or searched `(gamma, gamma_r)`.
enum Gammas {
    Fixed(f64, f64),
    Optimize,
}

fn gammas_of(cfg: &Config, default: Option<Choice>) -> Res<Gammas> {
    let g = cfg.gamma.or(default);
    let gr = cfg.gamma_r.or(default);
    match (require(&g, "gamma")?, require(&gr, "gamma_r")?) {
        (Choice::Fixed(g), Choice::Fixed(gr)) => Ok(Gammas::Fixed(g, gr)),
        (Choice::Optimize, Choice::Optimize) => Ok(Gammas::Optimize),
        _ => Err(CliError::Config("`gamma` and `gamma_r` must both be numbers or both \"optimize\"".into())),
    }
}

/// Certificates and, when searched, the grid probes.
struct Certified {
    cert_v: ErgodicityCertificate,
    cert_vr: ErgodicityCertificate,
    probes: Vec<GammaProbe>,
}

fn certify_at(base: &Base, gammas: &Gammas, problem: impl FnOnce() -> Res<CostProblem>) -> Res<Certified> {
    match *gammas {
        Gammas::Fixed(g, gr) => {
            let (rate_v, rate_vr) = base.rates()?;
            Ok(Certified { cert_v: rate_v.certificate(g)?, cert_vr: rate_vr.certificate(gr)?, probes: Vec::new() })
        }
        Gammas::Optimize => {
            let search = problem()?.optimize_gammas()?;
            Ok(Certified { cert_v: search.setup.cert_v, cert_vr: search.setup.cert_vr, probes: search.probes })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct CertifyReport<'a> {
    version: &'static str,
    input: &'a Config,
    rho: f64,
    gamma: f64,
    #[serde(rename = "M")]
    m: f64,
    rho_r: f64,
    gamma_r: f64,
    #[serde(rename = "M_r")]
    m_r: f64,
    params_echo: ParamsEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    small_set: Option<SmallSetSummary>,
}

pub fn certify(cfg: &Config) -> Res<Output> {
    let base = resolve(cfg)?;
    let gammas = gammas_of(cfg, None)?;
    let c = certify_at(&base, &gammas, || {
        let (kind, a) = estimator_of(cfg);
        base.cost_problem(eps_of(cfg)?, require(&cfg.alpha, "alpha")?, search_estimator(kind, a))
    })?;
    Ok(Output::ok(&CertifyReport {
        version: driftbound::VERSION,
        input: cfg,
        rho: c.cert_v.rho,
        gamma: c.cert_v.gamma,
        m: c.cert_v.m_const,
        rho_r: c.cert_vr.rho,
        gamma_r: c.cert_vr.gamma,
        m_r: c.cert_vr.m_const,
        params_echo: base.echo(),
        small_set: base.small_set,
    }))
}

#[derive(Debug, Clone, Serialize)]
struct Certified1 {
    #[serde(skip_serializing_if = "Option::is_none")]
    setting: Option<u8>,
    alpha: f64,
    algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    gamma: f64,
    #[serde(rename = "M")]
    m: f64,
    gamma_r: f64,
    #[serde(rename = "M_r")]
    m_r: f64,
    schedule: Schedule,
}

fn schedule_one(
    base: &Base,
    gammas: &Gammas,
    eps: f64,
    alpha: f64,
    kind: EstimatorKind,
    a: Choice,
    setting: Option<u8>,
) -> Res<(Certified1, Vec<GammaProbe>)> {
    let c = certify_at(base, gammas, || base.cost_problem(eps, alpha, search_estimator(kind, a)))?;
    let setup = EstimationSetup {
        norms: base.norms()?,
        cert_v: c.cert_v,
        cert_vr: c.cert_vr,
        r: base.r,
        start: require(&base.start, "start")?,
    };
    let (schedule, a_used) = match (kind, a) {
        (EstimatorKind::OneWalk, _) => (setup.one_walk(eps, alpha)?, None),
        (EstimatorKind::Ma, Choice::Fixed(a)) => (setup.median_of_averages(eps, alpha, a)?, Some(a)),
        (EstimatorKind::Ma, Choice::Optimize) => {
            let s = optimize_a(&setup, eps, alpha)?;
            (s.schedule, Some(s.a))
        }
    };
    let row = Certified1 {
        setting,
        alpha,
        algorithm: kind.to_string(),
        a: a_used,
        gamma: c.cert_v.gamma,
        m: c.cert_v.m_const,
        gamma_r: c.cert_vr.gamma,
        m_r: c.cert_vr.m_const,
        schedule,
    };
    Ok((row, c.probes))
}

fn row_of(c: &Certified1) -> Row {
    Row {
        setting: c.setting,
        alpha: c.alpha,
        algorithm: c.algorithm.clone(),
        m: c.schedule.m,
        t: c.schedule.t,
        n: c.schedule.n,
        total_cost: c.schedule.total_cost,
    }
}

#[derive(Debug, Clone, Serialize)]
struct ScheduleReport<'a> {
    version: &'static str,
    input: &'a Config,
    rho: f64,
    rho_r: f64,
    params_echo: ParamsEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    small_set: Option<SmallSetSummary>,
    schedules: Vec<Certified1>,
    rows: Vec<Row>,
}

fn alphas_of(cfg: &Config) -> Res<Vec<f64>> {
    match (&cfg.alphas, cfg.alpha) {
        (Some(list), None) if !list.is_empty() => Ok(list.clone()),
        (None, Some(a)) => Ok(vec![a]),
        (Some(_), Some(_)) => Err(CliError::Config("give either `alpha` or `alphas`, not both".into())),
        _ => Err(CliError::Config("missing required field `alpha`".into())),
    }
}

pub fn schedule(cfg: &Config, out: Option<&Path>) -> Res<Output> {
    let base = resolve(cfg)?;
    let (rate_v, rate_vr) = base.rates()?;
    let gammas = gammas_of(cfg, None)?;
    let eps = eps_of(cfg)?;
    let (kind, a) = estimator_of(cfg);
    let schedules = alphas_of(cfg)?
        .into_iter()
        .map(|alpha| schedule_one(&base, &gammas, eps, alpha, kind, a, None).map(|(c, _)| c))
        .collect::<Res<Vec<_>>>()?;
    let rows: Vec<Row> = schedules.iter().map(row_of).collect();
    if let Some(path) = out {
        write_rows(path, &rows)?;
    }
    Ok(Output::ok(&ScheduleReport {
        version: driftbound::VERSION,
        input: cfg,
        rho: rate_v.rho,
        rho_r: rate_vr.rho,
        params_echo: base.echo(),
        small_set: base.small_set,
        schedules,
        rows,
    }))
}

#[derive(Debug, Clone, Serialize)]
struct OptimizeReport<'a> {
    version: &'static str,
    input: &'a Config,
    rho: f64,
    rho_r: f64,
    params_echo: ParamsEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    small_set: Option<SmallSetSummary>,
    grid_points: usize,
    best: Certified1,
    row: Row,
}

pub fn optimize(cfg: &Config, out: Option<&Path>) -> Res<Output> {
    let base = resolve(cfg)?;
    let (rate_v, rate_vr) = base.rates()?;
    let gammas = gammas_of(cfg, Some(Choice::Optimize))?;
    let (kind, a) = estimator_of(cfg);
    let alpha = require(&cfg.alpha, "alpha")?;
    let (best, probes) = schedule_one(&base, &gammas, eps_of(cfg)?, alpha, kind, a, None)?;
    if let Some(path) = out {
        write_probes(path, &probes)?;
    }
    Ok(Output::ok(&OptimizeReport {
        version: driftbound::VERSION,
        input: cfg,
        rho: rate_v.rho,
        rho_r: rate_vr.rho,
        params_echo: base.echo(),
        small_set: base.small_set,
        grid_points: probes.len(),
        row: row_of(&best),
        best,
    }))
}

#[derive(Debug, Clone, Serialize)]
struct MseCheck {
    estimate: MseEstimate,
    bound: f64,
    within_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
struct VerifyReport<'a> {
    version: &'static str,
    input: &'a Config,
    seed: u64,
    theta: f64,
    d: f64,
    x0: f64,
    exact_i: Option<f64>,
    t: u64,
    n: u64,
    m: u64,
    eps: Real,
    reps: u64,
    target_coverage: f64,
    coverage: CoverageReport,
    coverage_consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mse: Option<MseCheck>,
}

pub fn verify(cfg: &Config, seed: u64) -> Res<Output> {
    let theta = require(&cfg.theta, "theta")?;
    let Choice::Fixed(d) = require(&cfg.d, "d")? else {
        return Err(CliError::Config("verify needs a numeric `d`".into()));
    };
    let x0 = cfg.x0.unwrap_or(0.0);
    let mut model = ContractingNormals::new(theta, d)?.with_start(x0);
    if let Some(v) = cfg.exact_i {
        model = model.with_exact_i(Some(v));
    }
    let t = require(&cfg.t, "t")?;
    let n = require(&cfg.n, "n")?;
    let m = cfg.m.unwrap_or(1);
    let reps = require(&cfg.reps, "reps")?;
    let eps = eps_of(cfg)?;
    let alpha = require(&cfg.alpha, "alpha")?;
    if reps == 0 {
        return Err(CliError::Config("`reps` must be positive".into()));
    }
    let coverage = coverage_experiment(&model, t, n, m, eps, reps, seed)?;
    let target = 1.0 - alpha;
    let consistent = coverage.consistent_with(target);

    let mse = match (cfg.gamma, cfg.gamma_r, m) {
        (Some(Choice::Fixed(g)), Some(Choice::Fixed(gr)), 1) => {
            let base = resolve(cfg)?;
            let (rate_v, rate_vr) = base.rates()?;
            let setup = EstimationSetup {
                norms: base.norms()?,
                cert_v: rate_v.certificate(g)?,
                cert_vr: rate_vr.certificate(gr)?,
                r: base.r,
                start: require(&base.start, "start")?,
            };
            let bound = setup.mse_bound(t, n)?;
            let estimate = empirical_mse(&model, t, n, reps, seed)?;
            Some(MseCheck { estimate, bound, within_bound: estimate.mse <= bound })
        }
        _ => None,
    };

    let mut violations = Vec::new();
    if !consistent {
        violations.push(format!(
            "coverage {} (Wilson 95% [{}, {}]) is below 1 - alpha = {target} by more than 3 half-widths",
            coverage.coverage, coverage.wilson.lower, coverage.wilson.upper
        ));
    }
    if let Some(c) = mse.as_ref().filter(|c| !c.within_bound) {
        violations.push(format!("empirical MSE {} exceeds the bound {}", c.estimate.mse, c.bound));
    }
    let report = VerifyReport {
        version: driftbound::VERSION,
        input: cfg,
        seed,
        theta,
        d,
        x0,
        exact_i: model.exact_i(),
        t,
        n,
        m,
        eps: Real(eps),
        reps,
        target_coverage: target,
        coverage,
        coverage_consistent: consistent,
        mse,
    };
    Ok(Output {
        json: to_json(&report),
        violation: (!violations.is_empty()).then(|| violations.join("; ")),
    })
}

/// Defaults of the reference schedule table: `theta = .5`, `C = [-1.6226, 1.6226]`, `eps = .1`,
/// `gamma = .915`, `gamma_r = .971`, `X_0 = 0`.
pub fn table1_preset() -> Config {
    Config {
        theta: Some(0.5),
        d: Some(Choice::Fixed(1.6226)),
        x0: Some(0.0),
        class: Some(ChainClass::ReversiblePositive),
        gamma: Some(Choice::Fixed(0.915)),
        gamma_r: Some(Choice::Fixed(0.971)),
        r: Some(2.0),
        eps: Some(Real(0.1)),
        alphas: Some(vec![0.1, 1e-3, 1e-5]),
        a: Some(Choice::Fixed(DEFAULT_MEDIAN_A)),
        ..Config::default()
    }
}

#[derive(Debug, Clone, Serialize)]
struct Table1Report<'a> {
    version: &'static str,
    input: &'a Config,
    rho: f64,
    rho_r: f64,
    params_echo: ParamsEcho,
    schedules: Vec<Certified1>,
    rows: Vec<Row>,
}

pub fn table1(cfg: &Config, out: Option<&Path>) -> Res<Output> {
    if cfg.norms.is_some() || cfg.estimator.is_some() {
        return Err(CliError::Config("table1 fixes `norms` and `estimator` per row; remove them".into()));
    }
    let gammas = gammas_of(cfg, None)?;
    let eps = eps_of(cfg)?;
    let alphas = alphas_of(cfg)?;
    let a = cfg.a.unwrap_or(Choice::Fixed(DEFAULT_MEDIAN_A));
    let bases = [(1u8, NormsSetting::LemmaBounds), (2, NormsSetting::Exact)]
        .into_iter()
        .map(|(setting, norms)| {
            let mut c = cfg.clone();
            c.norms = Some(NormsSpec::Setting(norms));
            resolve(&c).map(|b| (setting, b))
        })
        .collect::<Res<Vec<_>>>()?;
    let mut schedules = Vec::new();
    for &alpha in &alphas {
        for kind in [EstimatorKind::OneWalk, EstimatorKind::Ma] {
            for (setting, base) in &bases {
                schedules.push(schedule_one(base, &gammas, eps, alpha, kind, a, Some(*setting))?.0);
            }
        }
    }
    let echo = bases[0].1.echo();
    let rho = ErgodicityRate::new(&echo.v, echo.class)?.rho;
    let rho_r = ErgodicityRate::new(&echo.v_r, echo.class)?.rho;
    let rows: Vec<Row> = schedules.iter().map(row_of).collect();
    if let Some(path) = out {
        write_rows(path, &rows)?;
    }
    Ok(Output::ok(&Table1Report {
        version: driftbound::VERSION,
        input: cfg,
        rho,
        rho_r,
        params_echo: echo,
        schedules,
        rows,
    }))
}
