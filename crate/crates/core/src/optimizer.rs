//! Cost minimisation over the constants left free by the bounds: the
//! rates `gamma` and `gamma_r`, the per-run confidence `a` of the
//! median-of-averages estimator, and the small-set radius `d` of the
//! contracting-normals model.
//!
//! All searches are fixed grids followed by local refinement, so results
//! are deterministic. Every probe is recorded and the returned point is the
//! best probe seen (ties broken towards the lexicographically smallest
//! coordinates).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baxendale::{ChainClass, ErgodicityRate};
use crate::bounds::{median_runs, EstimationSetup, Schedule};
use crate::drift::{DriftParams, FunctionNorms, StartSpec};
use crate::error::{domain, Error, Result};
use crate::models::{cn_drift_params, cn_norms, NormsSetting};
use crate::numeric::golden_section_min;

/// Points per coordinate in the coarse `gamma` grid.
pub const GAMMA_GRID: usize = 400;
/// Distance kept from `rho` and from 1.
pub const GAMMA_MARGIN: f64 = 1e-6;
/// Resolution multiplier of the refinement pass.
pub const REFINE_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    OneWalk,
    MedianOfAverages { a: f64 },
}

/// A cost-minimisation problem for fixed drift parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostProblem {
    pub params_v: DriftParams,
    pub params_vr: DriftParams,
    pub class: ChainClass,
    pub norms: FunctionNorms,
    pub r: f64,
    pub start: StartSpec,
    pub eps: f64,
    pub alpha: f64,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaProbe {
    pub gamma: f64,
    pub gamma_r: f64,
    /// Total cost, `+inf` when no schedule exists at this point.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSearch {
    pub gamma: f64,
    pub gamma_r: f64,
    pub rho: f64,
    pub rho_r: f64,
    pub setup: EstimationSetup,
    pub schedule: Schedule,
    pub probes: Vec<GammaProbe>,
}

fn schedule_for(setup: &EstimationSetup, eps: f64, alpha: f64, est: Estimator) -> Result<Schedule> {
    match est {
        Estimator::OneWalk => setup.one_walk(eps, alpha),
        Estimator::MedianOfAverages { a } => setup.median_of_averages(eps, alpha, a),
    }
}

/// Points `rho + exp(u)` with `u` evenly spaced between `ln(margin)` and
/// `ln(1 - margin - rho)`.
fn log_grid(rho: f64, points: usize) -> Vec<f64> {
    let lo = GAMMA_MARGIN.ln();
    let hi = (1.0 - GAMMA_MARGIN - rho).ln();
    (0..points)
        .map(|i| rho + (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

fn lin_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

fn better(a: &GammaProbe, b: &GammaProbe) -> bool {
    (a.cost, a.gamma, a.gamma_r) < (b.cost, b.gamma, b.gamma_r)
}

impl CostProblem {
    fn setup(&self, rate_v: &ErgodicityRate, rate_vr: &ErgodicityRate, gamma: f64, gamma_r: f64) -> Result<EstimationSetup> {
        Ok(EstimationSetup {
            norms: self.norms,
            cert_v: rate_v.certificate(gamma)?,
            cert_vr: rate_vr.certificate(gamma_r)?,
            r: self.r,
            start: self.start,
        })
    }

    /// Schedule at a given `(gamma, gamma_r)`.
    pub fn schedule_at(&self, gamma: f64, gamma_r: f64) -> Result<Schedule> {
        let rate_v = ErgodicityRate::new(&self.params_v, self.class)?;
        let rate_vr = ErgodicityRate::new(&self.params_vr, self.class)?;
        let setup = self.setup(&rate_v, &rate_vr, gamma, gamma_r)?;
        schedule_for(&setup, self.eps, self.alpha, self.estimator)
    }

    fn probe_grid(&self, rate_v: &ErgodicityRate, rate_vr: &ErgodicityRate, gs: &[f64], grs: &[f64]) -> Vec<GammaProbe> {
        let certs_v: Vec<_> = gs.par_iter().map(|&g| rate_v.certificate(g).ok()).collect();
        let certs_vr: Vec<_> = grs.par_iter().map(|&g| rate_vr.certificate(g).ok()).collect();
        gs.par_iter()
            .zip(certs_v.par_iter())
            .flat_map_iter(|(&gamma, cv)| {
                grs.iter().zip(certs_vr.iter()).map(move |(&gamma_r, cvr)| {
                    let cost = match (cv, cvr) {
                        (Some(cert_v), Some(cert_vr)) => {
                            let setup = EstimationSetup {
                                norms: self.norms,
                                cert_v: *cert_v,
                                cert_vr: *cert_vr,
                                r: self.r,
                                start: self.start,
                            };
                            schedule_for(&setup, self.eps, self.alpha, self.estimator)
                                .map_or(f64::INFINITY, |s| s.total_cost as f64)
                        }
                        _ => f64::INFINITY,
                    };
                    GammaProbe { gamma, gamma_r, cost }
                })
            })
            .collect()
    }

    /// Grid search for the cost-minimising `(gamma, gamma_r)`.
    pub fn optimize_gammas(&self) -> Result<GammaSearch> {
        let rate_v = ErgodicityRate::new(&self.params_v, self.class)?;
        let rate_vr = ErgodicityRate::new(&self.params_vr, self.class)?;
        let gs = log_grid(rate_v.rho, GAMMA_GRID);
        let grs = log_grid(rate_vr.rho, GAMMA_GRID);
        let mut probes = self.probe_grid(&rate_v, &rate_vr, &gs, &grs);
        let (bi, best) = probes
            .iter()
            .enumerate()
            .reduce(|x, y| if better(y.1, x.1) { y } else { x })
            .expect("grid is nonempty");
        if !best.cost.is_finite() {
            return Err(Error::Domain("no feasible (gamma, gamma_r) on the search grid".into()));
        }
        let (i, j) = (bi / GAMMA_GRID, bi % GAMMA_GRID);
        let around = |grid: &[f64], k: usize| {
            let lo = grid[k.saturating_sub(1)];
            let hi = grid[(k + 1).min(grid.len() - 1)];
            lin_grid(lo, hi, 2 * REFINE_FACTOR + 1)
        };
        let fine = self.probe_grid(&rate_v, &rate_vr, &around(&gs, i), &around(&grs, j));
        probes.extend(fine);
        let best = *probes.iter().reduce(|x, y| if better(y, x) { y } else { x }).unwrap();
        let setup = self.setup(&rate_v, &rate_vr, best.gamma, best.gamma_r)?;
        let schedule = schedule_for(&setup, self.eps, self.alpha, self.estimator)?;
        Ok(GammaSearch {
            gamma: best.gamma,
            gamma_r: best.gamma_r,
            rho: rate_v.rho,
            rho_r: rate_vr.rho,
            setup,
            schedule,
            probes,
        })
    }
}

/// Points in the coarse scans for `a` and `d`.
const SCAN_POINTS: usize = 64;
/// Golden-section tolerance for the per-run confidence `a`.
pub const A_TOL: f64 = 1e-5;
/// Golden-section tolerance for the small-set radius `d`.
pub const D_TOL: f64 = 1e-4;
/// Upper end of the small-set radius search.
pub const D_MAX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSearch {
    pub a: f64,
    pub schedule: Schedule,
    /// `(a, cost)` for every evaluated point.
    pub probes: Vec<(f64, f64)>,
}

/// Chooses the per-run failure probability `a in (alpha, 1/2)` minimising
/// the median-of-averages cost `m(a) (t(a) + n(a))`.
pub fn optimize_a(setup: &EstimationSetup, eps: f64, alpha: f64) -> Result<ConfidenceSearch> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return domain(format!("median trick needs alpha in (0, 1/2), got {alpha}"));
    }
    let cost = |a: f64| {
        setup
            .median_of_averages(eps, alpha, a)
            .map_or(f64::INFINITY, |s| s.total_cost as f64)
    };
    let mut probes = Vec::new();
    let eval = |a: f64, probes: &mut Vec<(f64, f64)>| {
        let c = cost(a);
        probes.push((a, c));
        c
    };
    let (lo, hi) = (alpha, 0.5);
    let scan: Vec<f64> = (1..SCAN_POINTS).map(|i| lo + (hi - lo) * i as f64 / SCAN_POINTS as f64).collect();
    let costs: Vec<f64> = scan.iter().map(|&a| eval(a, &mut probes)).collect();
    let k = (0..scan.len()).fold(0, |b, i| if costs[i] < costs[b] { i } else { b });
    let blo = if k == 0 { lo + (hi - lo) * 1e-9 } else { scan[k - 1] };
    let bhi = if k + 1 < scan.len() { scan[k + 1] } else { hi - (hi - lo) * 1e-9 };
    golden_section_min(|a| eval(a, &mut probes), blo, bhi, A_TOL);
    if crate::bounds::DEFAULT_MEDIAN_A > alpha {
        eval(crate::bounds::DEFAULT_MEDIAN_A, &mut probes);
    }
    let (a, c) = probes
        .iter()
        .copied()
        .reduce(|x, y| if (y.1, y.0) < (x.1, x.0) { y } else { x })
        .unwrap();
    if !c.is_finite() {
        return Err(Error::Domain("no feasible per-run confidence found".into()));
    }
    // m(a) must be defined at the answer
    median_runs(a, alpha)?;
    let schedule = setup.median_of_averages(eps, alpha, a)?;
    Ok(ConfidenceSearch { a, schedule, probes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallSetObjective {
    /// Minimise the rate `rho_r` of the `V^(1/r)` certificate.
    MinRhoR,
    /// Minimise the optimised total simulation cost.
    MinTotalCost,
}

/// Contracting-normals small-set tuning problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallSetProblem {
    pub theta: f64,
    pub eps: f64,
    pub alpha: f64,
    pub setting: NormsSetting,
    pub class: ChainClass,
    pub r: f64,
    pub start: StartSpec,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallSetSearch {
    pub d: f64,
    pub objective_value: f64,
    /// `(d, objective)` for every evaluated point.
    pub probes: Vec<(f64, f64)>,
    /// Cost-optimal `(gamma, gamma_r)` and schedule at the chosen `d`.
    pub gammas: GammaSearch,
}

impl SmallSetProblem {
    pub fn cost_problem(&self, d: f64) -> Result<CostProblem> {
        let params_v = cn_drift_params(self.theta, d)?;
        Ok(CostProblem {
            params_v,
            params_vr: params_v.transform_r(self.r)?,
            class: self.class,
            norms: cn_norms(self.theta, d, self.setting)?,
            r: self.r,
            start: self.start,
            eps: self.eps,
            alpha: self.alpha,
            estimator: self.estimator,
        })
    }

    fn objective(&self, d: f64, which: SmallSetObjective) -> f64 {
        let Ok(cp) = self.cost_problem(d) else {
            return f64::INFINITY;
        };
        match which {
            SmallSetObjective::MinRhoR => {
                ErgodicityRate::new(&cp.params_vr, cp.class).map_or(f64::INFINITY, |r| r.rho)
            }
            SmallSetObjective::MinTotalCost => {
                cp.optimize_gammas().map_or(f64::INFINITY, |g| g.schedule.total_cost as f64)
            }
        }
    }

    /// Coarse scan over `d in (1, 10]`, then golden section around the
    /// best scan point down to a bracket of width `1e-4`.
    pub fn optimize(&self, which: SmallSetObjective) -> Result<SmallSetSearch> {
        if !(self.theta.abs() < 1.0) {
            return domain(format!("theta must lie in (-1, 1), got {}", self.theta));
        }
        let (lo, hi) = (1.0, D_MAX);
        let scan: Vec<f64> = (1..=SCAN_POINTS).map(|i| lo + (hi - lo) * i as f64 / SCAN_POINTS as f64).collect();
        let costs: Vec<f64> = scan.par_iter().map(|&d| self.objective(d, which)).collect();
        let mut probes: Vec<(f64, f64)> = scan.iter().copied().zip(costs.iter().copied()).collect();
        let k = (0..scan.len()).fold(0, |b, i| if costs[i] < costs[b] { i } else { b });
        let blo = if k == 0 { lo + 1e-9 } else { scan[k - 1] };
        let bhi = if k + 1 < scan.len() { scan[k + 1] } else { hi };
        golden_section_min(
            |d| {
                let v = self.objective(d, which);
                probes.push((d, v));
                v
            },
            blo,
            bhi,
            D_TOL,
        );
        let (d, v) = probes
            .iter()
            .copied()
            .reduce(|x, y| if (y.1, y.0) < (x.1, x.0) { y } else { x })
            .unwrap();
        if !v.is_finite() {
            return Err(Error::Domain("no feasible small-set radius found".into()));
        }
        let gammas = self.cost_problem(d)?.optimize_gammas()?;
        Ok(SmallSetSearch { d, objective_value: v, probes, gammas })
    }
}
