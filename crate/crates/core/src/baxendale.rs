//! Explicit V-uniform ergodicity constants.
//!
//! Given drift parameters, computes a rate `rho < 1` and, for any
//! `gamma in (rho, 1)`, a constant `M(gamma)` such that
//! `|||P^n - pi|||_V <= M gamma^n`. Six regimes are covered: atomic
//! (`beta_tilde = 1`) or nonatomic, crossed with general, reversible and
//! reversible-positive kernels.
//!
//! The `M` formulas are written out term by term in the order they are
//! usually stated so they can be checked against a reference by eye.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::drift::{DriftParams, NuOnC};
use crate::error::{domain, Error, Result};
use crate::numeric::{bisect_increasing, golden_section_min};

/// Relative residual accepted by the scalar root solvers.
pub const ROOT_REL_TOL: f64 = 1e-12;

/// Number of points in the coarse scan preceding the `R~` golden search.
const ARGMAX_SCAN: usize = 64;
/// Width at which the `R~` golden search stops.
const ARGMAX_TOL: f64 = 1e-9;
/// The `R~` search never goes closer than this relative gap to `R_0`,
/// where `L` blows up.
const R0_CAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainClass {
    General,
    Reversible,
    ReversiblePositive,
}

impl std::fmt::Display for ChainClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChainClass::General => "general",
            ChainClass::Reversible => "reversible",
            ChainClass::ReversiblePositive => "reversible_positive",
        })
    }
}

/// `rho`, the chosen `gamma`, and `M(gamma)` for one set of drift parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityCertificate {
    pub rho: f64,
    pub gamma: f64,
    pub m_const: f64,
    pub class: ChainClass,
    pub params: DriftParams,
}

/// The nonatomic exponents `(alpha_1, alpha_2)`.
pub fn alpha_exponents(params: &DriftParams) -> Result<(f64, f64)> {
    params.validate()?;
    if params.is_atomic() {
        return domain("alpha exponents are undefined in the atomic case (beta_tilde = 1)");
    }
    let DriftParams { beta_tilde, lambda, k_const, beta, nu_on_c } = *params;
    let log_inv_lambda = -lambda.ln();
    let alpha1 = 1.0 + ((k_const - beta_tilde) / (1.0 - beta)).ln() / log_inv_lambda;
    if !(alpha1 > 0.0) {
        return domain(format!("alpha_1 = {alpha1} is not positive; (K - beta_tilde)/(1 - beta) must exceed lambda"));
    }
    let alpha2 = match nu_on_c {
        NuOnC::ConcentratedOnC => 1.0,
        NuOnC::VIntegralBound { k_tilde } => 1.0 + k_tilde.ln() / log_inv_lambda,
        NuOnC::Unknown => 1.0 + (k_const / beta_tilde).ln() / log_inv_lambda,
    };
    Ok((alpha1, alpha2))
}

/// `R_0 = min{1/lambda, (1 - beta_tilde)^(-1/alpha_1)}`.
pub fn r0_bound(params: &DriftParams) -> Result<f64> {
    let (alpha1, _) = alpha_exponents(params)?;
    Ok((1.0 / params.lambda).min((1.0 - params.beta_tilde).powf(-1.0 / alpha1)))
}

/// `L(R) = beta_tilde R^alpha_2 / (1 - (1 - beta_tilde) R^alpha_1)` on `(1, R_0]`.
/// Returns `f64::INFINITY` where the denominator vanishes.
pub fn l_of_r(params: &DriftParams, r: f64) -> Result<f64> {
    let (alpha1, alpha2) = alpha_exponents(params)?;
    let r0 = (1.0 / params.lambda).min((1.0 - params.beta_tilde).powf(-1.0 / alpha1));
    if !(r > 1.0 && r <= r0) {
        return domain(format!("R must lie in (1, R_0 = {r0}], got {r}"));
    }
    Ok(l_formula(params.beta_tilde, alpha1, alpha2, r))
}

fn l_formula(beta_tilde: f64, alpha1: f64, alpha2: f64, r: f64) -> f64 {
    let den = 1.0 - (1.0 - beta_tilde) * r.powf(alpha1);
    if den <= 0.0 {
        f64::INFINITY
    } else {
        beta_tilde * r.powf(alpha2) / den
    }
}

fn check_r1_args(beta: f64, big_r: f64, big_l: f64) -> Result<()> {
    if !(beta > 0.0) {
        return domain(format!("beta must be positive, got {beta}"));
    }
    if !(big_r > 1.0 && big_r.is_finite()) {
        return domain(format!("R must be finite and > 1, got {big_r}"));
    }
    if !(big_l > 1.0 && big_l.is_finite()) {
        return domain(format!("L must be finite and > 1, got {big_l}"));
    }
    Ok(())
}

/// Left-hand side `(r - 1) / (r log^2(R/r))` of the `R_1` equation.
pub fn r1_lhs(r: f64, big_r: f64) -> f64 {
    let log = (big_r / r).ln();
    (r - 1.0) / (r * log * log)
}

/// Right-hand side `e^2 beta (R - 1) / (8 (L - 1))` of the `R_1` equation.
pub fn r1_rhs(beta: f64, big_r: f64, big_l: f64) -> f64 {
    E * E * beta * (big_r - 1.0) / (8.0 * (big_l - 1.0))
}

/// `R_1(beta, R, L)`: the unique `r in (1, R)` with
/// `(r - 1) / (r log^2(R/r)) = e^2 beta (R - 1) / (8 (L - 1))`.
///
/// The left side increases from 0 at `r = 1` to infinity at `r = R`, so
/// the root is bracketed and found by bisection.
pub fn solve_r1(beta: f64, big_r: f64, big_l: f64) -> Result<f64> {
    check_r1_args(beta, big_r, big_l)?;
    let rhs = r1_rhs(beta, big_r, big_l);
    bisect_increasing(
        |r| r1_lhs(r, big_r) - rhs,
        1.0,
        big_r,
        |_, res| res.abs() <= ROOT_REL_TOL * rhs,
    )
    .map_err(|e| match e {
        Error::Convergence(m) => Error::Convergence(format!("R_1 solve: {m}")),
        other => other,
    })
}

/// `K_1(r, beta, R, L)` for `1 < r < R_1(beta, R, L)`.
pub fn k1(r: f64, beta: f64, big_r: f64, big_l: f64) -> Result<f64> {
    check_r1_args(beta, big_r, big_l)?;
    if !(r > 1.0 && r < big_r) {
        return domain(format!("K_1 needs 1 < r < R, got r={r}, R={big_r}"));
    }
    let n = (big_l - 1.0) / (big_r - 1.0);
    let log = (big_r / r).ln();
    let q = 8.0 * n * (-2.0f64).exp() * (r - 1.0) / r / (log * log);
    let gap = beta - q;
    if !(gap > 0.0) {
        return domain(format!("K_1 denominator is not positive at r={r}: r is at or beyond R_1"));
    }
    let num = 2.0 * beta + 2.0 * n.ln() / log - q;
    Ok(num / ((r - 1.0) * gap))
}

/// Precomputed rate information for one `(params, class)` pair; evaluating
/// `M(gamma)` from it is closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicityRate {
    pub params: DriftParams,
    pub class: ChainClass,
    pub rho: f64,
    shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Atomic,
    Nonatomic {
        alpha1: f64,
        alpha2: f64,
        /// `(R~, L(R~))` for the general class.
        r_tilde: Option<(f64, f64)>,
    },
}

impl ErgodicityRate {
    pub fn new(params: &DriftParams, class: ChainClass) -> Result<Self> {
        params.validate()?;
        let p = *params;
        if p.is_atomic() {
            let rho = match class {
                ChainClass::General => 1.0 / solve_r1(p.beta, 1.0 / p.lambda, p.k_const / p.lambda)?,
                ChainClass::Reversible => 1.0 / r2_atomic(&p)?,
                ChainClass::ReversiblePositive => p.lambda,
            };
            return Ok(Self { params: p, class, rho, shape: Shape::Atomic });
        }
        let (alpha1, alpha2) = alpha_exponents(&p)?;
        let r0 = r0_bound(&p)?;
        let (rho, r_tilde) = match class {
            ChainClass::General => {
                let (rt, lt, r1) = argmax_r1(&p, alpha1, alpha2, r0)?;
                (1.0 / r1, Some((rt, lt)))
            }
            ChainClass::Reversible => (1.0 / r2_nonatomic(&p, alpha1, alpha2, r0)?, None),
            ChainClass::ReversiblePositive => (1.0 / r0, None),
        };
        Ok(Self { params: p, class, rho, shape: Shape::Nonatomic { alpha1, alpha2, r_tilde } })
    }

    /// `R~` and `L(R~)` (nonatomic general class only).
    pub fn r_tilde(&self) -> Option<(f64, f64)> {
        match self.shape {
            Shape::Nonatomic { r_tilde, .. } => r_tilde,
            Shape::Atomic => None,
        }
    }

    /// `M(gamma)` for `gamma in (rho, 1)`.
    pub fn m_const(&self, gamma: f64) -> Result<f64> {
        if !(gamma > self.rho) {
            return domain(format!("gamma must exceed rho: gamma={gamma}, rho={}", self.rho));
        }
        if !(gamma < 1.0) {
            return domain(format!("gamma must be < 1, got {gamma}"));
        }
        let m = match self.shape {
            Shape::Atomic => self.m_atomic(gamma)?,
            Shape::Nonatomic { alpha1, alpha2, r_tilde } => self.m_nonatomic(gamma, alpha1, alpha2, r_tilde)?,
        };
        if !(m.is_finite() && m > 0.0) {
            return domain(format!("M({gamma}) evaluated to {m}"));
        }
        Ok(m)
    }

    pub fn certificate(&self, gamma: f64) -> Result<ErgodicityCertificate> {
        Ok(ErgodicityCertificate {
            rho: self.rho,
            gamma,
            m_const: self.m_const(gamma)?,
            class: self.class,
            params: self.params,
        })
    }

    fn m_atomic(&self, g: f64) -> Result<f64> {
        let DriftParams { lambda: l, k_const: k, beta, .. } = self.params;
        let coupling = match self.class {
            ChainClass::General => k1(1.0 / g, beta, 1.0 / l, k / l)?,
            ChainClass::Reversible | ChainClass::ReversiblePositive => 1.0 + 1.0 / (g - self.rho),
        };
        let t1 = l.max(k - l / g) / (g - l);
        let t2 = k * (k - l / g) / (g * (g - l)) * coupling;
        let t3 = (k - l / g) * l.max(k - l) / ((g - l) * (1.0 - l));
        let t4 = l * (k - 1.0) / ((g - l) * (1.0 - l));
        Ok(t1 + t2 + t3 + t4)
    }

    fn m_nonatomic(&self, g: f64, a1: f64, a2: f64, r_tilde: Option<(f64, f64)>) -> Result<f64> {
        let DriftParams { beta_tilde: bt, lambda: l, k_const: k, beta, .. } = self.params;
        let coupling = match (self.class, r_tilde) {
            (ChainClass::General, Some((rt, lt))) => k1(1.0 / g, beta, rt, lt)?,
            (ChainClass::General, None) => unreachable!("general nonatomic rate always carries R~"),
            _ => 1.0 + bt.sqrt() / (g - self.rho),
        };
        let g_a1 = g.powf(-a1);
        let g_a2 = g.powf(-a2);
        let d = 1.0 - (1.0 - bt) * g_a1;
        if !(d > 0.0) {
            return domain(format!("1 - (1 - beta_tilde) gamma^(-alpha_1) is not positive at gamma={g}"));
        }
        let t1 = g.powf(-a2 - 1.0) * (k * g - l) / ((g - l) * d * d)
            * (bt * l.max(k - l) / (1.0 - l) + (1.0 - bt) * (g_a1 - 1.0) / (1.0 / g - 1.0));
        let t2 = l.max(k - l / g) / (g - l);
        let t3 = bt * g.powf(-a2 - 2.0) * k * (k * g - l) / ((g - l) * d * d) * coupling;
        let t4 = g_a2 * l * (k - 1.0) / ((1.0 - l) * (g - l) * d);
        let t5 = k * (k * g - l - bt * (g - l)) / (g * g * (g - l) * d);
        let t6 = (k - l - bt * (1.0 - l)) / ((1.0 - l) * (1.0 - g)) * ((g_a2 - 1.0) + (1.0 - bt) * (g_a1 - 1.0) / bt);
        Ok(t1 + t2 + t3 + t4 + t5 + t6)
    }
}

/// Atomic reversible `R_2`: `min{1/lambda, r_s}` where
/// `1 + 2 beta r = r^(1 + log K / log(1/lambda))`, or `1/lambda` when
/// `K <= lambda + 2 beta`.
fn r2_atomic(p: &DriftParams) -> Result<f64> {
    let inv_l = 1.0 / p.lambda;
    if p.k_const <= p.lambda + 2.0 * p.beta {
        return Ok(inv_l);
    }
    // At r = 1/lambda the residual equals (K - lambda - 2 beta)/lambda > 0,
    // so r_s < 1/lambda and the minimum is r_s itself.
    let expo = 1.0 + p.k_const.ln() / -p.lambda.ln();
    let beta = p.beta;
    bisect_increasing(
        |r| r.powf(expo) - 1.0 - 2.0 * beta * r,
        1.0,
        inv_l,
        |r, res| res.abs() <= ROOT_REL_TOL * (1.0 + 2.0 * beta * r),
    )
}

/// Nonatomic reversible `R_2`: root of `1 + 2 beta r = L(r)` if
/// `L(R_0) > 1 + 2 beta R_0`, else `R_0`.
fn r2_nonatomic(p: &DriftParams, a1: f64, a2: f64, r0: f64) -> Result<f64> {
    let beta = p.beta;
    if l_formula(p.beta_tilde, a1, a2, r0) <= 1.0 + 2.0 * beta * r0 {
        return Ok(r0);
    }
    bisect_increasing(
        |r| l_formula(p.beta_tilde, a1, a2, r) - 1.0 - 2.0 * beta * r,
        1.0,
        r0,
        |r, res| res.abs() <= ROOT_REL_TOL * (1.0 + 2.0 * beta * r),
    )
}

/// `argmax_{1 < R < R_0} R_1(beta, R, L(R))`: a coarse scan, then golden
/// section on the bracket around the best scan point.
fn argmax_r1(p: &DriftParams, a1: f64, a2: f64, r0: f64) -> Result<(f64, f64, f64)> {
    let hi = 1.0 + (r0 - 1.0) * (1.0 - R0_CAP);
    let width = hi - 1.0;
    let eval = |r: f64| -> Option<f64> {
        let l = l_formula(p.beta_tilde, a1, a2, r);
        if !l.is_finite() || l <= 1.0 {
            return None;
        }
        solve_r1(p.beta, r, l).ok()
    };
    let grid: Vec<f64> = (1..=ARGMAX_SCAN).map(|i| 1.0 + width * i as f64 / ARGMAX_SCAN as f64).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, &r) in grid.iter().enumerate() {
        if let Some(v) = eval(r) {
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((i, v));
            }
        }
    }
    let (bi, _) = best.ok_or_else(|| Error::Convergence("no feasible R in (1, R_0) for R_1 maximisation".into()))?;
    let lo = if bi == 0 { 1.0 + width * 1e-12 } else { grid[bi - 1] };
    let up = if bi + 1 < grid.len() { grid[bi + 1] } else { hi };
    let (rt, neg) = golden_section_min(|r| eval(r).map_or(f64::INFINITY, |v| -v), lo, up, ARGMAX_TOL);
    if !neg.is_finite() {
        return Err(Error::Convergence("R_1 maximisation failed to find a feasible point".into()));
    }
    Ok((rt, l_formula(p.beta_tilde, a1, a2, rt), -neg))
}

/// The guaranteed rate `rho` for the given regime.
pub fn rho(params: &DriftParams, class: ChainClass) -> Result<f64> {
    Ok(ErgodicityRate::new(params, class)?.rho)
}

/// `M(gamma)` for the given regime.
pub fn big_m(params: &DriftParams, gamma: f64, class: ChainClass) -> Result<f64> {
    ErgodicityRate::new(params, class)?.m_const(gamma)
}

pub fn certificate(params: &DriftParams, gamma: f64, class: ChainClass) -> Result<ErgodicityCertificate> {
    ErgodicityRate::new(params, class)?.certificate(gamma)
}
