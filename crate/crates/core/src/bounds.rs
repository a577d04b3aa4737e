//! Mean-square-error bounds for one-walk MCMC averages and the
//! fixed-width confidence schedules that follow from them through
//! Chebyshev's inequality and the median trick.

use serde::{Deserialize, Serialize};

use crate::baxendale::ErgodicityCertificate;
use crate::drift::{FunctionNorms, StartSpec};
use crate::error::{domain, Result};

/// Per-run confidence commonly used with the median-of-averages estimator.
pub const DEFAULT_MEDIAN_A: f64 = 0.11969;

/// Everything a bound needs besides the run lengths and `(eps, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationSetup {
    pub norms: FunctionNorms,
    /// Certificate for `V`: supplies `M` and `gamma`.
    pub cert_v: ErgodicityCertificate,
    /// Certificate for `V^(1/r)`: supplies `M_r` and `gamma_r`.
    pub cert_vr: ErgodicityCertificate,
    pub r: f64,
    pub start: StartSpec,
}

/// The three scheduling intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTerms {
    /// Stationary variance term.
    pub b: f64,
    /// Initialisation penalty without burn-in.
    pub c: f64,
    /// Initialisation penalty before burn-in discounting (`c(t) = c~ gamma^t`);
    /// zero unless the start is deterministic.
    pub c_tilde: f64,
}

/// Intermediate values behind a schedule, kept for auditing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleAudit {
    pub b: f64,
    pub c: f64,
    pub c_tilde: f64,
    /// Initialisation penalty actually used at the chosen `t`.
    pub c_t: f64,
    pub gamma: f64,
    pub m_const: f64,
    pub gamma_r: f64,
    pub m_r: f64,
    /// Failure probability each single run is scheduled for.
    pub run_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Burn-in steps.
    pub t: u64,
    /// Averaged steps per run.
    pub n: u64,
    /// Number of independent runs (odd).
    pub m: u64,
    /// `m (t + n)`.
    pub total_cost: u64,
    pub audit: ScheduleAudit,
}

impl EstimationSetup {
    pub fn validate(&self) -> Result<()> {
        self.norms.validate()?;
        self.start.validate(self.norms.b_v)?;
        let p = self.norms.p;
        let lo = p / (p - 1.0);
        if !(self.r >= lo && self.r <= p) {
            return domain(format!("r must lie in [p/(p-1), p] = [{lo}, {p}], got {}", self.r));
        }
        for (name, c) in [("V", &self.cert_v), ("V^(1/r)", &self.cert_vr)] {
            if !(c.gamma > c.rho && c.gamma < 1.0) {
                return domain(format!("certificate for {name}: gamma must exceed rho and be < 1"));
            }
            if !(c.m_const > 0.0 && c.m_const.is_finite()) {
                return domain(format!("certificate for {name}: M must be finite and positive"));
            }
        }
        Ok(())
    }

    /// `1 + 2 M_r gamma_r / (1 - gamma_r)`.
    pub fn autocorrelation_factor(&self) -> f64 {
        let g = self.cert_vr.gamma;
        1.0 + 2.0 * self.cert_vr.m_const * g / (1.0 - g)
    }

    /// Upper bound on `E[(I_hat_{t,n} - I)^2]`.
    pub fn mse_bound(&self, t: u64, n: u64) -> Result<f64> {
        self.validate()?;
        if n == 0 {
            return domain("n must be at least 1");
        }
        let nf = n as f64;
        let m = self.cert_v.m_const;
        let g = self.cert_v.gamma;
        let init = match self.start {
            StartSpec::Stationary => 0.0,
            StartSpec::Deterministic { v_at_x } if t == 0 => m * v_at_x,
            StartSpec::Deterministic { v_at_x } => m * m * g.powf(t as f64) * v_at_x,
            StartSpec::GeneralInit { min_bound } if t == 0 => m * min_bound,
            // After t steps the V-distance to pi is at most min_bound M gamma^t.
            StartSpec::GeneralInit { min_bound } => m * m * g.powf(t as f64) * min_bound,
        };
        let second = self.norms.pi_v + init / (nf * (1.0 - g));
        Ok(self.norms.fc_norm_2p / nf * self.autocorrelation_factor() * second)
    }

    /// Bound on the asymptotic variance `lim n E_pi[(I_hat_{0,n} - I)^2]`.
    pub fn asym_var_bound(&self) -> Result<f64> {
        self.validate()?;
        Ok(asym_var_bound(&self.norms, &self.cert_vr))
    }

    pub fn terms(&self, eps: f64, alpha: f64) -> Result<ScheduleTerms> {
        self.validate()?;
        check_eps_alpha(eps, alpha)?;
        let scale = self.norms.fc_norm_2p / (eps * eps * alpha) * self.autocorrelation_factor();
        let m = self.cert_v.m_const;
        let one_minus_g = 1.0 - self.cert_v.gamma;
        let b = self.norms.pi_v * scale;
        let (c, c_tilde) = match self.start {
            StartSpec::Stationary => (0.0, 0.0),
            StartSpec::Deterministic { v_at_x } => {
                (m * v_at_x * scale / one_minus_g, m * m * v_at_x * scale / one_minus_g)
            }
            StartSpec::GeneralInit { min_bound } => (m * min_bound * scale / one_minus_g, 0.0),
        };
        Ok(ScheduleTerms { b, c, c_tilde })
    }

    /// Minimal-cost `(t, n)` for a single walk with
    /// `P(|I_hat_{t,n} - I| <= eps) >= 1 - alpha`.
    pub fn one_walk(&self, eps: f64, alpha: f64) -> Result<Schedule> {
        let terms = self.terms(eps, alpha)?;
        let ScheduleTerms { b, c, c_tilde } = terms;
        let gamma = self.cert_v.gamma;
        let penalty = |t: u64| match self.start {
            StartSpec::Deterministic { .. } if t > 0 => c_tilde * gamma.powf(t as f64),
            _ => c,
        };
        let runs = |t: u64| -> Result<u64> { Ok(to_count(n_of_c(b, penalty(t)), "n")?.max(1)) };
        let mut t = match self.start {
            StartSpec::Deterministic { .. } => burn_in(b, c_tilde, gamma)?,
            _ => 0,
        };
        let mut n = runs(t)?;
        // The first t with n'(t) >= -1 can overshoot the integer minimiser
        // of t + n(t) by one step.
        if t > 0 {
            let n_prev = runs(t - 1)?;
            if t - 1 + n_prev < t + n {
                t -= 1;
                n = n_prev;
            }
        }
        let c_t = penalty(t);
        let audit = ScheduleAudit {
            b,
            c,
            c_tilde,
            c_t,
            gamma,
            m_const: self.cert_v.m_const,
            gamma_r: self.cert_vr.gamma,
            m_r: self.cert_vr.m_const,
            run_alpha: alpha,
        };
        let total_cost = t.checked_add(n).ok_or_else(|| overflow("t + n"))?;
        Ok(Schedule { t, n, m: 1, total_cost, audit })
    }

    /// Median-of-averages schedule: each of `m` runs gets the one-walk
    /// schedule at failure probability `a`, and `m` is set by the median
    /// lemma so that the median meets `alpha`.
    pub fn median_of_averages(&self, eps: f64, alpha: f64, a: f64) -> Result<Schedule> {
        let m = median_runs(a, alpha)?;
        let run = self.one_walk(eps, a)?;
        let total_cost = m.checked_mul(run.total_cost).ok_or_else(|| overflow("m (t + n)"))?;
        Ok(Schedule { m, total_cost, ..run })
    }

    /// `n(t) = (b + sqrt(b^2 + 4 c~ gamma^t)) / 2` as a real number.
    pub fn n_of_t(&self, eps: f64, alpha: f64, t: f64) -> Result<f64> {
        let ScheduleTerms { b, c_tilde, .. } = self.terms(eps, alpha)?;
        Ok(n_of_c(b, c_tilde * self.cert_v.gamma.powf(t)))
    }
}

fn overflow(what: &str) -> crate::error::Error {
    crate::error::Error::Domain(format!("{what} overflows a 64-bit count"))
}

fn check_eps_alpha(eps: f64, alpha: f64) -> Result<()> {
    if !(eps > 0.0) {
        return domain(format!("eps must be positive, got {eps}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

fn n_of_c(b: f64, c: f64) -> f64 {
    (b + (b * b + 4.0 * c).sqrt()) / 2.0
}

fn to_count(x: f64, what: &str) -> Result<u64> {
    let c = x.ceil();
    // 2^63 keeps later sums and products checkable.
    if !(c.is_finite() && c < (1u64 << 63) as f64) {
        return Err(overflow(what));
    }
    Ok(c.max(0.0) as u64)
}

/// Smallest integer `t >= 0` with `n'(t) >= -1`, i.e. the ceiling of
/// `log_gamma((2 + sqrt(4 + b^2 ln^2 gamma)) / (c~ ln^2 gamma))`, floored at 0.
pub fn burn_in(b: f64, c_tilde: f64, gamma: f64) -> Result<u64> {
    if !(c_tilde > 0.0) {
        return Ok(0);
    }
    let l = gamma.ln();
    let l2 = l * l;
    let t = ((2.0 + (4.0 + b * b * l2).sqrt()) / (c_tilde * l2)).ln() / l;
    if t <= 0.0 {
        return Ok(0);
    }
    to_count(t, "t")
}

/// `pi V ||f_c^p||_V^(2/p) (1 + 2 M_r gamma_r / (1 - gamma_r))`.
pub fn asym_var_bound(norms: &FunctionNorms, cert_vr: &ErgodicityCertificate) -> f64 {
    let g = cert_vr.gamma;
    norms.pi_v * norms.fc_norm_2p * (1.0 + 2.0 * cert_vr.m_const * g / (1.0 - g))
}

/// Smallest odd `m >= max(1, 2 ln(2 alpha) / ln(4 a (1 - a)))`.
pub fn median_runs(a: f64, alpha: f64) -> Result<u64> {
    if !(a > 0.0 && a < 0.5) {
        return domain(format!("per-run failure probability a must lie in (0, 1/2), got {a}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let bound = 2.0 * (2.0 * alpha).ln() / (4.0 * a * (1.0 - a)).ln();
    let m = to_count(bound.max(1.0), "m")?;
    Ok(if m % 2 == 0 { m + 1 } else { m })
}
