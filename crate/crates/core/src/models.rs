//! Simulable chains. The built-in model is the contracting-normals
//! AR(1) chain `X_{k+1} = theta X_k + sqrt(1 - theta^2) Z_k` with
//! stationary law `N(0, 1)`, drift function `V(x) = 1 + x^2`, small set
//! `C = [-d, d]` and target `f(x) = x`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baxendale::ChainClass;
use crate::drift::{fc_norm_bound, DriftParams, FunctionNorms, NuOnC};
use crate::error::{domain, Result};
use crate::numeric::normal_cdf;

/// A Markov chain together with a drift function, a target function and
/// certified drift parameters.
pub trait ChainModel: Sync {
    type State: Clone + Send;

    fn initial_state(&self) -> Self::State;

    fn step<R: Rng + ?Sized>(&self, x: &Self::State, rng: &mut R) -> Self::State;

    /// Drift function, `>= 1` everywhere.
    fn v(&self, x: &Self::State) -> f64;

    /// Target function whose stationary mean is estimated.
    fn f(&self, x: &Self::State) -> f64;

    fn drift(&self) -> &DriftParams;

    fn class(&self) -> ChainClass;

    /// The true value of `pi f`, when known.
    fn exact_i(&self) -> Option<f64>;
}

/// Which pair `(pi V, ||f_c^2||_V)` to feed into the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormsSetting {
    /// Values bounded through the drift lemmas only.
    LemmaBounds,
    /// Values computed exactly for `N(0, 1)`: `pi V = 2`, `||f_c^2||_V = 1`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractingNormals {
    theta: f64,
    d: f64,
    x0: f64,
    exact_i: Option<f64>,
    drift: DriftParams,
}

impl ContractingNormals {
    pub fn new(theta: f64, d: f64) -> Result<Self> {
        let drift = cn_drift_params(theta, d)?;
        Ok(Self { theta, d, x0: 0.0, exact_i: Some(0.0), drift })
    }

    /// Starts the chain at `x0` instead of 0.
    pub fn with_start(self, x0: f64) -> Self {
        Self { x0, ..self }
    }

    /// Overrides the reference value of `pi f`.
    pub fn with_exact_i(self, exact_i: Option<f64>) -> Self {
        Self { exact_i, ..self }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Regime used for the ergodicity constants. Negative `theta` reuses
    /// the `|theta|` constants: the law of `X_n` under `-theta` equals the
    /// law under `theta` started from `(-1)^n X_0`, and `V` is even.
    pub fn certificate_class(&self) -> ChainClass {
        ChainClass::ReversiblePositive
    }

    pub fn norms(&self, setting: NormsSetting) -> Result<FunctionNorms> {
        cn_norms(self.theta, self.d, setting)
    }
}

/// Drift parameters for `V(x) = 1 + x^2`, `C = [-d, d]`:
/// `lambda = theta^2 + 2 (1 - theta^2) / (1 + d^2)`,
/// `K = 2 + theta^2 (d^2 - 1)` and
/// `beta_tilde = 2 [Phi((1 + |theta|) d / s) - Phi(|theta| d / s)]`,
/// `s = sqrt(1 - theta^2)`. `nu` lives on `C`, so `beta = beta_tilde`.
pub fn cn_drift_params(theta: f64, d: f64) -> Result<DriftParams> {
    if !(theta.abs() < 1.0) {
        return domain(format!("theta must lie in (-1, 1), got {theta}"));
    }
    if !(d > 1.0 && d.is_finite()) {
        return domain(format!("small-set radius d must be finite and > 1, got {d}"));
    }
    let t2 = theta * theta;
    let at = theta.abs();
    let s = (1.0 - t2).sqrt();
    let lambda = t2 + 2.0 * (1.0 - t2) / (1.0 + d * d);
    let k_const = 2.0 + t2 * (d * d - 1.0);
    let beta_tilde = 2.0 * (normal_cdf((1.0 + at) * d / s) - normal_cdf(at * d / s));
    DriftParams::new(beta_tilde, lambda, k_const, beta_tilde, NuOnC::ConcentratedOnC)
}

pub fn cn_norms(theta: f64, d: f64, setting: NormsSetting) -> Result<FunctionNorms> {
    match setting {
        NormsSetting::Exact => {
            // Only checks the parameters; the values do not depend on them.
            cn_drift_params(theta, d)?;
            Ok(FunctionNorms { f_p_norm: 1.0, p: 2.0, fc_norm_2p: 1.0, pi_v: 2.0, b_v: 1.0, pi_c: 1.0 })
        }
        NormsSetting::LemmaBounds => {
            let params = cn_drift_params(theta, d)?;
            Ok(FunctionNorms {
                f_p_norm: 1.0,
                p: 2.0,
                fc_norm_2p: fc_norm_bound(1.0, 2.0, &params, None)?,
                pi_v: params.pi_v_bound(1.0)?,
                b_v: 1.0,
                pi_c: 1.0,
            })
        }
    }
}

/// One transition `theta x + sqrt(1 - theta^2) Z`.
#[inline]
pub fn cn_step<R: Rng + ?Sized>(x: f64, theta: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    theta * x + (1.0 - theta * theta).sqrt() * z
}

impl ChainModel for ContractingNormals {
    type State = f64;

    fn initial_state(&self) -> f64 {
        self.x0
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, x: &f64, rng: &mut R) -> f64 {
        cn_step(*x, self.theta, rng)
    }

    fn v(&self, x: &f64) -> f64 {
        1.0 + x * x
    }

    fn f(&self, x: &f64) -> f64 {
        *x
    }

    fn drift(&self) -> &DriftParams {
        &self.drift
    }

    fn class(&self) -> ChainClass {
        if self.theta >= 0.0 {
            ChainClass::ReversiblePositive
        } else {
            ChainClass::Reversible
        }
    }

    fn exact_i(&self) -> Option<f64> {
        self.exact_i
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn drift_params_at_table_point() {
        let p = cn_drift_params(0.5, 1.6226).unwrap();
        assert!((p.lambda - 0.66290).abs() < 1e-5);
        assert!((p.k_const - 2.40820).abs() < 1e-5);
        assert!((p.beta_tilde - 0.3439).abs() < 1e-3);
        assert_eq!(p.beta, p.beta_tilde);
        assert_eq!(p.nu_on_c, NuOnC::ConcentratedOnC);
    }

    #[test]
    fn drift_params_theta_zero_and_symmetry() {
        let d: f64 = 2.0;
        let p = cn_drift_params(0.0, d).unwrap();
        assert!((p.lambda - 2.0 / (1.0 + d * d)).abs() < 1e-15);
        assert_eq!(p.k_const, 2.0);
        assert!((p.beta_tilde - (2.0 * normal_cdf(d) - 1.0)).abs() < 1e-15);
        assert_eq!(cn_drift_params(-0.5, 1.6226).unwrap(), cn_drift_params(0.5, 1.6226).unwrap());
        assert!(cn_drift_params(1.0, 2.0).is_err());
        assert!(cn_drift_params(0.5, 1.0).is_err());
    }

    #[test]
    fn class_by_sign() {
        assert_eq!(ContractingNormals::new(0.5, 2.0).unwrap().class(), ChainClass::ReversiblePositive);
        assert_eq!(ContractingNormals::new(-0.5, 2.0).unwrap().class(), ChainClass::Reversible);
    }

    #[test]
    fn norms_settings() {
        let exact = cn_norms(0.5, 1.6226, NormsSetting::Exact).unwrap();
        assert_eq!((exact.pi_v, exact.fc_norm_2p), (2.0, 1.0));
        let lemma = cn_norms(0.5, 1.6226, NormsSetting::LemmaBounds).unwrap();
        assert!((lemma.pi_v - 5.177).abs() < 1e-3);
        assert!((lemma.fc_norm_2p - 24.70).abs() < 1e-2);
        assert!(lemma.pi_v >= exact.pi_v && lemma.fc_norm_2p >= exact.fc_norm_2p);
    }

    #[test]
    fn v_is_at_least_one() {
        let m = ContractingNormals::new(0.5, 1.6226).unwrap();
        for x in [-1e3, -2.0, 0.0, 0.5, 7.0] {
            assert!(m.v(&x) >= 1.0);
        }
        assert_eq!(m.v(&m.initial_state()), 1.0);
    }

    #[test]
    fn one_step_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mean = (0..n).map(|_| cn_step(10.0, 0.5, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 5.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn theta_zero_is_standard_normal() {
        // Kolmogorov-Smirnov against N(0, 1); sqrt(n) D < 1.628 is p > 0.01.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut xs: Vec<f64> = (0..n).map(|_| cn_step(37.0, 0.0, &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = normal_cdf(x);
                (c - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - c).abs())
            })
            .fold(0.0, f64::max);
        assert!(d * (n as f64).sqrt() < 1.628, "KS statistic {d}");
    }
}
