//! Drift-condition parameters and the elementary transformations and
//! bounds derived from them.
//!
//! A chain satisfies the drift condition with parameters
//! `(beta_tilde, lambda, k_const, beta)` when, for a small set `C`, a
//! probability measure `nu` and a drift function `V >= 1`:
//!
//! ```text
//! P(x, A) >= beta_tilde * nu(A)         for x in C
//! PV(x)   <= lambda * V(x)              for x outside C
//! PV(x)   <= K                          for x in C
//! beta_tilde * nu(C) >= beta
//! ```
//!
//! Every downstream constant is a function of these four numbers plus the
//! description of where `nu` puts its mass.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// What is known about the mass `nu` puts on the small set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NuOnC {
    /// `nu(C) = 1`.
    ConcentratedOnC,
    /// `nu(C) + integral of V over C^c w.r.t. nu <= k_tilde`.
    VIntegralBound { k_tilde: f64 },
    /// Nothing known; selects the most conservative exponent.
    Unknown,
}

/// Certified drift-condition constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub beta_tilde: f64,
    pub lambda: f64,
    pub k_const: f64,
    pub beta: f64,
    pub nu_on_c: NuOnC,
}

impl DriftParams {
    pub fn new(beta_tilde: f64, lambda: f64, k_const: f64, beta: f64, nu_on_c: NuOnC) -> Result<Self> {
        let p = Self { beta_tilde, lambda, k_const, beta, nu_on_c };
        p.validate()?;
        Ok(p)
    }

    /// Checks every parameter inequality, naming the first one violated.
    pub fn validate(&self) -> Result<()> {
        let Self { beta_tilde, lambda, k_const, beta, nu_on_c } = *self;
        if !(lambda > 0.0 && lambda < 1.0) {
            return domain(format!("lambda must lie in (0, 1), got {lambda}"));
        }
        if !(beta_tilde > 0.0 && beta_tilde <= 1.0) {
            return domain(format!("beta_tilde must lie in (0, 1], got {beta_tilde}"));
        }
        if !(beta > 0.0 && beta <= beta_tilde) {
            return domain(format!("beta must lie in (0, beta_tilde], got beta={beta}, beta_tilde={beta_tilde}"));
        }
        if !(k_const >= 1.0 && k_const.is_finite()) {
            return domain(format!("K must be finite and >= 1, got {k_const}"));
        }
        if !(k_const > lambda) {
            return domain(format!("K must exceed lambda, got K={k_const}, lambda={lambda}"));
        }
        if let NuOnC::VIntegralBound { k_tilde } = nu_on_c {
            if !(k_tilde >= 1.0 && k_tilde.is_finite()) {
                return domain(format!("k_tilde must be finite and >= 1, got {k_tilde}"));
            }
        }
        Ok(())
    }

    /// `beta_tilde == 1`: the small set is an atom.
    pub fn is_atomic(&self) -> bool {
        self.beta_tilde == 1.0
    }

    /// Drift parameters for `V^(1/r)`: `lambda` and `K` are replaced by their
    /// `r`-th roots, the minorization constants are unchanged.
    pub fn transform_r(&self, r: f64) -> Result<Self> {
        if !(r >= 1.0 && r.is_finite()) {
            return domain(format!("r must be finite and >= 1, got {r}"));
        }
        if r == 1.0 {
            return Ok(*self);
        }
        let inv = 1.0 / r;
        Ok(Self {
            lambda: self.lambda.powf(inv),
            k_const: self.k_const.powf(inv),
            ..*self
        })
    }

    /// Upper bound `pi(C) (K - lambda) / (1 - lambda)` on `pi V`.
    pub fn pi_v_bound(&self, pi_c: f64) -> Result<f64> {
        self.validate()?;
        check_pi_c(pi_c)?;
        Ok(pi_c * (self.k_const - self.lambda) / (1.0 - self.lambda))
    }

    /// `K_{p,lambda} = (K^(1/p) - lambda^(1/p)) / (1 - lambda^(1/p))`, a bound
    /// on `pi V^(1/p)` when `pi(C) = 1`.
    pub fn k_p_lambda(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return domain(format!("p must be finite and >= 1, got {p}"));
        }
        let lp = self.lambda.powf(1.0 / p);
        let kp = self.k_const.powf(1.0 / p);
        if !(lp < 1.0) {
            return domain(format!("lambda^(1/p) is numerically 1 (lambda={}, p={p})", self.lambda));
        }
        Ok((kp - lp) / (1.0 - lp))
    }
}

fn check_pi_c(pi_c: f64) -> Result<()> {
    if !(pi_c > 0.0 && pi_c <= 1.0) {
        return domain(format!("pi(C) must lie in (0, 1], got {pi_c}"));
    }
    Ok(())
}

/// Bound on `|| |f_c|^p ||_V^(2/p)` from `|| |f|^p ||_V`.
///
/// With `tight = Some((b_v, pi_c))` this is
/// `(f_p_norm^(1/p) + pi_c K_{p,lambda} / b_v^(1/p))^2`, otherwise the looser
/// `(f_p_norm^(1/p) + K_{p,lambda})^2`.
pub fn fc_norm_bound(f_p_norm: f64, p: f64, params: &DriftParams, tight: Option<(f64, f64)>) -> Result<f64> {
    if !(f_p_norm >= 0.0 && f_p_norm.is_finite()) {
        return domain(format!("|f|^p V-norm must be finite and >= 0, got {f_p_norm}"));
    }
    let kpl = params.k_p_lambda(p)?;
    let shift = match tight {
        Some((b_v, pi_c)) => {
            if !(b_v >= 1.0) {
                return domain(format!("inf V must be >= 1, got {b_v}"));
            }
            check_pi_c(pi_c)?;
            pi_c * kpl / b_v.powf(1.0 / p)
        }
        None => kpl,
    };
    Ok((f_p_norm.powf(1.0 / p) + shift).powi(2))
}

/// Norms of the target function relative to the drift function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionNorms {
    /// `|| |f|^p ||_V`.
    pub f_p_norm: f64,
    /// Moment order, at least 2.
    pub p: f64,
    /// Upper bound on `|| |f_c|^p ||_V^(2/p)`.
    pub fc_norm_2p: f64,
    /// Upper bound on `pi V`.
    pub pi_v: f64,
    /// `inf V`.
    pub b_v: f64,
    /// Upper bound on `pi(C)`.
    pub pi_c: f64,
}

impl FunctionNorms {
    /// Norms where `pi V` and the centred norm come only from the drift lemmas.
    pub fn from_lemmas(f_p_norm: f64, p: f64, params: &DriftParams, b_v: f64, pi_c: f64) -> Result<Self> {
        let pi_v = params.pi_v_bound(pi_c)?;
        let fc_norm_2p = fc_norm_bound(f_p_norm, p, params, Some((b_v, pi_c)))?;
        let norms = Self { f_p_norm, p, fc_norm_2p, pi_v, b_v, pi_c };
        norms.validate()?;
        Ok(norms)
    }

    /// Replaces `pi_v` and `fc_norm_2p` by the lemma bounds wherever those
    /// are smaller.
    pub fn tightened(&self, params: &DriftParams) -> Result<Self> {
        let lemma = Self::from_lemmas(self.f_p_norm, self.p, params, self.b_v, self.pi_c)?;
        Ok(Self {
            pi_v: self.pi_v.min(lemma.pi_v),
            fc_norm_2p: self.fc_norm_2p.min(lemma.fc_norm_2p),
            ..*self
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return domain(format!("moment order p must be >= 2, got {}", self.p));
        }
        for (name, v) in [("f_p_norm", self.f_p_norm), ("fc_norm_2p", self.fc_norm_2p)] {
            if !(v >= 0.0 && v.is_finite()) {
                return domain(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.pi_v >= 1.0 && self.pi_v.is_finite()) {
            return domain(format!("pi V must be finite and >= 1, got {}", self.pi_v));
        }
        if !(self.b_v >= 1.0 && self.b_v.is_finite()) {
            return domain(format!("inf V must be finite and >= 1, got {}", self.b_v));
        }
        check_pi_c(self.pi_c)
    }
}

/// Initial distribution of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartSpec {
    /// `X_0 ~ pi`.
    Stationary,
    /// `X_0 = x`, with `V(x)` given.
    Deterministic { v_at_x: f64 },
    /// A general `pi_0` with a bound on `min{pi_0 V, ||pi_0 - pi||_V}`.
    GeneralInit { min_bound: f64 },
}

impl StartSpec {
    pub fn validate(&self, b_v: f64) -> Result<()> {
        match *self {
            StartSpec::Stationary => Ok(()),
            StartSpec::Deterministic { v_at_x } => {
                if !(v_at_x >= b_v && v_at_x.is_finite()) {
                    return domain(format!("V(x) must be finite and >= inf V = {b_v}, got {v_at_x}"));
                }
                Ok(())
            }
            StartSpec::GeneralInit { min_bound } => {
                if !(min_bound >= 0.0 && min_bound.is_finite()) {
                    return domain(format!("initial-distribution bound must be finite and >= 0, got {min_bound}"));
                }
                Ok(())
            }
        }
    }
}
