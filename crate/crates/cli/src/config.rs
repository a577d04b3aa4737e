//! The JSON configuration document and the flag overrides applied on top.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::Args;
use driftbound::optimizer::SmallSetObjective;
use driftbound::{ChainClass, DriftParams, FunctionNorms, StartSpec};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A number, or the keyword `"optimize"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Choice {
    Fixed(f64),
    Optimize,
}

impl FromStr for Choice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "optimize" {
            return Ok(Choice::Optimize);
        }
        s.parse().map(Choice::Fixed).map_err(|_| format!("expected a number or \"optimize\", got {s:?}"))
    }
}

impl Serialize for Choice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Choice::Fixed(x) => s.serialize_f64(*x),
            Choice::Optimize => s.serialize_str("optimize"),
        }
    }
}

impl<'de> Deserialize<'de> for Choice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Choice::Fixed(x)),
            Raw::Word(w) => w.parse().map_err(de::Error::custom),
        }
    }
}

/// A float that may be infinite. JSON has no infinity, so non-finite
/// values travel as the strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl FromStr for Real {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(Real).map_err(|_| format!("expected a number, got {s:?}"))
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.0.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Real(x)),
            Raw::Word(w) => w.parse().map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    #[value(name = "one-walk", alias = "one_walk")]
    OneWalk,
    #[serde(alias = "median_of_averages")]
    Ma,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::OneWalk => "one walk",
            EstimatorKind::Ma => "MA",
        })
    }
}

/// `"exact"` or `"lemma_bounds"` for the built-in model, or explicit values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormsSpec {
    Setting(driftbound::models::NormsSetting),
    Explicit(FunctionNorms),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub theta: Option<f64>,
    pub d: Option<Choice>,
    pub x0: Option<f64>,
    pub drift: Option<DriftParams>,
    pub class: Option<ChainClass>,
    pub gamma: Option<Choice>,
    pub gamma_r: Option<Choice>,
    pub r: Option<f64>,
    pub norms: Option<NormsSpec>,
    pub start: Option<StartSpec>,
    pub eps: Option<Real>,
    pub alpha: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub estimator: Option<EstimatorKind>,
    pub a: Option<Choice>,
    pub objective: Option<SmallSetObjective>,
    pub t: Option<u64>,
    pub n: Option<u64>,
    pub m: Option<u64>,
    pub reps: Option<u64>,
    pub exact_i: Option<f64>,
}

/// Flags that override config keys of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub theta: Option<f64>,
    /// Small-set radius, or "optimize".
    #[arg(long)]
    pub d: Option<Choice>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long, value_parser = parse_class)]
    pub class: Option<ChainClass>,
    /// Number or "optimize".
    #[arg(long)]
    pub gamma: Option<Choice>,
    /// Number or "optimize".
    #[arg(long)]
    pub gamma_r: Option<Choice>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, value_parser = parse_norms)]
    pub norms: Option<NormsSpec>,
    /// Half-width; "inf" is accepted.
    #[arg(long)]
    pub eps: Option<Real>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorKind>,
    /// Per-run confidence of the median estimator, or "optimize".
    #[arg(long)]
    pub a: Option<Choice>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub exact_i: Option<f64>,
}

fn parse_class(s: &str) -> Result<ChainClass, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

fn parse_norms(s: &str) -> Result<NormsSpec, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|e| e.to_string())
}

macro_rules! overlay {
    ($cfg:expr, $o:expr; $($field:ident),*) => {
        $(if let Some(v) = $o.$field.clone() { $cfg.$field = Some(v); })*
    };
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        overlay!(self, o; theta, d, x0, class, gamma, gamma_r, r, norms, eps, alpha, estimator, a, t, n, m, reps, exact_i);
    }

    /// Fills keys left unset with `preset`'s values.
    pub fn or(self, preset: Config) -> Config {
        let mut out = preset;
        let o = self;
        overlay!(out, o; theta, d, x0, drift, class, gamma, gamma_r, r, norms, start, eps, alpha, alphas,
            estimator, a, objective, t, n, m, reps, exact_i);
        out
    }
}

pub fn require<T: Clone>(value: &Option<T>, name: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| CliError::Config(format!("missing required field `{name}`")))
}
