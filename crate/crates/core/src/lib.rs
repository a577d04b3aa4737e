//! Explicit, nonasymptotic accuracy guarantees for MCMC averages under a
//! geometric drift condition towards a small set.
//!
//! The pipeline runs from certified drift parameters ([`drift`]) through
//! V-uniform ergodicity constants ([`baxendale`]) to mean-square-error
//! bounds and `(t, n)` or `(m, t, n)` run-length schedules ([`bounds`]).
//! [`optimizer`] tunes the free constants to minimise simulation cost, and
//! [`models`] plus [`simulate`] check the guarantees empirically on the
//! contracting-normals AR(1) chain.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baxendale;
pub mod bounds;
pub mod drift;
pub mod error;
pub mod models;
pub mod numeric;
pub mod optimizer;
pub mod simulate;

pub use baxendale::{ChainClass, ErgodicityCertificate, ErgodicityRate};
pub use bounds::{Schedule, ScheduleAudit};
pub use drift::{DriftParams, FunctionNorms, NuOnC, StartSpec};
pub use error::{Error, Result};
pub use models::{ChainModel, ContractingNormals};

/// Library version echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
