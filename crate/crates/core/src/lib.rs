//! Analytic and Monte Carlo models of a two-tier NOMA heterogeneous network
//! whose femto tier contends for the channel by carrier sensing.
//!
//! [`analytic`] holds the closed-form outage, offloading and pairing
//! expressions, [`montecarlo`] simulates the same SINR models over sampled
//! point patterns, and [`geometry`] provides the sampling and thinning both
//! engines share.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod netmodel;
pub mod numeric;
pub mod specfun;

pub use analytic::{OutageCase, OutageResult, QuadratureTable, TierKind};
pub use error::{Error, Result, Violation};
pub use geometry::{PointPattern, RngStream};
pub use montecarlo::{EstimateWithCI, Scheme, SimSpec};
pub use netmodel::{
    CoTierKernel, NeighborRule, NomaConfig, PointModel, QuadratureOrders, ScenarioConfig,
    SensingConfig, SensingLaw, TierConfig,
};
