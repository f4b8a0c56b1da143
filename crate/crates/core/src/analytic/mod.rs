//! Closed-form outage, offloading and NOMA-compatibility expressions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::geometry;
use crate::netmodel::{PointModel, ScenarioConfig};

mod interference;
mod nc;
mod offloading;
mod outage;
mod quadrature;
mod total;

pub use interference::{co_tier_mu, laplace_cross_tier, mu_campbell, mu_campbell_planar};
pub use nc::{nc_probability_closed, nc_probability_general};
pub use offloading::{
    offloading_probability, offloading_probability_closed, offloading_probability_numeric,
};
pub use outage::{
    noma_thresholds, ordered_gain_cdf, ordered_gain_cdf_with_cap, outage_fu_noma, outage_fu_oma,
    outage_mu, NomaThreshold, DEFAULT_TERM_CAP,
};
pub use quadrature::{build_quadrature, QuadratureTable, TierKind};
pub use total::{total_outage, OutageCase};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageResult {
    /// `raw` clamped to [0, 1].
    pub probability: f64,
    pub raw: f64,
    pub components: BTreeMap<String, f64>,
}

impl OutageResult {
    pub(crate) fn new(raw: f64) -> Self {
        Self {
            probability: raw.clamp(0.0, 1.0),
            raw,
            components: BTreeMap::new(),
        }
    }

    pub(crate) fn with(mut self, name: &str, value: f64) -> Self {
        self.components.insert(name.to_string(), value);
        self
    }
}

/// Intensity of femto interferers under the configured point model.
pub fn interferer_density(cfg: &ScenarioConfig) -> Result<f64> {
    match cfg.model {
        PointModel::Ppp => Ok(cfg.femto.density),
        PointModel::Rpp => geometry::effective_density(cfg),
    }
}
