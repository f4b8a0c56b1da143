//! Scenarios shared by the benchmarks.

use nomanet_core::netmodel::db_to_linear;
use nomanet_core::{PointModel, ScenarioConfig};

/// Defaults with the femto tier at `density` and ρ_f = 30 dB.
pub fn femto_scenario(density: f64, model: PointModel) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.femto.density = density;
    cfg.model = model;
    cfg.transmit_snr_f = db_to_linear(30.0);
    cfg
}
