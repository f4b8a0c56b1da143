use serde::{Deserialize, Serialize};

use super::nc::{nc_probability_closed, nc_probability_general};
use super::offloading::offloading_probability;
use super::outage::{outage_fu_noma, outage_mu};
use super::quadrature::{build_quadrature, TierKind};
use super::OutageResult;
use crate::error::{Error, Result};
use crate::netmodel::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutageCase {
    /// Offloaded user served alone by the FBS.
    #[serde(rename = "I")]
    I,
    /// Offloaded user paired as the cell-centre user.
    #[serde(rename = "II")]
    II,
    /// Offloaded user paired as the cell-edge user.
    #[serde(rename = "III")]
    III,
}

/// Total outage of a macro user that may be offloaded to a femto cell.
pub fn total_outage(
    case: OutageCase,
    cfg: &ScenarioConfig,
    rate: f64,
    p: Option<f64>,
) -> Result<OutageResult> {
    let mut cfg = cfg.clone();
    cfg.noma.target_rate = rate;
    let macro_q = build_quadrature(cfg.quadrature.macro_order, &cfg.macro_tier, TierKind::Macro)?;
    let femto_q = build_quadrature(cfg.quadrature.femto_order, &cfg.femto, TierKind::Femto)?;
    let p_of = offloading_probability(&cfg)?;
    let p_m = outage_mu(&cfg, &macro_q, rate)?.probability;
    let stay = (1.0 - p_of) * p_m;
    let m = cfg.noma.num_users;

    let need_p = || p.ok_or_else(|| Error::domain("total_outage", "cases II and III need p"));
    let nc = |p: f64| {
        if m == 2 {
            nc_probability_closed(p)
        } else {
            nc_probability_general(p, m - 1, m, m)
        }
    };

    let (moved, femto, share) = match case {
        OutageCase::I => {
            let mut single = cfg.clone();
            single.noma.num_users = 1;
            single.noma.power_factors = vec![1.0];
            let f = outage_fu_noma(&single, &femto_q, 1)?.probability;
            (p_of * f, f, 1.0)
        }
        OutageCase::II => {
            let pnc = nc(need_p()?)?;
            let f = outage_fu_noma(&cfg, &femto_q, m)?.probability;
            (p_of * pnc * f, f, pnc)
        }
        OutageCase::III => {
            let pnc = nc(need_p()?)?;
            let f = outage_fu_noma(&cfg, &femto_q, 1)?.probability;
            (p_of * (1.0 - pnc) * f, f, 1.0 - pnc)
        }
    };
    Ok(OutageResult::new(stay + moved)
        .with("offloading_probability", p_of)
        .with("macro_outage", p_m)
        .with("femto_outage", femto)
        .with("pairing_share", share))
}
