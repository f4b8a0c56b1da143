use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::netmodel::ScenarioConfig;
use crate::numeric;
use crate::specfun;

fn power_ratio(cfg: &ScenarioConfig) -> f64 {
    (cfg.macro_tier.bias * cfg.macro_tier.power) / (cfg.femto.bias * cfg.femto.power)
}

fn truncation(cfg: &ScenarioConfig) -> f64 {
    let ym = cfg.macro_tier.coverage_radius;
    (-PI * cfg.macro_tier.density * ym * ym).exp()
}

/// Offloading probability for macro exponent 3 and femto exponent 4.
pub fn offloading_probability_closed(cfg: &ScenarioConfig) -> Result<f64> {
    let (nu_m, nu_f) = (cfg.macro_tier.pathloss_exp, cfg.femto.pathloss_exp);
    if nu_m != 3.0 || nu_f != 4.0 {
        return Err(Error::UnsupportedExponents {
            macro_exp: nu_m,
            femto_exp: nu_f,
        });
    }
    let kappa = power_ratio(cfg);
    if kappa.is_infinite() {
        return Ok(0.0);
    }
    let yf = cfg.femto.coverage_radius;
    let a = PI * cfg.macro_tier.density * kappa.powf(2.0 / 3.0);
    let x = a * yf.powf(8.0 / 3.0);
    let p = -0.75 * specfun::exp_integral_e(0.25, x)?
        + 3.0 * specfun::gamma_complete(0.75)? / (4.0 * yf * yf * a.powf(0.75))
        - truncation(cfg);
    Ok(p.clamp(0.0, 1.0))
}

/// E_{r_f}[e^{−πλ_m r_f^{2ν_f/ν_m} κ^{2/ν_m}}] − e^{−πλ_m𝒴_m²}, κ = B_mP_m/(B_fP_f).
pub fn offloading_probability_numeric(cfg: &ScenarioConfig) -> Result<f64> {
    let (nu_m, nu_f) = (cfg.macro_tier.pathloss_exp, cfg.femto.pathloss_exp);
    let kappa = power_ratio(cfg);
    if kappa.is_infinite() {
        return Ok(0.0);
    }
    let yf = cfg.femto.coverage_radius;
    let lam = cfg.macro_tier.density;
    let k = kappa.powf(2.0 / nu_m);
    let e = 2.0 * nu_f / nu_m;
    let f = |r: f64| 2.0 * r / (yf * yf) * (-PI * lam * r.powf(e) * k).exp();
    let p =
        numeric::integrate("offloading_probability_numeric", f, 0.0, yf, 1e-11)? - truncation(cfg);
    Ok(p.clamp(0.0, 1.0))
}

/// Closed form when the exponents allow it, quadrature otherwise.
pub fn offloading_probability(cfg: &ScenarioConfig) -> Result<f64> {
    match offloading_probability_closed(cfg) {
        Err(Error::UnsupportedExponents { .. }) => offloading_probability_numeric(cfg),
        other => other,
    }
}
