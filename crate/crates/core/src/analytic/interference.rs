use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::netmodel::CoTierKernel;
use crate::specfun;

fn check(op: &'static str, density: f64, s: f64, alpha: f64, lower: f64) -> Result<()> {
    if !(density >= 0.0) || !(s >= 0.0) || !(alpha > 2.0) || !(lower > 1.0) {
        return Err(Error::domain(
            op,
            format!("density = {density}, s = {s}, alpha = {alpha}, lower = {lower}"),
        ));
    }
    Ok(())
}

/// −λ ∫_lo^∞ ln(1 + s r^{−α}) dr in closed form.
pub fn mu_campbell(density: f64, s: f64, alpha: f64, lower_limit: f64) -> Result<f64> {
    check("mu_campbell", density, s, alpha, lower_limit)?;
    if s == 0.0 || density == 0.0 {
        return Ok(0.0);
    }
    let ap = alpha - 1.0;
    let x = s * lower_limit.powf(-alpha);
    let f = specfun::gauss_2f1(1.0, ap / alpha, 2.0 - 1.0 / alpha, -x)?;
    let bracket = alpha * s * f - ap * lower_limit.powf(alpha) * x.ln_1p();
    Ok(-density * lower_limit.powf(-ap) * bracket / ap)
}

/// −λ ∫_lo^∞ 2πr ln(1 + s r^{−α}) dr in closed form.
pub fn mu_campbell_planar(density: f64, s: f64, alpha: f64, lower_limit: f64) -> Result<f64> {
    check("mu_campbell_planar", density, s, alpha, lower_limit)?;
    if s == 0.0 || density == 0.0 {
        return Ok(0.0);
    }
    let am = alpha - 2.0;
    let x = s * lower_limit.powf(-alpha);
    let f = specfun::gauss_2f1(1.0, am / alpha, 2.0 - 2.0 / alpha, -x)?;
    let bracket = alpha * s * f - am * lower_limit.powf(alpha) * x.ln_1p();
    Ok(-PI * density * lower_limit.powf(-am) * bracket / am)
}

pub fn co_tier_mu(
    kernel: CoTierKernel,
    density: f64,
    s: f64,
    alpha: f64,
    lower_limit: f64,
) -> Result<f64> {
    match kernel {
        CoTierKernel::Planar => mu_campbell_planar(density, s, alpha, lower_limit),
        CoTierKernel::Line => mu_campbell(density, s, alpha, lower_limit),
    }
}

/// exp(πλ s^δ (Γ(1−δ, s) − Γ(1−δ))) with δ = 2/ν, evaluated as exp(−πλ s^δ γ(1−δ, s)).
pub fn laplace_cross_tier(s: f64, density: f64, nu: f64) -> Result<f64> {
    if !(s >= 0.0) || !(density >= 0.0) || !(nu > 2.0) {
        return Err(Error::domain(
            "laplace_cross_tier",
            format!("s = {s}, density = {density}, nu = {nu}"),
        ));
    }
    if s == 0.0 || density == 0.0 {
        return Ok(1.0);
    }
    let delta = 2.0 / nu;
    Ok((-PI * density * s.powf(delta) * specfun::gamma_lower(1.0 - delta, s)?).exp())
}
