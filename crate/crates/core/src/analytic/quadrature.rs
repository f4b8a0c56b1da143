use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::netmodel::TierConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TierKind {
    Macro,
    Femto,
}

/// Gauss–Chebyshev expansion of a tier's channel-gain CDF as Σ b_n e^{−c_n y}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureTable {
    pub order: usize,
    pub thetas: Vec<f64>,
    pub weight: f64,
    /// b_0..b_N with b_0 = −Σ_{n≥1} b_n.
    pub b: Vec<f64>,
    /// c_0..c_N with c_0 = 0.
    pub c: Vec<f64>,
    pub tier_tag: TierKind,
    /// πλ𝒴² for the macro kind, 1/𝒴 for the femto kind.
    pub scale: f64,
}

pub fn build_quadrature(n: usize, tier: &TierConfig, kind: TierKind) -> Result<QuadratureTable> {
    if n == 0 {
        return Err(Error::domain(
            "build_quadrature",
            "order must be at least 1",
        ));
    }
    let weight = PI / n as f64;
    let y = tier.coverage_radius;
    let alpha = tier.pathloss_exp;
    let thetas: Vec<f64> = (1..=n)
        .map(|i| ((2 * i - 1) as f64 * PI / (2 * n) as f64).cos())
        .collect();
    let mut b = Vec::with_capacity(n + 1);
    let mut c = Vec::with_capacity(n + 1);
    b.push(0.0);
    c.push(0.0);
    for &th in &thetas {
        let r = 0.5 * y * (th + 1.0);
        let root = (1.0 - th * th).max(0.0).sqrt();
        let bn = match kind {
            TierKind::Macro => {
                -weight * root * 0.5 * (th + 1.0) * (-PI * tier.density * r * r).exp()
            }
            TierKind::Femto => -weight * root * r,
        };
        b.push(bn);
        c.push(1.0 + r.powf(alpha));
    }
    b[0] = -b[1..].iter().sum::<f64>();
    let scale = match kind {
        TierKind::Macro => PI * tier.density * y * y,
        TierKind::Femto => 1.0 / y,
    };
    Ok(QuadratureTable {
        order: n,
        thetas,
        weight,
        b,
        c,
        tier_tag: kind,
        scale,
    })
}

impl QuadratureTable {
    /// scale · Σ b_n e^{−c_n y}: the unordered gain CDF at y.
    pub fn cdf(&self, y: f64) -> f64 {
        self.scale
            * self
                .b
                .iter()
                .zip(&self.c)
                .map(|(b, c)| b * (-c * y).exp())
                .sum::<f64>()
    }
}
