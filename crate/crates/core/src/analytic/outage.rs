use serde::Serialize;

use super::interference::{co_tier_mu, laplace_cross_tier};
use super::quadrature::{QuadratureTable, TierKind};
use super::{interferer_density, OutageResult};
use crate::error::{Error, Result};
use crate::netmodel::{NomaConfig, ScenarioConfig};

/// Largest number of multinomial terms the ordered-gain expansion may visit.
pub const DEFAULT_TERM_CAP: u128 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NomaThreshold {
    pub phi: Vec<f64>,
    /// ε_j for j ≤ k; +∞ where SIC stage j is infeasible.
    pub eps: Vec<f64>,
    /// +∞ when any stage is infeasible.
    pub eps_max: f64,
    pub feasible: bool,
}

/// Per-stage SIC thresholds for the k-th user (1-based).
pub fn noma_thresholds(noma: &NomaConfig, k: usize) -> Result<NomaThreshold> {
    let m = noma.power_factors.len();
    if k == 0 || k > m {
        return Err(Error::domain(
            "noma_thresholds",
            format!("k = {k}, M = {m}"),
        ));
    }
    let a = &noma.power_factors;
    let phi = vec![2f64.powf(noma.target_rate) - 1.0; k];
    let eps: Vec<f64> = (0..k)
        .map(|j| {
            let rest: f64 = a[j + 1..].iter().sum();
            let den = a[j] - phi[j] * rest;
            if den > 0.0 {
                phi[j] / den
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let eps_max = eps.iter().cloned().fold(0.0, f64::max);
    Ok(NomaThreshold {
        feasible: eps_max.is_finite(),
        phi,
        eps,
        eps_max,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn composition_count(m: usize, parts: usize) -> u128 {
    // C(m + parts − 1, m), saturating.
    let mut acc: u128 = 1;
    for i in 0..m as u128 {
        acc = acc.saturating_mul(parts as u128 + i) / (i + 1);
    }
    acc
}

/// Visits every composition q of `m` into `b.len()` parts with its
/// multinomial weight m!/Πq_n! · Π b_n^{q_n} and exponent S = Σ q_n c_n.
fn for_each_composition<F: FnMut(f64, f64) -> Result<()>>(
    b: &[f64],
    c: &[f64],
    m: usize,
    visit: &mut F,
) -> Result<()> {
    fn go<F: FnMut(f64, f64) -> Result<()>>(
        b: &[f64],
        c: &[f64],
        idx: usize,
        left: usize,
        weight: f64,
        s: f64,
        visit: &mut F,
    ) -> Result<()> {
        if idx + 1 == b.len() {
            return visit(weight * b[idx].powi(left as i32), s + left as f64 * c[idx]);
        }
        let mut w = weight;
        let mut choose = 1.0;
        for q in 0..=left {
            if q > 0 {
                choose *= (left - q + 1) as f64 / q as f64;
                w *= b[idx];
            }
            go(
                b,
                c,
                idx + 1,
                left - q,
                w * choose,
                s + q as f64 * c[idx],
                visit,
            )?;
        }
        Ok(())
    }
    go(b, c, 0, m, 1.0, 0.0, visit)
}

/// ψ_k Σ_z C(M−k, z)(−1)^z/(k+z) Σ_{|q|=k+z} weight(q) · term(S(q)), summed per output slot.
fn ordered_sum<const L: usize>(
    quad: &QuadratureTable,
    k: usize,
    m_users: usize,
    cap: u128,
    mut term: impl FnMut(f64) -> Result<[f64; L]>,
) -> Result<[f64; L]> {
    if k == 0 || k > m_users {
        return Err(Error::domain(
            "ordered_gain_cdf",
            format!("k = {k}, M = {m_users}"),
        ));
    }
    let parts = quad.b.len();
    let needed: u128 = (0..=m_users - k)
        .map(|z| composition_count(k + z, parts))
        .fold(0u128, |a, b| a.saturating_add(b));
    if needed > cap {
        return Err(Error::TooManyTerms { needed, cap });
    }
    let b: Vec<f64> = quad.b.iter().map(|b| b * quad.scale).collect();
    // ψ_k = M! / ((k−1)! (M−k)!) = k · C(M, k)
    let psi = k as f64 * binomial(m_users, k);
    let mut total = [0.0; L];
    for z in 0..=m_users - k {
        let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
        let coef = psi * binomial(m_users - k, z) * sign / (k + z) as f64;
        let mut inner = [0.0; L];
        for_each_composition(&b, &quad.c, k + z, &mut |w, s| {
            let t = term(s)?;
            for i in 0..L {
                inner[i] += w * t[i];
            }
            Ok(())
        })?;
        for i in 0..L {
            total[i] += coef * inner[i];
        }
    }
    Ok(total)
}

fn require_kind(op: &'static str, quad: &QuadratureTable, kind: TierKind) -> Result<()> {
    if quad.tier_tag != kind {
        return Err(Error::domain(
            op,
            format!("needs a {kind:?} quadrature table"),
        ));
    }
    Ok(())
}

/// CDF of the k-th smallest of M i.i.d. femto channel gains.
pub fn ordered_gain_cdf(y: f64, k: usize, m_users: usize, quad: &QuadratureTable) -> Result<f64> {
    ordered_gain_cdf_with_cap(y, k, m_users, quad, DEFAULT_TERM_CAP)
}

pub fn ordered_gain_cdf_with_cap(
    y: f64,
    k: usize,
    m_users: usize,
    quad: &QuadratureTable,
    cap: u128,
) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain("ordered_gain_cdf", format!("y = {y}")));
    }
    let [v] = ordered_sum(quad, k, m_users, cap, |s| Ok([(-s * y).exp()]))?;
    Ok(v)
}

/// MU outage: the macro expansion at threshold φ with the co-tier factor per node.
pub fn outage_mu(cfg: &ScenarioConfig, quad: &QuadratureTable, rate: f64) -> Result<OutageResult> {
    require_kind("outage_mu", quad, TierKind::Macro)?;
    if !(rate > 0.0) {
        return Err(Error::domain("outage_mu", format!("rate = {rate}")));
    }
    let phi = 2f64.powf(rate / cfg.noma.bandwidth_fraction_m) - 1.0;
    let signal = cfg.noma.receive_snr_m * cfg.transmit_snr_m * cfg.macro_tier.power;
    let y = phi / signal;
    let density = interferer_density(cfg)?;
    let alpha = cfg.femto.pathloss_exp;
    let lo = cfg.sensing.guard_radius;
    let mut plain = 0.0;
    let mut full = 0.0;
    for (b, c) in quad.b.iter().zip(&quad.c) {
        let base = b * (-c * y).exp();
        plain += base;
        if base == 0.0 {
            continue;
        }
        let s = c * phi * cfg.transmit_snr_f / signal;
        full += base * co_tier_mu(cfg.co_tier_kernel, density, s, alpha, lo)?.exp();
    }
    Ok(OutageResult::new(quad.scale * full)
        .with("quadrature_sum", quad.scale * plain)
        .with("threshold", phi)
        .with("interferer_density", density))
}

fn outage_fu_at(
    cfg: &ScenarioConfig,
    quad: &QuadratureTable,
    k: usize,
    m_users: usize,
    eps: f64,
) -> Result<OutageResult> {
    require_kind("outage_fu", quad, TierKind::Femto)?;
    let signal = cfg.noma.receive_snr_f * cfg.transmit_snr_f * cfg.femto.power;
    let y = eps / signal;
    let density = interferer_density(cfg)?;
    let nu_m = cfg.macro_tier.pathloss_exp;
    let lambda_m = cfg.macro_tier.density;
    let alpha = cfg.femto.pathloss_exp;
    let lo = cfg.femto.coverage_radius;
    let [plain, cross, full] = ordered_sum(quad, k, m_users, DEFAULT_TERM_CAP, |s| {
        let base = (-s * y).exp();
        if s == 0.0 || base == 0.0 {
            return Ok([base; 3]);
        }
        let lc = laplace_cross_tier(cfg.transmit_snr_m * eps * s / signal, lambda_m, nu_m)?;
        let mu = co_tier_mu(
            cfg.co_tier_kernel,
            density,
            cfg.transmit_snr_f * eps * s / signal,
            alpha,
            lo,
        )?;
        Ok([base, base * lc, base * lc * mu.exp()])
    })?;
    Ok(OutageResult::new(full)
        .with("quadrature_sum", plain)
        .with("with_cross_tier", cross)
        .with("threshold", eps)
        .with("interferer_density", density))
}

/// Outage of the k-th ordered femto user under NOMA with SIC.
pub fn outage_fu_noma(
    cfg: &ScenarioConfig,
    quad: &QuadratureTable,
    k: usize,
) -> Result<OutageResult> {
    let th = noma_thresholds(&cfg.noma, k)?;
    if !th.feasible {
        return Ok(OutageResult::new(1.0).with("infeasible", 1.0));
    }
    outage_fu_at(cfg, quad, k, cfg.noma.num_users, th.eps_max)
}

/// Outage of the k-th ordered femto user with a 1/M_f orthogonal share at full power.
pub fn outage_fu_oma(
    cfg: &ScenarioConfig,
    quad: &QuadratureTable,
    k: usize,
) -> Result<OutageResult> {
    let m = cfg.noma.num_users;
    if k == 0 || k > m {
        return Err(Error::domain("outage_fu_oma", format!("k = {k}, M = {m}")));
    }
    let phi = 2f64.powf(m as f64 * cfg.noma.target_rate) - 1.0;
    outage_fu_at(cfg, quad, k, m, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::build_quadrature;

    #[test]
    fn thresholds_example() {
        let th = noma_thresholds(&NomaConfig::default(), 2).unwrap();
        assert!((th.phi[0] - 0.414_213_562_373_095).abs() < 1e-12);
        let e1 = th.phi[0] / (0.8 - th.phi[0] * 0.2);
        assert!((th.eps[0] - e1).abs() < 1e-15);
        assert!((th.eps[0] - 0.5776).abs() < 1e-4);
        let one = noma_thresholds(&NomaConfig::default(), 1).unwrap();
        assert_eq!(one.eps_max, one.eps[0]);
    }

    #[test]
    fn zero_denominator_is_infeasible() {
        let mut n = NomaConfig::default();
        // φ = 1, so a_1 = φ a_2 makes the first stage unsolvable.
        n.target_rate = 1.0;
        n.power_factors = vec![0.5, 0.5];
        let th = noma_thresholds(&n, 1).unwrap();
        assert!(!th.feasible);
        let mut cfg = ScenarioConfig::default();
        cfg.noma = n;
        let quad = build_quadrature(10, &cfg.femto, TierKind::Femto).unwrap();
        assert_eq!(outage_fu_noma(&cfg, &quad, 2).unwrap().probability, 1.0);
    }

    #[test]
    fn compositions_enumerated_once() {
        let b = [1.0, 1.0, 1.0, 1.0];
        let c = [0.0, 1.0, 2.0, 3.0];
        let mut count = 0;
        let mut weight = 0.0;
        for_each_composition(&b, &c, 3, &mut |w, _| {
            count += 1;
            weight += w;
            Ok(())
        })
        .unwrap();
        assert_eq!(count as u128, composition_count(3, 4));
        // Σ multinomial coefficients = parts^m
        assert!((weight - 64.0).abs() < 1e-12);
    }

    #[test]
    fn single_user_matches_unordered() {
        let quad = build_quadrature(12, &ScenarioConfig::default().femto, TierKind::Femto).unwrap();
        for &y in &[0.0, 0.1, 1.0, 10.0] {
            let a = ordered_gain_cdf(y, 1, 1, &quad).unwrap();
            assert!((a - quad.cdf(y)).abs() < 1e-14);
        }
    }

    #[test]
    fn expansion_matches_binomial_form() {
        let quad = build_quadrature(8, &ScenarioConfig::default().femto, TierKind::Femto).unwrap();
        let y = 0.7;
        let f = quad.cdf(y);
        for (m, k) in [(2, 1), (2, 2), (3, 2), (4, 1)] {
            let direct: f64 = (k..=m)
                .map(|j| binomial(m, j) * f.powi(j as i32) * (1.0 - f).powi((m - j) as i32))
                .sum();
            let v = ordered_gain_cdf(y, k, m, &quad).unwrap();
            assert!((v - direct).abs() < 1e-12, "({m},{k}): {v} vs {direct}");
        }
    }

    #[test]
    fn term_cap_guard() {
        let quad = build_quadrature(40, &ScenarioConfig::default().femto, TierKind::Femto).unwrap();
        assert!(matches!(
            ordered_gain_cdf_with_cap(1.0, 1, 6, &quad, 1000),
            Err(Error::TooManyTerms { .. })
        ));
    }
}
