//! Monte Carlo simulation of the SINR models over sampled point patterns.
//!
//! Trial `t` always draws from the stream `(seed, t)` and trials are merged
//! in index order, so every estimate is bit-identical for a given seed no
//! matter how many worker threads run the blocks.

use std::f64::consts::PI;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::{nc_probability_closed, nc_probability_general, OutageCase};
use crate::error::{Error, Result};
use crate::geometry::{self, fill_ppp, RngStream, SensingRule, Thinner};
use crate::netmodel::{PointModel, ScenarioConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub trials: usize,
    /// Femto interferer window; defaults to max(4 r_c, 10 𝒴_f).
    pub window_radius: Option<f64>,
    /// Macro window; defaults to 𝒴_m.
    pub macro_window_radius: Option<f64>,
    pub seed: u64,
    pub confidence: f64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            trials: 100_000,
            window_radius: None,
            macro_window_radius: None,
            seed: 1,
            confidence: 0.99,
        }
    }
}

impl SimSpec {
    pub fn with_trials(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Noma,
    Oma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    /// Normal-approximation half-width at the requested confidence.
    pub half_width: f64,
    pub trials_used: usize,
    /// Trials redrawn because the window held no serving station.
    pub resampled: u64,
}

impl EstimateWithCI {
    pub fn contains(&self, x: f64, margin: f64) -> bool {
        (x - self.mean).abs() <= self.half_width + margin
    }
}

fn z_value(confidence: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + 0.5 * confidence)
}

fn proportion(hits: u64, n: usize, confidence: f64, resampled: u64) -> EstimateWithCI {
    let p = hits as f64 / n as f64;
    EstimateWithCI {
        mean: p,
        half_width: z_value(confidence) * (p * (1.0 - p) / n as f64).sqrt(),
        trials_used: n,
        resampled,
    }
}

fn check_inputs(cfg: &ScenarioConfig, spec: &SimSpec) -> Result<()> {
    cfg.validate().map_err(Error::InvalidConfig)?;
    if spec.trials == 0 {
        return Err(Error::domain("simulate", "trials must be at least 1"));
    }
    if !(spec.confidence > 0.0 && spec.confidence < 1.0) {
        return Err(Error::domain(
            "simulate",
            format!("confidence {} outside (0, 1)", spec.confidence),
        ));
    }
    Ok(())
}

/// Femto interferer window max(4 r_c, 10 𝒴_f) unless overridden.
pub fn femto_window(cfg: &ScenarioConfig, spec: &SimSpec) -> Result<f64> {
    if let Some(w) = spec.window_radius {
        let floor = cfg.femto.coverage_radius.max(cfg.sensing.guard_radius);
        if !(w > floor) {
            return Err(Error::domain(
                "simulate",
                format!("window radius {w} must exceed {floor}"),
            ));
        }
        return Ok(w);
    }
    let rc = geometry::resolved_contention_radius(cfg)?;
    Ok((4.0 * rc).max(10.0 * cfg.femto.coverage_radius))
}

fn macro_window(cfg: &ScenarioConfig, spec: &SimSpec) -> f64 {
    spec.macro_window_radius
        .unwrap_or(cfg.macro_tier.coverage_radius)
}

const BLOCK: usize = 512;

fn run_blocks<A, I, T, M>(spec: &SimSpec, init: I, trial: T, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    T: Fn(&mut ChaCha8Rng, &mut A) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let blocks = spec.trials.div_ceil(BLOCK);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            for t in b * BLOCK..((b + 1) * BLOCK).min(spec.trials) {
                let mut rng = RngStream::new(spec.seed, t as u64).rng();
                trial(&mut rng, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<A>>>()?;
    let mut out = init();
    for p in parts {
        merge(&mut out, p);
    }
    Ok(out)
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Mean Σ r^{−α} of a unit-intensity field beyond radius w.
fn tail_mean(w: f64, alpha: f64) -> f64 {
    2.0 * PI * w.powf(2.0 - alpha) / (alpha - 2.0)
}

/// Macro interference Σ |h|² r^{−ν} from a PPP, only radii are needed.
struct MacroField {
    density: f64,
    nu: f64,
    window: f64,
}

impl MacroField {
    fn new(cfg: &ScenarioConfig, spec: &SimSpec) -> Self {
        Self {
            density: cfg.macro_tier.density,
            nu: cfg.macro_tier.pathloss_exp,
            window: macro_window(cfg, spec),
        }
    }

    fn interference<R: Rng + ?Sized>(&self, rng: &mut R, exclusion: f64) -> f64 {
        let mean = self.density * PI * self.window * self.window;
        let n = if mean > 0.0 {
            Poisson::new(mean).expect("finite mean").sample(rng) as usize
        } else {
            0
        };
        let mut sum = 0.0;
        for _ in 0..n {
            let r = self.window * rng.random::<f64>().sqrt();
            let g = exp1(rng);
            if r > exclusion {
                sum += g * r.powf(-self.nu);
            }
        }
        sum + self.density * tail_mean(self.window, self.nu)
    }
}

/// Femto interference Σ |h|² r^{−α} from the (possibly thinned) femto field.
struct FemtoField {
    density: f64,
    alpha: f64,
    window: f64,
    rule: Option<SensingRule>,
}

impl FemtoField {
    fn new(cfg: &ScenarioConfig, spec: &SimSpec) -> Result<Self> {
        let rule = match cfg.model {
            PointModel::Ppp => None,
            PointModel::Rpp => Some(SensingRule::new(cfg, 0)?),
        };
        Ok(Self {
            density: cfg.femto.density,
            alpha: cfg.femto.pathloss_exp,
            window: femto_window(cfg, spec)?,
            rule,
        })
    }

    fn interference(&self, rng: &mut ChaCha8Rng, exclusion: f64) -> f64 {
        match &self.rule {
            None => {
                let mean = self.density * PI * self.window * self.window;
                let n = Poisson::new(mean).expect("finite mean").sample(rng) as usize;
                let mut sum = 0.0;
                for _ in 0..n {
                    let r = self.window * rng.random::<f64>().sqrt();
                    let g = exp1(rng);
                    if r > exclusion {
                        sum += g * r.powf(-self.alpha);
                    }
                }
                sum + self.density * tail_mean(self.window, self.alpha)
            }
            Some(template) => {
                let rule = template.with_key(rng.next_u64());
                let parent = self.window + rule.cutoff();
                let mut pts = Vec::new();
                fill_ppp(rng, self.density, parent, &mut pts);
                let marks: Vec<f64> = (0..pts.len()).map(|_| rng.random::<f64>()).collect();
                let thinner = Thinner::new(&pts, &marks, parent, &rule);
                let mut sum = 0.0;
                let mut kept = 0usize;
                for (i, p) in pts.iter().enumerate() {
                    let d = p[0].hypot(p[1]);
                    if d > exclusion && d <= self.window && thinner.is_retained(i) {
                        kept += 1;
                        sum += exp1(rng) * d.powf(-self.alpha);
                    }
                }
                let area = PI * (self.window * self.window - exclusion * exclusion);
                sum + kept as f64 / area * tail_mean(self.window, self.alpha)
            }
        }
    }
}

/// Empirical MU outage: nearest-MBS link against thinned femto interference
/// beyond the guard radius.
pub fn simulate_outage_mu(
    cfg: &ScenarioConfig,
    spec: &SimSpec,
    rate: f64,
) -> Result<EstimateWithCI> {
    check_inputs(cfg, spec)?;
    if !(rate > 0.0) {
        return Err(Error::domain(
            "simulate_outage_mu",
            format!("rate = {rate}"),
        ));
    }
    let femto = FemtoField::new(cfg, spec)?;
    let wm = macro_window(cfg, spec);
    let lam_m = cfg.macro_tier.density;
    let nu_m = cfg.macro_tier.pathloss_exp;
    let scale = cfg.noma.receive_snr_m * cfg.transmit_snr_m * cfg.macro_tier.power;
    let phi = 2f64.powf(rate / cfg.noma.bandwidth_fraction_m) - 1.0;
    let guard = cfg.sensing.guard_radius;
    let rho_f = cfg.transmit_snr_f;

    let (hits, resampled) = run_blocks(
        spec,
        || (0u64, 0u64),
        |rng, acc| {
            let r = loop {
                let r = (exp1(rng) / (PI * lam_m)).sqrt();
                if r <= wm {
                    break r;
                }
                acc.1 += 1;
            };
            let signal = scale * exp1(rng) / (1.0 + r.powf(nu_m));
            let i_f = femto.interference(rng, guard);
            if signal < phi * (rho_f * i_f + 1.0) {
                acc.0 += 1;
            }
            Ok(())
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
        },
    )?;
    Ok(proportion(hits, spec.trials, spec.confidence, resampled))
}

/// Outage estimates for every ordered user index under both schemes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuEstimates {
    /// Index k−1 holds the k-th ordered user.
    pub noma: Vec<EstimateWithCI>,
    pub oma: Vec<EstimateWithCI>,
}

/// Empirical FU outage for all k and both schemes from one set of trials.
pub fn simulate_outage_fu_all(cfg: &ScenarioConfig, spec: &SimSpec) -> Result<FuEstimates> {
    check_inputs(cfg, spec)?;
    let femto = FemtoField::new(cfg, spec)?;
    let macro_field = MacroField::new(cfg, spec);
    let m = cfg.noma.num_users;
    let a = cfg.noma.power_factors.clone();
    let tails: Vec<f64> = (0..m).map(|j| a[j + 1..].iter().sum()).collect();
    let phi = 2f64.powf(cfg.noma.target_rate) - 1.0;
    let phi_oma = 2f64.powf(m as f64 * cfg.noma.target_rate) - 1.0;
    let scale = cfg.noma.receive_snr_f * cfg.transmit_snr_f * cfg.femto.power;
    let yf = cfg.femto.coverage_radius;
    let alpha = cfg.femto.pathloss_exp;
    let guard = cfg.sensing.guard_radius;
    let (rho_f, rho_m) = (cfg.transmit_snr_f, cfg.transmit_snr_m);

    let (noma, oma) = run_blocks(
        spec,
        || (vec![0u64; m], vec![0u64; m]),
        |rng, acc| {
            let mut gains: Vec<f64> = (0..m)
                .map(|_| {
                    let r = yf * rng.random::<f64>().sqrt();
                    exp1(rng) / (1.0 + r.powf(alpha))
                })
                .collect();
            gains.sort_by(|x, y| x.total_cmp(y));
            let i_m = macro_field.interference(rng, guard);
            let i_f = femto.interference(rng, yf);
            let d = rho_f * i_f + rho_m * i_m + 1.0;
            for (k, g) in gains.iter().enumerate() {
                let s = scale * g;
                if (0..=k).any(|j| s * a[j] < phi * (s * tails[j] + d)) {
                    acc.0[k] += 1;
                }
                if s < phi_oma * d {
                    acc.1[k] += 1;
                }
            }
            Ok(())
        },
        |x, y| {
            for k in 0..m {
                x.0[k] += y.0[k];
                x.1[k] += y.1[k];
            }
        },
    )?;
    let est = |v: Vec<u64>| {
        v.into_iter()
            .map(|h| proportion(h, spec.trials, spec.confidence, 0))
            .collect()
    };
    Ok(FuEstimates {
        noma: est(noma),
        oma: est(oma),
    })
}

pub fn simulate_outage_fu(
    cfg: &ScenarioConfig,
    spec: &SimSpec,
    k: usize,
    scheme: Scheme,
) -> Result<EstimateWithCI> {
    let m = cfg.noma.num_users;
    if k == 0 || k > m {
        return Err(Error::domain(
            "simulate_outage_fu",
            format!("k = {k}, M = {m}"),
        ));
    }
    let all = simulate_outage_fu_all(cfg, spec)?;
    Ok(match scheme {
        Scheme::Noma => all.noma[k - 1],
        Scheme::Oma => all.oma[k - 1],
    })
}

#[derive(Default)]
struct RetentionSums {
    kept: f64,
    count: f64,
    kept2: f64,
    count2: f64,
    cross: f64,
}

fn retention_sums(cfg: &ScenarioConfig, spec: &SimSpec) -> Result<(RetentionSums, f64)> {
    check_inputs(cfg, spec)?;
    let template = SensingRule::new(cfg, 0)?;
    let window = femto_window(cfg, spec)?;
    let parent = window + template.cutoff();
    let density = cfg.femto.density;
    let sums = run_blocks(
        spec,
        RetentionSums::default,
        |rng, acc| {
            let rule = template.with_key(rng.next_u64());
            let mut pts = Vec::new();
            fill_ppp(rng, density, parent, &mut pts);
            let marks: Vec<f64> = (0..pts.len()).map(|_| rng.random::<f64>()).collect();
            let thinner = Thinner::new(&pts, &marks, parent, &rule);
            let (mut n, mut k) = (0.0, 0.0);
            for (i, p) in pts.iter().enumerate() {
                if p[0].hypot(p[1]) <= window {
                    n += 1.0;
                    if thinner.is_retained(i) {
                        k += 1.0;
                    }
                }
            }
            acc.kept += k;
            acc.count += n;
            acc.kept2 += k * k;
            acc.count2 += n * n;
            acc.cross += k * n;
            Ok(())
        },
        |a, b| {
            a.kept += b.kept;
            a.count += b.count;
            a.kept2 += b.kept2;
            a.count2 += b.count2;
            a.cross += b.cross;
        },
    )?;
    Ok((sums, window))
}

/// Fraction of femto points that survive carrier sensing, pooled over trials.
pub fn simulate_retention(cfg: &ScenarioConfig, spec: &SimSpec) -> Result<EstimateWithCI> {
    let (s, _) = retention_sums(cfg, spec)?;
    let t = spec.trials as f64;
    if s.count == 0.0 {
        return Ok(EstimateWithCI {
            mean: 1.0,
            half_width: 0.0,
            trials_used: spec.trials,
            resampled: 0,
        });
    }
    let p = s.kept / s.count;
    // Ratio-estimator variance.
    let resid = (s.kept2 - 2.0 * p * s.cross + p * p * s.count2).max(0.0) / (t - 1.0).max(1.0);
    let se = (resid / t).sqrt() / (s.count / t);
    Ok(EstimateWithCI {
        mean: p,
        half_width: z_value(spec.confidence) * se,
        trials_used: spec.trials,
        resampled: 0,
    })
}

/// Intensity of the retained femto points per square metre.
pub fn simulate_retained_intensity(cfg: &ScenarioConfig, spec: &SimSpec) -> Result<EstimateWithCI> {
    let (s, window) = retention_sums(cfg, spec)?;
    let t = spec.trials as f64;
    let area = PI * window * window;
    let mean = s.kept / t;
    let var = (s.kept2 / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
    Ok(EstimateWithCI {
        mean: mean / area,
        half_width: z_value(spec.confidence) * (var / t).sqrt() / area,
        trials_used: spec.trials,
        resampled: 0,
    })
}

/// Biased-received-power association: femto wins minus the coverage truncation term.
pub fn simulate_offloading(cfg: &ScenarioConfig, spec: &SimSpec) -> Result<EstimateWithCI> {
    check_inputs(cfg, spec)?;
    let lam = cfg.macro_tier.density;
    let ym = cfg.macro_tier.coverage_radius;
    let yf = cfg.femto.coverage_radius;
    let (nu_m, nu_f) = (cfg.macro_tier.pathloss_exp, cfg.femto.pathloss_exp);
    let bm = cfg.macro_tier.bias * cfg.macro_tier.power;
    let bf = cfg.femto.bias * cfg.femto.power;
    let (sum, sum2) = run_blocks(
        spec,
        || (0i64, 0i64),
        |rng, acc| {
            let rm = (exp1(rng) / (PI * lam)).sqrt();
            let rf = yf * rng.random::<f64>().sqrt();
            let win = bf > 0.0 && bm * rm.powf(-nu_m) < bf * rf.powf(-nu_f);
            let v = win as i64 - (rm > ym) as i64;
            acc.0 += v;
            acc.1 += v * v;
            Ok(())
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
        },
    )?;
    let t = spec.trials as f64;
    let mean = sum as f64 / t;
    let var = (sum2 as f64 / t - mean * mean).max(0.0) * t / (t - 1.0).max(1.0);
    Ok(EstimateWithCI {
        mean: mean.clamp(0.0, 1.0),
        half_width: z_value(spec.confidence) * (var / t).sqrt(),
        trials_used: spec.trials,
        resampled: 0,
    })
}

/// Total outage assembled from simulated offloading, MU and FU outages.
/// The half-width adds the component half-widths, which over-covers.
pub fn simulate_total_outage(
    case: OutageCase,
    cfg: &ScenarioConfig,
    spec: &SimSpec,
    rate: f64,
    p: Option<f64>,
) -> Result<EstimateWithCI> {
    let mut cfg = cfg.clone();
    cfg.noma.target_rate = rate;
    let of = simulate_offloading(&cfg, spec)?;
    let mu = simulate_outage_mu(&cfg, spec, rate)?;
    let m = cfg.noma.num_users;
    let fu = match case {
        OutageCase::I => simulate_outage_fu_all(&single_user(&cfg), spec)?.noma[0],
        OutageCase::II => simulate_outage_fu_all(&cfg, spec)?.noma[m - 1],
        OutageCase::III => simulate_outage_fu_all(&cfg, spec)?.noma[0],
    };
    combine_total_outage(case, m, &of, &mu, &fu, p)
}

/// The configuration an offloaded user sees when it is served alone.
pub fn single_user(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut single = cfg.clone();
    single.noma.num_users = 1;
    single.noma.power_factors = vec![1.0];
    single
}

/// Combines component estimates into the total outage of `case`. `fu` is the
/// single-user estimate for case I, the last ordered user for case II and the
/// first for case III.
pub fn combine_total_outage(
    case: OutageCase,
    num_users: usize,
    of: &EstimateWithCI,
    mu: &EstimateWithCI,
    fu: &EstimateWithCI,
    p: Option<f64>,
) -> Result<EstimateWithCI> {
    let need_p =
        || p.ok_or_else(|| Error::domain("simulate_total_outage", "cases II and III need p"));
    let nc = |p: f64| {
        if num_users == 2 {
            nc_probability_closed(p)
        } else {
            nc_probability_general(p, num_users - 1, num_users, num_users)
        }
    };
    let share = match case {
        OutageCase::I => 1.0,
        OutageCase::II => nc(need_p()?)?,
        OutageCase::III => 1.0 - nc(need_p()?)?,
    };
    let mean = (1.0 - of.mean) * mu.mean + of.mean * share * fu.mean;
    let half = (1.0 - of.mean) * mu.half_width
        + of.half_width * (mu.mean - share * fu.mean).abs()
        + of.mean * share * fu.half_width;
    Ok(EstimateWithCI {
        mean: mean.clamp(0.0, 1.0),
        half_width: half,
        trials_used: mu.trials_used,
        resampled: mu.resampled,
    })
}
