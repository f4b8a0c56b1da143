//! Parameter sweeps over a scenario, evaluated analytically, by simulation
//! or both, and written as CSV.

use std::collections::BTreeMap;
use std::io::Write;

use nomanet_core::analytic::{
    build_quadrature, offloading_probability, outage_fu_noma, outage_fu_oma, outage_mu,
    total_outage,
};
use nomanet_core::geometry::retention_probability;
use nomanet_core::montecarlo::{
    combine_total_outage, simulate_offloading, simulate_outage_fu_all, simulate_outage_mu,
    simulate_retention, single_user, FuEstimates,
};
use nomanet_core::{EstimateWithCI, OutageCase, ScenarioConfig, Scheme, SimSpec, TierKind};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 5] = [
    "axis_value",
    "curve_name",
    "engine",
    "probability",
    "ci_half_width",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Montecarlo,
    Both,
}

impl Engine {
    fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    fn montecarlo(self) -> bool {
        matches!(self, Engine::Montecarlo | Engine::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Outage of a macro user that is never offloaded.
    OutageMu,
    /// Outage of the k-th ordered femto user; without k the mean over users.
    OutageFu,
    TotalOutage,
    Offloading,
    Retention,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub name: String,
    pub quantity: Quantity,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub case: Option<OutageCase>,
    #[serde(default)]
    pub p: Option<f64>,
    /// Scenario overrides applied on top of the sweep's base.
    #[serde(default)]
    pub set: Map<String, Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path of the swept scenario field, e.g. `transmit_snr_f_db`.
    pub axis: String,
    pub values: Vec<f64>,
    pub curves: Vec<Curve>,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default)]
    pub base: Map<String, Value>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_engine() -> Engine {
    Engine::Both
}

/// Command-line overrides of the sweep file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub engine: Option<Engine>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis_value: f64,
    pub curve: String,
    pub engine: &'static str,
    pub probability: f64,
    pub ci_half_width: Option<f64>,
}

impl SweepSpec {
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        let spec: SweepSpec =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("sweep file: {e}")))?;
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> CliResult<()> {
        if self.values.is_empty() {
            return Err(CliError::Config("sweep values must not be empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite())
            || self.values.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(CliError::Config(
                "sweep values must be finite and strictly increasing".into(),
            ));
        }
        if self.curves.is_empty() {
            return Err(CliError::Config("sweep needs at least one curve".into()));
        }
        if self.axis.is_empty() || self.axis.split('.').any(str::is_empty) {
            return Err(CliError::Config(format!(
                "axis `{}` is not a field path",
                self.axis
            )));
        }
        for c in &self.curves {
            let needs_p = matches!(c.case, Some(OutageCase::II | OutageCase::III));
            match c.quantity {
                Quantity::TotalOutage if c.case.is_none() => {
                    return Err(CliError::Config(format!(
                        "curve `{}`: total_outage needs a case",
                        c.name
                    )));
                }
                Quantity::TotalOutage if needs_p && c.p.is_none() => {
                    return Err(CliError::Config(format!(
                        "curve `{}`: cases II and III need p",
                        c.name
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Merges `patch` into `doc`. A key and its `_db` twin replace each other.
pub fn merge(doc: &mut Map<String, Value>, patch: &Map<String, Value>) {
    for (key, value) in patch {
        match (doc.get_mut(key), value) {
            (Some(Value::Object(inner)), Value::Object(p)) => merge(inner, p),
            _ => {
                let twin = match key.strip_suffix("_db") {
                    Some(linear) => linear.to_string(),
                    None => format!("{key}_db"),
                };
                doc.remove(&twin);
                doc.insert(key.clone(), value.clone());
            }
        }
    }
}

fn set_path(doc: &mut Map<String, Value>, path: &str, value: f64) {
    let mut patch = Map::new();
    let parts: Vec<&str> = path.split('.').collect();
    let mut leaf = Value::from(value);
    for part in parts.iter().rev() {
        let mut m = Map::new();
        m.insert(part.to_string(), leaf);
        leaf = Value::Object(m);
    }
    if let Value::Object(m) = leaf {
        patch = m;
    }
    merge(doc, &patch);
}

/// The scenario of `curve` at one axis value.
pub fn resolve(
    config: &Map<String, Value>,
    spec: &SweepSpec,
    curve: &Curve,
    value: f64,
) -> CliResult<ScenarioConfig> {
    let mut doc = config.clone();
    merge(&mut doc, &spec.base);
    merge(&mut doc, &curve.set);
    set_path(&mut doc, &spec.axis, value);
    ScenarioConfig::from_json_value(Value::Object(doc)).map_err(|e| {
        CliError::Config(format!(
            "curve `{}` at {} = {value}: {e}",
            curve.name, spec.axis
        ))
    })
}

fn analytic_point(cfg: &ScenarioConfig, curve: &Curve) -> CliResult<f64> {
    let m = cfg.noma.num_users;
    let femto = || build_quadrature(cfg.quadrature.femto_order, &cfg.femto, TierKind::Femto);
    let fu = |k: usize| -> CliResult<f64> {
        let q = femto()?;
        Ok(match curve.scheme.unwrap_or(Scheme::Noma) {
            Scheme::Noma => outage_fu_noma(cfg, &q, k)?.probability,
            Scheme::Oma => outage_fu_oma(cfg, &q, k)?.probability,
        })
    };
    Ok(match curve.quantity {
        Quantity::OutageMu => {
            let q = build_quadrature(cfg.quadrature.macro_order, &cfg.macro_tier, TierKind::Macro)?;
            outage_mu(cfg, &q, cfg.noma.target_rate)?.probability
        }
        Quantity::OutageFu => match curve.k {
            Some(k) => fu(k)?,
            None => (1..=m).map(fu).sum::<CliResult<f64>>()? / m as f64,
        },
        Quantity::TotalOutage => {
            let case = curve.case.expect("checked when parsed");
            total_outage(case, cfg, cfg.noma.target_rate, curve.p)?.probability
        }
        Quantity::Offloading => offloading_probability(cfg)?,
        Quantity::Retention => retention_probability(cfg)?,
    })
}

/// One simulation whose result several curves may share.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SimKey {
    Mu(String),
    Fu(String),
    Offloading(String),
    Retention(String),
}

#[derive(Debug, Clone)]
enum SimValue {
    Single(EstimateWithCI),
    Fu(FuEstimates),
}

fn key_of(cfg: &ScenarioConfig) -> String {
    cfg.to_json_string()
}

fn sim_keys(cfg: &ScenarioConfig, curve: &Curve) -> Vec<SimKey> {
    match curve.quantity {
        Quantity::OutageMu => vec![SimKey::Mu(key_of(cfg))],
        Quantity::OutageFu => vec![SimKey::Fu(key_of(cfg))],
        Quantity::Offloading => vec![SimKey::Offloading(key_of(cfg))],
        Quantity::Retention => vec![SimKey::Retention(key_of(cfg))],
        Quantity::TotalOutage => {
            let fu_cfg = match curve.case {
                Some(OutageCase::I) => single_user(cfg),
                _ => cfg.clone(),
            };
            vec![
                SimKey::Offloading(key_of(cfg)),
                SimKey::Mu(key_of(cfg)),
                SimKey::Fu(key_of(&fu_cfg)),
            ]
        }
    }
}

fn run_sim(key: &SimKey, spec: &SimSpec) -> CliResult<SimValue> {
    let parse = |s: &str| ScenarioConfig::from_json_str(s).map_err(CliError::from);
    Ok(match key {
        SimKey::Mu(c) => {
            let cfg = parse(c)?;
            SimValue::Single(simulate_outage_mu(&cfg, spec, cfg.noma.target_rate)?)
        }
        SimKey::Fu(c) => SimValue::Fu(simulate_outage_fu_all(&parse(c)?, spec)?),
        SimKey::Offloading(c) => SimValue::Single(simulate_offloading(&parse(c)?, spec)?),
        SimKey::Retention(c) => SimValue::Single(simulate_retention(&parse(c)?, spec)?),
    })
}

fn single(v: &SimValue) -> EstimateWithCI {
    match v {
        SimValue::Single(e) => *e,
        SimValue::Fu(_) => unreachable!("keyed as a single estimate"),
    }
}

fn fu_set(v: &SimValue) -> &FuEstimates {
    match v {
        SimValue::Fu(f) => f,
        SimValue::Single(_) => unreachable!("keyed as a femto estimate set"),
    }
}

fn mc_point(
    cfg: &ScenarioConfig,
    curve: &Curve,
    done: &BTreeMap<SimKey, SimValue>,
) -> CliResult<EstimateWithCI> {
    let keys = sim_keys(cfg, curve);
    let m = cfg.noma.num_users;
    Ok(match curve.quantity {
        Quantity::OutageMu | Quantity::Offloading | Quantity::Retention => single(&done[&keys[0]]),
        Quantity::OutageFu => {
            let all = fu_set(&done[&keys[0]]);
            let per_user = match curve.scheme.unwrap_or(Scheme::Noma) {
                Scheme::Noma => &all.noma,
                Scheme::Oma => &all.oma,
            };
            match curve.k {
                Some(k) => *per_user.get(k.wrapping_sub(1)).ok_or_else(|| {
                    CliError::Config(format!("curve `{}`: k = {k} but M = {m}", curve.name))
                })?,
                None => {
                    let n = per_user.len() as f64;
                    EstimateWithCI {
                        mean: per_user.iter().map(|e| e.mean).sum::<f64>() / n,
                        half_width: per_user.iter().map(|e| e.half_width).sum::<f64>() / n,
                        trials_used: per_user[0].trials_used,
                        resampled: 0,
                    }
                }
            }
        }
        Quantity::TotalOutage => {
            let case = curve.case.expect("checked when parsed");
            let of = single(&done[&keys[0]]);
            let mu = single(&done[&keys[1]]);
            let fus = fu_set(&done[&keys[2]]);
            let fu = match case {
                OutageCase::I => fus.noma[0],
                OutageCase::II => fus.noma[m - 1],
                OutageCase::III => fus.noma[0],
            };
            combine_total_outage(case, m, &of, &mu, &fu, curve.p)?
        }
    })
}

/// Evaluates every (curve, axis value, engine) row. Rows come back ordered by
/// curve position in the sweep file, then axis value, then engine.
pub fn run_sweep(
    config: &Map<String, Value>,
    spec: &SweepSpec,
    opts: &RunOptions,
) -> CliResult<Vec<Row>> {
    let engine = opts.engine.unwrap_or(spec.engine);
    let mut sim = SimSpec::default();
    if let Some(t) = opts.trials.or(spec.trials) {
        sim.trials = t;
    }
    if let Some(s) = opts.seed.or(spec.seed) {
        sim.seed = s;
    }

    let mut points = Vec::new();
    for (ci, curve) in spec.curves.iter().enumerate() {
        for (vi, &v) in spec.values.iter().enumerate() {
            points.push((ci, vi, resolve(config, spec, curve, v)?));
        }
    }

    let mut rows: Vec<(usize, usize, u8, Row)> = Vec::new();
    if engine.analytic() {
        let found: Vec<CliResult<(usize, usize, u8, Row)>> = points
            .par_iter()
            .map(|(ci, vi, cfg)| {
                let curve = &spec.curves[*ci];
                let p = analytic_point(cfg, curve)
                    .map_err(|e| tag(e, &curve.name, spec.values[*vi]))?;
                Ok((
                    *ci,
                    *vi,
                    0,
                    row(spec.values[*vi], curve, "analytic", p, None),
                ))
            })
            .collect();
        for r in found {
            rows.push(r?);
        }
    }
    if engine.montecarlo() {
        let mut keys: Vec<SimKey> = points
            .iter()
            .flat_map(|(ci, _, cfg)| sim_keys(cfg, &spec.curves[*ci]))
            .collect();
        keys.sort();
        keys.dedup();
        log::info!(
            "running {} distinct simulations at {} trials",
            keys.len(),
            sim.trials
        );
        let results: Vec<CliResult<(SimKey, SimValue)>> = keys
            .into_par_iter()
            .map(|k| run_sim(&k, &sim).map(|v| (k, v)))
            .collect();
        let mut done = BTreeMap::new();
        for r in results {
            let (k, v) = r?;
            done.insert(k, v);
        }
        for (ci, vi, cfg) in &points {
            let curve = &spec.curves[*ci];
            let e =
                mc_point(cfg, curve, &done).map_err(|e| tag(e, &curve.name, spec.values[*vi]))?;
            rows.push((
                *ci,
                *vi,
                1,
                row(
                    spec.values[*vi],
                    curve,
                    "montecarlo",
                    e.mean,
                    Some(e.half_width),
                ),
            ));
        }
    }
    rows.sort_by_key(|r| (r.0, r.1, r.2));
    Ok(rows.into_iter().map(|r| r.3).collect())
}

fn row(axis_value: f64, curve: &Curve, engine: &'static str, p: f64, hw: Option<f64>) -> Row {
    Row {
        axis_value,
        curve: curve.name.clone(),
        engine,
        probability: p,
        ci_half_width: hw,
    }
}

fn tag(e: CliError, curve: &str, value: f64) -> CliError {
    match e {
        CliError::Numeric(m) => CliError::Numeric(format!("curve `{curve}` at {value}: {m}")),
        other => other,
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.axis_value.to_string(),
            r.curve.clone(),
            r.engine.to_string(),
            r.probability.to_string(),
            r.ci_half_width.map(|h| h.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
