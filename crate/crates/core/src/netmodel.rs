//! Scenario configuration and elementary channel functions.
//!
//! SNR-like quantities are stored linear. The JSON form accepts either a
//! linear key (`transmit_snr_f`) or a decibel key (`transmit_snr_f_db`) for
//! each of them, and every field is optional: missing fields keep the
//! Table I defaults returned by [`ScenarioConfig::default`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::specfun;

/// Bounded path loss 1/(1 + r^alpha).
pub fn path_loss(r: f64, alpha: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain("path_loss", format!("r = {r}")));
    }
    Ok(1.0 / (1.0 + r.powf(alpha)))
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("linear_to_db", format!("x = {x}")));
    }
    Ok(10.0 * x.log10())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierConfig {
    pub power: f64,
    pub density: f64,
    pub pathloss_exp: f64,
    pub coverage_radius: f64,
    pub bias: f64,
    pub noise_variance: f64,
}

impl TierConfig {
    pub fn macro_default() -> Self {
        Self {
            power: 40.0,
            density: 1e-4,
            pathloss_exp: 3.0,
            coverage_radius: 1000.0,
            bias: 1.0,
            noise_variance: 1.0,
        }
    }

    pub fn femto_default() -> Self {
        Self {
            power: 1.0,
            density: 1e-3,
            pathloss_exp: 4.0,
            coverage_radius: 5.0,
            bias: 1.0,
            noise_variance: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NomaConfig {
    pub num_users: usize,
    /// a_1 ≥ a_2 ≥ …; a_1 belongs to the weakest (cell-edge) user.
    pub power_factors: Vec<f64>,
    pub target_rate: f64,
    pub receive_snr_m: f64,
    pub receive_snr_f: f64,
    pub bandwidth_fraction_m: f64,
}

impl Default for NomaConfig {
    fn default() -> Self {
        Self {
            num_users: 2,
            power_factors: vec![0.8, 0.2],
            target_rate: 0.5,
            receive_snr_m: 1.0,
            receive_snr_f: 1.0,
            bandwidth_fraction_m: 0.5,
        }
    }
}

/// Argument of the sensing fade test as a function of distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SensingLaw {
    /// max(1, r)^α, the law whose neighbour probability integrates to the closed-form NSP.
    #[default]
    Clipped,
    /// 1 + r^α.
    Bounded,
    /// r^α.
    Unbounded,
}

impl SensingLaw {
    pub fn attenuation(self, r: f64, alpha: f64) -> f64 {
        match self {
            SensingLaw::Clipped => r.max(1.0).powf(alpha),
            SensingLaw::Bounded => 1.0 + r.powf(alpha),
            SensingLaw::Unbounded => r.powf(alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NeighborRule {
    /// Neighbour iff the faded sensing SNR exceeds the threshold.
    #[default]
    Sensed,
    /// Neighbour iff closer than the contention radius.
    Radius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingConfig {
    pub sense_threshold: f64,
    pub tail_eps: f64,
    pub guard_radius: f64,
    /// Overrides the derived contention radius when set.
    pub contention_radius: Option<f64>,
    pub law: SensingLaw,
    pub neighbor_rule: NeighborRule,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            sense_threshold: 1.0,
            tail_eps: 0.01,
            guard_radius: 2.0,
            contention_radius: None,
            law: SensingLaw::default(),
            neighbor_rule: NeighborRule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PointModel {
    /// Femto interferers form the unthinned Poisson process.
    #[serde(rename = "ppp", alias = "PPP")]
    Ppp,
    /// Femto interferers are the carrier-sensing survivors.
    #[default]
    #[serde(rename = "rpp", alias = "RPP")]
    Rpp,
}

/// Measure used for the co-tier Campbell exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CoTierKernel {
    /// 2πr dr, the planar intensity measure.
    #[default]
    Planar,
    /// dr, as printed in the closed form of the MU outage.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureOrders {
    pub macro_order: usize,
    pub femto_order: usize,
}

impl Default for QuadratureOrders {
    fn default() -> Self {
        Self {
            macro_order: 100,
            femto_order: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(rename = "macro")]
    pub macro_tier: TierConfig,
    pub femto: TierConfig,
    pub noma: NomaConfig,
    pub sensing: SensingConfig,
    pub transmit_snr_m: f64,
    pub transmit_snr_f: f64,
    pub model: PointModel,
    pub co_tier_kernel: CoTierKernel,
    pub quadrature: QuadratureOrders,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            macro_tier: TierConfig::macro_default(),
            femto: TierConfig::femto_default(),
            noma: NomaConfig::default(),
            sensing: SensingConfig::default(),
            transmit_snr_m: db_to_linear(16.0),
            transmit_snr_f: 1.0,
            model: PointModel::default(),
            co_tier_kernel: CoTierKernel::default(),
            quadrature: QuadratureOrders::default(),
        }
    }
}

impl ScenarioConfig {
    /// (ρ_f ln(1/ε) / T_B)^{1/α_f}, without the >1 check.
    pub fn derived_contention_radius(&self) -> Result<f64> {
        let t = specfun::rayleigh_power_tail_inverse(self.sensing.tail_eps)?;
        Ok((self.transmit_snr_f * t / self.sensing.sense_threshold)
            .powf(1.0 / self.femto.pathloss_exp))
    }

    /// MU decoding threshold 2^{R/α_m} − 1.
    pub fn mu_threshold(&self) -> f64 {
        2f64.powf(self.noma.target_rate / self.noma.bandwidth_fraction_m) - 1.0
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        validate(self)
    }

    /// Parses a JSON document, merging it over the defaults, then validates.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json_value(value)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let file: ScenarioFile =
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        let mut cfg = ScenarioConfig::default();
        file.apply(&mut cfg)?;
        validate(&cfg).map_err(Error::InvalidConfig)?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn positive(v: &mut Vec<Violation>, path: &str, x: f64) {
    if !(x > 0.0) || !x.is_finite() {
        v.push(Violation::new(
            path,
            format!("must be positive and finite (got {x})"),
        ));
    }
}

fn check_tier(v: &mut Vec<Violation>, tier: &str, t: &TierConfig) {
    positive(v, &format!("{tier}.power"), t.power);
    positive(v, &format!("{tier}.density"), t.density);
    positive(v, &format!("{tier}.coverage_radius"), t.coverage_radius);
    positive(v, &format!("{tier}.noise_variance"), t.noise_variance);
    if !(t.pathloss_exp > 2.0) || !t.pathloss_exp.is_finite() {
        v.push(Violation::new(
            format!("{tier}.pathloss_exp"),
            format!("must exceed 2 (got {})", t.pathloss_exp),
        ));
    }
    if !(t.bias >= 0.0) || !t.bias.is_finite() {
        v.push(Violation::new(
            format!("{tier}.bias"),
            format!("must be non-negative (got {})", t.bias),
        ));
    }
}

/// Every violated invariant, each with the dotted path of the offending field.
pub fn validate(cfg: &ScenarioConfig) -> std::result::Result<(), Vec<Violation>> {
    let mut v = Vec::new();
    check_tier(&mut v, "macro", &cfg.macro_tier);
    check_tier(&mut v, "femto", &cfg.femto);

    let n = &cfg.noma;
    if n.num_users == 0 {
        v.push(Violation::new("noma.num_users", "must be at least 1"));
    }
    if n.power_factors.len() != n.num_users {
        v.push(Violation::new(
            "noma.power_factors",
            format!(
                "has {} entries but num_users is {}",
                n.power_factors.len(),
                n.num_users
            ),
        ));
    }
    for (i, a) in n.power_factors.iter().enumerate() {
        if !(*a > 0.0 && *a <= 1.0) {
            v.push(Violation::new(
                format!("noma.power_factors[{i}]"),
                format!("must lie in (0, 1] (got {a})"),
            ));
        }
    }
    if n.power_factors.windows(2).any(|w| w[0] < w[1]) {
        v.push(Violation::new(
            "noma.power_factors",
            "power_factors not non-increasing",
        ));
    }
    let sum: f64 = n.power_factors.iter().sum();
    if sum > 1.0 + 1e-12 {
        v.push(Violation::new(
            "noma.power_factors",
            format!("sum {sum} exceeds 1"),
        ));
    }
    positive(&mut v, "noma.target_rate", n.target_rate);
    positive(&mut v, "noma.receive_snr_m", n.receive_snr_m);
    positive(&mut v, "noma.receive_snr_f", n.receive_snr_f);
    if !(n.bandwidth_fraction_m > 0.0 && n.bandwidth_fraction_m <= 1.0) {
        v.push(Violation::new(
            "noma.bandwidth_fraction_m",
            format!("must lie in (0, 1] (got {})", n.bandwidth_fraction_m),
        ));
    }

    let s = &cfg.sensing;
    positive(&mut v, "sensing.sense_threshold", s.sense_threshold);
    if !(s.tail_eps > 0.0 && s.tail_eps < 1.0) {
        v.push(Violation::new(
            "sensing.tail_eps",
            format!("must lie in (0, 1) (got {})", s.tail_eps),
        ));
    }
    if !(s.guard_radius > 1.0) || !s.guard_radius.is_finite() {
        v.push(Violation::new(
            "sensing.guard_radius",
            format!("guard_radius must exceed 1 (got {})", s.guard_radius),
        ));
    }
    positive(&mut v, "transmit_snr_m", cfg.transmit_snr_m);
    positive(&mut v, "transmit_snr_f", cfg.transmit_snr_f);

    let rc = match s.contention_radius {
        Some(r) => Some(r),
        None if v.is_empty() => cfg.derived_contention_radius().ok(),
        None => None,
    };
    if let Some(r) = rc {
        if !(r > 1.0) || !r.is_finite() {
            v.push(Violation::new(
                "sensing.contention_radius",
                format!("contention radius must exceed 1 (got {r})"),
            ));
        }
    }

    if cfg.quadrature.macro_order == 0 {
        v.push(Violation::new(
            "quadrature.macro_order",
            "must be at least 1",
        ));
    }
    if cfg.quadrature.femto_order == 0 {
        v.push(Violation::new(
            "quadrature.femto_order",
            "must be at least 1",
        ));
    }

    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TierFile {
    power: Option<f64>,
    density: Option<f64>,
    pathloss_exp: Option<f64>,
    coverage_radius: Option<f64>,
    bias: Option<f64>,
    noise_variance: Option<f64>,
}

impl TierFile {
    fn apply(self, t: &mut TierConfig) {
        set(&mut t.power, self.power);
        set(&mut t.density, self.density);
        set(&mut t.pathloss_exp, self.pathloss_exp);
        set(&mut t.coverage_radius, self.coverage_radius);
        set(&mut t.bias, self.bias);
        set(&mut t.noise_variance, self.noise_variance);
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NomaFile {
    num_users: Option<usize>,
    power_factors: Option<Vec<f64>>,
    target_rate: Option<f64>,
    receive_snr_m: Option<f64>,
    receive_snr_m_db: Option<f64>,
    receive_snr_f: Option<f64>,
    receive_snr_f_db: Option<f64>,
    bandwidth_fraction_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensingFile {
    sense_threshold: Option<f64>,
    sense_threshold_db: Option<f64>,
    tail_eps: Option<f64>,
    guard_radius: Option<f64>,
    contention_radius: Option<f64>,
    law: Option<SensingLaw>,
    neighbor_rule: Option<NeighborRule>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadratureFile {
    macro_order: Option<usize>,
    femto_order: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(rename = "macro")]
    macro_tier: Option<TierFile>,
    femto: Option<TierFile>,
    noma: Option<NomaFile>,
    sensing: Option<SensingFile>,
    transmit_snr_m: Option<f64>,
    transmit_snr_m_db: Option<f64>,
    transmit_snr_f: Option<f64>,
    transmit_snr_f_db: Option<f64>,
    model: Option<PointModel>,
    co_tier_kernel: Option<CoTierKernel>,
    quadrature: Option<QuadratureFile>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_snr(slot: &mut f64, key: &str, linear: Option<f64>, db: Option<f64>) -> Result<()> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(Error::Parse(format!(
            "{key}: give either the linear or the _db form, not both"
        ))),
        (Some(x), None) => {
            *slot = x;
            Ok(())
        }
        (None, Some(d)) => {
            *slot = db_to_linear(d);
            Ok(())
        }
        (None, None) => Ok(()),
    }
}

impl ScenarioFile {
    fn apply(self, cfg: &mut ScenarioConfig) -> Result<()> {
        if let Some(t) = self.macro_tier {
            t.apply(&mut cfg.macro_tier);
        }
        if let Some(t) = self.femto {
            t.apply(&mut cfg.femto);
        }
        if let Some(n) = self.noma {
            let c = &mut cfg.noma;
            set(&mut c.num_users, n.num_users);
            set(&mut c.power_factors, n.power_factors);
            set(&mut c.target_rate, n.target_rate);
            set(&mut c.bandwidth_fraction_m, n.bandwidth_fraction_m);
            set_snr(
                &mut c.receive_snr_m,
                "noma.receive_snr_m",
                n.receive_snr_m,
                n.receive_snr_m_db,
            )?;
            set_snr(
                &mut c.receive_snr_f,
                "noma.receive_snr_f",
                n.receive_snr_f,
                n.receive_snr_f_db,
            )?;
        }
        if let Some(s) = self.sensing {
            let c = &mut cfg.sensing;
            set_snr(
                &mut c.sense_threshold,
                "sensing.sense_threshold",
                s.sense_threshold,
                s.sense_threshold_db,
            )?;
            set(&mut c.tail_eps, s.tail_eps);
            set(&mut c.guard_radius, s.guard_radius);
            if s.contention_radius.is_some() {
                c.contention_radius = s.contention_radius;
            }
            set(&mut c.law, s.law);
            set(&mut c.neighbor_rule, s.neighbor_rule);
        }
        set_snr(
            &mut cfg.transmit_snr_m,
            "transmit_snr_m",
            self.transmit_snr_m,
            self.transmit_snr_m_db,
        )?;
        set_snr(
            &mut cfg.transmit_snr_f,
            "transmit_snr_f",
            self.transmit_snr_f,
            self.transmit_snr_f_db,
        )?;
        set(&mut cfg.model, self.model);
        set(&mut cfg.co_tier_kernel, self.co_tier_kernel);
        if let Some(q) = self.quadrature {
            set(&mut cfg.quadrature.macro_order, q.macro_order);
            set(&mut cfg.quadrature.femto_order, q.femto_order);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(path_loss(1.0, 4.0).unwrap(), 0.5);
        assert!((path_loss(2.0, 3.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(path_loss(-0.1, 3.0).is_err());
    }

    #[test]
    fn decibels() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(16.0) - 39.810_717_055_349_72).abs() < 1e-10);
        assert!((linear_to_db(db_to_linear(7.3)).unwrap() - 7.3).abs() < 1e-12);
        assert!(linear_to_db(0.0).is_err());
    }

    #[test]
    fn defaults_are_valid() {
        assert_eq!(ScenarioConfig::default().validate(), Ok(()));
    }

    #[test]
    fn reports_increasing_factors_and_small_guard() {
        let mut cfg = ScenarioConfig::default();
        cfg.noma.power_factors = vec![0.2, 0.8];
        cfg.sensing.guard_radius = 0.5;
        let v = cfg.validate().unwrap_err();
        assert!(v.iter().any(|x| x.path == "noma.power_factors"
            && x.message.contains("power_factors not non-increasing")));
        assert!(v.iter().any(|x| x.path == "sensing.guard_radius"
            && x.message.contains("guard_radius must exceed 1")));
    }

    #[test]
    fn json_merges_over_defaults() {
        let cfg = ScenarioConfig::from_json_str(
            r#"{"femto": {"density": 0.1}, "transmit_snr_f_db": 10, "model": "PPP"}"#,
        )
        .unwrap();
        assert_eq!(cfg.femto.density, 0.1);
        assert!((cfg.transmit_snr_f - 10.0).abs() < 1e-12);
        assert_eq!(cfg.model, PointModel::Ppp);
        assert_eq!(cfg.macro_tier, TierConfig::macro_default());
    }

    #[test]
    fn json_rejects_unknown_and_double_keys() {
        assert!(matches!(
            ScenarioConfig::from_json_str(r#"{"femto": {"densty": 0.1}}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_json_str(r#"{"transmit_snr_f": 1, "transmit_snr_f_db": 0}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_json_str(r#"{"sensing": {"guard_radius": 0.5}}"#),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn round_trip_serialization() {
        let cfg = ScenarioConfig::default();
        let back = ScenarioConfig::from_json_str(&cfg.to_json_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
