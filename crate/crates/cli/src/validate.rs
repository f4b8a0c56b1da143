//! Analytic expressions checked against their numeric or simulated
//! counterparts for one scenario.

use std::io::Write;

use nomanet_core::analytic::{
    build_quadrature, nc_probability_closed, nc_probability_general, offloading_probability_closed,
    offloading_probability_numeric, outage_fu_noma, outage_fu_oma, outage_mu,
};
use nomanet_core::geometry::{nsp_closed, nsp_numeric, retention_probability};
use nomanet_core::montecarlo::{
    simulate_offloading, simulate_outage_fu_all, simulate_outage_mu, simulate_retention,
};
use nomanet_core::{Error, ScenarioConfig, SimSpec, TierKind};

use crate::error::{CliError, CliResult};

/// Trials per simulated check unless overridden.
pub const DEFAULT_TRIALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    /// Allowed deviation before scaling, including any confidence half-width.
    pub tolerance: f64,
    pub measure: Measure,
}

impl Check {
    pub fn error(&self) -> f64 {
        let d = (self.value - self.reference).abs();
        match self.measure {
            Measure::Absolute => d,
            Measure::Relative => d / self.reference.abs(),
        }
    }

    pub fn passes(&self, scale: f64) -> bool {
        self.error() <= self.tolerance * scale
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub trials: usize,
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 1,
            tolerance_scale: 1.0,
        }
    }
}

fn abs(name: String, value: f64, reference: f64, tolerance: f64) -> Check {
    Check {
        name,
        value,
        reference,
        tolerance,
        measure: Measure::Absolute,
    }
}

fn rel(name: String, value: f64, reference: f64, tolerance: f64) -> Check {
    Check {
        name,
        value,
        reference,
        tolerance,
        measure: Measure::Relative,
    }
}

/// Runs every check. Fails only if a computation fails, never on a breach.
pub fn run_checks(cfg: &ScenarioConfig, opts: &ValidateOptions) -> CliResult<Vec<Check>> {
    let sim = SimSpec::with_trials(opts.trials, opts.seed);
    let mut out = Vec::new();

    match (nsp_closed(cfg), nsp_numeric(cfg)) {
        (Ok(c), Ok(n)) => out.push(rel("nsp closed vs numeric".into(), c, n, 1e-8)),
        (Err(Error::ContentionRadius(_)), _) => {
            log::warn!("skipping sensing checks: contention radius does not exceed 1")
        }
        (Err(e), _) | (_, Err(e)) => return Err(e.into()),
    }
    if let Ok(p) = retention_probability(cfg) {
        let e = simulate_retention(cfg, &sim)?;
        out.push(abs("retention closed vs simulated".into(), p, e.mean, 0.01));
    }

    for p in [0.1, 0.5, 0.8] {
        out.push(abs(
            format!("nc p={p} closed vs general"),
            nc_probability_closed(p)?,
            nc_probability_general(p, 1, 2, 2)?,
            1e-9,
        ));
    }

    let numeric = offloading_probability_numeric(cfg)?;
    match offloading_probability_closed(cfg) {
        Ok(c) => out.push(rel("offloading closed vs numeric".into(), c, numeric, 1e-6)),
        Err(Error::UnsupportedExponents { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    let e = simulate_offloading(cfg, &sim)?;
    out.push(abs(
        "offloading numeric vs simulated".into(),
        numeric,
        e.mean,
        e.half_width + 0.01,
    ));

    let femto_q = build_quadrature(cfg.quadrature.femto_order, &cfg.femto, TierKind::Femto)?;
    let m = cfg.noma.num_users;

    // Without interferers the OMA outage is the ordered gain CDF itself.
    let mut quiet = cfg.clone();
    quiet.macro_tier.density = 1e-15;
    quiet.femto.density = 1e-15;
    let quiet_sim = simulate_outage_fu_all(&quiet, &sim)?;
    for k in 1..=m {
        let a = outage_fu_oma(&quiet, &femto_q, k)?.probability;
        let e = quiet_sim.oma[k - 1];
        out.push(abs(
            format!("ordered gain cdf k={k}"),
            a,
            e.mean,
            e.half_width + 0.01,
        ));
    }

    let macro_q = build_quadrature(cfg.quadrature.macro_order, &cfg.macro_tier, TierKind::Macro)?;
    let rate = cfg.noma.target_rate;
    let e = simulate_outage_mu(cfg, &sim, rate)?;
    let a = outage_mu(cfg, &macro_q, rate)?.probability;
    out.push(abs(
        "outage mu vs simulated".into(),
        a,
        e.mean,
        e.half_width + 0.03,
    ));

    let fu = simulate_outage_fu_all(cfg, &sim)?;
    for k in 1..=m {
        let a = outage_fu_noma(cfg, &femto_q, k)?.probability;
        let e = fu.noma[k - 1];
        out.push(abs(
            format!("outage fu k={k} vs simulated"),
            a,
            e.mean,
            e.half_width + 0.05,
        ));
    }
    Ok(out)
}

/// Prints one line per check and returns the number of breaches.
pub fn report<W: Write>(checks: &[Check], scale: f64, mut w: W) -> CliResult<usize> {
    let mut breaches = 0;
    for c in checks {
        let ok = c.passes(scale);
        if !ok {
            breaches += 1;
        }
        let kind = match c.measure {
            Measure::Absolute => "abs",
            Measure::Relative => "rel",
        };
        writeln!(
            w,
            "{} {}: {:.6e} vs {:.6e} ({kind} error {:.3e}, tolerance {:.3e})",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.reference,
            c.error(),
            c.tolerance * scale,
        )?;
    }
    writeln!(
        w,
        "{} of {} checks passed",
        checks.len() - breaches,
        checks.len()
    )?;
    Ok(breaches)
}

pub fn write_summary<W: Write>(checks: &[Check], scale: f64, out: W) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record([
        "check",
        "value",
        "reference",
        "error",
        "tolerance",
        "verdict",
    ])?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            c.value.to_string(),
            c.reference.to_string(),
            c.error().to_string(),
            (c.tolerance * scale).to_string(),
            if c.passes(scale) { "pass" } else { "fail" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs and prints every check, returning them with the breach count.
pub fn validate_report<W: Write>(
    cfg: &ScenarioConfig,
    opts: &ValidateOptions,
    w: W,
) -> CliResult<(Vec<Check>, usize)> {
    if !(opts.tolerance_scale >= 0.0) {
        return Err(CliError::Config(format!(
            "--tolerance-scale must be non-negative (got {})",
            opts.tolerance_scale
        )));
    }
    let checks = run_checks(cfg, opts)?;
    let breaches = report(&checks, opts.tolerance_scale, w)?;
    Ok((checks, breaches))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_and_absolute_errors() {
        let c = rel("x".into(), 1.1, 1.0, 0.2);
        assert!((c.error() - 0.1).abs() < 1e-12);
        assert!(c.passes(1.0) && !c.passes(0.4));
        let c = abs("y".into(), 0.3, 0.5, 0.25);
        assert!(c.passes(1.0) && !c.passes(0.5));
    }

    #[test]
    fn report_counts_breaches() {
        let checks = vec![
            abs("a".into(), 0.0, 0.1, 0.2),
            abs("b".into(), 0.0, 0.3, 0.2),
        ];
        let mut text = Vec::new();
        assert_eq!(report(&checks, 1.0, &mut text).unwrap(), 1);
        let text = String::from_utf8(text).unwrap();
        assert!(text.starts_with("PASS a"));
        assert!(text.contains("FAIL b"));
    }
}
