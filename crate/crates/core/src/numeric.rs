//! Adaptive integration on top of double-exponential quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 24;

/// ∫_a^b f with absolute error at most `tol`; bisects whenever a panel's
/// error estimate is above its share of the budget.
pub fn integrate<F>(op: &'static str, f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    panel(op, &f, a, b, tol, 0)
}

fn panel<F>(op: &'static str, f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let out = quadrature::double_exponential::integrate(f, a, b, tol);
    if out.error_estimate <= tol && out.integral.is_finite() {
        return Ok(out.integral);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature {
            op,
            estimate: out.error_estimate,
            tolerance: tol,
        });
    }
    let m = 0.5 * (a + b);
    Ok(panel(op, f, a, m, 0.5 * tol, depth + 1)? + panel(op, f, m, b, 0.5 * tol, depth + 1)?)
}

/// ∫_a^∞ f via r = a + t/(1−t), split into a few panels.
pub fn integrate_to_infinity<F>(op: &'static str, f: F, a: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        f(a + t / u) / (u * u)
    };
    let cuts = [0.0, 0.5, 0.9, 0.99, 0.999, 1.0];
    let share = tol / (cuts.len() - 1) as f64;
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        sum += integrate(op, g, w[0], w[1], share)?;
    }
    Ok(sum)
}
