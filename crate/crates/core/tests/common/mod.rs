//! Test-only oracles kept independent of the library's integration code.

#![allow(dead_code)]

/// Adaptive Simpson integration with Richardson correction.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integral to a relative tolerance, using a coarse pass to set the scale.
pub fn simpson_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    let n = 2000;
    let h = (b - a) / n as f64;
    let mut coarse = f(a) + f(b);
    for i in 1..n {
        coarse += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    coarse *= h / 3.0;
    let scale = coarse.abs().max(f64::MIN_POSITIVE);
    simpson(f, a, b, rel * scale)
}

/// Γ(x) from its defining integral.
pub fn gamma(x: f64) -> f64 {
    if x < 1.0 {
        // t = u^{1/x} removes the endpoint singularity.
        let upper = 60f64.powf(x);
        simpson_rel(|u: f64| (-u.powf(1.0 / x)).exp() / x, 0.0, upper, 1e-13)
    } else {
        let upper = x + 60.0 + 10.0 * x.sqrt();
        simpson_rel(|t: f64| (-t).exp() * t.powf(x - 1.0), 0.0, upper, 1e-13)
    }
}

/// Γ(a, x) for x > 0 from its defining integral.
pub fn gamma_upper(a: f64, x: f64) -> f64 {
    let upper = x + 60.0 + 10.0 * a.abs();
    simpson_rel(|t: f64| (-t).exp() * t.powf(a - 1.0), x, upper, 1e-13)
}

/// γ(a, x) from its defining integral, a > 0.
pub fn gamma_lower(a: f64, x: f64) -> f64 {
    simpson_rel(|u: f64| (-u.powf(1.0 / a)).exp() / a, 0.0, x.powf(a), 1e-13)
}

/// E(n, x) = ∫_1^∞ e^{−xt} t^{−n} dt.
pub fn exp_integral(n: f64, x: f64) -> f64 {
    let upper = 1.0 + 60.0 / x;
    simpson_rel(|t: f64| (-x * t).exp() * t.powf(-n), 1.0, upper, 1e-13)
}

/// ₂F₁(a, b; c; z) from the Euler integral, c > b > 0 and c − b ≥ 1.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> f64 {
    // t = u^{1/b} removes the t^{b−1} singularity at the origin.
    let f = |u: f64| {
        let t = u.powf(1.0 / b);
        (1.0 - t).powf(c - b - 1.0) * (1.0 - z * t).powf(-a) / b
    };
    let norm = gamma(c) / (gamma(b) * gamma(c - b));
    norm * simpson_rel(f, 0.0, 1.0, 1e-13)
}

/// Kolmogorov–Smirnov distance between sorted samples and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d
            .max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs());
    }
    d
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}
