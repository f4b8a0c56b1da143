use crate::error::{Error, Result};
use crate::numeric;

/// P(h_1²/h_2² < p) for two ordered users: 2p/(p+1).
pub fn nc_probability_closed(p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain("nc_probability_closed", format!("p = {p}")));
    }
    Ok(2.0 * p / (p + 1.0))
}

fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |a, k| a * k as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// P(h_n²/h_k² < p) for order statistics n < k of M i.i.d. unit exponentials,
/// by quadrature of the ratio density over [0, p].
pub fn nc_probability_general(p: f64, n: usize, k: usize, m: usize) -> Result<f64> {
    if !(1 <= n && n < k && k <= m) {
        return Err(Error::domain(
            "nc_probability_general",
            format!("need 1 <= n < k <= M (n = {n}, k = {k}, M = {m})"),
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain("nc_probability_general", format!("p = {p}")));
    }
    let lead = factorial(m) / (factorial(n - 1) * factorial(k - n - 1) * factorial(m - k));
    let mut terms = Vec::new();
    for j1 in 0..n {
        for j2 in 0..(k - n) {
            let sign = if (j1 + j2) % 2 == 0 { 1.0 } else { -1.0 };
            let w = lead * sign * binomial(n - 1, j1) * binomial(k - n - 1, j2);
            let t1 = (j1 + k - n) as f64 - j2 as f64;
            let t2 = (m - k + 1 + j2) as f64;
            terms.push((w, t1, t2));
        }
    }
    let density = |z: f64| {
        terms
            .iter()
            .map(|&(w, t1, t2)| w / (z * t1 + t2).powi(2))
            .sum::<f64>()
    };
    let v = numeric::integrate("nc_probability_general", density, 0.0, p, 1e-12)?;
    Ok(v.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_values() {
        assert_eq!(nc_probability_closed(0.0).unwrap(), 0.0);
        assert!((nc_probability_closed(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((nc_probability_closed(0.8).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert!(nc_probability_closed(1.0).is_err());
    }

    #[test]
    fn general_reduces_to_closed() {
        for &p in &[0.1, 0.5, 0.8] {
            let g = nc_probability_general(p, 1, 2, 2).unwrap();
            assert!((g - nc_probability_closed(p).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn tends_to_one() {
        for (n, k, m) in [(1, 2, 2), (1, 3, 3), (2, 3, 4)] {
            assert!((nc_probability_general(1.0, n, k, m).unwrap() - 1.0).abs() < 1e-9);
        }
        assert!(nc_probability_general(0.5, 2, 2, 3).is_err());
    }
}
