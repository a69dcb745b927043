//! Bessel functions of the first kind of integer order.
//!
//! Small arguments use the ascending power series. Everything else uses
//! Miller's backward recurrence normalised by `J_0² + 2 Σ_{k≥1} J_k² = 1`,
//! whose terms are all non-negative, so normalisation adds no cancellation.

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 200;
pub const MAX_ARGUMENT: f64 = 500.0;

/// `J_n(k)` for `0 ≤ n ≤ 200`, `0 ≤ k ≤ 500`, absolute error below 1e-12.
pub fn bessel_jn(n: u32, k: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::domain("order", format!("order must be <= {MAX_ORDER}, got {n}")));
    }
    if !(0.0..=MAX_ARGUMENT).contains(&k) {
        return Err(Error::domain(
            "argument",
            format!("argument must lie in [0, {MAX_ARGUMENT}], got {k}"),
        ));
    }
    if k == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * k;
    // Series terms shrink by at least a factor of two from the first one.
    if half * half <= 0.5 * (n as f64 + 1.0) {
        Ok(ascending_series(n, k))
    } else {
        Ok(miller(n, k))
    }
}

fn ascending_series(n: u32, k: f64) -> f64 {
    let half = 0.5 * k;
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + n as f64));
        sum += term;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() || term == 0.0 {
            return sum;
        }
    }
}

fn miller(n: u32, k: f64) -> f64 {
    let top = (n as f64).max(k);
    let start = (top + 30.0 + 20.0 * top.cbrt()).ceil() as u32;
    const BIG: f64 = 1e140;

    let mut next = 0.0; // J_{j+1}
    let mut current = 1.0; // J_j, arbitrary scale
    let mut sum_sq = 0.0;
    let mut wanted = 0.0;
    let two_over_k = 2.0 / k;
    for j in (1..=start).rev() {
        if j == n {
            wanted = current;
        }
        sum_sq += 2.0 * current * current;
        let prev = j as f64 * two_over_k * current - next;
        next = current;
        current = prev;
        if current.abs() > BIG {
            let scale = 1.0 / BIG;
            current *= scale;
            next *= scale;
            wanted *= scale;
            sum_sq *= scale * scale;
        }
    }
    // `current` is now J_0.
    if n == 0 {
        wanted = current;
    }
    sum_sq += current * current;
    wanted / sum_sq.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        // mpmath, 40 digits.
        assert_eq!(bessel_jn(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_jn(3, 0.0).unwrap(), 0.0);
        assert!((bessel_jn(1, 1.0).unwrap() - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_jn(5, 2.0).unwrap() - 0.007_039_629_755_871_685).abs() < 1e-16);
        assert!((bessel_jn(5, 3.678_794_411_714_423).unwrap().powi(2) - 0.009_478_863_754_612_645).abs() < 1e-15);
    }

    #[test]
    fn sign_follows_the_function() {
        // J_0 has its first zero at 2.4048; J_0(3) < 0.
        assert!((bessel_jn(0, 3.0).unwrap() + 0.260_051_954_901_933_4).abs() < 1e-14);
        assert!((bessel_jn(1, 10.0).unwrap() - 0.043_472_746_168_861_44).abs() < 1e-14);
    }

    #[test]
    fn domain() {
        assert!(bessel_jn(201, 1.0).is_err());
        assert!(bessel_jn(1, -0.1).is_err());
        assert!(bessel_jn(1, 500.1).is_err());
        assert!(bessel_jn(200, 500.0).is_ok());
    }

    #[test]
    fn series_and_recurrence_agree_where_both_apply() {
        for n in [0u32, 1, 4, 20, 60] {
            for k in [0.3, 1.0, 2.5, 4.0] {
                let a = ascending_series(n, k);
                let b = miller(n, k);
                assert!((a - b).abs() < 1e-14, "n={n} k={k}: {a} vs {b}");
            }
        }
    }
}
