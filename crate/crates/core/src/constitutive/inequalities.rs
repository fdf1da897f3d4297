//! Grid suprema of the two scalar ratios that control the concentration estimates.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// `sup_x x^m log^2(x/c_eq) / (x - c_eq)^2` over the grid points.
///
/// The removable point `x = c_eq` contributes its limit `c_eq^(m-2)`.
pub fn log_ratio_sup<T: Scalar>(m: T, c_eq: T, grid: &[T]) -> Result<T> {
    if !(m > T::zero() && m < lit(2.0)) {
        return Err(Error::Domain(format!("log-ratio bound requires 0 < m < 2 (got {m})")));
    }
    if !(c_eq > T::zero()) {
        return Err(Error::Domain(format!("c_eq must be > 0 (got {c_eq})")));
    }
    let mut sup = T::zero();
    for &x in grid {
        if !(x > T::zero()) {
            return Err(Error::Domain(format!("grid points must be > 0 (got {x})")));
        }
        let v = if x == c_eq {
            c_eq.powf(m - lit(2.0))
        } else {
            let l = (x / c_eq).ln();
            x.powf(m) * l * l / ((x - c_eq) * (x - c_eq))
        };
        sup = sup.max(v);
    }
    Ok(sup)
}

/// `sup_x |x^(r+1) - c^(r+1)| / (|(x^(r+2) - c^(r+2))/(r+2) - c^(r+1)(x - c)| + |x - c|)`.
///
/// The removable point `x = c` contributes its limit `(r+1) c^r`.
pub fn power_ratio_sup<T: Scalar>(r: T, c_eq: T, grid: &[T]) -> Result<T> {
    if !(r > -T::one()) {
        return Err(Error::Domain(format!("power-ratio bound requires r > -1 (got {r})")));
    }
    if !(c_eq > T::zero()) {
        return Err(Error::Domain(format!("c_eq must be > 0 (got {c_eq})")));
    }
    let (r1, r2) = (r + T::one(), r + lit(2.0));
    let cr1 = c_eq.powf(r1);
    let cr2 = c_eq.powf(r2);
    let mut sup = T::zero();
    for &x in grid {
        if !(x > T::zero()) {
            return Err(Error::Domain(format!("grid points must be > 0 (got {x})")));
        }
        let v = if x == c_eq {
            r1 * c_eq.powf(r)
        } else {
            let num = (x.powf(r1) - cr1).abs();
            let den = ((x.powf(r2) - cr2) / r2 - cr1 * (x - c_eq)).abs() + (x - c_eq).abs();
            num / den
        };
        sup = sup.max(v);
    }
    Ok(sup)
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid<T: Scalar>(lo: f64, hi: f64, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| lit((a + (b - a) * i as f64 / (n - 1) as f64).exp()))
        .collect()
}
