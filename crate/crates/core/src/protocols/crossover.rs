use super::optical::czcz_optical_closed_form;
use crate::error::{Error, Result};

/// Grid used to locate the first bracket before bisecting.
pub const CROSSOVER_GRID: usize = 1000;
/// Upper end of the search interval; the curves diverge at R = 1.
pub const CROSSOVER_R_MAX: f64 = 1.0 - 1e-4;
pub const CROSSOVER_TOL: f64 = 1e-9;

/// Worst-quadrature optical CZ–CZ error ratio.
pub fn czcz_optical_worst(reflectivity: f64) -> f64 {
    let (x, y) = czcz_optical_closed_form(reflectivity);
    x.max(y)
}

/// Smallest reflectivity at which the optical CZ–CZ worst-quadrature error reaches
/// `threshold` (in units of `e^{-2r} V0`). Both curves start at 1 for R = 0, so a
/// threshold at or below 1 has no root.
pub fn crossover_r(threshold: f64) -> Result<f64> {
    if !threshold.is_finite() || threshold <= 1.0 {
        return Err(Error::NoRoot(format!(
            "threshold {threshold} is not above the R -> 0 error level 1"
        )));
    }
    let f = |r: f64| czcz_optical_worst(r) - threshold;
    let step = CROSSOVER_R_MAX / CROSSOVER_GRID as f64;
    let mut lo = 0.0;
    let mut flo = f(lo);
    for k in 1..=CROSSOVER_GRID {
        let hi = step * k as f64;
        let fhi = f(hi);
        if flo < 0.0 && fhi >= 0.0 {
            return Ok(bisect(f, lo, hi));
        }
        lo = hi;
        flo = fhi;
    }
    Err(Error::NoRoot(format!(
        "error stays below {threshold} on [0, {CROSSOVER_R_MAX}]"
    )))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > CROSSOVER_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// True iff the worst-quadrature curve is nondecreasing on the crossover grid.
pub fn worst_curve_is_monotone() -> bool {
    let step = CROSSOVER_R_MAX / CROSSOVER_GRID as f64;
    (0..CROSSOVER_GRID).all(|k| czcz_optical_worst(step * (k + 1) as f64) >= czcz_optical_worst(step * k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_threshold_near_a_third() {
        let r = crossover_r(2.0).unwrap();
        assert!((r - 0.33).abs() < 0.01, "{r}");
        assert!((czcz_optical_worst(r) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn threshold_just_above_one_goes_to_zero() {
        assert!(crossover_r(1.0 + 1e-6).unwrap() < 1e-5);
    }

    #[test]
    fn low_thresholds_have_no_root() {
        assert!(matches!(crossover_r(0.5), Err(Error::NoRoot(_))));
        assert!(matches!(crossover_r(1.0), Err(Error::NoRoot(_))));
    }

    #[test]
    fn smaller_threshold_smaller_root() {
        let r = crossover_r(1.5).unwrap();
        assert!(r > 0.0 && r < crossover_r(2.0).unwrap());
    }

    #[test]
    fn monotone() {
        assert!(worst_curve_is_monotone());
    }
}
