//! Small deterministic numerical helpers: bracketing root finder,
//! golden-section search, compensated summation, the normal CDF and
//! Wilson score intervals.

use crate::error::{Error, Result};

/// Maximum number of bisection halvings before giving up.
pub const BISECTION_MAX_ITER: usize = 200;

/// Finds the root of an increasing function on `(lo, hi)` by bisection.
///
/// `residual(x)` must be negative at `lo` and positive at `hi`. Iteration
/// stops as soon as `accept(x)` holds, or when the bracket cannot be split
/// any further in floating point.
pub fn bisect_increasing<F, A>(mut residual: F, mut lo: f64, mut hi: f64, mut accept: A) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    A: FnMut(f64, f64) -> bool,
{
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let r = residual(mid);
        if r.is_nan() {
            return Err(Error::Convergence(format!("residual is NaN at {mid}")));
        }
        if accept(mid, r) {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence(format!(
        "bisection did not converge in {BISECTION_MAX_ITER} iterations"
    )))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of `f` on `[lo, hi]` down to a bracket of
/// width `tol`. Returns the best point seen and its value.
pub fn golden_section_min<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let (mut best_x, mut best_f) = if f2 < f1 { (x2, f2) } else { (x1, f1) };
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
            if f1 < best_f || (f1 == best_f && x1 < best_x) {
                best_x = x1;
                best_f = f1;
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
            if f2 < best_f || (f2 == best_f && x2 < best_x) {
                best_x = x2;
                best_f = f2;
            }
        }
    }
    (best_x, best_f)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Standard normal CDF via `erfc`, accurate to a few ulps in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WilsonInterval {
    pub lower: f64,
    pub upper: f64,
}

impl WilsonInterval {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

/// 95% two-sided z quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> WilsonInterval {
    if trials == 0 {
        return WilsonInterval { lower: 0.0, upper: 1.0 };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    WilsonInterval {
        lower: (centre - half).max(0.0),
        upper: (centre + half).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect_increasing(|x| x * x - 2.0, 0.0, 2.0, |_, r| r.abs() < 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisection_rejects_empty_bracket() {
        assert!(bisect_increasing(|x| x, 1.0, 1.0, |_, _| false).is_err());
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn normal_cdf_reference_values() {
        // Reference values from high-precision tables.
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 1.349_898_031_630_094_6e-3).abs() < 1e-16);
        assert!((normal_cdf(-8.0) - 6.220_960_574_271_785e-16).abs() < 1e-28);
    }

    #[test]
    fn wilson_contains_proportion() {
        let w = wilson_interval(90, 100, Z_95);
        assert!(w.lower < 0.9 && 0.9 < w.upper);
        let all = wilson_interval(100, 100, Z_95);
        assert_eq!(all.upper, 1.0);
        assert!(all.lower > 0.96);
    }
}
