use crate::error::{Error, Result};

/// Largest B-spline order accepted by the registry.
pub const MAX_BSPLINE_ORDER: u32 = 20;

/// Central B-spline `M_n(x)` of order `n ≥ 1`, supported on `[-n/2, n/2]`.
///
/// Evaluated from the truncated-power expansion
/// `M_n(x) = 1/(n-1)! Σ_{i=0}^{n} (-1)^i C(n,i) (n/2 + x - i)_+^{n-1}`
/// at `-|x|`, where fewer terms are active and cancellation is mild. For
/// `n = 1` the truncated power `(0)_+^0` is taken as 1/2, so `M_1` equals 1/2
/// at both jump points and stays even.
///
/// # Panics
/// If `n == 0`.
pub fn bspline_eval(n: u32, x: f64) -> f64 {
    assert!(n >= 1, "B-spline order must be at least 1");
    let half = n as f64 / 2.0;
    let y = -x.abs();
    if y < -half {
        return 0.0;
    }
    if n == 1 {
        return if y > -0.5 { 1.0 } else { 0.5 };
    }
    let degree = (n - 1) as i32;
    let mut binom = 1.0;
    let mut sum = 0.0;
    for i in 0..=n {
        let u = half + y - i as f64;
        if u <= 0.0 {
            break;
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * u.powi(degree);
        binom = binom * (n - i) as f64 / (i + 1) as f64;
    }
    let factorial: f64 = (1..n).map(f64::from).product();
    sum / factorial
}

/// `M_n'(x) = M_{n-1}(x + 1/2) - M_{n-1}(x - 1/2)` for `n ≥ 2`.
pub fn bspline_derivative_eval(n: u32, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(
            "bspline_derivative_eval",
            format!("order must be at least 2, got {n}"),
        ));
    }
    Ok(bspline_eval(n - 1, x + 0.5) - bspline_eval(n - 1, x - 0.5))
}

/// Knots `-n/2, -n/2 + 1, ..., n/2` of `M_n`.
pub fn bspline_knots(n: u32) -> Vec<f64> {
    let half = n as f64 / 2.0;
    (0..=n).map(|i| -half + i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cox-de Boor recursion on the cardinal knots, independent of the
    /// truncated-power route.
    fn cox_de_boor(n: u32, x: f64) -> f64 {
        // M_n(x) = N_{n}(x + n/2) with uniform knots 0..n
        fn basis(order: u32, s: f64) -> f64 {
            if order == 1 {
                return if (0.0..1.0).contains(&s) { 1.0 } else { 0.0 };
            }
            let k = (order - 1) as f64;
            (s / k) * basis(order - 1, s) + ((order as f64 - s) / k) * basis(order - 1, s - 1.0)
        }
        basis(n, x + n as f64 / 2.0)
    }

    #[test]
    fn reference_point_values() {
        assert_eq!(bspline_eval(2, 0.0), 1.0);
        assert!((bspline_eval(3, 0.0) - 0.75).abs() < 1e-15);
        assert_eq!(bspline_eval(1, 0.25), 1.0);
        for n in 1..=8 {
            let edge = n as f64 / 2.0 + 0.1;
            assert_eq!(bspline_eval(n, edge), 0.0);
            assert_eq!(bspline_eval(n, -edge), 0.0);
        }
    }

    #[test]
    fn order_one_jump_convention() {
        assert_eq!(bspline_eval(1, 0.5), 0.5);
        assert_eq!(bspline_eval(1, -0.5), 0.5);
        assert_eq!(bspline_eval(1, 0.500001), 0.0);
    }

    #[test]
    fn agrees_with_cox_de_boor_off_knots() {
        for n in 2..=7 {
            for i in 0..=997 {
                let x = -4.0 + 8.0 * i as f64 / 997.0;
                let a = bspline_eval(n, x);
                let b = cox_de_boor(n, x);
                assert!((a - b).abs() < 1e-13, "M_{n}({x}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn derivative_values() {
        assert_eq!(bspline_derivative_eval(2, 0.0).unwrap(), 0.0);
        assert_eq!(bspline_derivative_eval(3, 0.5).unwrap(), -1.0);
        for n in 2..=6 {
            assert_eq!(bspline_derivative_eval(n, n as f64 / 2.0 + 0.01).unwrap(), 0.0);
        }
        assert!(bspline_derivative_eval(1, 0.0).is_err());
    }

    #[test]
    fn derivative_matches_central_differences_away_from_knots() {
        for n in 2..=5u32 {
            let knots = bspline_knots(n);
            let mut errs = Vec::new();
            for &h in &[1e-3, 5e-4] {
                let mut worst: f64 = 0.0;
                for i in 0..400 {
                    let x = -(n as f64) / 2.0 - 0.3 + (n as f64 + 0.6) * (i as f64 + 0.37) / 400.0;
                    if knots.iter().any(|k| (k - x).abs() < 2.0 * h) {
                        continue;
                    }
                    let fd = (bspline_eval(n, x + h) - bspline_eval(n, x - h)) / (2.0 * h);
                    worst = worst.max((fd - bspline_derivative_eval(n, x).unwrap()).abs());
                }
                errs.push(worst);
            }
            // O(h²): halving h cuts the error by ~4 (or it is already at roundoff)
            assert!(errs[0] < 1e-5, "n={n}: {errs:?}");
            assert!(errs[1] <= errs[0] / 3.0 || errs[1] < 1e-9, "n={n}: {errs:?}");
        }
    }
}
