//! Generalized sampling series, its averaged form and derivative, and the
//! sampling-Kantorovich operator, as certified finite sums.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::{average, AveragedKernel, Kernel};
use crate::numerics::{adaptive_quadrature, split_points, Decay, TruncationPolicy};
use crate::par_map;
use crate::signals::{RealFn, Signal, Tails};

/// Sampling rate, averaging order and truncation tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    pub w: f64,
    pub m: u32,
    pub truncation_tol: f64,
}

impl OperatorParams {
    pub fn new(w: f64, m: u32, truncation_tol: f64) -> Result<Self> {
        check_rate(w)?;
        if m == 0 {
            return Err(Error::param("m", "averaging order must be at least 1"));
        }
        check_tol(truncation_tol)?;
        Ok(OperatorParams { w, m, truncation_tol })
    }
}

fn check_rate(w: f64) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::param(
            "w",
            format!("sampling rate must be positive and finite, got {w}"),
        ));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    Ok(())
}

/// Lattice indices `[⌊u⌋ - radius, ⌈u⌉ + radius]`.
fn lattice(u: f64, radius: usize) -> (i64, i64) {
    (u.floor() as i64 - radius as i64, u.ceil() as i64 + radius as i64)
}

fn intersect(a: (i64, i64), b: Option<(i64, i64)>) -> (i64, i64) {
    match b {
        Some(b) => (a.0.max(b.0), a.1.min(b.1)),
        None => a,
    }
}

fn tail_radius(support: Decay, tol: f64) -> usize {
    TruncationPolicy::new(support, tol)
        .expect("kernel decay metadata is validated at construction")
        .radius()
}

fn sample_sum<K: Fn(f64) -> f64>(f: &Signal, kernel: K, support: Decay, w: f64, t: f64, tol: f64) -> f64 {
    let u = w * t;
    let (lo, hi) = lattice(u, tail_radius(support, tol));
    (lo..=hi).map(|j| f.evaluate(j as f64 / w) * kernel(u - j as f64)).sum()
}

/// `(S_w f)(t) = Σ_k f(k/w) χ(wt - k)`, truncated so the neglected part is at
/// most `sup|f| · tol`.
///
/// # Panics
/// If `w` or `tol` is not positive.
pub fn sampling_series(f: &Signal, k: &Kernel, w: f64, t: f64, tol: f64) -> f64 {
    assert!(w > 0.0 && tol > 0.0, "w and tol must be positive");
    sample_sum(f, |x| k.evaluate(x), k.support(), w, t, tol)
}

/// `(S̄^m_w f)(t) = Σ_k f(k/w) χ̄_m(wt - k)`.
///
/// # Panics
/// If `w` or `tol` is not positive.
pub fn averaged_sampling_series(f: &Signal, ak: &AveragedKernel, w: f64, t: f64, tol: f64) -> f64 {
    assert!(w > 0.0 && tol > 0.0, "w and tol must be positive");
    sample_sum(f, |x| ak.evaluate(x), ak.support(), w, t, tol)
}

/// Indices `k` outside of which `f(k/w) - f((k - m)/w)` vanishes, when the
/// signal is constant outside its window.
pub(crate) fn difference_support(f: &Signal, w: f64, m: u32) -> Option<(i64, i64)> {
    match f.tails() {
        Tails::Constant { .. } => {
            let (a, b) = f.essential_window();
            Some(((w * a).floor() as i64 - 1, (w * b).ceil() as i64 + m as i64 + 1))
        }
        Tails::Decaying { .. } => None,
    }
}

/// Indices of the cells `[k/w, (k+1)/w]` that meet the support of `f'`.
fn derivative_cell_support(f: &Signal, w: f64) -> Option<(i64, i64)> {
    match f.tails() {
        Tails::Constant { .. } => {
            let (a, b) = f.essential_window();
            Some(((w * a).floor() as i64 - 1, (w * b).ceil() as i64))
        }
        Tails::Decaying { .. } => None,
    }
}

/// Envelope level for sums whose coefficients have ℓ¹ norm at most `w·V[f]`.
fn l1_level(f: &Signal, w: f64, tol: f64) -> f64 {
    let v = f.exact_variation();
    if v.is_finite() && v > 0.0 {
        tol / (w * v)
    } else {
        tol / w
    }
}

/// `(S̄^m_w f)'(t) = (w/m) Σ_k f(k/w) [χ(wt - k + m/2) - χ(wt - k - m/2)]`,
/// evaluated after summation by parts as
/// `(w/m) Σ_k [f(k/w) - f((k-m)/w)] χ(wt - k + m/2)`.
///
/// Only base-kernel values are used. The coefficients have ℓ¹ norm at most
/// `m·V[f]`, so truncating where the base envelope drops below
/// `tol / (w V[f])` leaves an error of at most `tol`. Signals without a
/// declared variation fall back to [`averaged_sampling_derivative_literal`].
///
/// # Panics
/// If `w` or `tol` is not positive.
pub fn averaged_sampling_derivative(f: &Signal, ak: &AveragedKernel, w: f64, t: f64, tol: f64) -> f64 {
    assert!(w > 0.0 && tol > 0.0, "w and tol must be positive");
    if !f.exact_variation().is_finite() {
        return averaged_sampling_derivative_literal(f, ak, w, t, tol);
    }
    let base = ak.base();
    let m = ak.m();
    let half = ak.half_width();
    let shifted = w * t + half;
    let radius = base.support().sup_radius(l1_level(f, w, tol));
    let (lo, hi) = intersect(lattice(shifted, radius), difference_support(f, w, m));
    let mut sum = 0.0;
    for j in lo..=hi {
        let delta = f.evaluate(j as f64 / w) - f.evaluate((j - m as i64) as f64 / w);
        if delta != 0.0 {
            sum += delta * base.evaluate(shifted - j as f64);
        }
    }
    w / m as f64 * sum
}

/// The derivative sum exactly as written, with both shifted kernel copies.
/// Truncated so the neglected part is at most `tol`.
///
/// # Panics
/// If `w` or `tol` is not positive.
pub fn averaged_sampling_derivative_literal(f: &Signal, ak: &AveragedKernel, w: f64, t: f64, tol: f64) -> f64 {
    assert!(w > 0.0 && tol > 0.0, "w and tol must be positive");
    let base = ak.base();
    let m = ak.m() as f64;
    let half = ak.half_width();
    let bound = if f.bound().is_finite() {
        f.bound().max(1e-300)
    } else {
        1.0
    };
    let per_side = tol * m / (2.0 * w * bound);
    let radius = tail_radius(base.support().widened(half), per_side);
    let u = w * t;
    let (lo, hi) = lattice(u, radius);
    let sum: f64 = (lo..=hi)
        .map(|j| {
            let x = u - j as f64;
            f.evaluate(j as f64 / w) * (base.evaluate(x + half) - base.evaluate(x - half))
        })
        .sum();
    w / m * sum
}

/// `w ∫_{k/w}^{(k+1)/w} g`, split at the breakpoints of `g`.
fn cell_mean(g: &(dyn Fn(f64) -> f64 + Sync), breakpoints: &[f64], w: f64, k: i64) -> f64 {
    let (a, b) = (k as f64 / w, (k + 1) as f64 / w);
    let nodes = split_points(a, b, breakpoints);
    let tol = 1e-14 / w;
    let integral: f64 = nodes
        .windows(2)
        .map(|p| match adaptive_quadrature(g, p[0], p[1], tol * (p[1] - p[0]) * w) {
            Ok(r) => r.value,
            Err(Error::QuadratureNonConvergence { partial, .. }) => partial.value,
            Err(e) => unreachable!("cell bounds are ordered: {e}"),
        })
        .sum();
    w * integral
}

/// A sampling-Kantorovich series `Σ_k c_k χ(wt - k)` with cell means
/// `c_k = w ∫_{k/w}^{(k+1)/w} g` of `g = f` or `g = f'`, precomputed for a
/// range of evaluation points.
#[derive(Clone)]
pub struct KantorovichSeries {
    g: RealFn,
    breakpoints: Vec<f64>,
    kernel: Kernel,
    w: f64,
    radius: usize,
    coefficient_support: Option<(i64, i64)>,
    first: i64,
    means: Vec<f64>,
    error_bound: f64,
}

impl KantorovichSeries {
    /// `K_w f` on `[t_lo, t_hi]`; the truncation error is at most `sup|f|·tol`.
    pub fn of_signal(f: &Signal, k: &Kernel, w: f64, (t_lo, t_hi): (f64, f64), tol: f64) -> Result<Self> {
        check_rate(w)?;
        check_tol(tol)?;
        let g = f.clone();
        let radius = tail_radius(k.support(), tol);
        let error_bound = f.bound() * k.support().tail_sum_bound(radius);
        Ok(Self::build(
            Arc::new(move |x| g.evaluate(x)),
            f.breakpoints(),
            k,
            w,
            radius,
            None,
            (t_lo, t_hi),
            error_bound,
        ))
    }

    /// `K_w f'` on `[t_lo, t_hi]`; the truncation error is at most `tol`.
    pub fn of_derivative(f: &Signal, k: &Kernel, w: f64, (t_lo, t_hi): (f64, f64), tol: f64) -> Result<Self> {
        check_rate(w)?;
        check_tol(tol)?;
        let d = f
            .derivative()
            .filter(|_| f.is_ac())
            .ok_or_else(|| Error::NotAbsolutelyContinuous(f.id().to_string()))?;
        let level = l1_level(f, w, tol);
        let radius = k.support().sup_radius(level);
        let error_bound = if k.support().is_compact() { 0.0 } else { tol };
        Ok(Self::build(
            d.clone(),
            f.kinks().to_vec(),
            k,
            w,
            radius,
            derivative_cell_support(f, w),
            (t_lo, t_hi),
            error_bound,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        g: RealFn,
        breakpoints: Vec<f64>,
        k: &Kernel,
        w: f64,
        radius: usize,
        coefficient_support: Option<(i64, i64)>,
        (t_lo, t_hi): (f64, f64),
        error_bound: f64,
    ) -> Self {
        let (lo, _) = intersect(lattice(w * t_lo.min(t_hi), radius), coefficient_support);
        let (_, hi) = intersect(lattice(w * t_hi.max(t_lo), radius), coefficient_support);
        let indices: Vec<i64> = (lo..=hi).collect();
        let means = par_map(&indices, |&j| cell_mean(&*g, &breakpoints, w, j));
        KantorovichSeries {
            g,
            breakpoints,
            kernel: k.clone(),
            w,
            radius,
            coefficient_support,
            first: lo,
            means,
            error_bound,
        }
    }

    /// `(k, c_k)` for `k` in `[lo, hi]`.
    pub fn coefficients(&self, lo: i64, hi: i64) -> Vec<(i64, f64)> {
        (lo..=hi).map(|j| (j, self.mean(j))).collect()
    }

    /// Certified bound on the neglected lattice terms.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    fn mean(&self, j: i64) -> f64 {
        let idx = j - self.first;
        if idx >= 0 && (idx as usize) < self.means.len() {
            self.means[idx as usize]
        } else {
            cell_mean(&*self.g, &self.breakpoints, self.w, j)
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let u = self.w * t;
        let (lo, hi) = intersect(lattice(u, self.radius), self.coefficient_support);
        (lo..=hi)
            .map(|j| self.mean(j) * self.kernel.evaluate(u - j as f64))
            .sum()
    }
}

/// `(K_w f)(t) = Σ_k w (∫_{k/w}^{(k+1)/w} f) χ(wt - k)`, with cell integrals
/// split at the signal's jumps and kinks.
pub fn kantorovich(f: &Signal, k: &Kernel, w: f64, t: f64, tol: f64) -> Result<f64> {
    Ok(KantorovichSeries::of_signal(f, k, w, (t, t), tol)?.evaluate(t))
}

/// `(K_w f')(t)`; requires an absolutely continuous signal.
pub fn kantorovich_of_derivative(f: &Signal, k: &Kernel, w: f64, t: f64, tol: f64) -> Result<f64> {
    Ok(KantorovichSeries::of_derivative(f, k, w, (t, t), tol)?.evaluate(t))
}

/// Both sides of `(S̄^m_w f)'(t) = (1/m) Σ_{i=1}^m (K_w f')(t - (m - 2(i-1))/(2w))`
/// at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySample {
    pub t: f64,
    /// Derivative of the averaged series, from base-kernel shifts.
    pub lhs: f64,
    /// Mean of shifted Kantorovich series of `f'`, from cell quadratures.
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluates the derivative identity on every point of `ts`. The two sides
/// share no code: the left uses samples of `f` against shifted base kernels,
/// the right uses quadrature cell means of `f'`.
pub fn derivative_identity_sweep(
    f: &Signal,
    base: &Kernel,
    m: u32,
    w: f64,
    ts: &[f64],
    tol: f64,
) -> Result<Vec<IdentitySample>> {
    check_rate(w)?;
    check_tol(tol)?;
    if !f.is_ac() || f.derivative().is_none() {
        return Err(Error::NotAbsolutelyContinuous(f.id().to_string()));
    }
    if ts.is_empty() {
        return Ok(Vec::new());
    }
    let ak = average(base, m)?;
    let reach = m as f64 / (2.0 * w);
    let t_lo = ts.iter().copied().fold(f64::INFINITY, f64::min) - reach;
    let t_hi = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max) + reach;
    let series = KantorovichSeries::of_derivative(f, base, w, (t_lo, t_hi), tol)?;
    Ok(par_map(ts, |&t| {
        let lhs = averaged_sampling_derivative(f, &ak, w, t, tol);
        let rhs = (1..=m)
            .map(|i| series.evaluate(t - (m as f64 - 2.0 * (i as f64 - 1.0)) / (2.0 * w)))
            .sum::<f64>()
            / m as f64;
        IdentitySample {
            t,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
        }
    }))
}

/// `|LHS - RHS|` of the derivative identity at `t`.
pub fn derivative_identity_residual(f: &Signal, base: &Kernel, m: u32, w: f64, t: f64, tol: f64) -> Result<f64> {
    Ok(derivative_identity_sweep(f, base, m, w, &[t], tol)?[0].residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{absolute_moment_sup, unit_grid};
    use crate::signals::catalog;
    use proptest::prelude::*;

    fn identity_signal() -> Signal {
        Signal::custom("x", |x| x, (0.0, 0.0), Tails::Constant { left: 0.0, right: 0.0 })
    }

    #[test]
    fn constants_are_reproduced() {
        let c = Signal::constant(2.5);
        for id in ["bspline:2", "bspline:5", "fejer", "bochner-riesz:2", "avg:2:bspline:3"] {
            let k = Kernel::from_id(id).unwrap();
            for w in [1.0, 2.0, 4.0, 8.0, 16.0] {
                for t in [-0.37, 0.0, 0.61] {
                    let v = sampling_series(&c, &k, w, t, 1e-5);
                    assert!((v - 2.5).abs() <= 2.5 * 2e-5, "{id} w={w} t={t}: {v}");
                }
            }
        }
    }

    #[test]
    fn linear_reproduction_by_hat_kernel() {
        // brute force: only k = 0 and k = 1 contribute at t = 0.3
        let m2 = Kernel::bspline(2).unwrap();
        let v = sampling_series(&identity_signal(), &m2, 1.0, 0.3, 1e-12);
        let brute = 0.0 * m2.evaluate(0.3) + 1.0 * m2.evaluate(-0.7);
        assert!((v - 0.3).abs() < 1e-10 && (v - brute).abs() < 1e-15);
    }

    #[test]
    fn indicator_sampling_picks_one_sample() {
        let m1 = Kernel::bspline(1).unwrap();
        assert_eq!(sampling_series(&Signal::heaviside(), &m1, 1.0, 0.7, 1e-12), 1.0);
    }

    #[test]
    fn averaged_series_matches_next_bspline() {
        let hat = Signal::hat(1.0).unwrap();
        let ak = average(&Kernel::bspline(2).unwrap(), 1).unwrap();
        let m3 = Kernel::bspline(3).unwrap();
        for w in [1.0, 3.0, 8.0] {
            for i in 0..50 {
                let t = -2.0 + 0.08 * i as f64;
                let a = averaged_sampling_series(&hat, &ak, w, t, 1e-10);
                let b = sampling_series(&hat, &m3, w, t, 1e-10);
                assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let c = Signal::constant(-1.5);
        for id in ["bspline:2", "fejer"] {
            let base = Kernel::from_id(id).unwrap();
            for m in 1..=3 {
                let ak = average(&base, m).unwrap();
                assert_eq!(averaged_sampling_derivative(&c, &ak, 4.0, 0.3, 1e-8), 0.0);
                assert!(averaged_sampling_derivative_literal(&c, &ak, 4.0, 0.3, 1e-6).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let hat = Signal::hat(1.0).unwrap();
        let ak = average(&Kernel::bspline(2).unwrap(), 1).unwrap();
        let (w, t, h) = (4.0, 0.2, 1e-5);
        let fd = (averaged_sampling_series(&hat, &ak, w, t + h, 1e-12)
            - averaged_sampling_series(&hat, &ak, w, t - h, 1e-12))
            / (2.0 * h);
        let d = averaged_sampling_derivative(&hat, &ak, w, t, 1e-12);
        assert!((fd - d).abs() <= 1e-4, "{fd} vs {d}");
    }

    #[test]
    fn summation_by_parts_agrees_with_literal_form() {
        for f in [
            Signal::hat(1.0).unwrap(),
            Signal::witch(),
            Signal::heaviside(),
            Signal::staircase3(),
        ] {
            for id in ["bspline:3", "fejer", "bochner-riesz:2"] {
                let base = Kernel::from_id(id).unwrap();
                for m in 1..=3 {
                    let ak = average(&base, m).unwrap();
                    for t in [-0.9, 0.05, 0.4, 1.7] {
                        let a = averaged_sampling_derivative(&f, &ak, 2.0, t, 1e-6);
                        let b = averaged_sampling_derivative_literal(&f, &ak, 2.0, t, 1e-6);
                        assert!((a - b).abs() <= 2.5e-6, "{} {id} m={m} t={t}: {a} vs {b}", f.id());
                    }
                }
            }
        }
    }

    #[test]
    fn derivative_respects_shifted_series_bound() {
        let base = Kernel::bspline(2).unwrap();
        let a_chi = absolute_moment_sup(&base, &unit_grid(32), 1e-10).unwrap();
        for f in catalog() {
            for m in 1..=3 {
                let ak = average(&base, m).unwrap();
                let w = 4.0;
                for i in 0..40 {
                    let t = -1.5 + 0.1 * i as f64;
                    let d = averaged_sampling_derivative(&f, &ak, w, t, 1e-12).abs();
                    let s = |x: f64| sampling_series(&f, &base, w, x, 1e-12).abs();
                    let shift = m as f64 / (2.0 * w);
                    assert!(d <= w / m as f64 * (s(t + shift) + s(t - shift)) + 1e-9, "{}", f.id());
                    assert!(d <= 2.0 * w * f.bound() / m as f64 * a_chi + 1e-9);
                }
            }
        }
    }

    #[test]
    fn kantorovich_examples() {
        let m1 = Kernel::bspline(1).unwrap();
        // single cell k = 0: 2 ∫_0^{1/2} u du
        let v = kantorovich(&identity_signal(), &m1, 2.0, 0.0, 1e-12).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let c = Signal::constant(0.75);
        for id in ["bspline:3", "fejer"] {
            let k = Kernel::from_id(id).unwrap();
            let v = kantorovich(&c, &k, 4.0, 0.123, 1e-5).unwrap();
            assert!((v - 0.75).abs() <= 1e-5);
        }
    }

    #[test]
    fn kantorovich_of_heaviside_uses_exact_cell_means() {
        let h = Signal::heaviside();
        let k = Kernel::bspline(3).unwrap();
        for w in [1.0, 2.5, 4.0] {
            for t in [-1.0, -0.2, 0.0, 0.3] {
                let u: f64 = w * t;
                let brute: f64 = ((u.floor() as i64 - 3)..=(u.ceil() as i64 + 3))
                    .map(|j| if j >= 0 { k.evaluate(u - j as f64) } else { 0.0 })
                    .sum();
                let v = kantorovich(&h, &k, w, t, 1e-12).unwrap();
                assert!((v - brute).abs() < 1e-13, "w={w} t={t}");
            }
        }
    }

    #[test]
    fn derivative_identity_examples() {
        let r = derivative_identity_residual(
            &Signal::hat(1.0).unwrap(),
            &Kernel::bspline(2).unwrap(),
            1,
            4.0,
            0.2,
            1e-9,
        )
        .unwrap();
        assert!(r <= 1e-6, "{r}");
        let r =
            derivative_identity_residual(&Signal::witch(), &Kernel::bspline(3).unwrap(), 2, 8.0, -0.5, 1e-9).unwrap();
        assert!(r <= 1e-6, "{r}");
        let s = derivative_identity_sweep(
            &Signal::constant(3.0),
            &Kernel::bspline(2).unwrap(),
            2,
            4.0,
            &[0.1],
            1e-9,
        )
        .unwrap();
        assert!(s[0].lhs.abs() <= 1e-12 && s[0].rhs.abs() <= 1e-12);
        assert!(matches!(
            derivative_identity_residual(&Signal::heaviside(), &Kernel::bspline(2).unwrap(), 1, 4.0, 0.0, 1e-9),
            Err(Error::NotAbsolutelyContinuous(_))
        ));
    }

    #[test]
    fn doubling_the_radius_stays_within_the_truncation_bound() {
        let f = Signal::witch();
        for id in ["fejer", "bochner-riesz:1"] {
            let k = Kernel::from_id(id).unwrap();
            let tol = 1e-4;
            for t in [-2.0, 0.3, 5.0] {
                let a = sampling_series(&f, &k, 2.0, t, tol);
                // a tail tolerance four times smaller at least doubles the radius
                let b = sampling_series(&f, &k, 2.0, t, tol / 4.0);
                assert!((a - b).abs() <= 2.0 * tol * f.bound());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn kantorovich_is_bounded_by_absolute_moment(t in -3.0f64..3.0, wi in 0usize..4, si in 0usize..6) {
            let w = [1.0, 2.0, 4.0, 8.0][wi];
            let f = &catalog()[si];
            let k = Kernel::bspline(3).unwrap();
            let v = kantorovich(f, &k, w, t, 1e-10).unwrap();
            prop_assert!(v.abs() <= f.bound() + 1e-10);
        }

        #[test]
        fn averaged_series_is_bounded(t in -3.0f64..3.0, m in 1u32..4, si in 0usize..6) {
            let f = &catalog()[si];
            let ak = average(&Kernel::bspline(2).unwrap(), m).unwrap();
            let v = averaged_sampling_series(f, &ak, 4.0, t, 1e-10);
            prop_assert!(v.abs() <= f.bound() + 1e-10);
        }

        #[test]
        fn derivative_identity_holds_for_bsplines(t in -2.0f64..2.0, m in 1u32..4, wi in 0usize..3, si in 0usize..3) {
            let f = [Signal::hat(1.0).unwrap(), Signal::bump(), Signal::ramp_clip()][si].clone();
            let w = [2.0, 4.0, 8.0][wi];
            let r = derivative_identity_residual(&f, &Kernel::bspline(3).unwrap(), m, w, t, 1e-9).unwrap();
            prop_assert!(r <= 1e-6);
        }
    }
}
