//! Jordan variation of operator outputs and of approximation errors, and the
//! studies built on them.

use crate::error::{Error, Result};
use crate::kernels::{average, AveragedKernel, Kernel};
use crate::numerics::{adaptive_quadrature, integrate_pieces, Decay};
use crate::operators::{averaged_sampling_series, difference_support, KantorovichSeries};
use crate::par_map;
use crate::signals::{partition_sum, Signal, Tails};

/// Largest partition used by [`variation_of_difference`].
pub const PARTITION_CAP: usize = (1 << 20) + 1;

/// Relative change between successive refinements that ends a partition
/// refinement.
pub const REFINEMENT_RTOL: f64 = 1e-3;

/// Truncation tolerance for operator values inside partition sums.
pub const SERIES_TOL: f64 = 1e-9;

/// Bisection accuracy for sign changes of the derivative.
const ROOT_TOL: f64 = 1e-10;

/// An estimate of `V[g]` over a window, with a bound on what lies outside.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationEstimate {
    pub value: f64,
    pub partition_points: usize,
    pub window: (f64, f64),
    /// Bound on the variation outside the window (and, for operator
    /// outputs, on the lattice terms left out of `value`).
    pub tail_bound: f64,
    /// `(points, value)` for each refinement; nondecreasing.
    pub refinement_trace: Vec<(usize, f64)>,
    /// True when the partition cap stopped refinement, making `value` a
    /// lower bound only.
    pub capped: bool,
}

/// `∫_d^∞ |χ|` for an even kernel, bounded from above.
fn tail_mass(k: &Kernel, d: f64) -> f64 {
    let support = k.support();
    let start = support.envelope_start();
    if d >= start {
        return support.tail_integral(d).unwrap_or(0.0);
    }
    let beyond = support.tail_integral(start).unwrap_or(0.0);
    if d <= -start {
        return k.l1_norm() + 2.0 * beyond;
    }
    integrate_pieces(|x| k.evaluate(x).abs(), d, start, k.breakpoints(), 1e-12) + beyond
}

/// Bound on `∫_{u ∉ [lo, hi]} |Σ_k a_k χ(u - k - s)| du` for an even kernel.
fn lattice_tail(k: &Kernel, coefficients: &[(i64, f64)], s: f64, lo: f64, hi: f64) -> f64 {
    coefficients
        .iter()
        .filter(|(_, a)| *a != 0.0)
        .map(|&(j, a)| {
            let c = j as f64 + s;
            a.abs() * (tail_mass(k, c - lo) + tail_mass(k, hi - c))
        })
        .sum()
}

/// Smallest window accepted by the variation estimators: the essential
/// window widened by `(m/2 + r)/w + 1`, with `r` the support radius of a
/// compact base (0 for decaying bases, whose tails are bounded instead).
pub fn required_window(f: &Signal, base: &Kernel, m: u32, w: f64) -> (f64, f64) {
    let r = match base.support() {
        Decay::Compact { radius } => radius,
        Decay::Polynomial { .. } => 0.0,
    };
    let margin = (m as f64 / 2.0 + r) / w + 1.0;
    let (a, b) = f.essential_window();
    (a - margin, b + margin)
}

fn check_window(f: &Signal, ak: &AveragedKernel, w: f64, (a, b): (f64, f64)) -> Result<()> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::param(
            "w",
            format!("sampling rate must be positive and finite, got {w}"),
        ));
    }
    let (ra, rb) = required_window(f, ak.base(), ak.m(), w);
    if a > ra || b < rb || !(a < b) {
        return Err(Error::WindowTooSmall {
            a,
            b,
            required_a: ra,
            required_b: rb,
        });
    }
    Ok(())
}

fn snap_out((a, b): (f64, f64), grid: f64) -> (f64, f64) {
    ((a * grid).floor() / grid, (b * grid).ceil() / grid)
}

/// `(S̄^m_w f)'` restricted to the coefficients `f(k/w) - f((k-m)/w)` whose
/// samples both lie in the window.
struct WindowedDerivative<'a> {
    base: &'a Kernel,
    w: f64,
    m: u32,
    /// `(k, Δ_k)`, sorted by `k`, zeros dropped.
    coefficients: Vec<(i64, f64)>,
    reach: Option<f64>,
}

impl<'a> WindowedDerivative<'a> {
    fn new(f: &Signal, ak: &'a AveragedKernel, w: f64, (a, b): (f64, f64)) -> (Self, f64) {
        let m = ak.m();
        let base = ak.base();
        let lo = (w * a).ceil() as i64 + m as i64;
        let hi = (w * b).floor() as i64;
        let delta = |j: i64| f.evaluate(j as f64 / w) - f.evaluate((j - m as i64) as f64 / w);
        let coefficients: Vec<(i64, f64)> = (lo..=hi).map(|j| (j, delta(j))).filter(|&(_, d)| d != 0.0).collect();

        // ℓ¹ mass of the coefficients left out
        let outside = match f.tails() {
            Tails::Constant { .. } => {
                let (slo, shi) = difference_support(f, w, m).expect("constant tails");
                (slo..=shi)
                    .filter(|&j| j < lo || j > hi)
                    .map(|j| delta(j).abs())
                    .sum::<f64>()
            }
            Tails::Decaying { .. } => {
                let shrink = m as f64 / w;
                let v = f
                    .variation_outside(a + shrink, b - shrink)
                    .unwrap_or(f.exact_variation());
                m as f64 * v
            }
        };
        let reach = match base.support() {
            Decay::Compact { radius } => Some(radius),
            Decay::Polynomial { .. } => None,
        };
        let omitted = base.l1_norm() / m as f64 * outside;
        (
            WindowedDerivative {
                base,
                w,
                m,
                coefficients,
                reach,
            },
            omitted,
        )
    }

    fn evaluate(&self, t: f64) -> f64 {
        let shifted = self.w * t + self.m as f64 / 2.0;
        let terms = match self.reach {
            Some(r) => {
                let lo = self
                    .coefficients
                    .partition_point(|&(j, _)| (j as f64) < shifted - r - 1.0);
                let hi = self
                    .coefficients
                    .partition_point(|&(j, _)| (j as f64) <= shifted + r + 1.0);
                &self.coefficients[lo..hi]
            }
            None => &self.coefficients[..],
        };
        let sum: f64 = terms
            .iter()
            .map(|&(j, d)| d * self.base.evaluate(shifted - j as f64))
            .sum();
        self.w / self.m as f64 * sum
    }

    /// Variation of the output outside `[a, b]` due to the kept coefficients.
    fn tail(&self, (a, b): (f64, f64)) -> f64 {
        let scaled: Vec<(i64, f64)> = self.coefficients.iter().map(|&(j, d)| (j, d / self.m as f64)).collect();
        lattice_tail(self.base, &scaled, -(self.m as f64) / 2.0, self.w * a, self.w * b)
    }
}

fn bisect_root<F: Fn(f64) -> f64>(g: &F, mut lo: f64, mut hi: f64, mut glo: f64) -> f64 {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫_a^b |g|` on a scan grid of `n` cells, each split at sign changes of
/// `g` located by bisection. Returns the value and the number of pieces.
fn integrate_abs<F: Fn(f64) -> f64 + Sync + Send>(g: F, a: f64, b: f64, n: usize, tol: f64) -> (f64, usize) {
    let nodes: Vec<f64> = (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * (i as f64 / n as f64) })
        .collect();
    let values = par_map(&nodes, |&t| g(t));
    let cells: Vec<usize> = (0..n).collect();
    let parts = par_map(&cells, |&i| {
        let (lo, hi) = (nodes[i], nodes[i + 1]);
        let (glo, ghi) = (values[i], values[i + 1]);
        let mut cuts = vec![lo];
        if glo * ghi < 0.0 {
            cuts.push(bisect_root(&g, lo, hi, glo));
        }
        cuts.push(hi);
        let piece_tol = tol / n as f64;
        let mut sum = 0.0;
        for p in cuts.windows(2) {
            if p[1] > p[0] {
                sum += match adaptive_quadrature(|t| g(t).abs(), p[0], p[1], piece_tol / (cuts.len() - 1) as f64) {
                    Ok(r) => r.value,
                    Err(Error::QuadratureNonConvergence { partial, .. }) => partial.value,
                    Err(e) => unreachable!("pieces are ordered: {e}"),
                };
            }
        }
        (sum, cuts.len() - 1)
    });
    parts.iter().fold((0.0, 0), |(v, c), &(s, k)| (v + s, c + k))
}

/// `V[S̄^m_w f] = ∫ |(S̄^m_w f)'|`, integrated over `window` (snapped outward
/// to multiples of `1/(2w)`) on a scan grid of step `1/(8w)` split at sign
/// changes. Only lattice terms whose samples lie in the window enter the
/// integrand; the omitted terms and the outside of the window are covered by
/// `tail_bound`, computed from the kernel's decay.
pub fn variation_of_operator_output(
    f: &Signal,
    ak: &AveragedKernel,
    w: f64,
    window: (f64, f64),
    tol: f64,
) -> Result<VariationEstimate> {
    check_window(f, ak, w, window)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let (a, b) = snap_out(window, 2.0 * w);
    let (deriv, omitted) = WindowedDerivative::new(f, ak, w, (a, b));
    let n = ((b - a) * 8.0 * w).round().max(1.0) as usize;
    let (value, pieces) = integrate_abs(|t| deriv.evaluate(t), a, b, n, tol);
    let tail_bound = deriv.tail((a, b)) + omitted;
    Ok(VariationEstimate {
        value,
        partition_points: pieces + 1,
        window: (a, b),
        tail_bound,
        refinement_trace: vec![(pieces + 1, value)],
        capped: false,
    })
}

/// Partition-sum variation of `g = S̄^m_w f - f` over `window`, with the
/// jumps of `f` injected into every partition (`g(x⁻)` taken from the
/// continuous `S̄^m_w f` and `f(x⁻)`). Starts at `points` nodes and refines
/// by nested doubling until the relative change drops below
/// [`REFINEMENT_RTOL`] or [`PARTITION_CAP`] is reached.
pub fn variation_of_difference(
    f: &Signal,
    ak: &AveragedKernel,
    w: f64,
    window: (f64, f64),
    points: usize,
) -> Result<VariationEstimate> {
    check_window(f, ak, w, window)?;
    if points < 2 {
        return Err(Error::param("points", format!("need at least 2, got {points}")));
    }
    let (a, b) = window;
    let jumps: Vec<f64> = f.discontinuities().iter().map(|d| d.location).collect();
    let output = |t: f64| averaged_sampling_series(f, ak, w, t, SERIES_TOL);
    let g = |t: f64| output(t) - f.evaluate(t);
    let g_left = |t: f64| output(t) - f.left_limit(t);

    let mut n = points;
    let mut trace = Vec::new();
    let mut capped = false;
    loop {
        let v = partition_sum(g, g_left, a, b, n, &jumps);
        let previous = trace.last().map(|&(_, p)| p);
        trace.push((n, v));
        if let Some(p) = previous {
            let change = (v - p).abs();
            if change <= REFINEMENT_RTOL * v.abs() || change <= 1e-12 {
                break;
            }
        }
        if 2 * n - 1 > PARTITION_CAP {
            capped = true;
            break;
        }
        n = 2 * n - 1;
    }

    // outside the window: variation of the output plus that of f
    let (deriv, omitted) = WindowedDerivative::new(f, ak, w, (a, b));
    let f_outside = f.variation_outside(a, b).unwrap_or(f.exact_variation());
    let tail_bound = deriv.tail((a, b)) + omitted + f_outside;
    let &(partition_points, value) = trace.last().expect("at least one refinement");
    Ok(VariationEstimate {
        value,
        partition_points,
        window: (a, b),
        tail_bound,
        refinement_trace: trace,
        capped,
    })
}

/// Outcome of the variation-detracting comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DetractingCheck {
    /// Estimated `V[S̄^m_w f]` plus its tail bound.
    pub lhs: f64,
    /// `‖χ‖₁ V[f] / m`.
    pub rhs: f64,
    /// `‖χ‖₁ V[f]`, the bound without the `1/m` factor.
    pub m_free_rhs: f64,
    pub estimate: VariationEstimate,
    pub pass: bool,
    pub m_free_pass: bool,
}

/// Relative slack of the detracting comparison.
pub const DETRACTING_RTOL: f64 = 1e-6;
/// Absolute slack of the detracting comparison.
pub const DETRACTING_ATOL: f64 = 1e-4;
const MAX_WINDOW_DOUBLINGS: usize = 12;

/// Compares `V[S̄^m_w f]` (plus tail) against `‖χ‖₁ V[f] / m`. The window
/// starts at [`required_window`] and is doubled while the tail bound alone
/// decides a failing comparison.
pub fn detracting_check(f: &Signal, base: &Kernel, m: u32, w: f64) -> Result<DetractingCheck> {
    let ak = average(base, m)?;
    let v = f.exact_variation();
    if !v.is_finite() {
        return Err(Error::domain(
            "detracting_check",
            format!("signal `{}` has no declared variation", f.id()),
        ));
    }
    let l1 = base.l1_norm();
    let rhs = l1 * v / m as f64;
    let m_free_rhs = l1 * v;
    let passes = |lhs: f64, bound: f64| lhs <= bound * (1.0 + DETRACTING_RTOL) + DETRACTING_ATOL;
    let (ra, rb) = required_window(f, base, m, w);
    let center = 0.5 * (ra + rb);
    let mut half = 0.5 * (rb - ra);
    let mut doublings = 0;
    loop {
        let estimate = variation_of_operator_output(f, &ak, w, (center - half, center + half), 1e-8)?;
        let lhs = estimate.value + estimate.tail_bound;
        let undecided = |bound: f64| !passes(lhs, bound) && passes(estimate.value, bound);
        if doublings < MAX_WINDOW_DOUBLINGS && estimate.tail_bound > 0.0 && (undecided(rhs) || undecided(m_free_rhs)) {
            half *= 2.0;
            doublings += 1;
            continue;
        }
        return Ok(DetractingCheck {
            lhs,
            rhs,
            m_free_rhs,
            pass: passes(lhs, rhs),
            m_free_pass: passes(lhs, m_free_rhs),
            estimate,
        });
    }
}

/// `‖K_w f' - f'‖₁` with a bound on the part outside the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Error {
    pub value: f64,
    pub tail_bound: f64,
}

/// Quadrature of `|K_w f'(t) - f'(t)|` over `window` (snapped outward to
/// multiples of `1/w`), plus a tail bound from the kernel decay and the
/// variation of `f` outside the window.
pub fn kantorovich_l1_error(f: &Signal, k: &Kernel, w: f64, window: (f64, f64)) -> Result<L1Error> {
    let d = f
        .derivative()
        .filter(|_| f.is_ac())
        .ok_or_else(|| Error::NotAbsolutelyContinuous(f.id().to_string()))?
        .clone();
    let (a, b) = snap_out(window, w);
    if !(a < b) {
        return Err(Error::param("window", format!("need a < b, got {window:?}")));
    }
    let series = KantorovichSeries::of_derivative(f, k, w, (a, b), 1e-11)?;
    let mut breaks: Vec<f64> = f.kinks().to_vec();
    let cells = ((b - a) * 2.0 * w).round() as i64;
    breaks.extend((0..=cells).map(|i| a + i as f64 / (2.0 * w)));
    let value = integrate_pieces(|t| (series.evaluate(t) - d(t)).abs(), a, b, &breaks, 1e-10);

    let lo = (w * a).round() as i64;
    let hi = (w * b).round() as i64 - 1;
    let scaled: Vec<(i64, f64)> = series
        .coefficients(lo, hi)
        .into_iter()
        .map(|(j, c)| (j, c / w))
        .collect();
    let f_outside = f.variation_outside(a, b).unwrap_or(f.exact_variation());
    // cells outside the window carry at most the variation of f there
    let tail_bound = lattice_tail(k, &scaled, 0.0, w * a, w * b)
        + k.l1_norm() * f_outside
        + f_outside
        + series.error_bound() * (b - a);
    Ok(L1Error { value, tail_bound })
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub w: f64,
    /// `V[S̄^m_w f - f]`.
    pub difference: VariationEstimate,
    /// `V[S̄^m_w f]`.
    pub output: VariationEstimate,
    /// `‖χ‖₁ V[f] / m`.
    pub bound: f64,
}

/// Settings for [`convergence_study`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    /// Starting partition size of the difference estimator.
    pub start_points: usize,
    /// Quadrature tolerance of the output-variation integral.
    pub tol: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            start_points: 1025,
            tol: 1e-8,
        }
    }
}

/// One row per `w`: difference variation, output variation and the
/// detracting bound. All rows share the window required by the smallest `w`.
/// Rows are computed in parallel and returned in input order.
pub fn convergence_study(
    f: &Signal,
    base: &Kernel,
    m: u32,
    w_list: &[f64],
    options: StudyOptions,
) -> Result<Vec<StudyRow>> {
    if w_list.is_empty() {
        return Err(Error::param("w_list", "need at least one sampling rate"));
    }
    if w_list.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::param("w_list", "sampling rates must be strictly ascending"));
    }
    let ak = average(base, m)?;
    let window = required_window(f, base, m, w_list[0]);
    let bound = base.l1_norm() * f.exact_variation() / m as f64;
    let rows = par_map(w_list, |&w| -> Result<StudyRow> {
        Ok(StudyRow {
            w,
            difference: variation_of_difference(f, &ak, w, window, options.start_points)?,
            output: variation_of_operator_output(f, &ak, w, window, options.tol)?,
            bound,
        })
    });
    rows.into_iter().collect()
}
