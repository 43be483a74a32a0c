use std::sync::Arc;

use super::bspline::bspline_eval;
use super::{Kernel, KernelShape};
use crate::error::{Error, Result};
use std::f64::consts::PI;

use crate::numerics::{
    adaptive_quadrature, kronrod_21, sine_integral, sine_integral_large, split_points, Decay,
    SINE_INTEGRAL_ASYMPTOTIC_FROM,
};

/// How an averaged kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    /// Closed form. For a B-spline base
    /// `M̄_{n,m}(t) = (1/m) Σ_{i=0}^{m-1} M_{n+1}(t - m/2 + i + 1/2)`,
    /// which is `M_{n+1}` for `m = 1`; for the Fejér and first Bochner-Riesz
    /// kernels a difference of antiderivatives built on the sine integral.
    Analytic,
    /// Breakpoint-aware quadrature of the sliding average.
    Quadrature,
    /// A 21-point Kronrod rule on each unit panel of the window, for smooth
    /// band-limited bases (band within `[-π, π]`).
    FixedRule,
}

/// The averaged kernel `χ̄_m(t) = (1/m) ∫_{-m/2}^{m/2} χ(t + v) dv`.
#[derive(Debug, Clone)]
pub struct AveragedKernel {
    base: Kernel,
    m: u32,
    mode: EvaluationMode,
    quad_tol: f64,
    cache: Option<Arc<GridCache>>,
}

/// Averages `base` over windows of width `m`, choosing the closed form when
/// one is known.
pub fn average(base: &Kernel, m: u32) -> Result<AveragedKernel> {
    let mode = match base.shape() {
        _ if has_antiderivative(base) => EvaluationMode::Analytic,
        KernelShape::Fejer | KernelShape::BochnerRiesz(_) => EvaluationMode::FixedRule,
        _ => EvaluationMode::Quadrature,
    };
    average_with_mode(base, m, mode)
}

/// Like [`average`] but with an explicit evaluation mode.
pub fn average_with_mode(base: &Kernel, m: u32, mode: EvaluationMode) -> Result<AveragedKernel> {
    if m == 0 {
        return Err(Error::param("m", "averaging order must be at least 1"));
    }
    if mode == EvaluationMode::Analytic && !has_antiderivative(base) {
        return Err(Error::param("mode", "no closed form for this base"));
    }
    if mode == EvaluationMode::FixedRule && !matches!(base.shape(), KernelShape::Fejer | KernelShape::BochnerRiesz(_)) {
        return Err(Error::param(
            "mode",
            "the fixed rule needs a Fejér or Bochner-Riesz base",
        ));
    }
    Ok(AveragedKernel {
        base: base.clone(),
        m,
        mode,
        quad_tol: 1e-14 * m as f64,
        cache: None,
    })
}

fn has_antiderivative(base: &Kernel) -> bool {
    match base.shape() {
        KernelShape::BSpline(_) | KernelShape::Fejer => true,
        KernelShape::BochnerRiesz(b) => b.gamma() == 1,
        _ => false,
    }
}

/// `∫_0^x F` for the Fejér kernel `F(x) = (1 - cos πx)/(π²x²)`.
fn fejer_antiderivative(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let y = PI * x.abs();
    let value = if y >= SINE_INTEGRAL_ASYMPTOTIC_FROM {
        let (s, c) = y.sin_cos();
        sine_integral_large(y, s, c) / PI - (1.0 - c) / (PI * y)
    } else {
        let s = (0.5 * y).sin();
        sine_integral(y) / PI - 2.0 * s * s / (PI * y)
    };
    value.copysign(x)
}

/// `∫_0^x b₁` for `b₁(x) = (2/π)(sin x - x cos x)/x³`.
fn bochner_riesz_1_antiderivative(x: f64) -> f64 {
    let ax = x.abs();
    if ax >= SINE_INTEGRAL_ASYMPTOTIC_FROM {
        let (s, c) = ax.sin_cos();
        let value = (sine_integral_large(ax, s, c) + (ax * c - s) / (ax * ax)) / PI;
        return value.copysign(x);
    }
    // (x cos x - sin x)/x², by its series near zero
    let rest = if x.abs() < 0.5 {
        let x2 = x * x;
        let mut power = -x;
        let mut sum = 0.0;
        let mut factorial = 6.0;
        for k in 1..=9 {
            sum += power * 2.0 * k as f64 / factorial;
            power *= -x2;
            factorial *= (2 * k + 2) as f64 * (2 * k + 3) as f64;
        }
        sum
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    };
    (sine_integral(x) + rest) / PI
}

impl AveragedKernel {
    pub fn base(&self) -> &Kernel {
        &self.base
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn mode(&self) -> EvaluationMode {
        self.mode
    }

    pub fn half_width(&self) -> f64 {
        self.m as f64 / 2.0
    }

    /// `χ̄_m(t)`.
    pub fn evaluate(&self, t: f64) -> f64 {
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.lookup(t) {
                return v;
            }
        }
        self.evaluate_exact(t)
    }

    fn evaluate_exact(&self, t: f64) -> f64 {
        match (self.mode, self.base.shape()) {
            (EvaluationMode::Analytic, &KernelShape::BSpline(n)) => {
                let start = t - self.half_width() + 0.5;
                let sum: f64 = (0..self.m).map(|i| bspline_eval(n + 1, start + i as f64)).sum();
                sum / self.m as f64
            }
            (EvaluationMode::Analytic, KernelShape::Fejer) => {
                let h = self.half_width();
                (fejer_antiderivative(t + h) - fejer_antiderivative(t - h)) / self.m as f64
            }
            (EvaluationMode::Analytic, KernelShape::BochnerRiesz(_)) => {
                let h = self.half_width();
                (bochner_riesz_1_antiderivative(t + h) - bochner_riesz_1_antiderivative(t - h)) / self.m as f64
            }
            (EvaluationMode::FixedRule, _) => {
                let lo = t - self.half_width();
                let f = |x: f64| self.base.evaluate(x);
                let sum: f64 = (0..self.m)
                    .map(|i| kronrod_21(&f, lo + i as f64, lo + i as f64 + 1.0))
                    .sum();
                sum / self.m as f64
            }
            _ => self.sliding_average(t),
        }
    }

    fn sliding_average(&self, t: f64) -> f64 {
        let h = self.half_width();
        let (mut lo, mut hi) = (t - h, t + h);
        if let Decay::Compact { radius } = self.base.support() {
            lo = lo.max(-radius);
            hi = hi.min(radius);
            if lo >= hi {
                return 0.0;
            }
        }
        let nodes = split_points(lo, hi, self.base.breakpoints());
        let mut sum = 0.0;
        for pair in nodes.windows(2) {
            let piece_tol = self.quad_tol * (pair[1] - pair[0]) / (hi - lo);
            sum += match adaptive_quadrature(|x| self.base.evaluate(x), pair[0], pair[1], piece_tol) {
                Ok(r) => r.value,
                // A smooth piece only misses this tolerance at roundoff level.
                Err(Error::QuadratureNonConvergence { partial, .. }) => partial.value,
                Err(e) => unreachable!("piece bounds are ordered: {e}"),
            };
        }
        sum / self.m as f64
    }

    /// `χ̄_m'(t) = (χ(t + m/2) - χ(t - m/2)) / m`.
    pub fn derivative(&self, t: f64) -> f64 {
        let h = self.half_width();
        (self.base.evaluate(t + h) - self.base.evaluate(t - h)) / self.m as f64
    }

    /// Pre-populates a uniform table of `χ̄_m` with spacing `step` and
    /// switches evaluation to linear interpolation inside it.
    ///
    /// The table spans the support (compact bases) or `|t| ≤ 64 + m/2`
    /// (decaying bases); outside it evaluation stays exact. The recorded
    /// [`GridCache::error_bound`] is `h²/8 · max|χ̄''|` estimated from second
    /// differences of the table.
    pub fn with_grid_cache(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::param("step", format!("cache step must be positive, got {step}")));
        }
        let reach = match self.support() {
            Decay::Compact { radius } => radius,
            Decay::Polynomial { .. } => 64.0 + self.half_width(),
        };
        self.cache = None;
        self.cache = Some(Arc::new(GridCache::build(&self, reach, step)));
        Ok(self)
    }

    pub fn grid_cache(&self) -> Option<&GridCache> {
        self.cache.as_deref()
    }

    /// Support of `χ̄_m`: the base support widened by `m/2`.
    pub fn support(&self) -> Decay {
        self.base.support().widened(self.half_width())
    }

    /// Base breakpoints shifted by `±m/2`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let h = self.half_width();
        let mut pts: Vec<f64> = self.base.breakpoints().iter().flat_map(|&b| [b - h, b + h]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Wraps the averaged kernel as a [`Kernel`] usable by every check and
    /// operator.
    pub fn to_kernel(&self) -> Kernel {
        Kernel::from_averaged(self.clone())
    }
}

/// `χ̄_m'(t)` from the two shifted base values.
pub fn averaged_derivative_eval(ak: &AveragedKernel, t: f64) -> f64 {
    ak.derivative(t)
}

/// Uniform interpolation table for an averaged kernel.
#[derive(Debug, Clone)]
pub struct GridCache {
    start: f64,
    step: f64,
    values: Vec<f64>,
    error_bound: f64,
}

impl GridCache {
    fn build(ak: &AveragedKernel, reach: f64, step: f64) -> Self {
        let n = (2.0 * reach / step).ceil() as usize + 1;
        let start = -reach;
        let values: Vec<f64> = (0..n).map(|i| ak.evaluate_exact(start + i as f64 * step)).collect();
        let max_second = values
            .windows(3)
            .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs() / (step * step))
            .fold(0.0, f64::max);
        GridCache {
            start,
            step,
            values,
            error_bound: step * step / 8.0 * max_second,
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    fn lookup(&self, t: f64) -> Option<f64> {
        let s = (t - self.start) / self.step;
        if !(s >= 0.0) {
            return None;
        }
        let i = s.floor() as usize;
        if i + 1 >= self.values.len() {
            return None;
        }
        let frac = s - i as f64;
        Some(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
    }
}
