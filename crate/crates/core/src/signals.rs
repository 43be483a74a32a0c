//! Test signals with exactly known variation and regularity.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::integrate_pieces;
use crate::par_map;

/// A shared real function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A jump `f(x) - f(x⁻)` at `location`. Signals are right-continuous there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discontinuity {
    pub location: f64,
    pub jump: f64,
}

/// Behavior outside the essential window.
#[derive(Debug, Clone, Copy)]
pub enum Tails {
    /// Constant on each side of the window.
    Constant { left: f64, right: f64 },
    /// Monotone towards `limit` on both sides; `outside(a, b)` is the exact
    /// variation over `ℝ \ [a, b]` for any `[a, b]` containing the window.
    Decaying { limit: f64, outside: fn(f64, f64) -> f64 },
}

/// A bounded signal with its variation metadata.
#[derive(Clone)]
pub struct Signal {
    id: String,
    value: RealFn,
    derivative: Option<RealFn>,
    exact_variation: f64,
    is_ac: bool,
    is_bv: bool,
    window: (f64, f64),
    discontinuities: Vec<Discontinuity>,
    kinks: Vec<f64>,
    bound: f64,
    tails: Tails,
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Signal")
            .field("id", &self.id)
            .field("exact_variation", &self.exact_variation)
            .field("is_ac", &self.is_ac)
            .field("window", &self.window)
            .field("discontinuities", &self.discontinuities)
            .field("bound", &self.bound)
            .field("tails", &self.tails)
            .finish_non_exhaustive()
    }
}

fn arc<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> RealFn {
    Arc::new(f)
}

impl Signal {
    /// A signal with unknown variation (NaN) and no regularity claims.
    /// Refine it with the `with_*` methods.
    pub fn custom<F>(id: impl Into<String>, value: F, window: (f64, f64), tails: Tails) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Signal {
            id: id.into(),
            value: arc(value),
            derivative: None,
            exact_variation: f64::NAN,
            is_ac: false,
            is_bv: false,
            window,
            discontinuities: Vec::new(),
            kinks: Vec::new(),
            bound: f64::INFINITY,
            tails,
        }
    }

    pub fn with_derivative<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, d: F) -> Self {
        self.derivative = Some(arc(d));
        self
    }

    /// Declares `V[f]`; `is_ac` additionally requires no jumps.
    pub fn with_variation(mut self, variation: f64, is_ac: bool) -> Self {
        self.exact_variation = variation;
        self.is_bv = variation.is_finite();
        self.is_ac = is_ac && self.is_bv && self.discontinuities.is_empty();
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = bound;
        self
    }

    /// Points where the derivative jumps.
    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn with_jump(mut self, location: f64, jump: f64) -> Self {
        self.discontinuities.push(Discontinuity { location, jump });
        self.discontinuities.sort_by(|a, b| a.location.total_cmp(&b.location));
        self.is_ac = false;
        self
    }

    /// Tent of height 1 and half-width `a`.
    pub fn hat(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param("a", format!("half-width must be positive, got {a}")));
        }
        Ok(Signal::custom(
            format!("hat:{a}"),
            move |x| (1.0 - x.abs() / a).max(0.0),
            (-a, a),
            Tails::Constant { left: 0.0, right: 0.0 },
        )
        .with_derivative(move |x| if x.abs() >= a || x == 0.0 { 0.0 } else { -x.signum() / a })
        .with_kinks(vec![-a, 0.0, a])
        .with_bound(1.0)
        .with_variation(2.0, true))
    }

    /// `1/(1 + x²)`.
    pub fn witch() -> Self {
        fn outside(a: f64, b: f64) -> f64 {
            1.0 / (1.0 + a * a) + 1.0 / (1.0 + b * b)
        }
        Signal::custom(
            "witch",
            |x| 1.0 / (1.0 + x * x),
            (-20.0, 20.0),
            Tails::Decaying { limit: 0.0, outside },
        )
        .with_derivative(|x| {
            let d = 1.0 + x * x;
            -2.0 * x / (d * d)
        })
        .with_bound(1.0)
        .with_variation(2.0, true)
    }

    /// Raised cosine `(1 + cos πx)/2` on `[-1, 1]`.
    pub fn bump() -> Self {
        use std::f64::consts::PI;
        Signal::custom(
            "bump",
            |x| {
                if x.abs() < 1.0 {
                    0.5 * (1.0 + (PI * x).cos())
                } else {
                    0.0
                }
            },
            (-1.0, 1.0),
            Tails::Constant { left: 0.0, right: 0.0 },
        )
        .with_derivative(|x| if x.abs() < 1.0 { -0.5 * PI * (PI * x).sin() } else { 0.0 })
        .with_kinks(vec![-1.0, 1.0])
        .with_bound(1.0)
        .with_variation(2.0, true)
    }

    /// Unit step with `H(0) = 1`.
    pub fn heaviside() -> Self {
        Signal::custom(
            "heaviside",
            |x| if x >= 0.0 { 1.0 } else { 0.0 },
            (-0.5, 0.5),
            Tails::Constant { left: 0.0, right: 1.0 },
        )
        .with_jump(0.0, 1.0)
        .with_bound(1.0)
        .with_variation(1.0, false)
    }

    /// Unit steps at 0, 1 and 2.
    pub fn staircase3() -> Self {
        Signal::custom(
            "staircase3",
            |x| (x.floor() + 1.0).clamp(0.0, 3.0),
            (-0.5, 2.5),
            Tails::Constant { left: 0.0, right: 3.0 },
        )
        .with_jump(0.0, 1.0)
        .with_jump(1.0, 1.0)
        .with_jump(2.0, 1.0)
        .with_bound(3.0)
        .with_variation(3.0, false)
    }

    /// `min(max(x, 0), 1)`.
    pub fn ramp_clip() -> Self {
        Signal::custom(
            "ramp_clip",
            |x| x.clamp(0.0, 1.0),
            (0.0, 1.0),
            Tails::Constant { left: 0.0, right: 1.0 },
        )
        .with_derivative(|x| if x > 0.0 && x < 1.0 { 1.0 } else { 0.0 })
        .with_kinks(vec![0.0, 1.0])
        .with_bound(1.0)
        .with_variation(1.0, true)
    }

    pub fn constant(c: f64) -> Self {
        Signal::custom(
            format!("const:{c}"),
            move |_| c,
            (-1.0, 1.0),
            Tails::Constant { left: c, right: c },
        )
        .with_derivative(|_| 0.0)
        .with_bound(c.abs())
        .with_variation(0.0, true)
    }

    /// Parses `hat:a` (or `hat`, meaning `hat:1`), `witch`, `bump`,
    /// `heaviside`, `staircase3`, `ramp_clip`, `const:c`.
    pub fn from_id(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownSignal(id.to_string());
        let id = id.trim();
        match id {
            "hat" => return Signal::hat(1.0),
            "witch" => return Ok(Signal::witch()),
            "bump" => return Ok(Signal::bump()),
            "heaviside" => return Ok(Signal::heaviside()),
            "staircase3" => return Ok(Signal::staircase3()),
            "ramp_clip" => return Ok(Signal::ramp_clip()),
            _ => {}
        }
        let (head, arg) = id.split_once(':').ok_or_else(unknown)?;
        let x: f64 = arg.parse().map_err(|_| unknown())?;
        match head {
            "hat" => Signal::hat(x).map_err(|_| unknown()),
            "const" if x.is_finite() => Ok(Signal::constant(x)),
            _ => Err(unknown()),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    /// `f'(x)` where it exists; `None` for signals without one.
    pub fn derivative(&self) -> Option<&RealFn> {
        self.derivative.as_ref()
    }

    pub fn exact_variation(&self) -> f64 {
        self.exact_variation
    }

    pub fn is_ac(&self) -> bool {
        self.is_ac
    }

    pub fn is_bv(&self) -> bool {
        self.is_bv
    }

    pub fn essential_window(&self) -> (f64, f64) {
        self.window
    }

    pub fn discontinuities(&self) -> &[Discontinuity] {
        &self.discontinuities
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// Every point where `f` or `f'` may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .kinks
            .iter()
            .copied()
            .chain(self.discontinuities.iter().map(|d| d.location))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Declared `sup |f|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn tails(&self) -> Tails {
        self.tails
    }

    /// True when `f` is constant outside the essential window.
    pub fn has_constant_tails(&self) -> bool {
        matches!(self.tails, Tails::Constant { .. })
    }

    /// Exact variation over `ℝ \ [a, b]`, available once `[a, b]` contains
    /// the essential window.
    pub fn variation_outside(&self, a: f64, b: f64) -> Option<f64> {
        if a > self.window.0 || b < self.window.1 {
            return None;
        }
        Some(match self.tails {
            Tails::Constant { .. } => 0.0,
            Tails::Decaying { outside, .. } => outside(a, b),
        })
    }

    /// `f(x⁻)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        let jump: f64 = self
            .discontinuities
            .iter()
            .filter(|d| d.location == x)
            .map(|d| d.jump)
            .sum();
        self.evaluate(x) - jump
    }

    /// `∫_a^b |f'|` by quadrature split at the kinks.
    pub fn derivative_l1(&self, a: f64, b: f64) -> Result<f64> {
        let d = self
            .derivative
            .as_ref()
            .ok_or_else(|| Error::NotAbsolutelyContinuous(self.id.clone()))?;
        Ok(integrate_pieces(|x| d(x).abs(), a, b, &self.kinks, 1e-12))
    }
}

/// The default catalog: `hat:1`, `witch`, `bump`, `heaviside`, `staircase3`,
/// `ramp_clip`.
pub fn catalog() -> Vec<Signal> {
    vec![
        Signal::hat(1.0).expect("valid width"),
        Signal::witch(),
        Signal::bump(),
        Signal::heaviside(),
        Signal::staircase3(),
        Signal::ramp_clip(),
    ]
}

/// Partition sum `Σ|g(x_i) - g(x_{i-1})|` over `points` equispaced nodes of
/// `[a, b]`, with every jump location in `(a, b]` added as a node preceded by
/// the left limit there.
pub(crate) fn partition_sum<G, L>(g: G, left_limit: L, a: f64, b: f64, points: usize, jumps: &[f64]) -> f64
where
    G: Fn(f64) -> f64 + Sync + Send,
    L: Fn(f64) -> f64,
{
    let n = points.max(2);
    // i/(n-1) is exact under doubling (2i/(2n-2)), so refinements are nested
    let nodes: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * (i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let values = par_map(&nodes, |&x| g(x));

    let mut inner: Vec<f64> = jumps.iter().copied().filter(|&x| x > a && x <= b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();

    let mut total = 0.0;
    let mut prev = values[0];
    let mut next_jump = inner.iter().peekable();
    for (i, &x) in nodes.iter().enumerate().skip(1) {
        while let Some(&&j) = next_jump.peek() {
            if j > x {
                break;
            }
            let before = left_limit(j);
            total += (before - prev).abs();
            prev = before;
            if j < x {
                let at = g(j);
                total += (at - prev).abs();
                prev = at;
            }
            next_jump.next();
        }
        total += (values[i] - prev).abs();
        prev = values[i];
    }
    total
}

/// Partition-sum variation of `s` over `[a, b]` on `points` equispaced nodes
/// with the discontinuities injected. Nondecreasing along nested refinements
/// (`points = 2^j + 1`).
pub fn variation_oracle(s: &Signal, a: f64, b: f64, points: usize) -> Result<f64> {
    if points < 2 {
        return Err(Error::param("points", format!("need at least 2, got {points}")));
    }
    if !(a < b) {
        return Err(Error::param("interval", format!("need a < b, got [{a}, {b}]")));
    }
    let jumps: Vec<f64> = s.discontinuities.iter().map(|d| d.location).collect();
    Ok(partition_sum(
        |x| s.evaluate(x),
        |x| s.left_limit(x),
        a,
        b,
        points,
        &jumps,
    ))
}
