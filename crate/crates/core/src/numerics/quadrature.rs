//! Globally adaptive Gauss-Kronrod (10/21) quadrature with breakpoint splitting.
//!
//! The error estimate follows the QUADPACK `qk21` rescaling, so a panel whose
//! Gauss and Kronrod sums agree to roundoff is reported at roundoff level.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Maximum number of panels the adaptive scheme may create.
pub const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate, never negative.
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    fn zero() -> Self {
        QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        }
    }

    fn absorb(&mut self, other: &QuadratureResult) {
        self.value += other.value;
        self.error_estimate += other.error_estimate;
        self.evaluations += other.evaluations;
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_990,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut resabs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = kronrod * half;
    let resabs = resabs * scale;
    let resasc = resasc * scale;
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel {
        a,
        b,
        value,
        error,
        resabs,
    }
}

/// The 21-point Kronrod value on `[a, b]`, exact for polynomials of degree 31.
pub(crate) fn kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = f(center) * WGK[10];
    for j in 0..10 {
        let x = half * XGK[j];
        sum += WGK[j] * (f(center - x) + f(center + x));
    }
    sum * half
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Fails with [`Error::QuadratureNonConvergence`] carrying the partial
/// estimate when [`MAX_PANELS`] panels are not enough.
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    if !(a < b) {
        return Err(Error::param("a, b", format!("need a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let first = gauss_kronrod_21(&f, a, b);
    let mut evaluations = 21;
    if converged(first.error, first.resabs, tol) {
        return Ok(QuadratureResult {
            value: first.value,
            error_estimate: first.error,
            evaluations,
        });
    }

    let mut heap = BinaryHeap::new();
    let mut total_error = first.error;
    let mut total_resabs = first.resabs;
    heap.push(first);

    while heap.len() < MAX_PANELS {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // panel cannot be split further in double precision
            heap.push(worst);
            break;
        }
        let left = gauss_kronrod_21(&f, worst.a, mid);
        let right = gauss_kronrod_21(&f, mid, worst.b);
        evaluations += 42;
        total_error += left.error + right.error - worst.error;
        total_resabs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
        if converged(total_error, total_resabs, tol) {
            // re-sum to shed accumulated cancellation from the running totals
            let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
    }

    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    let partial = QuadratureResult {
        value,
        error_estimate: error,
        evaluations,
    };
    if converged(error, total_resabs, tol) {
        return Ok(partial);
    }
    Err(Error::QuadratureNonConvergence { a, b, partial })
}

fn converged(error: f64, resabs: f64, tol: f64) -> bool {
    // An integrand resolved to roundoff cannot do better than ~50 eps |f|.
    error.is_finite() && (error <= tol || error <= 100.0 * f64::EPSILON * resabs)
}

/// Integrates over `[a, b]` after splitting at every breakpoint inside it.
///
/// The tolerance is shared between pieces in proportion to their length.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<QuadratureResult> {
    let nodes = split_points(a, b, breakpoints);
    let width = b - a;
    let mut total = QuadratureResult::zero();
    for pair in nodes.windows(2) {
        let piece_tol = tol * (pair[1] - pair[0]) / width;
        total.absorb(&adaptive_quadrature(&f, pair[0], pair[1], piece_tol)?);
    }
    Ok(total)
}

/// Value of `∫_a^b f` split at the breakpoints and at every integer, with
/// the tolerance shared by length.
///
/// A piece that exhausts its panel budget contributes its partial estimate;
/// callers use this where the integrand is known to be tame and the partial
/// estimate is already at roundoff level.
pub(crate) fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> f64 {
    if !(a < b) {
        return 0.0;
    }
    let integers = (a.ceil() as i64..=b.floor() as i64).map(|i| i as f64);
    let mut nodes: Vec<f64> = breakpoints.iter().copied().chain(integers).collect();
    nodes = split_points(a, b, &nodes);
    let width = b - a;
    nodes
        .windows(2)
        .map(|pair| {
            let piece_tol = tol * (pair[1] - pair[0]) / width;
            match adaptive_quadrature(&f, pair[0], pair[1], piece_tol) {
                Ok(r) => r.value,
                Err(Error::QuadratureNonConvergence { partial, .. }) => partial.value,
                Err(_) => 0.0,
            }
        })
        .sum()
}

/// Sorted, deduplicated `[a, interior breakpoints..., b]`.
pub fn split_points(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(breakpoints.len() + 2);
    nodes.push(a);
    nodes.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    nodes.push(b);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}
