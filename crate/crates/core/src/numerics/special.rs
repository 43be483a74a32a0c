//! Normalized sinc, the sine integral, the gamma function on the positive
//! axis, and Bessel functions of half-integer order.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Argument below which half-integer Bessel functions use the ascending
/// series; at and above it the closed-form recurrence is used.
pub const BESSEL_CROSSOVER: f64 = 1.0;

/// Largest odd `order_num` accepted by the Bessel routines (J_{21/2}).
pub const MAX_BESSEL_ORDER_NUM: u32 = 21;

/// `sin(πt)/(πt)`, continuous at zero.
pub fn sinc(t: f64) -> f64 {
    let x = PI * t;
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Sine integral `Si(x) = ∫_0^x sin(u)/u du`: ascending series for
/// `|x| ≤ 2`, the continued fraction of `E₁(ix)` (modified Lentz) up to
/// [`SINE_INTEGRAL_ASYMPTOTIC_FROM`], and the asymptotic expansion beyond.
pub fn sine_integral(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax >= SINE_INTEGRAL_ASYMPTOTIC_FROM {
        sine_integral_asymptotic(ax)
    } else if ax <= 2.0 {
        let x2 = ax * ax;
        let mut term = ax;
        let mut sum = ax;
        let mut k = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            k += 1.0;
            term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term / (2.0 * k + 1.0);
        }
        sum
    } else if ax.is_infinite() {
        PI / 2.0
    } else {
        let div = |(a, b): (f64, f64), (c, d): (f64, f64)| {
            let den = c * c + d * d;
            ((a * c + b * d) / den, (b * c - a * d) / den)
        };
        let mul = |(a, b): (f64, f64), (c, d): (f64, f64)| (a * c - b * d, a * d + b * c);
        let tiny = 1e-300;
        let mut b = (1.0, ax);
        let mut c = (1.0 / tiny, 0.0);
        let mut d = div((1.0, 0.0), b);
        let mut h = d;
        for i in 2..1000 {
            let a = -((i - 1) * (i - 1)) as f64;
            b.0 += 2.0;
            d = div((1.0, 0.0), (a * d.0 + b.0, a * d.1 + b.1));
            let q = div((a, 0.0), c);
            c = (b.0 + q.0, b.1 + q.1);
            let del = mul(c, d);
            h = mul(h, del);
            if (del.0 - 1.0).abs() + del.1.abs() < 1e-16 {
                break;
            }
        }
        let h = mul((ax.cos(), -ax.sin()), h);
        PI / 2.0 + h.1
    };
    value.copysign(x)
}

/// Argument from which [`sine_integral`] uses the asymptotic expansion.
pub const SINE_INTEGRAL_ASYMPTOTIC_FROM: f64 = 40.0;

/// `π/2 - f(x) cos x - g(x) sin x` with the auxiliary functions summed
/// until their terms drop below roundoff; valid for large `x > 0`.
fn sine_integral_asymptotic(x: f64) -> f64 {
    if x.is_infinite() {
        return PI / 2.0;
    }
    let (s, c) = x.sin_cos();
    sine_integral_large(x, s, c)
}

/// [`sine_integral`] for `x ≥` [`SINE_INTEGRAL_ASYMPTOTIC_FROM`] given
/// `sin x` and `cos x`, for callers that need them anyway.
pub(crate) fn sine_integral_large(x: f64, s: f64, c: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    let (mut tf, mut tg) = (1.0 / x, inv2);
    let (mut f, mut g) = (0.0, 0.0);
    for k in 0..60 {
        f += tf;
        g += tg;
        let k = k as f64;
        let nf = -tf * (2.0 * k + 1.0) * (2.0 * k + 2.0) * inv2;
        let ng = -tg * (2.0 * k + 2.0) * (2.0 * k + 3.0) * inv2;
        if nf.abs() >= tf.abs() || nf.abs() < 1e-18 * f.abs() {
            break;
        }
        tf = nf;
        tg = ng;
    }
    PI / 2.0 - f * c - g * s
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for `x > 0` (Lanczos, g = 7).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "gamma_fn",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    Ok(gamma_positive(x))
}

pub(crate) fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        return gamma_positive(x + 1.0) / x;
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

fn check_order(op: &'static str, order_num: u32) -> Result<()> {
    if order_num.is_multiple_of(2) || order_num > MAX_BESSEL_ORDER_NUM {
        return Err(Error::domain(
            op,
            format!("order_num must be odd and at most {MAX_BESSEL_ORDER_NUM}, got {order_num}"),
        ));
    }
    Ok(())
}

/// J_{order_num/2}(x) for odd `order_num` and `x ≥ 0`.
///
/// Below [`BESSEL_CROSSOVER`] the ascending series is summed; above it the
/// three-term recurrence is run upward from J_{-1/2} and J_{1/2}.
pub fn bessel_j_half(order_num: u32, x: f64) -> Result<f64> {
    check_order("bessel_j_half", order_num)?;
    if !(x >= 0.0) {
        return Err(Error::domain(
            "bessel_j_half",
            format!("x must be non-negative, got {x}"),
        ));
    }
    Ok(if x < BESSEL_CROSSOVER {
        j_half_series(order_num, x)
    } else {
        j_half_recurrence(order_num, x)
    })
}

/// Series branch of [`bessel_j_half`], exposed for branch-agreement checks.
pub fn bessel_j_half_series(order_num: u32, x: f64) -> Result<f64> {
    check_order("bessel_j_half_series", order_num)?;
    Ok(j_half_series(order_num, x))
}

/// Recurrence branch of [`bessel_j_half`]; needs `x > 0`.
pub fn bessel_j_half_recurrence(order_num: u32, x: f64) -> Result<f64> {
    check_order("bessel_j_half_recurrence", order_num)?;
    if !(x > 0.0) {
        return Err(Error::domain("bessel_j_half_recurrence", "x must be positive"));
    }
    Ok(j_half_recurrence(order_num, x))
}

/// `x^{-ν} J_ν(x)` with ν = order_num/2, finite at `x = 0`.
pub fn bessel_j_half_scaled(order_num: u32, x: f64) -> Result<f64> {
    check_order("bessel_j_half_scaled", order_num)?;
    if !(x >= 0.0) {
        return Err(Error::domain(
            "bessel_j_half_scaled",
            format!("x must be non-negative, got {x}"),
        ));
    }
    Ok(j_half_scaled(order_num, x))
}

fn series_sum(nu: f64, leading: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = leading;
    let mut sum = term;
    for j in 1..80 {
        let jf = j as f64;
        term *= q / (jf * (jf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn j_half_series(order_num: u32, x: f64) -> f64 {
    let nu = order_num as f64 / 2.0;
    series_sum(nu, (0.5 * x).powf(nu) / gamma_positive(nu + 1.0), x)
}

fn j_half_recurrence(order_num: u32, x: f64) -> f64 {
    let amp = (2.0 / (PI * x)).sqrt();
    let mut prev = amp * x.cos(); // J_{-1/2}
    let mut cur = amp * x.sin(); // J_{1/2}
    let mut nu = 0.5;
    for _ in 0..(order_num / 2) {
        let next = (2.0 * nu / x) * cur - prev;
        prev = cur;
        cur = next;
        nu += 1.0;
    }
    cur
}

/// Switch point of the scaled form. Upward recurrence loses about
/// `log10(|Y_ν/J_ν|)` digits while `x < ν`, and dividing by `x^ν` exposes that
/// loss, so the series is kept up to `x = ν`.
fn scaled_crossover(nu: f64) -> f64 {
    BESSEL_CROSSOVER.max(nu)
}

pub(crate) fn j_half_scaled(order_num: u32, x: f64) -> f64 {
    let nu = order_num as f64 / 2.0;
    if x < scaled_crossover(nu) {
        series_sum(nu, 0.5f64.powf(nu) / gamma_positive(nu + 1.0), x)
    } else {
        j_half_recurrence(order_num, x) / x.powf(nu)
    }
}
