use std::f64::consts::PI;

use super::{average_with_mode, EvaluationMode, Kernel};
use crate::error::{Error, Result};
use crate::numerics::{integrate_pieces, Decay, TruncationPolicy};
use crate::par_map;

/// Target for the neglected two-sided tail in windowed L¹ norms.
pub const L1_TAIL_TARGET: f64 = 2e-5;

/// `n` equispaced points `0, 1/n, ..., (n-1)/n` of the unit period.
pub fn unit_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// `n` evenly spaced points covering `[0, 1/2]`, which is enough for lattice
/// sums of an even kernel: the sum at `u` equals the sum at `1 - u`.
pub fn half_unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| 0.5 * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Outcome of a partition-of-unity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionCheck {
    /// `max_u |Σ_{|k - u| ≤ K} χ(u - k) - 1|` over the grid.
    pub max_deviation: f64,
    /// Certified bound on the neglected lattice terms.
    pub truncation_bound: f64,
    pub radius: usize,
    pub pass: bool,
}

/// Partition of unity together with the absolute moment, from one pass of
/// lattice sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub partition: PartitionCheck,
    /// Truncated `sup_u Σ_k |χ(u - k)|` over the grid.
    pub absolute_moment: f64,
}

fn lattice_sums(k: &Kernel, u: f64, radius: usize) -> (f64, f64) {
    let lo = u.floor() as i64 - radius as i64;
    let hi = u.ceil() as i64 + radius as i64;
    let (mut signed, mut abs) = (0.0, 0.0);
    for j in lo..=hi {
        let v = k.evaluate(u - j as f64);
        signed += v;
        abs += v.abs();
    }
    (signed, abs)
}

/// Lattice sums of `k` at every grid point with the truncation radius that
/// meets `tol`.
pub fn admissibility(k: &Kernel, grid: &[f64], tol: f64) -> Result<Admissibility> {
    let policy = TruncationPolicy::new(k.support(), tol)?;
    let radius = policy.radius();
    let truncation_bound = k.support().tail_sum_bound(radius);
    let sums = par_map(grid, |&u| lattice_sums(k, u, radius));
    let max_deviation = sums.iter().map(|(s, _)| (s - 1.0).abs()).fold(0.0, f64::max);
    let absolute_moment = sums.iter().map(|&(_, a)| a).fold(0.0, f64::max);
    Ok(Admissibility {
        partition: PartitionCheck {
            max_deviation,
            truncation_bound,
            radius,
            pass: max_deviation <= tol + truncation_bound,
        },
        absolute_moment,
    })
}

/// `Σ_k χ(u - k) = 1` on `grid` (a subset of `[0, 1)` suffices by
/// periodicity). Passes iff the deviation is within `tol` plus the
/// truncation bound.
pub fn check_partition_of_unity(k: &Kernel, grid: &[f64], tol: f64) -> Result<PartitionCheck> {
    Ok(admissibility(k, grid, tol)?.partition)
}

/// Grid estimate of `A_χ = sup_u Σ_k |χ(u - k)|`, truncated at tolerance `tol`.
pub fn absolute_moment_sup(k: &Kernel, grid: &[f64], tol: f64) -> Result<f64> {
    Ok(admissibility(k, grid, tol)?.absolute_moment)
}

/// Integration window `[-T, T]` leaving at most `tail` of `∫|χ|` outside.
fn window_for(support: Decay, tail: f64) -> f64 {
    match support {
        Decay::Compact { radius } => radius,
        Decay::Polynomial {
            exponent,
            constant,
            shift,
        } => {
            let p1 = exponent - 1.0;
            let t = shift + (2.0 * constant / (p1 * tail)).powf(1.0 / p1);
            t.max(support.envelope_start()).ceil()
        }
    }
}

/// `‖χ‖₁` over the support, or over a window plus a tail bound for decaying
/// kernels. Cached on the kernel.
pub fn l1_norm(k: &Kernel) -> f64 {
    k.l1_norm()
}

/// Windowed `∫|χ|` and the bound on what lies outside the window.
pub fn l1_norm_with_tail(k: &Kernel) -> (f64, f64) {
    let support = k.support();
    let t = window_for(support, L1_TAIL_TARGET);
    let tail = if support.is_compact() {
        0.0
    } else {
        2.0 * support.tail_integral(t).unwrap_or(f64::INFINITY)
    };
    // every registered kernel is even
    let value = 2.0 * integrate_pieces(|x| k.evaluate(x).abs(), 0.0, t, k.breakpoints(), 0.5e-11);
    (value, tail)
}

/// A numerically computed `χ̂(v) = ∫ χ(u) e^{-ivu} du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierValue {
    pub re: f64,
    pub im: f64,
    /// Bound on `∫|χ|` outside the integration window.
    pub tail_bound: f64,
}

/// Fourier transform of `f` at `v` by separate cosine and sine quadratures
/// over the support or a window whose neglected mass is at most `tail`.
pub fn fourier_transform<F: Fn(f64) -> f64 + Sync>(
    f: F,
    support: Decay,
    breakpoints: &[f64],
    v: f64,
    tail: f64,
) -> FourierValue {
    let t = window_for(support, tail);
    let tail_bound = if support.is_compact() {
        0.0
    } else {
        2.0 * support.tail_integral(t).unwrap_or(f64::INFINITY)
    };
    let tol = 1e-3 * tail;
    let re = integrate_pieces(|u| f(u) * (v * u).cos(), -t, t, breakpoints, tol);
    let im = -integrate_pieces(|u| f(u) * (v * u).sin(), -t, t, breakpoints, tol);
    FourierValue { re, im, tail_bound }
}

/// Result of a Poisson-condition check `χ̂(2πk) = δ_{k0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierCheck {
    pub real: f64,
    pub imag: f64,
    /// `|χ̂(2πk) - δ_{k0}|`.
    pub deviation: f64,
    pub tail_bound: f64,
    pub pass: bool,
}

/// Checks `χ̂(2π·kk)` against 1 (`kk = 0`) or 0 for `|kk| ≤ 5`.
pub fn fourier_check(k: &Kernel, kk: i32, tol: f64) -> Result<FourierCheck> {
    if kk.abs() > 5 {
        return Err(Error::param(
            "kk",
            format!("frequency index must satisfy |kk| ≤ 5, got {kk}"),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let v = 2.0 * PI * kk as f64;
    // χ is even, so χ̂ is real: 2 ∫_0^T χ(u) cos(vu) du
    let tail = tol / 2.0;
    let t = window_for(k.support(), tail);
    let tail_bound = if k.support().is_compact() {
        0.0
    } else {
        2.0 * k.support().tail_integral(t).unwrap_or(f64::INFINITY)
    };
    let re = 2.0
        * integrate_pieces(
            |u| k.evaluate(u) * (v * u).cos(),
            0.0,
            t,
            k.breakpoints(),
            0.5e-3 * tail,
        );
    let ft = FourierValue {
        re,
        im: 0.0,
        tail_bound,
    };
    let target = if kk == 0 { 1.0 } else { 0.0 };
    let deviation = (ft.re - target).hypot(ft.im);
    Ok(FourierCheck {
        real: ft.re,
        imag: ft.im,
        deviation,
        tail_bound: ft.tail_bound,
        pass: deviation <= tol,
    })
}

/// `|χ̄̂_m(v) - χ̂(v)·sin(mv/2)/(mv/2)|`, with the left side from a quadrature
/// of the quadrature-mode averaged kernel and the right from the base alone.
pub fn averaged_fourier_identity_check(base: &Kernel, m: u32, v: f64) -> Result<f64> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::domain(
            "averaged_fourier_identity_check",
            format!("v must be finite and non-zero, got {v}"),
        ));
    }
    let ak = average_with_mode(base, m, EvaluationMode::Quadrature)?;
    let tail = 2e-5;
    let lhs = fourier_transform(|u| ak.evaluate(u), ak.support(), &ak.breakpoints(), v, tail);
    let rhs = fourier_transform(|u| base.evaluate(u), base.support(), base.breakpoints(), v, tail);
    let half = m as f64 * v / 2.0;
    let factor = half.sin() / half;
    Ok((lhs.re - factor * rhs.re).hypot(lhs.im - factor * rhs.im))
}
