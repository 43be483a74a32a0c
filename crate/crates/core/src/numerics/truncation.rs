//! Turning lattice sums over all of ℤ into certified finite sums.

use crate::error::{Error, Result};

/// Distance from the origin below which a decay envelope is not trusted.
pub const ENVELOPE_VALID_FROM: f64 = 10.0;

/// Spatial decay of a kernel: either compact support or a polynomial
/// envelope `|χ(x)| ≤ constant / (|x| - shift)^exponent` valid for
/// `|x| ≥ shift + ENVELOPE_VALID_FROM`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    Compact { radius: f64 },
    Polynomial { exponent: f64, constant: f64, shift: f64 },
}

impl Decay {
    pub fn polynomial(exponent: f64, constant: f64) -> Result<Self> {
        if !(exponent > 1.0) {
            return Err(Error::param(
                "exponent",
                format!("decay exponent must exceed 1 for summable tails, got {exponent}"),
            ));
        }
        if !(constant > 0.0) {
            return Err(Error::param("constant", format!("must be positive, got {constant}")));
        }
        Ok(Decay::Polynomial {
            exponent,
            constant,
            shift: 0.0,
        })
    }

    /// Envelope of `x ↦ χ(x + v)` over `|v| ≤ by`.
    pub fn widened(self, by: f64) -> Self {
        match self {
            Decay::Compact { radius } => Decay::Compact { radius: radius + by },
            Decay::Polynomial {
                exponent,
                constant,
                shift,
            } => Decay::Polynomial {
                exponent,
                constant,
                shift: shift + by,
            },
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Decay::Compact { .. })
    }

    /// Smallest distance from which [`Decay::envelope`] is a valid bound.
    pub fn envelope_start(&self) -> f64 {
        match *self {
            Decay::Compact { radius } => radius,
            Decay::Polynomial { shift, .. } => shift + ENVELOPE_VALID_FROM,
        }
    }

    /// Upper bound on `|χ(x)|`, meaningful for `|x| ≥ envelope_start()`.
    pub fn envelope(&self, x: f64) -> f64 {
        let d = x.abs();
        match *self {
            Decay::Compact { radius } => {
                if d > radius {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Decay::Polynomial {
                exponent,
                constant,
                shift,
            } => {
                if d < shift + ENVELOPE_VALID_FROM {
                    f64::INFINITY
                } else {
                    constant / (d - shift).powf(exponent)
                }
            }
        }
    }

    /// Upper bound on `∫_d^∞ |χ(x)| dx`, or `None` when `d` is inside the
    /// region where the envelope is not trusted.
    pub fn tail_integral(&self, d: f64) -> Option<f64> {
        match *self {
            Decay::Compact { radius } => (d >= radius).then_some(0.0),
            Decay::Polynomial {
                exponent,
                constant,
                shift,
            } => (d >= shift + ENVELOPE_VALID_FROM)
                .then(|| constant / ((exponent - 1.0) * (d - shift).powf(exponent - 1.0))),
        }
    }

    /// Bound on `Σ |χ(u - k)|` over lattice points with `|u - k| ≥ radius + 1`,
    /// both sides together.
    pub fn tail_sum_bound(&self, radius: usize) -> f64 {
        let r = radius as f64;
        match *self {
            Decay::Compact { radius } => {
                if r + 1.0 > radius {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Decay::Polynomial {
                exponent,
                constant,
                shift,
            } => {
                if r < shift + ENVELOPE_VALID_FROM {
                    return f64::INFINITY;
                }
                // Σ_{j ≥ 0} g(r + 1 + j) ≤ ∫_r^∞ g for decreasing g, per side.
                2.0 * constant / ((exponent - 1.0) * (r - shift).powf(exponent - 1.0))
            }
        }
    }

    /// Smallest `K` with `envelope(x) ≤ level` for all `|x| ≥ K + 1`.
    ///
    /// Used for sums whose coefficients are absolutely summable, where the
    /// neglected part is at most `level × Σ|coefficients|`.
    pub fn sup_radius(&self, level: f64) -> usize {
        match *self {
            Decay::Compact { radius } => radius.ceil() as usize + 1,
            Decay::Polynomial {
                exponent,
                constant,
                shift,
            } => {
                let floor = (shift + ENVELOPE_VALID_FROM).ceil();
                let need = (shift + (constant / level).powf(1.0 / exponent) - 1.0).ceil();
                need.max(floor) as usize
            }
        }
    }
}

/// A decay description together with the tail tolerance it must meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    decay: Decay,
    tolerance: f64,
}

impl TruncationPolicy {
    pub fn new(decay: Decay, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::param("tolerance", format!("must be positive, got {tolerance}")));
        }
        if let Decay::Polynomial { exponent, constant, .. } = decay {
            if !(exponent > 1.0) {
                return Err(Error::param(
                    "exponent",
                    format!("decay exponent must exceed 1 for summable tails, got {exponent}"),
                ));
            }
            if !(constant > 0.0) {
                return Err(Error::param("constant", format!("must be positive, got {constant}")));
            }
        }
        Ok(TruncationPolicy { decay, tolerance })
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Radius `K` such that summing over `k ∈ [⌊u⌋ - K, ⌈u⌉ + K]` leaves a
    /// tail `Σ |χ(u - k)| ≤ tolerance` for every `u`.
    pub fn radius(&self) -> usize {
        series_truncation_radius(self)
    }
}

/// See [`TruncationPolicy::radius`].
///
/// Compact support of radius `r` gives `⌈r⌉ + 1`. A polynomial envelope
/// `C/(|x|-s)^p` gives the smallest `K` with `2C / ((p-1)(K-s)^{p-1}) ≤ tol`,
/// by comparing each one-sided tail sum with the integral of the envelope.
pub fn series_truncation_radius(policy: &TruncationPolicy) -> usize {
    match policy.decay {
        Decay::Compact { radius } => radius.ceil() as usize + 1,
        Decay::Polynomial {
            exponent,
            constant,
            shift,
        } => {
            let p1 = exponent - 1.0;
            let need = shift + (2.0 * constant / (p1 * policy.tolerance)).powf(1.0 / p1);
            need.ceil().max((shift + ENVELOPE_VALID_FROM).ceil()) as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_support_radius_is_exact_cutoff() {
        for n in 1..8u32 {
            let p = TruncationPolicy::new(Decay::Compact { radius: n as f64 / 2.0 }, 1e-3).unwrap();
            assert_eq!(p.radius(), (n as f64 / 2.0).ceil() as usize + 1);
        }
    }

    #[test]
    fn quadratic_decay_radius_dominates_integral_bound() {
        let c = 0.3;
        for &tol in &[1e-2, 1e-3, 1e-5] {
            let p = TruncationPolicy::new(Decay::polynomial(2.0, c).unwrap(), tol).unwrap();
            assert!(p.radius() as f64 >= c / tol);
        }
    }

    #[test]
    fn radius_is_monotone_in_tolerance() {
        let decay = Decay::polynomial(2.5, 1.7).unwrap();
        let mut tol = 1e-1;
        let mut last = 0;
        for _ in 0..20 {
            let k = TruncationPolicy::new(decay, tol).unwrap().radius();
            assert!(k >= last);
            last = k;
            tol /= 2.0;
        }
    }

    #[test]
    fn brute_force_tail_is_within_tolerance() {
        for (p, c, s) in [
            (2.0, 2.0 / (std::f64::consts::PI.powi(2)), 0.0),
            (3.0, 1.3, 1.5),
            (4.0, 5.0, 0.5),
        ] {
            let decay = Decay::Polynomial {
                exponent: p,
                constant: c,
                shift: s,
            };
            for &tol in &[1e-2, 1e-3, 1e-4] {
                let k = TruncationPolicy::new(decay, tol).unwrap().radius();
                // worst-case alignment: lattice points exactly K + 1, K + 2, ... away on both sides
                let tail: f64 = (k + 1..=10 * k).map(|j| 2.0 * decay.envelope(j as f64)).sum();
                assert!(tail <= 1.01 * tol, "p={p} tol={tol}: tail {tail}");
            }
        }
    }

    #[test]
    fn rejects_non_summable_decay() {
        assert!(Decay::polynomial(1.0, 1.0).is_err());
        let bad = Decay::Polynomial {
            exponent: 0.5,
            constant: 1.0,
            shift: 0.0,
        };
        assert!(TruncationPolicy::new(bad, 1e-3).is_err());
        assert!(TruncationPolicy::new(Decay::Compact { radius: 1.0 }, 0.0).is_err());
    }

    #[test]
    fn sup_radius_bounds_envelope() {
        let decay = Decay::polynomial(2.0, 0.2).unwrap().widened(1.5);
        for &level in &[1e-3, 1e-6, 1e-9] {
            let k = decay.sup_radius(level);
            assert!(decay.envelope((k + 1) as f64) <= level * (1.0 + 1e-12));
        }
    }
}
