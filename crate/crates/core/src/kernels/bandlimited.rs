use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::{gamma_positive, j_half_scaled, sinc, Decay};

/// Decay constant of the Fejér kernel: `F(x) ≤ (2/π²) / x²`.
pub const FEJER_DECAY_CONSTANT: f64 = 2.0 / (PI * PI);

/// Fejér kernel `F(x) = sinc²(x/2) / 2`.
pub fn fejer_eval(x: f64) -> f64 {
    let s = sinc(0.5 * x);
    0.5 * s * s
}

pub fn fejer_decay() -> Decay {
    Decay::Polynomial {
        exponent: 2.0,
        constant: FEJER_DECAY_CONSTANT,
        shift: 0.0,
    }
}

/// Smallest and largest accepted Bochner-Riesz exponent.
pub const BOCHNER_RIESZ_GAMMAS: std::ops::RangeInclusive<u32> = 1..=5;

/// Bochner-Riesz kernel `b_γ(x) = 2^γ Γ(γ+1)/√(2π) · |x|^{-1/2-γ} J_{1/2+γ}(|x|)`
/// for integer γ, normalized so that its Fourier transform is `(1 - v²)_+^γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BochnerRiesz {
    gamma: u32,
    prefactor: f64,
    decay_constant: f64,
}

impl BochnerRiesz {
    pub fn new(gamma: u32) -> Result<Self> {
        if !BOCHNER_RIESZ_GAMMAS.contains(&gamma) {
            return Err(Error::domain(
                "bochner_riesz",
                format!("gamma must be an integer in 1..=5, got {gamma}"),
            ));
        }
        let g = gamma as f64;
        let prefactor = 2f64.powf(g) * gamma_positive(g + 1.0) / (2.0 * PI).sqrt();
        static CALIBRATED: [OnceLock<f64>; 5] = [const { OnceLock::new() }; 5];
        let mut kernel = BochnerRiesz {
            gamma,
            prefactor,
            decay_constant: 0.0,
        };
        kernel.decay_constant = *CALIBRATED[gamma as usize - 1].get_or_init(|| kernel.calibrate_envelope());
        Ok(kernel)
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * j_half_scaled(2 * self.gamma + 1, x.abs())
    }

    pub fn decay_exponent(&self) -> f64 {
        1.0 + self.gamma as f64
    }

    pub fn decay(&self) -> Decay {
        Decay::Polynomial {
            exponent: self.decay_exponent(),
            constant: self.decay_constant,
            shift: 0.0,
        }
    }

    // Envelope constant fitted as the largest |b(x)| x^{1+γ} on [10, 100],
    // inflated by 10%.
    fn calibrate_envelope(&self) -> f64 {
        let p = self.decay_exponent();
        let worst = (0..=9000)
            .map(|i| 10.0 + 0.01 * i as f64)
            .map(|x| self.eval(x).abs() * x.powf(p))
            .fold(0.0, f64::max);
        1.1 * worst
    }
}

/// `b_γ(x)` for real `gamma`; only integers in `1..=5` are supported.
pub fn bochner_riesz_eval(gamma: f64, x: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::domain(
            "bochner_riesz_eval",
            format!("gamma must be positive, got {gamma}"),
        ));
    }
    if gamma.fract() != 0.0 || gamma > *BOCHNER_RIESZ_GAMMAS.end() as f64 {
        return Err(Error::domain(
            "bochner_riesz_eval",
            format!("only integer gamma in 1..=5 has a closed form here, got {gamma}"),
        ));
    }
    Ok(BochnerRiesz::new(gamma as u32)?.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fejer_values() {
        assert_eq!(fejer_eval(0.0), 0.5);
        assert!(fejer_eval(2.0).abs() < 1e-32);
        assert_relative_eq!(fejer_eval(1.0), 2.0 / (PI * PI), max_relative = 1e-15);
        for i in 1..2000 {
            let x = 0.05 * i as f64;
            assert!(fejer_eval(x) >= 0.0);
            assert!(fejer_eval(x) <= FEJER_DECAY_CONSTANT / (x * x) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn bochner_riesz_at_origin_from_series_leading_term() {
        // Γ(γ+1) / (2√π Γ(γ+3/2)); γ = 1 gives 2/(3π)
        assert_relative_eq!(
            bochner_riesz_eval(1.0, 0.0).unwrap(),
            2.0 / (3.0 * PI),
            max_relative = 1e-13
        );
        for g in 1..=5u32 {
            let gf = g as f64;
            let expected = gamma_positive(gf + 1.0) / (2.0 * PI.sqrt() * gamma_positive(gf + 1.5));
            assert_relative_eq!(bochner_riesz_eval(gf, 0.0).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn bochner_riesz_closed_form_at_pi() {
        // b_1(π) = (2/√(2π)) π^{-3/2} J_{3/2}(π), with J_{3/2}(π) = √2/π
        assert_relative_eq!(
            bochner_riesz_eval(1.0, PI).unwrap(),
            2.0 / PI.powi(3),
            max_relative = 1e-13
        );
        // b_1(x) = (2/π)(sin x / x - cos x) / x² for x ≥ 1
        for i in 0..100 {
            let x = 1.0 + 0.37 * i as f64;
            let closed = (2.0 / PI) * (x.sin() / x - x.cos()) / (x * x);
            assert_relative_eq!(
                bochner_riesz_eval(1.0, x).unwrap(),
                closed,
                max_relative = 1e-11,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn bochner_riesz_is_even() {
        for g in 1..=3 {
            for i in 0..300 {
                let x = 0.1 * i as f64;
                assert_eq!(
                    bochner_riesz_eval(g as f64, -x).unwrap(),
                    bochner_riesz_eval(g as f64, x).unwrap()
                );
            }
        }
    }

    #[test]
    fn bochner_riesz_rejects_bad_gamma() {
        assert!(bochner_riesz_eval(0.0, 1.0).is_err());
        assert!(bochner_riesz_eval(-1.0, 1.0).is_err());
        assert!(bochner_riesz_eval(1.5, 1.0).is_err());
        assert!(BochnerRiesz::new(6).is_err());
    }

    #[test]
    fn calibrated_envelope_holds_far_out() {
        for g in 1..=5 {
            let b = BochnerRiesz::new(g).unwrap();
            let decay = b.decay();
            for i in 0..20000 {
                let x = 10.0 + 0.5 * i as f64;
                assert!(b.eval(x).abs() <= decay.envelope(x), "γ={g} x={x}");
            }
        }
    }
}
