//! Quadrature, special functions and series truncation shared by every module.

mod quadrature;
mod special;
mod truncation;

pub use quadrature::{adaptive_quadrature, integrate_with_breakpoints, split_points, QuadratureResult, MAX_PANELS};
pub(crate) use quadrature::{integrate_pieces, kronrod_21};
pub use special::{
    bessel_j_half, bessel_j_half_recurrence, bessel_j_half_scaled, bessel_j_half_series, gamma_fn, sinc, sine_integral,
    BESSEL_CROSSOVER, MAX_BESSEL_ORDER_NUM, SINE_INTEGRAL_ASYMPTOTIC_FROM,
};
pub(crate) use special::{gamma_positive, j_half_scaled, sine_integral_large};
pub use truncation::{series_truncation_radius, Decay, TruncationPolicy, ENVELOPE_VALID_FROM};
