//! Kernels: central B-splines, Fejér, Bochner-Riesz, their sliding averages,
//! and admissibility checks.

mod averaged;
mod bandlimited;
mod bspline;
mod checks;

use std::sync::OnceLock;

pub use averaged::{average, average_with_mode, averaged_derivative_eval, AveragedKernel, EvaluationMode, GridCache};
pub use bandlimited::{bochner_riesz_eval, fejer_eval, BochnerRiesz, BOCHNER_RIESZ_GAMMAS, FEJER_DECAY_CONSTANT};
pub use bspline::{bspline_derivative_eval, bspline_eval, bspline_knots, MAX_BSPLINE_ORDER};
pub use checks::{
    absolute_moment_sup, admissibility, averaged_fourier_identity_check, check_partition_of_unity, fourier_check,
    fourier_transform, half_unit_grid, l1_norm, l1_norm_with_tail, unit_grid, Admissibility, FourierCheck,
    FourierValue, PartitionCheck, L1_TAIL_TARGET,
};

use crate::error::{Error, Result};
use crate::numerics::Decay;

/// What a [`Kernel`] evaluates.
#[derive(Debug, Clone)]
pub enum KernelShape {
    BSpline(u32),
    Fejer,
    BochnerRiesz(BochnerRiesz),
    Averaged(Box<AveragedKernel>),
    /// `factor · inner`, useful as a deliberately non-normalized kernel.
    Scaled(Box<Kernel>, f64),
}

/// An immutable kernel with its support/decay metadata.
#[derive(Debug, Clone)]
pub struct Kernel {
    id: String,
    shape: KernelShape,
    support: Decay,
    breakpoints: Vec<f64>,
    l1_norm_hint: Option<f64>,
    nonnegative: bool,
    continuous: bool,
    l1_cache: OnceLock<f64>,
}

impl Kernel {
    fn build(
        id: String,
        shape: KernelShape,
        support: Decay,
        breakpoints: Vec<f64>,
        l1_norm_hint: Option<f64>,
        nonnegative: bool,
        continuous: bool,
    ) -> Self {
        Kernel {
            id,
            shape,
            support,
            breakpoints,
            l1_norm_hint,
            nonnegative,
            continuous,
            l1_cache: OnceLock::new(),
        }
    }

    /// Central B-spline `M_n`. `M_1` is discontinuous and only meant as an
    /// averaging base or for indicator sampling.
    pub fn bspline(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_BSPLINE_ORDER {
            return Err(Error::param(
                "n",
                format!("B-spline order must be in 1..={MAX_BSPLINE_ORDER}, got {n}"),
            ));
        }
        Ok(Self::build(
            format!("bspline:{n}"),
            KernelShape::BSpline(n),
            Decay::Compact { radius: n as f64 / 2.0 },
            bspline_knots(n),
            Some(1.0),
            true,
            n >= 2,
        ))
    }

    pub fn fejer() -> Self {
        Self::build(
            "fejer".into(),
            KernelShape::Fejer,
            bandlimited::fejer_decay(),
            Vec::new(),
            Some(1.0),
            true,
            true,
        )
    }

    pub fn bochner_riesz(gamma: u32) -> Result<Self> {
        let b = BochnerRiesz::new(gamma)?;
        Ok(Self::build(
            format!("bochner-riesz:{gamma}"),
            KernelShape::BochnerRiesz(b),
            b.decay(),
            Vec::new(),
            None,
            false,
            true,
        ))
    }

    /// `factor · inner`.
    pub fn scaled(inner: &Kernel, factor: f64) -> Self {
        let support = match inner.support {
            Decay::Polynomial {
                exponent,
                constant,
                shift,
            } => Decay::Polynomial {
                exponent,
                constant: constant * factor.abs().max(f64::MIN_POSITIVE),
                shift,
            },
            compact => compact,
        };
        Self::build(
            format!("scale:{factor}:{}", inner.id),
            KernelShape::Scaled(Box::new(inner.clone()), factor),
            support,
            inner.breakpoints.clone(),
            inner.l1_norm_hint.map(|h| h * factor.abs()),
            inner.nonnegative && factor >= 0.0,
            inner.continuous,
        )
    }

    pub(crate) fn from_averaged(ak: AveragedKernel) -> Self {
        let base = ak.base();
        // The average of a non-negative kernel keeps its integral.
        let hint = if base.nonnegative { base.l1_norm_hint } else { None };
        Self::build(
            format!("avg:{}:{}", ak.m(), base.id),
            KernelShape::Averaged(Box::new(ak.clone())),
            ak.support(),
            ak.breakpoints(),
            hint,
            base.nonnegative,
            true,
        )
    }

    /// Parses a registry id: `bspline:n`, `fejer`, `bochner-riesz:g`,
    /// `avg:m:<base-id>`, or `scale:c:<base-id>`.
    pub fn from_id(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownKernel(id.to_string());
        let id = id.trim();
        if id == "fejer" {
            return Ok(Self::fejer());
        }
        let (head, rest) = id.split_once(':').ok_or_else(unknown)?;
        match head {
            "bspline" => Self::bspline(rest.parse().map_err(|_| unknown())?),
            "bochner-riesz" => Self::bochner_riesz(rest.parse().map_err(|_| unknown())?),
            "avg" => {
                let (m, base) = rest.split_once(':').ok_or_else(unknown)?;
                let m: u32 = m.parse().map_err(|_| unknown())?;
                Ok(average(&Self::from_id(base)?, m)?.to_kernel())
            }
            "scale" => {
                let (c, base) = rest.split_once(':').ok_or_else(unknown)?;
                let c: f64 = c.parse().map_err(|_| unknown())?;
                Ok(Self::scaled(&Self::from_id(base)?, c))
            }
            _ => Err(unknown()),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    pub fn support(&self) -> Decay {
        self.support
    }

    /// Points where the kernel or one of its derivatives may jump.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn l1_norm_hint(&self) -> Option<f64> {
        self.l1_norm_hint
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    /// The averaged kernel behind an `avg:` kernel.
    pub fn as_averaged(&self) -> Option<&AveragedKernel> {
        match &self.shape {
            KernelShape::Averaged(ak) => Some(ak),
            _ => None,
        }
    }

    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        match &self.shape {
            &KernelShape::BSpline(n) => bspline_eval(n, x),
            KernelShape::Fejer => fejer_eval(x),
            KernelShape::BochnerRiesz(b) => b.eval(x),
            KernelShape::Averaged(ak) => ak.evaluate(x),
            KernelShape::Scaled(inner, c) => c * inner.evaluate(x),
        }
    }

    /// `‖χ‖₁`, computed once by quadrature and cached; see [`l1_norm`].
    pub fn l1_norm(&self) -> f64 {
        *self.l1_cache.get_or_init(|| l1_norm_with_tail(self).0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trips_ids() {
        for id in [
            "bspline:3",
            "fejer",
            "bochner-riesz:2",
            "avg:2:bspline:2",
            "avg:1:fejer",
            "scale:0.5:bspline:2",
        ] {
            assert_eq!(Kernel::from_id(id).unwrap().id(), id);
        }
        let nested = Kernel::from_id("avg:1:avg:1:bspline:1").unwrap();
        assert!((nested.evaluate(0.0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn registry_rejects_unknown_ids() {
        for id in [
            "",
            "sinc",
            "bspline",
            "bspline:x",
            "bspline:0",
            "bochner-riesz:9",
            "avg:0:fejer",
            "avg:2",
            "avg:2:nope",
        ] {
            assert!(Kernel::from_id(id).is_err(), "{id}");
        }
        assert!(matches!(Kernel::from_id("lanczos"), Err(Error::UnknownKernel(_))));
    }

    #[test]
    fn compact_kernels_vanish_outside_support() {
        for id in ["bspline:2", "bspline:5", "avg:3:bspline:2", "avg:2:bspline:4"] {
            let k = Kernel::from_id(id).unwrap();
            let Decay::Compact { radius } = k.support() else {
                panic!()
            };
            for i in 0..50 {
                let x = radius + 1e-9 + 0.1 * i as f64;
                assert_eq!(k.evaluate(x), 0.0, "{id} at {x}");
                assert_eq!(k.evaluate(-x), 0.0, "{id} at {}", -x);
            }
        }
    }

    #[test]
    fn metadata_flags() {
        assert!(!Kernel::bspline(1).unwrap().is_continuous());
        assert!(Kernel::from_id("avg:1:bspline:1").unwrap().is_continuous());
        assert!(!Kernel::bochner_riesz(1).unwrap().is_nonnegative());
        assert!(Kernel::fejer().is_nonnegative());
        assert_eq!(
            Kernel::from_id("scale:0.5:bspline:2").unwrap().l1_norm_hint(),
            Some(0.5)
        );
    }
}
