//! Prelec probability weighting `w(p) = exp(-(-ln p)^alpha)`.
//!
//! `alpha = 1` is the identity. For `alpha < 1` the curve overweights
//! probabilities below `1/e`, underweights those above, and passes through
//! `1/e` for every `alpha`.

use crate::error::{domain, Error, Result};

/// Prelec weighting with a fixed `alpha` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prelec {
    alpha: f64,
}

impl Prelec {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self { alpha })
        } else {
            Err(domain(alloc::format!("alpha {alpha} out of (0,1]")))
        }
    }

    /// Non-behavioral (identity) weighting.
    pub const fn identity() -> Self {
        Self { alpha: 1.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == 1.0
    }

    /// `w(p)`, with `w(0) = 0` and `w(1) = 1`.
    pub fn weight(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(alloc::format!("probability {p} outside [0,1]")));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        if p == 1.0 {
            return Ok(1.0);
        }
        if self.is_identity() {
            return Ok(p);
        }
        Ok(self.weight_from_surprisal(-libm::log(p)))
    }

    /// `w` expressed through `s = -ln p > 0`: `exp(-exp(alpha * ln s))`.
    ///
    /// Callers that already know `-ln p` (the success model does) avoid the
    /// round trip through a probability that may underflow.
    pub fn weight_from_surprisal(&self, s: f64) -> f64 {
        if s == f64::INFINITY {
            return 0.0;
        }
        if s <= 0.0 {
            return 1.0;
        }
        libm::exp(-libm::exp(self.alpha * libm::log(s)))
    }

    /// `dw/dp = alpha * w(p) * (-ln p)^(alpha - 1) / p` on the open interval.
    pub fn derivative(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(alloc::format!("weighting derivative needs p in (0,1), got {p}")));
        }
        if self.is_identity() {
            return Ok(1.0);
        }
        let s = -libm::log(p);
        let log_value =
            libm::log(self.alpha) - libm::pow(s, self.alpha) + (self.alpha - 1.0) * libm::log(s) - libm::log(p);
        Ok(libm::exp(log_value))
    }
}

/// Free-function form of [`Prelec::weight`].
pub fn prelec_weight(p: f64, alpha: f64) -> Result<f64> {
    Prelec::new(alpha)?.weight(p)
}

/// Free-function form of [`Prelec::derivative`].
pub fn prelec_weight_derivative(p: f64, alpha: f64) -> Result<f64> {
    Prelec::new(alpha)?.derivative(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::E;

    #[test]
    fn identity_at_alpha_one() {
        assert_eq!(prelec_weight(0.5, 1.0).unwrap(), 0.5);
        assert_eq!(prelec_weight_derivative(0.3, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn inverse_e_is_fixed() {
        let p = 1.0 / E;
        assert_relative_eq!(prelec_weight(p, 0.4).unwrap(), p, max_relative = 1e-14);
        assert_relative_eq!(prelec_weight_derivative(p, 0.6).unwrap(), 0.6, max_relative = 1e-12);
    }

    #[test]
    fn half_at_alpha_half() {
        // exp(-sqrt(ln 2)) evaluated at 40 digits
        assert!((prelec_weight(0.5, 0.5).unwrap() - 0.434_936_771_575_709_9).abs() < 1e-15);
        // d/dp at 40 digits
        assert!((prelec_weight_derivative(0.5, 0.5).unwrap() - 0.522_412_302_744_818_6).abs() < 1e-14);
    }

    #[test]
    fn boundaries_and_domain() {
        let w = Prelec::new(0.3).unwrap();
        assert_eq!(w.weight(0.0).unwrap(), 0.0);
        assert_eq!(w.weight(1.0).unwrap(), 1.0);
        assert!(w.weight(-0.1).is_err());
        assert!(w.weight(1.1).is_err());
        assert!(w.derivative(0.0).is_err());
        assert!(w.derivative(1.0).is_err());
        assert!(Prelec::new(0.0).is_err());
        assert!(Prelec::new(1.0001).is_err());
    }

    #[test]
    fn extreme_small_probability_stays_finite() {
        let w = Prelec::new(0.2).unwrap();
        let v = w.weight(1e-300).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }
}
