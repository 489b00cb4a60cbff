//! Exponential attack-success model `p(x, y) = exp(-x - a) * (1 - exp(-y))`
//! and its defender-perceived composite `w(p) = exp(-(x + k)^alpha)` with
//! exposure offset `k = a - ln(1 - exp(-y))`.

use core::f64::consts::LN_2;

use crate::error::{domain, Result};
use crate::weighting::Prelec;

/// `ln(1 - exp(-y))` for `y > 0`, accurate for both small and large `y`.
pub(crate) fn ln_one_minus_exp_neg(y: f64) -> f64 {
    if y > LN_2 {
        libm::log1p(-libm::exp(-y))
    } else {
        libm::log(-libm::expm1(-y))
    }
}

fn check_non_negative(x: f64, y: f64, a: f64) -> Result<()> {
    if !(x >= 0.0 && y >= 0.0 && a >= 0.0) {
        return Err(domain(alloc::format!("success probability needs x, y, a >= 0, got ({x}, {y}, {a})")));
    }
    Ok(())
}

/// `exp(-x - a) * (1 - exp(-y))`; zero when the asset is not attacked.
pub fn attack_success_prob(x: f64, y: f64, a: f64) -> Result<f64> {
    check_non_negative(x, y, a)?;
    Ok(raw_prob(x, y, a))
}

pub(crate) fn raw_prob(x: f64, y: f64, a: f64) -> f64 {
    -libm::exp(-x - a) * libm::expm1(-y)
}

/// First and second partial derivatives of the success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessPartials {
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dyy: f64,
    pub dxy: f64,
}

pub fn success_prob_partials(x: f64, y: f64, a: f64) -> Result<SuccessPartials> {
    check_non_negative(x, y, a)?;
    let p = raw_prob(x, y, a);
    let q = libm::exp(-x - a - y);
    Ok(SuccessPartials { dx: -p, dy: q, dxx: p, dyy: -q, dxy: -q })
}

/// `k = a - ln(1 - exp(-y))`; infinite when the asset is not attacked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExposureOffset {
    Finite(f64),
    Infinite,
}

impl ExposureOffset {
    pub fn value(&self) -> f64 {
        match *self {
            Self::Finite(k) => k,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }
}

pub fn exposure_offset(y: f64, a: f64) -> Result<ExposureOffset> {
    if !(y >= 0.0 && a >= 0.0) {
        return Err(domain(alloc::format!("exposure offset needs y, a >= 0, got ({y}, {a})")));
    }
    Ok(offset(y, a))
}

pub(crate) fn offset(y: f64, a: f64) -> ExposureOffset {
    if y == 0.0 {
        ExposureOffset::Infinite
    } else if y == f64::INFINITY {
        ExposureOffset::Finite(a)
    } else {
        ExposureOffset::Finite(a - ln_one_minus_exp_neg(y))
    }
}

/// `w_alpha(p(x, y))` computed as `exp(-(x + k)^alpha)`.
pub fn perceived_success_prob(x: f64, y: f64, a: f64, alpha: f64) -> Result<f64> {
    check_non_negative(x, y, a)?;
    let weighting = Prelec::new(alpha)?;
    Ok(perceived(x, y, a, weighting))
}

pub(crate) fn perceived(x: f64, y: f64, a: f64, weighting: Prelec) -> f64 {
    if weighting.is_identity() {
        return raw_prob(x, y, a);
    }
    match offset(y, a) {
        ExposureOffset::Infinite => 0.0,
        ExposureOffset::Finite(k) => weighting.weight_from_surprisal(x + k),
    }
}
