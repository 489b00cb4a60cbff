//! Objective evaluation and numerical checks of the structural properties of
//! the game: ordering of defense investments, convexity/concavity of the
//! perceived success probability, and the profitable deviation available to a
//! behavioral defender at the rational allocation.

use alloc::vec::Vec;
use core::f64::consts::E;

use crate::best_response::defender_marginal;
use crate::error::{domain, precondition, Result};
use crate::model::{Allocation, GameConfig};
use crate::success::{offset, perceived, raw_prob};
use crate::weighting::Prelec;

fn pairs<'a>(
    x: &'a Allocation,
    y: &'a Allocation,
    config: &'a GameConfig,
) -> impl Iterator<Item = (&'a crate::model::Asset, f64, f64)> + 'a {
    assert_eq!(x.len(), config.n_assets(), "defense allocation length");
    assert_eq!(y.len(), config.n_assets(), "attack allocation length");
    config.assets.iter().zip(x.values().iter().zip(y.values())).map(|(asset, (&xi, &yi))| (asset, xi, yi))
}

fn weighting(alpha: f64) -> Prelec {
    Prelec::new(alpha).unwrap_or_else(|_| panic!("alpha {alpha} out of (0,1]; validate the config first"))
}

/// `sum L_i p_i(x_i, y_i)`. With `zero_inherent` the success probability is
/// evaluated as if every `a_i` were 0.
///
/// # Panics
/// If the allocation lengths do not match the number of assets.
pub fn true_expected_loss(x: &Allocation, y: &Allocation, config: &GameConfig, zero_inherent: bool) -> f64 {
    pairs(x, y, config)
        .map(|(asset, xi, yi)| {
            let a = if zero_inherent { 0.0 } else { asset.inherent_defense };
            asset.loss * raw_prob(xi, yi, a)
        })
        .sum()
}

/// `sum L_i w_D(p_i(x_i, y_i))`, the objective the defender minimizes.
pub fn perceived_cost(x: &Allocation, y: &Allocation, config: &GameConfig) -> f64 {
    let w = weighting(config.alpha_d);
    pairs(x, y, config).map(|(asset, xi, yi)| asset.loss * perceived(xi, yi, asset.inherent_defense, w)).sum()
}

/// `sum G_i p_i`, or `sum G_i w_A(p_i)` when `perceived` is set.
pub fn attacker_utility(x: &Allocation, y: &Allocation, config: &GameConfig, perceived_prob: bool) -> f64 {
    let w = if perceived_prob { weighting(config.alpha_a) } else { Prelec::identity() };
    pairs(x, y, config).map(|(asset, xi, yi)| asset.gain * perceived(xi, yi, asset.inherent_defense, w)).sum()
}

/// Result of checking that defense investments follow the loss ordering.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderingCheck {
    Holds,
    /// 1-based indices `(i, i + 1)` of the first pair with `x_i < x_{i+1}`.
    Violated {
        first: (usize, usize),
    },
    NotApplicable(&'static str),
}

impl OrderingCheck {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds)
    }
}

pub const ORDERING_TOLERANCE: f64 = 1e-9;

/// With losses descending, attacks descending and a common inherent defense,
/// the optimal defense must be non-increasing in asset index.
pub fn check_defense_ordering(x: &Allocation, config: &GameConfig, y: &Allocation) -> OrderingCheck {
    if x.len() != config.n_assets() || y.len() != config.n_assets() {
        return OrderingCheck::NotApplicable("allocation length differs from asset count");
    }
    if !config.sorted_by_loss() {
        return OrderingCheck::NotApplicable("losses are not in descending order");
    }
    if !y.values().windows(2).all(|w| w[0] >= w[1]) {
        return OrderingCheck::NotApplicable("attack investments are not in descending order");
    }
    if config.common_inherent_defense().is_none() {
        return OrderingCheck::NotApplicable("inherent defenses differ across assets");
    }
    match x.values().windows(2).position(|w| w[0] < w[1] - ORDERING_TOLERANCE) {
        None => OrderingCheck::Holds,
        Some(i) => OrderingCheck::Violated { first: (i + 1, i + 2) },
    }
}

/// The funded asset (other than the first) with the largest exposure offset;
/// ties go to the later asset. 0-based.
pub fn default_deviation_source(x: &Allocation, y: &Allocation, config: &GameConfig) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 1..x.len() {
        if x.get(i) <= 0.0 {
            continue;
        }
        let k = offset(y.get(i), config.assets[i].inherent_defense).value();
        if best.is_none_or(|(_, bk)| k >= bk) {
            best = Some((i, k));
        }
    }
    best.map(|(i, _)| i)
}

/// Perceived-cost reduction `C_D(x) - C_D(x')` under `config.alpha_d`, where
/// `x'` moves `epsilon` of defense from asset `from` (0-based; defaults to
/// [`default_deviation_source`]) onto the first asset.
pub fn deviation_gain(
    x_rational: &Allocation,
    y: &Allocation,
    config: &GameConfig,
    epsilon: f64,
    from: Option<usize>,
) -> Result<f64> {
    let j = deviation_source(x_rational, y, config, from)?;
    if !(epsilon > 0.0) || epsilon >= x_rational.get(j) {
        return Err(domain(alloc::format!("epsilon {epsilon} must lie in (0, x_{} = {})", j + 1, x_rational.get(j))));
    }
    let mut moved = x_rational.values().to_vec();
    moved[0] += epsilon;
    moved[j] -= epsilon;
    let moved = Allocation::from_solver(moved, x_rational.budget());
    Ok(perceived_cost(x_rational, y, config) - perceived_cost(&moved, y, config))
}

/// `lim gain(epsilon) / epsilon` as `epsilon -> 0`: the difference of the
/// perceived-cost gradients, `alpha_d * (m_1(x_1) - m_j(x_j))`.
pub fn deviation_gain_rate(
    x_rational: &Allocation,
    y: &Allocation,
    config: &GameConfig,
    from: Option<usize>,
) -> Result<f64> {
    let j = deviation_source(x_rational, y, config, from)?;
    let m = |i: usize| defender_marginal(x_rational.get(i), &config.assets[i], y.get(i), config.alpha_d);
    Ok(config.alpha_d * (m(0)? - m(j)?))
}

fn deviation_source(x: &Allocation, y: &Allocation, config: &GameConfig, from: Option<usize>) -> Result<usize> {
    if x.len() != config.n_assets() || y.len() != config.n_assets() {
        return Err(precondition("allocation length differs from asset count"));
    }
    let j = match from {
        Some(j) => j,
        None => default_deviation_source(x, y, config)
            .ok_or_else(|| precondition("no funded asset besides the first to move investment from"))?,
    };
    if j == 0 || j >= x.len() {
        return Err(precondition(alloc::format!("deviation source {} must be a later asset", j + 1)));
    }
    Ok(j)
}

/// Finite-difference step used by [`convexity_scan`].
pub const SCAN_STEP: f64 = 1e-5;
/// Absolute slack on second-difference sign tests.
pub const SCAN_TOLERANCE: f64 = 1e-9;

/// Points and parameters for [`convexity_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub alphas: Vec<f64>,
    pub inherent_defense: f64,
}

impl ScanGrid {
    /// `count` evenly spaced points on `[0, upper]` for both investments.
    pub fn square(upper: f64, count: usize, alphas: Vec<f64>, inherent_defense: f64) -> Self {
        let axis: Vec<f64> =
            (0..count).map(|i| if count == 1 { 0.0 } else { upper * i as f64 / (count - 1) as f64 }).collect();
        Self { xs: axis.clone(), ys: axis, alphas, inherent_defense }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curvature {
    /// Perceived success probability must be convex in defense.
    ConvexInDefense,
    /// Must be concave in attack where `p < 1/e`.
    ConcaveInAttack,
    /// Mixed partial must be non-positive where `p < 1/e`.
    MixedNonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanViolation {
    pub test: Curvature,
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    /// The offending second-difference quotient.
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanReport {
    /// Sorted by grid index (alpha, then x, then y).
    pub violations: Vec<ScanViolation>,
    /// Points where `p >= 1/e`, so the attack-side tests were skipped.
    pub out_of_regime: usize,
    pub points: usize,
}

/// Second-difference sign tests of `w_alpha(p(x, y))` over a grid. Stencils
/// are central, or forward when a coordinate is within one step of zero.
pub fn convexity_scan(grid: &ScanGrid) -> Result<ScanReport> {
    let a = grid.inherent_defense;
    if !(a >= 0.0) {
        return Err(domain("inherent defense must be >= 0"));
    }
    let h = SCAN_STEP;
    let mut report = ScanReport::default();
    for &alpha in &grid.alphas {
        let w = Prelec::new(alpha)?;
        let f = |x: f64, y: f64| perceived(x, y, a, w);
        for &x in &grid.xs {
            for &y in &grid.ys {
                if !(x >= 0.0 && y >= 0.0) {
                    return Err(domain("scan grid coordinates must be >= 0"));
                }
                report.points += 1;
                // stencil origins: centre for central, or the boundary point
                let cx = if x >= h { x } else { x + h };
                let cy = if y >= h { y } else { y + h };
                let dxx = (f(cx + h, y) - 2.0 * f(cx, y) + f(cx - h, y)) / (h * h);
                if dxx < -SCAN_TOLERANCE {
                    report.violations.push(ScanViolation { test: Curvature::ConvexInDefense, x, y, alpha, value: dxx });
                }
                if raw_prob(x, y, a) >= 1.0 / E {
                    report.out_of_regime += 1;
                    continue;
                }
                let dyy = (f(x, cy + h) - 2.0 * f(x, cy) + f(x, cy - h)) / (h * h);
                if dyy > SCAN_TOLERANCE {
                    report.violations.push(ScanViolation { test: Curvature::ConcaveInAttack, x, y, alpha, value: dyy });
                }
                let dxy =
                    (f(cx + h, cy + h) - f(cx + h, cy - h) - f(cx - h, cy + h) + f(cx - h, cy - h)) / (4.0 * h * h);
                if dxy > SCAN_TOLERANCE {
                    report.violations.push(ScanViolation {
                        test: Curvature::MixedNonPositive,
                        x,
                        y,
                        alpha,
                        value: dxy,
                    });
                }
            }
        }
    }
    Ok(report)
}
