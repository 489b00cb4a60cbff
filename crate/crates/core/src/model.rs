//! Domain types shared by every solver: assets, the game configuration and
//! budget-constrained allocations.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Absolute slack allowed when checking `sum(values) <= budget`.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// One target: what the defender loses and the attacker gains on a successful
/// attack, plus any defense already in place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asset {
    pub loss: f64,
    pub gain: f64,
    pub inherent_defense: f64,
}

impl Asset {
    pub fn new(loss: f64, gain: f64, inherent_defense: f64) -> Self {
        Self { loss, gain, inherent_defense }
    }
}

/// Everything needed to pose the game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub assets: Vec<Asset>,
    pub defender_budget: f64,
    pub attacker_budget: f64,
    pub alpha_d: f64,
    pub alpha_a: f64,
}

impl GameConfig {
    pub fn new(assets: Vec<Asset>, defender_budget: f64, attacker_budget: f64) -> Self {
        Self { assets, defender_budget, attacker_budget, alpha_d: 1.0, alpha_a: 1.0 }
    }

    /// The four-asset instance with `L = G = [1000, 200, 40, 8]`, `a = 1` and
    /// `B = P = 10`, both players non-behavioral.
    pub fn four_asset_reference() -> Self {
        let assets = [1000.0, 200.0, 40.0, 8.0].iter().map(|&v| Asset::new(v, v, 1.0)).collect();
        Self::new(assets, 10.0, 10.0)
    }

    pub fn with_alphas(mut self, alpha_d: f64, alpha_a: f64) -> Self {
        self.alpha_d = alpha_d;
        self.alpha_a = alpha_a;
        self
    }

    pub fn with_budgets(mut self, defender_budget: f64, attacker_budget: f64) -> Self {
        self.defender_budget = defender_budget;
        self.attacker_budget = attacker_budget;
        self
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.assets.iter().map(|a| a.loss).collect()
    }

    pub fn gains(&self) -> Vec<f64> {
        self.assets.iter().map(|a| a.gain).collect()
    }

    /// `L_1 >= L_2 >= ... >= L_n`.
    pub fn sorted_by_loss(&self) -> bool {
        self.assets.windows(2).all(|w| w[0].loss >= w[1].loss)
    }

    pub fn sorted_by_gain(&self) -> bool {
        self.assets.windows(2).all(|w| w[0].gain >= w[1].gain)
    }

    pub fn common_inherent_defense(&self) -> Option<f64> {
        let first = self.assets.first()?.inherent_defense;
        self.assets.iter().all(|a| a.inherent_defense == first).then_some(first)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_config(self)
    }
}

/// A non-negative investment vector tied to the budget it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    values: Vec<f64>,
    budget: f64,
}

impl Allocation {
    /// Checks non-negativity and `sum <= budget + BUDGET_TOLERANCE`.
    pub fn new(values: Vec<f64>, budget: f64) -> Result<Self> {
        if !(budget >= 0.0) || !budget.is_finite() {
            return Err(Error::Domain(alloc::format!("budget {budget} must be finite and >= 0")));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(alloc::format!("entry {} is {v}, must be finite and >= 0", i + 1)));
        }
        let sum: f64 = values.iter().sum();
        if sum > budget + BUDGET_TOLERANCE {
            return Err(Error::Domain(alloc::format!("allocation sums to {sum}, exceeding budget {budget}")));
        }
        Ok(Self { values, budget })
    }

    pub fn zeros(n: usize, budget: f64) -> Self {
        Self { values: vec![0.0; n], budget }
    }

    /// Budget spread evenly over `n` assets.
    pub fn uniform(n: usize, budget: f64) -> Self {
        let share = if n == 0 { 0.0 } else { budget / n as f64 };
        Self { values: vec![share; n], budget }
    }

    // Solver output: clamps tiny negatives and rescales so the sum never
    // exceeds the budget.
    pub(crate) fn from_solver(mut values: Vec<f64>, budget: f64) -> Self {
        for v in values.iter_mut() {
            if !(*v > 0.0) {
                *v = 0.0;
            }
        }
        let sum: f64 = values.iter().sum();
        if sum > budget && sum > 0.0 {
            let scale = budget / sum;
            values.iter_mut().for_each(|v| *v *= scale);
        }
        Self { values, budget }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Max-norm distance to another allocation of the same length.
    pub fn max_abs_diff(&self, other: &Allocation) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max)
    }
}

/// A hard invariant that the configuration breaks.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoAssets,
    NonPositiveLoss { asset: usize },
    NonPositiveGain { asset: usize },
    NegativeInherentDefense { asset: usize },
    NegativeDefenderBudget,
    NegativeAttackerBudget,
    AlphaD,
    AlphaA,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoAssets => f.write_str("at least one asset is required"),
            Self::NonPositiveLoss { asset } => write!(f, "asset {asset}: loss must be > 0"),
            Self::NonPositiveGain { asset } => write!(f, "asset {asset}: gain must be > 0"),
            Self::NegativeInherentDefense { asset } => {
                write!(f, "asset {asset}: inherent defense must be >= 0")
            }
            Self::NegativeDefenderBudget => f.write_str("defender_budget must be >= 0"),
            Self::NegativeAttackerBudget => f.write_str("attacker_budget must be >= 0"),
            Self::AlphaD => f.write_str("alpha_d out of (0,1]"),
            Self::AlphaA => f.write_str("alpha_a out of (0,1]"),
        }
    }
}

/// Conditions that leave the solvers usable but void the concavity and
/// uniqueness guarantees.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// `a_i < 1`, so `p < 1/e` is no longer guaranteed.
    WeakInherentDefense { asset: usize, value: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::WeakInherentDefense { asset, value } => write!(
                f,
                "asset {asset}: inherent defense {value} < 1, success probability may exceed 1/e \
                 (concavity and uniqueness guarantees do not apply)"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn alpha_ok(alpha: f64) -> bool {
    alpha > 0.0 && alpha <= 1.0
}

/// Checks every invariant of [`GameConfig`]. Asset indices in the report are
/// 1-based.
pub fn validate_config(config: &GameConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    if config.assets.is_empty() {
        report.violations.push(Violation::NoAssets);
    }
    for (i, asset) in config.assets.iter().enumerate() {
        let asset_no = i + 1;
        if !(asset.loss > 0.0 && asset.loss.is_finite()) {
            report.violations.push(Violation::NonPositiveLoss { asset: asset_no });
        }
        if !(asset.gain > 0.0 && asset.gain.is_finite()) {
            report.violations.push(Violation::NonPositiveGain { asset: asset_no });
        }
        if !(asset.inherent_defense >= 0.0 && asset.inherent_defense.is_finite()) {
            report.violations.push(Violation::NegativeInherentDefense { asset: asset_no });
        } else if asset.inherent_defense < 1.0 {
            report.warnings.push(Warning::WeakInherentDefense { asset: asset_no, value: asset.inherent_defense });
        }
    }
    if !(config.defender_budget >= 0.0 && config.defender_budget.is_finite()) {
        report.violations.push(Violation::NegativeDefenderBudget);
    }
    if !(config.attacker_budget >= 0.0 && config.attacker_budget.is_finite()) {
        report.violations.push(Violation::NegativeAttackerBudget);
    }
    if !alpha_ok(config.alpha_d) {
        report.violations.push(Violation::AlphaD);
    }
    if !alpha_ok(config.alpha_a) {
        report.violations.push(Violation::AlphaA);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_is_clean() {
        let report = GameConfig::four_asset_reference().validate();
        assert!(report.is_valid());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn zero_inherent_defense_warns_only() {
        let config = GameConfig::new(vec![Asset::new(1.0, 1.0, 0.0)], 1.0, 1.0);
        let report = config.validate();
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn alpha_zero_is_a_violation() {
        let config = GameConfig::four_asset_reference().with_alphas(0.0, 1.0);
        let report = config.validate();
        assert_eq!(report.violations, vec![Violation::AlphaD]);
        assert_eq!(alloc::format!("{}", report.violations[0]), "alpha_d out of (0,1]");
    }

    #[test]
    fn rejects_zero_valued_assets_and_bad_budgets() {
        let config = GameConfig::new(vec![Asset::new(0.0, 1.0, 1.0), Asset::new(1.0, -2.0, -1.0)], -1.0, 1.0)
            .with_alphas(1.0, 1.5);
        let v = config.validate().violations;
        assert!(v.contains(&Violation::NonPositiveLoss { asset: 1 }));
        assert!(v.contains(&Violation::NonPositiveGain { asset: 2 }));
        assert!(v.contains(&Violation::NegativeInherentDefense { asset: 2 }));
        assert!(v.contains(&Violation::NegativeDefenderBudget));
        assert!(v.contains(&Violation::AlphaA));
    }

    #[test]
    fn validation_is_idempotent() {
        let config = GameConfig::new(vec![Asset::new(1.0, 1.0, 0.5)], 1.0, 1.0).with_alphas(2.0, 0.5);
        assert_eq!(config.validate(), config.validate());
    }

    #[test]
    fn allocation_feasibility() {
        assert!(Allocation::new(vec![5.0, 5.0 + 1e-10], 10.0).is_ok());
        assert!(Allocation::new(vec![5.0, 5.0 + 1e-8], 10.0).is_err());
        assert!(Allocation::new(vec![-1e-12, 1.0], 10.0).is_err());
        assert!(Allocation::new(vec![1.0], -1.0).is_err());
    }

    #[test]
    fn ordering_flags() {
        let config = GameConfig::four_asset_reference();
        assert!(config.sorted_by_loss());
        assert_eq!(config.common_inherent_defense(), Some(1.0));
        let mut swapped = config.clone();
        swapped.assets.swap(0, 1);
        assert!(!swapped.sorted_by_loss());
    }
}
