//! Seeded random instances that stay inside the hypotheses of the ordering
//! and closed-form results: losses log-uniform on `[1, 1000]` in descending
//! order, gains ordered the same way with ratios at least as spread as the
//! losses, inherent defense 1, budgets uniform on `[1, 20]`.

use alloc::vec::Vec;

use rand::Rng;

use crate::equilibrium::random_allocation;
use crate::model::{Allocation, Asset, GameConfig};

fn descending_losses<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut losses: Vec<f64> = (0..n).map(|_| libm::pow(10.0, 3.0 * rng.gen::<f64>())).collect();
    losses.sort_by(|a, b| b.total_cmp(a));
    losses
}

fn budget<R: Rng>(rng: &mut R) -> f64 {
    1.0 + 19.0 * rng.gen::<f64>()
}

/// Gains `G_i = c_i L_i` with `c` non-increasing in `[1, 3]`, so that
/// `G_i / G_j >= L_i / L_j` for `i < j`.
pub fn ordered_instance<R: Rng>(rng: &mut R, n: usize) -> GameConfig {
    let losses = descending_losses(rng, n);
    let mut scales: Vec<f64> = (0..n).map(|_| 1.0 + 2.0 * rng.gen::<f64>()).collect();
    scales.sort_by(|a, b| b.total_cmp(a));
    let assets = losses.iter().zip(&scales).map(|(&l, &c)| Asset::new(l, c * l, 1.0)).collect();
    GameConfig::new(assets, budget(rng), budget(rng))
}

/// Gains proportional to losses with a single random factor in `[0.1, 10]`.
pub fn proportional_instance<R: Rng>(rng: &mut R, n: usize) -> GameConfig {
    let losses = descending_losses(rng, n);
    let factor = libm::pow(10.0, 2.0 * rng.gen::<f64>() - 1.0);
    let assets = losses.iter().map(|&l| Asset::new(l, factor * l, 1.0)).collect();
    GameConfig::new(assets, budget(rng), budget(rng))
}

/// An ordered instance plus a descending attack allocation spending the whole
/// attacker budget.
pub fn ordering_instance<R: Rng>(rng: &mut R, n: usize) -> (GameConfig, Allocation) {
    let config = ordered_instance(rng, n);
    let mut y = random_allocation(rng, n, config.attacker_budget).into_values();
    y.sort_by(|a, b| b.total_cmp(a));
    let y = Allocation::new(y, config.attacker_budget).expect("sorted copy of a feasible allocation");
    (config, y)
}
