//! Pure-strategy equilibria: best-response dynamics, the closed-form
//! equilibrium of the non-behavioral game, and an empirical uniqueness probe.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::best_response::{attacker_best_response, defender_best_response, BestResponseOptions};
use crate::error::{precondition, Error, Result};
use crate::model::{Allocation, GameConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsOptions {
    pub tolerance: f64,
    pub max_rounds: usize,
    /// Weight on the fresh attacker best response, in `(0, 1]`.
    pub damping: f64,
    /// Halve the damping (down to [`DynamicsOptions::min_damping`]) whenever
    /// the residual has not improved for `patience` rounds.
    pub adaptive: bool,
    pub patience: usize,
    pub min_damping: f64,
    /// Starting attack; uniform `P / n` when unset.
    pub initial_y: Option<Allocation>,
    pub best_response: BestResponseOptions,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_rounds: 10_000,
            damping: 1.0,
            adaptive: true,
            patience: 10,
            min_damping: 1.0 / 1024.0,
            initial_y: None,
            best_response: BestResponseOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub x_star: Allocation,
    pub y_star: Allocation,
    pub iterations: usize,
    /// Max-norm of the last joint update.
    pub residual: f64,
    pub converged: bool,
    /// Max-norm change from one further best response by each player.
    pub best_response_gap: f64,
    /// Damping in force when the dynamics stopped.
    pub final_damping: f64,
}

/// Alternating best-response dynamics:
/// `x <- BR_D(y)`, then `y <- (1 - theta) y + theta BR_A(x)`.
///
/// The residual of a round is the larger of the change in `x` and the gap
/// `|BR_A(x) - y|`; it is zero exactly at a mutual best response. The
/// returned pair is `(x, BR_A(x))` from the last round. Running out of rounds
/// is reported through `converged`, not as an error.
pub fn solve_pne(config: &GameConfig, opts: &DynamicsOptions) -> Result<EquilibriumResult> {
    let report = config.validate();
    if let Some(v) = report.violations.first() {
        return Err(precondition(alloc::format!("invalid config: {v}")));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(precondition("damping must lie in (0, 1]"));
    }
    let n = config.n_assets();
    let br = &opts.best_response;
    let mut y = match &opts.initial_y {
        Some(initial) => {
            if initial.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: initial.len() });
            }
            Allocation::new(initial.values().to_vec(), config.attacker_budget)?
        }
        None => Allocation::uniform(n, config.attacker_budget),
    };

    let mut theta = opts.damping;
    let mut x_prev: Option<Allocation> = None;
    let mut best_residual = f64::INFINITY;
    let mut stalled = 0usize;
    let mut last = None;
    for round in 1..=opts.max_rounds {
        let x = defender_best_response(&y, config, br)?;
        let y_br = attacker_best_response(&x, config, br)?;
        let x_step = x_prev.as_ref().map_or(0.0, |p| p.max_abs_diff(&x));
        let residual = x_step.max(y_br.max_abs_diff(&y));
        if residual < opts.tolerance {
            last = Some((x, y_br, round, residual, true));
            break;
        }
        if residual < best_residual {
            best_residual = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if opts.adaptive && stalled >= opts.patience && theta > opts.min_damping {
                theta = (0.5 * theta).max(opts.min_damping);
                stalled = 0;
                best_residual = residual;
            }
        }
        let mixed: Vec<f64> =
            y.values().iter().zip(y_br.values()).map(|(old, new)| (1.0 - theta) * old + theta * new).collect();
        let next_y = Allocation::from_solver(mixed, config.attacker_budget);
        if round == opts.max_rounds {
            last = Some((x, y_br, round, residual, false));
            break;
        }
        y = next_y;
        x_prev = Some(x);
    }
    let (x_star, y_star, iterations, residual, converged) = match last {
        Some(state) => state,
        None => {
            // max_rounds == 0: report the starting point unconverged
            let x = defender_best_response(&y, config, br)?;
            (x, y.clone(), 0, f64::INFINITY, false)
        }
    };
    let x_check = defender_best_response(&y_star, config, br)?;
    let y_check = attacker_best_response(&x_star, config, br)?;
    let best_response_gap = x_check.max_abs_diff(&x_star).max(y_check.max_abs_diff(&y_star));
    Ok(EquilibriumResult { x_star, y_star, iterations, residual, converged, best_response_gap, final_damping: theta })
}

/// Closed-form equilibrium of the non-behavioral game with ordered values.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormPne {
    pub x_star: Allocation,
    pub y_star: Allocation,
    /// Number of assets receiving defense.
    pub defender_support: usize,
    /// Number of assets receiving attack.
    pub attacker_support: usize,
}

fn log_spread(values: &[f64], k: usize) -> f64 {
    // ln(prod_{i<k} v_i / v_{k-1}^k)
    let pivot = libm::log(values[k - 1]);
    values[..k].iter().map(|v| libm::log(*v) - pivot).sum()
}

/// Largest `k` with `B - ln(prod_{i<=k} L_i / L_k^k) > 0`; 0 when `B <= 0`.
pub fn defender_support_size(losses: &[f64], budget: f64) -> usize {
    if !(budget > 0.0) {
        return 0;
    }
    (1..=losses.len()).filter(|&k| budget - log_spread(losses, k) > 0.0).max().unwrap_or(0)
}

/// Largest `k` with `P - ln(prod G_i / G_k^k) + ln(prod L_i / L_k^k) > 0`;
/// 0 when `P <= 0`.
pub fn attacker_support_size(losses: &[f64], gains: &[f64], budget: f64) -> usize {
    if !(budget > 0.0) {
        return 0;
    }
    (1..=losses.len().min(gains.len()))
        .filter(|&k| budget - log_spread(gains, k) + log_spread(losses, k) > 0.0)
        .max()
        .unwrap_or(0)
}

/// Equilibrium of the non-behavioral game (`alpha_d = alpha_a = 1`) with a
/// common inherent defense, losses and gains descending and
/// `G_i / G_j >= L_i / L_j` for `i < j`.
///
/// Funded defense satisfies `x_i = x_j + ln(L_i / L_j)` with `sum = B`;
/// funded attack satisfies `y_i = y_j + ln(G_i / G_j) - ln(L_i / L_j)` with
/// `sum = P`.
pub fn rational_pne_closed_form(config: &GameConfig) -> Result<ClosedFormPne> {
    let report = config.validate();
    if let Some(v) = report.violations.first() {
        return Err(precondition(alloc::format!("invalid config: {v}")));
    }
    if config.alpha_d != 1.0 || config.alpha_a != 1.0 {
        return Err(precondition("closed form needs alpha_d = alpha_a = 1"));
    }
    if config.common_inherent_defense().is_none() {
        return Err(precondition("closed form needs a common inherent defense"));
    }
    if !config.sorted_by_loss() {
        return Err(precondition("closed form needs losses in descending order"));
    }
    if !config.sorted_by_gain() {
        return Err(precondition("closed form needs gains in descending order"));
    }
    let losses = config.losses();
    let gains = config.gains();
    let n = losses.len();
    for i in 0..n {
        for j in i + 1..n {
            // G_i / G_j >= L_i / L_j, compared in logs with a little slack
            let lhs = libm::log(gains[i]) - libm::log(gains[j]);
            let rhs = libm::log(losses[i]) - libm::log(losses[j]);
            if lhs < rhs - 1e-12 {
                return Err(precondition(alloc::format!(
                    "closed form needs G_i/G_j >= L_i/L_j, fails for assets {} and {}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    let budget_d = config.defender_budget;
    let budget_a = config.attacker_budget;
    let k_d = defender_support_size(&losses, budget_d);
    let k_a = attacker_support_size(&losses, &gains, budget_a);

    let mut x = alloc::vec![0.0; n];
    for (i, xi) in x.iter_mut().enumerate().take(k_d) {
        let spread: f64 = losses[..k_d].iter().map(|l| libm::log(*l) - libm::log(losses[i])).sum();
        *xi = (budget_d - spread) / k_d as f64;
    }
    let mut y = alloc::vec![0.0; n];
    for (i, yi) in y.iter_mut().enumerate().take(k_a) {
        let spread: f64 = (0..k_a)
            .map(|j| (libm::log(gains[j]) - libm::log(gains[i])) - (libm::log(losses[j]) - libm::log(losses[i])))
            .sum();
        *yi = (budget_a - spread) / k_a as f64;
    }
    Ok(ClosedFormPne {
        x_star: Allocation::from_solver(x, budget_d),
        y_star: Allocation::from_solver(y, budget_a),
        defender_support: k_d,
        attacker_support: k_a,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    /// Max over pairs of converged runs of `max(|x - x'|, |y - y'|)`.
    pub max_distance: f64,
    pub runs: Vec<EquilibriumResult>,
    /// Indices of runs that did not converge.
    pub non_converged: Vec<usize>,
}

/// A random feasible attack allocation that spends the whole budget.
pub fn random_allocation<R: Rng>(rng: &mut R, n: usize, budget: f64) -> Allocation {
    let weights: Vec<f64> = (0..n).map(|_| -libm::log(1.0 - rng.gen::<f64>())).collect();
    let total: f64 = weights.iter().sum();
    let values = weights.iter().map(|w| budget * w / total).collect();
    Allocation::from_solver(values, budget)
}

/// Runs best-response dynamics from `n_inits` seeded random starting attacks
/// and measures how far apart the converged equilibria are.
pub fn uniqueness_probe(
    config: &GameConfig,
    n_inits: usize,
    seed: u64,
    opts: &DynamicsOptions,
) -> Result<UniquenessReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = Vec::with_capacity(n_inits);
    for _ in 0..n_inits {
        let initial = random_allocation(&mut rng, config.n_assets(), config.attacker_budget);
        let run_opts = DynamicsOptions { initial_y: Some(initial), ..opts.clone() };
        runs.push(solve_pne(config, &run_opts)?);
    }
    let non_converged: Vec<usize> = runs.iter().enumerate().filter(|(_, r)| !r.converged).map(|(i, _)| i).collect();
    let mut max_distance: f64 = 0.0;
    for (i, a) in runs.iter().enumerate() {
        for b in &runs[i + 1..] {
            if a.converged && b.converged {
                let d = a.x_star.max_abs_diff(&b.x_star).max(a.y_star.max_abs_diff(&b.y_star));
                max_distance = max_distance.max(d);
            }
        }
    }
    Ok(UniquenessReport { max_distance, runs, non_converged })
}
