use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use bsg_core::best_response::{
    best_response, grid_objective_bound, grid_oracle_best_response, player_objective, ORACLE_MAX_ASSETS,
};
use bsg_core::equilibrium::{random_allocation, solve_pne};
use bsg_core::{Allocation, DynamicsOptions, GameConfig, Player};

use crate::grid::Grid;
use crate::record::SweepRecord;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Solver(#[from] bsg_core::Error),
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
    #[error("{name} grid value {value} is out of (0,1]")]
    AlphaOutOfRange { name: &'static str, value: f64 },
    #[error("the oracle enumerates at most {ORACLE_MAX_ASSETS} assets, config has {0}")]
    TooManyAssets(usize),
}

pub fn solve_point(config: &GameConfig, opts: &DynamicsOptions) -> Result<SweepRecord, CommandError> {
    let result = solve_pne(config, opts)?;
    Ok(SweepRecord::from_result(config, &result))
}

fn check_grid(name: &'static str, grid: &Grid) -> Result<(), CommandError> {
    if grid.is_empty() {
        return Err(CommandError::EmptyGrid(name));
    }
    match grid.points().iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
        Some(&value) => Err(CommandError::AlphaOutOfRange { name, value }),
        None => Ok(()),
    }
}

/// Solves every `(alpha_d, alpha_a)` pair in parallel. Records come back
/// ordered by `alpha_d`, then `alpha_a`, in grid order.
pub fn run_sweep(
    config: &GameConfig,
    alpha_d: &Grid,
    alpha_a: &Grid,
    opts: &DynamicsOptions,
) -> Result<Vec<SweepRecord>, CommandError> {
    check_grid("alpha_d", alpha_d)?;
    check_grid("alpha_a", alpha_a)?;
    let pairs: Vec<(f64, f64)> =
        alpha_d.points().iter().flat_map(|&d| alpha_a.points().iter().map(move |&a| (d, a))).collect();
    pairs.par_iter().map(|&(d, a)| solve_point(&config.clone().with_alphas(d, a), opts)).collect()
}

/// One solver-versus-grid comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub player: Player,
    pub solver_objective: f64,
    pub oracle_objective: f64,
    pub bound: f64,
}

impl OracleCase {
    /// The solver is no worse than the grid optimum (up to rounding) and
    /// no better than the grid resolution allows.
    pub fn passed(&self) -> bool {
        let slack = 1e-12 * self.oracle_objective.abs().max(1.0);
        let advantage = match self.player {
            Player::Defender => self.oracle_objective - self.solver_objective,
            Player::Attacker => self.solver_objective - self.oracle_objective,
        };
        advantage >= -slack && advantage <= self.bound + slack
    }
}

/// Compares both best-response solvers with the exhaustive grid oracle
/// against a uniform opponent and `random_opponents` seeded ones.
pub fn run_oracle(
    config: &GameConfig,
    step: f64,
    seed: u64,
    random_opponents: usize,
) -> Result<Vec<OracleCase>, CommandError> {
    let n = config.n_assets();
    if n > ORACLE_MAX_ASSETS {
        return Err(CommandError::TooManyAssets(n));
    }
    let opts = DynamicsOptions::default().best_response;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for player in [Player::Defender, Player::Attacker] {
        let opponent_budget = match player {
            Player::Defender => config.attacker_budget,
            Player::Attacker => config.defender_budget,
        };
        let mut opponents = vec![Allocation::uniform(n, opponent_budget)];
        opponents.extend((0..random_opponents).map(|_| random_allocation(&mut rng, n, opponent_budget)));
        for opponent in &opponents {
            let solved = best_response(player, opponent, config, &opts)?;
            let grid = grid_oracle_best_response(opponent, config, player, step)?;
            cases.push(OracleCase {
                player,
                solver_objective: player_objective(player, &solved, opponent, config),
                oracle_objective: player_objective(player, &grid, opponent, config),
                bound: grid_objective_bound(player, &solved, opponent, config, step),
            });
        }
    }
    Ok(cases)
}
