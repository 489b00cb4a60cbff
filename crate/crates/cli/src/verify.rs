//! The invariant suite behind `bsg verify`. Checks tied to the loaded game
//! run on it directly; the rest run on seeded random instances.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bsg_core::analysis::{
    check_defense_ordering, convexity_scan, default_deviation_source, deviation_gain, perceived_cost,
    true_expected_loss, ScanGrid,
};
use bsg_core::best_response::{
    attacker_best_response, defender_best_response, finite_difference_gradient_check, kkt_certificate,
};
use bsg_core::equilibrium::{
    attacker_support_size, defender_support_size, random_allocation, rational_pne_closed_form, solve_pne,
    uniqueness_probe,
};
use bsg_core::instances::{ordered_instance, ordering_instance};
use bsg_core::model::BUDGET_TOLERANCE;
use bsg_core::success::{attack_success_prob, perceived_success_prob};
use bsg_core::weighting::prelec_weight;
use bsg_core::{Allocation, DynamicsOptions, GameConfig, Player};

use crate::commands::run_oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.outcome != Outcome::Fail)
    }
}

fn verdict(name: &'static str, ok: bool, detail: String) -> Check {
    Check { name, outcome: if ok { Outcome::Pass } else { Outcome::Fail }, detail }
}

fn skipped(name: &'static str, reason: &str) -> Check {
    Check { name, outcome: Outcome::Skip, detail: reason.to_string() }
}

fn errored(name: &'static str, err: impl fmt::Display) -> Check {
    verdict(name, false, format!("error: {err}"))
}

const ALPHAS: [f64; 9] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

pub fn run_verify(config: &GameConfig, seed: u64, opts: &DynamicsOptions) -> VerifyReport {
    let checks = vec![
        weighting_shape(),
        composite_form(),
        best_response_optimality(config, seed),
        defense_ordering(seed),
        oracle_agreement(seed),
        gradients(config, seed),
        curvature(),
        equilibrium_is_mutual_best_response(config, opts),
        closed_form_agreement(config, opts),
        uniqueness(config, seed, opts),
        behavioral_deviation(config),
        rational_perception(config, seed),
        loss_scaling(config, seed),
    ];
    VerifyReport { checks }
}

fn weighting_shape() -> Check {
    let name = "probability weighting shape";
    let ps: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let mut worst_identity: f64 = 0.0;
    let mut worst_fixed: f64 = 0.0;
    let mut monotone = true;
    for &alpha in &ALPHAS {
        let w = |p| prelec_weight(p, alpha).unwrap();
        worst_fixed = worst_fixed.max((w(std::f64::consts::E.recip()) - std::f64::consts::E.recip()).abs());
        monotone &= ps.windows(2).all(|pair| w(pair[0]) < w(pair[1]));
        if alpha == 1.0 {
            worst_identity = ps.iter().map(|&p| (w(p) - p).abs()).fold(0.0, f64::max);
        }
    }
    verdict(
        name,
        worst_identity <= 1e-15 && worst_fixed <= 1e-15 && monotone,
        format!("identity error {worst_identity:.1e}, fixed-point error {worst_fixed:.1e}, increasing: {monotone}"),
    )
}

fn composite_form() -> Check {
    let mut worst: f64 = 0.0;
    for &alpha in &ALPHAS {
        for i in 0..=12 {
            for j in 1..=12 {
                let (x, y) = (0.5 * i as f64, 0.5 * j as f64);
                let direct = prelec_weight(attack_success_prob(x, y, 1.0).unwrap(), alpha).unwrap();
                let composite = perceived_success_prob(x, y, 1.0, alpha).unwrap();
                worst = worst.max((direct - composite).abs());
            }
        }
    }
    verdict("perceived success probability composite form", worst <= 1e-12, format!("max deviation {worst:.1e}"))
}

fn best_response_optimality(config: &GameConfig, seed: u64) -> Check {
    let name = "best responses spend the budget and satisfy KKT";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = DynamicsOptions::default().best_response;
    let n = config.n_assets();
    let mut failures = 0;
    let trials = 20;
    for _ in 0..trials {
        let y = random_allocation(&mut rng, n, config.attacker_budget);
        let x = random_allocation(&mut rng, n, config.defender_budget);
        let outcome = (|| -> bsg_core::Result<bool> {
            let bx = defender_best_response(&y, config, &opts)?;
            let by = attacker_best_response(&x, config, &opts)?;
            let spent = (bx.total() - config.defender_budget).abs() <= BUDGET_TOLERANCE
                && (by.total() - config.attacker_budget).abs() <= BUDGET_TOLERANCE;
            let kkt = kkt_certificate(Player::Defender, &bx, &y, config)?.holds(1e-8)
                && kkt_certificate(Player::Attacker, &by, &x, config)?.holds(1e-8);
            Ok(spent && kkt)
        })();
        match outcome {
            Ok(true) => {}
            Ok(false) => failures += 1,
            Err(err) => return errored(name, err),
        }
    }
    verdict(name, failures == 0, format!("{failures} of {trials} random opponents failed"))
}

fn defense_ordering(seed: u64) -> Check {
    let name = "defense follows loss ordering";
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let opts = DynamicsOptions::default().best_response;
    let mut violations = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let (mut config, y) = ordering_instance(&mut rng, n);
        config.alpha_d = 0.2 + 0.8 * rng.gen::<f64>();
        match defender_best_response(&y, &config, &opts) {
            Ok(x) if check_defense_ordering(&x, &config, &y).holds() => {}
            Ok(_) => violations += 1,
            Err(err) => return errored(name, err),
        }
    }
    verdict(name, violations == 0, format!("{violations} violations over 100 instances"))
}

fn oracle_agreement(seed: u64) -> Check {
    let name = "solvers agree with the grid oracle";
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut failures = 0;
    let mut cases = 0;
    for _ in 0..20 {
        let mut config = ordered_instance(&mut rng, 2);
        config.alpha_d = 0.2 + 0.8 * rng.gen::<f64>();
        config.alpha_a = 0.2 + 0.8 * rng.gen::<f64>();
        match run_oracle(&config, 1e-3, rng.gen(), 0) {
            Ok(results) => {
                cases += results.len();
                failures += results.iter().filter(|c| !c.passed()).count();
            }
            Err(err) => return errored(name, err),
        }
    }
    verdict(name, failures == 0, format!("{failures} of {cases} comparisons outside the grid bound"))
}

fn gradients(config: &GameConfig, seed: u64) -> Check {
    let name = "analytic marginals match finite differences";
    let n = config.n_assets();
    if config.defender_budget <= 0.0 || config.attacker_budget <= 0.0 {
        return skipped(name, "a zero budget leaves no interior point");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let interior = |rng: &mut ChaCha8Rng, budget: f64| {
        let random = random_allocation(rng, n, budget);
        let values = random.values().iter().map(|v| 0.5 * v + 0.5 * budget / n as f64).collect();
        Allocation::new(values, budget).expect("convex combination of feasible points")
    };
    let alpha_pairs = [(config.alpha_d, config.alpha_a), (0.5, 0.7), (0.2, 1.0)];
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let (alpha_d, alpha_a) = alpha_pairs[k % alpha_pairs.len()];
        let config = config.clone().with_alphas(alpha_d, alpha_a);
        let x = interior(&mut rng, config.defender_budget);
        let y = interior(&mut rng, config.attacker_budget);
        let h = 1e-6 * x.values().iter().chain(y.values()).fold(1.0, |m, &v| f64::min(m, v));
        for player in [Player::Defender, Player::Attacker] {
            match finite_difference_gradient_check(player, &x, &y, &config, h) {
                Ok(err) => worst = worst.max(err),
                Err(err) => return errored(name, err),
            }
        }
    }
    verdict(name, worst < 1e-5, format!("worst relative error {worst:.2e} over 50 points"))
}

fn curvature() -> Check {
    let name = "objective curvature signs (a = 1)";
    match convexity_scan(&ScanGrid::square(6.0, 25, ALPHAS.to_vec(), 1.0)) {
        Ok(report) => verdict(
            name,
            report.violations.is_empty(),
            format!("{} violations at {} grid points", report.violations.len(), report.points),
        ),
        Err(err) => errored(name, err),
    }
}

fn equilibrium_is_mutual_best_response(config: &GameConfig, opts: &DynamicsOptions) -> Check {
    let name = "equilibrium is a mutual best response";
    let result = match solve_pne(config, opts) {
        Ok(r) => r,
        Err(err) => return errored(name, err),
    };
    if !result.converged {
        return verdict(name, false, format!("no convergence after {} rounds", result.iterations));
    }
    let gap = (|| -> bsg_core::Result<f64> {
        let x = defender_best_response(&result.y_star, config, &opts.best_response)?;
        let y = attacker_best_response(&result.x_star, config, &opts.best_response)?;
        Ok(x.max_abs_diff(&result.x_star).max(y.max_abs_diff(&result.y_star)))
    })();
    match gap {
        Ok(gap) => verdict(
            name,
            gap <= 10.0 * opts.tolerance,
            format!("{} rounds, best-response gap {gap:.2e}", result.iterations),
        ),
        Err(err) => errored(name, err),
    }
}

fn closed_form_agreement(config: &GameConfig, opts: &DynamicsOptions) -> Check {
    let name = "closed-form rational equilibrium matches dynamics";
    let rational = config.clone().with_alphas(1.0, 1.0);
    let ratio = rational.assets[0].gain / rational.assets[0].loss;
    let proportional = rational.assets.iter().all(|a| (a.gain / a.loss - ratio).abs() <= 1e-12 * ratio);
    if !proportional || !rational.sorted_by_loss() || rational.common_inherent_defense().is_none() {
        return skipped(name, "needs sorted losses, gains proportional to losses and a common inherent defense");
    }
    let losses = rational.losses();
    if defender_support_size(&losses, rational.defender_budget)
        != attacker_support_size(&losses, &rational.gains(), rational.attacker_budget)
    {
        return skipped(name, "defender and attacker supports differ");
    }
    let outcome = (|| -> bsg_core::Result<(f64, bool)> {
        let closed = rational_pne_closed_form(&rational)?;
        let numeric = solve_pne(&rational, opts)?;
        let gap = closed.x_star.max_abs_diff(&numeric.x_star).max(closed.y_star.max_abs_diff(&numeric.y_star));
        Ok((gap, numeric.converged))
    })();
    match outcome {
        Ok((gap, converged)) => verdict(name, converged && gap < 1e-6, format!("max difference {gap:.2e}")),
        Err(err) => errored(name, err),
    }
}

fn uniqueness(config: &GameConfig, seed: u64, opts: &DynamicsOptions) -> Check {
    let name = "equilibrium is unique across random starts";
    match uniqueness_probe(config, 10, seed, opts) {
        Ok(report) => verdict(
            name,
            report.non_converged.is_empty() && report.max_distance < 1e-5,
            format!(
                "max pairwise distance {:.2e}, {} of 10 starts failed to converge",
                report.max_distance,
                report.non_converged.len()
            ),
        ),
        Err(err) => errored(name, err),
    }
}

fn behavioral_deviation(config: &GameConfig) -> Check {
    let name = "behavioral defender gains by shifting to the top asset";
    let rational = config.clone().with_alphas(1.0, 1.0);
    let pne = match solve_pne(&rational, &DynamicsOptions::default()) {
        Ok(r) if r.converged => r,
        Ok(_) => return verdict(name, false, "rational equilibrium did not converge".into()),
        Err(err) => return errored(name, err),
    };
    let (x, y) = (&pne.x_star, &pne.y_star);
    let Some(source) = default_deviation_source(x, y, &rational) else {
        return skipped(name, "no funded asset besides the first");
    };
    let eps = 1e-4_f64.min(0.5 * x.get(source));
    let gain = |alpha: f64| deviation_gain(x, y, &rational.clone().with_alphas(alpha, 1.0), eps, Some(source));
    let outcome = (|| -> bsg_core::Result<(Vec<f64>, f64)> {
        let behavioral = [0.4, 0.6, 0.8].iter().map(|&a| gain(a)).collect::<bsg_core::Result<Vec<_>>>()?;
        Ok((behavioral, gain(1.0)?))
    })();
    match outcome {
        Ok((behavioral, at_one)) => verdict(
            name,
            behavioral.iter().all(|&g| g > 0.0) && at_one <= 1e-12,
            format!(
                "gains {} at alpha_d = 0.4, 0.6, 0.8; {at_one:.1e} at alpha_d = 1",
                behavioral.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", ")
            ),
        ),
        Err(err) => errored(name, err),
    }
}

fn rational_perception(config: &GameConfig, seed: u64) -> Check {
    let rational = config.clone().with_alphas(1.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let n = config.n_assets();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x = random_allocation(&mut rng, n, config.defender_budget);
        let y = random_allocation(&mut rng, n, config.attacker_budget);
        let t = true_expected_loss(&x, &y, &rational, false);
        worst = worst.max((perceived_cost(&x, &y, &rational) - t).abs() / t.max(1.0));
    }
    verdict("rational perception equals true loss", worst <= 1e-12, format!("max relative deviation {worst:.1e}"))
}

fn loss_scaling(config: &GameConfig, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(5));
    let n = config.n_assets();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let c = 10f64.powf(rng.gen_range(-2.0..2.0));
        let mut scaled = config.clone();
        scaled.assets.iter_mut().for_each(|a| a.loss *= c);
        let x = random_allocation(&mut rng, n, config.defender_budget);
        let y = random_allocation(&mut rng, n, config.attacker_budget);
        let base = perceived_cost(&x, &y, config);
        if base > 0.0 {
            worst = worst.max((perceived_cost(&x, &y, &scaled) - c * base).abs() / (c * base));
        }
    }
    verdict("perceived cost scales with losses", worst <= 1e-12, format!("max relative deviation {worst:.1e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_game_passes_everything() {
        let report = run_verify(&GameConfig::four_asset_reference(), 42, &DynamicsOptions::default());
        for check in &report.checks {
            assert_eq!(check.outcome, Outcome::Pass, "{check}");
        }
    }

    #[test]
    fn closed_form_check_skips_spread_gains() {
        use bsg_core::Asset;
        let config = GameConfig::new(vec![Asset::new(100.0, 400.0, 1.0), Asset::new(10.0, 10.0, 1.0)], 4.0, 4.0);
        let check = closed_form_agreement(&config, &DynamicsOptions::default());
        assert_eq!(check.outcome, Outcome::Skip);
    }
}
