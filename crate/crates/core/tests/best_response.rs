use bsg_core::analysis::check_defense_ordering;
use bsg_core::best_response::*;
use bsg_core::equilibrium::random_allocation;
use bsg_core::instances::{ordered_instance, ordering_instance};
use bsg_core::{Allocation, Asset, GameConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> BestResponseOptions {
    BestResponseOptions::default()
}

#[test]
fn reference_defense_against_uniform_attack() {
    // x_i = (B - sum_j ln(L_j / L_i)) / 4, evaluated at 30 digits
    let expected = [4.914_156_868_651_15, 3.304_718_956_217_05, 1.695_281_043_782_95, 0.085_843_131_348_849_4];
    let config = GameConfig::four_asset_reference();
    let x = defender_best_response(&Allocation::uniform(4, 10.0), &config, &opts()).unwrap();
    for (got, want) in x.values().iter().zip(expected) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    let y = attacker_best_response(&x, &config, &opts()).unwrap();
    for v in y.values() {
        assert!((v - 2.5).abs() < 1e-9);
    }
}

fn random_config(rng: &mut ChaCha8Rng, n: usize) -> GameConfig {
    let mut config = ordered_instance(rng, n);
    config.alpha_d = 0.15 + 0.85 * rng.gen::<f64>();
    config.alpha_a = 0.15 + 0.85 * rng.gen::<f64>();
    if rng.gen_bool(0.3) {
        config.alpha_d = 1.0;
    }
    if rng.gen_bool(0.3) {
        config.alpha_a = 1.0;
    }
    config
}

#[test]
fn kkt_certificate_and_budget_saturation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(1..=6);
        let config = random_config(&mut rng, n);
        let y = random_allocation(&mut rng, n, config.attacker_budget);
        let x = defender_best_response(&y, &config, &opts()).unwrap();
        assert!((x.total() - config.defender_budget).abs() < 1e-9);
        let cert = kkt_certificate(Player::Defender, &x, &y, &config).unwrap();
        assert!(cert.holds(1e-8), "{cert:?} {config:?}");

        let x = random_allocation(&mut rng, n, config.defender_budget);
        let y = attacker_best_response(&x, &config, &opts()).unwrap();
        assert!((y.total() - config.attacker_budget).abs() < 1e-9);
        let cert = kkt_certificate(Player::Attacker, &y, &x, &config).unwrap();
        assert!(cert.holds(1e-8), "{cert:?} {config:?}");
    }
}

#[test]
fn partially_attacked_defense_saturates_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let config = random_config(&mut rng, 5);
        let mut y = random_allocation(&mut rng, 5, config.attacker_budget).into_values();
        y[1] = 0.0;
        y[3] = 0.0;
        let y = Allocation::new(y, config.attacker_budget).unwrap();
        let x = defender_best_response(&y, &config, &opts()).unwrap();
        assert_eq!(x.get(1), 0.0);
        assert_eq!(x.get(3), 0.0);
        assert!((x.total() - config.defender_budget).abs() < 1e-9);
    }
}

#[test]
fn solvers_beat_the_grid_oracle_on_two_assets() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let step = 1e-3;
    for _ in 0..10 {
        let config = random_config(&mut rng, 2);
        let y = random_allocation(&mut rng, 2, config.attacker_budget);
        let x_star = defender_best_response(&y, &config, &opts()).unwrap();
        let x_grid = grid_oracle_best_response(&y, &config, Player::Defender, step).unwrap();
        let solver = player_objective(Player::Defender, &x_star, &y, &config);
        let oracle = player_objective(Player::Defender, &x_grid, &y, &config);
        let bound = grid_objective_bound(Player::Defender, &x_star, &y, &config, step);
        assert!(solver <= oracle + 1e-12 * oracle.abs().max(1.0));
        assert!(oracle - solver <= bound);

        let x = random_allocation(&mut rng, 2, config.defender_budget);
        let y_star = attacker_best_response(&x, &config, &opts()).unwrap();
        let y_grid = grid_oracle_best_response(&x, &config, Player::Attacker, step).unwrap();
        let solver = player_objective(Player::Attacker, &y_star, &x, &config);
        let oracle = player_objective(Player::Attacker, &y_grid, &x, &config);
        let bound = grid_objective_bound(Player::Attacker, &y_star, &x, &config, step);
        assert!(solver >= oracle - 1e-12 * oracle.abs().max(1.0));
        assert!(solver - oracle <= bound);
    }
}

#[test]
fn defense_follows_loss_ordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let (mut config, y) = ordering_instance(&mut rng, n);
        config.alpha_d = 0.2 + 0.8 * rng.gen::<f64>();
        let x = defender_best_response(&y, &config, &opts()).unwrap();
        let check = check_defense_ordering(&x, &config, &y);
        assert!(check.holds(), "{check:?} x={:?}", x.values());
    }
}

#[test]
fn gradient_checks_at_interior_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let config = GameConfig::four_asset_reference();
    for alpha_d in [1.0, 0.5, 0.2] {
        for alpha_a in [1.0, 0.6] {
            let config = config.clone().with_alphas(alpha_d, alpha_a);
            for _ in 0..5 {
                let x = random_allocation(&mut rng, 4, 10.0);
                let y = random_allocation(&mut rng, 4, 10.0);
                if x.values().iter().chain(y.values()).any(|v| *v <= 1e-3) {
                    continue;
                }
                let tol = if alpha_d == 1.0 && alpha_a == 1.0 { 1e-7 } else { 1e-5 };
                for player in [Player::Defender, Player::Attacker] {
                    let err = finite_difference_gradient_check(player, &x, &y, &config, 1e-6).unwrap();
                    assert!(err < tol, "{player:?} alpha=({alpha_d},{alpha_a}) err={err}");
                }
            }
        }
    }
}

#[test]
fn attacker_marginal_ratio_is_e_for_rational_attacker() {
    let asset = Asset::new(3.0, 9.0, 1.5);
    let r = attacker_marginal(0.0, &asset, 0.7, 1.0).unwrap() / attacker_marginal(1.0, &asset, 0.7, 1.0).unwrap();
    assert!((r - core::f64::consts::E).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // More budget never lowers any single asset's water level: the dual
    // level falls, so each funded asset's investment grows.
    #[test]
    fn larger_budget_never_shrinks_defense(seed in any::<u64>(), extra in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = random_config(&mut rng, 4);
        let y = random_allocation(&mut rng, 4, config.attacker_budget);
        let small = defender_best_response(&y, &config, &opts()).unwrap();
        let bigger = config.clone().with_budgets(config.defender_budget + extra, config.attacker_budget);
        let large = defender_best_response(&y, &bigger, &opts()).unwrap();
        for (s, l) in small.values().iter().zip(large.values()) {
            prop_assert!(*l >= *s - 1e-9);
        }
    }

    #[test]
    fn best_responses_are_feasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=8);
        let config = random_config(&mut rng, n);
        let y = random_allocation(&mut rng, n, config.attacker_budget);
        let x = defender_best_response(&y, &config, &opts()).unwrap();
        prop_assert!(Allocation::new(x.into_values(), config.defender_budget).is_ok());
        let x = random_allocation(&mut rng, n, config.defender_budget);
        let y = attacker_best_response(&x, &config, &opts()).unwrap();
        prop_assert!(Allocation::new(y.into_values(), config.attacker_budget).is_ok());
    }
}
