//! Single-player optimal allocations.
//!
//! Both players face a separable objective over one budget simplex, so the
//! optimum is a water-filling: every funded asset has the same marginal value
//! `lambda`, and unfunded assets have marginal value at most `lambda`. The
//! solver bisects (with Newton acceleration) on `ln lambda` and inverts each
//! asset's strictly decreasing marginal curve.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{attacker_utility, perceived_cost};
use crate::error::{domain, Error, Result};
use crate::model::{Allocation, Asset, GameConfig};
use crate::roots::solve_decreasing;
use crate::success::{ln_one_minus_exp_neg, offset, perceived, ExposureOffset};
use crate::weighting::Prelec;

/// Smallest attack investment the behavioral attacker's inner solve uses.
/// Its marginal value is infinite at zero.
pub const ATTACK_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Defender,
    Attacker,
}

impl Player {
    pub fn budget(self, config: &GameConfig) -> f64 {
        match self {
            Self::Defender => config.defender_budget,
            Self::Attacker => config.attacker_budget,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponseOptions {
    /// Stop the dual search once `|sum - budget| <= dual_tolerance * max(1, budget)`.
    pub dual_tolerance: f64,
    /// Relative step size at which the per-asset inversion stops.
    pub inner_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BestResponseOptions {
    fn default() -> Self {
        Self { dual_tolerance: 1e-10, inner_tolerance: 1e-12, max_iterations: 200 }
    }
}

/// Defender marginal value `L (x + k)^(alpha - 1) exp(-(x + k)^alpha)` of one
/// more unit of defense, without the common factor `alpha`. Zero when the
/// asset is not attacked.
pub fn defender_marginal(x: f64, asset: &Asset, y: f64, alpha_d: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(domain(alloc::format!("defender marginal needs x, y >= 0, got ({x}, {y})")));
    }
    check_alpha(alpha_d)?;
    match DefenderCurve::new(asset, y, alpha_d)? {
        None => Ok(0.0),
        Some(curve) => Ok(libm::exp(curve.ln_marginal(x))),
    }
}

/// Attacker marginal value `G * d w_A(p) / dy`. Infinite at `y = 0` for a
/// behavioral attacker.
pub fn attacker_marginal(y: f64, asset: &Asset, x: f64, alpha_a: f64) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0) {
        return Err(domain(alloc::format!("attacker marginal needs x, y >= 0, got ({x}, {y})")));
    }
    check_alpha(alpha_a)?;
    Ok(libm::exp(AttackerCurve::new(asset, x, alpha_a).ln_marginal(y)))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(domain(alloc::format!("alpha {alpha} out of (0,1]")))
    }
}

/// A strictly decreasing marginal-value curve in log form.
trait MarginalCurve {
    fn ln_marginal(&self, v: f64) -> f64;

    /// Log marginal value at the smallest investment the solver considers.
    fn entry_level(&self) -> f64;

    /// The investment whose log marginal equals `level` (clamped at zero), and
    /// its derivative with respect to `level`.
    fn invert(&self, level: f64, opts: &BestResponseOptions) -> (f64, f64);
}

#[derive(Debug, Clone, Copy)]
struct DefenderCurve {
    ln_loss: f64,
    offset: f64,
    alpha: f64,
}

impl DefenderCurve {
    /// `None` for an unattacked asset.
    fn new(asset: &Asset, y: f64, alpha: f64) -> Result<Option<Self>> {
        match offset(y, asset.inherent_defense) {
            ExposureOffset::Infinite => Ok(None),
            ExposureOffset::Finite(k) => {
                if alpha < 1.0 && !(k > 0.0) {
                    return Err(domain(
                        "defender marginal diverges: exposure offset is zero (a = 0 with saturating attack)",
                    ));
                }
                Ok(Some(Self { ln_loss: libm::log(asset.loss), offset: k, alpha }))
            }
        }
    }

    fn ln_marginal_at_r(&self, r: f64) -> f64 {
        if self.alpha == 1.0 {
            self.ln_loss - r
        } else {
            self.ln_loss + (self.alpha - 1.0) * libm::log(r) - libm::pow(r, self.alpha)
        }
    }
}

impl MarginalCurve for DefenderCurve {
    fn ln_marginal(&self, x: f64) -> f64 {
        self.ln_marginal_at_r(x + self.offset)
    }

    fn entry_level(&self) -> f64 {
        self.ln_marginal(0.0)
    }

    fn invert(&self, level: f64, opts: &BestResponseOptions) -> (f64, f64) {
        if self.entry_level() <= level {
            return (0.0, 0.0);
        }
        if self.alpha == 1.0 {
            return (self.ln_loss - level - self.offset, -1.0);
        }
        // Solve in t = ln r, where the log marginal is concave and decreasing.
        let alpha = self.alpha;
        let phi = |t: f64| {
            let e = libm::exp(alpha * t);
            (self.ln_loss + (alpha - 1.0) * t - e - level, (alpha - 1.0) - alpha * e)
        };
        let lo = libm::log(self.offset);
        let mut hi = lo.max(0.0) + 1.0;
        while phi(hi).0 >= 0.0 {
            hi += 2.0 * (hi - lo).max(1.0);
        }
        let root = solve_decreasing(phi, lo, hi, lo, 0.0, opts.inner_tolerance, opts.max_iterations);
        let r = libm::exp(root.point);
        let x = (r - self.offset).max(0.0);
        let slope = phi(root.point).1;
        (x, r / slope)
    }
}

#[derive(Debug, Clone, Copy)]
struct AttackerCurve {
    ln_gain: f64,
    // x + a
    shield: f64,
    alpha: f64,
}

impl AttackerCurve {
    fn new(asset: &Asset, x: f64, alpha: f64) -> Self {
        Self { ln_gain: libm::log(asset.gain), shield: x + asset.inherent_defense, alpha }
    }

    fn ln_expm1(y: f64) -> f64 {
        if y > 1.0 {
            y + ln_one_minus_exp_neg(y)
        } else {
            libm::log(libm::expm1(y))
        }
    }

    // Log marginal and its derivative in t = ln y, for alpha < 1.
    fn behavioral_level(&self, t: f64) -> (f64, f64) {
        let alpha = self.alpha;
        let y = libm::exp(t);
        let u = self.shield - ln_one_minus_exp_neg(y);
        let u_pow = libm::pow(u, alpha);
        let level = self.ln_gain + libm::log(alpha) - u_pow + (alpha - 1.0) * libm::log(u) - Self::ln_expm1(y);
        // d level / dy = (alpha u^(alpha-1) + (1-alpha)/u - e^y) / expm1(y)
        let y_over_expm1 = if y < 1e-8 { 1.0 - 0.5 * y } else { y / libm::expm1(y) };
        let bracket = alpha * u_pow / u + (1.0 - alpha) / u;
        let slope = if y > 700.0 { -y } else { y_over_expm1 * (bracket - libm::exp(y)) };
        (level, slope)
    }
}

impl MarginalCurve for AttackerCurve {
    fn ln_marginal(&self, y: f64) -> f64 {
        if self.alpha == 1.0 {
            return self.ln_gain - self.shield - y;
        }
        if y == 0.0 {
            return f64::INFINITY;
        }
        self.behavioral_level(libm::log(y)).0
    }

    fn entry_level(&self) -> f64 {
        if self.alpha == 1.0 {
            self.ln_marginal(0.0)
        } else {
            self.ln_marginal(ATTACK_FLOOR)
        }
    }

    fn invert(&self, level: f64, opts: &BestResponseOptions) -> (f64, f64) {
        if self.alpha == 1.0 {
            let y = self.ln_gain - self.shield - level;
            return if y > 0.0 { (y, -1.0) } else { (0.0, 0.0) };
        }
        if self.entry_level() <= level {
            return (ATTACK_FLOOR, 0.0);
        }
        let lo = libm::log(ATTACK_FLOOR);
        let mut hi = 0.0;
        while self.behavioral_level(hi).0 >= level {
            hi += 1.0;
        }
        let eval = |t: f64| {
            let (v, s) = self.behavioral_level(t);
            (v - level, s)
        };
        let root = solve_decreasing(eval, lo, hi, hi, 0.0, opts.inner_tolerance, opts.max_iterations);
        let y = libm::exp(root.point);
        let slope = self.behavioral_level(root.point).1;
        (y, y / slope)
    }
}

/// Water-filling over the active curves: finds the common level so the
/// investments sum to `budget`.
fn water_fill<C: MarginalCurve>(curves: &[Option<C>], budget: f64, opts: &BestResponseOptions) -> Result<Vec<f64>> {
    let mut values = vec![0.0; curves.len()];
    let active: Vec<(usize, &C)> = curves.iter().enumerate().filter_map(|(i, c)| c.as_ref().map(|c| (i, c))).collect();
    if budget == 0.0 || active.is_empty() {
        return Ok(values);
    }
    if let [(i, _)] = active[..] {
        values[i] = budget;
        return Ok(values);
    }

    let top = active.iter().map(|(_, c)| c.entry_level()).fold(f64::NEG_INFINITY, f64::max);
    let bottom = active.iter().map(|(_, c)| c.ln_marginal(budget)).fold(f64::INFINITY, f64::min);
    if !(top.is_finite() && bottom.is_finite()) {
        return Err(domain("marginal values are not finite over the budget range"));
    }

    let total_at = |level: f64| -> (f64, f64) {
        active.iter().fold((-budget, 0.0), |(sum, slope), (_, c)| {
            let (v, dv) = c.invert(level, opts);
            (sum + v, slope + dv)
        })
    };
    let value_tol = opts.dual_tolerance * budget.max(1.0);
    let root = solve_decreasing(total_at, bottom, top, 0.5 * (bottom + top), value_tol, 1e-16, opts.max_iterations);
    if !root.converged && libm::fabs(root.value) > value_tol {
        return Err(Error::NotConverged { iterations: root.iterations, residual: libm::fabs(root.value) });
    }

    let mut sum = 0.0;
    for (i, c) in &active {
        let v = c.invert(root.point, opts).0;
        values[*i] = v;
        sum += v;
    }
    if sum > 0.0 {
        let scale = budget / sum;
        values.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(values)
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

/// Minimizes the defender's perceived cost against a fixed attack. Assets
/// that are not attacked get nothing; if nothing is attacked the result is
/// the zero allocation.
pub fn defender_best_response(y: &Allocation, config: &GameConfig, opts: &BestResponseOptions) -> Result<Allocation> {
    check_len(config.n_assets(), y.len())?;
    check_alpha(config.alpha_d)?;
    let curves = config
        .assets
        .iter()
        .zip(y.values())
        .map(|(asset, &yi)| DefenderCurve::new(asset, yi, config.alpha_d))
        .collect::<Result<Vec<_>>>()?;
    let values = water_fill(&curves, config.defender_budget, opts)?;
    Ok(Allocation::from_solver(values, config.defender_budget))
}

/// Maximizes the attacker's perceived utility against a fixed defense.
pub fn attacker_best_response(x: &Allocation, config: &GameConfig, opts: &BestResponseOptions) -> Result<Allocation> {
    check_len(config.n_assets(), x.len())?;
    check_alpha(config.alpha_a)?;
    let curves: Vec<Option<AttackerCurve>> = config
        .assets
        .iter()
        .zip(x.values())
        .map(|(asset, &xi)| Some(AttackerCurve::new(asset, xi, config.alpha_a)))
        .collect();
    let values = water_fill(&curves, config.attacker_budget, opts)?;
    Ok(Allocation::from_solver(values, config.attacker_budget))
}

pub fn best_response(
    player: Player,
    opponent: &Allocation,
    config: &GameConfig,
    opts: &BestResponseOptions,
) -> Result<Allocation> {
    match player {
        Player::Defender => defender_best_response(opponent, config, opts),
        Player::Attacker => attacker_best_response(opponent, config, opts),
    }
}

/// Marginal values each asset would see, scaled so that the defender's
/// entries are `alpha_d * defender_marginal` (the magnitude of the cost
/// gradient) and the attacker's equal the utility gradient.
pub fn weighted_marginals(
    player: Player,
    own: &Allocation,
    opponent: &Allocation,
    config: &GameConfig,
) -> Result<Vec<f64>> {
    check_len(config.n_assets(), own.len())?;
    check_len(config.n_assets(), opponent.len())?;
    config
        .assets
        .iter()
        .zip(own.values().iter().zip(opponent.values()))
        .map(|(asset, (&v, &w))| match player {
            Player::Defender => Ok(config.alpha_d * defender_marginal(v, asset, w, config.alpha_d)?),
            Player::Attacker => attacker_marginal(v, asset, w, config.alpha_a),
        })
        .collect()
}

/// How far an allocation is from satisfying the water-filling conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktCertificate {
    /// Mean weighted marginal over funded assets.
    pub multiplier: f64,
    /// `max |marginal - multiplier| / multiplier` over funded assets.
    pub support_deviation: f64,
    /// `max (marginal - multiplier) / multiplier` over unfunded, relevant
    /// assets, clamped at zero.
    pub inactive_excess: f64,
    pub support_size: usize,
}

impl KktCertificate {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.support_deviation <= tolerance && self.inactive_excess <= tolerance
    }
}

/// Entries above this count as funded when certifying.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

pub fn kkt_certificate(
    player: Player,
    own: &Allocation,
    opponent: &Allocation,
    config: &GameConfig,
) -> Result<KktCertificate> {
    let marginals = weighted_marginals(player, own, opponent, config)?;
    let relevant = |i: usize| match player {
        Player::Defender => opponent.get(i) > 0.0,
        Player::Attacker => true,
    };
    let support: Vec<usize> = (0..own.len()).filter(|&i| relevant(i) && own.get(i) > SUPPORT_THRESHOLD).collect();
    if support.is_empty() {
        return Ok(KktCertificate { multiplier: 0.0, support_deviation: 0.0, inactive_excess: 0.0, support_size: 0 });
    }
    let multiplier = support.iter().map(|&i| marginals[i]).sum::<f64>() / support.len() as f64;
    let support_deviation =
        support.iter().map(|&i| libm::fabs(marginals[i] - multiplier) / multiplier).fold(0.0, f64::max);
    let inactive_excess = (0..own.len())
        .filter(|&i| relevant(i) && own.get(i) <= SUPPORT_THRESHOLD)
        .map(|i| ((marginals[i] - multiplier) / multiplier).max(0.0))
        .fold(0.0, f64::max);
    Ok(KktCertificate { multiplier, support_deviation, inactive_excess, support_size: support.len() })
}

/// The objective each player optimizes: perceived cost for the defender
/// (minimized), perceived utility for the attacker (maximized).
pub fn player_objective(player: Player, own: &Allocation, opponent: &Allocation, config: &GameConfig) -> f64 {
    match player {
        Player::Defender => perceived_cost(own, opponent, config),
        Player::Attacker => attacker_utility(opponent, own, config, true),
    }
}

// Asset `i`'s term of the player's objective; the objectives are separable.
fn asset_objective(player: Player, i: usize, own: f64, opponent: f64, config: &GameConfig) -> f64 {
    let asset = &config.assets[i];
    let a = asset.inherent_defense;
    match player {
        Player::Defender => asset.loss * perceived(own, opponent, a, weighting(config.alpha_d)),
        Player::Attacker => asset.gain * perceived(opponent, own, a, weighting(config.alpha_a)),
    }
}

fn weighting(alpha: f64) -> Prelec {
    Prelec::new(alpha).expect("alpha out of (0,1]; validate the config first")
}

/// Largest number of assets the grid oracle accepts.
pub const ORACLE_MAX_ASSETS: usize = 3;

/// Exhaustive search over the simplex grid with spacing `budget / round(budget / step)`.
/// Exact objective evaluation; ties keep the first point in lexicographic order.
pub fn grid_oracle_best_response(
    opponent: &Allocation,
    config: &GameConfig,
    player: Player,
    step: f64,
) -> Result<Allocation> {
    let n = config.n_assets();
    if n > ORACLE_MAX_ASSETS {
        return Err(Error::TooManyAssets(n));
    }
    check_len(n, opponent.len())?;
    if !(step > 0.0) {
        return Err(domain(alloc::format!("grid step must be > 0, got {step}")));
    }
    let budget = player.budget(config);
    if n == 0 {
        return Ok(Allocation::zeros(0, budget));
    }
    let units = libm::round(budget / step).max(1.0) as usize;
    let spacing = budget / units as f64;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut counts = vec![0usize; n];
    let mut consider = |counts: &[usize]| {
        let values: Vec<f64> = counts.iter().map(|&c| c as f64 * spacing).collect();
        let candidate = Allocation::from_solver(values, budget);
        let score = player_objective(player, &candidate, opponent, config);
        let better = match &best {
            None => true,
            Some((incumbent, _)) => match player {
                Player::Defender => score < *incumbent,
                Player::Attacker => score > *incumbent,
            },
        };
        if better {
            best = Some((score, candidate.into_values()));
        }
    };
    enumerate_compositions(units, &mut counts, 0, &mut consider);
    let (_, values) = best.expect("grid has at least one point");
    Ok(Allocation::from_solver(values, budget))
}

// Visits every way of writing `remaining` as an ordered sum of
// `counts.len() - pos` non-negative parts.
fn enumerate_compositions<F: FnMut(&[usize])>(remaining: usize, counts: &mut [usize], pos: usize, visit: &mut F) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        enumerate_compositions(remaining - c, counts, pos + 1, visit);
    }
}

/// Bound on how much the objective can change between `solution` and the
/// nearest simplex grid point: each coordinate moves by at most
/// `(n - 1) * step`, and the per-asset objective variation over that move is
/// summed.
pub fn grid_objective_bound(
    player: Player,
    solution: &Allocation,
    opponent: &Allocation,
    config: &GameConfig,
    step: f64,
) -> f64 {
    let n = config.n_assets();
    let reach = (n.max(2) - 1) as f64 * step;
    let single = |i: usize, v: f64| asset_objective(player, i, v, opponent.get(i), config);
    (0..n)
        .map(|i| {
            let v = solution.get(i);
            let mid = single(i, v);
            let up = libm::fabs(single(i, v + reach) - mid);
            let down = libm::fabs(mid - single(i, (v - reach).max(0.0)));
            up.max(down)
        })
        .sum()
}

/// Worst relative error between the analytic objective gradient and a
/// central finite difference of the exact objective, for the given player's
/// coordinates. Each coordinate's difference is taken on that asset's own
/// term, which is the only one it moves. Every coordinate of that player's allocation must exceed `h`.
pub fn finite_difference_gradient_check(
    player: Player,
    x: &Allocation,
    y: &Allocation,
    config: &GameConfig,
    h: f64,
) -> Result<f64> {
    let (own, opponent) = match player {
        Player::Defender => (x, y),
        Player::Attacker => (y, x),
    };
    check_len(config.n_assets(), own.len())?;
    check_len(config.n_assets(), opponent.len())?;
    if !(h > 0.0) {
        return Err(domain(alloc::format!("step must be > 0, got {h}")));
    }
    if let Some(i) = own.values().iter().position(|&v| !(v > h)) {
        return Err(Error::Precondition(alloc::format!(
            "point is not interior: coordinate {} = {} <= h = {h}",
            i + 1,
            own.get(i)
        )));
    }
    let marginals = weighted_marginals(player, own, opponent, config)?;
    let sign = match player {
        Player::Defender => -1.0,
        Player::Attacker => 1.0,
    };
    let mut worst: f64 = 0.0;
    for (i, marginal) in marginals.iter().enumerate() {
        let analytic = sign * marginal;
        let shifted = |delta: f64| asset_objective(player, i, own.get(i) + delta, opponent.get(i), config);
        let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
        let scale = libm::fabs(analytic).max(libm::fabs(numeric));
        if scale > 0.0 {
            worst = worst.max(libm::fabs(analytic - numeric) / scale);
        }
    }
    Ok(worst)
}
