use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};

use bsg_core::equilibrium::rational_pne_closed_form;
use bsg_core::{DynamicsOptions, GameConfig};

use crate::commands::{run_oracle, run_sweep, solve_point, CommandError};
use crate::config::{load_config, parse_config, LoadedConfig, BUNDLED_CONFIG};
use crate::grid::Grid;
use crate::record::{format_number, to_csv, SweepRecord};
use crate::svg;
use crate::verify::run_verify;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

const DEFAULT_SEED: u64 = 42;
pub const SOLVE_FILE: &str = "solve.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Parser)]
#[command(name = "bsg", version, about = "Equilibria of behavioral multi-target security games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Game configuration file; the bundled four-asset game when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV and SVG output.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Defender weighting grid `start:stop:step` (or one value).
    #[arg(long, global = true)]
    pub alpha_d_grid: Option<Grid>,
    /// Attacker weighting grid `start:stop:step` (or one value).
    #[arg(long, global = true)]
    pub alpha_a_grid: Option<Grid>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Convergence tolerance of the best-response dynamics.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_rounds: Option<usize>,
    /// Also write SVG plots of the sweep.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Report and plot the true expected loss with inherent defense set to zero.
    #[arg(long, global = true)]
    pub zero_inherent: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one equilibrium with best-response dynamics.
    Solve,
    /// Solve over a grid of weighting parameters.
    Sweep,
    /// Run the invariant suite.
    Verify,
    /// Print the closed-form equilibrium for rational players.
    ClosedForm,
    /// Compare the best-response solvers with exhaustive grid search (at most 3 assets).
    Oracle {
        /// Grid spacing of the oracle.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_SUCCESS;
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn load(cli: &Cli, err: &mut dyn Write) -> anyhow::Result<LoadedConfig> {
    let loaded = match &cli.config {
        Some(path) => load_config(path)?,
        None => parse_config(BUNDLED_CONFIG)?,
    };
    for warning in &loaded.warnings {
        writeln!(err, "warning: {warning}")?;
    }
    Ok(loaded)
}

fn dynamics(cli: &Cli, loaded: &LoadedConfig) -> anyhow::Result<DynamicsOptions> {
    let mut opts = DynamicsOptions::default();
    if let Some(tol) = cli.tol.or(loaded.settings.tolerance) {
        anyhow::ensure!(tol > 0.0 && tol.is_finite(), "--tol must be a positive number, got {tol}");
        opts.tolerance = tol;
    }
    if let Some(rounds) = cli.max_rounds.or(loaded.settings.max_rounds) {
        anyhow::ensure!(rounds > 0, "--max-rounds must be at least 1");
        opts.max_rounds = rounds;
    }
    Ok(opts)
}

fn single_alpha(grid: &Option<Grid>, fallback: f64, flag: &str) -> anyhow::Result<f64> {
    match grid {
        None => Ok(fallback),
        Some(g) if g.len() == 1 => Ok(g.points()[0]),
        Some(g) => anyhow::bail!("solve takes a single {flag} value, got {g}"),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let loaded = load(cli, err)?;
    let opts = dynamics(cli, &loaded)?;
    let seed = cli.seed.or(loaded.settings.seed).unwrap_or(DEFAULT_SEED);
    let game = &loaded.game;
    match &cli.command {
        Command::Solve => {
            let alpha_d = single_alpha(&cli.alpha_d_grid, game.alpha_d, "--alpha-d-grid")?;
            let alpha_a = single_alpha(&cli.alpha_a_grid, game.alpha_a, "--alpha-a-grid")?;
            let game = game.clone().with_alphas(alpha_d, alpha_a);
            let report = bsg_core::model::validate_config(&game);
            anyhow::ensure!(
                report.is_valid(),
                "{}",
                report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
            );
            let record = solve_point(&game, &opts)?;
            print_solution(out, &record, cli.zero_inherent)?;
            let path = write_file(&cli.out, SOLVE_FILE, &to_csv(std::slice::from_ref(&record)))?;
            writeln!(out, "wrote {}", path.display())?;
            Ok(if record.converged { EXIT_SUCCESS } else { EXIT_NOT_CONVERGED })
        }
        Command::Sweep => {
            let alpha_d = cli.alpha_d_grid.clone().unwrap_or_else(Grid::default_alpha_d);
            let alpha_a = cli.alpha_a_grid.clone().unwrap_or_else(|| Grid::from_points(vec![1.0]));
            let records = run_sweep(game, &alpha_d, &alpha_a, &opts)?;
            let path = write_file(&cli.out, SWEEP_FILE, &to_csv(&records))?;
            writeln!(out, "wrote {} ({} points)", path.display(), records.len())?;
            if cli.svg {
                for (name, chart) in [
                    (svg::DEFENSE_FILE, svg::defense_chart(&records)),
                    (svg::ATTACK_FILE, svg::attack_chart(&records)),
                    (svg::LOSS_FILE, svg::loss_chart(&records, cli.zero_inherent)),
                ] {
                    writeln!(out, "wrote {}", write_file(&cli.out, name, &chart)?.display())?;
                }
            }
            let failed: Vec<&SweepRecord> = records.iter().filter(|r| !r.converged).collect();
            for r in &failed {
                writeln!(
                    err,
                    "not converged at alpha_d = {}, alpha_a = {} (residual {})",
                    format_number(r.alpha_d),
                    format_number(r.alpha_a),
                    format_number(r.residual)
                )?;
            }
            Ok(if failed.is_empty() { EXIT_SUCCESS } else { EXIT_NOT_CONVERGED })
        }
        Command::Verify => {
            let report = run_verify(game, seed, &opts);
            for check in &report.checks {
                writeln!(out, "{check}")?;
            }
            let passed = report.passed();
            writeln!(out, "{}", if passed { "all checks passed" } else { "verification FAILED" })?;
            Ok(if passed { EXIT_SUCCESS } else { EXIT_VERIFY_FAILED })
        }
        Command::ClosedForm => {
            print_closed_form(out, game)?;
            Ok(EXIT_SUCCESS)
        }
        Command::Oracle { step } => {
            anyhow::ensure!(*step > 0.0 && step.is_finite(), "--step must be a positive number, got {step}");
            let cases = match run_oracle(game, *step, seed, 4) {
                Err(e @ CommandError::TooManyAssets(_)) => anyhow::bail!(e),
                other => other?,
            };
            writeln!(out, "player    solver            oracle            bound       result")?;
            for case in &cases {
                writeln!(
                    out,
                    "{:<9} {:<17} {:<17} {:<11.3e} {}",
                    format!("{:?}", case.player).to_lowercase(),
                    format_number(case.solver_objective),
                    format_number(case.oracle_objective),
                    case.bound,
                    if case.passed() { "ok" } else { "FAIL" }
                )?;
            }
            let passed = cases.iter().all(|c| c.passed());
            Ok(if passed { EXIT_SUCCESS } else { EXIT_VERIFY_FAILED })
        }
    }
}

fn print_solution(out: &mut dyn Write, r: &SweepRecord, zero_inherent: bool) -> std::io::Result<()> {
    writeln!(out, "alpha_d = {}, alpha_a = {}", format_number(r.alpha_d), format_number(r.alpha_a))?;
    let status = if r.converged { "converged" } else { "NOT converged" };
    writeln!(out, "{status} after {} rounds (residual {})", r.iterations, format_number(r.residual))?;
    writeln!(out, "asset  {:<16} {:<16}", "x*", "y*")?;
    for (i, (x, y)) in r.x.iter().zip(&r.y).enumerate() {
        writeln!(out, "{:<6} {:<16} {:<16}", i + 1, format_number(*x), format_number(*y))?;
    }
    writeln!(out, "perceived cost  {}", format_number(r.perceived_cost))?;
    let label = if zero_inherent { "true loss (a = 0)" } else { "true loss" };
    writeln!(out, "{label}  {}", format_number(r.loss(zero_inherent)))
}

fn print_closed_form(out: &mut dyn Write, game: &GameConfig) -> anyhow::Result<()> {
    if game.alpha_d != 1.0 || game.alpha_a != 1.0 {
        writeln!(out, "note: the closed form assumes rational players; alpha_d and alpha_a are ignored")?;
    }
    let pne = rational_pne_closed_form(game)?;
    writeln!(out, "defender support {}, attacker support {}", pne.defender_support, pne.attacker_support)?;
    writeln!(out, "asset  {:<16} {:<16}", "x*", "y*")?;
    for (i, (x, y)) in pne.x_star.values().iter().zip(pne.y_star.values()).enumerate() {
        writeln!(out, "{:<6} {:<16} {:<16}", i + 1, format_number(*x), format_number(*y))?;
    }
    Ok(())
}
