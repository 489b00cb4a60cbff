//! Flat `key = value` configuration files with an `asset <L> <G> <a>` table.
//!
//! ```text
//! defender_budget = 10
//! attacker_budget = 10
//! alpha_d = 0.6        # optional, defaults to 1
//! asset 1000 1000 1
//! asset  200  200 1
//! ```
//!
//! Optional run keys `seed`, `tol` and `max_rounds` supply defaults that
//! command-line flags override.

use std::path::{Path, PathBuf};

use bsg_core::model::{validate_config, Violation, Warning};
use bsg_core::{Asset, GameConfig};

/// The four-asset game bundled with the harness (`configs/four_asset.cfg`).
pub const BUNDLED_CONFIG: &str = include_str!("../configs/four_asset.cfg");

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{field}` given twice")]
    Duplicate { line: usize, field: &'static str },
    #[error("line {line}: invalid value `{value}` for `{field}`")]
    InvalidValue { line: usize, field: &'static str, value: String },
    #[error("missing required field `{0}`")]
    Missing(&'static str),
    #[error("invalid configuration: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSettings {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub game: GameConfig,
    pub settings: RunSettings,
    pub warnings: Vec<Warning>,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

fn set<T>(slot: &mut Option<T>, value: T, line: usize, field: &'static str) -> Result<(), ConfigError> {
    if slot.is_some() {
        return Err(ConfigError::Duplicate { line, field });
    }
    *slot = Some(value);
    Ok(())
}

fn real(raw: &str, line: usize, field: &'static str) -> Result<f64, ConfigError> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ConfigError::InvalidValue { line, field, value: raw.to_string() }),
    }
}

fn integer<T: std::str::FromStr>(raw: &str, line: usize, field: &'static str) -> Result<T, ConfigError> {
    raw.parse().map_err(|_| ConfigError::InvalidValue { line, field, value: raw.to_string() })
}

pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let mut defender_budget = None;
    let mut attacker_budget = None;
    let mut alpha_d = None;
    let mut alpha_a = None;
    let mut settings = RunSettings::default();
    let mut assets = Vec::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix("asset").filter(|r| r.starts_with(char::is_whitespace)) {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("expected `asset <loss> <gain> <inherent_defense>`, got {} values", fields.len()),
                });
            }
            assets.push(Asset::new(
                real(fields[0], line, "loss")?,
                real(fields[1], line, "gain")?,
                real(fields[2], line, "inherent_defense")?,
            ));
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "defender_budget" => {
                set(&mut defender_budget, real(value, line, "defender_budget")?, line, "defender_budget")?
            }
            "attacker_budget" => {
                set(&mut attacker_budget, real(value, line, "attacker_budget")?, line, "attacker_budget")?
            }
            "alpha_d" => set(&mut alpha_d, real(value, line, "alpha_d")?, line, "alpha_d")?,
            "alpha_a" => set(&mut alpha_a, real(value, line, "alpha_a")?, line, "alpha_a")?,
            "seed" => set(&mut settings.seed, integer(value, line, "seed")?, line, "seed")?,
            "tol" => set(&mut settings.tolerance, real(value, line, "tol")?, line, "tol")?,
            "max_rounds" => set(&mut settings.max_rounds, integer(value, line, "max_rounds")?, line, "max_rounds")?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
    }

    let game = GameConfig {
        assets,
        defender_budget: defender_budget.ok_or(ConfigError::Missing("defender_budget"))?,
        attacker_budget: attacker_budget.ok_or(ConfigError::Missing("attacker_budget"))?,
        alpha_d: alpha_d.unwrap_or(1.0),
        alpha_a: alpha_a.unwrap_or(1.0),
    };
    let report = validate_config(&game);
    if !report.is_valid() {
        return Err(ConfigError::Invalid(report.violations));
    }
    Ok(LoadedConfig { game, settings, warnings: report.warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_is_the_reference_game() {
        let loaded = parse_config(BUNDLED_CONFIG).unwrap();
        assert_eq!(loaded.game, GameConfig::four_asset_reference());
        assert!(loaded.warnings.is_empty());
        assert_eq!(loaded.settings, RunSettings::default());
    }

    #[test]
    fn missing_budget_is_named() {
        let err = parse_config("defender_budget = 3\nasset 1 1 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Missing("attacker_budget")));
        assert!(err.to_string().contains("attacker_budget"));
    }

    #[test]
    fn alpha_out_of_range_is_fatal() {
        let err = parse_config("defender_budget = 1\nattacker_budget = 1\nalpha_d = 1.5\nasset 1 1 1\n").unwrap_err();
        assert_eq!(err.to_string(), "invalid configuration: alpha_d out of (0,1]");
    }

    #[test]
    fn bad_lines_report_position() {
        let text = "defender_budget = 1\nattacker_budget = x\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.to_string(), "line 2: invalid value `x` for `attacker_budget`");

        let err = parse_config("defender_budget = 1\nasset 1 2\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2: expected `asset"));

        let err = parse_config("budget = 1\n").unwrap_err();
        assert_eq!(err.to_string(), "line 1: unknown key `budget`");

        let err = parse_config("alpha_a = 1\nalpha_a = 0.5\n").unwrap_err();
        assert_eq!(err.to_string(), "line 2: `alpha_a` given twice");

        let err = parse_config("defender_budget = inf\n").unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { line: 1, field: "defender_budget", .. }));
    }

    #[test]
    fn weak_inherent_defense_is_only_a_warning() {
        let loaded =
            parse_config("defender_budget = 1\nattacker_budget = 2\nasset 5 5 0.5\nseed = 7\ntol = 1e-8\n").unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.settings.seed, Some(7));
        assert_eq!(loaded.settings.tolerance, Some(1e-8));
        assert_eq!(loaded.game.alpha_d, 1.0);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let loaded =
            parse_config("# header\n\ndefender_budget = 2 # trailing\nattacker_budget=3\nasset\t4 5 1\n").unwrap();
        assert_eq!(loaded.game.assets, vec![Asset::new(4.0, 5.0, 1.0)]);
        assert_eq!(loaded.game.attacker_budget, 3.0);
    }
}
