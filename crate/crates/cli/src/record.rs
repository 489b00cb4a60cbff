use std::fmt::Write as _;

use bsg_core::analysis::{perceived_cost, true_expected_loss};
use bsg_core::{EquilibriumResult, GameConfig};

/// One solved grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub alpha_d: f64,
    pub alpha_a: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub perceived_cost: f64,
    pub true_loss_a0: f64,
    pub true_loss: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl SweepRecord {
    /// `config` must carry the alphas the equilibrium was solved at.
    pub fn from_result(config: &GameConfig, result: &EquilibriumResult) -> Self {
        let (x, y) = (&result.x_star, &result.y_star);
        Self {
            alpha_d: config.alpha_d,
            alpha_a: config.alpha_a,
            x: x.values().to_vec(),
            y: y.values().to_vec(),
            perceived_cost: perceived_cost(x, y, config),
            true_loss_a0: true_expected_loss(x, y, config, true),
            true_loss: true_expected_loss(x, y, config, false),
            iterations: result.iterations,
            residual: result.residual,
            converged: result.converged,
        }
    }

    pub fn loss(&self, zero_inherent: bool) -> f64 {
        if zero_inherent {
            self.true_loss_a0
        } else {
            self.true_loss
        }
    }
}

/// `v` with 12 significant digits, fixed notation for moderate magnitudes
/// and `1.5e-7` style otherwise. Trailing zeros are dropped.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..12).contains(&exponent) {
        trim_zeros(format!("{:.*}", (11 - exponent) as usize, v))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        let kept = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(kept);
    }
    s
}

/// The value a reader of the CSV sees.
pub fn csv_value(v: f64) -> f64 {
    format_number(v).parse().expect("formatted numbers parse")
}

pub fn csv_header(n: usize) -> String {
    let mut header = String::from("alpha_d,alpha_a");
    for prefix in ["x", "y"] {
        for i in 1..=n {
            write!(header, ",{prefix}_{i}").unwrap();
        }
    }
    header.push_str(",perceived_cost,true_loss_a0,true_loss,iterations,residual,converged");
    header
}

pub fn csv_row(record: &SweepRecord) -> String {
    let mut fields = vec![format_number(record.alpha_d), format_number(record.alpha_a)];
    fields.extend(record.x.iter().chain(&record.y).map(|&v| format_number(v)));
    fields.extend([record.perceived_cost, record.true_loss_a0, record.true_loss].map(format_number));
    fields.push(record.iterations.to_string());
    fields.push(format_number(record.residual));
    fields.push(record.converged.to_string());
    fields.join(",")
}

/// Header plus one line per record, LF terminated.
pub fn to_csv(records: &[SweepRecord]) -> String {
    let n = records.first().map_or(0, |r| r.x.len());
    let mut out = csv_header(n);
    out.push('\n');
    for record in records {
        out.push_str(&csv_row(record));
        out.push('\n');
    }
    out
}
