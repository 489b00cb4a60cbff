use std::fmt;
use std::str::FromStr;

/// An inclusive arithmetic grid written `start:stop:step`, or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid grid `{text}`: {reason}")]
pub struct GridError {
    text: String,
    reason: &'static str,
}

impl Grid {
    pub fn from_points(points: Vec<f64>) -> Self {
        Self { points }
    }

    /// `0.2:1.0:0.1`, the default α_D sweep.
    pub fn default_alpha_d() -> Self {
        "0.2:1.0:0.1".parse().expect("valid literal grid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl FromStr for Grid {
    type Err = GridError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let fail = |reason| GridError { text: text.to_string(), reason };
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| fail("expected numbers"))?;
        if parts.iter().any(|v| !v.is_finite()) {
            return Err(fail("values must be finite"));
        }
        match parts[..] {
            [single] => Ok(Self { points: vec![single] }),
            [start, stop, step] => {
                if step <= 0.0 {
                    return Err(fail("step must be > 0"));
                }
                if stop < start {
                    return Err(fail("stop is below start"));
                }
                let intervals = ((stop - start) / step + 1e-9).floor() as usize;
                let points = (0..=intervals)
                    .map(|i| {
                        // snap to a short decimal so 0.2 + 1 * 0.1 prints as 0.3
                        let v = start + i as f64 * step;
                        let snapped = (v * 1e12).round() / 1e12;
                        if (snapped - v).abs() <= 1e-12 * v.abs().max(1.0) {
                            snapped
                        } else {
                            v
                        }
                    })
                    .collect();
                Ok(Self { points })
            }
            _ => Err(fail("expected `start:stop:step` or a single value")),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
