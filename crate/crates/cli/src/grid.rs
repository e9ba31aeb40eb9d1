//! `start:stop:count` axes and `name=start:stop:count` grid flags.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Inclusive uniform axis; a single point when `count == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn point(x: f64) -> Self {
        Self {
            start: x,
            stop: x,
            count: 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => {
                let step = (self.stop - self.start) / (n - 1) as f64;
                (0..n)
                    .map(|i| if i + 1 == n { self.stop } else { self.start + i as f64 * step })
                    .collect()
            }
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64, String> {
            let x: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("`{t}` is not finite"))
            }
        };
        match parts.as_slice() {
            [x] => Ok(Axis::point(num(x)?)),
            [a, b, n] => {
                let count: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("count `{n}` is not a positive integer"))?;
                if count == 0 {
                    return Err("count must be at least 1".into());
                }
                let (start, stop) = (num(a)?, num(b)?);
                if count == 1 && start != stop {
                    return Err("a one-point axis needs start == stop".into());
                }
                Ok(Axis { start, stop, count })
            }
            _ => Err(format!("expected start:stop:count, got `{s}`")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 1 {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.stop, self.count)
        }
    }
}

/// One `name=start:stop:count` flag value.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub axis: Axis,
}

impl FromStr for GridAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (name, range) = s
            .split_once('=')
            .ok_or_else(|| format!("expected name=start:stop:count, got `{s}`"))?;
        Ok(GridAxis {
            name: name.trim().to_string(),
            axis: range.parse()?,
        })
    }
}

/// Applies grid flags to named axes, rejecting names the command lacks.
pub fn apply_grid(grid: &[GridAxis], axes: &mut [(&str, &mut Axis)]) -> Result<(), String> {
    for g in grid {
        let known: Vec<&str> = axes.iter().map(|(n, _)| *n).collect();
        let slot = axes
            .iter_mut()
            .find(|(n, _)| *n == g.name)
            .ok_or_else(|| format!("unknown grid axis `{}`; expected one of {}", g.name, known.join(", ")))?;
        *slot.1 = g.axis;
    }
    Ok(())
}
