//! Finite-difference ground state of `-s d^2/dx^2 - C(x) / (2 l)` on
//! `(-L, L)` with Dirichlet walls.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{CorrelationProfile, LangmuirError};

/// Cell-averaged correlation on a uniform interior grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WellGrid {
    pub half_width: f64,
    pub spacing: f64,
    /// Averages of `C(x) / amplitude` over each grid cell.
    unit_average: Vec<f64>,
    amplitude: f64,
}

impl WellGrid {
    /// `points` interior nodes `x_i = -L + i h`, `h = 2L / (points + 1)`.
    pub fn new(
        profile: &CorrelationProfile,
        half_width: f64,
        points: usize,
    ) -> Result<Self, LangmuirError> {
        let h = 2.0 * half_width / (points + 1) as f64;
        let unit = profile.with_amplitude(1.0);
        let mut unit_average = Vec::with_capacity(points);
        for i in 1..=points {
            let x = -half_width + i as f64 * h;
            unit_average.push(unit.integral(x - 0.5 * h, x + 0.5 * h)? / h);
        }
        Ok(Self {
            half_width,
            spacing: h,
            unit_average,
            amplitude: profile.amplitude,
        })
    }

    pub fn points(&self) -> usize {
        self.unit_average.len()
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self {
            amplitude,
            ..self.clone()
        }
    }

    /// Lowest eigenvalue with stiffness `s` in front of the Laplacian.
    pub fn lowest(&self, lambda: f64, stiffness: f64) -> f64 {
        let h2 = self.spacing * self.spacing;
        let depth = self.amplitude / (2.0 * lambda);
        let diag: Vec<f64> = self
            .unit_average
            .iter()
            .map(|c| 2.0 * stiffness / h2 - depth * c)
            .collect();
        lowest_eigenvalue(&diag, -stiffness / h2)
    }
}

/// Lowest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `diag` and constant off-diagonal `off`.
///
/// Sturm counts keep a bracket `[lo, hi]` around the eigenvalue. Below the
/// spectrum, Newton's method on `det(A - x)` never overshoots the lowest
/// root, so once its step covers a good part of the bracket it replaces
/// bisection.
pub fn lowest_eigenvalue(diag: &[f64], off: f64) -> f64 {
    match diag.len() {
        0 => return f64::NAN,
        1 => return diag[0],
        _ => {}
    }
    let e2 = off * off;
    let pivmin = f64::MIN_POSITIVE * e2.max(1.0);
    // Count of eigenvalues below x and, when there are none, the Newton step
    // `1 / sum_j 1/(lambda_j - x)` from x.
    let probe = |x: f64| -> (usize, f64) {
        let mut count = 0;
        let (mut q, mut dq) = (1.0f64, 0.0f64);
        let mut dlog = 0.0;
        for (i, &d) in diag.iter().enumerate() {
            if i == 0 {
                q = d - x;
                dq = -1.0;
            } else {
                let prev = q;
                q = d - x - e2 / prev;
                dq = -1.0 + e2 * dq / (prev * prev);
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
            dlog += dq / q;
        }
        (count, if count == 0 { -1.0 / dlog } else { 0.0 })
    };
    let r = 2.0 * off.abs();
    let mut lo = diag.iter().fold(f64::INFINITY, |a, &d| a.min(d - r));
    let mut hi = diag.iter().fold(f64::INFINITY, |a, &d| a.min(d)) + f64::EPSILON * r + pivmin;
    let (_, mut step) = probe(lo);
    // After a Newton step lands just past the eigenvalue through rounding,
    // probe slightly below it before resuming.
    let mut backoff = false;
    for _ in 0..300 {
        let width = hi - lo;
        if width <= 2.0 * f64::EPSILON * (lo.abs() + hi.abs()) + pivmin {
            break;
        }
        let newton = !backoff && step >= 0.25 * width && lo + step < hi;
        let x = if backoff {
            hi - 1e-4 * width
        } else if newton {
            lo + step
        } else {
            lo + 0.5 * width
        };
        backoff = false;
        if x <= lo || x >= hi {
            break;
        }
        let (count, next) = probe(x);
        if count == 0 {
            lo = x;
            step = next;
            if newton && step <= 2.0 * f64::EPSILON * lo.abs() + pivmin {
                return lo + step;
            }
        } else {
            hi = x;
            backoff = newton;
        }
    }
    0.5 * (lo + hi)
}
