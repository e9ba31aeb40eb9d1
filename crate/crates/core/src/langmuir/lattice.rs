//! Periodic one-dimensional lattice version of the second-moment equations
//! with constant correlation, for cross-checking the dispersion quartic.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use super::{dispersion_from_eps, require, LangmuirError};
use crate::model::LinearSDESystem;

/// `sites` points with spacing `spacing` on a ring; state `(phi, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicLattice {
    pub mass: f64,
    pub sigma2: f64,
    pub sites: usize,
    pub spacing: f64,
}

impl PeriodicLattice {
    pub fn new(mass: f64, sigma2: f64, sites: usize, spacing: f64) -> Result<Self, LangmuirError> {
        super::check_mass(mass)?;
        super::check_sigma2(sigma2)?;
        require(sites >= 1, "sites", "need at least one site")?;
        require(spacing > 0.0, "spacing", format!("must be positive, got {spacing}"))?;
        Ok(Self {
            mass,
            sigma2,
            sites,
            spacing,
        })
    }

    /// `K = m^2 - discrete Laplacian`.
    pub fn stiffness(&self) -> DMatrix<f64> {
        let n = self.sites;
        let h2 = self.spacing * self.spacing;
        let mut k = DMatrix::from_diagonal_element(n, n, self.mass * self.mass);
        if n > 1 {
            for i in 0..n {
                k[(i, i)] += 2.0 / h2;
                k[(i, (i + 1) % n)] -= 1.0 / h2;
                k[(i, (i + n - 1) % n)] -= 1.0 / h2;
            }
        }
        k
    }

    /// Squared mode frequencies `m^2 + (4/h^2) sin^2(pi j / n)`.
    pub fn mode_eps2(&self) -> Vec<f64> {
        let n = self.sites;
        (0..n)
            .map(|j| {
                let s = if n > 1 {
                    (core::f64::consts::PI * j as f64 / n as f64).sin()
                } else {
                    0.0
                };
                self.mass * self.mass + 4.0 * s * s / (self.spacing * self.spacing)
            })
            .collect()
    }
}

/// `[[0, I], [-K, 0]]`.
pub fn lattice_drift(lat: &PeriodicLattice) -> DMatrix<f64> {
    let n = lat.sites;
    let mut l = DMatrix::zeros(2 * n, 2 * n);
    let k = lat.stiffness();
    for i in 0..n {
        l[(i, n + i)] = 1.0;
        for j in 0..n {
            l[(n + i, j)] = -k[(i, j)];
        }
    }
    l
}

/// The lattice as a linear SDE: one driver shared by all sites, entering as
/// `dp_i = ... + sigma phi_i dw`.
pub fn lattice_system(lat: &PeriodicLattice) -> Result<LinearSDESystem, LangmuirError> {
    let n = lat.sites;
    let mut rho = DMatrix::zeros(2 * n, 2 * n);
    let sigma = lat.sigma2.sqrt();
    for i in 0..n {
        rho[(n + i, i)] = sigma;
    }
    LinearSDESystem::new(lattice_drift(lat), vec![rho])
        .map_err(|e| super::invalid("lattice", format!("{e}")))
}

/// Largest growth rate over all mode pairs, from the quartic.
pub fn lattice_max_growth(lat: &PeriodicLattice) -> Result<f64, LangmuirError> {
    let eps: Vec<f64> = lat.mode_eps2().into_iter().map(|e| e.sqrt()).collect();
    let mut best = f64::NEG_INFINITY;
    for (i, &a) in eps.iter().enumerate() {
        for &b in &eps[i..] {
            best = best.max(dispersion_from_eps(a, b, lat.sigma2)?.max_real);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeGrowth {
    pub rate: f64,
    pub stderr: f64,
}

/// Integrates `dY/dt = L Y + Y L^T + s2 J Y J^T` with RK4 from `Y = I` and
/// fits the growth of `ln |Y|` over the second half of the run.
pub fn lattice_second_moment_growth(
    lat: &PeriodicLattice,
    dt: f64,
    horizon: f64,
) -> Result<LatticeGrowth, LangmuirError> {
    require(dt > 0.0 && dt < horizon, "dt", "must lie in (0, horizon)")?;
    let n = lat.sites;
    let l = lattice_drift(lat);
    let lt = l.transpose();
    let s2 = lat.sigma2;
    let rhs = |y: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = &l * y + y * &lt;
        // J Y J^T places the phi-phi block of Y into the p-p block.
        for i in 0..n {
            for j in 0..n {
                out[(n + i, n + j)] += s2 * y[(i, j)];
            }
        }
        out
    };

    let steps = (horizon / dt).round() as usize;
    let mut y = DMatrix::<f64>::identity(2 * n, 2 * n);
    let mut log_scale = 0.0;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let every = (steps / 400).max(1);
    for step in 1..=steps {
        let k1 = rhs(&y);
        let k2 = rhs(&(&y + &k1 * (0.5 * dt)));
        let k3 = rhs(&(&y + &k2 * (0.5 * dt)));
        let k4 = rhs(&(&y + &k3 * dt));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let norm = y.norm();
        if norm > 1e100 {
            y /= norm;
            log_scale += norm.ln();
        }
        let t = step as f64 * dt;
        if step % every == 0 && t >= 0.5 * horizon {
            samples.push((t, log_scale + y.norm().ln()));
        }
    }
    let k = samples.len() as f64;
    require(k >= 3.0, "horizon", "too few samples for a fit")?;
    let tm = samples.iter().map(|s| s.0).sum::<f64>() / k;
    let ym = samples.iter().map(|s| s.1).sum::<f64>() / k;
    let sxx: f64 = samples.iter().map(|s| (s.0 - tm) * (s.0 - tm)).sum();
    let sxy: f64 = samples.iter().map(|s| (s.0 - tm) * (s.1 - ym)).sum();
    let rate = sxy / sxx;
    let ssr: f64 = samples
        .iter()
        .map(|s| {
            let r = s.1 - ym - rate * (s.0 - tm);
            r * r
        })
        .sum();
    Ok(LatticeGrowth {
        rate,
        stderr: (ssr / (k - 2.0) / sxx).sqrt(),
    })
}
