//! Langmuir waves in a randomly modulated background.
//!
//! All quantities are in the scaled, dimensionless units of the Klein–Gordon
//! model with plasma mass `m`. Bound-state problems are one-dimensional; for
//! `k > 0` the transverse Laplacian is dropped and only the axis along `k`
//! is kept.

mod lattice;
mod well;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::spectral::{eigenvalues, polynomial_roots, spectrum_order, Complex64, SpectralError};

pub use lattice::{
    lattice_drift, lattice_max_growth, lattice_second_moment_growth, lattice_system,
    LatticeGrowth, PeriodicLattice,
};
pub use well::{lowest_eigenvalue, WellGrid};

/// Real parts within this distance of zero are classified as marginal.
pub const CLASSIFICATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LangmuirError {
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("profile {0:?} has no finite-width well")]
    UnsupportedProfile(ProfileKind),
    #[error("no bound state: lowest eigenvalue {lowest:e} is not negative")]
    NoBoundState { lowest: f64 },
    #[error("grid too coarse: eigenvalue changed by {change:e} at {grid_points} points")]
    GridTooCoarse { change: f64, grid_points: usize },
    #[error("no sign change of the matching function: g({lo:e}) = {g_lo:e}, g({hi:e}) = {g_hi:e}")]
    BracketNotFound { lo: f64, g_lo: f64, hi: f64, g_hi: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn invalid(name: &'static str, message: String) -> LangmuirError {
    LangmuirError::InvalidParameter { name, message }
}

fn require(cond: bool, name: &'static str, message: impl Into<String>) -> Result<(), LangmuirError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, message.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    Constant,
    Delta,
    Gaussian,
    Exponential,
    Rectangular,
}

/// Spatial correlation `C(x)` of the background fluctuations.
///
/// Gaussian is `c exp(-(x/d)^2)`, exponential `c exp(-|x|/d)`, rectangular
/// `c` on `|x| < d`. Constant and delta carry only the amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationProfile {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub width: f64,
}

impl CorrelationProfile {
    pub fn new(kind: ProfileKind, amplitude: f64, width: f64) -> Result<Self, LangmuirError> {
        require(
            amplitude >= 0.0 && amplitude.is_finite(),
            "amplitude",
            format!("must be finite and >= 0, got {amplitude}"),
        )?;
        if kind.has_width() {
            require(
                width > 0.0 && width.is_finite(),
                "width",
                format!("must be positive, got {width}"),
            )?;
        }
        Ok(Self {
            kind,
            amplitude,
            width,
        })
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self, LangmuirError> {
        Self::new(ProfileKind::Gaussian, amplitude, width)
    }

    pub fn exponential(amplitude: f64, width: f64) -> Result<Self, LangmuirError> {
        Self::new(ProfileKind::Exponential, amplitude, width)
    }

    pub fn rectangular(amplitude: f64, width: f64) -> Result<Self, LangmuirError> {
        Self::new(ProfileKind::Rectangular, amplitude, width)
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    /// `C(x)`; the delta profile returns 0 away from the origin and infinity at it.
    pub fn value(&self, x: f64) -> f64 {
        let (c, d) = (self.amplitude, self.width);
        match self.kind {
            ProfileKind::Constant => c,
            ProfileKind::Delta => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            ProfileKind::Gaussian => c * (-(x / d) * (x / d)).exp(),
            ProfileKind::Exponential => c * (-x.abs() / d).exp(),
            ProfileKind::Rectangular => {
                if x.abs() < d {
                    c
                } else {
                    0.0
                }
            }
        }
    }

    /// Exact `int_a^b C(x) dx` for the finite-width kinds.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64, LangmuirError> {
        if b < a {
            return Ok(-self.integral(b, a)?);
        }
        let (c, d) = (self.amplitude, self.width);
        Ok(match self.kind {
            ProfileKind::Gaussian => {
                // erfc differences keep accuracy in the tails.
                let half = c * d * core::f64::consts::PI.sqrt() / 2.0;
                let tail = |x: f64| libm::erfc(x / d);
                if a >= 0.0 {
                    half * (tail(a) - tail(b))
                } else if b <= 0.0 {
                    half * (tail(-b) - tail(-a))
                } else {
                    half * (libm::erf(b / d) + libm::erf(-a / d))
                }
            }
            ProfileKind::Exponential => {
                let half = |lo: f64, hi: f64| c * d * ((-lo / d).exp() - (-hi / d).exp());
                if a >= 0.0 {
                    half(a, b)
                } else if b <= 0.0 {
                    half(-b, -a)
                } else {
                    half(0.0, b) + half(0.0, -a)
                }
            }
            ProfileKind::Rectangular => c * (b.min(d) - a.max(-d)).max(0.0),
            kind => return Err(LangmuirError::UnsupportedProfile(kind)),
        })
    }

    /// `int C(x) dx` over the whole line.
    pub fn total_weight(&self) -> Result<f64, LangmuirError> {
        let (c, d) = (self.amplitude, self.width);
        Ok(match self.kind {
            ProfileKind::Gaussian => c * d * core::f64::consts::PI.sqrt(),
            ProfileKind::Exponential => 2.0 * c * d,
            ProfileKind::Rectangular => 2.0 * c * d,
            kind => return Err(LangmuirError::UnsupportedProfile(kind)),
        })
    }

    /// Nonnegative and decaying at infinity.
    pub fn is_positive_decaying(&self) -> bool {
        self.kind.has_width()
    }
}

impl ProfileKind {
    pub fn has_width(self) -> bool {
        matches!(
            self,
            ProfileKind::Gaussian | ProfileKind::Exponential | ProfileKind::Rectangular
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangmuirProblem {
    pub plasma_mass: f64,
    pub sigma2: f64,
    pub correlation: CorrelationProfile,
}

impl LangmuirProblem {
    pub fn new(
        plasma_mass: f64,
        sigma2: f64,
        correlation: CorrelationProfile,
    ) -> Result<Self, LangmuirError> {
        check_mass(plasma_mass)?;
        check_sigma2(sigma2)?;
        Ok(Self {
            plasma_mass,
            sigma2,
            correlation,
        })
    }
}

fn check_mass(m: f64) -> Result<(), LangmuirError> {
    require(m > 0.0 && m.is_finite(), "plasma_mass", format!("must be positive, got {m}"))
}

fn check_sigma2(s: f64) -> Result<(), LangmuirError> {
    require(s >= 0.0 && s.is_finite(), "sigma2", format!("must be finite and >= 0, got {s}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn from_max_real(max_real: f64) -> Self {
        if max_real > CLASSIFICATION_TOL {
            Stability::Unstable
        } else if max_real < -CLASSIFICATION_TOL {
            Stability::Stable
        } else {
            Stability::Marginal
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionRoots {
    /// Sorted by descending real part.
    pub roots: Vec<Complex64>,
    pub max_real: f64,
    pub classification: Stability,
}

impl DispersionRoots {
    fn from_roots(mut roots: Vec<Complex64>) -> Self {
        roots.sort_by(spectrum_order);
        let max_real = roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        Self {
            roots,
            max_real,
            classification: Stability::from_max_real(max_real),
        }
    }
}

pub fn epsilon_k(m: f64, k: f64) -> f64 {
    (m * m + k * k).sqrt()
}

/// The four frequencies `±eps1 ± eps2`, in descending order.
pub fn dispersion_zero_noise(m: f64, k1: f64, k2: f64) -> [f64; 4] {
    let (e1, e2) = (epsilon_k(m, k1), epsilon_k(m, k2));
    let (s, d) = (e1 + e2, (e1 - e2).abs());
    [s, d, -d, -s]
}

/// Coefficients (highest degree first) of
/// `l^4 + 2 l^2 (e1^2 + e2^2) - 2 l s2 + (e1^2 - e2^2)^2`.
pub fn quartic_coefficients(eps1: f64, eps2: f64, sigma2: f64) -> [f64; 5] {
    let (a, b) = (eps1 * eps1, eps2 * eps2);
    [1.0, 0.0, 2.0 * (a + b), -2.0 * sigma2, (a - b) * (a - b)]
}

/// Roots of the constant-correlation dispersion quartic.
pub fn dispersion_complete_correlation(
    m: f64,
    k1: f64,
    k2: f64,
    sigma2: f64,
) -> Result<DispersionRoots, LangmuirError> {
    check_mass(m)?;
    check_sigma2(sigma2)?;
    dispersion_from_eps(epsilon_k(m, k1), epsilon_k(m, k2), sigma2)
}

pub fn dispersion_from_eps(eps1: f64, eps2: f64, sigma2: f64) -> Result<DispersionRoots, LangmuirError> {
    let roots = polynomial_roots(&quartic_coefficients(eps1, eps2, sigma2))?;
    Ok(DispersionRoots::from_roots(roots))
}

/// Leading-order growth `s2 / (2 eps_k^2)` for `eps_k^2 >> s2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticGrowth {
    pub rate: f64,
    /// False when `eps_k^2 <= 10 s2`, outside the asymptotic regime.
    pub in_regime: bool,
}

pub fn asymptotic_growth_large_k(m: f64, k: f64, sigma2: f64) -> AsymptoticGrowth {
    let e2 = m * m + k * k;
    AsymptoticGrowth {
        rate: sigma2 / (2.0 * e2),
        in_regime: e2 > 10.0 * sigma2,
    }
}

/// `4 k^2 (4 m^2 + k^2)`: the value of `s2^2` separating oscillating from
/// growing modes under white noise.
pub fn white_noise_threshold(m: f64, k: f64) -> f64 {
    4.0 * k * k * (4.0 * m * m + k * k)
}

/// Decay constant `alpha = l s2 / B` of the white-noise mode
/// `exp(-alpha |x|)`, with `B = 4 (l^2 + k^2)`.
pub fn white_noise_alpha(k: f64, sigma2: f64, lambda: Complex64) -> Complex64 {
    lambda * sigma2 / white_noise_b(k, lambda)
}

pub fn white_noise_b(k: f64, lambda: Complex64) -> Complex64 {
    (lambda * lambda + k * k) * 4.0
}

pub fn white_noise_a(m: f64, k: f64, lambda: Complex64) -> Complex64 {
    let l2 = lambda * lambda;
    l2 * l2 + l2 * (4.0 * m * m + k * k)
}

/// Residuals of the jump condition `2 B alpha = 2 l s2` and of
/// `B alpha^2 = A` for a candidate root.
pub fn white_noise_jump_residuals(m: f64, k: f64, sigma2: f64, lambda: Complex64) -> (f64, f64) {
    let b = white_noise_b(k, lambda);
    let alpha = white_noise_alpha(k, sigma2, lambda);
    let jump = (b * alpha * 2.0 - lambda * (2.0 * sigma2)).norm();
    let quad = (b * alpha * alpha - white_noise_a(m, k, lambda)).norm();
    (jump, quad)
}

/// Growth rates for delta-correlated noise in one dimension.
///
/// Roots come from `l^2 = -(2m^2 + k^2) + sqrt(4m^4 + s2^2/4)` restricted to
/// `Re l >= 0`. The verdict follows the threshold on `s2^2`: purely
/// oscillating roots below it count as stable.
pub fn white_noise_growth(m: f64, k: f64, sigma2: f64) -> Result<DispersionRoots, LangmuirError> {
    check_mass(m)?;
    check_sigma2(sigma2)?;
    let s4 = sigma2 * sigma2;
    let threshold = white_noise_threshold(m, k);
    let scale = threshold.max(4.0 * m.powi(4) * f64::EPSILON);
    let rel = (s4 - threshold) / scale;
    let classification = if rel.abs() <= 1e-12 {
        Stability::Marginal
    } else if rel > 0.0 {
        Stability::Unstable
    } else {
        Stability::Stable
    };
    let u = match classification {
        Stability::Marginal => 0.0,
        _ => -(2.0 * m * m + k * k) + (4.0 * m.powi(4) + s4 / 4.0).sqrt(),
    };
    let candidates = if u > 0.0 {
        vec![Complex64::new(u.sqrt(), 0.0)]
    } else if u < 0.0 {
        let w = (-u).sqrt();
        vec![Complex64::new(0.0, w), Complex64::new(0.0, -w)]
    } else {
        vec![Complex64::new(0.0, 0.0)]
    };
    let roots: Vec<Complex64> = candidates
        .into_iter()
        .filter(|&l| {
            let b = white_noise_b(k, l);
            b.norm() == 0.0 || white_noise_alpha(k, sigma2, l).re >= -1e-12
        })
        .collect();
    let mut out = DispersionRoots::from_roots(roots);
    out.classification = classification;
    Ok(out)
}

/// The 4x4 matrix `E1 (x) 1 + 1 (x) E2 + s2 a (x) a` with
/// `E = [[0, 1], [-eps^2, 0]]` and `a = [[0, 0], [1, 0]]`.
pub fn appendix_matrix(eps1: f64, eps2: f64, sigma2: f64) -> DMatrix<f64> {
    let e = |eps: f64| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -eps * eps, 0.0]);
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let id = DMatrix::<f64>::identity(2, 2);
    e(eps1).kronecker(&id) + id.kronecker(&e(eps2)) + a.kronecker(&a) * sigma2
}

/// Largest `|4 e1^2 e2^2 + 2 i w s2 - (e1^2 + e2^2 - w^2)^2|` over the
/// eigenvalues `i w` of [`appendix_matrix`].
pub fn appendix_dispersion_check(eps1: f64, eps2: f64, sigma2: f64) -> Result<f64, LangmuirError> {
    require(eps1 > 0.0 && eps2 > 0.0, "eps", "must be positive")?;
    check_sigma2(sigma2)?;
    let (a, b) = (eps1 * eps1, eps2 * eps2);
    let i = Complex64::new(0.0, 1.0);
    let worst = eigenvalues(&appendix_matrix(eps1, eps2, sigma2))?
        .into_iter()
        .map(|mu| {
            let w = -i * mu;
            let t = Complex64::new(a + b, 0.0) - w * w;
            (Complex64::new(4.0 * a * b, 0.0) + i * w * (2.0 * sigma2) - t * t).norm()
        })
        .fold(0.0f64, f64::max);
    Ok(worst)
}

/// Spectral abscissa of [`appendix_matrix`].
pub fn appendix_abscissa(eps1: f64, eps2: f64, sigma2: f64) -> Result<f64, LangmuirError> {
    Ok(crate::spectral::spectral_abscissa(&appendix_matrix(eps1, eps2, sigma2))?)
}

/// Grid controls for the bound-state solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStateOptions {
    /// Dirichlet walls at `±half_width`; `None` picks a default from the
    /// profile width (and the plasma mass where one is known).
    pub half_width: Option<f64>,
    pub grid_points: usize,
    pub max_grid_points: usize,
    /// Allowed change of the eigenvalue when the grid is doubled.
    pub convergence_tol: f64,
    /// Lowest eigenvalues above `-no_bound_tol` count as unbound.
    pub no_bound_tol: f64,
}

impl Default for BoundStateOptions {
    fn default() -> Self {
        Self {
            half_width: None,
            grid_points: 4096,
            max_grid_points: 1 << 18,
            convergence_tol: 1e-6,
            no_bound_tol: 1e-10,
        }
    }
}

impl BoundStateOptions {
    fn resolve_half_width(&self, profile: &CorrelationProfile, mass: Option<f64>) -> f64 {
        self.half_width.unwrap_or_else(|| {
            let w = 10.0 * profile.width;
            match mass {
                Some(m) => w.max(profile.width + 20.0 / m),
                None => w,
            }
        })
    }

    fn check(&self, profile: &CorrelationProfile, half_width: f64) -> Result<(), LangmuirError> {
        if !profile.is_positive_decaying() {
            return Err(LangmuirError::UnsupportedProfile(profile.kind));
        }
        require(
            half_width >= 10.0 * profile.width,
            "half_width",
            format!("must be at least 10 correlation widths, got {half_width}"),
        )?;
        require(
            self.grid_points >= 512,
            "grid_points",
            format!("need at least 512 points, got {}", self.grid_points),
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Grid on which `energy` was computed.
    pub grid_points: usize,
    /// Change relative to the grid with half as many points.
    pub change: f64,
    pub half_width: f64,
}

/// Bound states are resolved with the wall at least this many decay lengths
/// `1/sqrt(-E)` from the well.
const WALL_DECAY_LENGTHS: f64 = 15.0;

/// Lowest eigenvalue of `-d^2/dx^2 - C(x) / (2 l)` with Dirichlet walls,
/// doubling the grid until it changes by at most the tolerance.
pub fn bound_state_energy(
    profile: &CorrelationProfile,
    lambda: f64,
    opts: &BoundStateOptions,
) -> Result<BoundState, LangmuirError> {
    require(lambda > 0.0 && lambda.is_finite(), "lambda", format!("must be positive, got {lambda}"))?;
    let mut half_width = opts.resolve_half_width(profile, None);
    opts.check(profile, half_width)?;
    let mut grid_opts = *opts;
    let mut state = converged_energy(profile, lambda, 1.0, half_width, &grid_opts)?;
    // With a default box, widen it until the wall sits many decay lengths
    // beyond the well, keeping the spacing fixed.
    while opts.half_width.is_none() && state.energy < 0.0 {
        let needed = 3.0 * profile.width + WALL_DECAY_LENGTHS / (-state.energy).sqrt();
        if needed <= half_width {
            break;
        }
        let scale = needed / half_width;
        half_width = needed;
        grid_opts.grid_points = (grid_opts.grid_points as f64 * scale).ceil() as usize;
        if 2 * grid_opts.grid_points > opts.max_grid_points {
            return Err(LangmuirError::GridTooCoarse {
                change: f64::NAN,
                grid_points: grid_opts.grid_points,
            });
        }
        state = converged_energy(profile, lambda, 1.0, half_width, &grid_opts)?;
    }
    state.half_width = half_width;
    if state.energy >= -opts.no_bound_tol {
        return Err(LangmuirError::NoBoundState {
            lowest: state.energy,
        });
    }
    Ok(state)
}

fn converged_energy(
    profile: &CorrelationProfile,
    lambda: f64,
    stiffness: f64,
    half_width: f64,
    opts: &BoundStateOptions,
) -> Result<BoundState, LangmuirError> {
    let mut n = opts.grid_points;
    let mut coarse = WellGrid::new(profile, half_width, n)?.lowest(lambda, stiffness);
    loop {
        let fine_n = 2 * n;
        if fine_n > opts.max_grid_points {
            return Err(LangmuirError::GridTooCoarse {
                change: f64::NAN,
                grid_points: n,
            });
        }
        let fine = WellGrid::new(profile, half_width, fine_n)?.lowest(lambda, stiffness);
        let change = (fine - coarse).abs();
        if change <= opts.convergence_tol {
            return Ok(BoundState {
                energy: fine,
                grid_points: fine_n,
                change,
                half_width,
            });
        }
        if 2 * fine_n > opts.max_grid_points {
            return Err(LangmuirError::GridTooCoarse {
                change,
                grid_points: fine_n,
            });
        }
        coarse = fine;
        n = fine_n;
    }
}

/// Root of the `k = 0` matching condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthRoot {
    pub lambda: f64,
    pub energy: f64,
    /// `E + m^2 + l^2/4` at the returned root.
    pub residual: f64,
    pub grid_points: usize,
    pub half_width: f64,
}

/// Matching function `E(l) + m^2 + k^2/4 + l^2/4` on a fixed grid, using the
/// raw lowest eigenvalue of the `k`-stiffened operator.
pub fn matching_function(grid: &WellGrid, m: f64, k: f64, lambda: f64) -> f64 {
    let stiffness = 1.0 + (k / lambda) * (k / lambda);
    grid.lowest(lambda, stiffness) + m * m + k * k / 4.0 + lambda * lambda / 4.0
}

/// Relative bisection tolerance in `l`; much tighter than needed for a
/// matching residual of 1e-8.
const LAMBDA_RTOL: f64 = 1e-13;

/// The growth rate `l > 0` of the `k = 0` mode: the unique root of
/// `E(l) = -(m^2 + l^2/4)`.
pub fn find_growth_rate_k0(
    problem: &LangmuirProblem,
    opts: &BoundStateOptions,
) -> Result<GrowthRoot, LangmuirError> {
    let profile = &problem.correlation;
    let m = problem.plasma_mass;
    check_mass(m)?;
    let half_width = opts.resolve_half_width(profile, Some(m));
    opts.check(profile, half_width)?;
    require(profile.amplitude > 0.0, "amplitude", "must be positive")?;

    let mut n = opts.grid_points;
    loop {
        let grid = WellGrid::new(profile, half_width, n)?;
        let g = |l: f64| matching_function(&grid, m, 0.0, l);
        let lo = 1e-6 * m;
        let g_lo = g(lo);
        let mut hi = m.max(1e-3);
        let mut g_hi = g(hi);
        let mut grow = 0;
        while g_hi <= 0.0 {
            hi *= 2.0;
            g_hi = g(hi);
            grow += 1;
            if grow > 60 || !g_hi.is_finite() {
                break;
            }
        }
        if !(g_lo < 0.0 && g_hi > 0.0) {
            return Err(LangmuirError::BracketNotFound { lo, g_lo, hi, g_hi });
        }
        let lambda = bisect(g, lo, hi, LAMBDA_RTOL);
        let energy = grid.lowest(lambda, 1.0);
        let residual = energy + m * m + lambda * lambda / 4.0;

        let fine_n = 2 * n;
        let fine = WellGrid::new(profile, half_width, fine_n)?.lowest(lambda, 1.0);
        let change = (fine - energy).abs();
        if change <= opts.convergence_tol {
            return Ok(GrowthRoot {
                lambda,
                energy,
                residual,
                grid_points: n,
                half_width,
            });
        }
        if 2 * fine_n > opts.max_grid_points {
            return Err(LangmuirError::GridTooCoarse {
                change,
                grid_points: n,
            });
        }
        n = fine_n;
    }
}

/// Root of an increasing function bracketed by `lo < hi`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rtol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rtol * hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Return the endpoint with the smaller residual.
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Outcome of the `k > 0` matching problem at a single amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeVerdict {
    pub stability: Stability,
    /// Minimum over `l > 0` of the matching function; negative means some
    /// growing mode exists.
    pub min_matching: f64,
    pub argmin_lambda: f64,
}

/// Result of [`stability_threshold_k`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    /// Verdict at the problem's own amplitude.
    pub verdict: ModeVerdict,
    /// Amplitude `c*` separating stable from unstable, to 1e-4 relative.
    pub critical_amplitude: f64,
    pub half_width: f64,
    pub grid_points: usize,
}

/// Number of log-spaced `l` samples before golden-section refinement.
const LAMBDA_SCAN: usize = 48;

/// Is there an `l > 0` with `E_k(l) = -(m^2 + k^2/4 + l^2/4)` at the
/// problem's amplitude?
pub fn mode_verdict_k(
    problem: &LangmuirProblem,
    k: f64,
    opts: &BoundStateOptions,
) -> Result<ModeVerdict, LangmuirError> {
    let (half_width, _) = threshold_setup(problem, k, opts)?;
    let grid = WellGrid::new(&problem.correlation, half_width, opts.grid_points)?;
    Ok(verdict_on_grid(&grid, problem.plasma_mass, k, problem.correlation.amplitude))
}

fn threshold_setup(
    problem: &LangmuirProblem,
    k: f64,
    opts: &BoundStateOptions,
) -> Result<(f64, ()), LangmuirError> {
    check_mass(problem.plasma_mass)?;
    require(k > 0.0 && k.is_finite(), "k", format!("must be positive, got {k}"))?;
    let half_width = opts.resolve_half_width(&problem.correlation, Some(problem.plasma_mass));
    opts.check(&problem.correlation, half_width)?;
    Ok((half_width, ()))
}

fn verdict_on_grid(grid: &WellGrid, m: f64, k: f64, amplitude: f64) -> ModeVerdict {
    scan_matching(grid, m, k, amplitude, false)
}

/// Minimizes the matching function over `l`. With `stop_at_negative` the scan
/// returns at the first negative sample, which settles the verdict.
fn scan_matching(grid: &WellGrid, m: f64, k: f64, amplitude: f64, stop_at_negative: bool) -> ModeVerdict {
    let scaled = grid.with_amplitude(amplitude);
    let g = |l: f64| matching_function(&scaled, m, k, l);
    // Below l = 2 k^2 mu / c the stiffened kinetic term alone (mu is the
    // lowest Dirichlet mode) outweighs the well; above l^3 = 2c the well
    // cannot beat the l^2/4 term.
    let mu = (core::f64::consts::PI / (2.0 * grid.half_width)).powi(2);
    let lo = if amplitude > 0.0 {
        (1e-6 * m).max(2.0 * k * k * mu / amplitude)
    } else {
        1e-6 * m
    };
    let hi = ((2.0 * amplitude).cbrt().max(m) * 2.0).max(2.0 * lo);
    let ratio = (hi / lo).ln() / (LAMBDA_SCAN - 1) as f64;
    let ls: Vec<f64> = (0..LAMBDA_SCAN).map(|i| lo * (ratio * i as f64).exp()).collect();
    let mut gs = Vec::with_capacity(LAMBDA_SCAN);
    for &l in &ls {
        let v = g(l);
        if stop_at_negative && v < 0.0 {
            return ModeVerdict {
                stability: Stability::Unstable,
                min_matching: v,
                argmin_lambda: l,
            };
        }
        gs.push(v);
    }
    let best = (0..LAMBDA_SCAN)
        .min_by(|&a, &b| gs[a].total_cmp(&gs[b]))
        .unwrap_or(0);
    let a = ls[best.saturating_sub(1)];
    let b = ls[(best + 1).min(LAMBDA_SCAN - 1)];
    let (argmin, min) = golden_min(&g, a, b, ls[best], gs[best]);
    ModeVerdict {
        stability: if min < 0.0 {
            Stability::Unstable
        } else {
            Stability::Stable
        },
        min_matching: min,
        argmin_lambda: argmin,
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, x0: f64, f0: f64) -> (f64, f64) {
    let r = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut best_x, mut best_f) = (x0, f0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a) <= 1e-7 * b {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        for (x, fx) in [(c, fc), (d, fd)] {
            if fx < best_f {
                best_x = x;
                best_f = fx;
            }
        }
    }
    (best_x, best_f)
}

/// Critical amplitude for the `k > 0` mode in the one-dimensional reduction,
/// plus the verdict at the problem's amplitude.
pub fn stability_threshold_k(
    problem: &LangmuirProblem,
    k: f64,
    opts: &BoundStateOptions,
) -> Result<ThresholdResult, LangmuirError> {
    let (half_width, _) = threshold_setup(problem, k, opts)?;
    let m = problem.plasma_mass;
    let unit = problem.correlation.with_amplitude(1.0);
    let grid = WellGrid::new(&unit, half_width, opts.grid_points)?;
    let verdict = verdict_on_grid(&grid, m, k, problem.correlation.amplitude);

    let unstable = |c: f64| scan_matching(&grid, m, k, c, true).stability == Stability::Unstable;
    let mut lo = 0.0;
    let mut hi = if problem.correlation.amplitude > 0.0 {
        problem.correlation.amplitude
    } else {
        1.0
    };
    let mut grow = 0;
    while !unstable(hi) {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            let g_hi = verdict_on_grid(&grid, m, k, hi).min_matching;
            return Err(LangmuirError::BracketNotFound {
                lo: 0.0,
                g_lo: f64::NAN,
                hi,
                g_hi,
            });
        }
    }
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        if unstable(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // The verdict must not depend on the grid.
    let fine = WellGrid::new(&unit, half_width, 2 * opts.grid_points)?;
    let l = verdict.argmin_lambda;
    let s = 1.0 + (k / l) * (k / l);
    let amp = problem.correlation.amplitude;
    let change = (fine.with_amplitude(amp).lowest(l, s) - grid.with_amplitude(amp).lowest(l, s)).abs();
    if change > opts.convergence_tol {
        return Err(LangmuirError::GridTooCoarse {
            change,
            grid_points: opts.grid_points,
        });
    }

    Ok(ThresholdResult {
        verdict,
        critical_amplitude: 0.5 * (lo + hi),
        half_width,
        grid_points: opts.grid_points,
    })
}
