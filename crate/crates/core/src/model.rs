//! Linear SDE data model: drift matrix, multiplicative noise coefficients and
//! the derived noise correlation tensor.
//!
//! The system is
//!
//! ```text
//! dx^i = [ A^i_j dt + rho^i_{j,a} dw^a ] x^j,   1 <= i, j <= n,  1 <= a <= A
//! ```
//!
//! with independent standard Wiener processes `w^a`, read in the Itô sense.
//! `noise[a]` holds the n×n matrix `rho^i_{j,a}` with row `i` and column `j`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

/// Errors raised by the model layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid system: {}", join_violations(.0))]
    InvalidSystem(Vec<Violation>),
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("non-finite evaluation F({u}, {v})")]
    NonFiniteEvaluation { u: f64, v: f64 },
    #[error("inconsistent diagonal noise spec: {0}")]
    InconsistentSpec(String),
}

fn join_violations(v: &[Violation]) -> String {
    let mut out = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(&format!("{x}"));
    }
    out
}

/// One failed invariant, located by the field path it refers to
/// (e.g. `drift[0][1]` or `noise[2]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Linear stochastic system with multiplicative white noise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSDESystem {
    pub dim: usize,
    pub noise_count: usize,
    /// `A^i_j`, row `i`, column `j`.
    pub drift: DMatrix<f64>,
    /// One n×n matrix per Wiener driver; `noise[a][(i, j)] = rho^i_{j,a}`.
    pub noise: Vec<DMatrix<f64>>,
}

impl LinearSDESystem {
    /// Builds a system from its drift and noise matrices, rejecting invalid input.
    pub fn new(drift: DMatrix<f64>, noise: Vec<DMatrix<f64>>) -> Result<Self, ModelError> {
        let sys = Self {
            dim: drift.nrows(),
            noise_count: noise.len(),
            drift,
            noise,
        };
        sys.check()?;
        Ok(sys)
    }

    /// Purely deterministic dynamics `dx = A x dt`.
    pub fn deterministic(drift: DMatrix<f64>) -> Result<Self, ModelError> {
        Self::new(drift, Vec::new())
    }

    /// The scalar model `dx = (-a dt + rho dw) x`.
    pub fn scalar(decay: f64, rho: f64) -> Result<Self, ModelError> {
        Self::new(
            DMatrix::from_element(1, 1, -decay),
            vec![DMatrix::from_element(1, 1, rho)],
        )
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_system(self)
    }

    /// `Ok(())` when [`validate_system`] reports nothing.
    pub fn check(&self) -> Result<(), ModelError> {
        let v = validate_system(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidSystem(v))
        }
    }

    /// Entry `rho^i_{j,a}`.
    #[inline]
    pub fn rho(&self, i: usize, j: usize, a: usize) -> f64 {
        self.noise[a][(i, j)]
    }

    /// Same drift, noise removed.
    pub fn without_noise(&self) -> Self {
        Self {
            dim: self.dim,
            noise_count: 0,
            drift: self.drift.clone(),
            noise: Vec::new(),
        }
    }
}

/// Every invariant violation of `sys`; empty when the system is usable.
pub fn validate_system(sys: &LinearSDESystem) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = sys.dim;
    if n == 0 {
        out.push(Violation::new("dim", "dim must be ≥ 1"));
    }
    if sys.drift.nrows() != n || sys.drift.ncols() != n {
        out.push(Violation::new(
            "drift",
            format!(
                "expected {n}×{n} matrix, found {}×{}",
                sys.drift.nrows(),
                sys.drift.ncols()
            ),
        ));
    } else {
        push_non_finite(&mut out, "drift", &sys.drift);
    }
    if sys.noise.len() != sys.noise_count {
        out.push(Violation::new(
            "noise_count",
            format!(
                "noise_count is {} but {} noise matrices were given",
                sys.noise_count,
                sys.noise.len()
            ),
        ));
    }
    for (a, rho) in sys.noise.iter().enumerate() {
        let field = format!("noise[{a}]");
        if rho.nrows() != n || rho.ncols() != n {
            out.push(Violation::new(
                field,
                format!("expected {n}×{n} matrix, found {}×{}", rho.nrows(), rho.ncols()),
            ));
        } else {
            push_non_finite(&mut out, &field, rho);
        }
    }
    out
}

fn push_non_finite(out: &mut Vec<Violation>, field: &str, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let x = m[(i, j)];
            if !x.is_finite() {
                out.push(Violation::new(
                    format!("{field}[{i}][{j}]"),
                    format!("non-finite value {x}"),
                ));
            }
        }
    }
}

/// Noise correlation tensor `C^{i,m}_{j,n} = sum_a rho^i_{j,a} rho^m_{n,a}`.
///
/// Stored flat as `values[i][j][m][n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl CorrelationTensor {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; dim * dim * dim * dim],
        }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, m: usize, n: usize) -> usize {
        let d = self.dim;
        ((i * d + j) * d + m) * d + n
    }

    /// `C^{i,m}_{j,n}`.
    #[inline]
    pub fn get(&self, i: usize, j: usize, m: usize, n: usize) -> f64 {
        self.values[self.offset(i, j, m, n)]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }

    /// The n²×n² matrix with rows `(i, j)` and columns `(m, n)`.
    ///
    /// This grouping is the Gram matrix of the flattened driver matrices
    /// `rho_{., a}` and is therefore symmetric positive semidefinite.
    pub fn grouped_matrix(&self) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d * d, d * d, |r, c| {
            self.get(r / d, r % d, c / d, c % d)
        })
    }

    /// Action on a product vector: `(C (x ⊗ y))^{i,m} = C^{i,m}_{j,n} x^j y^n`,
    /// returned flat with index `i * dim + m`.
    pub fn apply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for m in 0..d {
                let mut s = 0.0;
                for j in 0..d {
                    for n in 0..d {
                        s += self.get(i, j, m, n) * x[j] * y[n];
                    }
                }
                out[i * d + m] = s;
            }
        }
        out
    }
}

/// Correlation tensor of the noise coefficients of `sys`.
pub fn correlation_from_noise(sys: &LinearSDESystem) -> CorrelationTensor {
    let d = sys.dim;
    let mut c = CorrelationTensor::zeros(d);
    for rho in &sys.noise {
        for i in 0..d {
            for j in 0..d {
                let rij = rho[(i, j)];
                if rij == 0.0 {
                    continue;
                }
                for m in 0..d {
                    for n in 0..d {
                        let k = c.offset(i, j, m, n);
                        c.values[k] += rij * rho[(m, n)];
                    }
                }
            }
        }
    }
    c
}

/// Diagonal noise `rho^i_{j,a} = delta^i_j r^i_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalNoiseSpec {
    pub dim: usize,
    /// n×A, `rates[(i, a)] = r^i_a`.
    pub rates: DMatrix<f64>,
    /// `V2^{i,m} = sum_a r^i_a r^m_a`.
    pub pair_matrix: DMatrix<f64>,
}

impl DiagonalNoiseSpec {
    pub fn from_rates(rates: DMatrix<f64>) -> Self {
        let pair_matrix = &rates * rates.transpose();
        Self {
            dim: rates.nrows(),
            rates,
            pair_matrix,
        }
    }

    /// Checks shapes, finiteness and that `pair_matrix` is the Gram product of
    /// the rate rows (relative tolerance 1e-12).
    pub fn check(&self) -> Result<(), ModelError> {
        let n = self.dim;
        if self.rates.nrows() != n {
            return Err(ModelError::InconsistentSpec(format!(
                "rates has {} rows, dim is {n}",
                self.rates.nrows()
            )));
        }
        if self.pair_matrix.nrows() != n || self.pair_matrix.ncols() != n {
            return Err(ModelError::InconsistentSpec(format!(
                "pair_matrix must be {n}×{n}"
            )));
        }
        if self.rates.iter().chain(self.pair_matrix.iter()).any(|x| !x.is_finite()) {
            return Err(ModelError::InconsistentSpec("non-finite entry".into()));
        }
        let gram = &self.rates * self.rates.transpose();
        let scale = gram.amax().max(1.0);
        for i in 0..n {
            for m in 0..n {
                let diff = (gram[(i, m)] - self.pair_matrix[(i, m)]).abs();
                if diff > 1e-12 * scale {
                    return Err(ModelError::InconsistentSpec(format!(
                        "pair_matrix[{i}][{m}] = {} but the rate rows give {}",
                        self.pair_matrix[(i, m)],
                        gram[(i, m)]
                    )));
                }
            }
        }
        Ok(())
    }

    /// The equivalent full system with the given drift.
    pub fn to_system(&self, drift: DMatrix<f64>) -> Result<LinearSDESystem, ModelError> {
        let n = self.dim;
        let noise = (0..self.rates.ncols())
            .map(|a| DMatrix::from_fn(n, n, |i, j| if i == j { self.rates[(i, a)] } else { 0.0 }))
            .collect();
        LinearSDESystem::new(drift, noise)
    }
}

/// Linearized coefficients of a scalar response `F(u, v)` around `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCoupling {
    /// `dF/du` at the origin.
    pub alpha: f64,
    /// `dF/dv` at the origin.
    pub beta: f64,
    /// Multiplicative coupling `d[F(u, 1) - F(u, 0)]/du` at `u = 0`.
    pub multiplicative_slope: f64,
}

/// Default spacing for [`linearize_noise_coupling`].
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central-difference linearization of `F` around `u = v = 0`.
///
/// The additive term `F(0, v)` is left to the caller.
pub fn linearize_noise_coupling<F>(f: F, step: f64) -> Result<NoiseCoupling, ModelError>
where
    F: Fn(f64, f64) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(ModelError::InvalidStep(step));
    }
    let eval = |u: f64, v: f64| {
        let y = f(u, v);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(ModelError::NonFiniteEvaluation { u, v })
        }
    };
    let h = step;
    let alpha = (eval(h, 0.0)? - eval(-h, 0.0)?) / (2.0 * h);
    let beta = (eval(0.0, h)? - eval(0.0, -h)?) / (2.0 * h);
    let multiplicative_slope = multiplicative_coupling_with(&eval, 1.0, h)?;
    Ok(NoiseCoupling {
        alpha,
        beta,
        multiplicative_slope,
    })
}

/// Multiplicative coupling `d[F(u, v) - F(u, 0)]/du` at `u = 0` for a given
/// noise value `v`.
pub fn multiplicative_coupling<F>(f: F, v: f64, step: f64) -> Result<f64, ModelError>
where
    F: Fn(f64, f64) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(ModelError::InvalidStep(step));
    }
    let eval = |u: f64, w: f64| {
        let y = f(u, w);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(ModelError::NonFiniteEvaluation { u, v: w })
        }
    };
    multiplicative_coupling_with(&eval, v, step)
}

fn multiplicative_coupling_with<E>(eval: &E, v: f64, h: f64) -> Result<f64, ModelError>
where
    E: Fn(f64, f64) -> Result<f64, ModelError>,
{
    let plus = eval(h, v)? - eval(h, 0.0)?;
    let minus = eval(-h, v)? - eval(-h, 0.0)?;
    Ok((plus - minus) / (2.0 * h))
}
