//! Euler–Maruyama ensembles for linear Itô systems and moment growth fits.
//!
//! Every path draws its Gaussian increments from its own ChaCha stream keyed
//! by `(seed, path)`, so paths can run in any order. Ensemble sums are formed
//! per fixed chunk of paths and merged pairwise in a fixed tree, so a parallel
//! driver produces the same bits as [`simulate_ensemble`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{LinearSDESystem, ModelError, Violation};

/// Paths per reduction chunk.
pub const CHUNK_PATHS: u64 = 256;
pub const DEFAULT_SAMPLE_COUNT: usize = 512;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdeError {
    #[error("invalid ensemble configuration: {}", join(.0))]
    InvalidConfig(Vec<Violation>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-finite state at t = {time}; trace truncated")]
    Overflow { time: f64, partial: MomentTrace },
    #[error("moment is not positive at t = {time}")]
    NonPositiveMoment { time: f64 },
    #[error("{found} samples in the fit window, need at least {required}")]
    InsufficientSamples { found: usize, required: usize },
    #[error("quantity is not tracked by this trace")]
    UnknownQuantity,
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join("; ")
}

/// A tracked ensemble average.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    /// `E[|x|^p]` with the Euclidean norm.
    NormPower(u32),
    /// `E[x_{k1} x_{k2} ...]`; a single index gives a mean component.
    Monomial(Vec<usize>),
}

impl Quantity {
    pub fn degree(&self) -> u32 {
        match self {
            Quantity::NormPower(p) => *p,
            Quantity::Monomial(k) => k.len() as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub system: LinearSDESystem,
    pub initial_state: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub paths: u64,
    pub seed: u64,
    pub moment_degrees: Vec<u32>,
    pub monomials: Vec<Vec<usize>>,
    pub sample_count: usize,
}

impl EnsembleConfig {
    /// Tracks `E[|x|^2]` on the default sample grid.
    pub fn new(
        system: LinearSDESystem,
        initial_state: Vec<f64>,
        dt: f64,
        horizon: f64,
        paths: u64,
        seed: u64,
    ) -> Self {
        Self {
            system,
            initial_state,
            dt,
            horizon,
            paths,
            seed,
            moment_degrees: vec![2],
            monomials: Vec::new(),
            sample_count: DEFAULT_SAMPLE_COUNT,
        }
    }

    pub fn with_degrees(mut self, degrees: Vec<u32>) -> Self {
        self.moment_degrees = degrees;
        self
    }

    pub fn with_monomials(mut self, monomials: Vec<Vec<usize>>) -> Self {
        self.monomials = monomials;
        self
    }

    /// Adds every first-order monomial, i.e. the mean vector.
    pub fn with_mean(mut self) -> Self {
        for i in 0..self.system.dim {
            self.monomials.push(vec![i]);
        }
        self
    }

    pub fn quantities(&self) -> Vec<Quantity> {
        self.moment_degrees
            .iter()
            .map(|&p| Quantity::NormPower(p))
            .chain(self.monomials.iter().cloned().map(Quantity::Monomial))
            .collect()
    }

    pub fn step_count(&self) -> u64 {
        let n = (self.horizon / self.dt).round();
        if n < 1.0 {
            1
        } else {
            n as u64
        }
    }

    pub fn validate(&self) -> Result<(), SdeError> {
        self.system.check()?;
        let mut v = Vec::new();
        let mut push = |field: &str, message: String| {
            v.push(Violation {
                field: field.into(),
                message,
            })
        };
        if self.initial_state.len() != self.system.dim {
            push(
                "initial_state",
                format!("length {} but dim is {}", self.initial_state.len(), self.system.dim),
            );
        }
        if self.initial_state.iter().any(|x| !x.is_finite()) {
            push("initial_state", "entries must be finite".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            push("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            push("horizon", format!("must be positive, got {}", self.horizon));
        } else if !(self.dt < self.horizon) {
            push("dt", "must be smaller than horizon".into());
        }
        if self.paths < 2 {
            push("paths", "need at least 2 paths".into());
        }
        if self.moment_degrees.iter().any(|&p| p == 0) {
            push("moment_degrees", "degrees must be positive".into());
        }
        for m in &self.monomials {
            if m.is_empty() || m.iter().any(|&i| i >= self.system.dim) {
                push("monomials", format!("bad index tuple {m:?}"));
            }
        }
        if self.moment_degrees.is_empty() && self.monomials.is_empty() {
            push("moment_degrees", "nothing to track".into());
        }
        if self.sample_count < 2 {
            push("sample_count", "need at least 2 sample times".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(SdeError::InvalidConfig(v))
        }
    }

    /// Soft diagnostics that do not stop a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let a = self.dt * self.system.drift.norm();
        if a >= 0.5 {
            w.push(format!(
                "dt * |drift| = {a:.3} >= 0.5; the explicit scheme may be inaccurate"
            ));
        }
        w
    }
}

/// Ensemble estimates on the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrace {
    pub times: Vec<f64>,
    pub quantities: Vec<Quantity>,
    /// `values[q][s]` estimates quantity `q` at `times[s]`.
    pub values: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub paths: u64,
    /// Set when the trace was truncated at the first non-finite sample.
    pub overflow: bool,
}

impl MomentTrace {
    pub fn position(&self, q: &Quantity) -> Option<usize> {
        self.quantities.iter().position(|x| x == q)
    }

    pub fn series(&self, q: &Quantity) -> Option<(&[f64], &[f64])> {
        self.position(q)
            .map(|i| (self.values[i].as_slice(), self.stderr[i].as_slice()))
    }
}

/// Running sum `sum * exp(log_scale)` that tolerates terms far beyond the
/// f64 range.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogSum {
    log_scale: f64,
    sum: f64,
}

impl LogSum {
    const EMPTY: Self = Self {
        log_scale: f64::NEG_INFINITY,
        sum: 0.0,
    };

    fn add(&mut self, sign: f64, ln_abs: f64) {
        if ln_abs == f64::NEG_INFINITY {
            return;
        }
        if ln_abs > self.log_scale {
            self.sum *= (self.log_scale - ln_abs).exp();
            self.log_scale = ln_abs;
        }
        self.sum += sign * (ln_abs - self.log_scale).exp();
    }

    fn merge(&mut self, other: &Self) {
        if other.log_scale == f64::NEG_INFINITY {
            return;
        }
        if other.log_scale > self.log_scale {
            self.sum *= (self.log_scale - other.log_scale).exp();
            self.log_scale = other.log_scale;
        }
        self.sum += other.sum * (other.log_scale - self.log_scale).exp();
    }
}

/// Partial sums over one chunk of paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkSums {
    paths: u64,
    /// First sample index at which some path was non-finite.
    first_bad_sample: usize,
    /// `[q * samples + s]`: sum of y and of y^2.
    first: Vec<LogSum>,
    second: Vec<LogSum>,
}

impl ChunkSums {
    fn merge(mut self, other: &Self) -> Self {
        self.paths += other.paths;
        self.first_bad_sample = self.first_bad_sample.min(other.first_bad_sample);
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            a.merge(b);
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            a.merge(b);
        }
        self
    }
}

/// A validated ensemble split into independently runnable chunks.
#[derive(Debug, Clone)]
pub struct EnsemblePlan {
    dim: usize,
    noise_count: usize,
    drift: Vec<f64>,
    noise: Vec<f64>,
    x0: Vec<f64>,
    dt: f64,
    sqrt_dt: f64,
    seed: u64,
    paths: u64,
    sample_steps: Vec<u64>,
    quantities: Vec<Quantity>,
}

impl EnsemblePlan {
    pub fn new(cfg: &EnsembleConfig) -> Result<Self, SdeError> {
        cfg.validate()?;
        let n = cfg.system.dim;
        let mut drift = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                drift.push(cfg.system.drift[(i, j)]);
            }
        }
        let mut noise = Vec::with_capacity(cfg.system.noise_count * n * n);
        for rho in &cfg.system.noise {
            for i in 0..n {
                for j in 0..n {
                    noise.push(rho[(i, j)]);
                }
            }
        }
        let steps = cfg.step_count();
        let last = cfg.sample_count as u64 - 1;
        let mut sample_steps: Vec<u64> = (0..=last)
            .map(|j| ((j as u128 * steps as u128 + last as u128 / 2) / last as u128) as u64)
            .collect();
        sample_steps.dedup();
        Ok(Self {
            dim: n,
            noise_count: cfg.system.noise_count,
            drift,
            noise,
            x0: cfg.initial_state.clone(),
            dt: cfg.dt,
            sqrt_dt: cfg.dt.sqrt(),
            seed: cfg.seed,
            paths: cfg.paths,
            sample_steps,
            quantities: cfg.quantities(),
        })
    }

    pub fn chunk_count(&self) -> usize {
        self.paths.div_ceil(CHUNK_PATHS) as usize
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.sample_steps.iter().map(|&s| s as f64 * self.dt).collect()
    }

    /// Simulates the paths of chunk `index`.
    pub fn run_chunk(&self, index: usize) -> ChunkSums {
        let start = index as u64 * CHUNK_PATHS;
        let end = (start + CHUNK_PATHS).min(self.paths);
        let ns = self.sample_steps.len();
        let nq = self.quantities.len();
        let mut sums = ChunkSums {
            paths: end - start,
            first_bad_sample: usize::MAX,
            first: vec![LogSum::EMPTY; nq * ns],
            second: vec![LogSum::EMPTY; nq * ns],
        };
        let n = self.dim;
        let mut x = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut dw = vec![0.0; self.noise_count];
        let mut ln_abs = vec![0.0; n];
        let mut sign = vec![0.0; n];
        for path in start..end {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(path);
            x.copy_from_slice(&self.x0);
            let mut step = 0u64;
            for (s, &target) in self.sample_steps.iter().enumerate() {
                while step < target {
                    for w in dw.iter_mut() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *w = z * self.sqrt_dt;
                    }
                    for i in 0..n {
                        let row = &self.drift[i * n..(i + 1) * n];
                        let mut acc = 0.0;
                        for j in 0..n {
                            acc += row[j] * x[j];
                        }
                        let mut v = x[i] + acc * self.dt;
                        for (a, w) in dw.iter().enumerate() {
                            let row = &self.noise[(a * n + i) * n..(a * n + i + 1) * n];
                            let mut acc = 0.0;
                            for j in 0..n {
                                acc += row[j] * x[j];
                            }
                            v += acc * w;
                        }
                        next[i] = v;
                    }
                    core::mem::swap(&mut x, &mut next);
                    step += 1;
                }
                if s >= sums.first_bad_sample {
                    break;
                }
                if x.iter().any(|v| !v.is_finite()) {
                    sums.first_bad_sample = s;
                    break;
                }
                for i in 0..n {
                    ln_abs[i] = x[i].abs().ln();
                    sign[i] = if x[i] < 0.0 { -1.0 } else { 1.0 };
                }
                let ln_norm = {
                    let big = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if big == 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        let ss: f64 = x.iter().map(|v| (v / big) * (v / big)).sum();
                        big.ln() + 0.5 * ss.ln()
                    }
                };
                for (q, quantity) in self.quantities.iter().enumerate() {
                    let (sg, ln) = match quantity {
                        Quantity::NormPower(p) => (1.0, *p as f64 * ln_norm),
                        Quantity::Monomial(idx) => idx
                            .iter()
                            .fold((1.0, 0.0), |(sg, ln), &k| (sg * sign[k], ln + ln_abs[k])),
                    };
                    sums.first[q * ns + s].add(sg, ln);
                    sums.second[q * ns + s].add(1.0, 2.0 * ln);
                }
            }
        }
        sums
    }

    /// Merges chunk sums (given in chunk order) and forms the trace.
    pub fn finish(&self, chunks: Vec<ChunkSums>) -> Result<MomentTrace, SdeError> {
        let merged = tree_merge(chunks).expect("at least one chunk");
        let ns = self.sample_steps.len();
        let nq = self.quantities.len();
        let times = self.sample_times();
        let mut keep = merged.first_bad_sample.min(ns);
        let n = merged.paths as f64;

        let mut values = vec![Vec::with_capacity(keep); nq];
        let mut stderr = vec![Vec::with_capacity(keep); nq];
        'samples: for s in 0..keep {
            let mut row_v = Vec::with_capacity(nq);
            let mut row_e = Vec::with_capacity(nq);
            for q in 0..nq {
                let (m, e) = mean_and_stderr(&merged.first[q * ns + s], &merged.second[q * ns + s], n);
                if !m.is_finite() {
                    keep = s;
                    break 'samples;
                }
                row_v.push(m);
                row_e.push(e);
            }
            for q in 0..nq {
                values[q].push(row_v[q]);
                stderr[q].push(row_e[q]);
            }
        }
        let overflow = keep < ns;
        let trace = MomentTrace {
            times: times[..keep].to_vec(),
            quantities: self.quantities.clone(),
            values,
            stderr,
            paths: merged.paths,
            overflow,
        };
        if overflow {
            Err(SdeError::Overflow {
                time: times[keep],
                partial: trace,
            })
        } else {
            Ok(trace)
        }
    }
}

fn mean_and_stderr(first: &LogSum, second: &LogSum, n: f64) -> (f64, f64) {
    if first.log_scale == f64::NEG_INFINITY {
        return (0.0, 0.0);
    }
    // Squares are accumulated with exactly twice the log scale of the values.
    let l = first.log_scale;
    let m = first.sum / n;
    let m2 = second.sum * (second.log_scale - 2.0 * l).exp() / n;
    let var = ((m2 - m * m) * n / (n - 1.0)).max(0.0);
    let scale = l.exp();
    (m * scale, (var / n).sqrt() * scale)
}

fn tree_merge(mut level: Vec<ChunkSums>) -> Option<ChunkSums> {
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(&b),
                None => a,
            });
        }
        level = next;
    }
    level.pop()
}

/// Runs the whole ensemble on the current thread.
pub fn simulate_ensemble(cfg: &EnsembleConfig) -> Result<MomentTrace, SdeError> {
    let plan = EnsemblePlan::new(cfg)?;
    let chunks = (0..plan.chunk_count()).map(|c| plan.run_chunk(c)).collect();
    plan.finish(chunks)
}

/// Exponential rate of a tracked quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub rate: f64,
    pub stderr: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares slope of `ln E` against `t` over the trailing `window`
/// fraction of the trace.
pub fn fit_growth_rate(
    trace: &MomentTrace,
    quantity: &Quantity,
    window: f64,
) -> Result<GrowthFit, SdeError> {
    let (values, _) = trace.series(quantity).ok_or(SdeError::UnknownQuantity)?;
    fit_exponential(&trace.times, values, window)
}

pub fn fit_exponential(times: &[f64], values: &[f64], window: f64) -> Result<GrowthFit, SdeError> {
    let (Some(&t0), Some(&t1)) = (times.first(), times.last()) else {
        return Err(SdeError::InsufficientSamples {
            found: 0,
            required: MIN_FIT_SAMPLES,
        });
    };
    let cut = t1 - window.clamp(0.0, 1.0) * (t1 - t0);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= cut)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(SdeError::InsufficientSamples {
            found: pts.len(),
            required: MIN_FIT_SAMPLES,
        });
    }
    if let Some(&(t, _)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(SdeError::NonPositiveMoment { time: t });
    }
    let k = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / k;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, v) in &pts {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (v.ln() - ym);
    }
    let rate = sxy / sxx;
    let ssr: f64 = pts
        .iter()
        .map(|&(t, v)| {
            let r = v.ln() - ym - rate * (t - tm);
            r * r
        })
        .sum();
    Ok(GrowthFit {
        rate,
        stderr: (ssr / (k - 2.0) / sxx).sqrt(),
        samples: pts.len(),
    })
}
