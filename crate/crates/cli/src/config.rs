//! Fully resolved run configurations, as stored in manifests.

use serde::{Deserialize, Serialize};
use stochstab_core::langmuir::{CorrelationProfile, ProfileKind};

use crate::grid::Axis;
use crate::spec::SystemSpec;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RunConfig {
    Moments(MomentsConfig),
    Simulate(SimulateConfig),
    Langmuir(LangmuirConfig),
}

impl RunConfig {
    pub fn command_name(&self) -> String {
        match self {
            RunConfig::Moments(_) => "moments".into(),
            RunConfig::Simulate(_) => "simulate".into(),
            RunConfig::Langmuir(l) => format!("langmuir {}", l.subcommand()),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        match self {
            RunConfig::Simulate(s) => vec![s.seed],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub system: SystemSpec,
    pub degree: usize,
    pub max_basis: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub system: SystemSpec,
    /// Sorted, without duplicates.
    pub degrees: Vec<u32>,
    pub initial_state: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub paths: u64,
    pub seed: u64,
    pub sample_count: usize,
    /// Trailing fraction of the trace used for rate fits.
    pub fit_window: f64,
    /// Largest moment basis built for the operator comparison.
    pub max_basis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Gaussian,
    Exponential,
    Rectangular,
}

impl ProfileName {
    pub fn kind(self) -> ProfileKind {
        match self {
            ProfileName::Gaussian => ProfileKind::Gaussian,
            ProfileName::Exponential => ProfileKind::Exponential,
            ProfileName::Rectangular => ProfileKind::Rectangular,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProfileName::Gaussian => "gaussian",
            ProfileName::Exponential => "exponential",
            ProfileName::Rectangular => "rectangular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub kind: ProfileName,
    pub amplitude: f64,
    pub width: f64,
}

impl ProfileConfig {
    pub fn build(&self) -> Result<CorrelationProfile, CliError> {
        Ok(CorrelationProfile::new(self.kind.kind(), self.amplitude, self.width)?)
    }

    pub fn describe(&self) -> String {
        let shape = match self.kind {
            ProfileName::Gaussian => "c exp(-(x/d)^2)",
            ProfileName::Exponential => "c exp(-|x|/d)",
            ProfileName::Rectangular => "c on |x| < d",
        };
        format!(
            "{} profile C(x) = {shape}, c = {}, d = {}",
            self.kind.as_str(),
            self.amplitude,
            self.width
        )
    }
}

/// Grid controls shared by the bound-state commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellConfig {
    pub half_width: Option<f64>,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LangmuirConfig {
    Dispersion {
        mass: f64,
        k: Axis,
        /// Second wavenumber; equal to `k` when absent.
        k2: Option<f64>,
        sigma2: Axis,
    },
    Whitenoise {
        mass: f64,
        k: Axis,
        sigma2: Axis,
        /// Evaluate each `k` exactly at its threshold instead of on `sigma2`.
        at_threshold: bool,
    },
    Boundstate {
        mass: f64,
        profile: ProfileConfig,
        well: WellConfig,
        /// Growth rates at which `E_lambda` is tabulated; `None` picks 32
        /// points on `(0, 2 lambda*]`.
        lambda: Option<Axis>,
    },
    Threshold {
        mass: f64,
        profile: ProfileConfig,
        well: WellConfig,
        k: Axis,
    },
    Appendix {
        eps1: Axis,
        eps2: Axis,
        sigma2: Axis,
    },
}

impl LangmuirConfig {
    pub fn subcommand(&self) -> &'static str {
        match self {
            LangmuirConfig::Dispersion { .. } => "dispersion",
            LangmuirConfig::Whitenoise { .. } => "whitenoise",
            LangmuirConfig::Boundstate { .. } => "boundstate",
            LangmuirConfig::Threshold { .. } => "threshold",
            LangmuirConfig::Appendix { .. } => "appendix",
        }
    }
}
