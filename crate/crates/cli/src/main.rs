use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stochstab::config::{
    LangmuirConfig, MomentsConfig, ProfileConfig, ProfileName, RunConfig, SimulateConfig,
    WellConfig,
};
use stochstab::grid::{apply_grid, Axis, GridAxis};
use stochstab::{execute, read_system_spec, CliError, RunManifest};
use stochstab_core::moments::DEFAULT_MAX_BASIS;
use stochstab_core::sde::DEFAULT_SAMPLE_COUNT;

/// Moment stability of linear SDEs with multiplicative noise, and the
/// Langmuir-wave destabilization problems.
///
/// Exit codes: 0 success, 2 input error, 3 capacity, 4 numeric overflow,
/// 5 solver failure.
#[derive(Parser)]
#[command(name = "stochstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the degree-m moment operator and report its spectrum.
    Moments(MomentsArgs),
    /// Monte Carlo moments with the Euler-Maruyama scheme.
    Simulate(SimulateArgs),
    /// Langmuir-wave problems in scaled units.
    Langmuir {
        #[command(subcommand)]
        command: LangmuirCommand,
    },
    /// Re-run a recorded manifest.
    Rerun(RerunArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Output directory; created if missing.
    #[arg(long, default_value = "stochstab-out")]
    out: PathBuf,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    degree: usize,
    /// Largest moment basis allowed before failing with exit code 3.
    #[arg(long, default_value_t = DEFAULT_MAX_BASIS)]
    max_basis: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Moment orders p of E|x|^p; repeat or separate with commas.
    #[arg(long = "degree", value_delimiter = ',', default_values_t = [2u32])]
    degrees: Vec<u32>,
    #[arg(long, default_value_t = 10_000)]
    paths: u64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 5.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial state, comma separated; all ones by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
    samples: usize,
    /// Trailing fraction of the run used for the rate fit.
    #[arg(long, default_value_t = 0.5)]
    window: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_BASIS)]
    max_basis: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Gaussian,
    Exponential,
    Rectangular,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    profile: Profile,
    /// Correlation amplitude c = C(0).
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Correlation width d.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    /// Dirichlet walls at +-L; chosen from the width and mass by default.
    #[arg(long)]
    half_width: Option<f64>,
    /// Interior grid points.
    #[arg(long, default_value_t = 4096)]
    points: usize,
}

impl ProfileArgs {
    fn config(&self) -> (ProfileConfig, WellConfig) {
        let kind = match self.profile {
            Profile::Gaussian => ProfileName::Gaussian,
            Profile::Exponential => ProfileName::Exponential,
            Profile::Rectangular => ProfileName::Rectangular,
        };
        (
            ProfileConfig {
                kind,
                amplitude: self.amplitude,
                width: self.width,
            },
            WellConfig {
                half_width: self.half_width,
                grid_points: self.points,
            },
        )
    }
}

#[derive(Subcommand)]
enum LangmuirCommand {
    /// Roots of the constant-correlation dispersion quartic.
    Dispersion {
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value = "0")]
        k: Axis,
        /// Second wavenumber of the mode pair; equal to k by default.
        #[arg(long)]
        k2: Option<f64>,
        #[arg(long, default_value = "0")]
        sigma2: Axis,
        /// Grid axes, e.g. `k=0:2:21 sigma2=0:1:11`.
        #[arg(long, num_args = 1..)]
        grid: Vec<GridAxis>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Growth and threshold for delta-correlated noise in 1D.
    Whitenoise {
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, default_value = "1")]
        k: Axis,
        #[arg(long, default_value = "0")]
        sigma2: Axis,
        /// Evaluate each k exactly at the threshold sigma2.
        #[arg(long)]
        at_threshold: bool,
        #[arg(long, num_args = 1..)]
        grid: Vec<GridAxis>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Growth rate of the k = 0 mode from the bound-state criterion.
    Boundstate {
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[command(flatten)]
        profile: ProfileArgs,
        /// Growth rates to tabulate, as start:stop:count.
        #[arg(long)]
        lambda: Option<Axis>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Critical correlation amplitude for k > 0 modes.
    Threshold {
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value = "1")]
        k: Axis,
        #[arg(long, num_args = 1..)]
        grid: Vec<GridAxis>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check the 4x4 matrix form of the dispersion relation.
    Appendix {
        #[arg(long, default_value = "1")]
        eps1: Axis,
        #[arg(long, default_value = "1")]
        eps2: Axis,
        #[arg(long, default_value = "0")]
        sigma2: Axis,
        #[arg(long, num_args = 1..)]
        grid: Vec<GridAxis>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct RerunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory; defaults to `rerun` next to the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    let (config, out) = resolve(command)?;
    let exec = execute(&config, &out)?;
    print!("{}", exec.summary);
    println!("wrote {} and manifest.json to {}", exec.manifest.outputs.join(", "), out.display());
    match exec.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn grid(grid: &[GridAxis], axes: &mut [(&str, &mut Axis)]) -> Result<(), CliError> {
    apply_grid(grid, axes).map_err(CliError::Input)
}

fn resolve(command: Command) -> Result<(RunConfig, PathBuf), CliError> {
    Ok(match command {
        Command::Moments(a) => {
            let (spec, _) = read_system_spec(&a.spec)?;
            let cfg = MomentsConfig {
                system: spec,
                degree: a.degree,
                max_basis: a.max_basis,
            };
            (RunConfig::Moments(cfg), a.out.out)
        }
        Command::Simulate(a) => {
            let (spec, sys) = read_system_spec(&a.spec)?;
            let mut degrees = a.degrees;
            degrees.sort_unstable();
            degrees.dedup();
            let cfg = SimulateConfig {
                initial_state: a.x0.unwrap_or_else(|| vec![1.0; sys.dim]),
                system: spec,
                degrees,
                dt: a.dt,
                horizon: a.horizon,
                paths: a.paths,
                seed: a.seed,
                sample_count: a.samples,
                fit_window: a.window,
                max_basis: a.max_basis,
            };
            (RunConfig::Simulate(cfg), a.out.out)
        }
        Command::Langmuir { command } => {
            let (cfg, out) = resolve_langmuir(command)?;
            (RunConfig::Langmuir(cfg), out)
        }
        Command::Rerun(a) => {
            let manifest = RunManifest::read(&a.manifest)?;
            let out = a.out.unwrap_or_else(|| {
                a.manifest.parent().unwrap_or(Path::new(".")).join("rerun")
            });
            (manifest.config, out)
        }
    })
}

fn resolve_langmuir(command: LangmuirCommand) -> Result<(LangmuirConfig, PathBuf), CliError> {
    Ok(match command {
        LangmuirCommand::Dispersion {
            mass,
            mut k,
            k2,
            mut sigma2,
            grid: g,
            out,
        } => {
            grid(&g, &mut [("k", &mut k), ("sigma2", &mut sigma2)])?;
            (LangmuirConfig::Dispersion { mass, k, k2, sigma2 }, out.out)
        }
        LangmuirCommand::Whitenoise {
            mass,
            mut k,
            mut sigma2,
            at_threshold,
            grid: g,
            out,
        } => {
            grid(&g, &mut [("k", &mut k), ("sigma2", &mut sigma2)])?;
            (
                LangmuirConfig::Whitenoise {
                    mass,
                    k,
                    sigma2,
                    at_threshold,
                },
                out.out,
            )
        }
        LangmuirCommand::Boundstate {
            mass,
            profile,
            lambda,
            out,
        } => {
            let (profile, well) = profile.config();
            (
                LangmuirConfig::Boundstate {
                    mass,
                    profile,
                    well,
                    lambda,
                },
                out.out,
            )
        }
        LangmuirCommand::Threshold {
            mass,
            profile,
            mut k,
            grid: g,
            out,
        } => {
            grid(&g, &mut [("k", &mut k)])?;
            let (profile, well) = profile.config();
            (
                LangmuirConfig::Threshold {
                    mass,
                    profile,
                    well,
                    k,
                },
                out.out,
            )
        }
        LangmuirCommand::Appendix {
            mut eps1,
            mut eps2,
            mut sigma2,
            grid: g,
            out,
        } => {
            grid(
                &g,
                &mut [("eps1", &mut eps1), ("eps2", &mut eps2), ("sigma2", &mut sigma2)],
            )?;
            (LangmuirConfig::Appendix { eps1, eps2, sigma2 }, out.out)
        }
    })
}
