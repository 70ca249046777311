//! `rtmbe`: simulate CSTR trajectories and filter them with the UKF.
//!
//! Exit codes: 0 success, 1 usage, 2 file or format error, 3 data-length
//! mismatch, 4 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use rtmbe::dynamics::ModelParameters;
use rtmbe::estimator::{build_cstr_filter, CstrFilterConfig, SetupError};
use rtmbe::simulate::{simulate, write_simulation, SimulationConfig};
use rtmbe::trajectory::{read_trajectories, TrajectoryError, INPUT_FILE, MEASUREMENT_FILE};
use rtmbe::ukf::FilterError;

#[derive(Parser, Debug)]
#[command(name = "rtmbe", version, about = "CSTR state estimation with an unscented Kalman filter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the reactor and write data_u.bin, data_y.bin and data_x.bin.
    Simulate {
        /// Number of samples.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Sample time in hours.
        #[arg(long, default_value_t = rtmbe::estimator::DEFAULT_SAMPLE_TIME)]
        ts: f64,
        #[arg(long, default_value_t = rtmbe::estimator::DEFAULT_SUBSTEPS)]
        substeps: usize,
        /// Multiplier on the default sensor noise levels.
        #[arg(long, default_value_t = 1.0)]
        noise_scale: f64,
        /// Model parameter file (`name = value` lines).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Filter a trajectory and print its log-likelihood.
    Filter {
        #[arg(long, default_value = INPUT_FILE)]
        u: PathBuf,
        #[arg(long, default_value = MEASUREMENT_FILE)]
        y: PathBuf,
        #[arg(long, default_value_t = rtmbe::estimator::DEFAULT_SAMPLE_TIME)]
        ts: f64,
        #[arg(long, default_value_t = rtmbe::estimator::DEFAULT_SUBSTEPS)]
        substeps: usize,
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<TrajectoryError> for Failure {
    fn from(e: TrajectoryError) -> Self {
        let code = match e {
            TrajectoryError::LengthMismatch { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<FilterError> for Failure {
    fn from(e: FilterError) -> Self {
        let code = match e {
            FilterError::LengthMismatch { .. } => 3,
            FilterError::InvalidConfig(_) => 1,
            _ => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SetupError> for Failure {
    fn from(e: SetupError) -> Self {
        match e {
            SetupError::Filter(f) => f.into(),
            SetupError::Discretize(d) => Failure::usage(d.to_string()),
        }
    }
}

fn load_params(path: Option<&PathBuf>) -> Result<ModelParameters, Failure> {
    match path {
        None => Ok(rtmbe::cstr_default_parameters()),
        Some(p) => ModelParameters::load(p).map_err(|e| Failure {
            code: 2,
            message: format!("{}: {e}", p.display()),
        }),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            n,
            seed,
            ts,
            substeps,
            noise_scale,
            params,
            out_dir,
        } => {
            if !(noise_scale.is_finite() && noise_scale >= 0.0) {
                return Err(Failure::usage("--noise-scale must be non-negative"));
            }
            let mut cfg = SimulationConfig::new(n, seed);
            cfg.sample_time = ts;
            cfg.substeps = substeps;
            cfg.params = load_params(params.as_ref())?;
            cfg.measurement_std = cfg.measurement_std.map(|s| s * noise_scale);
            let data = simulate(&cfg).map_err(|e| Failure::usage(e.to_string()))?;
            write_simulation(&data, &out_dir)?;
            Ok(())
        }
        Command::Filter {
            u,
            y,
            ts,
            substeps,
            params,
        } => {
            let cfg = CstrFilterConfig {
                params: load_params(params.as_ref())?,
                sample_time: ts,
                substeps,
                ..CstrFilterConfig::default()
            };
            let mut kf = build_cstr_filter(&cfg)?;
            let (us, ys) = read_trajectories(&u, &y)?;
            println!("Data length {}", ys.len());
            let sol = kf.forward_trajectory(&us, &ys)?;
            if !sol.ll.is_finite() {
                return Err(Failure {
                    code: 4,
                    message: format!("non-finite log-likelihood {}", sol.ll),
                });
            }
            println!("loglik = {}", sol.ll);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("usage error");
            eprintln!("rtmbe: {}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rtmbe: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
