//! Command-line front end: argument parsing, configuration and the
//! subcommand implementations.

mod commands;
pub mod config;
pub mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_curate, cmd_eval, cmd_gen_traj, cmd_make_dataset, cmd_resample, cmd_synth};
pub use config::Config;

use crate::curation::Check;
use crate::error::{Error, Result};
use crate::motion::MotionKind;

#[derive(Debug, Parser)]
#[command(name = "panotrack", version, about = "Directional point-track datasets from 360° video")]
pub struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true, env = "PANO_TRACK_THREADS")]
    pub threads: Option<usize>,

    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run quality checks on an equirectangular clip directory.
    Curate(CurateArgs),
    /// Generate a camera trajectory file.
    GenTraj(GenTrajArgs),
    /// Render perspective frames of a clip along a trajectory.
    Resample(ResampleArgs),
    /// Build dataset samples from a clip and its tracks or from a synthetic scene.
    MakeDataset(MakeDatasetArgs),
    /// Score direction predictions against ground truth.
    Eval(EvalArgs),
    /// Render a synthetic scene with analytically known markers.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct CurateArgs {
    /// Directory of equirectangular PNG frames.
    pub clip: PathBuf,
    /// Comma-separated subset of seam, dynamics, poster.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<Check>>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// A motion kind, or `any` to draw one per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionChoice {
    Any,
    Kind(MotionKind),
}

impl std::str::FromStr for MotionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "any" {
            Ok(MotionChoice::Any)
        } else {
            s.parse().map(MotionChoice::Kind)
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MotionArgs {
    /// static, spiral, random, human, spin_x, spin_y, spin_z or any.
    #[arg(long)]
    pub motion: Option<MotionChoice>,
    /// Mirror a window around the midpoint back to front.
    #[arg(long)]
    pub btf: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Spin noise ratio.
    #[arg(long)]
    pub spin_noise: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta_max: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CameraArgs {
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Horizontal field of view in degrees.
    #[arg(long)]
    pub fov: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenTrajArgs {
    #[command(flatten)]
    pub motion: MotionArgs,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    /// Directory of equirectangular PNG frames.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write equirectangular frames with everything outside the view greyed out.
    #[arg(long)]
    pub viz_equirect: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MakeDatasetArgs {
    /// Directory of equirectangular PNG frames.
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    pub source: Option<PathBuf>,
    /// 2D track file for the source clip.
    #[arg(long, requires = "source", conflicts_with = "masks")]
    pub tracks: Option<PathBuf>,
    /// Directory of per-frame instance mask PNGs for the source clip.
    #[arg(long, requires = "source")]
    pub masks: Option<PathBuf>,
    /// Synthetic scene spec (JSON) to render and use as the source.
    #[arg(long)]
    pub synth: Option<PathBuf>,
    #[command(flatten)]
    pub motion: MotionArgs,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub queries: Option<usize>,
    #[arg(long)]
    pub l_thresh: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Write trajectories and tracks only.
    #[arg(long)]
    pub no_frames: bool,
    #[arg(long)]
    pub category: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Prediction file (one set or an array) or directory.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth file or dataset directory.
    #[arg(long)]
    pub gt: PathBuf,
    /// Write the full JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// What a successful command reports through its exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    CheckFailed,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let cfg = Config::load(cli.config.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| commands::dispatch(cli.command, cfg))
}

/// Entry point of the binary: 0 on success, 1 when a check fails, 2 on
/// usage or input errors.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
