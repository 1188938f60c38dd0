use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::Config;
use super::io::{self, create_dir};
use super::{CameraArgs, Command, MotionArgs, MotionChoice, Outcome};
use crate::curation::{curate_frames, CurationConfig, CurationReport};
use crate::error::{Error, Result};
use crate::formats::{load_direction_sets, read_json, write_json, TrackFile, TrackGrid, TrajectoryFile};
use crate::frame::{EquirectFrame, RgbImage};
use crate::geometry::{Intrinsics, Rotation};
use crate::metrics::{evaluate, render_table, EvalReport, ThresholdConfig};
use crate::motion::{btf_window, build_trajectory, MotionKind, MotionSpec};
use crate::resample::{frustum_on_equirect, grey_outside, render_perspective};
use crate::rng::{KeyedRng, Stream};
use crate::synth::{marker_tracks, render_scene, SceneSpec};
use crate::tracks::{assemble_sample, subsample_indices, PipelineConfig, TrackInput};

pub(super) fn dispatch(command: Command, mut cfg: Config) -> Result<Outcome> {
    match command {
        Command::Curate(a) => {
            if let Some(checks) = a.checks {
                cfg.curation.checks = checks;
            }
            let report = cmd_curate(&a.clip, &cfg.curation)?;
            match &a.report {
                Some(p) => write_json(p, &report)?,
                None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
            }
            if report.verdict {
                eprintln!("curation passed");
                Ok(Outcome::Success)
            } else {
                let names: Vec<&str> = report.failed.iter().map(|c| c.name()).collect();
                eprintln!("curation failed: {}", names.join(", "));
                Ok(Outcome::CheckFailed)
            }
        }
        Command::GenTraj(a) => {
            apply_camera(&mut cfg, &a.camera)?;
            let frames = a.frames.unwrap_or(cfg.pipeline.frames);
            let seed = a.motion.seed.unwrap_or(cfg.seed);
            let choice = motion_choice(&a.motion, &cfg)?;
            let spec = motion_spec(&a.motion, &cfg, pick_kind(choice, seed, 0), seed);
            let file = cmd_gen_traj(&spec, frames, cfg.intrinsics()?)?;
            write_json(&a.out, &file)?;
            Ok(Outcome::Success)
        }
        Command::Resample(a) => {
            let n = cmd_resample(&a.input, &a.trajectory, &a.out, a.viz_equirect.as_deref())?;
            eprintln!("rendered {n} frames");
            Ok(Outcome::Success)
        }
        Command::MakeDataset(a) => {
            apply_camera(&mut cfg, &a.camera)?;
            let seed = a.motion.seed.unwrap_or(cfg.seed);
            let mut pipeline = PipelineConfig::new(cfg.intrinsics()?);
            pipeline.frames = a.frames.unwrap_or(cfg.pipeline.frames);
            pipeline.n_queries = a.queries.unwrap_or(cfg.pipeline.queries);
            pipeline.l_thresh = a.l_thresh.unwrap_or(cfg.pipeline.l_thresh);
            pipeline.render_frames = cfg.pipeline.render_frames && !a.no_frames;
            let source = match (&a.synth, &a.source) {
                (Some(spec), _) => DatasetSource::Synth(spec.clone()),
                (None, Some(dir)) => DatasetSource::Clip {
                    frames: dir.clone(),
                    tracks: a.tracks.clone(),
                    masks: a.masks.clone(),
                },
                (None, None) => return Err(Error::invalid("one of --source or --synth is required")),
            };
            let job = DatasetJob {
                source,
                motion: motion_choice(&a.motion, &cfg)?,
                template: motion_spec(&a.motion, &cfg, MotionKind::Static, seed),
                pipeline,
                category: a.category.clone(),
                count: a.count,
                seed,
                out: a.out.clone(),
            };
            let dirs = cmd_make_dataset(&job)?;
            eprintln!("wrote {} samples to {}", dirs.len(), a.out.display());
            Ok(Outcome::Success)
        }
        Command::Eval(a) => {
            let report = cmd_eval(&a.pred, &a.gt, &cfg.metrics, a.report.as_deref())?;
            print!("{}", render_table(&report));
            Ok(Outcome::Success)
        }
        Command::Synth(a) => {
            cmd_synth(&a.spec, &a.out)?;
            Ok(Outcome::Success)
        }
    }
}

fn apply_camera(cfg: &mut Config, cam: &CameraArgs) -> Result<()> {
    if let Some(w) = cam.width {
        cfg.camera.width = w;
    }
    if let Some(h) = cam.height {
        cfg.camera.height = h;
    }
    if let Some(f) = cam.fov {
        cfg.camera.fov = f;
    }
    cfg.validate()
}

fn motion_choice(args: &MotionArgs, cfg: &Config) -> Result<MotionChoice> {
    args.motion
        .or(cfg.motion.kind.map(MotionChoice::Kind))
        .ok_or_else(|| Error::invalid("--motion is required (or set motion.kind in the config)"))
}

fn pick_kind(choice: MotionChoice, seed: u64, index: u64) -> MotionKind {
    match choice {
        MotionChoice::Kind(k) => k,
        MotionChoice::Any => {
            let n = MotionKind::ALL.len() as i64;
            MotionKind::ALL[KeyedRng::new(seed).integer(Stream::MotionChoice, index, 0, 0, n - 1) as usize]
        }
    }
}

fn motion_spec(args: &MotionArgs, cfg: &Config, kind: MotionKind, seed: u64) -> MotionSpec {
    let m = &cfg.motion;
    MotionSpec {
        kind,
        theta_min: args.theta_min.or(m.theta_min),
        theta_max: args.theta_max.or(m.theta_max),
        spin_noise: args.spin_noise.unwrap_or(m.spin_noise),
        human: m.human,
        btf: args.btf || m.btf,
        seed,
    }
}

/// Runs the configured checks on a clip directory.
pub fn cmd_curate(clip: &Path, cfg: &CurationConfig) -> Result<CurationReport> {
    let frames = io::load_clip(clip)?;
    curate_frames(&frames, cfg)
}

/// Trajectory starting at the identity rotation.
pub fn cmd_gen_traj(spec: &MotionSpec, frames: usize, k: Intrinsics) -> Result<TrajectoryFile> {
    spec.validate()?;
    let traj = build_trajectory(spec, frames, Rotation::IDENTITY, k)?;
    let window = if spec.btf { Some(btf_window(frames, spec.seed)?) } else { None };
    Ok(TrajectoryFile::new(&traj, spec, window))
}

/// Renders one perspective frame per trajectory entry, sampling the clip
/// evenly when it is longer than the trajectory. Returns the frame count.
pub fn cmd_resample(input: &Path, trajectory: &Path, out: &Path, viz: Option<&Path>) -> Result<usize> {
    let frames = io::load_clip(input)?;
    let traj = TrajectoryFile::load(trajectory)?.trajectory()?;
    let idx = subsample_indices(frames.len(), traj.len())?;
    let grid = frames[0].grid;
    if frames.iter().any(|f| f.grid != grid) {
        return Err(Error::invalid(format!("{}: frames differ in size", input.display())));
    }
    let rendered = idx
        .par_iter()
        .zip(traj.rotations().par_iter().zip(traj.intrinsics()))
        .map(|(&f, (r, k))| render_perspective(&frames[f], r, k))
        .collect::<Result<Vec<_>>>()?;
    let images: Vec<&RgbImage> = rendered.iter().map(|f| &f.image).collect();
    io::save_frames(out, &images)?;

    if let Some(viz) = viz {
        let overlays = idx
            .par_iter()
            .zip(traj.rotations().par_iter().zip(traj.intrinsics()))
            .map(|(&f, (r, k))| Ok(grey_outside(&frames[f].image, &frustum_on_equirect(r, k, &grid)?)))
            .collect::<Result<Vec<_>>>()?;
        io::save_frames(viz, &overlays.iter().collect::<Vec<_>>())?;
    }
    Ok(rendered.len())
}

#[derive(Debug, Clone)]
pub enum DatasetSource {
    /// Equirectangular frames plus either imported tracks or instance masks.
    Clip {
        frames: PathBuf,
        tracks: Option<PathBuf>,
        masks: Option<PathBuf>,
    },
    /// A scene spec; every marker contributes its masks as one instance.
    Synth(PathBuf),
}

#[derive(Debug, Clone)]
pub struct DatasetJob {
    pub source: DatasetSource,
    pub motion: MotionChoice,
    /// Motion parameters shared by all samples; kind and seed are replaced
    /// per sample.
    pub template: MotionSpec,
    pub pipeline: PipelineConfig,
    pub category: Option<String>,
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
}

fn load_source(source: &DatasetSource) -> Result<(Vec<EquirectFrame>, Vec<TrackInput>, String, String)> {
    match source {
        DatasetSource::Synth(path) => {
            let spec: SceneSpec = read_json(path)?;
            spec.validate().map_err(|e| Error::parse(path, e.to_string()))?;
            let out = render_scene(&spec)?;
            let inputs = out.masks.into_iter().map(TrackInput::Masks).collect::<Vec<_>>();
            if inputs.is_empty() {
                return Err(Error::parse(path, "scene has no markers"));
            }
            Ok((out.frames, inputs, "synthetic".into(), path.display().to_string()))
        }
        DatasetSource::Clip { frames, tracks, masks } => {
            let clip = io::load_clip(frames)?;
            let input = match (tracks, masks) {
                (Some(t), _) => TrackFile::load(t)?.input()?,
                (None, Some(m)) => TrackInput::Masks(io::load_masks(m)?),
                (None, None) => return Err(Error::invalid("--source needs --tracks or --masks")),
            };
            Ok((clip, vec![input], String::new(), frames.display().to_string()))
        }
    }
}

/// Writes `count` samples to `out/sample_XXXXX/` and returns their paths.
///
/// Each sample holds `frames/`, `trajectory.json` and `tracks.json`.
/// Sample seeds are derived from the job seed, so the output depends only
/// on the inputs and the seed.
pub fn cmd_make_dataset(job: &DatasetJob) -> Result<Vec<PathBuf>> {
    job.template.validate()?;
    let (frames, inputs, category, source) = load_source(&job.source)?;
    create_dir(&job.out)?;
    let keyed = KeyedRng::new(job.seed);
    let mut dirs = Vec::with_capacity(job.count);
    for i in 0..job.count {
        let seed = keyed.derive(i as u64);
        let spec = MotionSpec {
            kind: pick_kind(job.motion, job.seed, i as u64),
            seed,
            ..job.template
        };
        let name = format!("sample_{i:05}");
        let cfg = PipelineConfig {
            clip_id: name.clone(),
            category: job.category.clone().unwrap_or_else(|| category.clone()),
            source: source.clone(),
            seed,
            ..job.pipeline.clone()
        };
        let sample = assemble_sample(&frames, &inputs[i % inputs.len()], &spec, &cfg)
            .map_err(|e| Error::invalid(format!("{name}: {e}")))?;

        let dir = job.out.join(&name);
        create_dir(&dir)?;
        if cfg.render_frames {
            let images: Vec<&RgbImage> = sample.frames.iter().map(|f| &f.image).collect();
            io::save_frames(&dir.join("frames"), &images)?;
        }
        let window = if spec.btf { Some(btf_window(cfg.frames, seed)?) } else { None };
        write_json(&dir.join("trajectory.json"), &TrajectoryFile::new(&sample.trajectory, &spec, window))?;
        let mut tracks = sample.tracks;
        tracks.trajectory_ref = Some("trajectory.json".into());
        write_json(&dir.join("tracks.json"), &tracks)?;
        dirs.push(dir);
    }
    Ok(dirs)
}

/// Evaluates prediction files against ground truth, optionally writing the
/// JSON report.
pub fn cmd_eval(pred: &Path, gt: &Path, cfg: &ThresholdConfig, report: Option<&Path>) -> Result<EvalReport> {
    let pred = load_direction_sets(pred)?;
    let gt = load_direction_sets(gt)?;
    let result = evaluate(&pred, &gt, cfg)?;
    if let Some(path) = report {
        write_json(path, &result)?;
    }
    Ok(result)
}

/// Renders a scene spec to `out/frames/`, `out/masks/marker_XX/`, the
/// marker-centre tracks `out/tracks.json` and a copy of the spec.
pub fn cmd_synth(spec_path: &Path, out: &Path) -> Result<()> {
    let spec: SceneSpec = read_json(spec_path)?;
    spec.validate().map_err(|e| Error::parse(spec_path, e.to_string()))?;
    let rendered = render_scene(&spec)?;
    create_dir(out)?;
    let images: Vec<&RgbImage> = rendered.frames.iter().map(|f| &f.image).collect();
    io::save_frames(&out.join("frames"), &images)?;
    for (i, masks) in rendered.masks.iter().enumerate() {
        io::save_masks(&out.join("masks").join(format!("marker_{i:02}")), masks)?;
    }
    let tracks = TrackFile {
        grid: TrackGrid::Equirect {
            width: spec.grid.width,
            height: spec.grid.height,
        },
        tracks: marker_tracks(&spec, &rendered),
    };
    if !tracks.tracks.is_empty() {
        write_json(&out.join("tracks.json"), &tracks)?;
    }
    write_json(&out.join("scene.json"), &spec)?;
    Ok(())
}
