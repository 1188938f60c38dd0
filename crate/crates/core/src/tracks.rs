//! Point tracks: query sampling, 2D-to-direction conversion, the cumulative
//! length filter, retargeting onto new camera trajectories and assembly of
//! complete dataset samples.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::frame::{BinaryMask, EquirectFrame, PerspectiveFrame};
use crate::geometry::{
    direction_to_equirect, equirect_to_direction, pixel_to_direction, rotate_world_to_camera,
    EquirectGrid, Intrinsics, Rotation, UnitDirection, Vec3,
};
use crate::motion::{build_trajectory, mask_centroid, object_centered, MotionSpec, Trajectory};
use crate::resample::{project_mask, render_perspective};
use crate::rng::{KeyedRng, Stream};

/// A 2D track: one continuous pixel position per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTrack2D {
    pub id: u32,
    pub points: Vec<[f64; 2]>,
    /// Carried through from external trackers; not used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<Vec<bool>>,
}

impl PointTrack2D {
    pub fn new(id: u32, points: Vec<[f64; 2]>) -> Self {
        PointTrack2D {
            id,
            points,
            confidence: None,
            visibility: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// First-frame query pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySet {
    /// `(x, y)` pixel positions.
    pub points: Vec<[usize; 2]>,
    pub requested: usize,
}

impl QuerySet {
    /// Queries always refer to the first frame (1-based).
    pub const FRAME_INDEX: usize = 1;

    /// Fewer true pixels were available than requested.
    pub fn is_short(&self) -> bool {
        self.points.len() < self.requested
    }

    /// `(frame, u, v)` triples.
    pub fn triples(&self) -> Vec<(usize, f64, f64)> {
        self.points
            .iter()
            .map(|p| (Self::FRAME_INDEX, p[0] as f64, p[1] as f64))
            .collect()
    }
}

/// Draws `n_q` distinct set pixels uniformly, or all of them when fewer
/// exist.
pub fn sample_queries(mask: &BinaryMask, n_q: usize, seed: u64) -> Result<QuerySet> {
    let pixels = mask.true_pixels();
    if pixels.is_empty() {
        return Err(Error::EmptyMask { frame: 0 });
    }
    let mut rng = KeyedRng::new(seed).at(Stream::Queries, 0, 0);
    let chosen: Vec<usize> = if pixels.len() <= n_q {
        (0..pixels.len()).collect()
    } else {
        index::sample(&mut rng, pixels.len(), n_q).into_vec()
    };
    Ok(QuerySet {
        points: chosen.into_iter().map(|i| [pixels[i].0, pixels[i].1]).collect(),
        requested: n_q,
    })
}

/// Per-frame camera-frame directions of a perspective track.
pub fn track_to_directions(track: &PointTrack2D, k_seq: &[Intrinsics]) -> Result<Vec<UnitDirection>> {
    if track.len() != k_seq.len() {
        return Err(Error::LengthMismatch {
            what: format!("intrinsics for track {}", track.id),
            expected: track.len(),
            got: k_seq.len(),
        });
    }
    track
        .points
        .iter()
        .zip(k_seq)
        .map(|(p, k)| pixel_to_direction(*p, k))
        .collect()
}

/// Sum of Euclidean distances between consecutive points.
pub fn cumulative_length(track: &PointTrack2D) -> Result<f64> {
    if track.len() < 2 {
        return Err(Error::invalid(format!(
            "track {} has {} points; length needs >= 2",
            track.id,
            track.len()
        )));
    }
    Ok(track
        .points
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .sum())
}

/// Keeps tracks whose cumulative length strictly exceeds `l_thresh`, in
/// input order. Tracks too short to have a length are dropped.
pub fn filter_tracks(tracks: &[PointTrack2D], l_thresh: f64) -> Vec<PointTrack2D> {
    tracks
        .iter()
        .filter(|t| cumulative_length(t).is_ok_and(|l| l > l_thresh))
        .cloned()
        .collect()
}

/// Expresses world directions in the cameras of `traj` and flags frames
/// where they project inside the image.
pub fn retarget(world_dirs: &[UnitDirection], traj: &Trajectory) -> Result<(Vec<UnitDirection>, Vec<bool>)> {
    if world_dirs.len() != traj.len() {
        return Err(Error::LengthMismatch {
            what: "retarget trajectory".into(),
            expected: world_dirs.len(),
            got: traj.len(),
        });
    }
    Ok(world_dirs
        .iter()
        .zip(traj.rotations().iter().zip(traj.intrinsics()))
        .map(|(d, (r, k))| {
            let cam = rotate_world_to_camera(*d, r);
            (cam, k.sees(cam))
        })
        .unzip())
}

/// World directions of a track given in equirectangular pixels.
pub fn lift_equirect_track(track: &PointTrack2D, grid: &EquirectGrid) -> Vec<UnitDirection> {
    track
        .points
        .iter()
        .map(|p| equirect_to_direction(p[0], p[1], grid))
        .collect()
}

/// Equirectangular track through `dirs` with `u` unwrapped across the seam,
/// so consecutive points never jump by a full image width.
pub fn equirect_track(id: u32, dirs: &[UnitDirection], grid: &EquirectGrid) -> PointTrack2D {
    let w = grid.width as f64;
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(dirs.len());
    for d in dirs {
        let [mut u, v] = direction_to_equirect(*d, grid);
        if let Some(prev) = points.last() {
            u += ((prev[0] - u) / w).round() * w;
        }
        points.push([u, v]);
    }
    PointTrack2D::new(id, points)
}

/// Evenly spaced indices picking `t` of `len` frames.
pub fn subsample_indices(len: usize, t: usize) -> Result<Vec<usize>> {
    if t < 2 || len < t {
        return Err(Error::invalid(format!("cannot take {t} frames from a {len}-frame clip")));
    }
    Ok((0..t)
        .map(|i| ((i * (len - 1)) as f64 / (t - 1) as f64).round() as usize)
        .collect())
}

/// One ground-truth (or predicted) direction track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionTrack {
    pub id: u32,
    /// Query pixel in the first frame.
    pub query: [f64; 2],
    pub directions: Vec<UnitDirection>,
    #[serde(default)]
    pub in_frame: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrackMeta {
    #[serde(default)]
    pub motion_kind: String,
    #[serde(default)]
    pub category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntrinsicsSpec {
    Single(Intrinsics),
    PerFrame(Vec<Intrinsics>),
}

/// Per-clip direction tracks; the ground-truth and prediction file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionTrackSet {
    pub clip_id: String,
    pub frames: usize,
    #[serde(default)]
    pub width: usize,
    #[serde(default)]
    pub height: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intrinsics: Option<IntrinsicsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_ref: Option<String>,
    pub tracks: Vec<DirectionTrack>,
    #[serde(default)]
    pub meta: TrackMeta,
}

impl DirectionTrackSet {
    /// Checks per-track lengths; `require_flags` also demands in-frame flags
    /// (ground truth must carry them, predictions need not).
    pub fn validate(&self, require_flags: bool) -> Result<()> {
        for t in &self.tracks {
            if t.directions.len() != self.frames {
                return Err(Error::LengthMismatch {
                    what: format!("clip {} track {} directions", self.clip_id, t.id),
                    expected: self.frames,
                    got: t.directions.len(),
                });
            }
            if (require_flags || !t.in_frame.is_empty()) && t.in_frame.len() != self.frames {
                return Err(Error::LengthMismatch {
                    what: format!("clip {} track {} in_frame flags", self.clip_id, t.id),
                    expected: self.frames,
                    got: t.in_frame.len(),
                });
            }
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.tracks.len() * self.frames
    }
}

/// Where the 2D tracks of an instance come from.
#[derive(Debug, Clone)]
pub enum TrackInput {
    /// Per-frame equirectangular instance masks. Queries are sampled inside
    /// the object-centred view of the first frame and carried along by the
    /// shortest-arc rotation of the mask centroid.
    Masks(Vec<BinaryMask>),
    /// Tracks already expressed in equirectangular pixels.
    Equirect {
        grid: EquirectGrid,
        tracks: Vec<PointTrack2D>,
    },
    /// Tracks in a perspective crop with known per-frame camera.
    Perspective {
        tracks: Vec<PointTrack2D>,
        crop: Trajectory,
    },
}

impl TrackInput {
    fn frame_count(&self) -> Option<usize> {
        match self {
            TrackInput::Masks(m) => Some(m.len()),
            TrackInput::Equirect { tracks, .. } | TrackInput::Perspective { tracks, .. } => {
                tracks.first().map(|t| t.len())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub frames: usize,
    pub n_queries: usize,
    pub l_thresh: f64,
    pub intrinsics: Intrinsics,
    pub clip_id: String,
    pub category: String,
    pub source: String,
    pub seed: u64,
    pub render_frames: bool,
}

impl PipelineConfig {
    pub fn new(intrinsics: Intrinsics) -> Self {
        PipelineConfig {
            frames: 32,
            n_queries: 256,
            l_thresh: 20.0,
            intrinsics,
            clip_id: "clip".into(),
            category: String::new(),
            source: String::new(),
            seed: 0,
            render_frames: true,
        }
    }
}

/// A rendered perspective clip with its trajectory and ground truth.
#[derive(Debug, Clone)]
pub struct DatasetSample {
    pub trajectory: Trajectory,
    pub motion: MotionSpec,
    pub tracks: DirectionTrackSet,
    pub frames: Vec<PerspectiveFrame>,
    pub source: String,
}

struct WorldTracks {
    ids: Vec<u32>,
    dirs: Vec<Vec<UnitDirection>>,
    start: Rotation,
}

/// Runs the whole pipeline for one instance of one equirectangular clip.
pub fn assemble_sample(
    frames: &[EquirectFrame],
    input: &TrackInput,
    motion: &MotionSpec,
    cfg: &PipelineConfig,
) -> Result<DatasetSample> {
    cfg.intrinsics.validate().stage("config")?;
    let grid = frames
        .first()
        .map(|f| f.grid)
        .ok_or_else(|| Error::invalid("clip has no frames"))
        .stage("input")?;
    if frames.iter().any(|f| f.grid != grid) {
        return Err(Error::invalid("clip frames differ in size")).stage("input");
    }
    if let Some(n) = input.frame_count() {
        if n != frames.len() {
            return Err(Error::LengthMismatch {
                what: "track/mask frames vs clip frames".into(),
                expected: frames.len(),
                got: n,
            })
            .stage("input");
        }
    }
    let idx = subsample_indices(frames.len(), cfg.frames).stage("subsample")?;
    let world = world_tracks(input, &idx, &grid, cfg)?;

    let trajectory =
        build_trajectory(motion, cfg.frames, world.start, cfg.intrinsics).stage("trajectory")?;

    let mut tracks = Vec::with_capacity(world.ids.len());
    for (id, dirs) in world.ids.iter().zip(&world.dirs) {
        let (cam, flags) = retarget(dirs, &trajectory).stage("retarget")?;
        // A query has to be visible in the first frame.
        let Some(query) = cfg.intrinsics.project(cam[0]).filter(|p| cfg.intrinsics.contains(*p))
        else {
            continue;
        };
        tracks.push(DirectionTrack {
            id: *id,
            query,
            directions: cam,
            in_frame: flags,
        });
    }
    if tracks.is_empty() {
        return Err(Error::invalid("no track is visible in the first frame")).stage("retarget");
    }

    let track_set = DirectionTrackSet {
        clip_id: cfg.clip_id.clone(),
        frames: cfg.frames,
        width: cfg.intrinsics.width,
        height: cfg.intrinsics.height,
        intrinsics: Some(IntrinsicsSpec::Single(cfg.intrinsics)),
        trajectory_ref: None,
        tracks,
        meta: TrackMeta {
            motion_kind: motion.label(),
            category: cfg.category.clone(),
            source: (!cfg.source.is_empty()).then(|| cfg.source.clone()),
        },
    };
    track_set.validate(true).stage("output")?;

    let rendered = if cfg.render_frames {
        idx.par_iter()
            .zip(trajectory.rotations().par_iter().zip(trajectory.intrinsics()))
            .map(|(&f, (r, k))| render_perspective(&frames[f], r, k))
            .collect::<Result<Vec<_>>>()
            .stage("render")?
    } else {
        Vec::new()
    };

    Ok(DatasetSample {
        trajectory,
        motion: *motion,
        tracks: track_set,
        frames: rendered,
        source: cfg.source.clone(),
    })
}

fn world_tracks(input: &TrackInput, idx: &[usize], grid: &EquirectGrid, cfg: &PipelineConfig) -> Result<WorldTracks> {
    let pick = |t: &PointTrack2D| -> Result<PointTrack2D> {
        let points = idx
            .iter()
            .map(|&i| t.points.get(i).copied())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::invalid(format!("track {} shorter than the clip", t.id)))?;
        Ok(PointTrack2D::new(t.id, points))
    };

    match input {
        TrackInput::Masks(all) => {
            let masks: Vec<BinaryMask> = idx.iter().map(|&i| all[i].clone()).collect();
            let centring = object_centered(&masks, grid, cfg.intrinsics).stage("centering")?;
            let r0 = centring.rotations()[0];
            let view = project_mask(&masks[0], &r0, &cfg.intrinsics).stage("query sampling")?;
            let queries = sample_queries(&view, cfg.n_queries, cfg.seed).stage("query sampling")?;

            let centroids = masks
                .iter()
                .enumerate()
                .map(|(t, m)| mask_centroid(m, grid, t))
                .collect::<Result<Vec<_>>>()
                .stage("tracking")?;
            let carry: Vec<Rotation> = centroids
                .iter()
                .map(|c| Rotation::between(centroids[0], *c))
                .collect();

            let tracks: Vec<PointTrack2D> = queries
                .points
                .iter()
                .enumerate()
                .map(|(q, p)| {
                    let w0 = r0.rotate(cfg.intrinsics.unproject([p[0] as f64, p[1] as f64]));
                    let dirs: Vec<_> = carry.iter().map(|o| o.rotate(w0)).collect();
                    equirect_track(q as u32, &dirs, grid)
                })
                .collect();
            let kept = filter_tracks(&tracks, cfg.l_thresh);
            if kept.is_empty() {
                return Err(Error::invalid(format!(
                    "all {} tracks at or below L_thresh = {}",
                    tracks.len(),
                    cfg.l_thresh
                )))
                .stage("length filter");
            }
            Ok(WorldTracks {
                ids: kept.iter().map(|t| t.id).collect(),
                dirs: kept.iter().map(|t| lift_equirect_track(t, grid)).collect(),
                start: r0,
            })
        }
        TrackInput::Equirect { grid: tgrid, tracks } => {
            let tracks = tracks.iter().map(pick).collect::<Result<Vec<_>>>().stage("input")?;
            let kept = filter_tracks(&tracks, cfg.l_thresh);
            if kept.is_empty() {
                return Err(Error::invalid("no track exceeds L_thresh")).stage("length filter");
            }
            let dirs: Vec<Vec<UnitDirection>> = kept.iter().map(|t| lift_equirect_track(t, tgrid)).collect();
            let mean = dirs.iter().fold(Vec3::default(), |acc, d| acc + d[0].vec());
            let start = UnitDirection::new(mean)
                .ok()
                .and_then(|c| Rotation::look_at(c, Vec3::new(0.0, 1.0, 0.0)))
                .unwrap_or(Rotation::IDENTITY);
            Ok(WorldTracks {
                ids: kept.iter().map(|t| t.id).collect(),
                dirs,
                start,
            })
        }
        TrackInput::Perspective { tracks, crop } => {
            if idx.last().is_some_and(|&last| last >= crop.len()) {
                return Err(Error::invalid("crop trajectory shorter than the clip")).stage("input");
            }
            let rotations: Vec<Rotation> = idx.iter().map(|&i| crop.rotations()[i]).collect();
            let ks: Vec<Intrinsics> = idx.iter().map(|&i| crop.intrinsics()[i]).collect();
            let tracks = tracks.iter().map(pick).collect::<Result<Vec<_>>>().stage("input")?;
            let kept = filter_tracks(&tracks, cfg.l_thresh);
            if kept.is_empty() {
                return Err(Error::invalid("no track exceeds L_thresh")).stage("length filter");
            }
            let dirs = kept
                .iter()
                .map(|t| {
                    let cam = track_to_directions(t, &ks)?;
                    Ok(cam.iter().zip(&rotations).map(|(d, r)| r.rotate(*d)).collect())
                })
                .collect::<Result<Vec<_>>>()
                .stage("directions")?;
            Ok(WorldTracks {
                ids: kept.iter().map(|t| t.id).collect(),
                dirs,
                start: rotations[0],
            })
        }
    }
}
