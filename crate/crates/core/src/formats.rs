//! JSON file formats: trajectories, imported 2D tracks and direction track
//! sets.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EquirectGrid, Intrinsics, Rotation};
use crate::motion::{MotionSpec, Trajectory};
use crate::tracks::{DirectionTrackSet, IntrinsicsSpec, PointTrack2D, TrackInput};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

/// Pretty-printed with a trailing newline, so reruns are byte-identical.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// On-disk trajectory: one row-major camera-to-world rotation and one set of
/// intrinsics per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub frames: usize,
    pub rotations: Vec<Rotation>,
    pub intrinsics: Vec<Intrinsics>,
    #[serde(default)]
    pub motion: String,
    #[serde(default)]
    pub seed: u64,
    /// `[i_s, i_e)` of the back-to-front segment, when one was applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub btf_window: Option<[usize; 2]>,
}

impl TrajectoryFile {
    pub fn new(traj: &Trajectory, spec: &MotionSpec, btf_window: Option<(usize, usize)>) -> Self {
        TrajectoryFile {
            frames: traj.len(),
            rotations: traj.rotations().to_vec(),
            intrinsics: traj.intrinsics().to_vec(),
            motion: spec.label(),
            seed: spec.seed,
            btf_window: btf_window.map(|(a, b)| [a, b]),
        }
    }

    pub fn trajectory(&self) -> Result<Trajectory> {
        if self.rotations.len() != self.frames {
            return Err(Error::LengthMismatch {
                what: "trajectory rotations".into(),
                expected: self.frames,
                got: self.rotations.len(),
            });
        }
        Trajectory::new(self.rotations.clone(), self.intrinsics.clone())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: TrajectoryFile = read_json(path)?;
        file.trajectory().map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(file)
    }
}

/// Coordinate frame of imported 2D tracks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrackGrid {
    Equirect {
        width: usize,
        height: usize,
    },
    /// Tracks in a perspective crop seen through per-frame camera rotations.
    Perspective {
        intrinsics: IntrinsicsSpec,
        rotations: Vec<Rotation>,
    },
}

/// On-disk 2D tracks for one object instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackFile {
    pub grid: TrackGrid,
    pub tracks: Vec<PointTrack2D>,
}

impl TrackFile {
    pub fn load(path: &Path) -> Result<Self> {
        let file: TrackFile = read_json(path)?;
        file.check().map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(file)
    }

    fn check(&self) -> Result<()> {
        let Some(first) = self.tracks.first() else {
            return Err(Error::invalid("track file holds no tracks"));
        };
        for t in &self.tracks {
            if t.points.len() != first.points.len() {
                return Err(Error::LengthMismatch {
                    what: format!("track {} points", t.id),
                    expected: first.points.len(),
                    got: t.points.len(),
                });
            }
            if t.points.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("track {} has non-finite coordinates", t.id)));
            }
        }
        self.input().map(|_| ())
    }

    pub fn input(&self) -> Result<TrackInput> {
        let frames = self.tracks.first().map_or(0, |t| t.points.len());
        match &self.grid {
            TrackGrid::Equirect { width, height } => Ok(TrackInput::Equirect {
                grid: EquirectGrid::new(*width, *height)?,
                tracks: self.tracks.clone(),
            }),
            TrackGrid::Perspective { intrinsics, rotations } => {
                let k = match intrinsics {
                    IntrinsicsSpec::Single(k) => vec![*k; rotations.len()],
                    IntrinsicsSpec::PerFrame(ks) => ks.clone(),
                };
                if rotations.len() != frames {
                    return Err(Error::LengthMismatch {
                        what: "crop rotations vs track points".into(),
                        expected: frames,
                        got: rotations.len(),
                    });
                }
                Ok(TrackInput::Perspective {
                    tracks: self.tracks.clone(),
                    crop: Trajectory::new(rotations.clone(), k)?,
                })
            }
        }
    }
}

/// Reads direction track sets from a file holding one set or an array of
/// them, or from a directory: every `*.json` file directly inside it and
/// every `tracks.json` one level down, in path order.
pub fn load_direction_sets(path: &Path) -> Result<Vec<DirectionTrackSet>> {
    if !path.is_dir() {
        return read_sets_file(path);
    }
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
        let p = entry.map_err(|e| Error::io(path, e))?.path();
        if p.is_dir() {
            let nested = p.join("tracks.json");
            if nested.is_file() {
                files.push(nested);
            }
        } else if p.extension().is_some_and(|e| e == "json") {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::parse(path, "no track files found"));
    }
    let mut sets = Vec::new();
    for f in files {
        sets.extend(read_sets_file(&f)?);
    }
    Ok(sets)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<DirectionTrackSet>),
    One(Box<DirectionTrackSet>),
}

fn read_sets_file(path: &Path) -> Result<Vec<DirectionTrackSet>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    // Try the single-object form first so its error message (with line and
    // column) is reported for malformed files.
    let sets = match serde_json::from_str::<DirectionTrackSet>(&text) {
        Ok(one) => vec![one],
        Err(single_err) => match serde_json::from_str::<OneOrMany>(&text) {
            Ok(OneOrMany::Many(v)) => v,
            Ok(OneOrMany::One(one)) => vec![*one],
            Err(_) if text.trim_start().starts_with('[') => {
                serde_json::from_str::<Vec<DirectionTrackSet>>(&text)
                    .map_err(|e| Error::parse(path, e.to_string()))?
            }
            Err(_) => return Err(Error::parse(path, single_err.to_string())),
        },
    };
    for s in &sets {
        s.validate(false).map_err(|e| Error::parse(path, e.to_string()))?;
    }
    Ok(sets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{build_trajectory, MotionKind};
    use crate::tracks::{DirectionTrack, TrackMeta};
    use crate::UnitDirection;

    #[test]
    fn trajectory_round_trip() {
        let k = Intrinsics::from_fov(64, 64, 60.0).unwrap();
        let spec = MotionSpec::new(MotionKind::SpinY, 3);
        let traj = build_trajectory(&spec, 8, Rotation::IDENTITY, k).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        write_json(&p, &TrajectoryFile::new(&traj, &spec, None)).unwrap();
        let back = TrajectoryFile::load(&p).unwrap();
        assert_eq!(back.motion, "spin_y");
        let t2 = back.trajectory().unwrap();
        for (a, b) in traj.rotations().iter().zip(t2.rotations()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn malformed_track_file_names_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        fs::write(&p, "{\"grid\": {\"kind\": \"equirect\", \"width\": 64, \"height\": 32},\n \"tracks\": [{\"id\": 0, \"points\": [[1, 2], [3]]}]}").unwrap();
        let err = TrackFile::load(&p).unwrap_err().to_string();
        assert!(err.contains("bad.json") && err.contains("line 2"), "{err}");
    }

    #[test]
    fn ragged_tracks_rejected() {
        let f = TrackFile {
            grid: TrackGrid::Equirect { width: 64, height: 32 },
            tracks: vec![PointTrack2D::new(0, vec![[0.0, 0.0]; 3]), PointTrack2D::new(1, vec![[0.0, 0.0]; 2])],
        };
        assert!(f.check().is_err());
    }

    #[test]
    fn direction_sets_single_array_and_directory() {
        let set = DirectionTrackSet {
            clip_id: "c".into(),
            frames: 1,
            width: 8,
            height: 8,
            intrinsics: None,
            trajectory_ref: None,
            tracks: vec![DirectionTrack {
                id: 0,
                query: [1.0, 1.0],
                directions: vec![UnitDirection::FORWARD],
                in_frame: vec![true],
            }],
            meta: TrackMeta::default(),
        };
        let dir = tempfile::tempdir().unwrap();
        let one = dir.path().join("one.json");
        write_json(&one, &set).unwrap();
        assert_eq!(load_direction_sets(&one).unwrap(), vec![set.clone()]);
        let many = dir.path().join("many.json");
        let mut other = set.clone();
        other.clip_id = "d".into();
        write_json(&many, &vec![set.clone(), other]).unwrap();
        assert_eq!(load_direction_sets(&many).unwrap().len(), 2);

        let sub = dir.path().join("sample_00000");
        fs::create_dir(&sub).unwrap();
        write_json(&sub.join("tracks.json"), &set).unwrap();
        assert_eq!(load_direction_sets(dir.path()).unwrap().len(), 4);
    }
}
