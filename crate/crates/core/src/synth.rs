//! Procedural equirectangular clips with analytically moving markers.
//!
//! Each marker is a spherical cap painted over a smooth background. Its
//! centre follows a closed-form path, so the direction of every point on it
//! is known exactly at every frame.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{BinaryMask, EquirectFrame, RgbImage};
use crate::geometry::{
    equirect_to_direction, from_lon_lat, lon_lat, EquirectGrid, Rotation, UnitDirection, Vec3,
};
use crate::rng::{KeyedRng, Stream};
use crate::tracks::{equirect_track, PointTrack2D};

/// How a marker centre moves. Speeds are in degrees per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "snake_case")]
pub enum MarkerPath {
    Static,
    /// Rotation about a fixed axis through the start point. `heading` is the
    /// initial direction of travel, counter-clockwise from east.
    GreatCircle {
        #[serde(default)]
        heading: f64,
    },
    /// Constant latitude, advancing longitude.
    SmallCircle,
    /// Longitude and latitude oscillate around the start point:
    /// `lon0 + a_lon sin(f_lon s t)`, `lat0 + a_lat sin(f_lat s t)`, with
    /// `s` the speed.
    Lissajous {
        amplitude: [f64; 2],
        frequency: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerSpec {
    #[serde(flatten)]
    pub path: MarkerPath,
    #[serde(default)]
    pub speed: f64,
    /// `[longitude, latitude]` in degrees at frame 0.
    pub start: [f64; 2],
    /// Cap radius in degrees.
    pub radius: f64,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    /// Smooth colour field, continuous across the seam and the poles.
    Gradient,
    /// Alternating cells, `cells = [longitude cells, latitude cells]`.
    Checker { cells: [usize; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub frames: usize,
    pub grid: EquirectGrid,
    pub markers: Vec<MarkerSpec>,
    #[serde(default = "default_background")]
    pub background: Background,
    /// Background rotation about the vertical axis, degrees per frame.
    #[serde(default)]
    pub background_drift: f64,
    /// Amplitude of uniform per-channel pixel noise.
    #[serde(default)]
    pub noise: u8,
    #[serde(default)]
    pub seed: u64,
}

fn default_background() -> Background {
    Background::Gradient
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.frames < 2 {
            return Err(Error::invalid(format!("scene needs at least 2 frames, got {}", self.frames)));
        }
        if !self.background_drift.is_finite() {
            return Err(Error::invalid("background drift must be finite"));
        }
        if let Background::Checker { cells } = self.background {
            if cells[0] == 0 || cells[1] == 0 {
                return Err(Error::invalid("checker cells must be positive"));
            }
        }
        for (i, m) in self.markers.iter().enumerate() {
            let bad = |what: &str| Err(Error::invalid(format!("marker {i}: {what}")));
            if !(m.radius > 0.0 && m.radius < 90.0) {
                return bad("radius must lie in (0, 90) degrees");
            }
            if !m.speed.is_finite() || !m.start.iter().all(|v| v.is_finite()) {
                return bad("speed and start must be finite");
            }
            if m.start[1].abs() > 90.0 {
                return bad("start latitude outside [-90, 90]");
            }
            match m.path {
                MarkerPath::GreatCircle { heading } if !heading.is_finite() => return bad("heading must be finite"),
                MarkerPath::Lissajous { amplitude, frequency } => {
                    if !amplitude.iter().chain(&frequency).all(|v| v.is_finite()) {
                        return bad("lissajous parameters must be finite");
                    }
                    if m.start[1].abs() + amplitude[1].abs() >= 90.0 {
                        return bad("lissajous latitude would cross a pole");
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// A single great-circle marker on the gradient background.
    pub fn single_marker(grid: EquirectGrid, frames: usize) -> SceneSpec {
        SceneSpec {
            frames,
            grid,
            markers: vec![MarkerSpec {
                path: MarkerPath::GreatCircle { heading: 30.0 },
                speed: 2.0,
                start: [0.0, 0.0],
                radius: 5.0,
                color: [250, 30, 30],
            }],
            background: Background::Gradient,
            background_drift: 3.0,
            noise: 0,
            seed: 0,
        }
    }
}

fn start_direction(m: &MarkerSpec) -> UnitDirection {
    from_lon_lat(m.start[0].to_radians(), m.start[1].to_radians())
}

/// Rotation carrying the marker (and every point painted on it) from
/// frame 0 to frame `t`.
pub fn marker_transport(m: &MarkerSpec, t: f64) -> Rotation {
    let angle = m.speed * t;
    match m.path {
        MarkerPath::Static => Rotation::IDENTITY,
        MarkerPath::SmallCircle => Rotation::ry(angle),
        MarkerPath::GreatCircle { heading } => {
            let (lon, lat) = (m.start[0].to_radians(), m.start[1].to_radians());
            let east = Vec3::new(lon.cos(), 0.0, -lon.sin());
            let north = Vec3::new(-lat.sin() * lon.sin(), -lat.cos(), -lat.sin() * lon.cos());
            let h = heading.to_radians();
            let tangent = east * h.cos() + north * h.sin();
            let axis = UnitDirection::new(start_direction(m).vec().cross(tangent)).expect("tangent is orthogonal");
            Rotation::from_axis_angle(axis, angle.to_radians())
        }
        MarkerPath::Lissajous { .. } => Rotation::between(start_direction(m), marker_direction(m, t)),
    }
}

/// Centre of marker `m` at (possibly fractional) frame `t`.
pub fn marker_direction(m: &MarkerSpec, t: f64) -> UnitDirection {
    match m.path {
        MarkerPath::Lissajous { amplitude, frequency } => {
            let phase = (m.speed * t).to_radians();
            let lon = m.start[0] + amplitude[0] * (frequency[0] * phase).sin();
            let lat = m.start[1] + amplitude[1] * (frequency[1] * phase).sin();
            from_lon_lat(lon.to_radians(), lat.to_radians())
        }
        _ => marker_transport(m, t).rotate(start_direction(m)),
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub frames: Vec<EquirectFrame>,
    /// `directions[marker][t]`: analytic world direction of each centre.
    pub directions: Vec<Vec<UnitDirection>>,
    /// `masks[marker][t]`: the painted cap.
    pub masks: Vec<Vec<BinaryMask>>,
}

fn background_value(bg: Background, d: Vec3) -> [u8; 3] {
    match bg {
        Background::Gradient => {
            // Low-order polynomials in the direction, hence smooth everywhere
            // on the sphere including the seam and the poles.
            let Vec3 { x, y, z } = d;
            [
                128.0 - 180.0 * y * z + 30.0 * x,
                128.0 - 140.0 * x * y + 40.0 * z,
                83.0 + 120.0 * y * z + 90.0 * x * x,
            ]
            .map(|c| c.round().clamp(0.0, 255.0) as u8)
        }
        Background::Checker { cells } => {
            let (lon, lat) = lon_lat(UnitDirection::from_unit(d));
            let cu = ((lon / TAU + 0.5) * cells[0] as f64).floor() as i64;
            let cv = ((0.5 - lat / std::f64::consts::PI) * cells[1] as f64).floor() as i64;
            if (cu + cv).rem_euclid(2) == 0 {
                [60, 60, 70]
            } else {
                [190, 185, 180]
            }
        }
    }
}

/// Paints every frame and mask of the scene.
pub fn render_scene(spec: &SceneSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let grid = spec.grid;
    let dirs: Vec<Vec3> = (0..grid.len())
        .map(|p| equirect_to_direction((p % grid.width) as f64, (p / grid.width) as f64, &grid).vec())
        .collect();
    let directions: Vec<Vec<UnitDirection>> = spec
        .markers
        .iter()
        .map(|m| (0..spec.frames).map(|t| marker_direction(m, t as f64)).collect())
        .collect();
    let cos_r: Vec<f64> = spec.markers.iter().map(|m| m.radius.to_radians().cos()).collect();
    let keyed = KeyedRng::new(spec.seed);

    let rendered: Vec<(RgbImage, Vec<BinaryMask>)> = (0..spec.frames)
        .into_par_iter()
        .map(|t| {
            let drift = Rotation::ry(-spec.background_drift * t as f64);
            let mut noise = (spec.noise > 0).then(|| {
                ChaCha8Rng::seed_from_u64(keyed.at(Stream::SynthNoise, t as u64, 0).random::<u64>())
            });
            let mut img = RgbImage::filled(grid.width, grid.height, [0; 3]);
            let mut masks: Vec<Vec<bool>> = vec![vec![false; grid.len()]; spec.markers.len()];
            for (p, d) in dirs.iter().enumerate() {
                let mut rgb = None;
                for (mi, m) in spec.markers.iter().enumerate() {
                    if d.dot(directions[mi][t].vec()) >= cos_r[mi] {
                        masks[mi][p] = true;
                        rgb = Some(m.color);
                    }
                }
                let mut rgb = rgb.unwrap_or_else(|| {
                    background_value(spec.background, drift.apply(*d))
                });
                if let Some(rng) = noise.as_mut() {
                    let a = spec.noise as i16;
                    for c in &mut rgb {
                        *c = (*c as i16 + rng.random_range(-a..=a)).clamp(0, 255) as u8;
                    }
                }
                img.set_pixel(p % grid.width, p / grid.width, rgb);
            }
            let masks = masks
                .into_iter()
                .map(|bits| BinaryMask::new(grid.width, grid.height, bits).expect("grid-sized mask"))
                .collect();
            (img, masks)
        })
        .collect();

    let mut frames = Vec::with_capacity(spec.frames);
    let mut masks: Vec<Vec<BinaryMask>> = vec![Vec::with_capacity(spec.frames); spec.markers.len()];
    for (img, per_marker) in rendered {
        frames.push(EquirectFrame { grid, image: img });
        for (mi, m) in per_marker.into_iter().enumerate() {
            masks[mi].push(m);
        }
    }
    Ok(SynthOutput {
        frames,
        directions,
        masks,
    })
}

/// Equirectangular tracks of the marker centres, with unwrapped `u`.
pub fn marker_tracks(spec: &SceneSpec, out: &SynthOutput) -> Vec<PointTrack2D> {
    out.directions
        .iter()
        .enumerate()
        .map(|(i, d)| equirect_track(i as u32, d, &spec.grid))
        .collect()
}
