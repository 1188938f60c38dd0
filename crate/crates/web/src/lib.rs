//! WebAssembly bindings for the browser demo: a synthetic panorama, the
//! perspective view of a camera looking into it, the camera's frustum on the
//! panorama and previews of generated camera trajectories.

use std::cell::OnceCell;

use panotrack::motion::{build_trajectory, MotionKind, MotionSpec};
use panotrack::resample::{frustum_on_equirect, grey_outside, render_perspective};
use panotrack::synth::{render_scene, Background, MarkerPath, MarkerSpec, SceneSpec};
use panotrack::{
    direction_to_equirect, euler_to_rotation, EquirectFrame, EquirectGrid, EulerAngles, Intrinsics, RgbImage,
    Rotation, UnitDirection,
};
use wasm_bindgen::prelude::*;

const PANO_WIDTH: usize = 1024;
const PANO_HEIGHT: usize = 512;

thread_local! {
    static PANORAMA: OnceCell<EquirectFrame> = const { OnceCell::new() };
}

fn demo_scene() -> SceneSpec {
    let marker = |lon: f64, lat: f64, radius: f64, color: [u8; 3]| MarkerSpec {
        path: MarkerPath::Static,
        speed: 0.0,
        start: [lon, lat],
        radius,
        color,
    };
    SceneSpec {
        frames: 2,
        grid: EquirectGrid { width: PANO_WIDTH, height: PANO_HEIGHT },
        markers: vec![
            marker(0.0, 0.0, 4.0, [250, 250, 250]),
            marker(90.0, 0.0, 6.0, [230, 40, 40]),
            marker(180.0, 0.0, 6.0, [40, 200, 60]),
            marker(-90.0, 0.0, 6.0, [40, 90, 240]),
            marker(0.0, 89.0, 8.0, [250, 220, 40]),
            marker(45.0, -45.0, 5.0, [250, 120, 20]),
            marker(-135.0, 30.0, 5.0, [200, 50, 220]),
        ],
        background: Background::Gradient,
        background_drift: 0.0,
        noise: 0,
        seed: 0,
    }
}

fn with_panorama<T>(f: impl FnOnce(&EquirectFrame) -> T) -> T {
    PANORAMA.with(|cell| {
        let pano = cell.get_or_init(|| {
            let mut out = render_scene(&demo_scene()).expect("demo scene is valid");
            out.frames.swap_remove(0)
        });
        f(pano)
    })
}

fn rgba(img: &RgbImage) -> Vec<u8> {
    img.data().chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
}

fn camera(yaw: f64, pitch: f64, roll: f64) -> Rotation {
    euler_to_rotation(EulerAngles::new(pitch, roll, yaw))
}

fn intrinsics(width: usize, height: usize, fov: f64) -> Result<Intrinsics, JsError> {
    Intrinsics::from_fov(width, height, fov).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn panorama_width() -> usize {
    PANO_WIDTH
}

#[wasm_bindgen]
pub fn panorama_height() -> usize {
    PANO_HEIGHT
}

/// The demo panorama as RGBA bytes.
#[wasm_bindgen]
pub fn panorama_rgba() -> Vec<u8> {
    with_panorama(|p| rgba(&p.image))
}

/// Perspective view (RGBA) of a camera with the given Euler angles in
/// degrees and horizontal field of view.
#[wasm_bindgen]
pub fn render_view(yaw: f64, pitch: f64, roll: f64, fov: f64, width: usize, height: usize) -> Result<Vec<u8>, JsError> {
    let k = intrinsics(width, height, fov)?;
    let r = camera(yaw, pitch, roll);
    with_panorama(|p| render_perspective(p, &r, &k))
        .map(|f| rgba(&f.image))
        .map_err(|e| JsError::new(&e.to_string()))
}

/// The panorama (RGBA) with everything outside the camera's view greyed out.
#[wasm_bindgen]
pub fn frustum_overlay(yaw: f64, pitch: f64, roll: f64, fov: f64, width: usize, height: usize) -> Result<Vec<u8>, JsError> {
    let k = intrinsics(width, height, fov)?;
    let r = camera(yaw, pitch, roll);
    with_panorama(|p| {
        let visible = frustum_on_equirect(&r, &k, &p.grid).map_err(|e| JsError::new(&e.to_string()))?;
        Ok(rgba(&grey_outside(&p.image, &visible)))
    })
}

/// Optical-axis path of a generated trajectory as panorama pixel
/// coordinates `[u0, v0, u1, v1, ...]`.
#[wasm_bindgen]
pub fn trajectory_path(kind: &str, frames: usize, seed: u32, btf: bool) -> Result<Vec<f64>, JsError> {
    let kind: MotionKind = kind.parse().map_err(|e: panotrack::Error| JsError::new(&e.to_string()))?;
    let spec = MotionSpec::new(kind, seed as u64).with_btf(btf);
    let k = Intrinsics::from_fov(256, 256, 70.528).expect("valid default camera");
    let traj = build_trajectory(&spec, frames, Rotation::IDENTITY, k).map_err(|e| JsError::new(&e.to_string()))?;
    let grid = EquirectGrid { width: PANO_WIDTH, height: PANO_HEIGHT };
    Ok(traj
        .rotations()
        .iter()
        .flat_map(|r| direction_to_equirect(r.rotate(UnitDirection::FORWARD), &grid))
        .collect())
}

/// Perspective view (RGBA) at frame `index` of a generated trajectory.
#[wasm_bindgen]
pub fn trajectory_frame(kind: &str, frames: usize, seed: u32, btf: bool, index: usize, size: usize) -> Result<Vec<u8>, JsError> {
    let kind: MotionKind = kind.parse().map_err(|e: panotrack::Error| JsError::new(&e.to_string()))?;
    let spec = MotionSpec::new(kind, seed as u64).with_btf(btf);
    let k = intrinsics(size, size, 70.528)?;
    let traj = build_trajectory(&spec, frames, Rotation::IDENTITY, k).map_err(|e| JsError::new(&e.to_string()))?;
    let r = traj
        .rotations()
        .get(index)
        .ok_or_else(|| JsError::new(&format!("frame {index} out of range")))?;
    with_panorama(|p| render_perspective(p, r, &k))
        .map(|f| rgba(&f.image))
        .map_err(|e| JsError::new(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_view_shows_the_white_marker() {
        let view = render_view(0.0, 0.0, 0.0, 40.0, 33, 33).unwrap();
        let centre = (16 * 33 + 16) * 4;
        assert_eq!(&view[centre..centre + 4], &[250, 250, 250, 255]);
    }

    #[test]
    fn yawed_view_shows_the_red_marker() {
        let view = render_view(90.0, 0.0, 0.0, 40.0, 33, 33).unwrap();
        let centre = (16 * 33 + 16) * 4;
        assert_eq!(&view[centre..centre + 4], &[230, 40, 40, 255]);
    }

    #[test]
    fn overlay_keeps_the_centre_and_greys_the_back() {
        let over = frustum_overlay(0.0, 0.0, 0.0, 60.0, 64, 64).unwrap();
        let pano = panorama_rgba();
        let at = |u: usize, v: usize| (v * PANO_WIDTH + u) * 4;
        let c = at(PANO_WIDTH / 2, PANO_HEIGHT / 2 + 20);
        assert_eq!(&over[c..c + 4], &pano[c..c + 4]);
        let b = at(5, PANO_HEIGHT / 2 + 20);
        assert_ne!(&over[b..b + 4], &pano[b..b + 4]);
    }

    #[test]
    fn spin_path_starts_at_the_centre() {
        let path = trajectory_path("spin_y", 16, 1, false).unwrap();
        assert_eq!(path.len(), 32);
        assert!((path[0] - (PANO_WIDTH as f64 / 2.0 - 0.5)).abs() < 1e-9);
        assert!(trajectory_frame("static", 4, 0, false, 3, 16).unwrap().len() == 16 * 16 * 4);
    }
}
