use panotrack::frame::BinaryMask;
use panotrack::motion::{MotionKind, MotionSpec};
use panotrack::resample::frustum_on_equirect;
use panotrack::synth::{render_scene, Background, MarkerPath, MarkerSpec, SceneSpec};
use panotrack::tracks::{
    assemble_sample, cumulative_length, track_to_directions, PipelineConfig, PointTrack2D, TrackInput,
};
use panotrack::{angular_distance, EquirectGrid, Intrinsics, Rotation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn area_fraction(mask: &BinaryMask, grid: &EquirectGrid) -> f64 {
    let area: f64 = mask.true_pixels().iter().map(|&(_, y)| grid.row_solid_angle(y)).sum();
    area / (4.0 * std::f64::consts::PI)
}

#[test]
fn frustum_matches_rectangular_pyramid_solid_angle() {
    let grid = EquirectGrid::new(2048, 1024).unwrap();
    let k = Intrinsics::from_fov(256, 256, 70.53).unwrap();
    let half = 35.265f64.to_radians();
    let expected = 4.0 * (half.sin() * half.sin()).asin() / (4.0 * std::f64::consts::PI);
    for r in [Rotation::IDENTITY, Rotation::rx(50.0) * Rotation::ry(-120.0), Rotation::rx(89.0)] {
        let got = area_fraction(&frustum_on_equirect(&r, &k, &grid).unwrap(), &grid);
        assert!((got / expected - 1.0).abs() < 0.02, "{got} vs {expected}");
    }
}

#[test]
fn random_track_steps_follow_pinhole_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let k = Intrinsics::new(300.0, 260.0, 120.0, 90.0, 240, 180).unwrap();
    let points: Vec<[f64; 2]> =
        (0..32).map(|_| [rng.random_range(-50.0..300.0), rng.random_range(-50.0..250.0)]).collect();
    let track = PointTrack2D::new(0, points.clone());
    let dirs = track_to_directions(&track, &vec![k; 32]).unwrap();
    for (w, d) in points.windows(2).zip(dirs.windows(2)) {
        let ray = |p: [f64; 2]| [(p[0] - k.cx) / k.fx, (p[1] - k.cy) / k.fy, 1.0];
        let (a, b) = (ray(w[0]), ray(w[1]));
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let norm = |v: [f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let expected = (dot / (norm(a) * norm(b))).clamp(-1.0, 1.0).acos().to_degrees();
        assert!((angular_distance(d[0], d[1]) - expected).abs() < 1e-9);
    }

    let by_hand: f64 = points.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum();
    assert!((cumulative_length(&track).unwrap() - by_hand).abs() < 1e-9);
}

fn forward_marker_scene(frames: usize) -> SceneSpec {
    SceneSpec {
        frames,
        grid: EquirectGrid::new(512, 256).unwrap(),
        markers: vec![MarkerSpec {
            path: MarkerPath::Static,
            speed: 0.0,
            start: [0.0, 0.0],
            radius: 6.0,
            color: [20, 240, 20],
        }],
        background: Background::Checker { cells: [16, 8] },
        background_drift: 0.0,
        noise: 0,
        seed: 0,
    }
}

#[test]
fn static_scene_static_motion_is_always_in_frame() {
    let out = render_scene(&forward_marker_scene(32)).unwrap();
    let mut cfg = PipelineConfig::new(Intrinsics::from_fov(128, 128, 70.528).unwrap());
    cfg.l_thresh = -1.0;
    cfg.render_frames = false;
    let sample = assemble_sample(
        &out.frames,
        &TrackInput::Masks(out.masks[0].clone()),
        &MotionSpec::new(MotionKind::Static, 1),
        &cfg,
    )
    .unwrap();
    for t in &sample.tracks.tracks {
        assert!(t.in_frame.iter().all(|&f| f));
        assert!(t.directions.iter().all(|d| angular_distance(*d, t.directions[0]) < 1e-9));
    }
}

#[test]
fn spinning_camera_sees_a_forward_marker_for_its_fov_share() {
    let frames = 64;
    let out = render_scene(&forward_marker_scene(frames)).unwrap();
    let fov = 70.528;
    let mut cfg = PipelineConfig::new(Intrinsics::from_fov(128, 128, fov).unwrap());
    cfg.frames = frames;
    cfg.l_thresh = -1.0;
    cfg.render_frames = false;
    let motion = MotionSpec::new(MotionKind::SpinY, 3).with_spin_noise(0.0);
    let sample = assemble_sample(&out.frames, &TrackInput::Masks(out.masks[0].clone()), &motion, &cfg).unwrap();
    let flags: Vec<bool> = sample.tracks.tracks.iter().flat_map(|t| t.in_frame.iter().copied()).collect();
    let oof = flags.iter().filter(|f| !**f).count() as f64 / flags.len() as f64;
    let expected = 1.0 - fov / 360.0;
    assert!((oof - expected).abs() < 0.1 * expected, "{oof} vs {expected}");
}
