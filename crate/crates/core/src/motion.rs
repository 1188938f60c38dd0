//! Camera trajectories: the per-frame motion strategies, back-to-front
//! mirroring and object-centred tracking.
//!
//! A trajectory is built by composing per-frame Euler deltas onto an initial
//! rotation, `R[i+1] = R[i] · euler_to_rotation(δ[i])`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::BinaryMask;
use crate::geometry::{
    equirect_to_direction, euler_to_rotation, procrustes_so3, EquirectGrid, EulerAngles,
    Intrinsics, Rotation, UnitDirection, Vec3,
};
use crate::rng::{KeyedRng, Stream};

/// Compositions between re-orthonormalizations of a running trajectory.
const REORTHO_INTERVAL: usize = 64;

/// Frames kept untouched at either end of a back-to-front window.
const BTF_BUFFER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Static,
    Spiral,
    Random,
    Human,
    SpinX,
    SpinY,
    SpinZ,
}

impl MotionKind {
    pub const ALL: [MotionKind; 7] = [
        MotionKind::Static,
        MotionKind::Spiral,
        MotionKind::Random,
        MotionKind::Human,
        MotionKind::SpinX,
        MotionKind::SpinY,
        MotionKind::SpinZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MotionKind::Static => "static",
            MotionKind::Spiral => "spiral",
            MotionKind::Random => "random",
            MotionKind::Human => "human",
            MotionKind::SpinX => "spin_x",
            MotionKind::SpinY => "spin_y",
            MotionKind::SpinZ => "spin_z",
        }
    }

    /// Default `(θ_min, θ_max)` in degrees.
    fn default_theta(self) -> (f64, f64) {
        match self {
            MotionKind::Spiral => (0.0, 360.0),
            _ => (-2.0, 2.0),
        }
    }
}

impl fmt::Display for MotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MotionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown motion kind `{s}`")))
    }
}

/// Parameter bounds for simulated handheld motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HumanParams {
    /// Oscillation amplitude maxima in degrees.
    pub amp_roll: f64,
    pub amp_pitch: f64,
    pub amp_yaw: f64,
    /// Drift maxima in degrees per frame.
    pub drift_pitch: f64,
    pub drift_yaw: f64,
    /// Angular frequency bounds in radians per frame.
    pub omega_min: f64,
    pub omega_max: f64,
    /// Per-frame noise standard deviations in degrees.
    pub sigma_roll: f64,
    pub sigma_pitch: f64,
    pub sigma_yaw: f64,
}

impl Default for HumanParams {
    fn default() -> Self {
        HumanParams {
            amp_roll: 1.5,
            amp_pitch: 1.5,
            amp_yaw: 1.5,
            drift_pitch: 0.2,
            drift_yaw: 0.2,
            omega_min: 0.1,
            omega_max: 0.5,
            sigma_roll: 0.1,
            sigma_pitch: 0.1,
            sigma_yaw: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionSpec {
    pub kind: MotionKind,
    /// Angular bounds in degrees; kind-specific defaults when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    /// Spin noise ratio η.
    #[serde(default = "default_spin_noise")]
    pub spin_noise: f64,
    #[serde(default)]
    pub human: HumanParams,
    #[serde(default)]
    pub btf: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_spin_noise() -> f64 {
    0.25
}

impl MotionSpec {
    pub fn new(kind: MotionKind, seed: u64) -> Self {
        MotionSpec {
            kind,
            theta_min: None,
            theta_max: None,
            spin_noise: default_spin_noise(),
            human: HumanParams::default(),
            btf: false,
            seed,
        }
    }

    pub fn with_btf(mut self, btf: bool) -> Self {
        self.btf = btf;
        self
    }

    pub fn with_spin_noise(mut self, eta: f64) -> Self {
        self.spin_noise = eta;
        self
    }

    pub fn with_theta(mut self, min: f64, max: f64) -> Self {
        self.theta_min = Some(min);
        self.theta_max = Some(max);
        self
    }

    pub fn theta(&self) -> (f64, f64) {
        let (lo, hi) = self.kind.default_theta();
        (self.theta_min.unwrap_or(lo), self.theta_max.unwrap_or(hi))
    }

    /// Kind name, suffixed with `+btf` when mirrored.
    pub fn label(&self) -> String {
        if self.btf {
            format!("{}+btf", self.kind)
        } else {
            self.kind.to_string()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.theta();
        let h = &self.human;
        let checks = [
            (lo.is_finite() && hi.is_finite() && lo <= hi, "theta_min <= theta_max"),
            ((0.0..=1.0).contains(&self.spin_noise), "spin_noise in [0, 1]"),
            (
                [h.amp_roll, h.amp_pitch, h.amp_yaw, h.drift_pitch, h.drift_yaw]
                    .iter()
                    .all(|&x| x >= 0.0),
                "human maxima >= 0",
            ),
            (
                [h.sigma_roll, h.sigma_pitch, h.sigma_yaw].iter().all(|&x| x >= 0.0),
                "human sigmas >= 0",
            ),
            (h.omega_min <= h.omega_max, "omega_min <= omega_max"),
            (
                self.kind != MotionKind::Random || lo.ceil() <= hi.floor(),
                "random motion needs an integer in [theta_min, theta_max]",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::invalid(format!("motion spec: {msg}"))),
            None => Ok(()),
        }
    }
}

/// Per-sequence draws of the simulated human motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumanDraw {
    pub amp: [f64; 3],
    pub drift_pitch: f64,
    pub drift_yaw: f64,
    pub omega: f64,
}

impl HumanDraw {
    fn sample(p: &HumanParams, rng: &KeyedRng) -> Self {
        let u = |lane, lo, hi| rng.uniform(Stream::HumanParams, 0, lane, lo, hi);
        HumanDraw {
            amp: [u(0, 0.0, p.amp_roll), u(1, 0.0, p.amp_pitch), u(2, 0.0, p.amp_yaw)],
            drift_pitch: u(3, -p.drift_pitch, p.drift_pitch),
            drift_yaw: u(4, -p.drift_yaw, p.drift_yaw),
            omega: u(5, p.omega_min, p.omega_max),
        }
    }

    /// Delta at (possibly fractional) frame `i` with per-axis noise
    /// `[roll, pitch, yaw]`.
    pub fn delta(&self, i: f64, noise: [f64; 3]) -> EulerAngles {
        let s = (self.omega * i).sin();
        EulerAngles {
            roll: self.amp[0] * s + noise[0],
            pitch: self.amp[1] * s + self.drift_pitch * i + noise[1],
            yaw: self.amp[2] * s + self.drift_yaw * i + noise[2],
        }
    }
}

/// The `n` per-frame Euler deltas `δ[0..n]` of a motion spec.
///
/// A trajectory of `n` frames applies the first `n - 1`; spin deltas sum to
/// exactly one turn over all `n`.
pub fn deltas(spec: &MotionSpec, n: usize) -> Result<Vec<EulerAngles>> {
    spec.validate()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let rng = KeyedRng::new(spec.seed);
    let (lo, hi) = spec.theta();
    let nf = n as f64;
    let out = match spec.kind {
        MotionKind::Static => vec![EulerAngles::ZERO; n],
        MotionKind::Spiral => (0..n)
            .map(|i| {
                let a = (i as f64 * (hi - lo) / nf).rem_euclid(360.0);
                EulerAngles::new(a, 0.0, a)
            })
            .collect(),
        MotionKind::Random => {
            let (lo, hi) = (lo.ceil() as i64, hi.floor() as i64);
            (0..n as u64)
                .map(|i| {
                    let draw = |lane| rng.integer(Stream::RandomMotion, i, lane, lo, hi) as f64;
                    EulerAngles::new(draw(0), draw(1), draw(2))
                })
                .collect()
        }
        MotionKind::Human => {
            let h = &spec.human;
            let draw = HumanDraw::sample(h, &rng);
            (0..n as u64)
                .map(|i| {
                    let noise = [
                        rng.normal(Stream::HumanNoise, i, 0, h.sigma_roll),
                        rng.normal(Stream::HumanNoise, i, 1, h.sigma_pitch),
                        rng.normal(Stream::HumanNoise, i, 2, h.sigma_yaw),
                    ];
                    draw.delta(i as f64, noise)
                })
                .collect()
        }
        MotionKind::SpinX | MotionKind::SpinY | MotionKind::SpinZ => {
            spin_steps(n, spec.spin_noise, &rng)
                .into_iter()
                .map(|t| match spec.kind {
                    MotionKind::SpinX => EulerAngles::new(t, 0.0, 0.0),
                    MotionKind::SpinY => EulerAngles::new(0.0, 0.0, t),
                    _ => EulerAngles::new(0.0, t, 0.0),
                })
                .collect()
        }
    };
    Ok(out)
}

/// `360/n + ε_i` with `ε_i ~ U(-η·360/n, η·360/n)` mean-centred.
pub fn spin_steps(n: usize, eta: f64, rng: &KeyedRng) -> Vec<f64> {
    let step = 360.0 / n as f64;
    let mut eps: Vec<f64> = (0..n as u64)
        .map(|i| rng.uniform(Stream::SpinNoise, i, 0, -eta * step, eta * step))
        .collect();
    let mean = eps.iter().sum::<f64>() / n as f64;
    eps.iter_mut().for_each(|e| *e -= mean);
    eps.into_iter().map(|e| step + e).collect()
}

/// Per-frame camera-to-world rotations and intrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    rotations: Vec<Rotation>,
    intrinsics: Vec<Intrinsics>,
}

impl Trajectory {
    pub fn new(rotations: Vec<Rotation>, intrinsics: Vec<Intrinsics>) -> Result<Self> {
        if rotations.is_empty() {
            return Err(Error::invalid("trajectory needs at least one frame"));
        }
        if rotations.len() != intrinsics.len() {
            return Err(Error::LengthMismatch {
                what: "trajectory intrinsics".into(),
                expected: rotations.len(),
                got: intrinsics.len(),
            });
        }
        for k in &intrinsics {
            k.validate()?;
        }
        Ok(Trajectory { rotations, intrinsics })
    }

    pub fn constant_intrinsics(rotations: Vec<Rotation>, k: Intrinsics) -> Result<Self> {
        let n = rotations.len();
        Trajectory::new(rotations, vec![k; n])
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn intrinsics(&self) -> &[Intrinsics] {
        &self.intrinsics
    }
}

/// Runs a motion strategy from `r0` for `n` frames.
pub fn generate(spec: &MotionSpec, n: usize, r0: Rotation, k: Intrinsics) -> Result<Trajectory> {
    if n < 2 {
        return Err(Error::invalid(format!("trajectory needs >= 2 frames, got {n}")));
    }
    let steps = deltas(spec, n)?;
    let mut rotations = Vec::with_capacity(n);
    let mut current = r0;
    rotations.push(current);
    for (i, d) in steps.iter().take(n - 1).enumerate() {
        current = current * euler_to_rotation(*d);
        if (i + 1) % REORTHO_INTERVAL == 0 {
            current = procrustes_so3(&current.matrix())?;
        }
        rotations.push(current);
    }
    Trajectory::constant_intrinsics(rotations, k)
}

/// Frame window `[i_s, i_e)` replaced by back-to-front mirroring.
pub fn btf_window(n: usize, seed: u64) -> Result<(usize, usize)> {
    let m = n / 2;
    let n_min = n / 2;
    let n_max = n.saturating_sub(2 * BTF_BUFFER);
    let first_even = n_min + n_min % 2;
    if first_even > n_max || first_even < 4 {
        return Err(Error::invalid(format!(
            "{n} frames is too short for back-to-front mirroring"
        )));
    }
    let choices = (n_max - first_even) / 2;
    let pick = KeyedRng::new(seed).integer(Stream::Btf, 0, 0, 0, choices as i64) as usize;
    let k = first_even + 2 * pick;
    let i_s = m - k / 2;
    Ok((i_s, i_s + k))
}

/// Replaces a window around the midpoint of `base` with a palindromic
/// sequence: `inner` motion runs forward from `base[i_s]` for `k/2` frames,
/// the last forward pose is held for one frame, then the forward poses
/// replay in reverse. Frames outside the window are unchanged.
pub fn apply_btf(base: &Trajectory, inner: &MotionSpec, seed: u64) -> Result<Trajectory> {
    let (i_s, i_e) = btf_window(base.len(), seed)?;
    let k_f = (i_e - i_s) / 2;
    let inner = MotionSpec { btf: false, ..*inner };
    let fwd = generate(&inner, k_f, base.rotations[i_s], base.intrinsics[i_s])?;
    let fwd = fwd.rotations();
    let segment = fwd
        .iter()
        .chain(std::iter::once(&fwd[k_f - 1]))
        .chain(fwd[..k_f - 1].iter().rev());
    let mut rotations = base.rotations.clone();
    for (slot, r) in rotations[i_s..i_e].iter_mut().zip(segment) {
        *slot = *r;
    }
    Trajectory::new(rotations, base.intrinsics.clone())
}

/// Trajectory for `spec`: plain generation, or a static base mirrored with
/// the spec's motion when `spec.btf` is set.
pub fn build_trajectory(spec: &MotionSpec, n: usize, r0: Rotation, k: Intrinsics) -> Result<Trajectory> {
    if spec.btf {
        let base = generate(&MotionSpec::new(MotionKind::Static, spec.seed), n, r0, k)?;
        apply_btf(&base, spec, spec.seed)
    } else {
        generate(spec, n, r0, k)
    }
}

/// Normalized mean direction of the set pixels of an equirectangular mask.
pub fn mask_centroid(mask: &BinaryMask, grid: &EquirectGrid, frame: usize) -> Result<UnitDirection> {
    let mut sum = Vec3::default();
    let mut count = 0usize;
    for (x, y) in mask.true_pixels() {
        sum = sum + equirect_to_direction(x as f64, y as f64, grid).vec();
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyMask { frame });
    }
    let mean = sum * (1.0 / count as f64);
    if mean.norm() < 1e-6 {
        return Err(Error::Degenerate(format!(
            "mask centroid at frame {frame} vanishes (mask spread over the sphere)"
        )));
    }
    UnitDirection::new(mean)
}

/// Rotations that keep the masked object centred: the optical axis follows
/// the mask centroid and the image-down axis stays as close as possible to
/// world `+y` (minimal roll).
pub fn object_centered(masks: &[BinaryMask], grid: &EquirectGrid, k: Intrinsics) -> Result<Trajectory> {
    if masks.is_empty() {
        return Err(Error::invalid("object_centered needs at least one mask"));
    }
    let mut rotations = Vec::with_capacity(masks.len());
    let mut prev_down = Vec3::new(0.0, 0.0, 1.0);
    for (t, mask) in masks.iter().enumerate() {
        if mask.width() != grid.width || mask.height() != grid.height {
            return Err(Error::invalid(format!(
                "mask {t} is {}x{}, grid is {}x{}",
                mask.width(),
                mask.height(),
                grid.width,
                grid.height
            )));
        }
        let c = mask_centroid(mask, grid, t)?;
        let r = Rotation::look_at(c, Vec3::new(0.0, 1.0, 0.0))
            .or_else(|| Rotation::look_at(c, prev_down))
            .ok_or_else(|| Error::Degenerate(format!("no up vector at frame {t}")))?;
        prev_down = r.column(1);
        rotations.push(r);
    }
    Trajectory::constant_intrinsics(rotations, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::angular_distance;

    fn k() -> Intrinsics {
        Intrinsics::from_fov(64, 64, 70.0).unwrap()
    }

    fn max_diff(a: &Rotation, b: &Rotation) -> f64 {
        a.to_row_major()
            .iter()
            .zip(b.to_row_major())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn static_stays_put() {
        let r0 = euler_to_rotation(EulerAngles::new(5.0, 6.0, 7.0));
        let t = generate(&MotionSpec::new(MotionKind::Static, 1), 32, r0, k()).unwrap();
        assert_eq!(t.len(), 32);
        assert!(t.rotations().iter().all(|r| *r == r0));
    }

    #[test]
    fn spin_y_noiseless_steps() {
        let spec = MotionSpec::new(MotionKind::SpinY, 0).with_spin_noise(0.0);
        let d = deltas(&spec, 32).unwrap();
        assert!(d.iter().all(|e| e.yaw == 11.25 && e.pitch == 0.0 && e.roll == 0.0));
        let total = d.iter().fold(Rotation::IDENTITY, |acc, e| acc * euler_to_rotation(*e));
        assert!(max_diff(&total, &Rotation::IDENTITY) < 1e-9);
    }

    #[test]
    fn noisy_spin_sums_to_one_turn() {
        for seed in 0..20 {
            let spec = MotionSpec::new(MotionKind::SpinZ, seed).with_spin_noise(0.5);
            let d = deltas(&spec, 16).unwrap();
            let sum: f64 = d.iter().map(|e| e.roll).sum();
            assert!((sum - 360.0).abs() < 1e-9);
            assert!(d.iter().any(|e| (e.roll - 22.5).abs() > 1e-6));
            assert!(d.iter().all(|e| (e.roll - 22.5).abs() <= 2.0 * 0.5 * 22.5));
        }
    }

    #[test]
    fn spiral_matches_formula() {
        let spec = MotionSpec::new(MotionKind::Spiral, 0).with_theta(-30.0, 1000.0);
        let d = deltas(&spec, 10).unwrap();
        for (i, e) in d.iter().enumerate() {
            let a = (i as f64 * 1030.0 / 10.0).rem_euclid(360.0);
            assert_eq!((e.pitch, e.roll, e.yaw), (a, 0.0, a));
        }
    }

    #[test]
    fn random_draws_integers_in_range() {
        let spec = MotionSpec::new(MotionKind::Random, 3);
        let d = deltas(&spec, 200).unwrap();
        for e in &d {
            for a in [e.pitch, e.roll, e.yaw] {
                assert!(a.fract() == 0.0 && (-2.0..=2.0).contains(&a));
            }
        }
        assert!(d.iter().any(|e| e.pitch == -2.0) && d.iter().any(|e| e.yaw == 2.0));
        assert!(MotionSpec::new(MotionKind::Random, 0).with_theta(0.2, 0.8).validate().is_err());
    }

    #[test]
    fn human_is_periodic_without_drift_or_noise() {
        let p = HumanParams {
            drift_pitch: 0.0,
            drift_yaw: 0.0,
            sigma_roll: 0.0,
            sigma_pitch: 0.0,
            sigma_yaw: 0.0,
            ..HumanParams::default()
        };
        let draw = HumanDraw::sample(&p, &KeyedRng::new(5));
        assert!((0.1..0.5).contains(&draw.omega));
        let period = std::f64::consts::TAU / draw.omega;
        for i in 0..40 {
            let a = draw.delta(i as f64, [0.0; 3]);
            let b = draw.delta(i as f64 + period, [0.0; 3]);
            assert!((a.roll - b.roll).abs() < 1e-9);
            assert!((a.pitch - b.pitch).abs() < 1e-9);
            assert!((a.yaw - b.yaw).abs() < 1e-9);
        }
        let spec = MotionSpec { human: p, ..MotionSpec::new(MotionKind::Human, 5) };
        let d = deltas(&spec, 8).unwrap();
        assert_eq!(d[3], draw.delta(3.0, [0.0; 3]));
    }

    #[test]
    fn generation_is_pure() {
        for kind in MotionKind::ALL {
            let spec = MotionSpec::new(kind, 99);
            let a = generate(&spec, 40, Rotation::IDENTITY, k()).unwrap();
            let b = generate(&spec, 40, Rotation::IDENTITY, k()).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn long_trajectories_stay_orthonormal() {
        for kind in [MotionKind::Random, MotionKind::Human, MotionKind::SpinX] {
            let spec = MotionSpec::new(kind, 4).with_theta(-7.0, 7.0);
            let t = generate(&spec, 10_000, Rotation::IDENTITY, k()).unwrap();
            for r in t.rotations() {
                assert!(r.orthogonality_error() < 1e-9 && (r.det() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn too_few_frames() {
        assert!(generate(&MotionSpec::new(MotionKind::Static, 0), 1, Rotation::IDENTITY, k()).is_err());
    }

    #[test]
    fn btf_window_for_32_frames() {
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..200 {
            let (i_s, i_e) = btf_window(32, seed).unwrap();
            let k = i_e - i_s;
            assert_eq!(i_s, 16 - k / 2);
            seen.insert(k);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![16, 18, 20, 22, 24, 26, 28]);
        assert!(btf_window(6, 0).is_err());
        assert!(btf_window(7, 0).is_err());
    }

    #[test]
    fn btf_is_palindromic_and_local() {
        let base = generate(
            &MotionSpec::new(MotionKind::Human, 1),
            32,
            Rotation::IDENTITY,
            k(),
        )
        .unwrap();
        let inner = MotionSpec::new(MotionKind::SpinZ, 8);
        let out = apply_btf(&base, &inner, 8).unwrap();
        let (i_s, i_e) = btf_window(32, 8).unwrap();
        for i in (0..i_s).chain(i_e..32) {
            assert_eq!(out.rotations()[i], base.rotations()[i]);
        }
        let seg = &out.rotations()[i_s..i_e];
        for j in 0..seg.len() {
            assert_eq!(seg[j], seg[seg.len() - 1 - j]);
        }
        assert_eq!(seg[0], base.rotations()[i_s]);
    }

    #[test]
    fn btf_with_static_inner_on_static_base_is_identity_op() {
        let r0 = euler_to_rotation(EulerAngles::new(1.0, 2.0, 3.0));
        let base = generate(&MotionSpec::new(MotionKind::Static, 0), 32, r0, k()).unwrap();
        let out = apply_btf(&base, &MotionSpec::new(MotionKind::Static, 0), 3).unwrap();
        assert_eq!(out, base);
    }

    #[test]
    fn btf_spin_returns_to_start() {
        let spec = MotionSpec::new(MotionKind::SpinY, 2).with_spin_noise(0.0).with_btf(true);
        let t = build_trajectory(&spec, 32, Rotation::IDENTITY, k()).unwrap();
        let (i_s, i_e) = btf_window(32, 2).unwrap();
        let a = t.rotations()[i_s].rotate(UnitDirection::FORWARD);
        let b = t.rotations()[i_e - 1].rotate(UnitDirection::FORWARD);
        assert!(angular_distance(a, b) < 360.0 / 32.0);
    }

    fn block_mask(grid: &EquirectGrid, x0: usize, y0: usize, w: usize, h: usize) -> BinaryMask {
        let mut m = BinaryMask::filled(grid.width, grid.height, false);
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                m.set(x % grid.width, y, true);
            }
        }
        m
    }

    #[test]
    fn centred_mask_gives_identity() {
        let grid = EquirectGrid::new(128, 64).unwrap();
        // 2x2 block straddling the image centre.
        let masks = vec![block_mask(&grid, 63, 31, 2, 2); 4];
        let t = object_centered(&masks, &grid, k()).unwrap();
        for r in t.rotations() {
            assert!(max_diff(r, &Rotation::IDENTITY) < 1e-6);
        }
    }

    #[test]
    fn longitude_translation_becomes_yaw() {
        let grid = EquirectGrid::new(360, 180).unwrap();
        let masks: Vec<_> = (0..10).map(|t| block_mask(&grid, 170 + 3 * t, 80, 6, 20)).collect();
        let t = object_centered(&masks, &grid, k()).unwrap();
        for w in t.rotations().windows(2) {
            let rel = w[0].transpose() * w[1];
            // Pure yaw: rel = Ry(θ).
            let yaw = rel.matrix()[0][2].atan2(rel.matrix()[2][2]).to_degrees();
            assert!((yaw - 3.0).abs() < 1e-3, "{yaw}");
        }
    }

    #[test]
    fn degenerate_masks_error() {
        let grid = EquirectGrid::new(64, 32).unwrap();
        let empty = BinaryMask::filled(64, 32, false);
        let ok = block_mask(&grid, 10, 10, 2, 2);
        match object_centered(&[ok.clone(), empty], &grid, k()) {
            Err(Error::EmptyMask { frame }) => assert_eq!(frame, 1),
            other => panic!("{other:?}"),
        }
        let mut antipodal = BinaryMask::filled(64, 32, false);
        antipodal.set(0, 15, true);
        antipodal.set(32, 16, true);
        assert!(matches!(object_centered(&[antipodal], &grid, k()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pole_centroid_reuses_previous_up() {
        let grid = EquirectGrid::new(64, 32).unwrap();
        let near = block_mask(&grid, 0, 2, 64, 1);
        let pole = block_mask(&grid, 0, 0, 64, 1);
        let t = object_centered(&[near, pole], &grid, k()).unwrap();
        for r in t.rotations() {
            assert!(r.orthogonality_error() < 1e-12);
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in MotionKind::ALL {
            assert_eq!(kind.name().parse::<MotionKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert!("wobble".parse::<MotionKind>().is_err());
    }
}
