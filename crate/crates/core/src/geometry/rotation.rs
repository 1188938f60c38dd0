use std::ops::Mul;

use serde::{Deserialize, Serialize};

use super::{UnitDirection, Vec3};
use crate::error::{Error, Result};

/// Element of SO(3), stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

/// Tolerance applied when reading rotations from files.
const PARSE_TOL: f64 = 1e-6;

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Accepts `m` if it is a rotation within `tol` per entry of `RᵀR = I`
    /// and within `tol` of `det = 1`.
    pub fn from_matrix(m: [[f64; 3]; 3], tol: f64) -> Result<Self> {
        let r = Rotation { m };
        if r.orthogonality_error() <= tol && (r.det() - 1.0).abs() <= tol {
            Ok(r)
        } else {
            Err(Error::invalid(format!("matrix is not a rotation: {m:?}")))
        }
    }

    pub(crate) fn from_matrix_unchecked(m: [[f64; 3]; 3]) -> Self {
        Rotation { m }
    }

    /// Rotation whose columns are `x`, `y`, `z`.
    pub(crate) fn from_columns(x: Vec3, y: Vec3, z: Vec3) -> Self {
        Rotation {
            m: [[x.x, y.x, z.x], [x.y, y.y, z.y], [x.z, y.z, z.z]],
        }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn column(&self, c: usize) -> Vec3 {
        Vec3::new(self.m[0][c], self.m[1][c], self.m[2][c])
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn transpose(&self) -> Rotation {
        let m = &self.m;
        Rotation {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn det(&self) -> f64 {
        det3(&self.m)
    }

    /// Largest entry of `|RᵀR - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let rtr = self.transpose() * *self;
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((rtr.m[i][j] - target).abs());
            }
        }
        worst
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// `R·d`, renormalized.
    pub fn rotate(&self, d: UnitDirection) -> UnitDirection {
        renormalize(self.apply(d.vec()))
    }

    pub fn rx(deg: f64) -> Rotation {
        let (s, c) = deg.to_radians().sin_cos();
        Rotation {
            m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
        }
    }

    pub fn ry(deg: f64) -> Rotation {
        let (s, c) = deg.to_radians().sin_cos();
        Rotation {
            m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        }
    }

    pub fn rz(deg: f64) -> Rotation {
        let (s, c) = deg.to_radians().sin_cos();
        Rotation {
            m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Right-handed rotation by `angle_rad` about unit `axis` (Rodrigues).
    pub fn from_axis_angle(axis: UnitDirection, angle_rad: f64) -> Rotation {
        let (s, c) = angle_rad.sin_cos();
        let t = 1.0 - c;
        let Vec3 { x, y, z } = axis.vec();
        Rotation {
            m: [
                [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
                [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
                [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
            ],
        }
    }

    /// Shortest-arc rotation taking `from` onto `to`.
    ///
    /// Antipodal inputs have no unique shortest arc; a half turn about an
    /// axis orthogonal to `from` is returned.
    pub fn between(from: UnitDirection, to: UnitDirection) -> Rotation {
        let (a, b) = (from.vec(), to.vec());
        let axis = a.cross(b);
        let s = axis.norm();
        let c = a.dot(b);
        if s < 1e-15 {
            if c > 0.0 {
                return Rotation::IDENTITY;
            }
            let helper = if a.x.abs() < 0.9 {
                Vec3::new(1.0, 0.0, 0.0)
            } else {
                Vec3::new(0.0, 1.0, 0.0)
            };
            let axis = UnitDirection::new(a.cross(helper)).expect("non-parallel helper");
            return Rotation::from_axis_angle(axis, std::f64::consts::PI);
        }
        let axis = UnitDirection::from_unit(axis * (1.0 / s));
        Rotation::from_axis_angle(axis, s.atan2(c))
    }

    /// Camera-to-world rotation whose optical axis is `forward` and whose
    /// image-down axis is as close as possible to `down`.
    ///
    /// Returns `None` when `forward` and `down` are (nearly) parallel.
    pub fn look_at(forward: UnitDirection, down: Vec3) -> Option<Rotation> {
        let z = forward.vec();
        let y = down - z * down.dot(z);
        let n = y.norm();
        if n < 1e-6 {
            return None;
        }
        let y = y * (1.0 / n);
        let x = y.cross(z);
        Some(Rotation::from_columns(x, y, z))
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, o: Rotation) -> Rotation {
        let (a, b) = (&self.m, &o.m);
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Rotation { m }
    }
}

impl TryFrom<[f64; 9]> for Rotation {
    type Error = Error;
    fn try_from(a: [f64; 9]) -> Result<Self> {
        Rotation::from_matrix(
            [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]],
            PARSE_TOL,
        )
    }
}

impl From<Rotation> for [f64; 9] {
    fn from(r: Rotation) -> Self {
        r.to_row_major()
    }
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn renormalize(v: Vec3) -> UnitDirection {
    UnitDirection::from_unit(v * (1.0 / v.norm()))
}

/// Pitch `α` about x, roll `β` about z and yaw `γ` about y, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub const ZERO: EulerAngles = EulerAngles {
        pitch: 0.0,
        roll: 0.0,
        yaw: 0.0,
    };

    pub fn new(pitch: f64, roll: f64, yaw: f64) -> Self {
        EulerAngles { pitch, roll, yaw }
    }
}

/// `Rx(pitch) · Ry(yaw) · Rz(roll)`.
///
/// With the y-down camera frame, positive pitch tilts the optical axis
/// toward `-y` (up), positive yaw turns it toward `+x` (right) and positive
/// roll turns the image-right axis toward `+y`.
pub fn euler_to_rotation(e: EulerAngles) -> Rotation {
    Rotation::rx(e.pitch) * Rotation::ry(e.yaw) * Rotation::rz(e.roll)
}

/// Expresses a world-frame direction in the camera frame of camera-to-world
/// rotation `r`, i.e. returns `Rᵀ·d`.
pub fn rotate_world_to_camera(d_world: UnitDirection, r: &Rotation) -> UnitDirection {
    r.transpose().rotate(d_world)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::geometry::angular_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_rotation(rng: &mut impl Rng) -> Rotation {
        euler_to_rotation(EulerAngles::new(
            rng.random_range(-180.0..180.0),
            rng.random_range(-180.0..180.0),
            rng.random_range(-180.0..180.0),
        ))
    }

    fn random_dir(rng: &mut impl Rng) -> UnitDirection {
        loop {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if v.norm() > 0.1 && v.norm() <= 1.0 {
                return UnitDirection::new(v).unwrap();
            }
        }
    }

    fn max_diff(a: &Rotation, b: &Rotation) -> f64 {
        a.to_row_major()
            .iter()
            .zip(b.to_row_major())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_and_full_turn() {
        assert_eq!(euler_to_rotation(EulerAngles::ZERO), Rotation::IDENTITY);
        let full = euler_to_rotation(EulerAngles::new(360.0, 0.0, 0.0));
        assert!(max_diff(&full, &Rotation::IDENTITY) < 1e-9);
    }

    #[test]
    fn pitch_90_looks_up() {
        // Rx(90°) = [[1,0,0],[0,0,-1],[0,1,0]]; its third column is (0,-1,0).
        let r = euler_to_rotation(EulerAngles::new(90.0, 0.0, 0.0));
        let f = r.rotate(UnitDirection::FORWARD).to_array();
        assert!(f[0].abs() < 1e-15 && (f[1] + 1.0).abs() < 1e-15 && f[2].abs() < 1e-15);
    }

    #[test]
    fn yaw_90_faces_world_x() {
        let r = euler_to_rotation(EulerAngles::new(0.0, 0.0, 90.0));
        let d = UnitDirection::new(Vec3::new(1.0, 0.0, 0.0)).unwrap();
        let cam = rotate_world_to_camera(d, &r).to_array();
        assert!(cam[0].abs() < 1e-15 && cam[1].abs() < 1e-15 && (cam[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_leaves_direction() {
        let d = UnitDirection::new(Vec3::new(0.2, -0.4, 0.7)).unwrap();
        assert_eq!(rotate_world_to_camera(d, &Rotation::IDENTITY), d);
    }

    #[test]
    fn reversed_order_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let e = EulerAngles::new(
                rng.random_range(-400.0..400.0),
                rng.random_range(-400.0..400.0),
                rng.random_range(-400.0..400.0),
            );
            let inv = Rotation::rz(-e.roll) * Rotation::ry(-e.yaw) * Rotation::rx(-e.pitch);
            let prod = euler_to_rotation(e) * inv;
            assert!(max_diff(&prod, &Rotation::IDENTITY) < 1e-9);
            let r = euler_to_rotation(e);
            assert!(r.orthogonality_error() < 1e-12 && (r.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn world_to_camera_is_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r = random_rotation(&mut rng);
            let (a, b) = (random_dir(&mut rng), random_dir(&mut rng));
            let before = angular_distance(a, b);
            let after = angular_distance(rotate_world_to_camera(a, &r), rotate_world_to_camera(b, &r));
            assert!((before - after).abs() < 1e-9);
            let back = r.rotate(rotate_world_to_camera(a, &r));
            assert!((back.vec() - a.vec()).norm() < 1e-12);
            assert!((rotate_world_to_camera(a, &r).vec().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn angular_distance_is_a_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (a, b, c) = (random_dir(&mut rng), random_dir(&mut rng), random_dir(&mut rng));
            assert_eq!(angular_distance(a, b), angular_distance(b, a));
            assert!(angular_distance(a, c) <= angular_distance(a, b) + angular_distance(b, c) + 1e-9);
        }
    }

    #[test]
    fn between_and_look_at() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let (a, b) = (random_dir(&mut rng), random_dir(&mut rng));
            let r = Rotation::between(a, b);
            assert!(angular_distance(r.rotate(a), b) < 1e-6);
            assert!(r.orthogonality_error() < 1e-12);
            let l = Rotation::look_at(a, Vec3::new(0.0, 1.0, 0.0)).unwrap();
            assert!(l.orthogonality_error() < 1e-12 && (l.det() - 1.0).abs() < 1e-12);
            assert!(angular_distance(l.rotate(UnitDirection::FORWARD), a) < 1e-6);
        }
        let opposite = Rotation::between(UnitDirection::FORWARD, UnitDirection::new(Vec3::new(0.0, 0.0, -1.0)).unwrap());
        assert!((opposite.rotate(UnitDirection::FORWARD).z() + 1.0).abs() < 1e-12);
        assert_eq!(
            Rotation::look_at(UnitDirection::FORWARD, Vec3::new(0.0, 1.0, 0.0)).unwrap(),
            Rotation::IDENTITY
        );
    }

    #[test]
    fn parse_rejects_non_rotation() {
        assert!(serde_json::from_str::<Rotation>("[1,0,0,0,1,0,0,0,-1]").is_err());
        assert!(serde_json::from_str::<Rotation>("[2,0,0,0,1,0,0,0,1]").is_err());
        let r: Rotation = serde_json::from_str("[1,0,0,0,1,0,0,0,1]").unwrap();
        assert_eq!(r, Rotation::IDENTITY);
    }

    proptest! {
        #[test]
        fn euler_rotations_are_proper(p in -360.0..360.0f64, r in -360.0..360.0f64, y in -360.0..360.0f64,
                                      x in -1.0..1.0f64, z in -1.0..1.0f64) {
            let rot = euler_to_rotation(EulerAngles::new(p, r, y));
            prop_assert!(rot.orthogonality_error() < 1e-12);
            prop_assert!((rot.det() - 1.0).abs() < 1e-12);
            let d = UnitDirection::new(Vec3::new(x, 0.5, z)).unwrap();
            let back = rotate_world_to_camera(rot.rotate(d), &rot);
            prop_assert!(angular_distance(back, d) < 1e-9);
        }
    }
}
