//! Sphere and camera geometry shared by every other module.

mod camera;
mod equirect;
mod rotation;
mod svd;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use camera::{direction_to_pixel, pixel_to_direction, Intrinsics};
pub use equirect::{direction_to_equirect, equirect_to_direction, EquirectGrid};
pub(crate) use equirect::{from_lon_lat, lon_lat};
pub use rotation::{euler_to_rotation, rotate_world_to_camera, EulerAngles, Rotation};
pub use svd::{procrustes_so3, svd3, Svd3};

/// Plain 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A 3-vector of unit length.
///
/// Serialized as three reals. Deserialization renormalizes inputs whose norm
/// is off by more than rounding, so externally produced predictions need not
/// be exactly unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitDirection(Vec3);

impl UnitDirection {
    pub const FORWARD: UnitDirection = UnitDirection(Vec3::new(0.0, 0.0, 1.0));

    /// Normalizes `v`. Fails on zero-length or non-finite input.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n <= f64::MIN_POSITIVE {
            return Err(Error::Degenerate(format!(
                "cannot normalize vector {:?}",
                v.to_array()
            )));
        }
        if (n - 1.0).abs() <= 1e-15 {
            return Ok(UnitDirection(v));
        }
        Ok(UnitDirection(v * (1.0 / n)))
    }

    /// Wraps a vector the caller knows to be unit length.
    pub(crate) fn from_unit(v: Vec3) -> Self {
        debug_assert!((v.norm() - 1.0).abs() < 1e-9, "not unit: {v:?}");
        UnitDirection(v)
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn z(self) -> f64 {
        self.0.z
    }

    pub fn vec(self) -> Vec3 {
        self.0
    }

    pub fn to_array(self) -> [f64; 3] {
        self.0.to_array()
    }
}

impl TryFrom<[f64; 3]> for UnitDirection {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        UnitDirection::new(a.into())
    }
}

impl From<UnitDirection> for [f64; 3] {
    fn from(d: UnitDirection) -> Self {
        d.to_array()
    }
}

/// Angle between two directions in degrees, in `[0, 180]`.
///
/// Uses `atan2(|a x b|, a . b)`, which stays accurate for nearly parallel and
/// nearly antiparallel pairs where `acos` loses precision.
pub fn angular_distance(a: UnitDirection, b: UnitDirection) -> f64 {
    let (a, b) = (a.vec(), b.vec());
    a.cross(b).norm().atan2(a.dot(b)).to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(x: f64, y: f64, z: f64) -> UnitDirection {
        UnitDirection::new(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn angular_distance_basics() {
        let a = dir(0.3, -0.2, 0.9);
        assert_eq!(angular_distance(a, a), 0.0);
        assert!((angular_distance(dir(1.0, 0.0, 0.0), dir(0.0, 1.0, 0.0)) - 90.0).abs() < 1e-12);
        assert_eq!(angular_distance(dir(0.0, 0.0, 1.0), dir(0.0, 0.0, -1.0)), 180.0);
    }

    #[test]
    fn tiny_angles_are_resolved() {
        let eps = 1e-9_f64;
        let a = dir(0.0, 0.0, 1.0);
        let b = dir(eps.sin(), 0.0, eps.cos());
        let got = angular_distance(a, b).to_radians();
        assert!((got - eps).abs() < 1e-18, "{got}");
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(UnitDirection::new(Vec3::default()).is_err());
        assert!(UnitDirection::new(Vec3::new(f64::NAN, 0.0, 1.0)).is_err());
    }

    #[test]
    fn deserialization_renormalizes() {
        let d: UnitDirection = serde_json::from_str("[0.0, 0.0, 2.0]").unwrap();
        assert_eq!(d.to_array(), [0.0, 0.0, 1.0]);
        assert!(serde_json::from_str::<UnitDirection>("[0.0, 0.0, 0.0]").is_err());
    }
}
