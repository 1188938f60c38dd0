use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{UnitDirection, Vec3};
use crate::error::{Error, Result};

/// Size of an equirectangular image. Longitude runs left to right over
/// `[-pi, pi)`, latitude top to bottom over `[pi/2, -pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquirectGrid {
    pub width: usize,
    pub height: usize,
}

impl EquirectGrid {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 2 || !width.is_multiple_of(2) || height < 1 {
            return Err(Error::InvalidGrid { width, height });
        }
        Ok(EquirectGrid { width, height })
    }

    pub fn validate(&self) -> Result<()> {
        EquirectGrid::new(self.width, self.height).map(|_| ())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Solid angle covered by pixel row `row`, in steradians.
    pub fn row_solid_angle(&self, row: usize) -> f64 {
        let h = self.height as f64;
        let top = FRAC_PI_2 - row as f64 / h * PI;
        let bottom = FRAC_PI_2 - (row + 1) as f64 / h * PI;
        (top.sin() - bottom.sin()) * TAU / self.width as f64
    }
}

/// Direction through continuous equirectangular coordinates `(u, v)`.
///
/// Integer coordinates are pixel centres. `u` wraps with period `width`.
pub fn equirect_to_direction(u: f64, v: f64, grid: &EquirectGrid) -> UnitDirection {
    let lon = (u + 0.5) / grid.width as f64 * TAU - PI;
    let lat = FRAC_PI_2 - (v + 0.5) / grid.height as f64 * PI;
    let (sl, cl) = lon.sin_cos();
    let (sp, cp) = lat.sin_cos();
    UnitDirection::from_unit(Vec3::new(cp * sl, -sp, cp * cl))
}

/// Inverse of [`equirect_to_direction`]. Returns `u` in `[-0.5, width - 0.5]`;
/// at the poles longitude is undefined and `u` is reported as 0.
pub fn direction_to_equirect(d: UnitDirection, grid: &EquirectGrid) -> [f64; 2] {
    let d = d.vec();
    let lat = (-d.y).clamp(-1.0, 1.0).asin();
    let v = (FRAC_PI_2 - lat) / PI * grid.height as f64 - 0.5;
    if d.x == 0.0 && d.z == 0.0 {
        return [0.0, v];
    }
    let lon = d.x.atan2(d.z);
    let u = (lon + PI) / TAU * grid.width as f64 - 0.5;
    [u, v]
}

/// Longitude and latitude of a direction in radians.
pub(crate) fn lon_lat(d: UnitDirection) -> (f64, f64) {
    let d = d.vec();
    (d.x.atan2(d.z), (-d.y).clamp(-1.0, 1.0).asin())
}

/// Direction at longitude/latitude given in radians.
pub(crate) fn from_lon_lat(lon: f64, lat: f64) -> UnitDirection {
    let (sl, cl) = lon.sin_cos();
    let (sp, cp) = lat.sin_cos();
    UnitDirection::from_unit(Vec3::new(cp * sl, -sp, cp * cl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn centre_is_forward() {
        let g = EquirectGrid::new(64, 32).unwrap();
        let d = equirect_to_direction(31.5, 15.5, &g);
        assert!(close(d.to_array(), [0.0, 0.0, 1.0], 1e-15));
        let uv = direction_to_equirect(UnitDirection::FORWARD, &g);
        assert_eq!(uv, [31.5, 15.5]);
    }

    #[test]
    fn top_edge_is_up_pole() {
        let g = EquirectGrid::new(64, 32).unwrap();
        for u in [0.0, 7.3, 40.0] {
            let d = equirect_to_direction(u, -0.5, &g);
            assert!(close(d.to_array(), [0.0, -1.0, 0.0], 1e-15));
        }
        assert_eq!(direction_to_equirect(d(0.0, -1.0, 0.0), &g), [0.0, -0.5]);
        assert_eq!(direction_to_equirect(d(0.0, 1.0, 0.0), &g), [0.0, 31.5]);
    }

    fn d(x: f64, y: f64, z: f64) -> UnitDirection {
        UnitDirection::new(Vec3::new(x, y, z)).unwrap()
    }

    #[test]
    fn longitude_wraps() {
        let g = EquirectGrid::new(64, 32).unwrap();
        let a = equirect_to_direction(-0.5, 10.0, &g);
        let b = equirect_to_direction(63.5, 10.0, &g);
        assert!(close(a.to_array(), b.to_array(), 1e-12));
        let back = direction_to_equirect(d(0.0, 0.0, -1.0), &g);
        assert_eq!(back[0].rem_euclid(64.0), 63.5);
        assert_eq!(back[1], 15.5);
    }

    #[test]
    fn grid_validation() {
        assert!(EquirectGrid::new(3, 2).is_err());
        assert!(EquirectGrid::new(0, 2).is_err());
        assert!(EquirectGrid::new(4, 0).is_err());
        assert!(EquirectGrid::new(2, 1).is_ok());
    }

    #[test]
    fn row_solid_angles_cover_sphere() {
        let g = EquirectGrid::new(16, 9).unwrap();
        let total: f64 = (0..9).map(|r| g.row_solid_angle(r) * 16.0).sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn equirect_round_trip(u in -0.5..1023.5f64, v in 0.0..511.0f64) {
            let g = EquirectGrid::new(1024, 512).unwrap();
            let [u2, v2] = direction_to_equirect(equirect_to_direction(u, v, &g), &g);
            let du = (u2 - u).rem_euclid(1024.0);
            let du = du.min(1024.0 - du);
            prop_assert!(du < 1e-9 && (v2 - v).abs() < 1e-9, "{} {} -> {} {}", u, v, u2, v2);
        }
    }
}
