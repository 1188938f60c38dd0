use serde::{Deserialize, Serialize};

use super::{UnitDirection, Vec3};
use crate::error::{Error, Result};

/// Pinhole intrinsics plus the image size they apply to.
///
/// Pixel coordinates are `(i, j) = (column, row)`; integer coordinates are
/// pixel centres and the image covers `[0, width) x [0, height)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Intrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    /// Square-pixel camera with the given horizontal field of view and the
    /// principal point at `(width/2, height/2)`.
    pub fn from_fov(width: usize, height: usize, hfov_deg: f64) -> Result<Self> {
        if !(hfov_deg > 0.0 && hfov_deg < 180.0) {
            return Err(Error::InvalidIntrinsics(format!(
                "horizontal FOV {hfov_deg} deg outside (0, 180)"
            )));
        }
        let f = (width as f64 / 2.0) / (hfov_deg.to_radians() / 2.0).tan();
        Intrinsics::new(f, f, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.fx.is_finite()
            && self.fy.is_finite()
            && self.fx > 0.0
            && self.fy > 0.0
            && self.cx.is_finite()
            && self.cy.is_finite()
            && self.cx >= 0.0
            && self.cy >= 0.0
            && self.cx < self.width as f64
            && self.cy < self.height as f64;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidIntrinsics(format!("{self:?}")))
        }
    }

    /// Horizontal field of view spanned by `[0, width)`, in degrees.
    pub fn hfov_deg(&self) -> f64 {
        let w = self.width as f64;
        ((w - self.cx) / self.fx).atan().to_degrees() + (self.cx / self.fx).atan().to_degrees()
    }

    /// Vertical field of view spanned by `[0, height)`, in degrees.
    pub fn vfov_deg(&self) -> f64 {
        let h = self.height as f64;
        ((h - self.cy) / self.fy).atan().to_degrees() + (self.cy / self.fy).atan().to_degrees()
    }

    /// Half-open image bounds test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= 0.0 && p[1] >= 0.0 && p[0] < self.width as f64 && p[1] < self.height as f64
    }

    /// `normalize(K^-1 (i, j, 1))` without validating `self`.
    pub(crate) fn unproject(&self, p: [f64; 2]) -> UnitDirection {
        let v = Vec3::new((p[0] - self.cx) / self.fx, (p[1] - self.cy) / self.fy, 1.0);
        let n = v.norm();
        UnitDirection::from_unit(v * (1.0 / n))
    }

    pub(crate) fn project(&self, d: UnitDirection) -> Option<[f64; 2]> {
        let d = d.vec();
        if d.z > 0.0 {
            Some([self.fx * d.x / d.z + self.cx, self.fy * d.y / d.z + self.cy])
        } else {
            None
        }
    }

    /// Projects `d` and reports whether it lands inside the image.
    pub(crate) fn sees(&self, d: UnitDirection) -> bool {
        self.project(d).is_some_and(|p| self.contains(p))
    }
}

/// Back-projects pixel `p = (i, j)` to a camera-frame unit direction.
///
/// Pixels outside the image are allowed; the result always has `z > 0`.
pub fn pixel_to_direction(p: [f64; 2], k: &Intrinsics) -> Result<UnitDirection> {
    k.validate()?;
    if !(p[0].is_finite() && p[1].is_finite()) {
        return Err(Error::invalid(format!("non-finite pixel {p:?}")));
    }
    Ok(k.unproject(p))
}

/// Projects a camera-frame direction to pixel coordinates.
///
/// Returns `None` for directions with `z <= 0` (at or behind the image plane).
pub fn direction_to_pixel(d: UnitDirection, k: &Intrinsics) -> Result<Option<[f64; 2]>> {
    k.validate()?;
    Ok(k.project(d))
}
