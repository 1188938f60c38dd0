//! Rendering perspective views and masks out of equirectangular frames.
//!
//! Every output pixel is an independent inverse lookup, so rows can be
//! split across threads without affecting the bytes produced.

use rayon::prelude::*;

use crate::error::Result;
use crate::frame::{BinaryMask, EquirectFrame, PerspectiveFrame, RgbImage};
use crate::geometry::{
    direction_to_equirect, equirect_to_direction, rotate_world_to_camera, EquirectGrid, Intrinsics,
    Rotation,
};

/// Equirectangular coordinates seen by perspective pixel `(i, j)`.
#[inline]
pub fn lookup_coords(i: usize, j: usize, r: &Rotation, k: &Intrinsics, grid: &EquirectGrid) -> [f64; 2] {
    let d_cam = k.unproject([i as f64, j as f64]);
    direction_to_equirect(r.rotate(d_cam), grid)
}

/// Bilinear sample at continuous coordinates; wraps in `u`, clamps in `v`.
#[inline]
pub fn sample_bilinear(img: &RgbImage, u: f64, v: f64) -> [u8; 3] {
    let (w, h) = (img.width(), img.height());
    let x0f = u.floor();
    let fx = u - x0f;
    let x0 = (x0f as i64).rem_euclid(w as i64) as usize;
    let x1 = (x0 + 1) % w;

    let vc = v.clamp(0.0, (h - 1) as f64);
    let y0f = vc.floor();
    let fy = vc - y0f;
    let y0 = y0f as usize;
    let y1 = (y0 + 1).min(h - 1);

    let data = img.data();
    let at = |x: usize, y: usize, c: usize| data[(y * w + x) * 3 + c] as f64;
    let mut out = [0u8; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let top = at(x0, y0, c) * (1.0 - fx) + at(x1, y0, c) * fx;
        let bottom = at(x0, y1, c) * (1.0 - fx) + at(x1, y1, c) * fx;
        *o = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Nearest-texel lookup index; wraps in `u`, clamps in `v`.
#[inline]
pub fn nearest_index(u: f64, v: f64, width: usize, height: usize) -> usize {
    let x = (u.round() as i64).rem_euclid(width as i64) as usize;
    let y = (v.round().max(0.0) as usize).min(height - 1);
    y * width + x
}

/// Renders the view of camera-to-world rotation `r` through `k`.
pub fn render_perspective(src: &EquirectFrame, r: &Rotation, k: &Intrinsics) -> Result<PerspectiveFrame> {
    k.validate()?;
    let (w, h) = (k.width, k.height);
    let mut data = vec![0u8; w * h * 3];
    data.par_chunks_mut(w * 3).enumerate().for_each(|(j, row)| {
        for i in 0..w {
            let [u, v] = lookup_coords(i, j, r, k, &src.grid);
            row[i * 3..i * 3 + 3].copy_from_slice(&sample_bilinear(&src.image, u, v));
        }
    });
    Ok(PerspectiveFrame {
        intrinsics: *k,
        image: RgbImage::new(w, h, data)?,
    })
}

/// Projects an equirectangular mask into the view of `(r, k)` with
/// nearest-texel sampling.
pub fn project_mask(src: &BinaryMask, r: &Rotation, k: &Intrinsics) -> Result<BinaryMask> {
    k.validate()?;
    let grid = EquirectGrid::new(src.width(), src.height())?;
    let (w, h) = (k.width, k.height);
    let mut bits = vec![false; w * h];
    bits.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        for (i, out) in row.iter_mut().enumerate() {
            let [u, v] = lookup_coords(i, j, r, k, &grid);
            *out = src.bits()[nearest_index(u, v, grid.width, grid.height)];
        }
    });
    BinaryMask::new(w, h, bits)
}

/// Equirectangular pixels whose direction falls inside the viewport of
/// `(r, k)`.
pub fn frustum_on_equirect(r: &Rotation, k: &Intrinsics, grid: &EquirectGrid) -> Result<BinaryMask> {
    k.validate()?;
    grid.validate()?;
    let mut bits = vec![false; grid.len()];
    bits.par_chunks_mut(grid.width).enumerate().for_each(|(v, row)| {
        for (u, out) in row.iter_mut().enumerate() {
            let d = equirect_to_direction(u as f64, v as f64, grid);
            *out = k.sees(rotate_world_to_camera(d, r));
        }
    });
    BinaryMask::new(grid.width, grid.height, bits)
}

/// Greys out everything outside `visible`: those pixels are desaturated and
/// halved in brightness.
pub fn grey_outside(src: &RgbImage, visible: &BinaryMask) -> RgbImage {
    let mut out = src.clone();
    for (px, &keep) in out.data_mut().chunks_exact_mut(3).zip(visible.bits()) {
        if !keep {
            let g = ((299 * px[0] as u32 + 587 * px[1] as u32 + 114 * px[2] as u32) / 2000) as u8;
            px.copy_from_slice(&[g, g, g]);
        }
    }
    out
}
