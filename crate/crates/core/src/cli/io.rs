//! PNG frame and mask directories.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ExtendedColorType, ImageFormat};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{BinaryMask, EquirectFrame, RgbImage};

pub fn frame_name(i: usize) -> String {
    format!("frame_{i:05}.png")
}

/// PNG files of a clip directory in name order.
pub fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")));
    }
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            paths.push(p);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::parse(dir, "no PNG frames found"));
    }
    Ok(paths)
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?
        .to_rgb8();
    let (w, h) = img.dimensions();
    RgbImage::new(w as usize, h as usize, img.into_raw())
}

pub fn save_rgb(path: &Path, img: &RgbImage) -> Result<()> {
    image::save_buffer_with_format(
        path,
        img.data(),
        img.width() as u32,
        img.height() as u32,
        ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
    .map_err(|e| Error::Image(format!("{}: {e}", path.display())))
}

/// Grey values above 127 are set.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = img.dimensions();
    BinaryMask::new(w as usize, h as usize, img.into_raw().into_iter().map(|v| v > 127).collect())
}

/// Stored as 8-bit grey, 0 or 255.
pub fn save_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let data: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    image::save_buffer_with_format(
        path,
        &data,
        mask.width() as u32,
        mask.height() as u32,
        ExtendedColorType::L8,
        ImageFormat::Png,
    )
    .map_err(|e| Error::Image(format!("{}: {e}", path.display())))
}

pub fn load_clip(dir: &Path) -> Result<Vec<EquirectFrame>> {
    frame_paths(dir)?
        .par_iter()
        .map(|p| load_rgb(p).and_then(EquirectFrame::new).map_err(|e| annotate(p, e)))
        .collect()
}

pub fn load_masks(dir: &Path) -> Result<Vec<BinaryMask>> {
    frame_paths(dir)?.par_iter().map(|p| load_mask(p)).collect()
}

fn annotate(path: &Path, e: Error) -> Error {
    match e {
        Error::Image(_) | Error::Io { .. } => e,
        other => Error::parse(path, other.to_string()),
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `frame_00000.png`, `frame_00001.png`, ... into `dir`.
pub fn save_frames(dir: &Path, frames: &[&RgbImage]) -> Result<()> {
    create_dir(dir)?;
    frames
        .par_iter()
        .enumerate()
        .try_for_each(|(i, img)| save_rgb(&dir.join(frame_name(i)), img))
}

pub fn save_masks(dir: &Path, masks: &[BinaryMask]) -> Result<()> {
    create_dir(dir)?;
    masks
        .par_iter()
        .enumerate()
        .try_for_each(|(i, m)| save_mask(&dir.join(frame_name(i)), m))
}
