//! Quality checks for equirectangular clips: seam continuity, scene
//! dynamics and poster detection.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{EquirectFrame, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Seam,
    Dynamics,
    Poster,
}

impl Check {
    pub const ALL: [Check; 3] = [Check::Seam, Check::Dynamics, Check::Poster];

    pub fn name(self) -> &'static str {
        match self {
            Check::Seam => "seam",
            Check::Dynamics => "dynamics",
            Check::Poster => "poster",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::invalid(format!("unknown check `{s}` (expected seam, dynamics or poster)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationConfig {
    pub checks: Vec<Check>,
    /// Frames sampled evenly across the clip.
    pub sample_frames: usize,
    pub seam_strip_px: usize,
    pub seam_min: f64,
    pub dynamics_min: f64,
    /// Content boxes smaller than this fraction of the frame are suspicious.
    pub poster_area_fraction: f64,
    /// Border mean (on a 0..1 scale) below which the border counts as black.
    pub poster_black_level: f64,
    pub poster_window: usize,
    pub poster_offset: f64,
    /// Clips with at least this fraction of poster frames fail.
    pub poster_max_fraction: f64,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            checks: Check::ALL.to_vec(),
            sample_frames: 10,
            seam_strip_px: 8,
            seam_min: 0.5,
            dynamics_min: 25.0,
            poster_area_fraction: 0.6,
            poster_black_level: 16.0 / 255.0,
            poster_window: 32,
            poster_offset: 8.0,
            poster_max_fraction: 0.5,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_frames == 0 || self.seam_strip_px == 0 || self.poster_window == 0 {
            return Err(Error::invalid("curation sample_frames, seam_strip_px and poster_window must be positive"));
        }
        if !(0.0..=1.0).contains(&self.poster_area_fraction) || !(0.0..=1.0).contains(&self.poster_black_level) {
            return Err(Error::invalid("poster fractions must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Zero-mean normalised cross-correlation between the leftmost and
/// rightmost `strip_px` columns, over all channels.
///
/// A constant strip has no defined correlation and scores 1.0.
pub fn seam_check(frame: &EquirectFrame, strip_px: usize) -> Result<f64> {
    let img = &frame.image;
    let w = img.width();
    if strip_px == 0 || strip_px > w / 4 {
        return Err(Error::invalid(format!("seam strip {strip_px} px outside [1, {}]", w / 4)));
    }
    let mut left = Vec::with_capacity(strip_px * img.height() * 3);
    let mut right = Vec::with_capacity(left.capacity());
    for y in 0..img.height() {
        let row = &img.data()[y * w * 3..(y + 1) * w * 3];
        left.extend(row[..strip_px * 3].iter().map(|&b| b as f64));
        right.extend(row[(w - strip_px) * 3..].iter().map(|&b| b as f64));
    }
    Ok(ncc(&left, &right))
}

fn ncc(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 1.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Mean over pixels of the population temporal variance of luma.
pub fn dynamics_check(frames: &[&RgbImage]) -> Result<f64> {
    if frames.len() < 2 {
        return Err(Error::invalid(format!("dynamics needs at least 2 frames, got {}", frames.len())));
    }
    let (w, h) = (frames[0].width(), frames[0].height());
    if let Some(bad) = frames.iter().position(|f| f.width() != w || f.height() != h) {
        return Err(Error::Misaligned(format!("frame {bad} size differs from frame 0 ({w}x{h})")));
    }
    let grays: Vec<Vec<f64>> = frames.par_iter().map(|f| f.to_gray()).collect();
    let n = grays.len() as f64;
    let total: f64 = (0..w * h)
        .map(|p| {
            // Shifting by the first sample keeps identical frames at exactly 0.
            let base = grays[0][p];
            let mean = grays.iter().map(|g| g[p] - base).sum::<f64>() / n;
            grays.iter().map(|g| (g[p] - base - mean).powi(2)).sum::<f64>() / n
        })
        .sum();
    Ok(total / (w * h) as f64)
}

/// Bounding box `[x0, y0, x1, y1)` in pixels.
pub type BoundingBox = [usize; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosterResult {
    pub flagged: bool,
    /// Box of the largest foreground component; `None` when nothing stands
    /// out from the background.
    pub content_box: Option<BoundingBox>,
    /// Mean luma outside the box on a 0..1 scale.
    pub border_mean: Option<f64>,
}

/// Detects a flat picture surrounded by black borders.
///
/// Foreground pixels are brighter than their local mean minus an offset and
/// not themselves black. A frame is flagged when the largest 8-connected
/// foreground component has a small box and everything outside the box is
/// dark. A frame without foreground is flagged as well.
pub fn poster_check(img: &RgbImage, cfg: &CurationConfig) -> PosterResult {
    let (w, h) = (img.width(), img.height());
    let gray = img.to_gray();
    let local = box_mean(&gray, w, h, cfg.poster_window);
    let black = cfg.poster_black_level * 255.0;
    let fg: Vec<bool> = gray
        .iter()
        .zip(&local)
        .map(|(&g, &m)| g > m - cfg.poster_offset && g >= black)
        .collect();

    let Some(bbox) = largest_component_box(&fg, w, h) else {
        return PosterResult {
            flagged: true,
            content_box: None,
            border_mean: None,
        };
    };
    let [x0, y0, x1, y1] = bbox;
    let (mut sum, mut count) = (0.0, 0usize);
    for y in 0..h {
        for x in 0..w {
            if !(x0..x1).contains(&x) || !(y0..y1).contains(&y) {
                sum += gray[y * w + x];
                count += 1;
            }
        }
    }
    let area = ((x1 - x0) * (y1 - y0)) as f64 / (w * h) as f64;
    let border_mean = (count > 0).then(|| sum / count as f64 / 255.0);
    let flagged = area < cfg.poster_area_fraction && border_mean.is_some_and(|m| m < cfg.poster_black_level);
    PosterResult {
        flagged,
        content_box: Some(bbox),
        border_mean,
    }
}

/// Mean over the `window`-sized square centred on each pixel, clipped at the
/// image border.
fn box_mean(gray: &[f64], w: usize, h: usize, window: usize) -> Vec<f64> {
    let mut integral = vec![0.0; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += gray[y * w + x];
            integral[(y + 1) * (w + 1) + x + 1] = integral[y * (w + 1) + x + 1] + row;
        }
    }
    let half = window / 2;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let (ya, yb) = (y.saturating_sub(half), (y + window - half).min(h));
        for x in 0..w {
            let (xa, xb) = (x.saturating_sub(half), (x + window - half).min(w));
            let s = integral[yb * (w + 1) + xb] - integral[ya * (w + 1) + xb] - integral[yb * (w + 1) + xa]
                + integral[ya * (w + 1) + xa];
            out[y * w + x] = s / ((yb - ya) * (xb - xa)) as f64;
        }
    }
    out
}

fn largest_component_box(fg: &[bool], w: usize, h: usize) -> Option<BoundingBox> {
    let mut seen = vec![false; fg.len()];
    let mut best: Option<(usize, BoundingBox)> = None;
    let mut stack = Vec::new();
    for start in 0..fg.len() {
        if !fg[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let (mut size, mut bbox) = (0usize, [usize::MAX, usize::MAX, 0, 0]);
        while let Some(p) = stack.pop() {
            let (x, y) = (p % w, p / w);
            size += 1;
            bbox = [bbox[0].min(x), bbox[1].min(y), bbox[2].max(x + 1), bbox[3].max(y + 1)];
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let q = ny * w + nx;
                    if fg[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        if best.is_none_or(|(s, _)| size > s) {
            best = Some((size, bbox));
        }
    }
    best.map(|(_, b)| b)
}

/// Indices of `n` evenly spaced frames out of `total`, or all of them when
/// the clip is shorter.
pub fn sample_indices(total: usize, n: usize) -> Vec<usize> {
    if total <= n {
        return (0..total).collect();
    }
    if n == 1 {
        return vec![0];
    }
    (0..n)
        .map(|i| ((i * (total - 1)) as f64 / (n - 1) as f64).round() as usize)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: Check,
    pub score: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_frame: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub frames_total: usize,
    pub sampled: Vec<usize>,
    pub checks: Vec<CheckResult>,
    pub verdict: bool,
    pub failed: Vec<Check>,
}

impl CurationReport {
    pub fn get(&self, check: Check) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == check)
    }
}

/// Runs the enabled checks on evenly spaced frames of a clip and applies
/// the configured thresholds. `frames` holds the whole clip.
pub fn curate_frames(frames: &[EquirectFrame], cfg: &CurationConfig) -> Result<CurationReport> {
    cfg.validate()?;
    if frames.is_empty() {
        return Err(Error::invalid("clip has no frames"));
    }
    let sampled = sample_indices(frames.len(), cfg.sample_frames);
    let picked: Vec<&EquirectFrame> = sampled.iter().map(|&i| &frames[i]).collect();

    let mut checks = Vec::new();
    let mut enabled = cfg.checks.clone();
    enabled.sort();
    enabled.dedup();
    for check in enabled {
        let result = match check {
            Check::Seam => {
                let per_frame = picked
                    .par_iter()
                    .map(|f| seam_check(f, cfg.seam_strip_px))
                    .collect::<Result<Vec<_>>>()?;
                let score = per_frame.iter().sum::<f64>() / per_frame.len() as f64;
                CheckResult {
                    check,
                    score,
                    threshold: cfg.seam_min,
                    pass: score >= cfg.seam_min,
                    per_frame,
                }
            }
            Check::Dynamics => {
                let images: Vec<&RgbImage> = picked.iter().map(|f| &f.image).collect();
                let score = dynamics_check(&images)?;
                CheckResult {
                    check,
                    score,
                    threshold: cfg.dynamics_min,
                    pass: score >= cfg.dynamics_min,
                    per_frame: Vec::new(),
                }
            }
            Check::Poster => {
                let per_frame: Vec<f64> = picked
                    .par_iter()
                    .map(|f| if poster_check(&f.image, cfg).flagged { 1.0 } else { 0.0 })
                    .collect();
                let score = per_frame.iter().sum::<f64>() / per_frame.len() as f64;
                CheckResult {
                    check,
                    score,
                    threshold: cfg.poster_max_fraction,
                    pass: score < cfg.poster_max_fraction,
                    per_frame,
                }
            }
        };
        checks.push(result);
    }
    let failed: Vec<Check> = checks.iter().filter(|c| !c.pass).map(|c| c.check).collect();
    Ok(CurationReport {
        frames_total: frames.len(),
        sampled,
        verdict: failed.is_empty(),
        failed,
        checks,
    })
}
