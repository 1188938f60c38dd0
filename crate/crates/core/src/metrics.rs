//! Angular tracking metrics: thresholded accuracy `<δ` and mean angular
//! distance `AD`, over all points and split by in-frame / out-of-frame
//! ground truth.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::angular_distance;
use crate::tracks::{DirectionTrack, DirectionTrackSet};

/// Angular thresholds `m · degrees_per_pixel`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdConfig {
    pub degrees_per_pixel: f64,
    pub multipliers: Vec<f64>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            degrees_per_pixel: 0.2755,
            multipliers: vec![1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        let increasing = self.multipliers.windows(2).all(|w| w[0] < w[1]);
        if !(self.degrees_per_pixel > 0.0 && self.degrees_per_pixel.is_finite())
            || self.multipliers.is_empty()
            || !increasing
            || self.multipliers[0] <= 0.0
        {
            return Err(Error::invalid(format!("threshold config {self:?}")));
        }
        Ok(())
    }

    /// Thresholds in degrees.
    pub fn thresholds(&self) -> Vec<f64> {
        self.multipliers.iter().map(|m| m * self.degrees_per_pixel).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    All,
    InFrame,
    OutOfFrame,
}

/// Counts and sums over the `(track, frame)` pairs of one split.
#[derive(Debug, Clone, PartialEq)]
struct Accumulator {
    count: usize,
    within: Vec<usize>,
    ad_sum: f64,
}

impl Accumulator {
    fn new(n_thresholds: usize) -> Self {
        Accumulator {
            count: 0,
            within: vec![0; n_thresholds],
            ad_sum: 0.0,
        }
    }

    fn push(&mut self, angle: f64, thresholds: &[f64]) {
        self.count += 1;
        self.ad_sum += angle;
        for (w, t) in self.within.iter_mut().zip(thresholds) {
            if angle < *t {
                *w += 1;
            }
        }
    }

    fn merged(&self, o: &Accumulator) -> Accumulator {
        Accumulator {
            count: self.count + o.count,
            within: self.within.iter().zip(&o.within).map(|(a, b)| a + b).collect(),
            ad_sum: self.ad_sum + o.ad_sum,
        }
    }

    fn metrics(&self) -> SplitMetrics {
        if self.count == 0 {
            return SplitMetrics {
                count: 0,
                fractions: None,
                delta_avg: None,
                ad: None,
            };
        }
        let n = self.count as f64;
        let fractions: Vec<f64> = self.within.iter().map(|&w| w as f64 / n).collect();
        let delta_avg = fractions.iter().sum::<f64>() / fractions.len() as f64;
        SplitMetrics {
            count: self.count,
            fractions: Some(fractions),
            delta_avg: Some(delta_avg),
            ad: Some(self.ad_sum / n),
        }
    }
}

/// Metrics of one split. Empty splits have every value absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractions: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_avg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Splits<T> {
    pub all: T,
    pub in_frame: T,
    pub out_of_frame: T,
}

impl<T> Splits<T> {
    pub fn get(&self, split: Split) -> &T {
        match split {
            Split::All => &self.all,
            Split::InFrame => &self.in_frame,
            Split::OutOfFrame => &self.out_of_frame,
        }
    }
}

/// Pairs every ground-truth track with the prediction of the same id.
fn align<'a>(pred: &'a DirectionTrackSet, gt: &'a DirectionTrackSet) -> Result<Vec<(&'a DirectionTrack, &'a DirectionTrack)>> {
    gt.validate(true)?;
    pred.validate(false)?;
    if pred.frames != gt.frames {
        return Err(Error::Misaligned(format!(
            "clip {}: prediction has {} frames, ground truth {}",
            gt.clip_id, pred.frames, gt.frames
        )));
    }
    let by_id: HashMap<u32, &DirectionTrack> = pred.tracks.iter().map(|t| (t.id, t)).collect();
    let mut gt_sorted: Vec<&DirectionTrack> = gt.tracks.iter().collect();
    gt_sorted.sort_by_key(|t| t.id);
    let missing: Vec<u32> = gt_sorted
        .iter()
        .filter(|t| !by_id.contains_key(&t.id))
        .map(|t| t.id)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Misaligned(format!(
            "clip {}: predictions missing track ids {missing:?}",
            gt.clip_id
        )));
    }
    Ok(gt_sorted.into_iter().map(|g| (by_id[&g.id], g)).collect())
}

fn accumulate(pred: &DirectionTrackSet, gt: &DirectionTrackSet, thresholds: &[f64]) -> Result<Splits<Accumulator>> {
    let pairs = align(pred, gt)?;
    let mut inside = Accumulator::new(thresholds.len());
    let mut outside = Accumulator::new(thresholds.len());
    for (p, g) in pairs {
        for ((pd, gd), &flag) in p.directions.iter().zip(&g.directions).zip(&g.in_frame) {
            let angle = angular_distance(*pd, *gd);
            if flag {
                inside.push(angle, thresholds);
            } else {
                outside.push(angle, thresholds);
            }
        }
    }
    Ok(Splits {
        all: inside.merged(&outside),
        in_frame: inside,
        out_of_frame: outside,
    })
}

/// Per-threshold fractions and their mean, `None` for an empty split.
pub fn delta_accuracy(
    pred: &DirectionTrackSet,
    gt: &DirectionTrackSet,
    cfg: &ThresholdConfig,
    split: Split,
) -> Result<Option<(Vec<f64>, f64)>> {
    cfg.validate()?;
    let m = clip_split(pred, gt, cfg, split)?;
    Ok(m.fractions.zip(m.delta_avg))
}

/// Mean angular distance in degrees, `None` for an empty split.
pub fn mean_angular_distance(pred: &DirectionTrackSet, gt: &DirectionTrackSet, split: Split) -> Result<Option<f64>> {
    Ok(clip_split(pred, gt, &ThresholdConfig::default(), split)?.ad)
}

fn clip_split(pred: &DirectionTrackSet, gt: &DirectionTrackSet, cfg: &ThresholdConfig, split: Split) -> Result<SplitMetrics> {
    let thresholds = cfg.thresholds();
    let acc = accumulate(pred, gt, &thresholds)?;
    Ok(acc.get(split).metrics())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipMetrics {
    pub clip_id: String,
    pub motion_kind: String,
    pub category: String,
    pub splits: Splits<SplitMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    /// `None` when `values` is empty.
    pub fn of(values: &[f64]) -> Option<MeanStd> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(MeanStd { mean, std: var.sqrt() })
    }
}

/// Mean ± std across clips; clips whose split is empty are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub clips: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_avg: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ad: Option<MeanStd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractions: Option<Vec<MeanStd>>,
}

impl SplitSummary {
    fn over<'a>(clips: impl Iterator<Item = &'a SplitMetrics> + Clone) -> Self {
        let present: Vec<&SplitMetrics> = clips.filter(|m| m.count > 0).collect();
        let col = |f: &dyn Fn(&SplitMetrics) -> f64| present.iter().map(|m| f(m)).collect::<Vec<_>>();
        let n_thr = present.first().and_then(|m| m.fractions.as_ref()).map_or(0, Vec::len);
        SplitSummary {
            clips: present.len(),
            delta_avg: MeanStd::of(&col(&|m| m.delta_avg.unwrap_or_default())),
            ad: MeanStd::of(&col(&|m| m.ad.unwrap_or_default())),
            fractions: (!present.is_empty()).then(|| {
                (0..n_thr)
                    .map(|i| {
                        MeanStd::of(&col(&|m| m.fractions.as_ref().map_or(0.0, |f| f[i])))
                            .expect("non-empty")
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub clips: usize,
    pub splits: Splits<SplitSummary>,
}

impl GroupSummary {
    fn over(clips: &[&ClipMetrics]) -> Self {
        let pick = |s: Split| SplitSummary::over(clips.iter().map(move |c| c.splits.get(s)));
        GroupSummary {
            clips: clips.len(),
            splits: Splits {
                all: pick(Split::All),
                in_frame: pick(Split::InFrame),
                out_of_frame: pick(Split::OutOfFrame),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub thresholds_deg: Vec<f64>,
    pub clips: Vec<ClipMetrics>,
    /// Headline numbers: per-clip values averaged across clips.
    pub per_clip: GroupSummary,
    /// Every `(track, frame)` pair of every clip pooled.
    pub per_point: Splits<SplitMetrics>,
    pub by_motion_kind: BTreeMap<String, GroupSummary>,
    pub by_category: BTreeMap<String, GroupSummary>,
}

/// Scores predictions against ground truth, clip by clip.
///
/// Clips are matched by `clip_id`; both sides must contain the same set.
pub fn evaluate(pred: &[DirectionTrackSet], gt: &[DirectionTrackSet], cfg: &ThresholdConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let thresholds = cfg.thresholds();

    let mut pred_by_id: BTreeMap<&str, &DirectionTrackSet> = BTreeMap::new();
    for p in pred {
        if pred_by_id.insert(&p.clip_id, p).is_some() {
            return Err(Error::Misaligned(format!("duplicate prediction clip {}", p.clip_id)));
        }
    }
    let mut gt_by_id: BTreeMap<&str, &DirectionTrackSet> = BTreeMap::new();
    for g in gt {
        if gt_by_id.insert(&g.clip_id, g).is_some() {
            return Err(Error::Misaligned(format!("duplicate ground-truth clip {}", g.clip_id)));
        }
    }
    let missing: Vec<&str> = gt_by_id.keys().filter(|k| !pred_by_id.contains_key(*k)).copied().collect();
    let extra: Vec<&str> = pred_by_id.keys().filter(|k| !gt_by_id.contains_key(*k)).copied().collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::Misaligned(format!(
            "clip ids differ: missing predictions for {missing:?}, unexpected predictions for {extra:?}"
        )));
    }
    if gt_by_id.is_empty() {
        return Err(Error::Misaligned("no clips to evaluate".into()));
    }

    let pairs: Vec<(&DirectionTrackSet, &DirectionTrackSet)> =
        gt_by_id.iter().map(|(id, g)| (pred_by_id[id], *g)).collect();
    let accs = pairs
        .par_iter()
        .map(|(p, g)| accumulate(p, g, &thresholds))
        .collect::<Result<Vec<_>>>()?;

    let clips: Vec<ClipMetrics> = pairs
        .iter()
        .zip(&accs)
        .map(|((_, g), a)| ClipMetrics {
            clip_id: g.clip_id.clone(),
            motion_kind: g.meta.motion_kind.clone(),
            category: g.meta.category.clone(),
            splits: Splits {
                all: a.all.metrics(),
                in_frame: a.in_frame.metrics(),
                out_of_frame: a.out_of_frame.metrics(),
            },
        })
        .collect();

    let empty = Accumulator::new(thresholds.len());
    let pooled = accs.iter().fold(
        Splits {
            all: empty.clone(),
            in_frame: empty.clone(),
            out_of_frame: empty,
        },
        |acc, a| Splits {
            all: acc.all.merged(&a.all),
            in_frame: acc.in_frame.merged(&a.in_frame),
            out_of_frame: acc.out_of_frame.merged(&a.out_of_frame),
        },
    );

    let group_by = |key: &dyn Fn(&ClipMetrics) -> &str| {
        let mut groups: BTreeMap<String, Vec<&ClipMetrics>> = BTreeMap::new();
        for c in &clips {
            groups.entry(key(c).to_string()).or_default().push(c);
        }
        groups
            .into_iter()
            .map(|(k, v)| (k, GroupSummary::over(&v)))
            .collect::<BTreeMap<_, _>>()
    };

    let all_refs: Vec<&ClipMetrics> = clips.iter().collect();
    Ok(EvalReport {
        thresholds_deg: thresholds,
        per_clip: GroupSummary::over(&all_refs),
        per_point: Splits {
            all: pooled.all.metrics(),
            in_frame: pooled.in_frame.metrics(),
            out_of_frame: pooled.out_of_frame.metrics(),
        },
        by_motion_kind: group_by(&|c| &c.motion_kind),
        by_category: group_by(&|c| &c.category),
        clips,
    })
}

/// Plain-text table: one row per group with δ and AD for all / IF / OOF.
pub fn render_table(report: &EvalReport) -> String {
    let mut rows: Vec<(String, &GroupSummary)> = vec![("all clips".to_string(), &report.per_clip)];
    rows.extend(report.by_motion_kind.iter().map(|(k, g)| (format!("motion: {}", or_dash(k)), g)));
    rows.extend(report.by_category.iter().map(|(k, g)| (format!("category: {}", or_dash(k)), g)));

    let cell = |m: Option<MeanStd>| match m {
        Some(m) => format!("{:.4} ±{:.4}", m.mean, m.std),
        None => "n/a".to_string(),
    };
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<label_w$} | {:>6} | {:>16} | {:>16} | {:>16} | {:>17} | {:>17} | {:>17}",
        "group", "clips", "<δ all", "<δ IF", "<δ OOF", "AD all", "AD IF", "AD OOF"
    );
    for (label, g) in rows {
        let s = &g.splits;
        let _ = writeln!(
            out,
            "{:<label_w$} | {:>6} | {:>16} | {:>16} | {:>16} | {:>17} | {:>17} | {:>17}",
            label,
            g.clips,
            cell(s.all.delta_avg),
            cell(s.in_frame.delta_avg),
            cell(s.out_of_frame.delta_avg),
            cell(s.all.ad),
            cell(s.in_frame.ad),
            cell(s.out_of_frame.ad),
        );
    }
    out
}

fn or_dash(s: &str) -> &str {
    if s.is_empty() {
        "-"
    } else {
        s
    }
}
