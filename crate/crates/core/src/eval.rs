//! Retrieval metrics: IoU, TPR and per-sequence / per-difficulty reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cascade::FrameResult;
use crate::error::{Error, Result};
use crate::model::{BBox, Difficulty};

pub const DEFAULT_CORRECT_IOU: f64 = 0.4;

/// Intersection over union of two half-open rectangles; 0 when disjoint.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// IoU of each evaluated frame (frame ≥ `skip_frames` with a ground-truth
/// box); a result without a chosen box scores 0. Results are matched to
/// frames by number; every evaluated frame needs exactly one result.
pub fn evaluated_ious(
    results: &[FrameResult],
    gts: &[Option<BBox>],
    skip_frames: usize,
) -> Result<Vec<(usize, f64)>> {
    if results.is_empty() {
        return Err(Error::UndefinedMetric("the results stream is empty".into()));
    }
    let mut by_frame: Vec<Option<&FrameResult>> = vec![None; gts.len()];
    for r in results {
        let slot = by_frame.get_mut(r.frame).ok_or_else(|| {
            Error::FrameRange(format!(
                "result for frame {} but the annotations have {} frames",
                r.frame,
                gts.len()
            ))
        })?;
        if slot.replace(r).is_some() {
            return Err(Error::FrameRange(format!(
                "two results for frame {}",
                r.frame
            )));
        }
    }
    let mut out = Vec::new();
    for (frame, gt) in gts.iter().enumerate().skip(skip_frames) {
        let Some(gt) = gt else { continue };
        let r = by_frame[frame]
            .ok_or_else(|| Error::FrameRange(format!("no result for evaluated frame {frame}")))?;
        out.push((frame, r.chosen.as_ref().map_or(0.0, |c| iou(c, gt))));
    }
    Ok(out)
}

/// Percentage of evaluated frames whose chosen box has IoU ≥ `theta`.
pub fn tpr(
    results: &[FrameResult],
    gts: &[Option<BBox>],
    theta: f64,
    skip_frames: usize,
) -> Result<f64> {
    let ious = evaluated_ious(results, gts, skip_frames)?;
    if ious.is_empty() {
        return Err(Error::UndefinedMetric("no evaluated frames".into()));
    }
    let correct = ious.iter().filter(|(_, v)| *v >= theta).count();
    Ok(100.0 * correct as f64 / ious.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub sequence_id: String,
    pub difficulty: Difficulty,
    pub tpr_percent: f64,
    pub average_iou: f64,
    pub fraction_iou_ge_04: f64,
    pub evaluated_frame_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSummary {
    pub tpr_percent: f64,
    pub average_iou: f64,
    pub fraction_iou_ge_04: f64,
    pub evaluated_frame_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyRow {
    pub difficulty: Difficulty,
    pub sequence_count: usize,
    pub average_iou: f64,
    pub fraction_iou_ge_04: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub correct_iou_threshold: f64,
    pub skip_frames: usize,
    pub sequences: Vec<SequenceReport>,
    /// Unweighted means over sequences.
    pub global: GlobalSummary,
    pub by_difficulty: Vec<DifficultyRow>,
}

/// One sequence's inputs to [`report`].
pub struct SequenceScore<'a> {
    pub sequence_id: &'a str,
    pub difficulty: Difficulty,
    pub results: &'a [FrameResult],
    pub ground_truth: &'a [Option<BBox>],
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn score_sequence(
    seq: &SequenceScore<'_>,
    theta: f64,
    skip_frames: usize,
) -> Result<SequenceReport> {
    let ious = evaluated_ious(seq.results, seq.ground_truth, skip_frames)?;
    if ious.is_empty() {
        return Err(Error::UndefinedMetric(format!(
            "sequence {} has no evaluated frames",
            seq.sequence_id
        )));
    }
    let n = ious.len() as f64;
    let count = |t: f64| ious.iter().filter(|(_, v)| *v >= t).count() as f64;
    Ok(SequenceReport {
        sequence_id: seq.sequence_id.to_string(),
        difficulty: seq.difficulty,
        tpr_percent: 100.0 * count(theta) / n,
        average_iou: mean(ious.iter().map(|(_, v)| *v)),
        fraction_iou_ge_04: count(0.4) / n,
        evaluated_frame_count: ious.len(),
    })
}

pub fn report(
    sequences: &[SequenceScore<'_>],
    theta: f64,
    skip_frames: usize,
) -> Result<EvaluationReport> {
    let rows = sequences
        .iter()
        .map(|s| score_sequence(s, theta, skip_frames))
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::UndefinedMetric("no sequences to evaluate".into()));
    }
    let global = GlobalSummary {
        tpr_percent: mean(rows.iter().map(|r| r.tpr_percent)),
        average_iou: mean(rows.iter().map(|r| r.average_iou)),
        fraction_iou_ge_04: mean(rows.iter().map(|r| r.fraction_iou_ge_04)),
        evaluated_frame_count: mean(rows.iter().map(|r| r.evaluated_frame_count as f64)),
    };
    let mut groups: BTreeMap<Difficulty, Vec<&SequenceReport>> = BTreeMap::new();
    for r in &rows {
        groups.entry(r.difficulty).or_default().push(r);
    }
    let by_difficulty = groups
        .into_iter()
        .map(|(difficulty, members)| DifficultyRow {
            difficulty,
            sequence_count: members.len(),
            average_iou: mean(members.iter().map(|r| r.average_iou)),
            fraction_iou_ge_04: mean(members.iter().map(|r| r.fraction_iou_ge_04)),
        })
        .collect();
    Ok(EvaluationReport {
        correct_iou_threshold: theta,
        skip_frames,
        sequences: rows,
        global,
        by_difficulty,
    })
}
