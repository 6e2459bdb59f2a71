//! Person detections: frame-aligned binary masks, their run-length code,
//! head/feet extraction, and the providers that supply detections per frame.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ground_truth_box, BBox, ImagePoint, PersonAnnotation, SequenceAnnotation};
use crate::rng::keyed_rng;

/// Binary mask aligned to the frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    /// Mask with every pixel of `bbox` (rounded outward, clipped) set.
    pub fn full_box(bbox: &BBox, width: u32, height: u32) -> Self {
        let mut mask = Self::new(width, height);
        let (c0, c1, r0, r1) = bbox.pixel_span(width, height);
        for y in r0..r1 {
            for x in c0..c1 {
                mask.set(x, y, true);
            }
        }
        mask
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.bits[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        let i = (y * self.width + x) as usize;
        self.bits[i] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Coordinates `(x, y)` of set bits in row-major order.
    pub fn set_pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    fn row_has_bits(&self, y: u32) -> bool {
        let start = (y * self.width) as usize;
        self.bits[start..start + self.width as usize]
            .iter()
            .any(|b| *b)
    }

    /// Tight pixel-grid box around the set bits.
    pub fn bounding_box(&self) -> Option<BBox> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        for (x, y) in self.set_pixels() {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        if x0 == u32::MAX {
            return None;
        }
        BBox::new(
            x0 as f64,
            y0 as f64,
            (x1 - x0 + 1) as f64,
            (y1 - y0 + 1) as f64,
        )
        .ok()
    }

    pub fn union(&mut self, other: &Mask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
    }
}

/// Run-length code: alternating 0-run and 1-run lengths in row-major order,
/// starting with a (possibly empty) 0-run.
pub fn encode_rle(mask: &Mask) -> Vec<usize> {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0usize;
    for &bit in &mask.bits {
        if bit != current {
            counts.push(run);
            run = 0;
            current = bit;
        }
        run += 1;
    }
    counts.push(run);
    counts
}

pub fn decode_rle(counts: &[usize], width: u32, height: u32) -> Result<Mask> {
    let expected = width as usize * height as usize;
    let actual = counts.iter().try_fold(0usize, |acc, c| acc.checked_add(*c));
    match actual {
        Some(total) if total == expected => {}
        other => {
            return Err(Error::RleFormat {
                expected,
                actual: other.unwrap_or(usize::MAX),
            })
        }
    }
    let mut bits = Vec::with_capacity(expected);
    for (i, &run) in counts.iter().enumerate() {
        bits.extend(std::iter::repeat_n(i % 2 == 1, run));
    }
    Ok(Mask {
        width,
        height,
        bits,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub mask: Mask,
    /// Identity of the annotated person behind the detection, when known.
    pub source_person_id: Option<String>,
    pub detector_score: f64,
}

impl Detection {
    /// Whether every set mask bit lies inside the box rounded outward to the
    /// pixel grid.
    pub fn mask_within_box(&self) -> bool {
        let x0 = self.bbox.x.floor();
        let y0 = self.bbox.y.floor();
        let x1 = self.bbox.right().ceil();
        let y1 = self.bbox.bottom().ceil();
        self.mask.set_pixels().all(|(x, y)| {
            let (x, y) = (x as f64, y as f64);
            x >= x0 && x < x1 && y >= y0 && y < y1
        })
    }
}

/// Head and feet image points of a detection: the mean column of the set bits
/// in the topmost and bottommost set rows, at those rows.
pub fn head_feet_points(det: &Detection) -> Result<(ImagePoint, ImagePoint)> {
    let mask = &det.mask;
    let top = (0..mask.height).find(|&y| mask.row_has_bits(y));
    let bottom = (0..mask.height).rev().find(|&y| mask.row_has_bits(y));
    let (Some(top), Some(bottom)) = (top, bottom) else {
        return Err(Error::EmptyMask);
    };
    let row_mean = |y: u32| {
        let (sum, n) = (0..mask.width)
            .filter(|&x| mask.get(x, y))
            .fold((0.0, 0usize), |(s, n), x| (s + x as f64, n + 1));
        sum / n as f64
    };
    Ok((
        ImagePoint::new(row_mean(top), top as f64),
        ImagePoint::new(row_mean(bottom), bottom as f64),
    ))
}

/// Supplies the detections of a frame. Implementations must be deterministic
/// for a fixed state and frame index.
pub trait DetectionProvider: Send + Sync {
    fn name(&self) -> &str;

    fn detections_for(&self, frame_index: usize) -> Result<Vec<Detection>>;
}

/// Perturbations applied by the annotation-backed oracle detector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleNoise {
    /// Each box edge moves by a uniform offset in `[-jitter_px, jitter_px]`.
    pub jitter_px: f64,
    /// Probability of dropping each detection.
    pub p_drop: f64,
    /// Overlapping boxes are merged into one detection.
    pub merge_overlapping: bool,
}

/// One detection per annotated person: the ground-truth box with a full-box
/// mask, perturbed by `noise` using draws from `rng`.
pub fn oracle_detections<R: Rng>(
    frame_persons: &[PersonAnnotation],
    image_size: [u32; 2],
    noise: &OracleNoise,
    rng: &mut R,
) -> Vec<Detection> {
    let [w, h] = image_size;
    let mut out: Vec<(BBox, String)> = Vec::new();
    for person in frame_persons {
        let Ok(gt) = ground_truth_box(&person.markers) else {
            continue;
        };
        if noise.p_drop > 0.0 && rng.random::<f64>() < noise.p_drop {
            continue;
        }
        let bbox = if noise.jitter_px > 0.0 {
            let j = noise.jitter_px;
            let mut d = || rng.random_range(-j..=j);
            let (l, t, r, b) = (gt.x + d(), gt.y + d(), gt.right() + d(), gt.bottom() + d());
            BBox::from_corners(l, t, r, b).unwrap_or(gt)
        } else {
            gt
        };
        out.push((bbox, person.person_id.clone()));
    }

    if noise.merge_overlapping {
        out = merge_overlapping(out);
    }

    out.into_iter()
        .filter_map(|(bbox, id)| {
            let mask = Mask::full_box(&bbox, w, h);
            (!mask.is_empty()).then_some(Detection {
                bbox,
                mask,
                source_person_id: Some(id),
                detector_score: 1.0,
            })
        })
        .collect()
}

/// Repeatedly fuses intersecting boxes into their hull. The fused detection
/// keeps the identity of its largest member.
fn merge_overlapping(mut boxes: Vec<(BBox, String)>) -> Vec<(BBox, String)> {
    let mut largest: Vec<f64> = boxes.iter().map(|(b, _)| b.area()).collect();
    loop {
        let mut fused = false;
        'scan: for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].0.intersection_area(&boxes[j].0) > 0.0 {
                    let (bj, id_j) = boxes.remove(j);
                    let area_j = largest.remove(j);
                    boxes[i].0 = boxes[i].0.union_hull(&bj);
                    if area_j > largest[i] {
                        largest[i] = area_j;
                        boxes[i].1 = id_j;
                    }
                    fused = true;
                    break 'scan;
                }
            }
        }
        if !fused {
            return boxes;
        }
    }
}

/// Annotation-backed detector.
pub struct OracleProvider {
    sequence: Arc<SequenceAnnotation>,
    noise: OracleNoise,
    seed: u64,
}

impl OracleProvider {
    pub fn new(sequence: Arc<SequenceAnnotation>, noise: OracleNoise, seed: u64) -> Self {
        Self {
            sequence,
            noise,
            seed,
        }
    }
}

const ORACLE_DETECTOR_SALT: u64 = 0x00D3_7EC7;

impl DetectionProvider for OracleProvider {
    fn name(&self) -> &str {
        "oracle"
    }

    fn detections_for(&self, frame_index: usize) -> Result<Vec<Detection>> {
        let Some(frame) = self.sequence.frames.get(frame_index) else {
            return Ok(Vec::new());
        };
        let mut rng = keyed_rng(self.seed, &[ORACLE_DETECTOR_SALT, frame_index as u64]);
        Ok(oracle_detections(
            &frame.persons,
            self.sequence.image_size,
            &self.noise,
            &mut rng,
        ))
    }
}

/// One record of a detections stream (one JSON object per line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub frame: usize,
    pub detections: Vec<DetectionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionEntry {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub score: f64,
    pub mask_rle: Vec<usize>,
    pub mask_size: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub person_id: Option<String>,
}

impl DetectionEntry {
    pub fn from_detection(det: &Detection) -> Self {
        Self {
            bbox: det.bbox,
            score: det.detector_score,
            mask_rle: encode_rle(&det.mask),
            mask_size: [det.mask.width(), det.mask.height()],
            person_id: det.source_person_id.clone(),
        }
    }

    pub fn to_detection(&self) -> Result<Detection> {
        let [w, h] = self.mask_size;
        Ok(Detection {
            bbox: self.bbox,
            mask: decode_rle(&self.mask_rle, w, h)?,
            source_person_id: self.person_id.clone(),
            detector_score: self.score,
        })
    }
}

pub fn parse_detection_stream(text: &str) -> Result<Vec<DetectionRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            serde_json::from_str(line).map_err(|e| Error::Schema {
                path: format!("line {}", n + 1),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_detection_stream(records: &[DetectionRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub const DEFAULT_MIN_SCORE: f64 = 0.5;

/// Detections loaded from a stream, filtered by a minimum detector score.
pub struct StreamProvider {
    by_frame: BTreeMap<usize, Vec<Detection>>,
}

impl StreamProvider {
    pub fn new(records: &[DetectionRecord], min_score: f64) -> Result<Self> {
        let mut by_frame: BTreeMap<usize, Vec<Detection>> = BTreeMap::new();
        for record in records {
            let slot = by_frame.entry(record.frame).or_default();
            for entry in &record.detections {
                if entry.score >= min_score {
                    let det = entry.to_detection().map_err(|e| Error::Schema {
                        path: format!("frame {}", record.frame),
                        message: e.to_string(),
                    })?;
                    slot.push(det);
                }
            }
        }
        Ok(Self { by_frame })
    }

    pub fn from_text(text: &str, min_score: f64) -> Result<Self> {
        Self::new(&parse_detection_stream(text)?, min_score)
    }
}

impl DetectionProvider for StreamProvider {
    fn name(&self) -> &str {
        "stream"
    }

    fn detections_for(&self, frame_index: usize) -> Result<Vec<Detection>> {
        Ok(self.by_frame.get(&frame_index).cloned().unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(width: u32, height: u32, on: &[(u32, u32)]) -> Mask {
        let mut m = Mask::new(width, height);
        for &(x, y) in on {
            m.set(x, y, true);
        }
        m
    }

    fn det_with(mask: Mask) -> Detection {
        let bbox = mask
            .bounding_box()
            .unwrap_or(BBox::new(0.0, 0.0, 1.0, 1.0).unwrap());
        Detection {
            bbox,
            mask,
            source_person_id: None,
            detector_score: 1.0,
        }
    }

    #[test]
    fn rle_examples() {
        assert_eq!(encode_rle(&Mask::new(2, 2)), vec![4]);
        assert_eq!(
            encode_rle(&mask_from(2, 2, &[(0, 0), (1, 0), (0, 1), (1, 1)])),
            vec![0, 4]
        );
        assert_eq!(encode_rle(&mask_from(3, 1, &[(1, 0)])), vec![1, 1, 1]);
    }

    #[test]
    fn rle_count_mismatch() {
        assert!(matches!(
            decode_rle(&[1, 2], 2, 2),
            Err(Error::RleFormat {
                expected: 4,
                actual: 3
            })
        ));
    }

    #[test]
    fn head_feet_of_full_box() {
        let bbox = BBox::new(10.0, 5.0, 20.0, 40.0).unwrap();
        let det = Detection {
            bbox,
            mask: Mask::full_box(&bbox, 64, 64),
            source_person_id: None,
            detector_score: 1.0,
        };
        let (head, feet) = head_feet_points(&det).unwrap();
        // columns 10..=29 average to 19.5
        assert_eq!(head, ImagePoint::new(19.5, 5.0));
        assert_eq!(feet, ImagePoint::new(19.5, 44.0));
    }

    #[test]
    fn head_feet_of_point_mask() {
        let det = det_with(mask_from(10, 10, &[(7, 3)]));
        let (head, feet) = head_feet_points(&det).unwrap();
        assert_eq!(head, ImagePoint::new(7.0, 3.0));
        assert_eq!(feet, ImagePoint::new(7.0, 3.0));
    }

    #[test]
    fn head_feet_of_stick_figure() {
        // 5×5:
        // . . X . .
        // . X X X .
        // . . X . .
        // . X . X .
        // X . . . X
        let on = [
            (2, 0),
            (1, 1),
            (2, 1),
            (3, 1),
            (2, 2),
            (1, 3),
            (3, 3),
            (0, 4),
            (4, 4),
        ];
        let det = det_with(mask_from(5, 5, &on));
        let (head, feet) = head_feet_points(&det).unwrap();
        // by enumeration: top row 0 = {2}; bottom row 4 = {0, 4}
        assert_eq!(head, ImagePoint::new(2.0, 0.0));
        assert_eq!(feet, ImagePoint::new(2.0, 4.0));
    }

    #[test]
    fn empty_mask_has_no_head() {
        let det = det_with(Mask::new(4, 4));
        assert!(matches!(head_feet_points(&det), Err(Error::EmptyMask)));
    }

    #[test]
    fn merging_keeps_largest_identity() {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let b = BBox::new(5.0, 5.0, 20.0, 20.0).unwrap();
        let c = BBox::new(100.0, 0.0, 5.0, 5.0).unwrap();
        let merged = merge_overlapping(vec![(a, "a".into()), (b, "b".into()), (c, "c".into())]);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].0, BBox::new(0.0, 0.0, 25.0, 25.0).unwrap());
        assert_eq!(merged[0].1, "b");
        assert_eq!(merged[1].1, "c");
    }

    #[test]
    fn stream_filters_by_score() {
        let bbox = BBox::new(1.0, 1.0, 2.0, 2.0).unwrap();
        let det = Detection {
            bbox,
            mask: Mask::full_box(&bbox, 4, 4),
            source_person_id: Some("p".into()),
            detector_score: 0.4,
        };
        let mut strong = det.clone();
        strong.detector_score = 0.9;
        let record = DetectionRecord {
            frame: 2,
            detections: vec![
                DetectionEntry::from_detection(&det),
                DetectionEntry::from_detection(&strong),
            ],
        };
        let text = write_detection_stream(&[record]).unwrap();
        let provider = StreamProvider::from_text(&text, DEFAULT_MIN_SCORE).unwrap();
        let got = provider.detections_for(2).unwrap();
        assert_eq!(got, vec![strong]);
        assert!(provider.detections_for(0).unwrap().is_empty());
    }
}
