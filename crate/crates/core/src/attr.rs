//! Attribute classifiers.
//!
//! Color and gender classification sit behind the [`ColorClassifier`] and
//! [`GenderClassifier`] traits. Two families ship with the crate:
//!
//! - a reference color classifier: each patch pixel is mapped through an
//!   ordered hue/saturation/value rule table and the patch takes the
//!   majority label;
//! - annotation-backed oracles for color and gender, with optional seeded
//!   error injection.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::frames::RgbImage;
use crate::model::{Color, Gender, PersonAnnotation, SequenceAnnotation, TorsoType};
use crate::patch::{extract_patch, torso_band, Patch};
use crate::rng::{hash_str, keyed_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorVerdict {
    pub label: Color,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenderVerdict {
    pub label: Gender,
    pub confidence: f64,
}

/// Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
pub fn rgb_to_hsv([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    let r = r as f64 / 255.0;
    let g = g as f64 / 255.0;
    let b = b as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let hue = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let sat = if max == 0.0 { 0.0 } else { delta / max };
    (hue.rem_euclid(360.0), sat, max)
}

/// One row of the prototype table. A hue range with `lo > hi` wraps through 0°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorRule {
    pub label: Color,
    pub h_range_deg: [f64; 2],
    pub s_range: [f64; 2],
    pub v_range: [f64; 2],
}

impl ColorRule {
    const fn new(label: Color, h: [f64; 2], s: [f64; 2], v: [f64; 2]) -> Self {
        Self {
            label,
            h_range_deg: h,
            s_range: s,
            v_range: v,
        }
    }

    pub fn matches(&self, h: f64, s: f64, v: f64) -> bool {
        let [h0, h1] = self.h_range_deg;
        let hue_ok = if h0 <= h1 {
            h0 <= h && h <= h1
        } else {
            h >= h0 || h <= h1
        };
        hue_ok
            && self.s_range[0] <= s
            && s <= self.s_range[1]
            && self.v_range[0] <= v
            && v <= self.v_range[1]
    }

    fn is_catch_all(&self) -> bool {
        let [h0, h1] = self.h_range_deg;
        h0 <= 0.0 && h1 >= 360.0 && self.s_range == [0.0, 1.0] && self.v_range == [0.0, 1.0]
    }
}

const ANY_HUE: [f64; 2] = [0.0, 360.0];
const UNIT: [f64; 2] = [0.0, 1.0];

/// Ordered decision rules; the first matching rule names the pixel's color.
/// The last rule must match everything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ColorRule>", into = "Vec<ColorRule>")]
pub struct ColorPrototypeTable {
    rules: Vec<ColorRule>,
}

impl ColorPrototypeTable {
    pub fn new(rules: Vec<ColorRule>) -> Result<Self> {
        let Some(last) = rules.last() else {
            return Err(Error::ColorTable("no rules".into()));
        };
        if !last.is_catch_all() {
            return Err(Error::ColorTable(
                "the last rule must cover h [0, 360], s [0, 1], v [0, 1]".into(),
            ));
        }
        for (i, rule) in rules.iter().enumerate() {
            if rule.label.is_unknown() {
                return Err(Error::ColorTable(format!("rule {i} has label unknown")));
            }
            let bounds = rule
                .h_range_deg
                .iter()
                .chain(&rule.s_range)
                .chain(&rule.v_range);
            if bounds.clone().any(|v| !v.is_finite()) {
                return Err(Error::ColorTable(format!(
                    "rule {i} has a non-finite bound"
                )));
            }
            if rule.s_range[0] > rule.s_range[1] || rule.v_range[0] > rule.v_range[1] {
                return Err(Error::ColorTable(format!("rule {i} has an inverted range")));
            }
        }
        Ok(Self { rules })
    }

    pub fn parse(document: &str) -> Result<Self> {
        Ok(serde_json::from_str(document)?)
    }

    pub fn rules(&self) -> &[ColorRule] {
        &self.rules
    }

    pub fn label_of(&self, rgb: [u8; 3]) -> Color {
        let (h, s, v) = rgb_to_hsv(rgb);
        self.rules
            .iter()
            .find(|r| r.matches(h, s, v))
            .map(|r| r.label)
            .unwrap_or(self.rules[self.rules.len() - 1].label)
    }
}

impl Default for ColorPrototypeTable {
    fn default() -> Self {
        use Color::*;
        let rules = vec![
            ColorRule::new(Black, ANY_HUE, UNIT, [0.0, 0.22]),
            ColorRule::new(White, ANY_HUE, [0.0, 0.15], [0.8, 1.0]),
            ColorRule::new(Grey, ANY_HUE, [0.0, 0.15], UNIT),
            ColorRule::new(Red, [345.0, 5.0], UNIT, UNIT),
            ColorRule::new(Brown, [5.0, 45.0], UNIT, [0.0, 0.7]),
            ColorRule::new(Skin, [5.0, 45.0], [0.0, 0.6], UNIT),
            ColorRule::new(Orange, [5.0, 45.0], UNIT, UNIT),
            ColorRule::new(Yellow, [45.0, 70.0], UNIT, UNIT),
            ColorRule::new(Green, [70.0, 170.0], UNIT, UNIT),
            ColorRule::new(Blue, [170.0, 260.0], UNIT, UNIT),
            ColorRule::new(Purple, [260.0, 300.0], UNIT, UNIT),
            ColorRule::new(Pink, [300.0, 345.0], UNIT, UNIT),
            ColorRule::new(Grey, ANY_HUE, UNIT, UNIT),
        ];
        Self::new(rules).expect("default table is valid")
    }
}

impl TryFrom<Vec<ColorRule>> for ColorPrototypeTable {
    type Error = Error;

    fn try_from(rules: Vec<ColorRule>) -> Result<Self> {
        Self::new(rules)
    }
}

impl From<ColorPrototypeTable> for Vec<ColorRule> {
    fn from(t: ColorPrototypeTable) -> Self {
        t.rules
    }
}

/// Representative RGB of each culture color. The synthetic renderer paints
/// with these, and the default table maps each to its own label.
pub fn canonical_swatch(color: Color) -> [u8; 3] {
    match color {
        Color::Black => [20, 20, 20],
        Color::Blue => [30, 60, 200],
        Color::Brown => [120, 70, 30],
        Color::Green => [40, 160, 60],
        Color::Grey | Color::Unknown => [128, 128, 128],
        Color::Orange => [245, 130, 20],
        Color::Pink => [245, 150, 200],
        Color::Purple => [120, 50, 160],
        Color::Red => [210, 25, 25],
        Color::White => [245, 245, 245],
        Color::Yellow => [235, 220, 40],
        Color::Skin => [224, 172, 140],
    }
}

pub const DEFAULT_MIN_PIXELS: usize = 25;

/// Majority vote of per-pixel labels. Ties go to the label listed first in
/// the taxonomy. Fewer than `min_pixels` pixels yields `unknown` with zero
/// confidence.
pub fn classify_color(
    patch: &Patch,
    table: &ColorPrototypeTable,
    min_pixels: usize,
) -> ColorVerdict {
    let total = patch.pixels.len();
    if total == 0 || total < min_pixels {
        return ColorVerdict {
            label: Color::Unknown,
            confidence: 0.0,
        };
    }
    let mut votes = [0usize; 13];
    for px in &patch.pixels {
        let idx = Color::ALL
            .iter()
            .position(|c| *c == table.label_of(*px))
            .unwrap_or(0);
        votes[idx] += 1;
    }
    let (best, count) = votes
        .iter()
        .enumerate()
        .fold((0, 0), |acc, (i, &n)| if n > acc.1 { (i, n) } else { acc });
    ColorVerdict {
        label: Color::ALL[best],
        confidence: count as f64 / total as f64,
    }
}

/// Which of the two query colors a classification is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSlot {
    Primary,
    Secondary,
}

/// Everything a classifier may look at for one candidate.
pub struct ClassifyInput<'a> {
    pub frame: usize,
    pub detection: &'a Detection,
    pub image: Option<&'a RgbImage>,
    /// Queried torso type; selects the torso band.
    pub torso_type: TorsoType,
}

pub trait ColorClassifier: Send + Sync {
    fn name(&self) -> &str;

    fn classify(&self, input: &ClassifyInput<'_>, slot: ColorSlot) -> Result<ColorVerdict>;
}

pub trait GenderClassifier: Send + Sync {
    fn name(&self) -> &str;

    fn classify(&self, input: &ClassifyInput<'_>) -> Result<GenderVerdict>;
}

/// Patch-based classifier over a prototype table. The slot is ignored: the
/// patch gets one label, which the cascade compares with either query color.
pub struct ReferenceColorClassifier {
    table: ColorPrototypeTable,
    min_pixels: usize,
}

impl ReferenceColorClassifier {
    pub fn new(table: ColorPrototypeTable, min_pixels: usize) -> Self {
        Self { table, min_pixels }
    }
}

impl Default for ReferenceColorClassifier {
    fn default() -> Self {
        Self::new(ColorPrototypeTable::default(), DEFAULT_MIN_PIXELS)
    }
}

impl ColorClassifier for ReferenceColorClassifier {
    fn name(&self) -> &str {
        "reference"
    }

    fn classify(&self, input: &ClassifyInput<'_>, _slot: ColorSlot) -> Result<ColorVerdict> {
        let image = input.image.ok_or_else(|| {
            Error::ProviderMismatch(format!("no frame image for frame {}", input.frame))
        })?;
        let patch = extract_patch(image, input.detection, torso_band(input.torso_type));
        Ok(classify_color(&patch, &self.table, self.min_pixels))
    }
}

/// Shared lookup for the annotation-backed classifiers.
#[derive(Clone)]
struct AnnotationLookup {
    sequence: Arc<SequenceAnnotation>,
}

impl AnnotationLookup {
    fn person(&self, input: &ClassifyInput<'_>) -> Result<&PersonAnnotation> {
        let id = input.detection.source_person_id.as_deref().ok_or_else(|| {
            Error::ProviderMismatch("oracle classifier needs detections with identities".into())
        })?;
        self.sequence.person(input.frame, id).ok_or_else(|| {
            Error::ProviderMismatch(format!(
                "person {id:?} is not annotated in frame {}",
                input.frame
            ))
        })
    }
}

const COLOR_ORACLE_SALT: u64 = 0x00C0_100A;
const GENDER_ORACLE_SALT: u64 = 0x6E_DE;

/// Returns the annotated torso color. With `error_rate > 0` the label is
/// replaced, with that probability, by a different culture color drawn
/// uniformly.
pub struct OracleColorClassifier {
    lookup: AnnotationLookup,
    error_rate: f64,
    seed: u64,
}

impl OracleColorClassifier {
    pub fn new(sequence: Arc<SequenceAnnotation>, error_rate: f64, seed: u64) -> Self {
        Self {
            lookup: AnnotationLookup { sequence },
            error_rate,
            seed,
        }
    }
}

impl ColorClassifier for OracleColorClassifier {
    fn name(&self) -> &str {
        "oracle"
    }

    fn classify(&self, input: &ClassifyInput<'_>, slot: ColorSlot) -> Result<ColorVerdict> {
        let person = self.lookup.person(input)?;
        let truth = match slot {
            ColorSlot::Primary => person.attributes.torso_color1,
            ColorSlot::Secondary => person.attributes.torso_color2,
        };
        if self.error_rate <= 0.0 {
            return Ok(ColorVerdict {
                label: truth,
                confidence: 1.0,
            });
        }
        let mut rng = keyed_rng(
            self.seed,
            &[
                COLOR_ORACLE_SALT,
                input.frame as u64,
                hash_str(&person.person_id),
                slot as u64,
            ],
        );
        let label = if rng.random::<f64>() < self.error_rate {
            let others: Vec<Color> = Color::culture_colors()
                .iter()
                .copied()
                .filter(|c| *c != truth)
                .collect();
            *others
                .choose(&mut rng)
                .expect("at least eleven alternatives")
        } else {
            truth
        };
        Ok(ColorVerdict {
            label,
            confidence: 1.0 - self.error_rate,
        })
    }
}

/// Returns the annotated gender; with `error_rate = ε` the label is flipped
/// with probability ε and the confidence is `1 − ε`.
pub struct OracleGenderClassifier {
    lookup: AnnotationLookup,
    error_rate: f64,
    seed: u64,
}

impl OracleGenderClassifier {
    pub fn new(sequence: Arc<SequenceAnnotation>, error_rate: f64, seed: u64) -> Self {
        Self {
            lookup: AnnotationLookup { sequence },
            error_rate,
            seed,
        }
    }
}

impl GenderClassifier for OracleGenderClassifier {
    fn name(&self) -> &str {
        "oracle"
    }

    fn classify(&self, input: &ClassifyInput<'_>) -> Result<GenderVerdict> {
        let person = self.lookup.person(input)?;
        let truth = person.attributes.gender;
        let flipped = self.error_rate > 0.0 && {
            let mut rng = keyed_rng(
                self.seed,
                &[
                    GENDER_ORACLE_SALT,
                    input.frame as u64,
                    hash_str(&person.person_id),
                ],
            );
            rng.random::<f64>() < self.error_rate
        };
        Ok(GenderVerdict {
            label: if flipped { truth.opposite() } else { truth },
            confidence: 1.0 - self.error_rate.max(0.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BBox;
    use crate::patch::STATIC_TORSO_BAND;

    fn patch_of(pixels: Vec<[u8; 3]>) -> Patch {
        let n = pixels.len() as u32;
        Patch {
            positions: (0..n).map(|i| (i, 0)).collect(),
            pixels,
            source_box: BBox::new(0.0, 0.0, 1.0, 1.0).unwrap(),
            band: STATIC_TORSO_BAND,
            rows: (0, 1),
            cols: (0, n),
        }
    }

    #[test]
    fn hsv_of_primaries() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), (0.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 255, 0]), (120.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 0, 255]), (240.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 0, 0]), (0.0, 0.0, 0.0));
        let (h, _, _) = rgb_to_hsv([255, 0, 128]);
        assert!(h > 329.0 && h < 331.0);
    }

    #[test]
    fn pure_red_patch() {
        let v = classify_color(
            &patch_of(vec![[255, 0, 0]; 100]),
            &ColorPrototypeTable::default(),
            25,
        );
        assert_eq!(
            v,
            ColorVerdict {
                label: Color::Red,
                confidence: 1.0
            }
        );
    }

    #[test]
    fn empty_and_tiny_patches_are_unknown() {
        let table = ColorPrototypeTable::default();
        let v = classify_color(&patch_of(vec![]), &table, 25);
        assert_eq!(
            v,
            ColorVerdict {
                label: Color::Unknown,
                confidence: 0.0
            }
        );
        let v = classify_color(&patch_of(vec![[255, 0, 0]; 24]), &table, 25);
        assert_eq!(v.label, Color::Unknown);
    }

    #[test]
    fn majority_vote_by_counting() {
        let mut px = vec![canonical_swatch(Color::Blue); 60];
        px.extend(vec![canonical_swatch(Color::White); 40]);
        let v = classify_color(&patch_of(px), &ColorPrototypeTable::default(), 25);
        assert_eq!(v.label, Color::Blue);
        assert!((v.confidence - 0.6).abs() < 1e-12);
    }

    #[test]
    fn vote_ties_follow_taxonomy_order() {
        let mut px = vec![canonical_swatch(Color::Yellow); 30];
        px.extend(vec![canonical_swatch(Color::Black); 30]);
        let v = classify_color(&patch_of(px), &ColorPrototypeTable::default(), 25);
        assert_eq!(v.label, Color::Black);
    }

    #[test]
    fn table_requires_catch_all() {
        let rules = vec![ColorRule::new(Color::Red, ANY_HUE, UNIT, [0.5, 1.0])];
        assert!(ColorPrototypeTable::new(rules).is_err());
        assert!(ColorPrototypeTable::new(vec![]).is_err());
        let rules = vec![ColorRule::new(Color::Unknown, ANY_HUE, UNIT, UNIT)];
        assert!(ColorPrototypeTable::new(rules).is_err());
    }

    #[test]
    fn table_document_round_trip() {
        let table = ColorPrototypeTable::default();
        let text = serde_json::to_string(&table).unwrap();
        assert!(text.contains("\"h_range_deg\""));
        assert_eq!(ColorPrototypeTable::parse(&text).unwrap(), table);
    }

    #[test]
    fn wrapping_hue_range() {
        let r = ColorRule::new(Color::Red, [345.0, 5.0], UNIT, UNIT);
        assert!(r.matches(350.0, 1.0, 1.0));
        assert!(r.matches(2.0, 1.0, 1.0));
        assert!(!r.matches(100.0, 1.0, 1.0));
    }

    #[test]
    fn reference_classifier_needs_image() {
        let bbox = BBox::new(0.0, 0.0, 4.0, 4.0).unwrap();
        let det = Detection {
            bbox,
            mask: crate::detect::Mask::full_box(&bbox, 8, 8),
            source_person_id: None,
            detector_score: 1.0,
        };
        let input = ClassifyInput {
            frame: 0,
            detection: &det,
            image: None,
            torso_type: TorsoType::Unknown,
        };
        let err = ReferenceColorClassifier::default().classify(&input, ColorSlot::Primary);
        assert!(matches!(err, Err(Error::ProviderMismatch(_))));
    }
}
