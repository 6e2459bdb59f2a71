//! Clothing-dependent torso/leg bands, background-free patch extraction and
//! gamma intensity adjustment.
//!
//! A band is a pair of fractions of the box height measured from the box top.
//! The torso band depends on the queried torso type so that sleeves, necks and
//! skirts leak as few non-cloth pixels into the patch as possible.

use serde::{Deserialize, Serialize};

use crate::detect::Detection;
use crate::error::{Error, Result};
use crate::frames::{Rgb, RgbImage};
use crate::model::{BBox, LegType, TorsoType};

// Guards floor() against products like 0.29 * 100 = 28.999999999999996.
const ROW_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Band {
    r1: f64,
    r2: f64,
}

impl Band {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(0.0 <= r1 && r1 < r2 && r2 <= 1.0) {
            return Err(Error::Band { r1, r2 });
        }
        Ok(Self { r1, r2 })
    }

    const fn fixed(r1: f64, r2: f64) -> Self {
        Self { r1, r2 }
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// Half-open pixel row range `[start, end)` of the band inside a box
    /// spanning `top .. top + height`.
    pub fn rows(&self, top: f64, height: f64) -> (i64, i64) {
        let at = |r: f64| (top + r * height + ROW_EPS).floor() as i64;
        (at(self.r1), at(self.r2))
    }
}

impl TryFrom<[f64; 2]> for Band {
    type Error = Error;

    fn try_from([r1, r2]: [f64; 2]) -> Result<Self> {
        Band::new(r1, r2)
    }
}

impl From<Band> for [f64; 2] {
    fn from(b: Band) -> Self {
        [b.r1, b.r2]
    }
}

/// The fixed 20%–50% torso band used when the torso type is unknown.
pub const STATIC_TORSO_BAND: Band = Band::fixed(0.20, 0.50);

pub fn torso_band(torso_type: TorsoType) -> Band {
    match torso_type {
        TorsoType::Unknown => STATIC_TORSO_BAND,
        TorsoType::LongSleeve | TorsoType::ShortSleeve => Band::fixed(0.20, 0.48),
        TorsoType::NoSleeve => Band::fixed(0.25, 0.48),
        TorsoType::IndianKurta => Band::fixed(0.20, 0.56),
    }
}

/// Leg band; an unknown leg type falls back to the long-pants band.
pub fn leg_band(leg_type: LegType) -> Band {
    match leg_type {
        LegType::Unknown | LegType::LongPants | LegType::Dress => Band::fixed(0.56, 0.84),
        LegType::Skirt => Band::fixed(0.52, 0.64),
        LegType::LongShorts => Band::fixed(0.56, 0.68),
        LegType::ShortShorts => Band::fixed(0.52, 0.62),
        LegType::IndianKurta => Band::fixed(0.75, 0.90),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    /// Colors of the mask-on pixels inside the band, row-major.
    pub pixels: Vec<[u8; 3]>,
    /// Frame coordinates of `pixels`, index-aligned.
    pub positions: Vec<(u32, u32)>,
    pub source_box: BBox,
    pub band: Band,
    /// Frame row range `[start, end)` scanned.
    pub rows: (u32, u32),
    /// Frame column range `[start, end)` scanned.
    pub cols: (u32, u32),
}

impl Patch {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    /// The scanned rectangle with mask-off pixels painted black.
    pub fn to_image(&self) -> RgbImage {
        let w = self.cols.1.saturating_sub(self.cols.0).max(1);
        let h = self.rows.1.saturating_sub(self.rows.0).max(1);
        let mut img = RgbImage::new(w, h);
        for (&(x, y), &rgb) in self.positions.iter().zip(&self.pixels) {
            img.put_pixel(x - self.cols.0, y - self.rows.0, Rgb(rgb));
        }
        img
    }
}

/// Pixels of `image` inside the band rows of the (frame-clipped) detection box
/// that are also set in the detection mask.
pub fn extract_patch(image: &RgbImage, det: &Detection, band: Band) -> Patch {
    let (iw, ih) = image.dimensions();
    let b = det.bbox;
    let left = b.x.max(0.0);
    let top = b.y.max(0.0);
    let right = b.right().min(iw as f64);
    let bottom = b.bottom().min(ih as f64);

    let mut patch = Patch {
        pixels: Vec::new(),
        positions: Vec::new(),
        source_box: b,
        band,
        rows: (0, 0),
        cols: (0, 0),
    };
    if right <= left || bottom <= top {
        return patch;
    }

    let clamp = |v: i64, hi: u32| v.clamp(0, hi as i64) as u32;
    let (r0, r1) = band.rows(top, bottom - top);
    let rows = (clamp(r0, ih), clamp(r1, ih));
    let cols = (
        clamp(left.floor() as i64, iw),
        clamp(right.ceil() as i64, iw),
    );
    patch.rows = rows;
    patch.cols = cols;

    for y in rows.0..rows.1 {
        for x in cols.0..cols.1 {
            if det.mask.get(x, y) {
                patch.pixels.push(image.get_pixel(x, y).0);
                patch.positions.push((x, y));
            }
        }
    }
    patch
}

/// Validated gamma exponent (> 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma(f64);

impl Gamma {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(Self(gamma))
        } else {
            Err(Error::NonFinite(format!(
                "gamma must be positive, got {gamma}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `v → round(255·(v/255)^γ)` for every 8-bit value.
    pub fn lut(self) -> [u8; 256] {
        let mut lut = [0u8; 256];
        for (v, out) in lut.iter_mut().enumerate() {
            *out = (255.0 * (v as f64 / 255.0).powf(self.0)).round() as u8;
        }
        lut
    }
}

/// Exponents used for illumination augmentation.
pub const AUGMENTATION_GAMMAS: [f64; 3] = [0.7, 1.2, 1.5];

pub fn gamma_adjust(patch: &Patch, gamma: Gamma) -> Patch {
    let lut = gamma.lut();
    let mut out = patch.clone();
    for px in &mut out.pixels {
        for c in px.iter_mut() {
            *c = lut[*c as usize];
        }
    }
    out
}

pub fn gamma_adjust_image(image: &RgbImage, gamma: Gamma) -> RgbImage {
    let lut = gamma.lut();
    let mut out = image.clone();
    for p in out.pixels_mut() {
        for c in p.0.iter_mut() {
            *c = lut[*c as usize];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::Mask;

    fn full_box_detection(bbox: BBox, w: u32, h: u32) -> Detection {
        Detection {
            bbox,
            mask: Mask::full_box(&bbox, w, h),
            source_person_id: None,
            detector_score: 1.0,
        }
    }

    #[test]
    fn torso_table() {
        assert_eq!(
            torso_band(TorsoType::ShortSleeve),
            Band::new(0.20, 0.48).unwrap()
        );
        assert_eq!(
            torso_band(TorsoType::NoSleeve),
            Band::new(0.25, 0.48).unwrap()
        );
        assert_eq!(
            torso_band(TorsoType::Unknown),
            Band::new(0.20, 0.50).unwrap()
        );
    }

    #[test]
    fn leg_table() {
        assert_eq!(leg_band(LegType::Skirt), Band::new(0.52, 0.64).unwrap());
        assert_eq!(leg_band(LegType::LongPants), Band::new(0.56, 0.84).unwrap());
        assert_eq!(
            leg_band(LegType::ShortShorts),
            Band::new(0.52, 0.62).unwrap()
        );
    }

    #[test]
    fn invalid_bands() {
        assert!(Band::new(0.5, 0.5).is_err());
        assert!(Band::new(-0.1, 0.5).is_err());
        assert!(Band::new(0.2, 1.1).is_err());
    }

    #[test]
    fn band_rows_of_hundred_pixel_box() {
        let img = RgbImage::from_pixel(50, 120, Rgb([0, 0, 255]));
        let bbox = BBox::new(0.0, 0.0, 10.0, 100.0).unwrap();
        let patch = extract_patch(
            &img,
            &full_box_detection(bbox, 50, 120),
            torso_band(TorsoType::ShortSleeve),
        );
        assert_eq!(patch.rows, (20, 48));
        assert_eq!(patch.len(), 28 * 10);
        assert!(patch.pixels.iter().all(|p| *p == [0, 0, 255]));
    }

    #[test]
    fn empty_mask_gives_empty_patch() {
        let img = RgbImage::new(20, 20);
        let det = Detection {
            bbox: BBox::new(2.0, 2.0, 5.0, 10.0).unwrap(),
            mask: Mask::new(20, 20),
            source_person_id: None,
            detector_score: 1.0,
        };
        assert!(extract_patch(&img, &det, STATIC_TORSO_BAND).is_empty());
    }

    #[test]
    fn boxes_are_clipped_before_banding() {
        let img = RgbImage::new(40, 40);
        // box extends 20 rows above the frame; the visible part is rows 0..40
        let bbox = BBox::new(5.0, -20.0, 10.0, 60.0).unwrap();
        let patch = extract_patch(
            &img,
            &full_box_detection(bbox, 40, 40),
            Band::new(0.25, 0.5).unwrap(),
        );
        assert_eq!(patch.rows, (10, 20));
        assert_eq!(patch.cols, (5, 15));
    }

    #[test]
    fn gamma_examples() {
        let one = Gamma::new(1.0).unwrap().lut();
        assert!(one.iter().enumerate().all(|(v, o)| *o as usize == v));
        for g in [0.3, 0.7, 1.2, 1.5, 4.0] {
            let lut = Gamma::new(g).unwrap().lut();
            assert_eq!((lut[0], lut[255]), (0, 255));
        }
        let expected = (255.0 * (64.0f64 / 255.0).powf(0.7)).round() as u8;
        assert_eq!(Gamma::new(0.7).unwrap().lut()[64], expected);
        assert_eq!(expected, 97);
        assert!(Gamma::new(0.0).is_err());
    }
}
