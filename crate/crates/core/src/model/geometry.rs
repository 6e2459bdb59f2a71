use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real-valued image point in pixels (origin top-left, y grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
}

impl ImagePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for ImagePoint {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<ImagePoint> for [f64; 2] {
    fn from(p: ImagePoint) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned box: the half-open real rectangle `[x, x+w) × [y, y+h)`.
///
/// Serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::NonFinite(format!("box [{x}, {y}, {w}, {h}]")));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::Annotation(format!(
                "box [{x}, {y}, {w}, {h}] has non-positive extent"
            )));
        }
        Ok(Self { x, y, w, h })
    }

    pub fn from_corners(left: f64, top: f64, right: f64, bottom: f64) -> Result<Self> {
        Self::new(left, top, right - left, bottom - top)
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> ImagePoint {
        ImagePoint::new(self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    /// Area of `self ∩ other`; zero when disjoint.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Smallest box containing both.
    pub fn union_hull(&self, other: &BBox) -> BBox {
        let left = self.x.min(other.x);
        let top = self.y.min(other.y);
        BBox {
            x: left,
            y: top,
            w: self.right().max(other.right()) - left,
            h: self.bottom().max(other.bottom()) - top,
        }
    }

    /// Pixel index ranges `[c0, c1) × [r0, r1)` covered by the box after
    /// rounding outward to the pixel grid and clipping to `width × height`.
    pub fn pixel_span(&self, width: u32, height: u32) -> (u32, u32, u32, u32) {
        let clamp = |v: f64, hi: u32| v.max(0.0).min(hi as f64) as u32;
        let c0 = clamp(self.x.floor(), width);
        let c1 = clamp(self.right().ceil(), width);
        let r0 = clamp(self.y.floor(), height);
        let r1 = clamp(self.bottom().ceil(), height);
        (c0, c1, r0, r1)
    }
}

impl TryFrom<[f64; 4]> for BBox {
    type Error = Error;

    fn try_from([x, y, w, h]: [f64; 4]) -> Result<Self> {
        BBox::new(x, y, w, h)
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}
