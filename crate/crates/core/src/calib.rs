//! Tsai camera model: forward projection, back-projection and metric height
//! estimation from head/feet image points.
//!
//! World units are centimeters and the ground plane is `Zw = 0`. The
//! sensor-plane quantities (focal length, distorted/undistorted coordinates,
//! pixel pitch) are in millimeters, as in the classic Tsai parameterization:
//!
//! ```text
//! p  = R·P + T                         world → camera
//! Xu = f·x/z,  Yu = f·y/z              perspective, mm
//! Xu = Xd·(1 + κ1·r²), r² = Xd² + Yd²  radial distortion
//! u  = sx·Xd/dx + Cx,  v = Yd/dy + Cy  sensor → pixel
//! ```

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HeightClass, ImagePoint};

const ORTHONORMAL_TOL: f64 = 1e-9;
const DISTORTION_TOL_MM: f64 = 1e-12;
const DISTORTION_MAX_ITER: usize = 50;
const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CalibrationDoc", into = "CalibrationDoc")]
pub struct TsaiCamera {
    rotation: Matrix3<f64>,
    translation_cm: Vector3<f64>,
    focal_mm: f64,
    kappa1_per_mm2: f64,
    center_px: [f64; 2],
    sx: f64,
    pixel_size_mm: [f64; 2],
    image_size_px: [u32; 2],
}

/// On-disk calibration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationDoc {
    /// Row-major world→camera rotation.
    pub rotation: [f64; 9],
    pub translation_cm: [f64; 3],
    pub focal_mm: f64,
    pub kappa1_per_mm2: f64,
    pub center_px: [f64; 2],
    pub sx: f64,
    pub pixel_size_mm: [f64; 2],
    pub image_size_px: [u32; 2],
}

impl TryFrom<CalibrationDoc> for TsaiCamera {
    type Error = Error;

    fn try_from(doc: CalibrationDoc) -> Result<Self> {
        TsaiCamera::new(
            Matrix3::from_row_slice(&doc.rotation),
            Vector3::from(doc.translation_cm),
            doc.focal_mm,
            doc.kappa1_per_mm2,
            doc.center_px,
            doc.sx,
            doc.pixel_size_mm,
            doc.image_size_px,
        )
    }
}

impl From<TsaiCamera> for CalibrationDoc {
    fn from(cam: TsaiCamera) -> Self {
        let r = cam.rotation;
        CalibrationDoc {
            rotation: [
                r[(0, 0)],
                r[(0, 1)],
                r[(0, 2)],
                r[(1, 0)],
                r[(1, 1)],
                r[(1, 2)],
                r[(2, 0)],
                r[(2, 1)],
                r[(2, 2)],
            ],
            translation_cm: cam.translation_cm.into(),
            focal_mm: cam.focal_mm,
            kappa1_per_mm2: cam.kappa1_per_mm2,
            center_px: cam.center_px,
            sx: cam.sx,
            pixel_size_mm: cam.pixel_size_mm,
            image_size_px: cam.image_size_px,
        }
    }
}

/// A ray in world coordinates with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldRay {
    pub origin_cm: Vector3<f64>,
    pub direction: Vector3<f64>,
}

impl WorldRay {
    pub fn at(&self, t: f64) -> Vector3<f64> {
        self.origin_cm + self.direction * t
    }

    /// Perpendicular distance from `p` to the (infinite) line of the ray.
    pub fn distance_to(&self, p: &Vector3<f64>) -> f64 {
        let w = p - self.origin_cm;
        (w - self.direction * w.dot(&self.direction)).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightEstimate {
    pub height_cm: f64,
    /// Closest-approach distance between the head ray and the vertical
    /// through the feet point.
    pub residual_cm: f64,
}

impl TsaiCamera {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rotation: Matrix3<f64>,
        translation_cm: Vector3<f64>,
        focal_mm: f64,
        kappa1_per_mm2: f64,
        center_px: [f64; 2],
        sx: f64,
        pixel_size_mm: [f64; 2],
        image_size_px: [u32; 2],
    ) -> Result<Self> {
        if rotation
            .iter()
            .chain(translation_cm.iter())
            .any(|v| !v.is_finite())
            || !kappa1_per_mm2.is_finite()
            || !center_px.iter().all(|v| v.is_finite())
        {
            return Err(Error::Camera("non-finite parameter".into()));
        }
        let gram_err = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if gram_err > ORTHONORMAL_TOL {
            return Err(Error::Camera(format!(
                "rotation is not orthonormal (max |RᵀR - I| = {gram_err:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::Camera(format!("rotation determinant {det} != +1")));
        }
        let positive = [
            ("focal_mm", focal_mm),
            ("sx", sx),
            ("pixel_size_mm[0]", pixel_size_mm[0]),
            ("pixel_size_mm[1]", pixel_size_mm[1]),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Camera(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            rotation,
            translation_cm,
            focal_mm,
            kappa1_per_mm2,
            center_px,
            sx,
            pixel_size_mm,
            image_size_px,
        })
    }

    /// Camera placed at `eye_cm`, looking at `target_cm`, with zero roll
    /// (the image x axis stays horizontal). Principal point at the image center.
    #[allow(clippy::too_many_arguments)]
    pub fn look_at(
        eye_cm: Vector3<f64>,
        target_cm: Vector3<f64>,
        focal_mm: f64,
        kappa1_per_mm2: f64,
        pixel_size_mm: f64,
        image_size_px: [u32; 2],
    ) -> Result<Self> {
        let forward = (target_cm - eye_cm)
            .try_normalize(PARALLEL_EPS)
            .ok_or_else(|| Error::Camera("eye and target coincide".into()))?;
        let right = forward
            .cross(&Vector3::z())
            .try_normalize(PARALLEL_EPS)
            .ok_or_else(|| Error::Camera("viewing direction is vertical".into()))?;
        let down = forward.cross(&right);
        let rotation =
            Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let translation = -(rotation * eye_cm);
        Self::new(
            rotation,
            translation,
            focal_mm,
            kappa1_per_mm2,
            [image_size_px[0] as f64 / 2.0, image_size_px[1] as f64 / 2.0],
            1.0,
            [pixel_size_mm, pixel_size_mm],
            image_size_px,
        )
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation_cm(&self) -> &Vector3<f64> {
        &self.translation_cm
    }

    pub fn focal_mm(&self) -> f64 {
        self.focal_mm
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1_per_mm2
    }

    pub fn center_px(&self) -> [f64; 2] {
        self.center_px
    }

    pub fn image_size_px(&self) -> [u32; 2] {
        self.image_size_px
    }

    /// Camera center in world coordinates (`-Rᵀ·T`).
    pub fn center_world_cm(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation_cm)
    }

    /// World point → camera frame.
    pub fn to_camera(&self, world_cm: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * world_cm + self.translation_cm
    }

    pub fn project(&self, world_cm: &Vector3<f64>) -> Result<ImagePoint> {
        if world_cm.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("world point {world_cm:?}")));
        }
        let p = self.to_camera(world_cm);
        if p.z <= 0.0 {
            return Err(Error::BehindCamera { z: p.z });
        }
        let xu = self.focal_mm * p.x / p.z;
        let yu = self.focal_mm * p.y / p.z;
        let (xd, yd) = self.distort(xu, yu)?;
        Ok(ImagePoint::new(
            self.sx * xd / self.pixel_size_mm[0] + self.center_px[0],
            yd / self.pixel_size_mm[1] + self.center_px[1],
        ))
    }

    /// Solves `Xu = Xd·(1 + κ1·r²)` for the distorted sensor point by
    /// fixed-point iteration from `Xd = Xu`.
    fn distort(&self, xu: f64, yu: f64) -> Result<(f64, f64)> {
        let k = self.kappa1_per_mm2;
        if k == 0.0 {
            return Ok((xu, yu));
        }
        let (mut xd, mut yd) = (xu, yu);
        for _ in 0..DISTORTION_MAX_ITER {
            let r2 = xd * xd + yd * yd;
            let scale = 1.0 + k * r2;
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::Distortion { kappa1: k, r2 });
            }
            let (nx, ny) = (xu / scale, yu / scale);
            let step = (nx - xd).abs().max((ny - yd).abs());
            xd = nx;
            yd = ny;
            if step < DISTORTION_TOL_MM {
                return Ok((xd, yd));
            }
        }
        Err(Error::Distortion {
            kappa1: k,
            r2: xd * xd + yd * yd,
        })
    }

    pub fn back_project_ray(&self, pixel: ImagePoint) -> Result<WorldRay> {
        if !pixel.is_finite() {
            return Err(Error::NonFinite(format!("pixel {pixel:?}")));
        }
        let xd = (pixel.x - self.center_px[0]) * self.pixel_size_mm[0] / self.sx;
        let yd = (pixel.y - self.center_px[1]) * self.pixel_size_mm[1];
        let scale = 1.0 + self.kappa1_per_mm2 * (xd * xd + yd * yd);
        let cam_dir = Vector3::new(xd * scale / self.focal_mm, yd * scale / self.focal_mm, 1.0);
        let direction = (self.rotation.transpose() * cam_dir).normalize();
        Ok(WorldRay {
            origin_cm: self.center_world_cm(),
            direction,
        })
    }

    /// Intersection of the pixel's ray with the horizontal plane `Zw = plane_z_cm`.
    pub fn back_project_to_plane(
        &self,
        pixel: ImagePoint,
        plane_z_cm: f64,
    ) -> Result<Vector3<f64>> {
        let ray = self.back_project_ray(pixel)?;
        if ray.direction.z.abs() <= PARALLEL_EPS {
            return Err(Error::NoIntersection { plane_z_cm });
        }
        let t = (plane_z_cm - ray.origin_cm.z) / ray.direction.z;
        if t <= 0.0 {
            return Err(Error::BehindCamera { z: t });
        }
        Ok(ray.at(t))
    }

    /// Height of a standing person from the image points of the head top and
    /// the feet.
    ///
    /// The feet pixel is back-projected onto the ground plane; the height is
    /// the z-coordinate of the point on the vertical through that ground point
    /// closest to the head ray. Negative heights are returned as-is.
    pub fn estimate_height(
        &self,
        head_px: ImagePoint,
        feet_px: ImagePoint,
    ) -> Result<HeightEstimate> {
        let feet = self.back_project_to_plane(feet_px, 0.0)?;
        let head = self.back_project_ray(head_px)?;

        // Closest points between head(λ) = o + λ·d and vertical(μ) = F + μ·ẑ.
        let d = head.direction;
        let w0 = head.origin_cm - feet;
        let b = d.z;
        let denom = 1.0 - b * b;
        if denom < PARALLEL_EPS {
            return Err(Error::DegenerateGeometry(
                "head ray is parallel to the vertical through the feet".into(),
            ));
        }
        let dw = d.dot(&w0);
        let lambda = (b * w0.z - dw) / denom;
        let mu = (w0.z - b * dw) / denom;
        let on_ray = head.at(lambda);
        let on_vertical = feet + Vector3::z() * mu;
        Ok(HeightEstimate {
            height_cm: feet.z + mu,
            residual_cm: (on_ray - on_vertical).norm(),
        })
    }
}

/// Whether `height_cm` lies in the class range widened by `margin_cm`.
/// `Unknown` matches everything.
pub fn height_class_match(height_cm: f64, class: HeightClass, margin_cm: f64) -> bool {
    match class.range_cm() {
        None => true,
        Some((lo, hi)) => lo - margin_cm <= height_cm && height_cm <= hi + margin_cm,
    }
}
