//! Synthetic calibrated scenes. Each person is a flat vertical billboard
//! standing on the ground plane, painted in horizontal bands (skin, torso
//! color, leg color). Rendering is exact, so masks, boxes and markers are
//! known to the pixel.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attr::canonical_swatch;
use crate::calib::TsaiCamera;
use crate::detect::{write_detection_stream, Detection, DetectionEntry, DetectionRecord, Mask};
use crate::error::{Error, Result};
use crate::frames::{frame_file_name, write_ppm, Rgb, RgbImage};
use crate::model::{
    query_from_target, serialize_sequence, Attributes, BodyMarkers, Color, Difficulty,
    FrameAnnotation, Gender, HeightClass, ImagePoint, LegType, PersonAnnotation, SemanticQuery,
    SequenceAnnotation, TorsoType,
};
use crate::patch::{leg_band, torso_band};
use crate::rng::keyed_rng;

pub const MIN_HEIGHT_CM: f64 = 130.0;
pub const MAX_HEIGHT_CM: f64 = 210.0;

fn default_ratio() -> f64 {
    0.3
}

fn default_background() -> [u8; 3] {
    [96, 112, 96]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LookAt {
    pub eye_cm: [f64; 3],
    pub target_cm: [f64; 3],
    pub focal_mm: f64,
    #[serde(default)]
    pub kappa1_per_mm2: f64,
    pub pixel_size_mm: f64,
    pub image_size_px: [u32; 2],
}

/// Either a full calibration document or a look-at placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraSpec {
    Calibration(TsaiCamera),
    LookAt(LookAt),
}

impl CameraSpec {
    pub fn camera(&self) -> Result<TsaiCamera> {
        match self {
            CameraSpec::Calibration(cam) => Ok(cam.clone()),
            CameraSpec::LookAt(l) => TsaiCamera::look_at(
                Vector3::from(l.eye_cm),
                Vector3::from(l.target_cm),
                l.focal_mm,
                l.kappa1_per_mm2,
                l.pixel_size_mm,
                l.image_size_px,
            ),
        }
    }
}

/// Ground position per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trajectory {
    /// Straight walk from `from_cm` at frame 0 to `to_cm` at the last frame.
    Linear { from_cm: [f64; 2], to_cm: [f64; 2] },
    /// One entry per frame; `null` where the person is absent.
    Points(Vec<Option<[f64; 2]>>),
}

impl Trajectory {
    pub fn at(&self, frame: usize, frame_count: usize) -> Option<[f64; 2]> {
        match self {
            Trajectory::Linear { from_cm, to_cm } => {
                let t = if frame_count > 1 {
                    frame as f64 / (frame_count - 1) as f64
                } else {
                    0.0
                };
                Some([
                    from_cm[0] + t * (to_cm[0] - from_cm[0]),
                    from_cm[1] + t * (to_cm[1] - from_cm[1]),
                ])
            }
            Trajectory::Points(points) => points.get(frame).copied().flatten(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioPerson {
    pub person_id: String,
    pub true_height_cm: f64,
    pub trajectory: Trajectory,
    #[serde(default)]
    pub torso_type: TorsoType,
    #[serde(default)]
    pub torso_color1: Color,
    #[serde(default)]
    pub torso_color2: Color,
    #[serde(default)]
    pub leg_type: LegType,
    #[serde(default)]
    pub leg_color: Color,
    #[serde(default)]
    pub gender: Gender,
    #[serde(default = "default_ratio")]
    pub width_to_height_ratio: f64,
}

/// Marker heights as fractions of the billboard height from its top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerFractions {
    pub neck: f64,
    pub shoulder: f64,
    pub waist: f64,
}

impl Default for MarkerFractions {
    fn default() -> Self {
        Self {
            neck: 0.10,
            shoulder: 0.18,
            waist: 0.50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub sequence_id: String,
    #[serde(default = "Scenario::default_difficulty")]
    pub difficulty: Difficulty,
    pub camera: CameraSpec,
    pub frame_count: usize,
    #[serde(default = "default_background")]
    pub background_color: [u8; 3],
    /// Seed the scenario was generated from; rendering itself draws nothing.
    #[serde(default)]
    pub seed: u64,
    pub target_person_id: String,
    #[serde(default)]
    pub markers: MarkerFractions,
    pub persons: Vec<ScenarioPerson>,
}

/// Where one person lands in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// Index into `Scenario::persons`.
    pub person: usize,
    /// Camera-frame depth of the feet point; larger is farther.
    pub depth_cm: f64,
    /// Unclipped billboard columns and rows, half-open.
    pub cols: (i64, i64),
    pub rows: (i64, i64),
    pub annotation: PersonAnnotation,
}

pub struct RenderedFrame {
    pub image: RgbImage,
    /// Visible persons only, in scenario order.
    pub detections: Vec<Detection>,
    pub annotation: FrameAnnotation,
}

impl Scenario {
    fn default_difficulty() -> Difficulty {
        Difficulty::Easy
    }

    pub fn parse(document: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(document);
        let scenario: Scenario =
            serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Scenario(msg));
        if self.frame_count == 0 {
            return bad("frame_count must be positive".into());
        }
        self.camera.camera()?;
        let mut seen = HashSet::new();
        for p in &self.persons {
            if !seen.insert(p.person_id.as_str()) {
                return bad(format!("duplicate person_id {:?}", p.person_id));
            }
            if !(MIN_HEIGHT_CM..=MAX_HEIGHT_CM).contains(&p.true_height_cm) {
                return bad(format!(
                    "person {:?}: height {} cm outside [{MIN_HEIGHT_CM}, {MAX_HEIGHT_CM}]",
                    p.person_id, p.true_height_cm
                ));
            }
            if !(p.width_to_height_ratio.is_finite() && p.width_to_height_ratio > 0.0) {
                return bad(format!(
                    "person {:?}: width_to_height_ratio must be positive",
                    p.person_id
                ));
            }
            if let Trajectory::Points(points) = &p.trajectory {
                if points.len() != self.frame_count {
                    return bad(format!(
                        "person {:?}: {} trajectory points for {} frames",
                        p.person_id,
                        points.len(),
                        self.frame_count
                    ));
                }
            }
        }
        if !seen.contains(self.target_person_id.as_str()) {
            return bad(format!(
                "target {:?} is not among the persons",
                self.target_person_id
            ));
        }
        Ok(())
    }

    fn check_frame(&self, frame: usize) -> Result<()> {
        if frame >= self.frame_count {
            return Err(Error::FrameRange(format!(
                "frame {frame} outside 0..{}",
                self.frame_count
            )));
        }
        Ok(())
    }

    /// Geometry and annotations of the persons present in `frame`. Persons
    /// behind the camera or entirely outside the image are omitted; occlusion
    /// is not considered here.
    pub fn layout_frame(&self, camera: &TsaiCamera, frame: usize) -> Result<Vec<Placement>> {
        self.check_frame(frame)?;
        let [w, h] = camera.image_size_px();
        let mut out = Vec::new();
        for (index, person) in self.persons.iter().enumerate() {
            let Some([x, y]) = person.trajectory.at(frame, self.frame_count) else {
                continue;
            };
            let feet_w = Vector3::new(x, y, 0.0);
            let head_w = Vector3::new(x, y, person.true_height_cm);
            let (feet, head) = match (camera.project(&feet_w), camera.project(&head_w)) {
                (Ok(f), Ok(h)) => (f, h),
                (Err(Error::BehindCamera { .. }), _) | (_, Err(Error::BehindCamera { .. })) => {
                    continue
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            if feet.y <= head.y {
                return Err(Error::Scenario(format!(
                    "person {:?} projects upside down in frame {frame}",
                    person.person_id
                )));
            }
            let width = person.width_to_height_ratio * (feet.y - head.y);
            let uc = 0.5 * (head.x + feet.x);
            let c0 = (uc - 0.5 * width).round() as i64;
            let c1 = ((uc + 0.5 * width).round() as i64).max(c0 + 1);
            let r0 = head.y.round() as i64;
            let r1 = feet.y.round() as i64 + 1;
            if c1 <= 0 || r1 <= 0 || c0 >= w as i64 || r0 >= h as i64 {
                continue;
            }
            let markers = self.markers_for((c0, c1), (r0, r1), [w, h]);
            out.push(Placement {
                person: index,
                depth_cm: camera.to_camera(&feet_w).z,
                cols: (c0, c1),
                rows: (r0, r1),
                annotation: PersonAnnotation {
                    person_id: person.person_id.clone(),
                    markers,
                    attributes: attributes_of(person),
                },
            });
        }
        Ok(out)
    }

    fn markers_for(
        &self,
        (c0, c1): (i64, i64),
        (r0, r1): (i64, i64),
        [w, h]: [u32; 2],
    ) -> BodyMarkers {
        let pt = |x: f64, y: f64| ImagePoint::new(x.clamp(0.0, w as f64), y.clamp(0.0, h as f64));
        let (l, r) = (c0 as f64, c1 as f64);
        let height = (r1 - r0) as f64;
        let at = |f: f64| r0 as f64 + f * height;
        let m = self.markers;
        BodyMarkers {
            head: pt(0.5 * (l + r), r0 as f64),
            neck_left: pt(l, at(m.neck)),
            neck_right: pt(r, at(m.neck)),
            shoulder_left: pt(l, at(m.shoulder)),
            shoulder_right: pt(r, at(m.shoulder)),
            waist_left: pt(l, at(m.waist)),
            waist_right: pt(r, at(m.waist)),
            foot_left: pt(l, r1 as f64),
            foot_right: pt(r, r1 as f64),
        }
    }

    /// Rasterizes `frame`: painter's algorithm far to near, exact
    /// visible-pixel masks, one detection per person with any visible pixel.
    pub fn render_frame(&self, camera: &TsaiCamera, frame: usize) -> Result<RenderedFrame> {
        let placements = self.layout_frame(camera, frame)?;
        let [w, h] = camera.image_size_px();
        let mut owner: Vec<Option<usize>> = vec![None; w as usize * h as usize];

        let mut order: Vec<usize> = (0..placements.len()).collect();
        order.sort_by(|&a, &b| {
            placements[b]
                .depth_cm
                .total_cmp(&placements[a].depth_cm)
                .then(b.cmp(&a))
        });
        for &k in &order {
            let p = &placements[k];
            let (x0, x1) = (p.cols.0.max(0) as usize, p.cols.1.min(w as i64) as usize);
            let (y0, y1) = (p.rows.0.max(0) as usize, p.rows.1.min(h as i64) as usize);
            for y in y0..y1 {
                owner[y * w as usize + x0..y * w as usize + x1].fill(Some(k));
            }
        }

        let palettes: Vec<RowPalette> = placements
            .iter()
            .map(|p| RowPalette::new(&self.persons[p.person], p.rows))
            .collect();
        let mut masks: Vec<Mask> = placements.iter().map(|_| Mask::new(w, h)).collect();
        let mut image = RgbImage::from_pixel(w, h, Rgb(self.background_color));
        for y in 0..h {
            for x in 0..w {
                if let Some(k) = owner[(y * w + x) as usize] {
                    image.put_pixel(x, y, Rgb(palettes[k].color_at(y as i64)));
                    masks[k].set(x, y, true);
                }
            }
        }

        let detections = placements
            .iter()
            .zip(masks)
            .filter_map(|(p, mask)| {
                let bbox = mask.bounding_box()?;
                Some(Detection {
                    bbox,
                    mask,
                    source_person_id: Some(p.annotation.person_id.clone()),
                    detector_score: 1.0,
                })
            })
            .collect();
        Ok(RenderedFrame {
            image,
            detections,
            annotation: FrameAnnotation {
                index: frame,
                persons: placements.into_iter().map(|p| p.annotation).collect(),
            },
        })
    }

    /// The full annotation document, from layout alone (no rasterization).
    pub fn annotations(&self) -> Result<SequenceAnnotation> {
        let camera = self.camera.camera()?;
        let frames = (0..self.frame_count)
            .map(|i| {
                Ok(FrameAnnotation {
                    index: i,
                    persons: self
                        .layout_frame(&camera, i)?
                        .into_iter()
                        .map(|p| p.annotation)
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SequenceAnnotation {
            sequence_id: self.sequence_id.clone(),
            difficulty: self.difficulty,
            image_size: camera.image_size_px(),
            target_person_id: self.target_person_id.clone(),
            frames,
        })
    }

    /// Query describing the target exactly as annotated.
    pub fn query(&self) -> SemanticQuery {
        let p = self
            .persons
            .iter()
            .find(|p| p.person_id == self.target_person_id)
            .expect("validated scenario has its target");
        SemanticQuery {
            height_class: HeightClass::nearest(p.true_height_cm),
            torso_type: p.torso_type,
            torso_color1: p.torso_color1,
            torso_color2: p.torso_color2,
            gender: p.gender,
        }
    }

    /// A random valid scenario: 2 to 6 people walking straight lines in front
    /// of an elevated camera, the first one being the target.
    pub fn random(seed: u64) -> Scenario {
        const SALT: u64 = 0x5CE7E;
        let mut rng = keyed_rng(seed, &[SALT]);
        let colors: Vec<Color> = Color::culture_colors()
            .iter()
            .copied()
            .filter(|c| *c != Color::Skin)
            .collect();
        let torso_types = &TorsoType::ALL[1..];
        let leg_types = &LegType::ALL[1..];
        let frame_count = rng.random_range(40..=60);
        let n = rng.random_range(2..=6);

        let ground = |rng: &mut rand_chacha::ChaCha8Rng| {
            [
                rng.random_range(-250.0..250.0),
                rng.random_range(150.0..650.0),
            ]
        };
        let persons = (0..n)
            .map(|i| {
                let c1 = *colors.choose(&mut rng).unwrap();
                let c2 = if rng.random_bool(0.5) {
                    Color::Unknown
                } else {
                    **colors
                        .iter()
                        .filter(|c| **c != c1)
                        .collect::<Vec<_>>()
                        .choose(&mut rng)
                        .unwrap()
                };
                ScenarioPerson {
                    person_id: format!("p{}", i + 1),
                    true_height_cm: rng.random_range(135.0..205.0),
                    trajectory: Trajectory::Linear {
                        from_cm: ground(&mut rng),
                        to_cm: ground(&mut rng),
                    },
                    torso_type: *torso_types.choose(&mut rng).unwrap(),
                    torso_color1: c1,
                    torso_color2: c2,
                    leg_type: *leg_types.choose(&mut rng).unwrap(),
                    leg_color: *colors.choose(&mut rng).unwrap(),
                    gender: if rng.random_bool(0.5) {
                        Gender::Male
                    } else {
                        Gender::Female
                    },
                    width_to_height_ratio: 0.3,
                }
            })
            .collect();
        Scenario {
            sequence_id: format!("random-{seed}"),
            difficulty: *Difficulty::ALL.choose(&mut rng).unwrap(),
            camera: CameraSpec::LookAt(LookAt {
                eye_cm: [
                    rng.random_range(-100.0..100.0),
                    rng.random_range(-700.0..-500.0),
                    rng.random_range(300.0..500.0),
                ],
                target_cm: [0.0, 350.0, 60.0],
                focal_mm: rng.random_range(5.0..8.0),
                kappa1_per_mm2: rng.random_range(-1e-4..=0.0),
                pixel_size_mm: 0.01,
                image_size_px: [640, 480],
            }),
            frame_count,
            background_color: default_background(),
            seed,
            target_person_id: "p1".into(),
            markers: MarkerFractions::default(),
            persons,
        }
    }
}

fn attributes_of(p: &ScenarioPerson) -> Attributes {
    let mut other = BTreeMap::new();
    other.insert("height_cm".to_string(), serde_json::json!(p.true_height_cm));
    Attributes {
        height: HeightClass::nearest(p.true_height_cm),
        torso_type: p.torso_type,
        torso_color1: p.torso_color1,
        torso_color2: p.torso_color2,
        gender: p.gender,
        leg_type: p.leg_type,
        leg_color1: p.leg_color,
        other,
    }
}

/// Row → color lookup of one billboard.
struct RowPalette {
    torso_rows: (i64, i64),
    leg_rows: (i64, i64),
    torso: [u8; 3],
    leg: [u8; 3],
    below_legs: [u8; 3],
}

impl RowPalette {
    fn new(p: &ScenarioPerson, (r0, r1): (i64, i64)) -> Self {
        let height = (r1 - r0) as f64;
        let skin = canonical_swatch(Color::Skin);
        let leg = canonical_swatch(p.leg_color);
        let bare_shins = matches!(
            p.leg_type,
            LegType::Skirt | LegType::LongShorts | LegType::ShortShorts
        );
        Self {
            torso_rows: torso_band(p.torso_type).rows(r0 as f64, height),
            leg_rows: leg_band(p.leg_type).rows(r0 as f64, height),
            torso: canonical_swatch(p.torso_color1),
            leg,
            below_legs: if bare_shins { skin } else { leg },
        }
    }

    fn color_at(&self, y: i64) -> [u8; 3] {
        if y < self.torso_rows.0 {
            canonical_swatch(Color::Skin)
        } else if y < self.leg_rows.0.max(self.torso_rows.1) {
            self.torso
        } else if y < self.leg_rows.1 {
            self.leg
        } else {
            self.below_legs
        }
    }
}

/// What [`write_outputs`] produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthSummary {
    pub sequence_id: String,
    pub frame_count: usize,
    pub detection_count: usize,
    pub files: Vec<String>,
}

/// Writes `frames/NNNNNN.ppm`, `detections.jsonl`, `annotations.json`,
/// `calibration.json`, `query.json` and a copy of the scenario into `dir`.
pub fn write_outputs(scenario: &Scenario, dir: &Path) -> Result<SynthSummary> {
    scenario.validate()?;
    let camera = scenario.camera.camera()?;
    let frames_dir = dir.join("frames");
    fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;

    let mut records = Vec::with_capacity(scenario.frame_count);
    let mut annotated = Vec::with_capacity(scenario.frame_count);
    for i in 0..scenario.frame_count {
        let rendered = scenario.render_frame(&camera, i)?;
        write_ppm(&frames_dir.join(frame_file_name(i)), &rendered.image)?;
        records.push(DetectionRecord {
            frame: i,
            detections: rendered
                .detections
                .iter()
                .map(DetectionEntry::from_detection)
                .collect(),
        });
        annotated.push(rendered.annotation);
    }
    let sequence = SequenceAnnotation {
        sequence_id: scenario.sequence_id.clone(),
        difficulty: scenario.difficulty,
        image_size: camera.image_size_px(),
        target_person_id: scenario.target_person_id.clone(),
        frames: annotated,
    };
    sequence.validate()?;
    let query = query_from_target(&sequence)?;

    let write = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write("detections.jsonl", write_detection_stream(&records)?)?;
    write("annotations.json", serialize_sequence(&sequence)?)?;
    write("calibration.json", serde_json::to_string_pretty(&camera)?)?;
    write("query.json", serde_json::to_string_pretty(&query)?)?;
    write("scenario.json", scenario.to_json()?)?;

    Ok(SynthSummary {
        sequence_id: scenario.sequence_id.clone(),
        frame_count: scenario.frame_count,
        detection_count: records.iter().map(|r| r.detections.len()).sum(),
        files: vec![
            "frames/".into(),
            "detections.jsonl".into(),
            "annotations.json".into(),
            "calibration.json".into(),
            "query.json".into(),
            "scenario.json".into(),
        ],
    })
}
