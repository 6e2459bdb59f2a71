use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::geometry::{BBox, ImagePoint};
use super::taxonomy::{Color, Difficulty, Gender, HeightClass, LegType, TorsoType};
use crate::error::{Error, Result};

/// The nine annotated body points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyMarkers {
    pub head: ImagePoint,
    pub neck_left: ImagePoint,
    pub neck_right: ImagePoint,
    pub shoulder_left: ImagePoint,
    pub shoulder_right: ImagePoint,
    pub waist_left: ImagePoint,
    pub waist_right: ImagePoint,
    pub foot_left: ImagePoint,
    pub foot_right: ImagePoint,
}

impl BodyMarkers {
    /// The eight markers that bound the box horizontally, with their names.
    pub fn non_head(&self) -> [(&'static str, ImagePoint); 8] {
        [
            ("neck_left", self.neck_left),
            ("neck_right", self.neck_right),
            ("shoulder_left", self.shoulder_left),
            ("shoulder_right", self.shoulder_right),
            ("waist_left", self.waist_left),
            ("waist_right", self.waist_right),
            ("foot_left", self.foot_left),
            ("foot_right", self.foot_right),
        ]
    }

    pub fn all(&self) -> [(&'static str, ImagePoint); 9] {
        let n = self.non_head();
        [
            ("head", self.head),
            n[0],
            n[1],
            n[2],
            n[3],
            n[4],
            n[5],
            n[6],
            n[7],
        ]
    }

    /// Checks finiteness, head-above-feet ordering and (when given) that every
    /// marker lies within `[0, w] × [0, h]`.
    pub fn validate(&self, image_size: Option<[u32; 2]>) -> Result<()> {
        for (name, p) in self.all() {
            if !p.is_finite() {
                return Err(Error::Annotation(format!("marker {name} is not finite")));
            }
            if let Some([w, h]) = image_size {
                if p.x < 0.0 || p.y < 0.0 || p.x > w as f64 || p.y > h as f64 {
                    return Err(Error::Annotation(format!(
                        "marker {name} ({}, {}) outside {w}x{h} frame",
                        p.x, p.y
                    )));
                }
            }
        }
        if self.head.y > self.foot_left.y.min(self.foot_right.y) {
            return Err(Error::Annotation(format!(
                "head y {} below a foot marker",
                self.head.y
            )));
        }
        Ok(())
    }
}

/// Ground-truth box from body markers: head y to the lower foot y vertically,
/// horizontal extremes of the eight non-head markers horizontally.
pub fn ground_truth_box(markers: &BodyMarkers) -> Result<BBox> {
    let top = markers.head.y;
    let bottom = markers.foot_left.y.max(markers.foot_right.y);
    let non_head = markers.non_head();
    let (left_name, left) = non_head
        .iter()
        .copied()
        .min_by(|a, b| a.1.x.total_cmp(&b.1.x))
        .expect("eight markers");
    let (right_name, right) = non_head
        .iter()
        .copied()
        .max_by(|a, b| a.1.x.total_cmp(&b.1.x))
        .expect("eight markers");
    if right.x <= left.x {
        return Err(Error::DegenerateBox {
            markers: format!("{left_name}/{right_name}"),
            detail: format!("zero width at x = {}", left.x),
        });
    }
    if bottom <= top {
        return Err(Error::DegenerateBox {
            markers: "head/foot_left/foot_right".into(),
            detail: format!("zero height at y = {top}"),
        });
    }
    BBox::from_corners(left.x, top, right.x, bottom)
}

/// Attribute record of one annotated person.
///
/// The consumed attributes are typed; everything else is preserved verbatim
/// in `other`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Attributes {
    #[serde(default)]
    pub height: HeightClass,
    #[serde(default)]
    pub torso_type: TorsoType,
    #[serde(default)]
    pub torso_color1: Color,
    #[serde(default)]
    pub torso_color2: Color,
    #[serde(default)]
    pub gender: Gender,
    #[serde(default)]
    pub leg_type: LegType,
    #[serde(default)]
    pub leg_color1: Color,
    #[serde(flatten)]
    pub other: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonAnnotation {
    pub person_id: String,
    pub markers: BodyMarkers,
    #[serde(default)]
    pub attributes: Attributes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameAnnotation {
    pub index: usize,
    pub persons: Vec<PersonAnnotation>,
}

impl FrameAnnotation {
    pub fn person(&self, person_id: &str) -> Option<&PersonAnnotation> {
        self.persons.iter().find(|p| p.person_id == person_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceAnnotation {
    pub sequence_id: String,
    pub difficulty: Difficulty,
    pub image_size: [u32; 2],
    pub target_person_id: String,
    pub frames: Vec<FrameAnnotation>,
}

impl SequenceAnnotation {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn validate(&self) -> Result<()> {
        let [w, h] = self.image_size;
        if w == 0 || h == 0 {
            return Err(Error::Annotation(format!("image size {w}x{h} is empty")));
        }
        if self.frames.is_empty() {
            return Err(Error::Annotation("sequence has no frames".into()));
        }
        let mut target_seen = false;
        for (pos, frame) in self.frames.iter().enumerate() {
            if frame.index != pos {
                return Err(Error::Annotation(format!(
                    "frame at position {pos} has index {}",
                    frame.index
                )));
            }
            let mut ids = HashSet::new();
            for person in &frame.persons {
                if !ids.insert(person.person_id.as_str()) {
                    return Err(Error::Annotation(format!(
                        "person {:?} annotated twice in frame {pos}",
                        person.person_id
                    )));
                }
                person
                    .markers
                    .validate(Some(self.image_size))
                    .map_err(|e| {
                        Error::Annotation(format!(
                            "frame {pos}, person {:?}: {e}",
                            person.person_id
                        ))
                    })?;
                target_seen |= person.person_id == self.target_person_id;
            }
        }
        if !target_seen {
            return Err(Error::MissingTarget(self.target_person_id.clone()));
        }
        Ok(())
    }

    /// Ground-truth box of the target per frame (`None` where absent).
    pub fn target_boxes(&self) -> Result<Vec<Option<BBox>>> {
        self.frames
            .iter()
            .map(|f| {
                f.person(&self.target_person_id)
                    .map(|p| ground_truth_box(&p.markers))
                    .transpose()
            })
            .collect()
    }

    pub fn person(&self, frame: usize, person_id: &str) -> Option<&PersonAnnotation> {
        self.frames.get(frame).and_then(|f| f.person(person_id))
    }
}

/// A person description; `Unknown` fields skip their filter stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticQuery {
    pub height_class: HeightClass,
    pub torso_type: TorsoType,
    pub torso_color1: Color,
    pub torso_color2: Color,
    pub gender: Gender,
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

pub fn parse_sequence(document: &str) -> Result<SequenceAnnotation> {
    let seq: SequenceAnnotation = from_json(document)?;
    seq.validate()?;
    Ok(seq)
}

pub fn serialize_sequence(seq: &SequenceAnnotation) -> Result<String> {
    Ok(serde_json::to_string_pretty(seq)?)
}

pub fn parse_query(document: &str) -> Result<SemanticQuery> {
    from_json(document)
}

/// Builds the query from the target's annotations. For each attribute the
/// first known value across frames wins.
pub fn query_from_target(seq: &SequenceAnnotation) -> Result<SemanticQuery> {
    let mut query = SemanticQuery::default();
    let mut seen = false;
    for person in seq
        .frames
        .iter()
        .filter_map(|f| f.person(&seq.target_person_id))
    {
        seen = true;
        let a = &person.attributes;
        if query.height_class.is_unknown() {
            query.height_class = a.height;
        }
        if query.torso_type.is_unknown() {
            query.torso_type = a.torso_type;
        }
        if query.torso_color1.is_unknown() {
            query.torso_color1 = a.torso_color1;
        }
        if query.torso_color2.is_unknown() {
            query.torso_color2 = a.torso_color2;
        }
        if query.gender.is_unknown() {
            query.gender = a.gender;
        }
    }
    if !seen {
        return Err(Error::MissingTarget(seq.target_person_id.clone()));
    }
    Ok(query)
}
