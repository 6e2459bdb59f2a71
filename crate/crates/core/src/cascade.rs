//! The linear filter cascade (height → torso color → gender) with IoU-based
//! box regression as the fallback.
//!
//! Candidates are carried between stages as indices into the frame's
//! detection list, so every chosen box is, by construction, one of the
//! detector's boxes.

use serde::{Deserialize, Serialize};

use crate::attr::{ClassifyInput, ColorClassifier, ColorSlot, GenderClassifier, GenderVerdict};
use crate::calib::{height_class_match, TsaiCamera};
use crate::detect::{head_feet_points, Detection, DetectionProvider};
use crate::error::{Error, Result};
use crate::eval::iou;
use crate::frames::{FrameSource, RgbImage};
use crate::model::{BBox, Gender, SemanticQuery};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeConfig {
    pub height_margin_cm: f64,
    /// Regression accepts the best box only if its IoU is strictly above this.
    pub regression_min_iou: f64,
    /// Leading frames that are not processed (background warm-up).
    pub skip_frames: usize,
    /// Accept as soon as a stage leaves exactly one candidate.
    pub early_exit: bool,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            height_margin_cm: 0.0,
            regression_min_iou: 0.0,
            skip_frames: 30,
            early_exit: true,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.regression_min_iou) {
            return Err(Error::Schema {
                path: "regression_min_iou".into(),
                message: format!("must lie in [0, 1), got {}", self.regression_min_iou),
            });
        }
        if !self.height_margin_cm.is_finite() {
            return Err(Error::Schema {
                path: "height_margin_cm".into(),
                message: "must be finite".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Biometric,
    Regression,
    None,
}

/// Candidate counts after detection, height, color and gender. `None` marks a
/// stage that did not run for the frame.
pub type StageCounts = [Option<usize>; 4];

pub const STAGE_DETECTION: usize = 0;
pub const STAGE_HEIGHT: usize = 1;
pub const STAGE_COLOR: usize = 2;
pub const STAGE_GENDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameResult {
    pub frame: usize,
    #[serde(rename = "box")]
    pub chosen: Option<BBox>,
    pub method: Method,
    pub color_rank: Option<u8>,
    pub stage_counts: StageCounts,
    pub tie_break_used: bool,
}

impl FrameResult {
    pub fn empty(frame: usize) -> Self {
        Self {
            frame,
            chosen: None,
            method: Method::None,
            color_rank: None,
            stage_counts: [None; 4],
            tie_break_used: false,
        }
    }
}

/// Per-sequence memory of the cascade.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CascadeState {
    /// Box chosen in the most recent frame that produced one.
    pub last_confirmed: Option<BBox>,
    /// A biometric match has happened at least once.
    pub ever_matched: bool,
}

pub struct Classifiers {
    pub color: Box<dyn ColorClassifier>,
    pub gender: Box<dyn GenderClassifier>,
}

/// Read-only inputs shared by every frame of a sequence.
pub struct CascadeContext<'a> {
    pub query: &'a SemanticQuery,
    pub camera: &'a TsaiCamera,
    pub config: &'a CascadeConfig,
    pub classifiers: &'a Classifiers,
}

/// Frame-specific classifier inputs.
#[derive(Clone, Copy)]
pub struct FrameView<'a> {
    pub frame: usize,
    pub detections: &'a [Detection],
    pub image: Option<&'a RgbImage>,
}

impl<'a> FrameView<'a> {
    fn input(&self, index: usize, query: &SemanticQuery) -> ClassifyInput<'a> {
        ClassifyInput {
            frame: self.frame,
            detection: &self.detections[index],
            image: self.image,
            torso_type: query.torso_type,
        }
    }
}

/// Keeps candidates whose estimated height falls in the queried class.
/// Detections whose height cannot be estimated are dropped.
pub fn height_filter(
    dets: &[Detection],
    candidates: &[usize],
    query: &SemanticQuery,
    camera: &TsaiCamera,
    margin_cm: f64,
) -> Vec<usize> {
    if query.height_class.is_unknown() {
        return candidates.to_vec();
    }
    candidates
        .iter()
        .copied()
        .filter(|&i| {
            head_feet_points(&dets[i])
                .and_then(|(head, feet)| camera.estimate_height(head, feet))
                .map(|est| height_class_match(est.height_cm, query.height_class, margin_cm))
                .unwrap_or(false)
        })
        .collect()
}

/// Keeps candidates whose torso color equals the first query color (rank 1);
/// failing that, those equal to the second query color (rank 2).
pub fn color_filter(
    view: &FrameView<'_>,
    candidates: &[usize],
    query: &SemanticQuery,
    classifier: &dyn ColorClassifier,
) -> (Vec<usize>, Option<u8>) {
    if query.torso_color1.is_unknown() {
        return (candidates.to_vec(), None);
    }
    let matching = |slot: ColorSlot, wanted| -> Vec<usize> {
        candidates
            .iter()
            .copied()
            .filter(|&i| {
                classifier
                    .classify(&view.input(i, query), slot)
                    .map(|v| v.label == wanted)
                    .unwrap_or(false)
            })
            .collect()
    };
    let rank1 = matching(ColorSlot::Primary, query.torso_color1);
    if !rank1.is_empty() {
        return (rank1, Some(1));
    }
    if !query.torso_color2.is_unknown() {
        let rank2 = matching(ColorSlot::Secondary, query.torso_color2);
        if !rank2.is_empty() {
            return (rank2, Some(2));
        }
    }
    (Vec::new(), None)
}

/// Classifies every candidate's gender and keeps those matching the query.
/// An unknown query keeps everyone; their verdicts still feed selection.
pub fn gender_filter(
    view: &FrameView<'_>,
    candidates: &[usize],
    query: &SemanticQuery,
    classifier: &dyn GenderClassifier,
) -> Vec<(usize, GenderVerdict)> {
    let unknown = GenderVerdict {
        label: Gender::Unknown,
        confidence: 0.0,
    };
    candidates
        .iter()
        .filter_map(|&i| {
            let verdict = classifier.classify(&view.input(i, query));
            if query.gender.is_unknown() {
                Some((i, verdict.unwrap_or(unknown)))
            } else {
                match verdict {
                    Ok(v) if v.label == query.gender => Some((i, v)),
                    _ => None,
                }
            }
        })
        .collect()
}

/// Highest confidence wins; ties go to the lowest detection index.
pub fn select_best(scored: &[(usize, f64)]) -> Option<usize> {
    scored
        .iter()
        .copied()
        .fold(None, |best: Option<(usize, f64)>, (i, c)| match best {
            Some((bi, bc)) if bc > c || (bc == c && bi < i) => Some((bi, bc)),
            _ => Some((i, c)),
        })
        .map(|(i, _)| i)
}

/// Index of the detection with the largest IoU against `prev`, provided that
/// IoU is strictly greater than `min_iou`. Ties go to the lowest index.
pub fn iou_regress(prev: &BBox, dets: &[Detection], min_iou: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in dets.iter().enumerate() {
        let score = iou(prev, &d.bbox);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.filter(|&(_, s)| s > min_iou).map(|(i, _)| i)
}

enum StageOutcome {
    Continue(Vec<usize>),
    Accept(usize),
    Empty,
}

fn after_stage(survivors: Vec<usize>, early_exit: bool) -> StageOutcome {
    match survivors.len() {
        0 => StageOutcome::Empty,
        1 if early_exit => StageOutcome::Accept(survivors[0]),
        _ => StageOutcome::Continue(survivors),
    }
}

/// Runs the cascade on one frame and advances `state`.
pub fn run_frame(
    state: &mut CascadeState,
    view: &FrameView<'_>,
    ctx: &CascadeContext<'_>,
) -> FrameResult {
    let mut result = FrameResult::empty(view.frame);
    let dets = view.detections;
    result.stage_counts[STAGE_DETECTION] = Some(dets.len());

    let biometric = cascade_stages(view, ctx, &mut result);
    match biometric {
        Some(index) => {
            result.method = Method::Biometric;
            result.chosen = Some(dets[index].bbox);
            state.ever_matched = true;
        }
        None => {
            let regressed = match state.last_confirmed {
                Some(prev) if state.ever_matched => {
                    iou_regress(&prev, dets, ctx.config.regression_min_iou)
                }
                _ => None,
            };
            if let Some(index) = regressed {
                result.method = Method::Regression;
                result.chosen = Some(dets[index].bbox);
            }
        }
    }
    if let Some(chosen) = result.chosen {
        state.last_confirmed = Some(chosen);
    }
    result
}

/// The biometric path; returns the accepted detection index, if any.
fn cascade_stages(
    view: &FrameView<'_>,
    ctx: &CascadeContext<'_>,
    result: &mut FrameResult,
) -> Option<usize> {
    let early = ctx.config.early_exit;
    let all: Vec<usize> = (0..view.detections.len()).collect();
    if all.is_empty() {
        return None;
    }

    let by_height = height_filter(
        view.detections,
        &all,
        ctx.query,
        ctx.camera,
        ctx.config.height_margin_cm,
    );
    result.stage_counts[STAGE_HEIGHT] = Some(by_height.len());
    let candidates = match after_stage(by_height, early) {
        StageOutcome::Continue(c) => c,
        StageOutcome::Accept(i) => return Some(i),
        StageOutcome::Empty => return None,
    };

    let (by_color, rank) =
        color_filter(view, &candidates, ctx.query, ctx.classifiers.color.as_ref());
    result.stage_counts[STAGE_COLOR] = Some(by_color.len());
    result.color_rank = rank;
    let candidates = match after_stage(by_color, early) {
        StageOutcome::Continue(c) => c,
        StageOutcome::Accept(i) => return Some(i),
        StageOutcome::Empty => return None,
    };

    let by_gender = gender_filter(
        view,
        &candidates,
        ctx.query,
        ctx.classifiers.gender.as_ref(),
    );
    result.stage_counts[STAGE_GENDER] = Some(by_gender.len());
    if by_gender.len() > 1 {
        result.tie_break_used = true;
    }
    let scored: Vec<(usize, f64)> = by_gender.iter().map(|(i, v)| (*i, v.confidence)).collect();
    select_best(&scored)
}

/// Runs every frame in order. Frames before `skip_frames` are not looked at:
/// they yield an empty `none` result and leave the state untouched.
pub fn run_sequence(
    frame_count: usize,
    provider: &dyn DetectionProvider,
    frames: &dyn FrameSource,
    ctx: &CascadeContext<'_>,
) -> Result<Vec<FrameResult>> {
    ctx.config.validate()?;
    let mut state = CascadeState::default();
    let skip = ctx.config.skip_frames.min(frame_count);
    let mut results: Vec<FrameResult> = (0..skip).map(FrameResult::empty).collect();
    for frame in skip..frame_count {
        let detections = provider.detections_for(frame)?;
        let image = frames.frame(frame)?;
        let view = FrameView {
            frame,
            detections: &detections,
            image: image.as_ref(),
        };
        results.push(run_frame(&mut state, &view, ctx));
    }
    Ok(results)
}

pub fn write_results(results: &[FrameResult]) -> Result<String> {
    let mut out = String::new();
    for r in results {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_results(text: &str) -> Result<Vec<FrameResult>> {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attr::ColorVerdict;
    use crate::detect::Mask;
    use crate::model::{Color, HeightClass, TorsoType};
    use nalgebra::Vector3;
    use std::collections::HashMap;

    /// Classifier answering from a per-detection-index table.
    struct Fixed<T: Copy> {
        by_x: HashMap<i64, T>,
    }

    impl<T: Copy> Fixed<T> {
        fn lookup(&self, det: &Detection) -> Result<T> {
            self.by_x
                .get(&(det.bbox.x as i64))
                .copied()
                .ok_or_else(|| Error::ProviderMismatch("unknown detection".into()))
        }
    }

    impl ColorClassifier for Fixed<(Color, Color)> {
        fn name(&self) -> &str {
            "fixed"
        }
        fn classify(&self, input: &ClassifyInput<'_>, slot: ColorSlot) -> Result<ColorVerdict> {
            let (c1, c2) = self.lookup(input.detection)?;
            let label = if slot == ColorSlot::Primary { c1 } else { c2 };
            Ok(ColorVerdict {
                label,
                confidence: 1.0,
            })
        }
    }

    impl GenderClassifier for Fixed<(Gender, f64)> {
        fn name(&self) -> &str {
            "fixed"
        }
        fn classify(&self, input: &ClassifyInput<'_>) -> Result<GenderVerdict> {
            let (label, confidence) = self.lookup(input.detection)?;
            Ok(GenderVerdict { label, confidence })
        }
    }

    fn camera() -> TsaiCamera {
        TsaiCamera::look_at(
            Vector3::new(0.0, -800.0, 400.0),
            Vector3::new(0.0, 400.0, 0.0),
            8.0,
            0.0,
            0.01,
            [640, 480],
        )
        .unwrap()
    }

    /// Detection of a person of `height_cm` standing at world (x, 300).
    /// Box x-coordinates are unique per person and key the fixed classifiers.
    fn person(cam: &TsaiCamera, x_cm: f64, height_cm: f64) -> Detection {
        let feet = cam.project(&Vector3::new(x_cm, 300.0, 0.0)).unwrap();
        let head = cam.project(&Vector3::new(x_cm, 300.0, height_cm)).unwrap();
        let top = head.y.round();
        let bottom = feet.y.round();
        let cx = feet.x.round();
        let bbox = BBox::new(cx - 5.0, top, 11.0, bottom - top + 1.0).unwrap();
        Detection {
            bbox,
            mask: Mask::full_box(&bbox, 640, 480),
            source_person_id: None,
            detector_score: 1.0,
        }
    }

    struct Scene {
        cam: TsaiCamera,
        dets: Vec<Detection>,
        classifiers: Classifiers,
    }

    fn scene(people: &[(f64, f64, Color, Color, Gender, f64)]) -> Scene {
        let cam = camera();
        let dets: Vec<Detection> = people.iter().map(|p| person(&cam, p.0, p.1)).collect();
        let colors = dets
            .iter()
            .zip(people)
            .map(|(d, p)| (d.bbox.x as i64, (p.2, p.3)))
            .collect();
        let genders = dets
            .iter()
            .zip(people)
            .map(|(d, p)| (d.bbox.x as i64, (p.4, p.5)))
            .collect();
        Scene {
            cam,
            dets,
            classifiers: Classifiers {
                color: Box::new(Fixed { by_x: colors }),
                gender: Box::new(Fixed { by_x: genders }),
            },
        }
    }

    fn query(h: HeightClass, c1: Color, c2: Color, g: Gender) -> SemanticQuery {
        SemanticQuery {
            height_class: h,
            torso_type: TorsoType::ShortSleeve,
            torso_color1: c1,
            torso_color2: c2,
            gender: g,
        }
    }

    fn view(dets: &[Detection]) -> FrameView<'_> {
        FrameView {
            frame: 0,
            detections: dets,
            image: None,
        }
    }

    use Color::{Black, Blue, Green, Grey, Pink, Red, White, Yellow};
    use Gender::{Female, Male};
    const NA: Color = Color::Unknown;

    #[test]
    fn height_filter_keeps_three_of_five() {
        let s = scene(&[
            (-200.0, 140.0, Red, NA, Male, 1.0),
            (-100.0, 158.0, Red, NA, Male, 1.0),
            (0.0, 163.0, Red, NA, Male, 1.0),
            (100.0, 167.0, Red, NA, Male, 1.0),
            (200.0, 200.0, Red, NA, Male, 1.0),
        ]);
        let all: Vec<usize> = (0..5).collect();
        let q = query(HeightClass::Short, Red, NA, Male);
        assert_eq!(height_filter(&s.dets, &all, &q, &s.cam, 0.0), vec![1, 2, 3]);

        let q = query(HeightClass::Unknown, Red, NA, Male);
        assert_eq!(height_filter(&s.dets, &all, &q, &s.cam, 0.0), all);

        let q = query(HeightClass::Tall, Red, NA, Male);
        assert!(height_filter(&s.dets, &[0, 1, 2, 3], &q, &s.cam, 0.0).is_empty());
    }

    #[test]
    fn color_filter_ranks() {
        let s = scene(&[
            (-100.0, 160.0, White, Black, Female, 1.0),
            (0.0, 160.0, White, Grey, Female, 1.0),
            (100.0, 160.0, Blue, White, Female, 1.0),
        ]);
        let v = view(&s.dets);
        let c = s.classifiers.color.as_ref();

        let q = query(HeightClass::Short, White, NA, Female);
        assert_eq!(color_filter(&v, &[0, 1, 2], &q, c), (vec![0, 1], Some(1)));

        let q = query(HeightClass::Short, Grey, White, Female);
        assert_eq!(color_filter(&v, &[0, 2], &q, c), (vec![2], Some(2)));

        let q = query(HeightClass::Short, Yellow, Pink, Female);
        assert_eq!(color_filter(&v, &[0, 1, 2], &q, c), (vec![], None));

        let q = query(HeightClass::Short, NA, Pink, Female);
        assert_eq!(color_filter(&v, &[0, 1, 2], &q, c), (vec![0, 1, 2], None));
    }

    #[test]
    fn gender_filter_cases() {
        let s = scene(&[
            (-100.0, 160.0, White, Black, Male, 0.9),
            (0.0, 160.0, White, Grey, Female, 0.8),
        ]);
        let v = view(&s.dets);
        let g = s.classifiers.gender.as_ref();
        let ids =
            |r: Vec<(usize, GenderVerdict)>| r.into_iter().map(|(i, _)| i).collect::<Vec<_>>();

        assert_eq!(
            ids(gender_filter(
                &v,
                &[0, 1],
                &query(HeightClass::Short, White, NA, Male),
                g
            )),
            vec![0]
        );
        assert_eq!(
            ids(gender_filter(
                &v,
                &[0, 1],
                &query(HeightClass::Short, White, NA, Gender::Unknown),
                g
            )),
            vec![0, 1]
        );
        assert!(gender_filter(&v, &[1], &query(HeightClass::Short, White, NA, Male), g).is_empty());
    }

    #[test]
    fn select_best_rules() {
        assert_eq!(select_best(&[(0, 0.9), (1, 0.7)]), Some(0));
        assert_eq!(select_best(&[(3, 0.8), (1, 0.8)]), Some(1));
        assert_eq!(select_best(&[(4, 0.1)]), Some(4));
        assert_eq!(select_best(&[]), None);
    }

    fn bare(bbox: BBox) -> Detection {
        Detection {
            bbox,
            mask: Mask::new(1, 1),
            source_person_id: None,
            detector_score: 1.0,
        }
    }

    #[test]
    fn regression_requires_positive_overlap() {
        let prev = BBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        assert_eq!(iou_regress(&prev, &[], 0.0), None);
        let far = vec![bare(BBox::new(50.0, 50.0, 5.0, 5.0).unwrap()); 3];
        assert_eq!(iou_regress(&prev, &far, 0.0), None);
        let dets = vec![
            bare(BBox::new(50.0, 50.0, 5.0, 5.0).unwrap()),
            bare(BBox::new(2.0, 0.0, 10.0, 10.0).unwrap()),
            bare(BBox::new(1.0, 0.0, 10.0, 10.0).unwrap()),
        ];
        assert_eq!(iou_regress(&prev, &dets, 0.0), Some(2));
        assert_eq!(iou_regress(&prev, &dets, 0.9), None);
    }

    #[test]
    fn single_height_survivor_is_accepted_early() {
        let s = scene(&[
            (-100.0, 140.0, Red, NA, Male, 1.0),
            (0.0, 172.0, Red, NA, Male, 1.0),
            (100.0, 200.0, Red, NA, Male, 1.0),
        ]);
        let q = query(HeightClass::Average, Yellow, NA, Female);
        let cfg = CascadeConfig::default();
        let ctx = CascadeContext {
            query: &q,
            camera: &s.cam,
            config: &cfg,
            classifiers: &s.classifiers,
        };
        let mut state = CascadeState::default();
        let r = run_frame(&mut state, &view(&s.dets), &ctx);
        assert_eq!(r.method, Method::Biometric);
        assert_eq!(r.chosen, Some(s.dets[1].bbox));
        assert_eq!(r.stage_counts, [Some(3), Some(1), None, None]);
        assert!(state.ever_matched);
    }

    #[test]
    fn color_failure_falls_back_to_regression() {
        let s = scene(&[
            (-150.0, 165.0, Blue, NA, Female, 1.0),
            (150.0, 165.0, Blue, NA, Female, 1.0),
        ]);
        let q = query(HeightClass::Short, Blue, NA, Female);
        let cfg = CascadeConfig::default();
        let ctx = CascadeContext {
            query: &q,
            camera: &s.cam,
            config: &cfg,
            classifiers: &s.classifiers,
        };
        let mut state = CascadeState::default();

        // first frame: both match everything; gender tie-break picks index 0
        let r = run_frame(&mut state, &view(&s.dets), &ctx);
        assert_eq!((r.method, r.tie_break_used), (Method::Biometric, true));

        // next frame: the color stage fails for everyone
        let q2 = query(HeightClass::Short, Green, NA, Female);
        let ctx2 = CascadeContext { query: &q2, ..ctx };
        let r = run_frame(&mut state, &view(&s.dets), &ctx2);
        assert_eq!(r.method, Method::Regression);
        assert_eq!(r.chosen, Some(s.dets[0].bbox));
        assert_eq!(r.stage_counts, [Some(2), Some(2), Some(0), None]);
    }

    #[test]
    fn cold_start_without_detections() {
        let s = scene(&[]);
        let q = SemanticQuery::default();
        let cfg = CascadeConfig::default();
        let ctx = CascadeContext {
            query: &q,
            camera: &s.cam,
            config: &cfg,
            classifiers: &s.classifiers,
        };
        let mut state = CascadeState::default();
        let r = run_frame(&mut state, &view(&[]), &ctx);
        assert_eq!((r.method, r.chosen), (Method::None, None));
        assert_eq!(state, CascadeState::default());
    }

    #[test]
    fn regression_is_gated_on_a_prior_match() {
        let s = scene(&[(0.0, 165.0, Blue, NA, Female, 1.0)]);
        let q = query(HeightClass::VeryTall, Blue, NA, Female);
        let cfg = CascadeConfig::default();
        let ctx = CascadeContext {
            query: &q,
            camera: &s.cam,
            config: &cfg,
            classifiers: &s.classifiers,
        };
        let mut state = CascadeState {
            last_confirmed: Some(s.dets[0].bbox),
            ever_matched: false,
        };
        let r = run_frame(&mut state, &view(&s.dets), &ctx);
        assert_eq!(r.method, Method::None);
    }

    #[test]
    fn results_line_format() {
        let r = FrameResult {
            frame: 7,
            chosen: Some(BBox::new(1.0, 2.0, 3.0, 4.0).unwrap()),
            method: Method::Regression,
            color_rank: Some(2),
            stage_counts: [Some(5), Some(2), Some(0), None],
            tie_break_used: false,
        };
        let text = write_results(&[r.clone(), FrameResult::empty(8)]).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"frame":7,"box":[1.0,2.0,3.0,4.0],"method":"regression","color_rank":2,"stage_counts":[5,2,0,null],"tie_break_used":false}"#
        );
        assert_eq!(parse_results(&text).unwrap()[0], r);
    }

    struct Same(Vec<Detection>);

    impl DetectionProvider for Same {
        fn name(&self) -> &str {
            "same"
        }
        fn detections_for(&self, frame: usize) -> Result<Vec<Detection>> {
            assert!(frame >= 30, "skipped frame {frame} was read");
            Ok(self.0.clone())
        }
    }

    #[test]
    fn warm_up_frames_yield_none() {
        let s = scene(&[
            (-100.0, 160.0, Red, NA, Male, 1.0),
            (100.0, 185.0, Blue, NA, Male, 1.0),
        ]);
        let q = query(HeightClass::Unknown, Red, NA, Gender::Unknown);
        let config = CascadeConfig::default();
        let ctx = CascadeContext {
            query: &q,
            camera: &s.cam,
            config: &config,
            classifiers: &s.classifiers,
        };
        let provider = Same(s.dets.clone());
        let out = run_sequence(40, &provider, &crate::frames::NoFrames, &ctx).unwrap();
        assert_eq!(out.len(), 40);
        assert!(out[..30]
            .iter()
            .enumerate()
            .all(|(f, r)| *r == FrameResult::empty(f)));
        assert!(out[30..]
            .iter()
            .all(|r| r.method == Method::Biometric && r.chosen == Some(s.dets[0].bbox)));
        assert_eq!(out[39].frame, 39);
    }
}
