// Document formats shown by `--help`. Kept in one place so every subcommand
// describes the same shapes.

pub const ANNOTATIONS: &str = r#"Annotation document (JSON):
  {
    "sequence_id": "seq-01",
    "difficulty": "very easy" | "easy" | "medium" | "hard",
    "image_size": [width, height],
    "target_person_id": "p1",
    "frames": [
      { "index": 0,
        "persons": [
          { "person_id": "p1",
            "markers": { "head": [x, y], "neck_left": [x, y], "neck_right": [x, y],
                         "shoulder_left": [x, y], "shoulder_right": [x, y],
                         "waist_left": [x, y], "waist_right": [x, y],
                         "foot_left": [x, y], "foot_right": [x, y] },
            "attributes": { "height": "average", "torso_type": "short sleeve",
                            "torso_color1": "yellow", "torso_color2": "black",
                            "gender": "male", "leg_type": "long pants",
                            "leg_color1": "blue", ...other keys kept verbatim } } ] } ] }
  Frame indices must equal their position. The ground-truth box spans the
  head y to the lowest foot y and the x-extremes of the eight non-head markers."#;

pub const CALIBRATION: &str = r#"Calibration document (JSON):
  { "rotation": [r11, r12, r13, r21, r22, r23, r31, r32, r33],   world -> camera, row-major
    "translation_cm": [tx, ty, tz],
    "focal_mm": f, "kappa1_per_mm2": k1, "center_px": [cx, cy], "sx": 1.0,
    "pixel_size_mm": [dx, dy], "image_size_px": [width, height] }
  World Z is up, the ground plane is Z = 0, lengths are centimetres."#;

pub const QUERY: &str = r#"Query document (JSON):
  { "height_class": "average", "torso_type": "short sleeve",
    "torso_color1": "yellow", "torso_color2": "black", "gender": "male" }
  Any field may be "unknown", which disables that filter (torso_color2
  "unknown" disables the second-color fallback)."#;

pub const DETECTIONS: &str = r#"Detections stream (JSON Lines, one object per frame):
  {"frame": 0, "detections": [{"box": [x, y, w, h], "score": 0.97,
    "mask_rle": [zeros, ones, zeros, ...], "mask_size": [width, height],
    "person_id": "p1"}]}
  mask_rle is a row-major run-length code starting with a (possibly empty)
  run of zeros; the runs must sum to width * height. person_id is optional."#;

pub const RESULTS: &str = r#"Results stream (JSON Lines, one object per frame):
  {"frame": 30, "box": [x, y, w, h] | null, "method": "biometric" | "regression" | "none",
   "color_rank": 1 | 2 | null, "stage_counts": [detections, height, color, gender],
   "tie_break_used": false}
  A null stage count marks a stage that did not run (early exit or an empty
  earlier stage). Frames before skip_frames are not processed: they carry
  method "none", a null box and all-null stage counts."#;

pub const MANIFEST: &str = r#"Manifest document (JSON); relative paths resolve against its directory:
  { "sequences": [
      { "annotations": "seq01/annotations.json", "calibration": "seq01/calibration.json",
        "frames": "seq01/frames", "detections": "seq01/detections.jsonl",
        "query": "seq01/query.json", "output": "out/seq01.results.jsonl" } ] }
  frames, detections and query are optional; without query the target's own
  annotated attributes are used. Frames are NNNNNN.ppm files."#;

pub const CASCADE_CONFIG: &str = r#"Cascade configuration (JSON, every field optional):
  { "height_margin_cm": 0.0, "regression_min_iou": 0.0, "skip_frames": 30, "early_exit": true }"#;

pub const REPORT: &str = r#"Report document (JSON):
  { "correct_iou_threshold": 0.4, "skip_frames": 30,
    "sequences": [{ "sequence_id", "difficulty", "tpr_percent", "average_iou",
                    "fraction_iou_ge_04", "evaluated_frame_count" }],
    "global": { means of the per-sequence fields },
    "by_difficulty": [{ "difficulty", "sequence_count", "average_iou", "fraction_iou_ge_04" }] }"#;

pub const SCENARIO: &str = r#"Scenario document (JSON):
  { "sequence_id": "synthetic-01", "difficulty": "easy", "frame_count": 60, "seed": 7,
    "background_color": [96, 112, 96], "target_person_id": "p1",
    "camera": { "look_at": { "eye_cm": [0, -600, 450], "target_cm": [0, 400, 80],
                             "focal_mm": 8.0, "kappa1_per_mm2": -5e-5,
                             "pixel_size_mm": 0.01, "image_size_px": [640, 480] } }
              | { "calibration": <calibration document> },
    "markers": { "neck": 0.10, "shoulder": 0.18, "waist": 0.50 },
    "persons": [
      { "person_id": "p1", "true_height_cm": 172,
        "trajectory": { "linear": { "from_cm": [-200, 300], "to_cm": [200, 300] } }
                    | { "points": [[x, y] | null, ... one per frame] },
        "torso_type": "short sleeve", "torso_color1": "yellow", "torso_color2": "black",
        "leg_type": "long pants", "leg_color": "blue", "gender": "male",
        "width_to_height_ratio": 0.3 } ] }
  Heights must lie in [130, 210] cm."#;

pub const LABELS: &str = r#"Labels:
  colors: unknown black blue brown green grey orange pink purple red white yellow skin
  torso types: unknown, long sleeve, short sleeve, no sleeve, indian kurta/dress
  leg types: unknown, long pants, dress, skirt, long shorts, short shorts, indian kurta/dress
  height classes: unknown, very short, short, average, tall, very tall
  gender: unknown, male, female"#;
