use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use softret::calib::TsaiCamera;
use softret::model::ImagePoint;

fn softret(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softret"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = softret(args);
    assert!(
        out.status.success(),
        "softret {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Synth {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Synth {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let scenario =
            Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/five_person.json");
        ok(&[
            "synth",
            "--scenario",
            s(&scenario),
            "--output",
            s(&root.join("data")),
        ]);
        Synth { _dir: dir, root }
    }

    fn data(&self, name: &str) -> PathBuf {
        self.root.join("data").join(name)
    }

    fn retrieve(&self, out: &str, extra: &[&str]) -> PathBuf {
        let output = self.root.join(out);
        let ann = self.data("annotations.json");
        let cal = self.data("calibration.json");
        let mut args = vec![
            "retrieve",
            "--annotations",
            s(&ann),
            "--calibration",
            s(&cal),
            "--output",
            s(&output),
        ];
        args.extend_from_slice(extra);
        ok(&args);
        output
    }

    fn evaluate(&self, results: &Path, extra: &[&str]) -> Value {
        let ann = self.data("annotations.json");
        let mut args = vec![
            "evaluate",
            "--results",
            s(results),
            "--annotations",
            s(&ann),
        ];
        args.extend_from_slice(extra);
        serde_json::from_str(&ok(&args)).unwrap()
    }
}

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn missing_calibration_names_the_path() {
    let t = Synth::new();
    let missing = t.root.join("nowhere/calibration.json");
    let out = softret(&[
        "retrieve",
        "--annotations",
        s(&t.data("annotations.json")),
        "--calibration",
        s(&missing),
        "--oracle",
        "--classifier",
        "oracle",
        "--output",
        s(&t.root.join("r.jsonl")),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(s(&missing)), "stderr: {err}");
    assert!(!t.root.join("r.jsonl").exists());
}

#[test]
fn zero_skip_starts_at_frame_zero() {
    let t = Synth::new();
    let r = t.retrieve(
        "r.jsonl",
        &["--oracle", "--classifier", "oracle", "--skip-frames", "0"],
    );
    let rows = lines(&r);
    assert_eq!(rows.len(), 60);
    assert_eq!(rows[0]["frame"], 0);
    assert_ne!(rows[0]["method"], "none");
}

#[test]
fn clean_oracle_run_is_all_biometric() {
    let t = Synth::new();
    let r = t.retrieve("r.jsonl", &["--oracle", "--classifier", "oracle"]);
    let rows = lines(&r);
    assert_eq!(rows.len(), 60);
    let (skipped, live) = rows.split_at(30);
    assert!(skipped
        .iter()
        .all(|v| v["method"] == "none" && v["box"].is_null()));
    assert!(live.iter().all(|v| v["method"] == "biometric"), "{live:?}");
    let report = t.evaluate(&r, &[]);
    assert_eq!(report["global"]["tpr_percent"], 100.0);
}

#[test]
fn reference_classifier_over_detection_stream() {
    let t = Synth::new();
    let frames = t.data("frames");
    let dets = t.data("detections.jsonl");
    let r = t.retrieve(
        "r.jsonl",
        &["--frames", s(&frames), "--detections", s(&dets)],
    );
    let report = t.evaluate(&r, &[]);
    assert!(
        report["global"]["tpr_percent"].as_f64().unwrap() >= 95.0,
        "{report}"
    );
}

#[test]
fn empty_results_cannot_be_evaluated() {
    let t = Synth::new();
    let empty = t.root.join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let out = softret(&[
        "evaluate",
        "--results",
        s(&empty),
        "--annotations",
        s(&t.data("annotations.json")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn tpr_does_not_grow_with_theta() {
    let t = Synth::new();
    let r = t.retrieve(
        "r.jsonl",
        &[
            "--oracle",
            "--jitter-px",
            "8",
            "--classifier",
            "oracle",
            "--color-error-rate",
            "0.3",
            "--seed",
            "5",
        ],
    );
    let tprs: Vec<f64> = ["0.3", "0.4", "0.5"]
        .iter()
        .map(|th| {
            t.evaluate(&r, &["--theta", th])["global"]["tpr_percent"]
                .as_f64()
                .unwrap()
        })
        .collect();
    assert!(tprs.windows(2).all(|w| w[0] >= w[1]), "{tprs:?}");
}

#[test]
fn height_matches_library() {
    let t = Synth::new();
    let cal = t.data("calibration.json");
    let v: Value = serde_json::from_str(&ok(&[
        "height",
        "--calibration",
        s(&cal),
        "--head",
        "320,40",
        "--feet",
        "322,460",
    ]))
    .unwrap();
    let cam: TsaiCamera = serde_json::from_str(&std::fs::read_to_string(&cal).unwrap()).unwrap();
    let want = cam
        .estimate_height(ImagePoint::new(320.0, 40.0), ImagePoint::new(322.0, 460.0))
        .unwrap();
    assert_eq!(v["height_cm"].as_f64().unwrap(), want.height_cm);
    assert_eq!(v["residual_cm"].as_f64().unwrap(), want.residual_cm);
}

#[test]
fn patch_reports_no_sleeve_band() {
    let t = Synth::new();
    let frame = t.data("frames/000000.ppm");
    let v: Value = serde_json::from_str(&ok(&[
        "patch",
        "--image",
        s(&frame),
        "--box",
        "100,50,60,200",
        "--torso-type",
        "no sleeve",
    ]))
    .unwrap();
    assert_eq!(v["torso"]["band"], serde_json::json!([0.25, 0.48]));
    assert_eq!(v["torso"]["rows"], serde_json::json!([100, 146]));
}

#[test]
fn augment_writes_three_gammas() {
    let t = Synth::new();
    let out = t.root.join("aug");
    ok(&[
        "augment",
        "--input",
        s(&t.data("frames/000000.ppm")),
        "--output-dir",
        s(&out),
    ]);
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "000000_gamma0.7.ppm",
            "000000_gamma1.2.ppm",
            "000000_gamma1.5.ppm"
        ]
    );
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["synth", "--random", "9", "--output", s(&a)]);
    ok(&["synth", "--random", "9", "--output", s(&b)]);
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.len() > 5);
    assert!(ta == tb);
}

#[test]
fn help_documents_formats() {
    let help = ok(&["retrieve", "--help"]);
    for needle in [
        "target_person_id",
        "rotation",
        "skip_frames",
        "stage_counts",
        "sequences",
    ] {
        assert!(help.contains(needle), "retrieve --help lacks {needle}");
    }
    assert!(ok(&["evaluate", "--help"]).contains("tpr_percent"));
}

#[test]
fn manifest_runs_several_sequences() {
    let t = Synth::new();
    let manifest = t.root.join("manifest.json");
    std::fs::write(
        &manifest,
        serde_json::json!({"sequences": [
            {"annotations": "data/annotations.json", "calibration": "data/calibration.json", "output": "out/a.jsonl"},
            {"annotations": "data/annotations.json", "calibration": "data/calibration.json",
             "detections": "data/detections.jsonl", "output": "out/b.jsonl"},
        ]})
        .to_string(),
    )
    .unwrap();
    // the second entry has a stream while --oracle is set: rejected before anything runs
    let out = softret(&[
        "retrieve",
        "--manifest",
        s(&manifest),
        "--oracle",
        "--classifier",
        "oracle",
    ]);
    assert!(!out.status.success());
    assert!(!t.root.join("out/a.jsonl").exists());

    std::fs::write(
        &manifest,
        serde_json::json!({"sequences": [
            {"annotations": "data/annotations.json", "calibration": "data/calibration.json", "output": "out/a.jsonl"},
            {"annotations": "data/annotations.json", "calibration": "data/calibration.json", "output": "out/b.jsonl"},
        ]})
        .to_string(),
    )
    .unwrap();
    ok(&[
        "retrieve",
        "--manifest",
        s(&manifest),
        "--oracle",
        "--classifier",
        "oracle",
        "--jobs",
        "2",
    ]);
    let report: Value =
        serde_json::from_str(&ok(&["evaluate", "--manifest", s(&manifest)])).unwrap();
    assert_eq!(report["sequences"].as_array().unwrap().len(), 2);
}
