use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use softret::cascade::{run_sequence, write_results, CascadeConfig, CascadeContext, Method};
use softret::detect::{OracleNoise, DEFAULT_MIN_SCORE};
use softret::frames::{FrameDirectory, FrameSource, NoFrames};
use softret::model::{query_from_target, SemanticQuery};
use softret::registry::{classifier_registry, detector_registry, BuildContext};

use crate::load;

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    /// Manifest listing several sequences (replaces the per-sequence flags)
    #[arg(long, conflicts_with_all = ["annotations", "calibration", "frames", "detections", "query", "output"])]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Directory of NNNNNN.ppm frames
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Detections stream (JSON Lines)
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Derive detections from the annotations instead of a stream
    #[arg(long)]
    pub oracle: bool,
    /// Query document; defaults to the target's annotated attributes
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// Results stream to write
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Classifier bundle: "reference" (pixel color + oracle gender) or "oracle"
    #[arg(long, default_value = "reference")]
    pub classifier: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cascade configuration document; the flags below override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub skip_frames: Option<usize>,
    #[arg(long)]
    pub height_margin_cm: Option<f64>,
    #[arg(long)]
    pub regression_min_iou: Option<f64>,
    #[arg(long)]
    pub no_early_exit: bool,
    /// Minimum detector score kept from a detections stream
    #[arg(long, default_value_t = DEFAULT_MIN_SCORE)]
    pub min_score: f64,
    /// Probability that the oracle color classifier answers wrongly
    #[arg(long, default_value_t = 0.0)]
    pub color_error_rate: f64,
    /// Probability that the oracle gender classifier answers wrongly
    #[arg(long, default_value_t = 0.0)]
    pub gender_error_rate: f64,
    /// Oracle detector: per-edge box jitter in pixels
    #[arg(long, default_value_t = 0.0)]
    pub jitter_px: f64,
    /// Oracle detector: probability of dropping a detection
    #[arg(long, default_value_t = 0.0)]
    pub p_drop: f64,
    /// Oracle detector: merge overlapping boxes
    #[arg(long)]
    pub merge_overlapping: bool,
    /// Sequences processed in parallel
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub annotations: PathBuf,
    pub calibration: PathBuf,
    #[serde(default)]
    pub frames: Option<PathBuf>,
    #[serde(default)]
    pub detections: Option<PathBuf>,
    #[serde(default)]
    pub query: Option<PathBuf>,
    pub output: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub sequences: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let mut manifest: Manifest = load::json(path, "manifest")?;
        let base = path.parent().unwrap_or(Path::new("."));
        for e in &mut manifest.sequences {
            e.annotations = load::resolve(base, &e.annotations);
            e.calibration = load::resolve(base, &e.calibration);
            e.output = load::resolve(base, &e.output);
            for p in [&mut e.frames, &mut e.detections, &mut e.query]
                .into_iter()
                .flatten()
            {
                *p = load::resolve(base, p);
            }
        }
        if manifest.sequences.is_empty() {
            bail!("manifest {} lists no sequences", path.display());
        }
        Ok(manifest)
    }
}

#[derive(Debug, Serialize)]
struct SequenceSummary {
    sequence_id: String,
    output: String,
    query: SemanticQuery,
    frames_skipped: usize,
    frames_processed: usize,
    biometric: usize,
    regression: usize,
    none: usize,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    classifier: String,
    detector: String,
    seed: u64,
    config: CascadeConfig,
    sequences: Vec<SequenceSummary>,
}

impl RetrieveArgs {
    fn entries(&self) -> Result<Vec<ManifestEntry>> {
        if let Some(path) = &self.manifest {
            return Ok(Manifest::load(path)?.sequences);
        }
        let need = |p: &Option<PathBuf>, flag: &str| {
            p.clone()
                .ok_or_else(|| anyhow!("--{flag} is required without --manifest"))
        };
        Ok(vec![ManifestEntry {
            annotations: need(&self.annotations, "annotations")?,
            calibration: need(&self.calibration, "calibration")?,
            frames: self.frames.clone(),
            detections: self.detections.clone(),
            query: self.query.clone(),
            output: need(&self.output, "output")?,
        }])
    }

    fn cascade_config(&self) -> Result<CascadeConfig> {
        let mut cfg = match &self.config {
            Some(path) => load::json(path, "cascade configuration")?,
            None => CascadeConfig::default(),
        };
        if let Some(v) = self.skip_frames {
            cfg.skip_frames = v;
        }
        if let Some(v) = self.height_margin_cm {
            cfg.height_margin_cm = v;
        }
        if let Some(v) = self.regression_min_iou {
            cfg.regression_min_iou = v;
        }
        if self.no_early_exit {
            cfg.early_exit = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn detector_for(&self, e: &ManifestEntry) -> Result<&'static str> {
        match (self.oracle, &e.detections) {
            (true, None) => Ok("oracle"),
            (false, Some(_)) => Ok("stream"),
            (true, Some(p)) => bail!(
                "two detection sources: --oracle and {}; give exactly one",
                p.display()
            ),
            (false, None) => bail!("no detection source: pass --detections FILE or --oracle"),
        }
    }

    /// Launch-time checks: every referenced file exists and the strategy
    /// choices make sense for every sequence.
    fn check(&self, entries: &[ManifestEntry]) -> Result<()> {
        if !classifier_registry().contains(&self.classifier) {
            bail!(
                "unknown classifier {:?} (available: {})",
                self.classifier,
                classifier_registry().names().join(", ")
            );
        }
        if self.jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        for e in entries {
            self.detector_for(e)?;
            load::require_file(&e.annotations)?;
            load::require_file(&e.calibration)?;
            for p in [&e.detections, &e.query].into_iter().flatten() {
                load::require_file(p)?;
            }
            match &e.frames {
                Some(dir) => load::require_dir(dir)?,
                None if self.classifier == "reference" => bail!(
                    "the reference classifier reads pixels; give a frames directory for {}",
                    e.annotations.display()
                ),
                None => {}
            }
        }
        Ok(())
    }

    fn run_one(&self, e: &ManifestEntry, cfg: &CascadeConfig) -> Result<SequenceSummary> {
        let sequence = Arc::new(load::annotations(&e.annotations)?);
        let camera = load::calibration(&e.calibration)?;
        if camera.image_size_px() != sequence.image_size {
            bail!(
                "calibration {} is for {:?} images but {} declares {:?}",
                e.calibration.display(),
                camera.image_size_px(),
                e.annotations.display(),
                sequence.image_size
            );
        }
        let query = match &e.query {
            Some(p) => load::query(p)?,
            None => query_from_target(&sequence).with_context(|| {
                format!(
                    "no query given and none derivable from {}",
                    e.annotations.display()
                )
            })?,
        };

        let mut ctx = BuildContext::new(sequence.clone(), self.seed);
        ctx.color_error_rate = self.color_error_rate;
        ctx.gender_error_rate = self.gender_error_rate;
        ctx.min_score = self.min_score;
        ctx.oracle_noise = OracleNoise {
            jitter_px: self.jitter_px,
            p_drop: self.p_drop,
            merge_overlapping: self.merge_overlapping,
        };
        if let Some(p) = &e.detections {
            ctx.detection_records = Some(Arc::new(load::detections(p)?));
        }
        let detector = detector_registry().build(self.detector_for(e)?, &ctx)?;
        let classifiers = classifier_registry().build(&self.classifier, &ctx)?;
        let frames: Box<dyn FrameSource> = match &e.frames {
            Some(dir) => Box::new(FrameDirectory::new(dir)?),
            None => Box::new(NoFrames),
        };

        let cascade = CascadeContext {
            query: &query,
            camera: &camera,
            config: cfg,
            classifiers: &classifiers,
        };
        let results = run_sequence(
            sequence.frame_count(),
            detector.as_ref(),
            frames.as_ref(),
            &cascade,
        )
        .with_context(|| format!("retrieval failed for {}", e.annotations.display()))?;
        load::write_text(&e.output, &write_results(&results)?)?;

        let skipped = cfg.skip_frames.min(results.len());
        let live = &results[skipped..];
        let count = |m: Method| live.iter().filter(|r| r.method == m).count();
        Ok(SequenceSummary {
            sequence_id: sequence.sequence_id.clone(),
            output: e.output.display().to_string(),
            query,
            frames_skipped: skipped,
            frames_processed: live.len(),
            biometric: count(Method::Biometric),
            regression: count(Method::Regression),
            none: count(Method::None),
        })
    }
}

pub fn run(args: &RetrieveArgs) -> Result<()> {
    let entries = args.entries()?;
    args.check(&entries)?;
    let cfg = args.cascade_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()?;
    let outcomes: Vec<Result<SequenceSummary>> =
        pool.install(|| entries.par_iter().map(|e| args.run_one(e, &cfg)).collect());
    let sequences = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = RunSummary {
        classifier: args.classifier.clone(),
        detector: if args.oracle { "oracle" } else { "stream" }.into(),
        seed: args.seed,
        config: cfg,
        sequences,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
