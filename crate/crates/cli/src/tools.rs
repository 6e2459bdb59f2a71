use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use softret::attr::{classify_color, ColorPrototypeTable, ColorVerdict, DEFAULT_MIN_PIXELS};
use softret::detect::{Detection, Mask};
use softret::frames::{read_ppm, write_ppm};
use softret::model::{BBox, HeightClass, ImagePoint, LegType, TorsoType};
use softret::patch::{
    extract_patch, gamma_adjust_image, leg_band, torso_band, Band, Gamma, AUGMENTATION_GAMMAS,
};
use softret::synth::{write_outputs, Scenario, SynthSummary};

use crate::load;

fn parse_numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("{p:?} is not a number"))?;
    }
    Ok(out)
}

pub fn parse_point(s: &str) -> Result<ImagePoint, String> {
    let [x, y] = parse_numbers::<2>(s)?;
    Ok(ImagePoint::new(x, y))
}

pub fn parse_box(s: &str) -> Result<BBox, String> {
    let [x, y, w, h] = parse_numbers::<4>(s)?;
    BBox::new(x, y, w, h).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct HeightArgs {
    #[arg(long)]
    pub calibration: PathBuf,
    /// Head image point "x,y" in pixels
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub head: ImagePoint,
    /// Feet image point "x,y" in pixels
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub feet: ImagePoint,
}

#[derive(Serialize)]
struct HeightReport {
    calibration: String,
    head: ImagePoint,
    feet: ImagePoint,
    height_cm: f64,
    residual_cm: f64,
    nearest_class: HeightClass,
}

pub fn height(args: &HeightArgs) -> Result<()> {
    let camera = load::calibration(&args.calibration)?;
    let est = camera
        .estimate_height(args.head, args.feet)
        .context("height estimation failed")?;
    print_json(&HeightReport {
        calibration: args.calibration.display().to_string(),
        head: args.head,
        feet: args.feet,
        height_cm: est.height_cm,
        residual_cm: est.residual_cm,
        nearest_class: HeightClass::nearest(est.height_cm),
    })
}

#[derive(Debug, Args)]
pub struct PatchArgs {
    /// Frame image (binary PPM)
    #[arg(long)]
    pub image: PathBuf,
    /// Person box "x,y,w,h"; the mask is the whole box
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub bbox: BBox,
    #[arg(long, default_value = "unknown")]
    pub torso_type: TorsoType,
    #[arg(long, default_value = "unknown")]
    pub leg_type: LegType,
    /// Write the torso patch (mask-off pixels black) to this PPM
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct BandReport {
    band: Band,
    rows: (u32, u32),
    cols: (u32, u32),
    pixel_count: usize,
    color: ColorVerdict,
}

#[derive(Serialize)]
struct PatchReport {
    image: String,
    #[serde(rename = "box")]
    bbox: BBox,
    torso_type: TorsoType,
    leg_type: LegType,
    torso: BandReport,
    leg: BandReport,
    output: Option<String>,
}

pub fn patch(args: &PatchArgs) -> Result<()> {
    let image = read_ppm(&args.image)?;
    let (w, h) = image.dimensions();
    let det = Detection {
        bbox: args.bbox,
        mask: Mask::full_box(&args.bbox, w, h),
        source_person_id: None,
        detector_score: 1.0,
    };
    let table = ColorPrototypeTable::default();
    let band_report = |band: Band| {
        let p = extract_patch(&image, &det, band);
        let report = BandReport {
            band,
            rows: p.rows,
            cols: p.cols,
            pixel_count: p.len(),
            color: classify_color(&p, &table, DEFAULT_MIN_PIXELS),
        };
        (p, report)
    };
    let (torso_patch, torso) = band_report(torso_band(args.torso_type));
    let (_, leg) = band_report(leg_band(args.leg_type));
    if let Some(out) = &args.output {
        write_ppm(out, &torso_patch.to_image())?;
    }
    print_json(&PatchReport {
        image: args.image.display().to_string(),
        bbox: args.bbox,
        torso_type: args.torso_type,
        leg_type: args.leg_type,
        torso,
        leg,
        output: args.output.as_ref().map(|p| p.display().to_string()),
    })
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Input image (binary PPM)
    #[arg(long)]
    pub input: PathBuf,
    /// Gamma exponent; repeat for several. Defaults to 0.7, 1.2 and 1.5
    #[arg(long)]
    pub gamma: Vec<f64>,
    /// Directory receiving <stem>_gamma<G>.ppm files
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Serialize)]
struct AugmentReport {
    input: String,
    outputs: Vec<(f64, String)>,
}

pub fn augment(args: &AugmentArgs) -> Result<()> {
    let image = read_ppm(&args.input)?;
    let gammas = if args.gamma.is_empty() {
        AUGMENTATION_GAMMAS.to_vec()
    } else {
        args.gamma.clone()
    };
    let stem = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into());
    std::fs::create_dir_all(&args.output_dir)
        .with_context(|| format!("cannot create {}", args.output_dir.display()))?;
    let mut outputs = Vec::new();
    for g in gammas {
        let gamma = Gamma::new(g)?;
        let path = args.output_dir.join(format!("{stem}_gamma{g}.ppm"));
        write_ppm(&path, &gamma_adjust_image(&image, gamma))?;
        outputs.push((g, path.display().to_string()));
    }
    print_json(&AugmentReport {
        input: args.input.display().to_string(),
        outputs,
    })
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scenario document
    #[arg(long, conflicts_with = "random")]
    pub scenario: Option<PathBuf>,
    /// Generate a random scenario from this seed instead
    #[arg(long)]
    pub random: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Serialize)]
struct SynthReport {
    scenario: String,
    output: String,
    #[serde(flatten)]
    summary: SynthSummary,
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let (scenario, source) = match (&args.scenario, args.random) {
        (Some(path), _) => (
            Scenario::parse(&load::read_text(path)?)
                .with_context(|| format!("invalid scenario in {}", path.display()))?,
            path.display().to_string(),
        ),
        (None, Some(seed)) => (Scenario::random(seed), format!("random seed {seed}")),
        (None, None) => bail!("pass --scenario FILE or --random SEED"),
    };
    let summary = write_outputs(&scenario, &args.output)?;
    print_json(&SynthReport {
        scenario: source,
        output: args.output.display().to_string(),
        summary,
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
