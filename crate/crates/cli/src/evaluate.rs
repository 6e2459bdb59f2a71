use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::Args;
use softret::eval::{report, SequenceScore, DEFAULT_CORRECT_IOU};

use crate::load;
use crate::retrieve::Manifest;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Manifest whose `output` entries are the results to score
    #[arg(long, conflicts_with_all = ["results", "annotations"])]
    pub manifest: Option<PathBuf>,
    /// Results stream written by `retrieve`
    #[arg(long)]
    pub results: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Minimum IoU for a frame to count as a correct retrieval
    #[arg(long, default_value_t = DEFAULT_CORRECT_IOU)]
    pub theta: f64,
    /// Leading frames excluded from every metric
    #[arg(long, default_value_t = 30)]
    pub skip_frames: usize,
    /// Report document to write; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let pairs: Vec<(PathBuf, PathBuf)> = match &args.manifest {
        Some(path) => Manifest::load(path)?
            .sequences
            .into_iter()
            .map(|e| (e.output, e.annotations))
            .collect(),
        None => vec![(
            args.results
                .clone()
                .ok_or_else(|| anyhow!("--results is required without --manifest"))?,
            args.annotations
                .clone()
                .ok_or_else(|| anyhow!("--annotations is required without --manifest"))?,
        )],
    };

    let mut loaded = Vec::with_capacity(pairs.len());
    for (results_path, annotations_path) in &pairs {
        let results = load::results(results_path)?;
        let sequence = load::annotations(annotations_path)?;
        let gts = sequence.target_boxes()?;
        loaded.push((results_path, sequence, results, gts));
    }
    let scores: Vec<SequenceScore<'_>> = loaded
        .iter()
        .map(|(_, seq, results, gts)| SequenceScore {
            sequence_id: &seq.sequence_id,
            difficulty: seq.difficulty,
            results,
            ground_truth: gts,
        })
        .collect();
    let doc = report(&scores, args.theta, args.skip_frames).with_context(|| {
        let names: Vec<String> = loaded
            .iter()
            .map(|(p, ..)| p.display().to_string())
            .collect();
        format!("cannot evaluate {}", names.join(", "))
    })?;

    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &args.output {
        Some(path) => load::write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
