//! `softret` command-line front end.

mod docs;
mod evaluate;
mod load;
mod retrieve;
mod tools;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

/// Soft-biometric person retrieval in surveillance video.
#[derive(Debug, Parser)]
#[command(name = "softret", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the retrieval cascade over one or more sequences
    Retrieve(Box<retrieve::RetrieveArgs>),
    /// Score results streams against annotations
    Evaluate(evaluate::EvaluateArgs),
    /// Render a synthetic calibrated sequence
    Synth(tools::SynthArgs),
    /// Estimate a person's height from head and feet pixels
    Height(tools::HeightArgs),
    /// Extract and classify the torso and leg patches of a box
    Patch(tools::PatchArgs),
    /// Write gamma-adjusted copies of an image
    Augment(tools::AugmentArgs),
}

fn sections(parts: &[&str]) -> String {
    parts.join("\n\n")
}

fn command() -> clap::Command {
    use docs::*;
    Cli::command()
        .after_long_help(sections(&[
            ANNOTATIONS,
            CALIBRATION,
            QUERY,
            DETECTIONS,
            RESULTS,
            MANIFEST,
            CASCADE_CONFIG,
            REPORT,
            SCENARIO,
            LABELS,
        ]))
        .mut_subcommand("retrieve", |c| {
            c.after_long_help(sections(&[
                MANIFEST,
                ANNOTATIONS,
                CALIBRATION,
                QUERY,
                DETECTIONS,
                CASCADE_CONFIG,
                RESULTS,
                LABELS,
            ]))
        })
        .mut_subcommand("evaluate", |c| {
            c.after_long_help(sections(&[RESULTS, ANNOTATIONS, MANIFEST, REPORT]))
        })
        .mut_subcommand("synth", |c| {
            c.after_long_help(sections(&[
                SCENARIO,
                ANNOTATIONS,
                DETECTIONS,
                CALIBRATION,
                QUERY,
                LABELS,
            ]))
        })
        .mut_subcommand("height", |c| c.after_long_help(CALIBRATION))
        .mut_subcommand("patch", |c| c.after_long_help(LABELS))
}

fn main() -> ExitCode {
    let cli = match Cli::from_arg_matches(&command().get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = match &cli.command {
        Command::Retrieve(a) => retrieve::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Synth(a) => tools::synth(a),
        Command::Height(a) => tools::height(a),
        Command::Patch(a) => tools::patch(a),
        Command::Augment(a) => tools::augment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
