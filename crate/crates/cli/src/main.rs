//! `gesturegen`: turns a scene, a timed transcript and a beat clip into a gesture clip.
//!
//! Exit codes: 0 success, 2 usage, 3 bad input, 4 bad config, 5 processing or output failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use gesturegen_core::config::PipelineConfig;
use gesturegen_core::pipeline::{self, PipelineInputs};
use gesturegen_core::Error;

#[derive(Debug, Parser)]
#[command(name = "gesturegen", version, about = "Image-grounded co-speech gesture synthesis")]
struct Args {
    /// Scene file (objects, labels, boxes, mask paths).
    #[arg(long)]
    scene: PathBuf,
    /// Word-timed transcript.
    #[arg(long, required_unless_present = "analyze_only")]
    transcript: Option<PathBuf>,
    /// Beat motion clip covering the utterance.
    #[arg(long, required_unless_present = "analyze_only")]
    beat: Option<PathBuf>,
    /// Speech activity intervals; the whole clip counts as speech when omitted.
    #[arg(long)]
    speech: Option<PathBuf>,
    /// Pipeline config (TOML).
    #[arg(long, env = "GESTUREGEN_CONFIG")]
    config: Option<PathBuf>,
    /// Output animation clip, or the augmented scene with --analyze-only.
    #[arg(long)]
    out: PathBuf,
    /// Report path; defaults to `<out stem>.report.json` beside the output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Only analyze the scene and write the augmented scene file.
    #[arg(long)]
    analyze_only: bool,
    /// More log output; repeat for IK iteration traces.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Failure {
    Input = 3,
    Config = 4,
    Processing = 5,
}

fn classify(e: &Error) -> Failure {
    match e {
        Error::Config(_) | Error::Chain(_) => Failure::Config,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::Scene(_)
        | Error::Transcript(_)
        | Error::Mask { .. }
        | Error::EmptyMask
        | Error::FpsMismatch(..)
        | Error::ChainIdMismatch { .. }
        | Error::DofMismatch { .. }
        | Error::UnknownBone(_) => Failure::Input,
        _ => Failure::Processing,
    }
}

fn fail(kind: Failure, e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(kind as u8)
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Error> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let config = match load_config(args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail(if matches!(e, Error::Io { .. }) { Failure::Input } else { Failure::Config }, &e),
    };

    if args.analyze_only {
        let scene = match pipeline::analyze_only(&args.scene, &config) {
            Ok(s) => s,
            Err(e) => return fail(classify(&e), &e),
        };
        let dir = args.scene.parent().unwrap_or(Path::new("."));
        let out_dir = args.out.parent().unwrap_or(Path::new("."));
        let written = pipeline::relocate_scene(&scene, dir, out_dir);
        if let Err(e) = pipeline::write_atomically(&[(args.out.clone(), written.to_json().into_bytes())]) {
            return fail(Failure::Processing, &e);
        }
        log::info!("analyzed {} objects, {} groups -> {}", scene.objects.len(), scene.groups.len(), args.out.display());
        return ExitCode::SUCCESS;
    }

    let inputs = PipelineInputs {
        scene: args.scene.clone(),
        transcript: args.transcript.clone().expect("required by clap"),
        beat: args.beat.clone().expect("required by clap"),
        speech: args.speech.clone(),
    };
    let output = match pipeline::run_pipeline(&inputs, &config) {
        Ok(o) => o,
        Err(e) => return fail(classify(&e), &e),
    };
    let scene_dir = args.scene.parent().unwrap_or(Path::new("."));
    let out_dir = args.out.parent().unwrap_or(Path::new("."));
    let scene = pipeline::relocate_scene(&output.scene, scene_dir, out_dir);
    let report = args.report.clone().unwrap_or_else(|| pipeline::report_output_path(&args.out));
    let files = [
        (args.out.clone(), output.clip.to_json().into_bytes()),
        (pipeline::scene_output_path(&args.out), scene.to_json().into_bytes()),
        (report.clone(), output.report.to_json().into_bytes()),
    ];
    if let Err(e) = pipeline::write_atomically(&files) {
        return fail(Failure::Processing, &e);
    }
    for w in &output.report.warnings {
        log::warn!("{w}");
    }
    let solved = output.report.plans.iter().filter(|p| p.outcome.as_ref().is_some_and(|o| !o.skipped)).count();
    log::info!(
        "{} frames, {} phrases, {}/{} plans realized -> {}, report {}",
        output.clip.len(),
        output.report.phrases.len(),
        solved,
        output.report.plans.len(),
        args.out.display(),
        report.display()
    );
    ExitCode::SUCCESS
}
