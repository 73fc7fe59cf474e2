//! End-to-end orchestration: scene analysis, phrase matching, gesture realization, and
//! atomic output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::realize::{
    blend_base, composite, plan_from_annotation, schedule, solve_plans, GesturePlan, PlanOutcome, SpeechActivity,
};
use crate::scene::{analyze_scene, Scene};
use crate::semantics::{annotate_transcript, bind_phrases_to_objects, AnnotationDictionary, NoveltyScorer, PhraseAnnotation, TimedTranscript};
use crate::skeleton::{KinematicChain, MotionClip, Pose};

/// Input file locations. Without a speech file the whole clip counts as speech.
#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub scene: PathBuf,
    pub transcript: PathBuf,
    pub beat: PathBuf,
    pub speech: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub plan: GesturePlan,
    /// Position in the solve order; `None` when the plan was not scheduled.
    pub solve_rank: Option<usize>,
    pub outcome: Option<PlanOutcome>,
}

/// Machine-readable account of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub chain: String,
    pub fps: u32,
    pub frames: usize,
    pub phrases: Vec<PhraseAnnotation>,
    pub plans: Vec<PlanReport>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub clip: MotionClip,
    pub scene: Scene,
    pub report: Report,
}

fn scene_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

/// Runs mask geometry and alignment analysis on a scene file.
pub fn analyze_only(scene_path: &Path, config: &PipelineConfig) -> Result<Scene> {
    config.validate()?;
    let scene = Scene::load(scene_path)?;
    analyze_scene(&scene, scene_dir(scene_path), &config.analysis)
}

/// Seconds from the first word's onset to the last word's end.
fn phrase_span(t: &TimedTranscript, ann: &PhraseAnnotation) -> f64 {
    if ann.end <= ann.start || ann.end > t.words.len() {
        return 0.0;
    }
    (t.words[ann.end - 1].end - t.words[ann.start].start).max(0.0)
}

/// Loads every input, then runs the full pipeline in memory. Nothing is written.
pub fn run_pipeline(inputs: &PipelineInputs, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let chain = config.load_chain()?;
    let idle = config.idle(&chain)?;
    let scene = Scene::load(&inputs.scene)?;
    let transcript = TimedTranscript::load(&inputs.transcript)?;
    let beat = MotionClip::load(&inputs.beat)?;
    let speech = inputs.speech.as_deref().map(SpeechActivity::load).transpose()?;
    let provider = config.embedding_provider()?;

    if beat.fps != config.fps {
        return Err(Error::FpsMismatch(beat.fps, config.fps));
    }
    beat.check_chain(&chain)?;
    if beat.duration() + 1e-9 < transcript.duration() {
        return Err(Error::Transcript(format!(
            "beat clip lasts {:.3} s but the transcript runs to {:.3} s",
            beat.duration(),
            transcript.duration()
        )));
    }

    let scene = analyze_scene(&scene, scene_dir(&inputs.scene), &config.analysis)?;
    let labels: Vec<&str> = scene.objects.iter().map(|o| o.label.as_str()).collect();
    let mut scorer = NoveltyScorer::new();
    let mut phrases = annotate_transcript(&transcript, &labels, &AnnotationDictionary::default(), provider.as_ref(), &mut scorer);
    bind_phrases_to_objects(&mut phrases, &scene);

    let speech = speech.unwrap_or_else(|| SpeechActivity::continuous(beat.duration()));
    let (clip, plans, outcomes, order, warnings) = realize(&chain, &scene, &transcript, &phrases, &beat, &idle, &speech, config)?;

    let mut reports: Vec<PlanReport> = plans.into_iter().map(|plan| PlanReport { plan, solve_rank: None, outcome: None }).collect();
    for (rank, &i) in order.iter().enumerate() {
        reports[i].solve_rank = Some(rank);
    }
    for o in outcomes {
        if let Some(r) = reports.iter_mut().find(|r| r.plan.id == o.plan) {
            r.outcome = Some(o);
        }
    }
    let report = Report { chain: chain.id().to_string(), fps: clip.fps, frames: clip.len(), phrases, plans: reports, warnings };
    Ok(PipelineOutput { clip, scene, report })
}

type Realized = (MotionClip, Vec<GesturePlan>, Vec<PlanOutcome>, Vec<usize>, Vec<String>);

/// Plans, schedules and solves every phrase, then composites over the beat.
///
/// Non-retained DOFs are held at zero while solving so plan origins match the body, and
/// get their blended beat motion back in the output.
#[allow(clippy::too_many_arguments)]
fn realize(
    chain: &KinematicChain,
    scene: &Scene,
    transcript: &TimedTranscript,
    phrases: &[PhraseAnnotation],
    beat: &MotionClip,
    idle: &Pose,
    speech: &SpeechActivity,
    config: &PipelineConfig,
) -> Result<Realized> {
    let mut plans = Vec::new();
    for (i, ann) in phrases.iter().enumerate() {
        for (k, mut p) in plan_from_annotation(ann, i, scene, chain, &config.plan)?.into_iter().enumerate() {
            p.id = format!("p{i}-{k}");
            p.duration = phrase_span(transcript, ann);
            plans.push(p);
        }
    }
    let (order, mut warnings) = schedule(&mut plans, beat.len(), beat.fps, &config.schedule)?;

    let retained = config.retained_dofs(chain)?;
    let mut keep = vec![false; chain.dof_count()];
    for k in retained {
        keep[k] = true;
    }
    let mut work = beat.clone();
    for f in &mut work.frames {
        for (v, k) in f.0.iter_mut().zip(&keep) {
            if !k {
                *v = 0.0;
            }
        }
    }
    let mut work_idle = idle.clone();
    for (v, k) in work_idle.0.iter_mut().zip(&keep) {
        if !k {
            *v = 0.0;
        }
    }

    let base = blend_base(chain, &work, &work_idle, speech, &config.blend)?;
    let (overlay, outcomes) = solve_plans(chain, &plans, &order, &base, &work, &config.solve)?;
    for o in &outcomes {
        warnings.extend(o.warnings.iter().map(|w| format!("plan {}: {w}", o.plan)));
    }
    let mut clip = composite(chain, &work, &work_idle, speech, Some(&overlay), &config.blend)?;
    if keep.iter().any(|k| !k) {
        let full = blend_base(chain, beat, idle, speech, &config.blend)?;
        for (out, src) in clip.frames.iter_mut().zip(&full.frames) {
            for ((o, s), k) in out.0.iter_mut().zip(&src.0).zip(&keep) {
                if !k {
                    *o = *s;
                }
            }
        }
    }
    Ok((clip, plans, outcomes, order, warnings))
}

/// Scene file contents for writing into `out_dir`. Mask paths are made absolute when the
/// scene moves to another directory so they keep resolving.
pub fn relocate_scene(scene: &Scene, from_dir: &Path, out_dir: &Path) -> Scene {
    let same = match (from_dir.canonicalize(), out_dir.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    let mut s = scene.clone();
    if !same {
        for o in &mut s.objects {
            if o.mask.is_relative() {
                let p = from_dir.join(&o.mask);
                o.mask = p.canonicalize().unwrap_or(p);
            }
        }
    }
    s
}

/// Writes every file or none: all contents go to temporary files beside their targets
/// first, and are renamed into place only once all writes succeeded. Missing parent
/// directories are created.
pub fn write_atomically(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
        tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    }
    Ok(())
}

/// Where the augmented scene goes when a full run writes the animation to `out`.
pub fn scene_output_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.scene.json"))
}

/// Where the report goes when none is given.
pub fn report_output_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.report.json"))
}

/// Runs the pipeline and writes the animation, augmented scene and report atomically.
pub fn run_to_files(inputs: &PipelineInputs, config: &PipelineConfig, out: &Path, report: Option<&Path>) -> Result<PipelineOutput> {
    let output = run_pipeline(inputs, config)?;
    let out_dir = scene_dir(out);
    let scene = relocate_scene(&output.scene, scene_dir(&inputs.scene), out_dir);
    let report_path = report.map(Path::to_path_buf).unwrap_or_else(|| report_output_path(out));
    write_atomically(&[
        (out.to_path_buf(), output.clip.to_json().into_bytes()),
        (scene_output_path(out), scene.to_json().into_bytes()),
        (report_path, output.report.to_json().into_bytes()),
    ])?;
    Ok(output)
}

/// Analyzes a scene and writes the augmented file atomically.
pub fn analyze_to_file(scene_path: &Path, config: &PipelineConfig, out: &Path) -> Result<Scene> {
    let scene = analyze_only(scene_path, config)?;
    let written = relocate_scene(&scene, scene_dir(scene_path), scene_dir(out));
    write_atomically(&[(out.to_path_buf(), written.to_json().into_bytes())])?;
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maskgeo::BinaryMask;
    use crate::scene::{ImageDims, ObjectRecord};
    use crate::semantics::Word;

    fn write_mask(dir: &Path, name: &str, mask: &BinaryMask) -> PathBuf {
        let img = image::GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
            image::Luma([if mask.get(x as usize, y as usize) { 255 } else { 0 }])
        });
        img.save(dir.join(name)).unwrap();
        PathBuf::from(name)
    }

    fn disc(n: usize) -> BinaryMask {
        let c = (n as f64 - 1.0) / 2.0;
        let r = n as f64 * 0.4;
        BinaryMask::from_fn(n, n, |x, y| ((x as f64 - c).powi(2) + (y as f64 - c).powi(2)).sqrt() <= r).unwrap()
    }

    fn words(text: &str, step: f64) -> Vec<Word> {
        text.split_whitespace()
            .enumerate()
            .map(|(i, w)| Word { text: w.into(), start: i as f64 * step, end: i as f64 * step + step * 0.8 })
            .collect()
    }

    /// One round object, a transcript and a beat clip of `secs` seconds in `dir`.
    fn fixture(dir: &Path, text: &str, secs: f64) -> PipelineInputs {
        let mask = write_mask(dir, "plate.pgm", &disc(128));
        let scene = Scene {
            image: ImageDims { width: 512, height: 512 },
            objects: vec![ObjectRecord {
                id: "o1".into(),
                label: "plate".into(),
                bbox: [100.0, 100.0, 128.0, 128.0],
                mask,
                confidence: 0.95,
                derived: None,
            }],
            resized: None,
            groups: vec![],
        };
        std::fs::write(dir.join("scene.json"), scene.to_json()).unwrap();
        let t = TimedTranscript { words: words(text, 0.4), sentences: vec![], objects: vec![], phrases: vec![] };
        std::fs::write(dir.join("transcript.json"), serde_json::to_string(&t).unwrap()).unwrap();
        let chain = KinematicChain::default_upper_body();
        let n = (secs * 30.0) as usize;
        let frames = (0..n)
            .map(|f| {
                let mut p = Pose::zeros(chain.dof_count());
                let head = chain.bone(chain.bone_index("spine2").unwrap()).first_dof;
                p.0[head] = 0.05 * (f as f64 * 0.2).sin();
                p
            })
            .collect();
        let beat = MotionClip::new(30, chain.id(), frames).unwrap();
        std::fs::write(dir.join("beat.json"), beat.to_json()).unwrap();
        PipelineInputs { scene: dir.join("scene.json"), transcript: dir.join("transcript.json"), beat: dir.join("beat.json"), speech: None }
    }

    #[test]
    fn empty_transcript_gives_blended_base() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = fixture(dir.path(), "", 4.0);
        let cfg = PipelineConfig::default();
        let out = run_pipeline(&inputs, &cfg).unwrap();
        assert!(out.report.plans.is_empty());
        let chain = KinematicChain::default_upper_body();
        let beat = MotionClip::load(&inputs.beat).unwrap();
        let idle = Pose::zeros(chain.dof_count());
        let base = blend_base(&chain, &beat, &idle, &SpeechActivity::continuous(beat.duration()), &cfg.blend).unwrap();
        assert_eq!(out.clip, base);
    }

    #[test]
    fn one_round_object_gives_one_converged_trajectory() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = fixture(dir.path(), "look at this round plate here", 8.0);
        let out = run_pipeline(&inputs, &PipelineConfig::default()).unwrap();
        let shape: Vec<&PlanReport> = out.report.plans.iter().filter(|r| r.plan.object.as_deref() == Some("o1")).collect();
        assert_eq!(shape.len(), 1, "{:#?}", out.report.plans.iter().map(|r| &r.plan.id).collect::<Vec<_>>());
        let o = shape[0].outcome.as_ref().unwrap();
        assert!(o.converged && !o.skipped, "{o:?}");
        assert!(out.scene.objects[0].derived.is_some());
    }

    #[test]
    fn atomic_write_creates_missing_directories() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("x/y/a.json");
        let b = dir.path().join("b.json");
        write_atomically(&[(a.clone(), b"1".to_vec()), (b.clone(), b"2".to_vec())]).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), b"1");
        assert_eq!(std::fs::read(b).unwrap(), b"2");
    }

    #[test]
    fn reruns_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = fixture(dir.path(), "look at this round plate here", 8.0);
        let a = run_to_files(&inputs, &PipelineConfig::default(), &dir.path().join("a.json"), None).unwrap();
        let b = run_to_files(&inputs, &PipelineConfig::default(), &dir.path().join("b.json"), None).unwrap();
        assert_eq!(a.clip.to_json(), b.clip.to_json());
        assert_eq!(a.report.to_json(), b.report.to_json());
        let ra = std::fs::read(dir.path().join("a.report.json")).unwrap();
        let rb = std::fs::read(dir.path().join("b.report.json")).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn corrupt_mask_fails_without_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = fixture(dir.path(), "look at the plate", 4.0);
        std::fs::write(dir.path().join("plate.pgm"), b"P5 garbage").unwrap();
        let out = dir.path().join("anim.json");
        let err = run_to_files(&inputs, &PipelineConfig::default(), &out, None).unwrap_err();
        assert!(err.to_string().contains("o1"), "{err}");
        let left: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(left.len(), 4, "{left:?}");
    }

    #[test]
    fn fps_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = fixture(dir.path(), "", 2.0);
        let cfg = PipelineConfig { fps: 24, ..PipelineConfig::default() };
        assert!(matches!(run_pipeline(&inputs, &cfg), Err(Error::FpsMismatch(30, 24))));
    }

    #[test]
    fn short_beat_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = fixture(dir.path(), "one two three four five six seven eight", 1.0);
        assert!(run_pipeline(&inputs, &PipelineConfig::default()).is_err());
    }

    #[test]
    fn analyze_only_fills_derived_and_keeps_masks_resolvable() {
        let dir = tempfile::tempdir().unwrap();
        let inputs = fixture(dir.path(), "", 1.0);
        let sub = dir.path().join("out");
        std::fs::create_dir(&sub).unwrap();
        let out = sub.join("scene.json");
        analyze_to_file(&inputs.scene, &PipelineConfig::default(), &out).unwrap();
        let again = analyze_only(&out, &PipelineConfig::default()).unwrap();
        assert!(again.objects[0].derived.is_some());
    }
}
