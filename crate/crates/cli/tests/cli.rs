use std::path::Path;
use std::process::{Command, Output};

use gesturegen_core::pipeline::PipelineInputs;
use gesturegen_core::sample::write_sample;

fn gesturegen() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gesturegen"));
    c.env_remove("GESTUREGEN_CONFIG");
    c
}

fn full_run(inputs: &PipelineInputs, out: &Path) -> Command {
    let mut c = gesturegen();
    c.arg("--scene").arg(&inputs.scene);
    c.arg("--transcript").arg(&inputs.transcript);
    c.arg("--beat").arg(&inputs.beat);
    c.arg("--speech").arg(inputs.speech.as_ref().unwrap());
    c.arg("--out").arg(out);
    c
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn sample_run_writes_clip_scene_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = write_sample(&dir.path().join("in")).unwrap();
    let out_dir = dir.path().join("out");
    std::fs::create_dir(&out_dir).unwrap();
    let o = full_run(&inputs, &out_dir.join("anim.json")).arg("--report").arg(out_dir.join("r.json")).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(listing(&out_dir), ["anim.json", "anim.scene.json", "r.json"]);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("r.json")).unwrap()).unwrap();
    assert!(!report["plans"].as_array().unwrap().is_empty());
    assert!(!report["phrases"].as_array().unwrap().is_empty());
    let scene = gesturegen_core::scene::Scene::load(&out_dir.join("anim.scene.json")).unwrap();
    assert!(scene.objects.iter().all(|o| o.derived.is_some()));
}

#[test]
fn analyze_only_needs_no_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = write_sample(dir.path()).unwrap();
    let out = dir.path().join("augmented.json");
    let o = gesturegen().arg("--analyze-only").arg("--scene").arg(&inputs.scene).arg("--out").arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let scene = gesturegen_core::scene::Scene::load(&out).unwrap();
    assert_eq!(scene.objects.len(), 5);
    assert!(scene.objects.iter().all(|o| o.derived.is_some()));
}

#[test]
fn missing_transcript_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = write_sample(dir.path()).unwrap();
    let o = gesturegen().arg("--scene").arg(&inputs.scene).arg("--out").arg(dir.path().join("a.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupt_mask_exits_with_input_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = write_sample(&dir.path().join("in")).unwrap();
    std::fs::write(dir.path().join("in/masks/plate.pgm"), b"P5\n2 2\n255\n").unwrap();
    let out_dir = dir.path().join("out");
    std::fs::create_dir(&out_dir).unwrap();
    let o = full_run(&inputs, &out_dir.join("anim.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("o3"), "{}", stderr(&o));
    assert!(listing(&out_dir).is_empty());
}

#[test]
fn malformed_transcript_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut inputs = write_sample(dir.path()).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"words\": [\n    {\"text\": \"hi\", \"start\": 0.0,}\n  ]\n}\n").unwrap();
    inputs.transcript = bad;
    let o = full_run(&inputs, &dir.path().join("a.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = write_sample(dir.path()).unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[solve]\nspeedup = 2\n").unwrap();
    let o = full_run(&inputs, &dir.path().join("a.json")).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(!dir.path().join("a.json").exists());
}

#[test]
fn config_path_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = write_sample(dir.path()).unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "fps = 24\n").unwrap();
    let o = full_run(&inputs, &dir.path().join("a.json")).env("GESTUREGEN_CONFIG", &cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("fps mismatch"), "{}", stderr(&o));
}

#[test]
fn out_of_range_threshold_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = write_sample(dir.path()).unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[plan]\nsymmetry_gate = 1.2\n").unwrap();
    let o = full_run(&inputs, &dir.path().join("a.json")).arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}
