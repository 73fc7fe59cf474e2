//! Deterministic example inputs: a five-object scene with 256 by 256 masks, a thirty-second
//! transcript, a beat clip and speech intervals.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::maskgeo::BinaryMask;
use crate::pipeline::PipelineInputs;
use crate::realize::SpeechActivity;
use crate::scene::{ImageDims, ObjectRecord, Scene};
use crate::semantics::{TimedTranscript, Word};
use crate::skeleton::{KinematicChain, MotionClip, Pose};

pub const MASK_SIZE: usize = 256;
pub const FPS: u32 = 30;
/// Beat clip length, seconds.
pub const CLIP_SECONDS: f64 = 32.0;

const SCRIPT: &str = "Welcome to my little studio. \
On the table you can see a tall vase with two handles. \
Next to it lies a long pencil that I use for sketching. \
There is also a round plate which my grandmother painted. \
In the top right corner you will find a huge book about old ships. \
The lamp on the left gives a warm light in the evening. \
I keep the vase close because it reminds me of home. \
The plate is small but the colors are very bright. \
Every morning I sit here with coffee and plan the day. \
That is my favorite corner of the house.";

fn save_pgm(mask: &BinaryMask, path: &Path) -> Result<()> {
    std::fs::write(path, mask.to_pgm_bytes()).map_err(|e| Error::io(path, e))
}

fn vase(n: usize) -> BinaryMask {
    let c = n as f64 / 2.0;
    BinaryMask::from_fn(n, n, |x, y| {
        let v = y as f64 / n as f64;
        if !(0.08..0.92).contains(&v) {
            return false;
        }
        let half = n as f64 * (0.14 + 0.16 * (std::f64::consts::PI * (v - 0.1) * 1.3).sin().abs());
        let body = (x as f64 + 0.5 - c).abs() <= half;
        let hy = (v - 0.35) / 0.12;
        let handle = hy.abs() < 1.0 && {
            let d = (x as f64 + 0.5 - c).abs() - (half + n as f64 * 0.05);
            d.abs() < n as f64 * 0.025 * (1.0 - hy * hy).sqrt() + 2.0
        };
        body || handle
    })
    .expect("nonzero size")
}

fn disc(n: usize) -> BinaryMask {
    let c = n as f64 / 2.0;
    BinaryMask::from_fn(n, n, |x, y| (x as f64 + 0.5 - c).hypot(y as f64 + 0.5 - c) <= n as f64 * 0.42).expect("nonzero size")
}

fn pencil(n: usize) -> BinaryMask {
    let c = n as f64 / 2.0;
    let (s, co) = (0.5f64).sin_cos();
    BinaryMask::from_fn(n, n, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
        let u = dx * co + dy * s;
        let v = -dx * s + dy * co;
        u.abs() <= n as f64 * 0.45 && v.abs() <= n as f64 * 0.045
    })
    .expect("nonzero size")
}

fn book(n: usize) -> BinaryMask {
    BinaryMask::from_fn(n, n, |x, y| (30..226).contains(&x) && (50..206).contains(&y)).expect("nonzero size")
}

fn lamp(n: usize) -> BinaryMask {
    let c = n as f64 / 2.0;
    BinaryMask::from_fn(n, n, |x, y| {
        let (fx, fy) = (x as f64 + 0.5 - c, y as f64);
        let shade = (20.0..100.0).contains(&fy) && fx.abs() <= 30.0 + (fy - 20.0) * 0.6;
        let pole = (100.0..220.0).contains(&fy) && fx.abs() <= 6.0;
        let base = (220.0..236.0).contains(&fy) && fx.abs() <= 50.0;
        shade || pole || base
    })
    .expect("nonzero size")
}

fn transcript() -> TimedTranscript {
    let mut words = Vec::new();
    let mut sentences = vec![0];
    let mut t = 0.3;
    for (i, w) in SCRIPT.split_whitespace().enumerate() {
        let len = 0.12 + 0.028 * w.trim_matches(|c: char| !c.is_alphanumeric()).len() as f64;
        words.push(Word { text: w.to_string(), start: t, end: t + len });
        t += len + 0.03;
        if w.ends_with('.') {
            t += 0.35;
            sentences.push(i + 1);
        }
    }
    sentences.pop();
    TimedTranscript { words, sentences, objects: vec![], phrases: vec![] }
}

fn beat(chain: &KinematicChain) -> Result<MotionClip> {
    let n = (CLIP_SECONDS * FPS as f64) as usize;
    let wave = |name: &str, k: usize, amp: f64, freq: f64, phase: f64, f: usize| -> (usize, f64) {
        let bone = chain.bone(chain.bone_index(name).expect("bundled bone"));
        (bone.first_dof + k, amp * (std::f64::consts::TAU * freq * f as f64 / FPS as f64 + phase).sin())
    };
    let frames = (0..n)
        .map(|f| {
            let mut p = Pose::zeros(chain.dof_count());
            for (k, v) in [
                wave("spine2", 0, 0.03, 0.3, 0.0, f),
                wave("spine2", 1, 0.04, 0.2, 1.0, f),
                wave("neck", 0, 0.05, 0.4, 0.5, f),
                wave("left_shoulder", 0, 0.12, 0.5, 0.0, f),
                wave("right_shoulder", 0, 0.12, 0.5, 2.0, f),
                wave("left_elbow", 0, 0.15, 0.7, 0.3, f),
                wave("right_elbow", 0, 0.15, 0.7, 1.9, f),
            ] {
                p.0[k] += v;
            }
            p.0.iter_mut().for_each(|v| *v = (*v * 1e6).round() / 1e6);
            chain.clamp_pose(&mut p);
            p
        })
        .collect();
    MotionClip::new(FPS, chain.id(), frames)
}

fn speech(t: &TimedTranscript) -> SpeechActivity {
    let mut intervals: Vec<[f64; 2]> = Vec::new();
    for w in &t.words {
        match intervals.last_mut() {
            Some(last) if w.start - last[1] < 0.4 => last[1] = w.end,
            _ => intervals.push([w.start, w.end]),
        }
    }
    SpeechActivity { intervals }
}

/// Writes the sample into `dir`: `scene.json`, five masks under `masks/`,
/// `transcript.json`, `beat.json` and `speech.json`.
pub fn write_sample(dir: &Path) -> Result<PipelineInputs> {
    let masks = dir.join("masks");
    std::fs::create_dir_all(&masks).map_err(|e| Error::io(&masks, e))?;
    let n = MASK_SIZE;
    let objects: [(&str, &str, [f64; 4], BinaryMask); 5] = [
        ("o1", "vase", [120.0, 260.0, 256.0, 256.0], vase(n)),
        ("o2", "pencil", [400.0, 420.0, 256.0, 256.0], pencil(n)),
        ("o3", "plate", [420.0, 120.0, 256.0, 256.0], disc(n)),
        ("o4", "book", [740.0, 40.0, 256.0, 256.0], book(n)),
        ("o5", "lamp", [20.0, 10.0, 256.0, 256.0], lamp(n)),
    ];
    let mut records = Vec::new();
    for (id, label, bbox, mask) in objects {
        let rel = PathBuf::from("masks").join(format!("{label}.pgm"));
        save_pgm(&mask, &dir.join(&rel))?;
        records.push(ObjectRecord { id: id.into(), label: label.into(), bbox, mask: rel, confidence: 0.9, derived: None });
    }
    let scene = Scene { image: ImageDims { width: 1024, height: 768 }, objects: records, resized: None, groups: vec![] };
    let chain = KinematicChain::default_upper_body();
    let t = transcript();
    let files = [
        ("scene.json", scene.to_json()),
        ("transcript.json", serde_json::to_string_pretty(&t).expect("transcript serializes") + "\n"),
        ("beat.json", beat(&chain)?.to_json()),
        ("speech.json", serde_json::to_string_pretty(&speech(&t)).expect("speech serializes") + "\n"),
    ];
    for (name, text) in files {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    }
    Ok(PipelineInputs {
        scene: dir.join("scene.json"),
        transcript: dir.join("transcript.json"),
        beat: dir.join("beat.json"),
        speech: Some(dir.join("speech.json")),
    })
}
