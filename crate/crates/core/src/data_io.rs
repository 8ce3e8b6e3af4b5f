//! Synthetic motion, motion files and history/future windowing.
//!
//! Binary motion files (`WMOT`, little-endian):
//!
//! ```text
//! "WMOT"  u8 version (1)  u32 frames  u32 joints  f32 fps
//! f64 × frames × 3·joints, row-major (frame, joint, axis)
//! ```
//!
//! CSV motion files have a header `frame,j0x,j0y,j0z,j1x,...` and one row per
//! frame starting with its index.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use ndarray::{s, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::binio::Writer;
use crate::error::{Error, Result};
use crate::manifold::MotionSequence;
use crate::sampler::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    SineWalk,
    Chirp,
    StopStart,
    Mixture,
}

impl SynthKind {
    pub const ALL: [SynthKind; 4] = [SynthKind::SineWalk, SynthKind::Chirp, SynthKind::StopStart, SynthKind::Mixture];

    pub fn as_str(self) -> &'static str {
        match self {
            SynthKind::SineWalk => "sine_walk",
            SynthKind::Chirp => "chirp",
            SynthKind::StopStart => "stop_start",
            SynthKind::Mixture => "mixture",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown synthetic motion kind `{s}` (expected sine_walk, chirp, stop_start or mixture)"
                ))
            })
    }
}

fn check_synth(frames: usize, joints: usize, fps: f64) -> Result<()> {
    if frames < 8 {
        return Err(Error::InvalidArgument(format!("synthetic motion needs at least 8 frames, got {frames}")));
    }
    if joints == 0 {
        return Err(Error::InvalidArgument("synthetic motion needs at least one joint".into()));
    }
    if !(fps > 0.0) {
        return Err(Error::InvalidArgument("fps must be positive".into()));
    }
    Ok(())
}

/// Per-joint offsets (a rough skeleton layout) shared by every kind.
fn joint_offsets(joints: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..3 * joints).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Sinusoids at a shared gait `frequency` (Hz) with random per-channel
/// amplitude and phase.
pub fn sine_walk_with(frequency: f64, frames: usize, joints: usize, fps: f64, rng: &mut ChaCha8Rng) -> Result<MotionSequence> {
    check_synth(frames, joints, fps)?;
    let offsets = joint_offsets(joints, rng);
    let params: Vec<(f64, f64)> = (0..3 * joints)
        .map(|_| (rng.random_range(0.3..1.0), rng.random_range(0.0..TAU)))
        .collect();
    let data = Array2::from_shape_fn((frames, 3 * joints), |(t, c)| {
        let (amp, phase) = params[c];
        offsets[c] + amp * (TAU * frequency * t as f64 / fps + phase).sin()
    });
    MotionSequence::new(data, fps)
}

/// Sinusoids whose frequency rises linearly over the clip.
fn chirp(frames: usize, joints: usize, fps: f64, rng: &mut ChaCha8Rng) -> Result<MotionSequence> {
    let offsets = joint_offsets(joints, rng);
    let f0 = rng.random_range(0.3..1.0);
    let f1 = f0 + rng.random_range(0.5..2.0);
    let duration = frames as f64 / fps;
    let rate = (f1 - f0) / duration;
    let params: Vec<(f64, f64)> = (0..3 * joints)
        .map(|_| (rng.random_range(0.3..1.0), rng.random_range(0.0..TAU)))
        .collect();
    let data = Array2::from_shape_fn((frames, 3 * joints), |(t, c)| {
        let (amp, phase) = params[c];
        let sec = t as f64 / fps;
        offsets[c] + amp * (TAU * (f0 * sec + 0.5 * rate * sec * sec) + phase).sin()
    });
    MotionSequence::new(data, fps)
}

/// Alternating held and moving segments. Returns the motion and the frame
/// ranges where the pose is held constant.
pub fn stop_start(frames: usize, joints: usize, fps: f64, rng: &mut ChaCha8Rng) -> Result<(MotionSequence, Vec<Range<usize>>)> {
    check_synth(frames, joints, fps)?;
    let channels = 3 * joints;
    let mut data = Array2::zeros((frames, channels));
    let mut pose: Vec<f64> = joint_offsets(joints, rng);
    let mut holds = Vec::new();
    let mut moving = rng.random_bool(0.5);
    let mut t = 0;
    while t < frames {
        let len = rng.random_range(4..=16).min(frames - t);
        if moving {
            let freq = rng.random_range(0.5..2.0);
            let amps: Vec<f64> = (0..channels).map(|_| rng.random_range(0.3..1.0)).collect();
            let start = pose.clone();
            for i in 0..len {
                // move away from the held pose with a nonzero initial speed
                let phase = TAU * freq * (i + 1) as f64 / fps;
                for c in 0..channels {
                    data[[t + i, c]] = start[c] + amps[c] * phase.sin();
                }
            }
            pose = data.row(t + len - 1).to_vec();
        } else {
            for i in 0..len {
                data.row_mut(t + i).iter_mut().zip(&pose).for_each(|(d, p)| *d = *p);
            }
            holds.push(t..t + len);
        }
        moving = !moving;
        t += len;
    }
    Ok((MotionSequence::new(data, fps)?, holds))
}

/// One synthetic clip of the given kind.
pub fn synth_motion(kind: SynthKind, frames: usize, joints: usize, fps: f64, rng: &mut ChaCha8Rng) -> Result<MotionSequence> {
    check_synth(frames, joints, fps)?;
    match kind {
        SynthKind::SineWalk => {
            let f = rng.random_range(0.5..1.5);
            sine_walk_with(f, frames, joints, fps, rng)
        }
        SynthKind::Chirp => chirp(frames, joints, fps, rng),
        SynthKind::StopStart => Ok(stop_start(frames, joints, fps, rng)?.0),
        SynthKind::Mixture => {
            let parts = [
                synth_motion(SynthKind::SineWalk, frames, joints, fps, rng)?,
                synth_motion(SynthKind::Chirp, frames, joints, fps, rng)?,
                synth_motion(SynthKind::StopStart, frames, joints, fps, rng)?,
            ];
            let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mut data = Array2::zeros((frames, 3 * joints));
            for (p, w) in parts.iter().zip(&raw) {
                data.scaled_add(w / total, &p.data);
            }
            MotionSequence::new(data, fps)
        }
    }
}

/// `count` clips, clip `i` drawn from random stream `i` of `seed`.
pub fn synth_corpus(kind: SynthKind, count: usize, frames: usize, joints: usize, fps: f64, seed: u64) -> Result<Vec<MotionSequence>> {
    (0..count)
        .map(|i| synth_motion(kind, frames, joints, fps, &mut stream_rng(seed, i)))
        .collect()
}

const MAGIC: &[u8; 4] = b"WMOT";
const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 4 + 4 + 4;

pub fn motion_to_bytes(motion: &MotionSequence) -> Result<Vec<u8>> {
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u8(VERSION);
    w.u32(motion.frames())?;
    w.u32(motion.joints)?;
    w.f32(motion.fps as f32);
    motion.data.iter().for_each(|v| w.f64(*v));
    Ok(w.buf)
}

pub fn motion_from_bytes(bytes: &[u8]) -> Result<MotionSequence> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("motion file is shorter than its header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic in motion file: expected \"WMOT\", found {:?}",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported motion file version {}", bytes[4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let frames = u32_at(5);
    let joints = u32_at(9);
    let fps = f32::from_le_bytes(bytes[13..17].try_into().expect("4 bytes")) as f64;
    if joints == 0 {
        return Err(Error::Format("motion file declares zero joints".into()));
    }
    let row_bytes = 3 * joints * 8;
    let body = &bytes[HEADER_LEN..];
    let need = frames * row_bytes;
    if body.len() < need {
        return Err(Error::Format(format!("unexpected end of file at frame {}", body.len() / row_bytes)));
    }
    if body.len() > need {
        return Err(Error::Format(format!(
            "frame-length mismatch: header declares {frames} frames but {} bytes follow",
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let data = Array2::from_shape_vec((frames, 3 * joints), values).map_err(|e| Error::Format(e.to_string()))?;
    MotionSequence::new(data, fps)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Fallback frame rate for CSV files, which carry none.
pub const CSV_FPS: f64 = 50.0;

/// Reads a `.csv` motion or a binary `WMOT` file.
pub fn load_motion(path: &Path) -> Result<MotionSequence> {
    if is_csv(path) {
        return load_motion_csv(path, CSV_FPS);
    }
    motion_from_bytes(&std::fs::read(path)?)
}

/// Writes CSV for a `.csv` path, `WMOT` otherwise.
pub fn save_motion(path: &Path, motion: &MotionSequence) -> Result<()> {
    if is_csv(path) {
        return save_motion_csv(path, motion);
    }
    std::fs::write(path, motion_to_bytes(motion)?)?;
    Ok(())
}

pub fn csv_header(joints: usize) -> Vec<String> {
    let mut h = vec!["frame".to_string()];
    for j in 0..joints {
        for axis in ["x", "y", "z"] {
            h.push(format!("j{j}{axis}"));
        }
    }
    h
}

pub fn load_motion_csv(path: &Path, fps: f64) -> Result<MotionSequence> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let cols = header.len().saturating_sub(1);
    if cols == 0 || !cols.is_multiple_of(3) || header != csv_header(cols / 3) {
        return Err(Error::Format(format!(
            "CSV header must read frame,j0x,j0y,j0z,...; found {}",
            header.join(",")
        )));
    }
    let mut values = Vec::new();
    let mut frames = 0;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != cols + 1 {
            return Err(Error::Format(format!("CSV row {} has {} fields, expected {}", i + 1, rec.len(), cols + 1)));
        }
        for (c, field) in rec.iter().enumerate().skip(1) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("CSV row {} column {}: `{field}` is not a number", i + 1, header[c])))?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("CSV row {} column {}", i + 1, header[c])));
            }
            values.push(v);
        }
        frames += 1;
    }
    if frames == 0 {
        return Err(Error::EmptyInput("CSV motion rows"));
    }
    let data = Array2::from_shape_vec((frames, cols), values).map_err(|e| Error::Format(e.to_string()))?;
    MotionSequence::new(data, fps)
}

pub fn save_motion_csv(path: &Path, motion: &MotionSequence) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(csv_header(motion.joints))?;
    for (i, row) in motion.data.rows().into_iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A history/future split of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub history: Array2<f64>,
    pub future: Array2<f64>,
    pub sequence: usize,
    pub start: usize,
}

impl Window {
    /// History followed by future.
    pub fn full(&self) -> Array2<f64> {
        ndarray::concatenate(ndarray::Axis(0), &[self.history.view(), self.future.view()]).expect("same channel count")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Windows {
    pub windows: Vec<Window>,
    /// Sequences shorter than H + F.
    pub skipped: usize,
}

/// Sliding windows of `h + f` frames at `stride`, over every sequence.
pub fn make_windows(sequences: &[MotionSequence], h: usize, f: usize, stride: usize) -> Result<Windows> {
    if h == 0 || f == 0 {
        return Err(Error::InvalidArgument("history and future lengths must be >= 1".into()));
    }
    if stride == 0 {
        return Err(Error::InvalidArgument("window stride must be >= 1".into()));
    }
    let len = h + f;
    let mut windows = Vec::new();
    let mut skipped = 0;
    for (si, seq) in sequences.iter().enumerate() {
        if seq.frames() < len {
            skipped += 1;
            continue;
        }
        let mut start = 0;
        while start + len <= seq.frames() {
            windows.push(Window {
                history: seq.data.slice(s![start..start + h, ..]).to_owned(),
                future: seq.data.slice(s![start + h..start + len, ..]).to_owned(),
                sequence: si,
                start,
            });
            start += stride;
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} sequence(s) shorter than {len} frames");
    }
    Ok(Windows { windows, skipped })
}

#[derive(Debug, Clone)]
pub struct MotionDataset {
    pub sequences: Vec<MotionSequence>,
    pub windows: Vec<Window>,
    pub skipped: usize,
    pub h: usize,
    pub f: usize,
}

impl MotionDataset {
    pub fn new(sequences: Vec<MotionSequence>, h: usize, f: usize, stride: usize) -> Result<Self> {
        let w = make_windows(&sequences, h, f, stride)?;
        Ok(Self {
            sequences,
            windows: w.windows,
            skipped: w.skipped,
            h,
            f,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        stream_rng(seed, 0)
    }

    #[test]
    fn sine_walk_autocorrelation_peaks_at_period() {
        let fps = 50.0;
        let freq = 1.25; // period 40 frames
        let m = sine_walk_with(freq, 400, 2, fps, &mut rng(1)).unwrap();
        for c in 0..6 {
            let col = m.data.column(c);
            let mean = col.mean().unwrap();
            let x: Vec<f64> = col.iter().map(|v| v - mean).collect();
            let ac = |lag: usize| (0..x.len() - lag).map(|i| x[i] * x[i + lag]).sum::<f64>() / (x.len() - lag) as f64;
            let best = (20..=60).max_by(|a, b| ac(*a).total_cmp(&ac(*b))).unwrap();
            assert_eq!(best, 40, "channel {c}");
        }
    }

    #[test]
    fn stop_start_holds_are_still() {
        let (m, holds) = stop_start(200, 3, 50.0, &mut rng(2)).unwrap();
        assert!(!holds.is_empty());
        for r in holds {
            for t in r.start + 1..r.end {
                assert!(m.data.row(t).iter().zip(m.data.row(t - 1).iter()).all(|(a, b)| a == b));
            }
        }
    }

    #[test]
    fn synthesis_is_seeded_and_validated() {
        for kind in SynthKind::ALL {
            let a = synth_motion(kind, 64, 4, 50.0, &mut rng(3)).unwrap();
            let b = synth_motion(kind, 64, 4, 50.0, &mut rng(3)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.data.dim(), (64, 12));
            assert_eq!(kind.as_str().parse::<SynthKind>().unwrap(), kind);
        }
        assert!("walk".parse::<SynthKind>().is_err());
        assert!(synth_motion(SynthKind::Chirp, 7, 4, 50.0, &mut rng(3)).is_err());
        assert!(synth_motion(SynthKind::Chirp, 8, 0, 50.0, &mut rng(3)).is_err());
        let c = synth_corpus(SynthKind::SineWalk, 3, 32, 2, 50.0, 9).unwrap();
        assert_ne!(c[0], c[1]);
    }

    #[test]
    fn binary_roundtrip_is_bit_exact() {
        let m = synth_motion(SynthKind::Mixture, 33, 5, 50.0, &mut rng(4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.wmot");
        save_motion(&p, &m).unwrap();
        let back = load_motion(&p).unwrap();
        assert_eq!(back.data, m.data);
        assert_eq!(back.fps, 50.0);
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"WMOT");
        assert_eq!(bytes.len(), HEADER_LEN + 33 * 15 * 8);
    }

    #[test]
    fn truncated_and_corrupt_files() {
        let m = synth_motion(SynthKind::SineWalk, 10, 1, 50.0, &mut rng(5)).unwrap();
        let bytes = motion_to_bytes(&m).unwrap();
        let cut = &bytes[..HEADER_LEN + 3 * 24 + 5];
        let err = motion_from_bytes(cut).unwrap_err();
        assert_eq!(err.to_string(), "format: unexpected end of file at frame 3");
        let mut bad = bytes.clone();
        bad[1] = b'X';
        assert!(motion_from_bytes(&bad).is_err());
        let mut long = bytes.clone();
        long.extend_from_slice(&[0; 8]);
        assert!(motion_from_bytes(&long).unwrap_err().to_string().contains("mismatch"));
        let mut nan = bytes;
        nan[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(motion_from_bytes(&nan), Err(Error::NonFinite(_))));
    }

    #[test]
    fn csv_import_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(
            &p,
            "frame,j0x,j0y,j0z,j1x,j1y,j1z\n0,1,2,3,4,5,6\n1,1.5,2.5,3.5,4.5,5.5,6.5\n2,0,0,0,0,0,-1e-3\n",
        )
        .unwrap();
        let m = load_motion(&p).unwrap();
        assert_eq!(m.data.dim(), (3, 6));
        assert_eq!(m.joints, 2);
        assert_eq!(m.data[[1, 4]], 5.5);
        assert_eq!(m.data[[2, 5]], -1e-3);
        let out = dir.path().join("o.csv");
        save_motion(&out, &m).unwrap();
        assert_eq!(load_motion(&out).unwrap().data, m.data);
        std::fs::write(&p, "frame,a,b,c\n0,1,2,3\n").unwrap();
        assert!(load_motion(&p).is_err());
        std::fs::write(&p, "frame,j0x,j0y,j0z\n0,1,NaN,3\n").unwrap();
        assert!(load_motion(&p).is_err());
    }

    fn seq(len: usize) -> MotionSequence {
        MotionSequence::new(Array2::from_shape_fn((len, 3), |(t, c)| (t * 3 + c) as f64), 50.0).unwrap()
    }

    #[test]
    fn window_counts() {
        assert_eq!(make_windows(&[seq(125)], 25, 100, 1).unwrap().windows.len(), 1);
        assert_eq!(make_windows(&[seq(126)], 25, 100, 1).unwrap().windows.len(), 2);
        assert_eq!(make_windows(&[seq(225)], 25, 100, 10).unwrap().windows.len(), 11);
        let w = make_windows(&[seq(100), seq(130)], 25, 100, 5).unwrap();
        assert_eq!((w.windows.len(), w.skipped), (2, 1));
        let win = &w.windows[1];
        assert_eq!((win.history.nrows(), win.future.nrows(), win.start), (25, 100, 5));
        assert_eq!(win.history[[0, 0]], 15.0);
        assert_eq!(win.full().nrows(), 125);
        assert!(make_windows(&[seq(10)], 2, 2, 0).is_err());
    }

    proptest! {
        #[test]
        fn window_count_formula(len in 10usize..300, h in 1usize..5, f in 1usize..5, stride in 1usize..7) {
            let w = make_windows(&[seq(len)], h, f, stride).unwrap();
            prop_assert_eq!(w.windows.len(), (len - (h + f)) / stride + 1);
            prop_assert!(w.windows.iter().all(|x| x.history.nrows() == h && x.future.nrows() == f));
        }
    }
}
