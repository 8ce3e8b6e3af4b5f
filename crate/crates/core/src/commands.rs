//! Workflows behind the command-line subcommands.
//!
//! Each `cmd_*` function reads a [`RunConfig`], writes its artifacts under
//! `out.dir` and returns a short summary. The lower-level helpers
//! ([`load_corpus`], [`train_model`], [`evaluate`], ...) are public so tests
//! and benches can drive the same code paths without touching the disk.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::RunConfig;
use crate::data_io::{load_motion, make_windows, save_motion, synth_corpus, Window};
use crate::denoiser::checkpoint::{Checkpoint, ModelMeta};
use crate::denoiser::{Denoiser, NoisePredictor};
use crate::error::{shape_err, Error, Result};
use crate::exec::{map_indexed, map_range, ExecMode};
use crate::manifold::{decode_matrix, encode_matrix, manifold_shape, pad_history, MotionSequence, NormStats};
use crate::metrics::{mm_groups, zero_velocity, MetricReport, PredictionSet};
use crate::plot::{LineChart, Series};
use crate::sampler::{controlled_sample, frame_mask, joint_mask, sample_indexed, stream_rng, SampleConfig, SampleContext};
use crate::schedule::{build_schedule, q_sample, NoiseSchedule};
use crate::train::{TrainPair, Trainer};
use crate::wavelet::{make_basis, supported_bases, WaveletBasis};

/// Training and held-out sequences.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub train: Vec<MotionSequence>,
    pub test: Vec<MotionSequence>,
}

/// Synthetic corpus from `data.*`, or the files in `data.input` with the
/// last `data.test_sequences` held out.
pub fn load_corpus(cfg: &RunConfig) -> Result<Corpus> {
    if cfg.data_input.trim().is_empty() {
        let n_train = cfg.data_train_sequences;
        let all = synth_corpus(
            cfg.data_kind,
            n_train + cfg.data_test_sequences,
            cfg.data_frames,
            cfg.data_joints,
            cfg.data_fps,
            cfg.data_seed,
        )?;
        let mut train = all;
        let test = train.split_off(n_train);
        return Ok(Corpus { train, test });
    }
    let mut seqs = Vec::new();
    for p in cfg.data_input.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m = load_motion(Path::new(p))?;
        if m.channels() != cfg.channels() {
            return Err(shape_err(format!(
                "{p} has {} channels, data.joints = {} needs {}",
                m.channels(),
                cfg.data_joints,
                cfg.channels()
            )));
        }
        seqs.push(m);
    }
    if seqs.len() <= cfg.data_test_sequences {
        return Err(Error::Config(format!(
            "data.input lists {} file(s); need more than data.test_sequences = {}",
            seqs.len(),
            cfg.data_test_sequences
        )));
    }
    let test = seqs.split_off(seqs.len() - cfg.data_test_sequences);
    Ok(Corpus { train: seqs, test })
}

pub fn model_meta(cfg: &RunConfig) -> ModelMeta {
    ModelMeta {
        basis: cfg.model_basis.clone(),
        frames: cfg.total_frames(),
        channels: cfg.channels(),
        history: cfg.data_history,
        fps: cfg.data_fps,
        schedule: cfg.schedule_kind,
        schedule_steps: cfg.schedule_steps,
    }
}

/// Normalized clean manifolds and padded-history conditions of `windows`.
pub fn training_pairs(windows: &[Window], norm: &NormStats, basis: &WaveletBasis, fps: f64) -> Result<Vec<TrainPair>> {
    windows
        .iter()
        .map(|w| {
            let full = norm.normalize(w.full().view());
            let padded = pad_history(full.slice(s![..w.history.nrows(), ..]), full.nrows(), fps)?;
            Ok(TrainPair {
                y0: encode_matrix(full.view(), basis)?,
                cond: encode_matrix(padded.data.view(), basis)?,
            })
        })
        .collect()
}

/// Conditional noise-prediction loss of `model` on up to 64 evenly spaced
/// pairs, with timestep and noise for pair `j` drawn from stream `j` of
/// `seed`. Being a fixed draw, it is comparable across training.
pub fn probe_loss(model: &Denoiser<f32>, pairs: &[TrainPair], schedule: &NoiseSchedule, seed: u64, mode: ExecMode) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("probe pairs"));
    }
    let n = pairs.len().min(64);
    let steps = schedule.steps.min(model.config.max_timestep);
    let losses = map_range(mode, n, |j| -> Result<f64> {
        let pair = &pairs[j * pairs.len() / n];
        let mut rng = stream_rng(seed, j);
        let t = rng.random_range(1..=steps);
        let noise = Array2::from_shape_fn(pair.y0.dim(), |_| StandardNormal.sample(&mut rng));
        let y_t = q_sample(pair.y0.view(), t, noise.view(), schedule)?.mapv(|v| v as f32);
        let cond = pair.cond.mapv(|v| v as f32);
        Ok(model.loss(y_t.view(), t, Some(cond.view()), noise.mapv(|v| v as f32).view())? as f64)
    });
    let mut total = 0.0;
    for l in losses {
        total += l?;
    }
    Ok(total / n as f64)
}

#[derive(Debug)]
pub struct TrainReport {
    pub checkpoint: Checkpoint,
    /// Probe loss before the first step of this run.
    pub initial_loss: f64,
    /// Probe loss of the raw weights after the last completed step.
    pub final_loss: f64,
    /// `(step, batch loss)` for every completed step.
    pub losses: Vec<(u64, f64)>,
    /// Set when training stopped on a non-finite loss; `checkpoint` then
    /// holds the last good state.
    pub diverged: Option<Error>,
}

const PROBE_STREAM: u64 = 0x5052_4f42;

/// Trains from scratch, or from `resume`, for `model.epochs` passes
/// (capped at `model.max_steps` steps when that is nonzero).
pub fn train_model(cfg: &RunConfig, resume: Option<Checkpoint>, mode: ExecMode) -> Result<TrainReport> {
    let corpus = load_corpus(cfg)?;
    let ds = make_windows(&corpus.train, cfg.data_history, cfg.data_future, cfg.data_stride)?;
    if ds.windows.is_empty() {
        return Err(Error::EmptyInput("training windows (sequences shorter than data.history + data.future)"));
    }
    let basis = make_basis(&cfg.model_basis)?;
    let schedule = build_schedule(cfg.schedule_kind, cfg.schedule_steps)?;
    let meta = model_meta(cfg);
    let (k, d4) = manifold_shape(meta.frames, meta.channels, &basis);
    let dcfg = cfg.denoiser_config(k, d4);

    let (mut trainer, norm) = match resume {
        Some(ck) => {
            if ck.config != dcfg || ck.meta != meta {
                return Err(Error::Config(
                    "checkpoint was trained under a different model, data or schedule configuration".into(),
                ));
            }
            (ck.trainer(cfg.train_hyper())?, ck.norm)
        }
        None => {
            let fulls: Vec<Array2<f64>> = ds.windows.iter().map(Window::full).collect();
            let norm = NormStats::fit(fulls.iter().map(|a| a.view()))?;
            (Trainer::new(Denoiser::new(dcfg, cfg.model_seed)?, cfg.train_hyper()), norm)
        }
    };
    let pairs = training_pairs(&ds.windows, &norm, &basis, cfg.data_fps)?;
    let probe_seed = cfg.model_seed ^ PROBE_STREAM;
    let initial_loss = probe_loss(&trainer.model, &pairs, &schedule, probe_seed, mode)?;

    let start = trainer.step;
    let mut rng = stream_rng(cfg.model_seed, 1 + start as usize);
    let batch = cfg.model_batch_size.max(1);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut losses = Vec::new();
    let mut diverged = None;
    'epochs: for _ in 0..cfg.model_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            if cfg.model_max_steps > 0 && losses.len() >= cfg.model_max_steps {
                break 'epochs;
            }
            let b: Vec<TrainPair> = chunk.iter().map(|&i| pairs[i].clone()).collect();
            match trainer.train_step(&b, &schedule, &mut rng, mode) {
                Ok(l) => {
                    if trainer.step % 100 == 0 {
                        log::info!("step {} loss {l:.5}", trainer.step);
                    }
                    losses.push((trainer.step, l));
                }
                Err(e @ Error::NonFinite(_)) => {
                    diverged = Some(e);
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
        }
    }
    let final_loss = probe_loss(&trainer.model, &pairs, &schedule, probe_seed, mode)?;
    Ok(TrainReport {
        checkpoint: Checkpoint::from_trainer(&trainer, meta, norm),
        initial_loss,
        final_loss,
        losses,
        diverged,
    })
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_effective_config(cfg: &RunConfig, dir: &Path) -> Result<()> {
    fs::write(dir.join("config.txt"), cfg.dump())?;
    Ok(())
}

/// Trains and writes the checkpoint, `loss.csv` and (with `out.svg`)
/// `loss.svg`. On divergence the last good checkpoint is still written and
/// the error is returned.
pub fn cmd_train(cfg: &RunConfig, resume: Option<&Path>, mode: ExecMode) -> Result<String> {
    let dir = out_dir(cfg)?;
    write_effective_config(cfg, &dir)?;
    let resume = resume.map(Checkpoint::load).transpose()?;
    let report = train_model(cfg, resume, mode)?;
    let ck_path = cfg.checkpoint_path();
    if let Some(parent) = ck_path.parent() {
        fs::create_dir_all(parent)?;
    }
    report.checkpoint.save(&ck_path)?;

    let mut csv = String::from("step,loss\n");
    for (step, l) in &report.losses {
        let _ = writeln!(csv, "{step},{l}");
    }
    fs::write(dir.join("loss.csv"), csv)?;
    if cfg.out_svg && !report.losses.is_empty() {
        let mut chart = LineChart::new("training loss", "step", "loss");
        chart.push(Series {
            name: "batch loss".into(),
            points: report.losses.iter().map(|&(s, l)| (s as f64, l)).collect(),
            dashed: false,
        });
        fs::write(dir.join("loss.svg"), chart.to_svg())?;
    }
    if let Some(e) = report.diverged {
        return Err(e);
    }
    Ok(format!(
        "steps {}\ninitial loss {:.6}\nfinal loss {:.6}\ncheckpoint {}\n",
        report.checkpoint.step,
        report.initial_loss,
        report.final_loss,
        ck_path.display()
    ))
}

/// Which joints and frames `predict` pins to the ground truth.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControlSpec {
    pub joints: Vec<usize>,
    /// Inclusive frame range.
    pub frames: Option<(usize, usize)>,
}

impl ControlSpec {
    pub fn is_empty(&self) -> bool {
        self.joints.is_empty() && self.frames.is_none()
    }

    /// The union of the joint and frame masks.
    pub fn mask(&self, frames: usize, channels: usize) -> Result<Array2<f64>> {
        let mut m = joint_mask(frames, channels, &self.joints)?;
        if let Some((lo, hi)) = self.frames {
            let f = frame_mask(frames, channels, lo, hi)?;
            m.zip_mut_with(&f, |a, b| *a = a.max(*b));
        }
        Ok(m)
    }
}

/// Parses `0,1,2`.
pub fn parse_joint_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| usize::from_str(p).map_err(|_| Error::InvalidArgument(format!("bad joint index `{p}`"))))
        .collect()
}

/// Parses `a..b` or `a..=b`, both inclusive.
pub fn parse_frame_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("frame range `{s}` is not of the form a..b"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo = a.trim().parse().map_err(|_| bad())?;
    let hi = b.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn check_meta(cfg: &RunConfig, ck: &Checkpoint) -> Result<()> {
    let want = (cfg.data_history, cfg.total_frames(), cfg.channels());
    let got = (ck.meta.history, ck.meta.frames, ck.meta.channels);
    if want != got {
        return Err(shape_err(format!(
            "config (history, frames, channels) = {want:?} but checkpoint has {got:?}"
        )));
    }
    Ok(())
}

/// Draws `sample.count` futures for the history in `input` and writes
/// `pred_NNN.wmot`, `trajectories.csv` and `trajectory.svg`.
///
/// The first H frames of `input` are the observation. With a control spec
/// the file must hold at least H + F frames; those frames are the target the
/// masked entries follow.
pub fn cmd_predict(cfg: &RunConfig, checkpoint: &Path, input: &Path, control: &ControlSpec, mode: ExecMode) -> Result<String> {
    let ck = Checkpoint::load(checkpoint)?;
    let ctx = SampleContext::from_checkpoint(&ck)?;
    let model = ck.model()?;
    let schedule = build_schedule(ck.meta.schedule, ck.meta.schedule_steps)?;
    let scfg = cfg.sample_config();
    let motion = load_motion(input)?;
    let (h, total, c) = (ctx.history, ctx.frames, ctx.channels());
    if motion.channels() != c || motion.frames() < h {
        return Err(shape_err(format!(
            "input motion is {} frames × {} channels; checkpoint expects at least {h} frames × {c} channels",
            motion.frames(),
            motion.channels()
        )));
    }
    let history = motion.data.slice(s![..h, ..]);
    let gt = if control.is_empty() {
        None
    } else {
        if motion.frames() < total {
            return Err(shape_err(format!(
                "control needs {total} frames of ground truth, input has {}",
                motion.frames()
            )));
        }
        Some(motion.data.slice(s![..total, ..]))
    };
    let mask = gt.map(|_| control.mask(total, c)).transpose()?;

    let count = cfg.sample_count.max(1);
    let preds: Vec<MotionSequence> = map_range(mode, count, |i| match (&gt, &mask) {
        (Some(g), Some(m)) => controlled_sample(&model, &ctx, history, *g, m.view(), &schedule, &scfg, i),
        _ => sample_indexed(&model, &ctx, history, &schedule, &scfg, i),
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let dir = out_dir(cfg)?;
    write_effective_config(cfg, &dir)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["sample".to_string(), "frame".to_string()];
    header.extend(crate::data_io::csv_header(c / 3).into_iter().skip(1));
    csv.write_record(&header)?;
    let mut rows = |name: &str, data: ArrayView2<f64>| -> Result<()> {
        for (f, row) in data.outer_iter().enumerate() {
            let mut rec = vec![name.to_string(), f.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            csv.write_record(&rec)?;
        }
        Ok(())
    };
    if let Some(g) = &gt {
        rows("gt", *g)?;
    }
    for (i, p) in preds.iter().enumerate() {
        save_motion(&dir.join(format!("pred_{i:03}.wmot")), p)?;
        rows(&i.to_string(), p.data.view())?;
    }
    let bytes = csv.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    fs::write(dir.join("trajectories.csv"), bytes)?;

    if cfg.out_svg {
        let mut chart = LineChart::new("joint 0, x channel", "frame", "position");
        let observed: Vec<f64> = history.column(0).to_vec();
        if let Some(g) = &gt {
            chart.push(Series::new("ground truth", &g.column(0).to_vec()).dashed());
        } else {
            chart.push(Series::new("history", &observed).dashed());
        }
        for (i, p) in preds.iter().enumerate().take(8) {
            chart.push(Series::new(format!("sample {i}"), &p.data.column(0).to_vec()));
        }
        fs::write(dir.join("trajectory.svg"), chart.to_svg())?;
    }
    Ok(format!("wrote {count} prediction(s) to {}\n", dir.display()))
}

/// Reference predictor used in place of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    ZeroVel,
}

impl FromStr for Baseline {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero_vel" => Ok(Baseline::ZeroVel),
            other => Err(Error::InvalidArgument(format!("unknown baseline `{other}` (supported: zero_vel)"))),
        }
    }
}

/// Held-out windows with multi-modal ground-truth groups.
#[derive(Debug, Clone)]
pub struct EvalSet {
    pub histories: Vec<Array2<f64>>,
    pub futures: Vec<Array2<f64>>,
    pub groups: Vec<Vec<usize>>,
}

/// Test windows from the held-out corpus, `eval.windows` of them evenly
/// spaced (all when 0).
pub fn eval_set(cfg: &RunConfig) -> Result<EvalSet> {
    let corpus = load_corpus(cfg)?;
    let all = make_windows(&corpus.test, cfg.data_history, cfg.data_future, cfg.data_stride)?.windows;
    if all.is_empty() {
        return Err(Error::EmptyInput("test windows"));
    }
    let n = if cfg.eval_windows == 0 { all.len() } else { cfg.eval_windows.min(all.len()) };
    let picked: Vec<&Window> = (0..n).map(|i| &all[i * all.len() / n]).collect();
    let histories: Vec<Array2<f64>> = picked.iter().map(|w| w.history.clone()).collect();
    let futures = picked.iter().map(|w| w.future.clone()).collect();
    let groups = mm_groups(&histories, cfg.eval_mm_tau);
    Ok(EvalSet {
        histories,
        futures,
        groups,
    })
}

impl EvalSet {
    pub fn len(&self) -> usize {
        self.histories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histories.is_empty()
    }

    /// Pairs per-window predicted futures with ground truth.
    pub fn prediction_sets(&self, predictions: Vec<Vec<Array2<f64>>>) -> Vec<PredictionSet> {
        predictions
            .into_iter()
            .enumerate()
            .map(|(i, samples)| PredictionSet {
                samples,
                gt: self.futures[i].clone(),
                mm_gt: self.groups[i].iter().map(|&j| self.futures[j].clone()).collect(),
            })
            .collect()
    }
}

/// `count` predicted futures per history; sample `i` of window `w` uses
/// random stream `w * count + i`.
pub fn predict_futures(
    model: &dyn NoisePredictor,
    ctx: &SampleContext,
    schedule: &NoiseSchedule,
    scfg: &SampleConfig,
    histories: &[Array2<f64>],
    count: usize,
    mode: ExecMode,
) -> Result<Vec<Vec<Array2<f64>>>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let flat = map_range(mode, histories.len() * count, |k| -> Result<Array2<f64>> {
        let m = sample_indexed(model, ctx, histories[k / count].view(), schedule, scfg, k)?;
        Ok(m.data.slice(s![ctx.history.., ..]).to_owned())
    });
    let mut out: Vec<Vec<Array2<f64>>> = (0..histories.len()).map(|_| Vec::with_capacity(count)).collect();
    for (k, r) in flat.into_iter().enumerate() {
        out[k / count].push(r?);
    }
    Ok(out)
}

/// Metrics of a model (or a baseline) on `set`.
pub fn evaluate(
    model: Option<(&dyn NoisePredictor, &SampleContext, &NoiseSchedule)>,
    set: &EvalSet,
    scfg: &SampleConfig,
    samples: usize,
    mode: ExecMode,
) -> Result<MetricReport> {
    let preds = match model {
        Some((m, ctx, schedule)) => predict_futures(m, ctx, schedule, scfg, &set.histories, samples, mode)?,
        None => {
            let f = set.futures[0].nrows();
            map_indexed(mode, &set.histories, |_, h| zero_velocity(h.view(), f).map(|z| vec![z]))
                .into_iter()
                .collect::<Result<_>>()?
        }
    };
    MetricReport::evaluate(&set.prediction_sets(preds), scfg.seed, mode)
}

/// Writes `metrics.csv` for the checkpoint, or for the baseline when one is
/// given (no checkpoint needed then).
pub fn cmd_eval(cfg: &RunConfig, checkpoint: Option<&Path>, baseline: Option<Baseline>, mode: ExecMode) -> Result<String> {
    let set = eval_set(cfg)?;
    let scfg = cfg.sample_config();
    let report = match baseline {
        Some(Baseline::ZeroVel) => evaluate(None, &set, &scfg, 1, mode)?,
        None => {
            let path = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| cfg.checkpoint_path());
            let ck = Checkpoint::load(&path)?;
            check_meta(cfg, &ck)?;
            let ctx = SampleContext::from_checkpoint(&ck)?;
            let model = ck.model()?;
            let schedule = build_schedule(ck.meta.schedule, ck.meta.schedule_steps)?;
            evaluate(Some((&model, &ctx, &schedule)), &set, &scfg, cfg.eval_samples, mode)?
        }
    };
    let dir = out_dir(cfg)?;
    write_effective_config(cfg, &dir)?;
    let csv = report.to_csv();
    fs::write(dir.join("metrics.csv"), &csv)?;
    Ok(csv)
}

/// A wavelet manifold as CSV text: a `#` metadata line, a header and one
/// row per manifold row.
pub fn manifold_to_csv(y: ArrayView2<f64>, basis: &str, frames: usize, channels: usize, fps: f64) -> String {
    let mut out = format!("# basis={basis} frames={frames} channels={channels} fps={fps}\nrow");
    for c in 0..y.ncols() {
        let _ = write!(out, ",c{c}");
    }
    out.push('\n');
    for (r, row) in y.outer_iter().enumerate() {
        let _ = write!(out, "{r}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Parsed manifold CSV: matrix, basis name, frames, channels, fps.
pub fn manifold_from_csv(text: &str) -> Result<(Array2<f64>, String, usize, usize, f64)> {
    let mut lines = text.lines();
    let meta = lines
        .next()
        .and_then(|l| l.strip_prefix('#'))
        .ok_or_else(|| Error::Format("manifold CSV must start with a `# basis=... frames=... channels=... fps=...` line".into()))?;
    let (mut basis, mut frames, mut channels, mut fps) = (None, None, None, None);
    for kv in meta.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad manifold metadata `{kv}`")))?;
        let num = |v: &str| v.parse::<usize>().map_err(|_| Error::Format(format!("bad manifold metadata `{kv}`")));
        match k {
            "basis" => basis = Some(v.to_string()),
            "frames" => frames = Some(num(v)?),
            "channels" => channels = Some(num(v)?),
            "fps" => fps = Some(v.parse::<f64>().map_err(|_| Error::Format(format!("bad manifold metadata `{kv}`")))?),
            _ => return Err(Error::Format(format!("unknown manifold metadata key `{k}`"))),
        }
    }
    let missing = |what: &str| Error::Format(format!("manifold metadata lacks `{what}`"));
    let basis = basis.ok_or_else(|| missing("basis"))?;
    let frames = frames.ok_or_else(|| missing("frames"))?;
    let channels = channels.ok_or_else(|| missing("channels"))?;
    let fps = fps.ok_or_else(|| missing("fps"))?;

    let rest: String = lines.collect::<Vec<_>>().join("\n");
    let mut rdr = csv::Reader::from_reader(rest.as_bytes());
    let cols = rdr.headers()?.len().saturating_sub(1);
    let mut data = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != cols + 1 {
            return Err(Error::Format(format!("manifold row {rows} has {} fields, expected {}", rec.len(), cols + 1)));
        }
        for f in rec.iter().skip(1) {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("manifold row {rows}: `{f}` is not a number")))?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("manifold row {rows}")));
            }
            data.push(v);
        }
        rows += 1;
    }
    let y = Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Format(e.to_string()))?;
    Ok((y, basis, frames, channels, fps))
}

/// Encodes a motion file into a manifold CSV.
pub fn cmd_encode(input: &Path, output: &Path, basis: &str) -> Result<String> {
    let b = make_basis(basis)?;
    let m = load_motion(input)?;
    let y = encode_matrix(m.data.view(), &b)?;
    fs::write(output, manifold_to_csv(y.view(), basis, m.frames(), m.channels(), m.fps))?;
    Ok(format!("{} × {} manifold written to {}\n", y.nrows(), y.ncols(), output.display()))
}

/// Decodes a manifold CSV back to a motion file.
pub fn cmd_decode(input: &Path, output: &Path) -> Result<String> {
    let (y, basis, frames, channels, fps) = manifold_from_csv(&fs::read_to_string(input)?)?;
    let b = make_basis(&basis)?;
    let x = decode_matrix(y.view(), (frames, channels), &b)?;
    save_motion(output, &MotionSequence::new(x, fps)?)?;
    Ok(format!("{frames} × {channels} motion written to {}\n", output.display()))
}

fn rmse_of(a: &Array2<f64>, b: &Array2<f64>) -> (f64, usize) {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (sq, a.len())
}

fn diff(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    if n < 2 {
        return Array2::zeros((0, x.ncols()));
    }
    &x.slice(s![1.., ..]) - &x.slice(s![..n - 1, ..])
}

/// Per-basis position, velocity and acceleration roundtrip RMSE.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisRow {
    pub basis: String,
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

/// Roundtrip errors of every supported basis over `motions`.
pub fn ablate_bases(motions: &[MotionSequence], mode: ExecMode) -> Result<Vec<BasisRow>> {
    if motions.is_empty() {
        return Err(Error::EmptyInput("motion corpus"));
    }
    map_indexed(mode, &supported_bases(), |_, name| -> Result<BasisRow> {
        let b = make_basis(name)?;
        let mut acc = [(0.0, 0usize); 3];
        for m in motions {
            let y = encode_matrix(m.data.view(), &b)?;
            let x = decode_matrix(y.view(), m.data.dim(), &b)?;
            let (v0, v1) = (diff(&m.data), diff(&x));
            let parts = [rmse_of(&x, &m.data), rmse_of(&v1, &v0), rmse_of(&diff(&v1), &diff(&v0))];
            for (a, p) in acc.iter_mut().zip(parts) {
                a.0 += p.0;
                a.1 += p.1;
            }
        }
        let r = |(sq, n): (f64, usize)| if n == 0 { 0.0 } else { (sq / n as f64).sqrt() };
        Ok(BasisRow {
            basis: name.to_string(),
            position: r(acc[0]),
            velocity: r(acc[1]),
            acceleration: r(acc[2]),
        })
    })
    .into_iter()
    .collect()
}

/// Writes `ablate_bases.csv` over the training corpus.
pub fn cmd_ablate_bases(cfg: &RunConfig, mode: ExecMode) -> Result<String> {
    let corpus = load_corpus(cfg)?;
    let rows = ablate_bases(&corpus.train, mode)?;
    let mut csv = String::from("basis,position_rmse,velocity_rmse,acceleration_rmse\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{:e},{:e},{:e}", r.basis, r.position, r.velocity, r.acceleration);
    }
    let dir = out_dir(cfg)?;
    write_effective_config(cfg, &dir)?;
    fs::write(dir.join("ablate_bases.csv"), &csv)?;
    Ok(csv)
}

/// One sampler setting of the guidance sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidancePoint {
    pub s: f64,
    pub sigma: f64,
    pub wmsg: bool,
    pub w: f64,
}

/// The (s, σ, WMSG) grid at the configured `w`: both guidances off with
/// and without WMSG, then every `s × σ` pair with WMSG, then a `w` sweep at
/// the configured `s` and `σ`.
pub fn guidance_grid(base: &SampleConfig, s_values: &[f64], sigma_values: &[f64], w_values: &[f64]) -> Vec<GuidancePoint> {
    let mut g = vec![
        GuidancePoint { s: 0.0, sigma: 0.0, wmsg: false, w: base.w },
        GuidancePoint { s: 0.0, sigma: 0.0, wmsg: true, w: base.w },
    ];
    for &s in s_values {
        for &sigma in sigma_values {
            g.push(GuidancePoint { s, sigma, wmsg: true, w: base.w });
        }
    }
    for &w in w_values {
        g.push(GuidancePoint {
            s: base.s,
            sigma: base.sigma,
            wmsg: base.wmsg_enabled,
            w,
        });
    }
    g
}

/// Parses `0.5,1,1.5`.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| f64::from_str(p).map_err(|_| Error::InvalidArgument(format!("bad number `{p}`"))))
        .collect()
}

/// Evaluates the checkpoint at every grid point; writes `ablate_guidance.csv`.
pub fn cmd_ablate_guidance(cfg: &RunConfig, checkpoint: Option<&Path>, grid: &[GuidancePoint], mode: ExecMode) -> Result<String> {
    let path = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| cfg.checkpoint_path());
    let ck = Checkpoint::load(&path)?;
    check_meta(cfg, &ck)?;
    let ctx = SampleContext::from_checkpoint(&ck)?;
    let model = ck.model()?;
    let schedule = build_schedule(ck.meta.schedule, ck.meta.schedule_steps)?;
    let set = eval_set(cfg)?;
    let mut csv = String::from("s,sigma,wmsg,w,apd,ade,fde,mmade,mmfde\n");
    for p in grid {
        let scfg = SampleConfig {
            s: p.s,
            sigma: p.sigma,
            wmsg_enabled: p.wmsg,
            w: p.w,
            ..cfg.sample_config()
        };
        let r = evaluate(Some((&model, &ctx, &schedule)), &set, &scfg, cfg.eval_samples, mode)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            p.s, p.sigma, p.wmsg, p.w, r.apd, r.ade, r.fde, r.mmade, r.mmfde
        );
    }
    let dir = out_dir(cfg)?;
    write_effective_config(cfg, &dir)?;
    fs::write(dir.join("ablate_guidance.csv"), &csv)?;
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RunConfig {
        let mut c = RunConfig::default();
        for kv in [
            "data.joints=2",
            "data.history=4",
            "data.future=8",
            "data.frames=20",
            "data.stride=4",
            "data.train_sequences=3",
            "data.test_sequences=2",
            "model.basis=haar",
            "model.blocks=1",
            "model.latent_dim=8",
            "model.heads=2",
            "model.ff_dim=8",
            "model.batch_size=4",
            "model.epochs=1",
            "schedule.steps=20",
            "sample.ddim_steps=4",
            "sample.tabg_window=4",
            "sample.control_window=4",
            "eval.samples=2",
        ] {
            c.apply_override(kv).unwrap();
        }
        c
    }

    #[test]
    fn corpus_split_and_windows() {
        let c = tiny();
        let corpus = load_corpus(&c).unwrap();
        assert_eq!((corpus.train.len(), corpus.test.len()), (3, 2));
        let set = eval_set(&c).unwrap();
        assert_eq!(set.len(), 2 * ((20 - 12) / 4 + 1));
        for (i, g) in set.groups.iter().enumerate() {
            assert!(g.contains(&i));
        }
    }

    #[test]
    fn training_is_reproducible_and_resumable() {
        let mut c = tiny();
        let a = train_model(&c, None, ExecMode::Sequential).unwrap();
        let b = train_model(&c, None, ExecMode::Parallel).unwrap();
        assert_eq!(a.checkpoint, b.checkpoint);
        assert_eq!(a.checkpoint.step, a.losses.len() as u64);
        c.model_epochs = 0;
        let fresh = train_model(&c, None, ExecMode::Sequential).unwrap();
        assert_eq!(fresh.checkpoint.step, 0);
        assert_eq!(fresh.checkpoint.ema, fresh.checkpoint.state.as_ref().unwrap().params);
        c.model_epochs = 1;
        let resumed = train_model(&c, Some(a.checkpoint.clone()), ExecMode::Sequential).unwrap();
        assert_eq!(resumed.checkpoint.step, 2 * a.checkpoint.step);
        let mut other = c.clone();
        other.model_latent_dim = 4;
        assert!(train_model(&other, Some(a.checkpoint), ExecMode::Sequential).is_err());
    }

    #[test]
    fn controls_and_parsers() {
        assert_eq!(parse_joint_list("0, 2").unwrap(), vec![0, 2]);
        assert!(parse_joint_list("a").is_err());
        assert_eq!(parse_frame_range("3..5").unwrap(), (3, 5));
        assert_eq!(parse_frame_range("3..=5").unwrap(), (3, 5));
        assert!(parse_frame_range("3-5").is_err());
        let spec = ControlSpec {
            joints: vec![1],
            frames: Some((0, 1)),
        };
        let m = spec.mask(4, 6).unwrap();
        assert_eq!(m.sum(), (2 * 6 + 2 * 3) as f64);
        assert_eq!(parse_f64_list("0.5, 1").unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn manifold_csv_roundtrip() {
        let y = Array2::from_shape_fn((3, 4), |(i, j)| i as f64 * 0.1 - j as f64 / 3.0);
        let text = manifold_to_csv(y.view(), "db2", 5, 6, 25.0);
        let (back, basis, f, c, fps) = manifold_from_csv(&text).unwrap();
        assert_eq!(back, y);
        assert_eq!((basis.as_str(), f, c, fps), ("db2", 5, 6, 25.0));
        assert!(manifold_from_csv("row,c0\n0,1\n").is_err());
    }

    #[test]
    fn zero_velocity_baseline_is_nonzero_on_sine_walk() {
        let c = tiny();
        let set = eval_set(&c).unwrap();
        let r = evaluate(None, &set, &c.sample_config(), 1, ExecMode::Sequential).unwrap();
        assert!(r.ade > 0.0 && r.fde > 0.0);
        assert_eq!(r.apd, 0.0);
    }

    #[test]
    fn guidance_grid_covers_table_and_w_sweep() {
        let g = guidance_grid(&SampleConfig::default(), &[0.5, 1.0, 1.5], &[0.5, 1.5, 2.5], &[0.5, 1.0]);
        assert_eq!(g.len(), 2 + 9 + 2);
        assert!(!g[0].wmsg && g[1].wmsg);
    }
}
