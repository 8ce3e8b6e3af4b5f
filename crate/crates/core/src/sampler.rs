//! Guided DDIM sampling on wavelet manifolds.
//!
//! One reverse step at DDIM timestep `t` (previous timestep `p`, ᾱ_0 = 1):
//!
//! ```text
//! ε_u, A  = ε_θ(y, t)                       unconditional, with attention
//! ε̃       = TABG(ε_u)                       first `tabg_window` steps, s ≠ 0
//! ε̂       = ε̃ + w (ε_θ(y, cond, t) − ε̃)     conditional pass skipped when w = 0
//! x̂0      = (y − √(1−ᾱ_t) ε̂) / √ᾱ_t
//! y       = √ᾱ_p x̂0 + √(1−ᾱ_p) ε̂            deterministic (η = 0)
//! y       = DWT(iDWT(y))                    when WMSG is enabled
//! ```
//!
//! Everything runs on normalized motion. Random draws for a run come from
//! one ChaCha8 stream selected by `(seed, sample index)`, consumed in this
//! order: the initial manifold, then per step the TABG noise `z` (only on
//! steps where TABG runs) followed by the ground-truth noise of controlled
//! sampling (only on steps where control runs).

use ndarray::{s, Array2, ArrayView2, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::denoiser::checkpoint::Checkpoint;
use crate::denoiser::{AttentionRecord, NoisePredictor};
use crate::error::{shape_err, Error, Result};
use crate::exec::{map_range, ExecMode};
use crate::manifold::{decode_matrix, encode_matrix, manifold_shape, pad_history, MotionSequence, NormStats};
use crate::schedule::NoiseSchedule;
use crate::wavelet::{make_basis, WaveletBasis};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub ddim_steps: usize,
    pub w: f64,
    pub s: f64,
    pub sigma: f64,
    pub phi_quantile: f64,
    pub m: usize,
    pub tabg_window: usize,
    pub wmsg_enabled: bool,
    /// Number of initial steps on which controlled sampling blends in the
    /// ground truth.
    pub control_window: usize,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            ddim_steps: 100,
            w: 1.5,
            s: 1.0,
            sigma: 2.5,
            phi_quantile: 0.8,
            m: 3,
            tabg_window: 90,
            wmsg_enabled: true,
            control_window: 90,
            seed: 0,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ddim_steps == 0 {
            return Err(Error::InvalidArgument("ddim_steps must be >= 1".into()));
        }
        if self.m == 0 || self.m.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("mask width m must be odd and >= 1, got {}", self.m)));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidArgument("sigma must be >= 0".into()));
        }
        if !(self.phi_quantile > 0.0 && self.phi_quantile < 1.0) {
            return Err(Error::InvalidArgument("phi_quantile must lie in (0, 1)".into()));
        }
        if !self.w.is_finite() || !self.s.is_finite() {
            return Err(Error::InvalidArgument("guidance scales must be finite".into()));
        }
        Ok(())
    }
}

/// Shapes and preprocessing shared by every sampling run of one model.
#[derive(Debug, Clone)]
pub struct SampleContext {
    pub basis: WaveletBasis,
    /// H + F.
    pub frames: usize,
    pub history: usize,
    pub norm: NormStats,
    pub fps: f64,
}

impl SampleContext {
    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let ctx = Self {
            basis: make_basis(&ck.meta.basis)?,
            frames: ck.meta.frames,
            history: ck.meta.history,
            norm: ck.norm.clone(),
            fps: ck.meta.fps,
        };
        if ctx.manifold_shape() != (ck.config.seq_len, ck.config.feature_dim) {
            return Err(shape_err(format!(
                "checkpoint manifold {:?} does not match {} frames × {} channels under {}",
                (ck.config.seq_len, ck.config.feature_dim),
                ctx.frames,
                ctx.channels(),
                ctx.basis.name
            )));
        }
        Ok(ctx)
    }

    pub fn channels(&self) -> usize {
        self.norm.channels()
    }

    pub fn manifold_shape(&self) -> (usize, usize) {
        manifold_shape(self.frames, self.channels(), &self.basis)
    }

    fn check(&self, model: &dyn NoisePredictor, history: &ArrayView2<f64>) -> Result<()> {
        if model.manifold_shape() != self.manifold_shape() {
            return Err(shape_err(format!(
                "model manifold {:?} differs from context manifold {:?}",
                model.manifold_shape(),
                self.manifold_shape()
            )));
        }
        if history.dim() != (self.history, self.channels()) {
            return Err(shape_err(format!(
                "history is {:?}, model expects {:?}",
                history.dim(),
                (self.history, self.channels())
            )));
        }
        Ok(())
    }
}

/// Random stream for sample `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn gaussian(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> Array2<f64> {
    Array2::from_shape_fn(shape, |_| StandardNormal.sample(rng))
}

fn same_shape(a: &ArrayView2<f64>, b: &ArrayView2<f64>, what: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(shape_err(format!("{what}: {:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `(y_t − √(1−ᾱ_t)·eps + σ·z) / √ᾱ_t`.
pub fn estimate_x0(
    y_t: ArrayView2<f64>,
    eps: ArrayView2<f64>,
    t: usize,
    schedule: &NoiseSchedule,
    sigma: f64,
    z: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    schedule.check_t(t)?;
    same_shape(&y_t, &eps, "estimate_x0 noise")?;
    same_shape(&y_t, &z, "estimate_x0 perturbation")?;
    let ab = schedule.alpha_bar_at(t);
    let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
    let mut out = Array2::zeros(y_t.dim());
    Zip::from(&mut out)
        .and(&y_t)
        .and(&eps)
        .and(&z)
        .for_each(|o, &y, &e, &zz| *o = (y - b * e + sigma * zz) / a);
    Ok(out)
}

/// Binary K × `d4` mask with rows within `(m−1)/2` of every `i` where
/// `importance[i] > phi`.
pub fn build_attention_mask(importance: &[f64], phi: f64, m: usize, k: usize, d4: usize) -> Result<Array2<f64>> {
    if m == 0 || m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("mask width m must be odd, got {m}")));
    }
    if importance.len() != k {
        return Err(shape_err(format!("importance has {} entries, expected {k}", importance.len())));
    }
    let half = (m - 1) / 2;
    let mut mask = Array2::zeros((k, d4));
    for (i, &a) in importance.iter().enumerate() {
        if a > phi {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(k - 1);
            mask.slice_mut(s![lo..=hi, ..]).fill(1.0);
        }
    }
    Ok(mask)
}

/// Layer-averaged attention summed over its first axis: entry `j` is the
/// total attention frame `j` receives.
pub fn aggregate_attention(attn: &AttentionRecord) -> Result<Vec<f64>> {
    let first = attn.per_layer.first().ok_or(Error::EmptyInput("attention record"))?;
    let mut avg = first.clone();
    for a in &attn.per_layer[1..] {
        if a.dim() != avg.dim() {
            return Err(shape_err("attention layers differ in shape"));
        }
        avg += a;
    }
    avg /= attn.per_layer.len() as f64;
    Ok(avg.sum_axis(ndarray::Axis(0)).to_vec())
}

/// Linear-interpolated quantile (`q ∈ [0, 1]`) of a non-empty slice.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// `ε_u + s·(ε_θ(ŷ, t) − ε_u)` with `ŷ = (1−M)⊙y_t + M⊙ỹ_t`.
pub fn tabg_epsilon(
    model: &dyn NoisePredictor,
    y_t: ArrayView2<f64>,
    t: usize,
    eps_uncond: ArrayView2<f64>,
    mask: ArrayView2<f64>,
    y_tilde_t: ArrayView2<f64>,
    s: f64,
) -> Result<Array2<f64>> {
    same_shape(&y_t, &eps_uncond, "tabg noise")?;
    same_shape(&y_t, &mask, "tabg mask")?;
    same_shape(&y_t, &y_tilde_t, "tabg perturbed manifold")?;
    if s == 0.0 {
        return Ok(eps_uncond.to_owned());
    }
    let mut blended = Array2::zeros(y_t.dim());
    Zip::from(&mut blended)
        .and(&y_t)
        .and(&mask)
        .and(&y_tilde_t)
        .for_each(|o, &y, &m, &yt| *o = (1.0 - m) * y + m * yt);
    let (eps_hat, _) = model.predict(blended.view(), t, None)?;
    let mut out = Array2::zeros(y_t.dim());
    Zip::from(&mut out)
        .and(&eps_uncond)
        .and(&eps_hat)
        .for_each(|o, &u, &h| *o = u + s * (h - u));
    Ok(out)
}

/// `ε̃ + w·(ε_cond − ε̃)`, evaluated as `(1−w)·ε̃ + w·ε_cond` so both
/// endpoints are exact.
pub fn cfg_combine(eps_tilde: ArrayView2<f64>, eps_cond: ArrayView2<f64>, w: f64) -> Result<Array2<f64>> {
    same_shape(&eps_tilde, &eps_cond, "cfg_combine")?;
    let mut out = Array2::zeros(eps_tilde.dim());
    Zip::from(&mut out)
        .and(&eps_tilde)
        .and(&eps_cond)
        .for_each(|o, &u, &c| *o = (1.0 - w) * u + w * c);
    Ok(out)
}

/// Projection `DWT(iDWT(y))` back onto the set of exact manifolds.
pub fn wmsg(y: ArrayView2<f64>, basis: &WaveletBasis, original_shape: (usize, usize)) -> Result<Array2<f64>> {
    let x = decode_matrix(y, original_shape, basis)?;
    encode_matrix(x.view(), basis)
}

/// Ground truth and mask for controlled sampling, in normalized space.
struct Control {
    gt_manifold: Array2<f64>,
    mask: Array2<f64>,
}

fn check_finite(y: &Array2<f64>, step: usize, t: usize) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("sampler state at DDIM step {step} (t = {t})")))
    }
}

fn run(
    model: &dyn NoisePredictor,
    ctx: &SampleContext,
    history: ArrayView2<f64>,
    schedule: &NoiseSchedule,
    cfg: &SampleConfig,
    control: Option<&Control>,
    index: usize,
) -> Result<MotionSequence> {
    let shape = ctx.manifold_shape();
    let orig = (ctx.frames, ctx.channels());
    let mut rng = stream_rng(cfg.seed, index);

    let hist_n = ctx.norm.normalize(history);
    let padded = pad_history(hist_n.view(), ctx.frames, ctx.fps)?;
    let cond = encode_matrix(padded.data.view(), &ctx.basis)?;

    let mut y = gaussian(&mut rng, shape);
    let ts = schedule.ddim_timesteps(cfg.ddim_steps)?;
    for (i, &t) in ts.iter().enumerate() {
        let prev = ts.get(i + 1).copied().unwrap_or(0);
        let ab = schedule.alpha_bar_at(t);
        let ab_prev = schedule.alpha_bar_at(prev);

        let (eps_u, attn) = model.predict(y.view(), t, None)?;
        let eps_tilde = if i < cfg.tabg_window && cfg.s != 0.0 {
            let z = gaussian(&mut rng, shape);
            let importance = aggregate_attention(&attn)?;
            let phi = quantile(&importance, cfg.phi_quantile);
            let mask = build_attention_mask(&importance, phi, cfg.m, shape.0, shape.1)?;
            let y0_tilde = estimate_x0(y.view(), eps_u.view(), t, schedule, cfg.sigma, z.view())?;
            let y_tilde = ab.sqrt() * &y0_tilde + (1.0 - ab).sqrt() * &z;
            tabg_epsilon(model, y.view(), t, eps_u.view(), mask.view(), y_tilde.view(), cfg.s)?
        } else {
            eps_u
        };
        let eps_hat = if cfg.w != 0.0 {
            let (eps_c, _) = model.predict(y.view(), t, Some(cond.view()))?;
            cfg_combine(eps_tilde.view(), eps_c.view(), cfg.w)?
        } else {
            eps_tilde
        };

        let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
        let (ap, bp) = (ab_prev.sqrt(), (1.0 - ab_prev).sqrt());
        let mut next = Array2::zeros(shape);
        Zip::from(&mut next)
            .and(&y)
            .and(&eps_hat)
            .for_each(|o, &yv, &e| *o = ap * ((yv - b * e) / a) + bp * e);

        y = match control {
            Some(c) if i < cfg.control_window => {
                let x = decode_matrix(next.view(), orig, &ctx.basis)?;
                let zg = gaussian(&mut rng, shape);
                let y_gt = ap * &c.gt_manifold + bp * &zg;
                let x_gt = decode_matrix(y_gt.view(), orig, &ctx.basis)?;
                let mut blended = Array2::zeros(orig);
                Zip::from(&mut blended)
                    .and(&x)
                    .and(&c.mask)
                    .and(&x_gt)
                    .for_each(|o, &xv, &m, &g| *o = (1.0 - m) * xv + m * g);
                encode_matrix(blended.view(), &ctx.basis)?
            }
            _ if cfg.wmsg_enabled => wmsg(next.view(), &ctx.basis, orig)?,
            _ => next,
        };
        check_finite(&y, i, t)?;
    }

    let x_n = decode_matrix(y.view(), orig, &ctx.basis)?;
    let mut x = ctx.norm.denormalize(x_n.view());
    x.slice_mut(s![..ctx.history, ..]).assign(&history);
    MotionSequence::new(x, ctx.fps)
}

/// One predicted (H + F)-frame motion whose first H rows are `history`.
pub fn sample(
    model: &dyn NoisePredictor,
    ctx: &SampleContext,
    history: ArrayView2<f64>,
    schedule: &NoiseSchedule,
    config: &SampleConfig,
) -> Result<MotionSequence> {
    sample_indexed(model, ctx, history, schedule, config, 0)
}

/// `sample` on random stream `index`.
pub fn sample_indexed(
    model: &dyn NoisePredictor,
    ctx: &SampleContext,
    history: ArrayView2<f64>,
    schedule: &NoiseSchedule,
    config: &SampleConfig,
    index: usize,
) -> Result<MotionSequence> {
    config.validate()?;
    ctx.check(model, &history)?;
    run(model, ctx, history, schedule, config, None, index)
}

/// `count` independent predictions for one history, sample `i` on stream `i`.
pub fn sample_many(
    model: &dyn NoisePredictor,
    ctx: &SampleContext,
    history: ArrayView2<f64>,
    schedule: &NoiseSchedule,
    config: &SampleConfig,
    count: usize,
    mode: ExecMode,
) -> Result<Vec<MotionSequence>> {
    config.validate()?;
    ctx.check(model, &history)?;
    map_range(mode, count, |i| run(model, ctx, history, schedule, config, None, i))
        .into_iter()
        .collect()
}

/// Sampling where masked entries of the motion track `gt_motion`.
///
/// On each of the first `control_window` steps the decoded state is blended
/// with the decoded, re-noised ground truth before re-encoding; outside that
/// window steps behave as in [`sample`]. An all-zero mask reproduces
/// [`sample`] exactly.
#[allow(clippy::too_many_arguments)]
pub fn controlled_sample(
    model: &dyn NoisePredictor,
    ctx: &SampleContext,
    history: ArrayView2<f64>,
    gt_motion: ArrayView2<f64>,
    mask: ArrayView2<f64>,
    schedule: &NoiseSchedule,
    config: &SampleConfig,
    index: usize,
) -> Result<MotionSequence> {
    config.validate()?;
    ctx.check(model, &history)?;
    let orig = (ctx.frames, ctx.channels());
    if gt_motion.dim() != orig {
        return Err(shape_err(format!("ground truth is {:?}, expected {:?}", gt_motion.dim(), orig)));
    }
    if mask.dim() != orig {
        return Err(shape_err(format!("control mask is {:?}, expected {:?}", mask.dim(), orig)));
    }
    if mask.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::InvalidArgument("control mask must be binary".into()));
    }
    if mask.iter().all(|v| *v == 0.0) {
        return run(model, ctx, history, schedule, config, None, index);
    }
    let gt_n = ctx.norm.normalize(gt_motion);
    let control = Control {
        gt_manifold: encode_matrix(gt_n.view(), &ctx.basis)?,
        mask: mask.to_owned(),
    };
    run(model, ctx, history, schedule, config, Some(&control), index)
}

/// Mask with every channel of the listed joints set.
pub fn joint_mask(frames: usize, channels: usize, joints: &[usize]) -> Result<Array2<f64>> {
    let mut m = Array2::zeros((frames, channels));
    for &j in joints {
        if 3 * j + 3 > channels {
            return Err(Error::InvalidArgument(format!("joint {j} out of range for {} joints", channels / 3)));
        }
        m.slice_mut(s![.., 3 * j..3 * j + 3]).fill(1.0);
    }
    Ok(m)
}

/// Mask with every channel of frames `lo..=hi` set.
pub fn frame_mask(frames: usize, channels: usize, lo: usize, hi: usize) -> Result<Array2<f64>> {
    if lo > hi || hi >= frames {
        return Err(Error::InvalidArgument(format!("frame range {lo}..{hi} outside 0..{}", frames.saturating_sub(1))));
    }
    let mut m = Array2::zeros((frames, channels));
    m.slice_mut(s![lo..=hi, ..]).fill(1.0);
    Ok(m)
}
