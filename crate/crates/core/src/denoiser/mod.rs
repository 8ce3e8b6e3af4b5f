//! Attention-based noise predictor over wavelet manifolds.
//!
//! Layout of one forward pass (pre-norm residual blocks):
//!
//! ```text
//! h   = y W_in + b_in + P + (τ(t) W_t + b_t) + c
//!       c = cond W_c + b_c, or the learned null token when unconditioned
//! blk = h += MHA(LN(h))            temporal self-attention over the K rows
//!       h += W2 silu(W1 LN(h))     position-wise feature mixing
//! F   = h W_out + b_out
//! ε̂   = √(1 − ᾱ_t) y + ᾱ_t F − √(ᾱ_t (1 − ᾱ_t)) (g ⊙ cond)
//! ```
//!
//! The head mixes the input back in with the training schedule's ᾱ_t, so
//! ε̂ tends to y as ᾱ_t vanishes. The implied clean estimate is
//! √ᾱ_t y − √(ᾱ_t (1 − ᾱ_t)) F + (1 − ᾱ_t) g ⊙ cond, so at high
//! noise it starts from the gated condition. The gate g is learned, starts
//! at zero and only sees gradient from conditioned passes. The loss is still
//! plain noise regression.
//!
//! All parameters live in one flat vector addressed through [`Layout`], so
//! gradients, optimiser moments, EMA copies and checkpoints share a single
//! indexing scheme. The backward pass is written by hand and checked against
//! central finite differences in [`gradcheck`].

pub mod checkpoint;
pub mod gradcheck;

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis, LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{shape_err, Error, Result};
use crate::schedule::{build_schedule, ScheduleKind};

/// Floating point element type of a model (f32 for training, f64 for checks).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + LinalgScalar
    + ScalarOperand
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + std::iter::Sum
    + Send
    + Sync
    + Debug
    + Display
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + LinalgScalar
        + ScalarOperand
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + std::iter::Sum
        + Send
        + Sync
        + Debug
        + Display
        + 'static
{
}

#[inline]
pub(crate) fn cst<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("representable constant")
}

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserConfig {
    pub blocks: usize,
    pub latent_dim: usize,
    pub heads: usize,
    pub ff_dim: usize,
    /// 4D, the manifold feature width.
    pub feature_dim: usize,
    /// K, the manifold length.
    pub seq_len: usize,
    /// Largest accepted timestep (T of the training schedule).
    pub max_timestep: usize,
    /// Kind of the training schedule; with `max_timestep` it fixes ᾱ_t.
    pub schedule: ScheduleKind,
    pub cond_drop_prob: f64,
}

impl DenoiserConfig {
    /// Toy defaults for a manifold of `seq_len × feature_dim`.
    pub fn toy(seq_len: usize, feature_dim: usize) -> Self {
        Self {
            blocks: 4,
            latent_dim: 64,
            heads: 8,
            ff_dim: 128,
            feature_dim,
            seq_len,
            max_timestep: 1000,
            schedule: ScheduleKind::Cosine,
            cond_drop_prob: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("blocks", self.blocks),
            ("latent_dim", self.latent_dim),
            ("heads", self.heads),
            ("ff_dim", self.ff_dim),
            ("feature_dim", self.feature_dim),
            ("seq_len", self.seq_len),
            ("max_timestep", self.max_timestep),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("denoiser {name} must be >= 1")));
            }
        }
        if !self.latent_dim.is_multiple_of(self.heads) {
            return Err(Error::InvalidArgument(format!(
                "latent_dim {} is not divisible by {} heads",
                self.latent_dim, self.heads
            )));
        }
        if !(0.0..=1.0).contains(&self.cond_drop_prob) {
            return Err(Error::InvalidArgument("cond_drop_prob must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Indices of the two middle blocks whose attention is recorded.
    pub fn recorded_blocks(&self) -> Vec<usize> {
        let mid = self.blocks / 2;
        if mid == 0 {
            vec![0]
        } else {
            vec![mid - 1, mid]
        }
    }
}

/// A `rows × cols` region of the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub off: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Slot {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.off..self.off + self.len()
    }

    fn mat<'a, T>(&self, p: &'a [T]) -> ArrayView2<'a, T> {
        ArrayView2::from_shape((self.rows, self.cols), &p[self.range()]).expect("slot shape")
    }

    fn vec<'a, T>(&self, p: &'a [T]) -> ArrayView1<'a, T> {
        ArrayView1::from(&p[self.range()])
    }

    fn mat_mut<'a, T>(&self, p: &'a mut [T]) -> ArrayViewMut2<'a, T> {
        ArrayViewMut2::from_shape((self.rows, self.cols), &mut p[self.range()]).expect("slot shape")
    }

    fn vec_mut<'a, T>(&self, p: &'a mut [T]) -> ArrayViewMut1<'a, T> {
        ArrayViewMut1::from(&mut p[self.range()])
    }
}

#[derive(Debug, Clone)]
struct BlockSlots {
    ln1_g: Slot,
    ln1_b: Slot,
    wq: Slot,
    wk: Slot,
    wv: Slot,
    wo: Slot,
    bo: Slot,
    ln2_g: Slot,
    ln2_b: Slot,
    w1: Slot,
    b1: Slot,
    w2: Slot,
    b2: Slot,
}

/// Named parameter slots in declaration order.
#[derive(Debug, Clone)]
pub struct Layout {
    w_in: Slot,
    b_in: Slot,
    w_cond: Slot,
    b_cond: Slot,
    null_cond: Slot,
    w_time: Slot,
    b_time: Slot,
    pos: Slot,
    blocks: Vec<BlockSlots>,
    w_out: Slot,
    b_out: Slot,
    cond_gate: Slot,
    entries: Vec<(String, Slot)>,
    total: usize,
}

#[derive(Default)]
struct LayoutBuilder {
    entries: Vec<(String, Slot)>,
    total: usize,
}

impl LayoutBuilder {
    fn add(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> Slot {
        let slot = Slot {
            off: self.total,
            rows,
            cols,
        };
        self.total += slot.len();
        self.entries.push((name.into(), slot));
        slot
    }
}

impl Layout {
    pub fn new(cfg: &DenoiserConfig) -> Self {
        let (f, l, k, ff) = (cfg.feature_dim, cfg.latent_dim, cfg.seq_len, cfg.ff_dim);
        let mut b = LayoutBuilder::default();
        let w_in = b.add("input.weight", f, l);
        let b_in = b.add("input.bias", 1, l);
        let w_cond = b.add("cond.weight", f, l);
        let b_cond = b.add("cond.bias", 1, l);
        let null_cond = b.add("cond.null", 1, l);
        let w_time = b.add("time.weight", l, l);
        let b_time = b.add("time.bias", 1, l);
        let pos = b.add("position", k, l);
        let blocks = (0..cfg.blocks)
            .map(|i| BlockSlots {
                ln1_g: b.add(format!("block{i}.ln1.gain"), 1, l),
                ln1_b: b.add(format!("block{i}.ln1.bias"), 1, l),
                wq: b.add(format!("block{i}.attn.q"), l, l),
                wk: b.add(format!("block{i}.attn.k"), l, l),
                wv: b.add(format!("block{i}.attn.v"), l, l),
                wo: b.add(format!("block{i}.attn.out"), l, l),
                bo: b.add(format!("block{i}.attn.out_bias"), 1, l),
                ln2_g: b.add(format!("block{i}.ln2.gain"), 1, l),
                ln2_b: b.add(format!("block{i}.ln2.bias"), 1, l),
                w1: b.add(format!("block{i}.mix.w1"), l, ff),
                b1: b.add(format!("block{i}.mix.b1"), 1, ff),
                w2: b.add(format!("block{i}.mix.w2"), ff, l),
                b2: b.add(format!("block{i}.mix.b2"), 1, l),
            })
            .collect();
        let w_out = b.add("output.weight", l, f);
        let b_out = b.add("output.bias", 1, f);
        let cond_gate = b.add("cond.gate", 1, f);
        Layout {
            w_in,
            b_in,
            w_cond,
            b_cond,
            null_cond,
            w_time,
            b_time,
            pos,
            blocks,
            w_out,
            b_out,
            cond_gate,
            entries: b.entries,
            total: b.total,
        }
    }

    pub fn num_params(&self) -> usize {
        self.total
    }

    pub fn entries(&self) -> &[(String, Slot)] {
        &self.entries
    }

    pub fn slot(&self, name: &str) -> Option<Slot> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    /// Slots of the condition projection (used when a condition is given).
    pub fn cond_slots(&self) -> [Slot; 3] {
        [self.w_cond, self.b_cond, self.cond_gate]
    }
}

/// Head-averaged K × K attention matrices of the recorded blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttentionRecord {
    pub per_layer: Vec<Array2<f64>>,
}

#[derive(Debug, Clone)]
pub struct Denoiser<T: Scalar> {
    pub config: DenoiserConfig,
    pub layout: Layout,
    pub params: Vec<T>,
    alpha_bar: Vec<f64>,
}

struct LnCache<T> {
    xhat: Array2<T>,
    rstd: Array1<T>,
}

struct BlockCache<T> {
    x1: Array2<T>,
    ln1: LnCache<T>,
    q: Array2<T>,
    k: Array2<T>,
    v: Array2<T>,
    attn: Vec<Array2<T>>,
    o: Array2<T>,
    x2: Array2<T>,
    ln2: LnCache<T>,
    u: Array2<T>,
    act: Array2<T>,
}

struct Cache<T> {
    temb: Array1<T>,
    blocks: Vec<BlockCache<T>>,
    h: Array2<T>,
    mix: T,
    gate_mix: T,
}

fn layer_norm<T: Scalar>(x: &Array2<T>, g: ArrayView1<T>, b: ArrayView1<T>) -> (Array2<T>, LnCache<T>) {
    let (rows, cols) = x.dim();
    let n = cst::<T>(cols as f64);
    let eps = cst::<T>(LN_EPS);
    let mut xhat = Array2::zeros((rows, cols));
    let mut rstd = Array1::zeros(rows);
    for i in 0..rows {
        let row = x.row(i);
        let mean = row.sum() / n;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        let r = T::one() / (var + eps).sqrt();
        rstd[i] = r;
        for (o, &v) in xhat.row_mut(i).iter_mut().zip(row.iter()) {
            *o = (v - mean) * r;
        }
    }
    let y = &xhat * &g + b;
    (y, LnCache { xhat, rstd })
}

/// Returns dx and accumulates gain/bias gradients.
fn layer_norm_backward<T: Scalar>(
    dy: &Array2<T>,
    cache: &LnCache<T>,
    g: ArrayView1<T>,
    mut dg: ArrayViewMut1<T>,
    mut db: ArrayViewMut1<T>,
) -> Array2<T> {
    let (rows, cols) = dy.dim();
    let n = cst::<T>(cols as f64);
    dg += &(dy * &cache.xhat).sum_axis(Axis(0));
    db += &dy.sum_axis(Axis(0));
    let dxhat = dy * &g;
    let mut dx = Array2::zeros((rows, cols));
    for i in 0..rows {
        let dr = dxhat.row(i);
        let xr = cache.xhat.row(i);
        let m1 = dr.sum() / n;
        let m2 = dr.iter().zip(xr.iter()).map(|(&a, &b)| a * b).sum::<T>() / n;
        let r = cache.rstd[i];
        for ((o, &d), &xh) in dx.row_mut(i).iter_mut().zip(dr.iter()).zip(xr.iter()) {
            *o = r * (d - m1 - xh * m2);
        }
    }
    dx
}

fn softmax_rows<T: Scalar>(x: &mut Array2<T>) {
    for mut row in x.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

fn silu<T: Scalar>(x: T) -> T {
    x / (T::one() + (-x).exp())
}

fn silu_grad<T: Scalar>(x: T) -> T {
    let sig = T::one() / (T::one() + (-x).exp());
    sig * (T::one() + x * (T::one() - sig))
}

/// Sinusoidal embedding of a timestep into `dim` features.
pub fn timestep_embedding<T: Scalar>(t: usize, dim: usize) -> Array1<T> {
    let half = dim / 2;
    let mut out = Array1::zeros(dim);
    for i in 0..half {
        let freq = (-(10_000f64.ln()) * i as f64 / half.max(1) as f64).exp();
        let arg = t as f64 * freq;
        out[i] = cst(arg.sin());
        out[half + i] = cst(arg.cos());
    }
    out
}

fn add_row<T: Scalar>(m: &mut Array2<T>, v: ArrayView1<T>) {
    for mut row in m.rows_mut() {
        row += &v;
    }
}

impl<T: Scalar> Denoiser<T> {
    /// Randomly initialised model. The condition projection and null token
    /// start at zero so an untrained condition path is inert.
    pub fn new(config: DenoiserConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut params = vec![T::zero(); layout.num_params()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |p: &mut [T], slot: Slot, std: f64| {
            for v in &mut p[slot.range()] {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = cst(z * std);
            }
        };
        let l = config.latent_dim as f64;
        fill(&mut params, layout.w_in, 1.0 / (config.feature_dim as f64).sqrt());
        fill(&mut params, layout.w_time, 1.0 / l.sqrt());
        fill(&mut params, layout.pos, 0.1);
        for b in &layout.blocks {
            for w in [b.wq, b.wk, b.wv, b.wo, b.w1] {
                fill(&mut params, w, 1.0 / l.sqrt());
            }
            fill(&mut params, b.w2, 1.0 / (config.ff_dim as f64).sqrt());
        }
        fill(&mut params, layout.w_out, 0.2 / l.sqrt());
        let gains: Vec<Slot> = layout
            .blocks
            .iter()
            .flat_map(|b| [b.ln1_g, b.ln2_g])
            .collect();
        for g in gains {
            params[g.range()].iter_mut().for_each(|v| *v = T::one());
        }
        Self::from_params(config, params)
    }

    pub fn from_params(config: DenoiserConfig, params: Vec<T>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if params.len() != layout.num_params() {
            return Err(shape_err(format!(
                "parameter vector has {} entries, layout needs {}",
                params.len(),
                layout.num_params()
            )));
        }
        let alpha_bar = build_schedule(config.schedule, config.max_timestep)?.alpha_bar;
        Ok(Self {
            config,
            layout,
            params,
            alpha_bar,
        })
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Converts the parameters to another precision.
    pub fn cast<U: Scalar>(&self) -> Denoiser<U> {
        Denoiser {
            config: self.config.clone(),
            layout: self.layout.clone(),
            params: self.params.iter().map(|v| cst::<U>(v.to_f64().unwrap_or(f64::NAN))).collect(),
            alpha_bar: self.alpha_bar.clone(),
        }
    }

    fn check_inputs(&self, y: &ArrayView2<T>, t: usize, cond: Option<&ArrayView2<T>>) -> Result<()> {
        let want = (self.config.seq_len, self.config.feature_dim);
        if y.dim() != want {
            return Err(shape_err(format!("input is {:?}, model expects {:?}", y.dim(), want)));
        }
        if let Some(c) = cond {
            if c.dim() != want {
                return Err(shape_err(format!("condition is {:?}, model expects {:?}", c.dim(), want)));
            }
        }
        if t == 0 || t > self.config.max_timestep {
            return Err(Error::TimestepOutOfRange {
                t,
                steps: self.config.max_timestep,
            });
        }
        Ok(())
    }

    fn forward_cached(&self, y: ArrayView2<T>, t: usize, cond: Option<ArrayView2<T>>) -> (Array2<T>, Cache<T>) {
        let p = &self.params[..];
        let lay = &self.layout;
        let cfg = &self.config;
        let heads = cfg.heads;
        let dh = cfg.latent_dim / heads;
        let scale = cst::<T>(1.0 / (dh as f64).sqrt());

        let temb = timestep_embedding::<T>(t, cfg.latent_dim);
        let tvec = temb.dot(&lay.w_time.mat(p)) + lay.b_time.vec(p);

        let mut h = y.dot(&lay.w_in.mat(p));
        add_row(&mut h, lay.b_in.vec(p));
        h += &lay.pos.mat(p);
        add_row(&mut h, tvec.view());
        match &cond {
            Some(c) => {
                h += &c.dot(&lay.w_cond.mat(p));
                add_row(&mut h, lay.b_cond.vec(p));
            }
            None => add_row(&mut h, lay.null_cond.vec(p)),
        }

        let mut blocks = Vec::with_capacity(cfg.blocks);
        for bs in &lay.blocks {
            let (x1, ln1) = layer_norm(&h, bs.ln1_g.vec(p), bs.ln1_b.vec(p));
            let q = x1.dot(&bs.wq.mat(p));
            let k = x1.dot(&bs.wk.mat(p));
            let v = x1.dot(&bs.wv.mat(p));
            let mut o = Array2::zeros(h.dim());
            let mut attn = Vec::with_capacity(heads);
            for hd in 0..heads {
                let cols = s![.., hd * dh..(hd + 1) * dh];
                let mut a = q.slice(cols).dot(&k.slice(cols).t()) * scale;
                softmax_rows(&mut a);
                o.slice_mut(cols).assign(&a.dot(&v.slice(cols)));
                attn.push(a);
            }
            let mut att_out = o.dot(&bs.wo.mat(p));
            add_row(&mut att_out, bs.bo.vec(p));
            h += &att_out;

            let (x2, ln2) = layer_norm(&h, bs.ln2_g.vec(p), bs.ln2_b.vec(p));
            let mut u = x2.dot(&bs.w1.mat(p));
            add_row(&mut u, bs.b1.vec(p));
            let act = u.mapv(silu);
            let mut mix = act.dot(&bs.w2.mat(p));
            add_row(&mut mix, bs.b2.vec(p));
            h += &mix;

            blocks.push(BlockCache {
                x1,
                ln1,
                q,
                k,
                v,
                attn,
                o,
                x2,
                ln2,
                u,
                act,
            });
        }

        let ab = self.alpha_bar[t - 1];
        let mix = cst::<T>(ab);
        let mut f = h.dot(&lay.w_out.mat(p));
        add_row(&mut f, lay.b_out.vec(p));
        let mut eps = f * mix + &y * cst::<T>((1.0 - ab).sqrt());
        let gate_mix = cst::<T>((ab * (1.0 - ab)).sqrt());
        if let Some(c) = &cond {
            let gated = c * &lay.cond_gate.vec(p);
            eps.scaled_add(-gate_mix, &gated);
        }
        (eps, Cache { temb, blocks, h, mix, gate_mix })
    }

    fn attention_record(&self, cache: &Cache<T>) -> AttentionRecord {
        let heads = cst::<T>(self.config.heads as f64);
        let per_layer = self
            .config
            .recorded_blocks()
            .into_iter()
            .map(|b| {
                let attn = &cache.blocks[b].attn;
                let mut avg = attn[0].clone();
                for a in &attn[1..] {
                    avg += a;
                }
                (avg / heads).mapv(|v| v.to_f64().unwrap_or(f64::NAN))
            })
            .collect();
        AttentionRecord { per_layer }
    }

    /// Predicted noise and the recorded attention maps.
    pub fn forward(
        &self,
        y_t: ArrayView2<T>,
        t: usize,
        cond: Option<ArrayView2<T>>,
    ) -> Result<(Array2<T>, AttentionRecord)> {
        self.check_inputs(&y_t, t, cond.as_ref())?;
        let (eps, cache) = self.forward_cached(y_t, t, cond);
        Ok((eps, self.attention_record(&cache)))
    }

    /// Mean squared error between `target` noise and the prediction.
    pub fn loss(&self, y_t: ArrayView2<T>, t: usize, cond: Option<ArrayView2<T>>, target: ArrayView2<T>) -> Result<T> {
        self.check_inputs(&y_t, t, cond.as_ref())?;
        if target.dim() != y_t.dim() {
            return Err(shape_err("target noise shape differs from input"));
        }
        let (eps, _) = self.forward_cached(y_t, t, cond);
        Ok(mse(&eps, &target))
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_grad(
        &self,
        y_t: ArrayView2<T>,
        t: usize,
        cond: Option<ArrayView2<T>>,
        target: ArrayView2<T>,
    ) -> Result<(T, Vec<T>)> {
        self.check_inputs(&y_t, t, cond.as_ref())?;
        if target.dim() != y_t.dim() {
            return Err(shape_err("target noise shape differs from input"));
        }
        let (eps, cache) = self.forward_cached(y_t, t, cond);
        let loss = mse(&eps, &target);
        let n = cst::<T>(eps.len() as f64);
        let d_eps = (&eps - &target) * (cst::<T>(2.0) / n);
        let grad = self.backward(&d_eps, y_t, cond, &cache);
        Ok((loss, grad))
    }

    fn backward(&self, d_eps: &Array2<T>, y: ArrayView2<T>, cond: Option<ArrayView2<T>>, cache: &Cache<T>) -> Vec<T> {
        let p = &self.params[..];
        let lay = &self.layout;
        let cfg = &self.config;
        let heads = cfg.heads;
        let dh = cfg.latent_dim / heads;
        let scale = cst::<T>(1.0 / (dh as f64).sqrt());
        let mut g = vec![T::zero(); p.len()];

        // output head
        let d_f = d_eps * cache.mix;
        lay.w_out.mat_mut(&mut g).assign(&cache.h.t().dot(&d_f));
        lay.b_out.vec_mut(&mut g).assign(&d_f.sum_axis(Axis(0)));
        let mut dh_res = d_f.dot(&lay.w_out.mat(p).t());
        if let Some(c) = &cond {
            let dg = (d_eps * c).sum_axis(Axis(0)) * (-cache.gate_mix);
            lay.cond_gate.vec_mut(&mut g).assign(&dg);
        }

        for (bs, bc) in lay.blocks.iter().zip(&cache.blocks).rev() {
            // feature mixing branch
            bs.w2.mat_mut(&mut g).assign(&bc.act.t().dot(&dh_res));
            bs.b2.vec_mut(&mut g).assign(&dh_res.sum_axis(Axis(0)));
            let dact = dh_res.dot(&bs.w2.mat(p).t());
            let mut du = dact;
            ndarray::Zip::from(&mut du).and(&bc.u).for_each(|d, &u| *d *= silu_grad(u));
            bs.w1.mat_mut(&mut g).assign(&bc.x2.t().dot(&du));
            bs.b1.vec_mut(&mut g).assign(&du.sum_axis(Axis(0)));
            let dx2 = du.dot(&bs.w1.mat(p).t());
            let dln2 = {
                let (dg, db) = split_two(&mut g, bs.ln2_g, bs.ln2_b);
                layer_norm_backward(&dx2, &bc.ln2, bs.ln2_g.vec(p), dg, db)
            };
            dh_res += &dln2;

            // attention branch
            bs.wo.mat_mut(&mut g).assign(&bc.o.t().dot(&dh_res));
            bs.bo.vec_mut(&mut g).assign(&dh_res.sum_axis(Axis(0)));
            let d_o = dh_res.dot(&bs.wo.mat(p).t());
            let mut dq = Array2::zeros(bc.q.dim());
            let mut dk = Array2::zeros(bc.k.dim());
            let mut dv = Array2::zeros(bc.v.dim());
            for hd in 0..heads {
                let cols = s![.., hd * dh..(hd + 1) * dh];
                let a = &bc.attn[hd];
                let do_h = d_o.slice(cols);
                let da = do_h.dot(&bc.v.slice(cols).t());
                dv.slice_mut(cols).assign(&a.t().dot(&do_h));
                // softmax backward, row-wise
                let mut ds = Array2::zeros(a.dim());
                for i in 0..a.nrows() {
                    let ar = a.row(i);
                    let dr = da.row(i);
                    let dot = ar.iter().zip(dr.iter()).map(|(&x, &y)| x * y).sum::<T>();
                    for ((o, &x), &y) in ds.row_mut(i).iter_mut().zip(ar.iter()).zip(dr.iter()) {
                        *o = x * (y - dot) * scale;
                    }
                }
                dq.slice_mut(cols).assign(&ds.dot(&bc.k.slice(cols)));
                dk.slice_mut(cols).assign(&ds.t().dot(&bc.q.slice(cols)));
            }
            bs.wq.mat_mut(&mut g).assign(&bc.x1.t().dot(&dq));
            bs.wk.mat_mut(&mut g).assign(&bc.x1.t().dot(&dk));
            bs.wv.mat_mut(&mut g).assign(&bc.x1.t().dot(&dv));
            let dx1 = dq.dot(&bs.wq.mat(p).t()) + dk.dot(&bs.wk.mat(p).t()) + dv.dot(&bs.wv.mat(p).t());
            let dln1 = {
                let (dg, db) = split_two(&mut g, bs.ln1_g, bs.ln1_b);
                layer_norm_backward(&dx1, &bc.ln1, bs.ln1_g.vec(p), dg, db)
            };
            dh_res += &dln1;
        }

        // input embedding
        lay.w_in.mat_mut(&mut g).assign(&y.t().dot(&dh_res));
        let drow = dh_res.sum_axis(Axis(0));
        lay.b_in.vec_mut(&mut g).assign(&drow);
        lay.pos.mat_mut(&mut g).assign(&dh_res);
        lay.b_time.vec_mut(&mut g).assign(&drow);
        {
            let temb = cache.temb.view().insert_axis(Axis(1));
            let dt = drow.view().insert_axis(Axis(0));
            lay.w_time.mat_mut(&mut g).assign(&temb.dot(&dt));
        }
        match cond {
            Some(c) => {
                lay.w_cond.mat_mut(&mut g).assign(&c.t().dot(&dh_res));
                lay.b_cond.vec_mut(&mut g).assign(&drow);
            }
            None => lay.null_cond.vec_mut(&mut g).assign(&drow),
        }
        g
    }
}

/// Two disjoint mutable slot views, `a` stored before `b`.
fn split_two<T>(g: &mut [T], a: Slot, b: Slot) -> (ArrayViewMut1<'_, T>, ArrayViewMut1<'_, T>) {
    debug_assert!(a.off + a.len() <= b.off);
    let (lo, hi) = g.split_at_mut(b.off);
    (
        ArrayViewMut1::from(&mut lo[a.range()]),
        ArrayViewMut1::from(&mut hi[..b.len()]),
    )
}

fn mse<T: Scalar>(a: &Array2<T>, b: &ArrayView2<T>) -> T {
    let n = cst::<T>(a.len() as f64);
    a.iter().zip(b.iter()).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>() / n
}

/// Anything that predicts noise on a fixed manifold shape.
///
/// The sampler only talks to this trait, so test stubs and baselines can
/// stand in for a trained network.
pub trait NoisePredictor: Sync {
    /// (K, 4D) accepted by [`NoisePredictor::predict`].
    fn manifold_shape(&self) -> (usize, usize);

    fn predict(&self, y_t: ArrayView2<f64>, t: usize, cond: Option<ArrayView2<f64>>) -> Result<(Array2<f64>, AttentionRecord)>;
}

impl<T: Scalar> NoisePredictor for Denoiser<T> {
    fn manifold_shape(&self) -> (usize, usize) {
        (self.config.seq_len, self.config.feature_dim)
    }

    fn predict(&self, y_t: ArrayView2<f64>, t: usize, cond: Option<ArrayView2<f64>>) -> Result<(Array2<f64>, AttentionRecord)> {
        let y = y_t.mapv(cst::<T>);
        let c = cond.map(|c| c.mapv(cst::<T>));
        let (eps, attn) = self.forward(y.view(), t, c.as_ref().map(|c| c.view()))?;
        Ok((eps.mapv(|v| v.to_f64().unwrap_or(f64::NAN)), attn))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn small_config() -> DenoiserConfig {
        DenoiserConfig {
            blocks: 3,
            latent_dim: 16,
            heads: 2,
            ff_dim: 24,
            feature_dim: 12,
            seq_len: 7,
            max_timestep: 100,
            schedule: ScheduleKind::Cosine,
            cond_drop_prob: 0.1,
        }
    }

    fn randn(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> Array2<f64> {
        Array2::from_shape_fn(shape, |_| StandardNormal.sample(rng))
    }

    #[test]
    fn forward_is_deterministic_and_shape_preserving() {
        let m = Denoiser::<f32>::new(small_config(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = randn(&mut rng, (7, 12)).mapv(|v| v as f32);
        let c = randn(&mut rng, (7, 12)).mapv(|v| v as f32);
        let (a, ra) = m.forward(y.view(), 40, Some(c.view())).unwrap();
        let (b, rb) = m.forward(y.view(), 40, Some(c.view())).unwrap();
        assert_eq!(a.dim(), (7, 12));
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn attention_rows_are_distributions() {
        let m = Denoiser::<f64>::new(small_config(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = randn(&mut rng, (7, 12));
        let (_, rec) = m.forward(y.view(), 10, None).unwrap();
        assert_eq!(rec.per_layer.len(), 2);
        for a in &rec.per_layer {
            assert_eq!(a.dim(), (7, 7));
            for row in a.rows() {
                assert!(row.iter().all(|v| *v >= 0.0));
                assert!((row.sum() - 1.0).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn recorded_blocks_are_the_middle_pair() {
        let mut c = small_config();
        c.blocks = 4;
        assert_eq!(c.recorded_blocks(), vec![1, 2]);
        c.blocks = 3;
        assert_eq!(c.recorded_blocks(), vec![0, 1]);
        c.blocks = 1;
        assert_eq!(c.recorded_blocks(), vec![0]);
    }

    #[test]
    fn rejects_bad_shapes_and_timesteps() {
        let m = Denoiser::<f32>::new(small_config(), 0).unwrap();
        let y = Array2::<f32>::zeros((7, 12));
        assert!(matches!(m.forward(Array2::zeros((6, 12)).view(), 1, None), Err(Error::Shape(_))));
        assert!(matches!(m.forward(y.view(), 1, Some(Array2::zeros((7, 11)).view())), Err(Error::Shape(_))));
        assert!(matches!(m.forward(y.view(), 0, None), Err(Error::TimestepOutOfRange { .. })));
        assert!(matches!(m.forward(y.view(), 101, None), Err(Error::TimestepOutOfRange { .. })));
        let mut bad = small_config();
        bad.heads = 3;
        assert!(Denoiser::<f32>::new(bad, 0).is_err());
    }

    #[test]
    fn initial_loss_is_near_unit_on_gaussian_targets() {
        let m = Denoiser::<f32>::new(DenoiserConfig::toy(32, 64), 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut total = 0.0;
        let n = 20;
        for _ in 0..n {
            let y = randn(&mut rng, (32, 64)).mapv(|v| v as f32);
            let e = randn(&mut rng, (32, 64)).mapv(|v| v as f32);
            let t = rng.random_range(1..=1000);
            total += m.loss(y.view(), t, None, e.view()).unwrap() as f64;
        }
        let mean = total / n as f64;
        assert!((0.5..=2.0).contains(&mean), "initial loss {mean}");
    }

    #[test]
    fn head_blends_input_by_schedule() {
        let m = Denoiser::<f64>::new(small_config(), 6).unwrap();
        let sched = build_schedule(ScheduleKind::Cosine, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let y = randn(&mut rng, (7, 12));
        let c = randn(&mut rng, (7, 12));
        for t in [1, 50, 100] {
            let eps = m.forward(y.view(), t, Some(c.view())).unwrap().0;
            let ab = sched.alpha_bar_at(t);
            let mut zeroed = m.clone();
            zeroed.params[m.layout.w_out.range()].fill(0.0);
            zeroed.params[m.layout.b_out.range()].fill(0.0);
            let skip = zeroed.forward(y.view(), t, Some(c.view())).unwrap().0;
            let want = y.mapv(|v| v * (1.0 - ab).sqrt());
            assert!(skip.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
            let f = (&eps - &skip) / ab.sqrt();
            assert!(f.iter().all(|v| v.is_finite()));
        }
        let last = m.forward(y.view(), 100, None).unwrap().0;
        let err = (&last - &y).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        assert!(err < 1e-2, "{err}");
    }

    #[test]
    fn unconditioned_path_ignores_cond_weights() {
        let m = Denoiser::<f64>::new(small_config(), 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = randn(&mut rng, (7, 12));
        let e = randn(&mut rng, (7, 12));
        let (_, g) = m.loss_and_grad(y.view(), 5, None, e.view()).unwrap();
        for slot in m.layout.cond_slots() {
            assert!(g[slot.range()].iter().all(|v| *v == 0.0));
        }
        // with zero-initialised condition weights every condition looks alike
        let c1 = randn(&mut rng, (7, 12));
        let c2 = randn(&mut rng, (7, 12));
        let a = m.forward(y.view(), 5, Some(c1.view())).unwrap().0;
        let b = m.forward(y.view(), 5, Some(c2.view())).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn layout_covers_every_parameter_once() {
        let cfg = small_config();
        let lay = Layout::new(&cfg);
        let mut next = 0;
        for (_, slot) in lay.entries() {
            assert_eq!(slot.off, next);
            next += slot.len();
        }
        assert_eq!(next, lay.num_params());
        assert!(lay.slot("block2.mix.w2").is_some());
    }
}
