//! Noise-prediction training: AdamW with global-norm clipping and an EMA
//! weight copy used at inference.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::denoiser::{Denoiser, DenoiserConfig};
use crate::error::{shape_err, Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::schedule::{q_sample, NoiseSchedule};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHyper {
    pub lr: f64,
    pub weight_decay: f64,
    pub clip_norm: f64,
    pub ema_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            weight_decay: 0.01,
            clip_norm: 1.0,
            ema_decay: 0.999,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

/// One training example: a clean normalized manifold and its padded-history
/// condition manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainPair {
    pub y0: Array2<f64>,
    pub cond: Array2<f64>,
}

/// Mutable training state around a model.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub model: Denoiser<f32>,
    pub ema: Vec<f32>,
    pub adam_m: Vec<f32>,
    pub adam_v: Vec<f32>,
    pub step: u64,
    pub hyper: TrainHyper,
    decay_mask: Vec<bool>,
}

struct Draw {
    t: usize,
    noise: Array2<f64>,
    drop: bool,
}

impl Trainer {
    pub fn new(model: Denoiser<f32>, hyper: TrainHyper) -> Self {
        let n = model.num_params();
        let mut decay_mask = vec![false; n];
        // matrices decay, vectors (biases, gains, null token) do not
        for (_, slot) in model.layout.entries() {
            if slot.rows > 1 {
                decay_mask[slot.range()].iter_mut().for_each(|d| *d = true);
            }
        }
        Self {
            ema: model.params.clone(),
            adam_m: vec![0.0; n],
            adam_v: vec![0.0; n],
            step: 0,
            hyper,
            decay_mask,
            model,
        }
    }

    /// Restores a trainer from saved state.
    pub fn resume(model: Denoiser<f32>, ema: Vec<f32>, adam_m: Vec<f32>, adam_v: Vec<f32>, step: u64, hyper: TrainHyper) -> Result<Self> {
        let n = model.num_params();
        if ema.len() != n || adam_m.len() != n || adam_v.len() != n {
            return Err(shape_err("training state does not match the parameter count"));
        }
        let mut t = Trainer::new(model, hyper);
        t.ema = ema;
        t.adam_m = adam_m;
        t.adam_v = adam_v;
        t.step = step;
        Ok(t)
    }

    pub fn config(&self) -> &DenoiserConfig {
        &self.model.config
    }

    /// EMA weights as an inference model.
    pub fn ema_model(&self) -> Denoiser<f32> {
        let mut m = self.model.clone();
        m.params.clone_from(&self.ema);
        m
    }

    /// Draws t, ε and the condition-drop flag for every pair (in order from
    /// `rng`), averages per-sample gradients and applies one AdamW update.
    pub fn train_step(&mut self, batch: &[TrainPair], schedule: &NoiseSchedule, rng: &mut ChaCha8Rng, mode: ExecMode) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("training batch"));
        }
        let shape = (self.model.config.seq_len, self.model.config.feature_dim);
        for p in batch {
            if p.y0.dim() != shape || p.cond.dim() != shape {
                return Err(shape_err(format!(
                    "training pair is {:?}/{:?}, model expects {:?}",
                    p.y0.dim(),
                    p.cond.dim(),
                    shape
                )));
            }
        }
        let steps = schedule.steps.min(self.model.config.max_timestep);
        let drop_p = self.model.config.cond_drop_prob;
        let draws: Vec<Draw> = batch
            .iter()
            .map(|_| {
                let t = rng.random_range(1..=steps);
                let noise = Array2::from_shape_fn(shape, |_| StandardNormal.sample(rng));
                let drop = rng.random::<f64>() < drop_p;
                Draw { t, noise, drop }
            })
            .collect();

        let model = &self.model;
        let results = map_indexed(mode, &draws, |i, d| -> Result<(f32, Vec<f32>)> {
            let pair = &batch[i];
            let y_t = q_sample(pair.y0.view(), d.t, d.noise.view(), schedule)?.mapv(|v| v as f32);
            let target = d.noise.mapv(|v| v as f32);
            let cond = pair.cond.mapv(|v| v as f32);
            let cond = if d.drop { None } else { Some(cond.view()) };
            model.loss_and_grad(y_t.view(), d.t, cond, target.view())
        });

        let n = self.model.num_params();
        let mut grad = vec![0.0f64; n];
        let mut loss = 0.0f64;
        for r in results {
            let (l, g) = r?;
            loss += l as f64;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += *b as f64);
        }
        let scale = 1.0 / batch.len() as f64;
        loss *= scale;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "training loss became {loss} at step {}; lower the learning rate or check data normalization",
                self.step + 1
            )));
        }
        grad.iter_mut().for_each(|g| *g *= scale);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > self.hyper.clip_norm {
            let c = self.hyper.clip_norm / norm;
            grad.iter_mut().for_each(|g| *g *= c);
        }
        self.apply_update(&grad);
        Ok(loss)
    }

    fn apply_update(&mut self, grad: &[f64]) {
        self.step += 1;
        let h = &self.hyper;
        let t = self.step as i32;
        let bc1 = 1.0 - h.beta1.powi(t);
        let bc2 = 1.0 - h.beta2.powi(t);
        let ema_d = h.ema_decay.min((1.0 + self.step as f64) / (10.0 + self.step as f64));
        for i in 0..grad.len() {
            let g = grad[i];
            let m = h.beta1 * self.adam_m[i] as f64 + (1.0 - h.beta1) * g;
            let v = h.beta2 * self.adam_v[i] as f64 + (1.0 - h.beta2) * g * g;
            self.adam_m[i] = m as f32;
            self.adam_v[i] = v as f32;
            let mut p = self.model.params[i] as f64;
            if self.decay_mask[i] {
                p -= h.lr * h.weight_decay * p;
            }
            p -= h.lr * (m / bc1) / ((v / bc2).sqrt() + h.adam_eps);
            self.model.params[i] = p as f32;
            self.ema[i] = (ema_d * self.ema[i] as f64 + (1.0 - ema_d) * p) as f32;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{build_schedule, ScheduleKind};
    use rand::SeedableRng;

    fn cfg(drop: f64) -> DenoiserConfig {
        DenoiserConfig {
            blocks: 2,
            latent_dim: 32,
            heads: 4,
            ff_dim: 64,
            feature_dim: 8,
            seq_len: 10,
            max_timestep: 100,
            schedule: ScheduleKind::Cosine,
            cond_drop_prob: drop,
        }
    }

    fn pair(seed: u64) -> TrainPair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TrainPair {
            y0: Array2::from_shape_fn((10, 8), |(k, c)| ((k as f64) * 0.4 + c as f64).sin()),
            cond: Array2::from_shape_fn((10, 8), |_| StandardNormal.sample(&mut rng)),
        }
    }

    fn probe_loss(model: &Denoiser<f32>, p: &TrainPair, s: &NoiseSchedule) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut total = 0.0;
        for t in (5..=100).step_by(5) {
            let e = Array2::from_shape_fn((10, 8), |_| StandardNormal.sample(&mut rng));
            let y = q_sample(p.y0.view(), t, e.view(), s).unwrap().mapv(|v| v as f32);
            let c = p.cond.mapv(|v| v as f32);
            total += model.loss(y.view(), t, Some(c.view()), e.mapv(|v| v as f32).view()).unwrap() as f64;
        }
        total / 20.0
    }

    #[test]
    fn overfits_a_single_repeated_sample() {
        let s = build_schedule(ScheduleKind::Cosine, 100).unwrap();
        let model = Denoiser::<f32>::new(cfg(0.0), 1).unwrap();
        let p = pair(2);
        let before = probe_loss(&model, &p, &s);
        let mut tr = Trainer::new(model, TrainHyper { lr: 3e-3, ..TrainHyper::default() });
        let batch = vec![p.clone(); 8];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            tr.train_step(&batch, &s, &mut rng, ExecMode::Parallel).unwrap();
        }
        let after = probe_loss(&tr.model, &p, &s);
        assert!(after < 0.5 * before, "loss {before} -> {after}");
        assert_eq!(tr.step, 200);
    }

    #[test]
    fn full_condition_dropout_never_touches_condition_weights() {
        let s = build_schedule(ScheduleKind::Cosine, 100).unwrap();
        let model = Denoiser::<f32>::new(cfg(1.0), 4).unwrap();
        let slots = model.layout.cond_slots();
        let mut tr = Trainer::new(model, TrainHyper { lr: 1e-2, ..TrainHyper::default() });
        let batch = vec![pair(5), pair(6)];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            tr.train_step(&batch, &s, &mut rng, ExecMode::Sequential).unwrap();
        }
        for slot in slots {
            assert!(tr.model.params[slot.range()].iter().all(|v| *v == 0.0));
            assert!(tr.adam_m[slot.range()].iter().all(|v| *v == 0.0));
        }
        // output is invariant to the condition argument
        let m = tr.ema_model();
        let y = Array2::<f32>::ones((10, 8));
        let a = m.forward(y.view(), 3, Some(pair(8).cond.mapv(|v| v as f32).view())).unwrap().0;
        let b = m.forward(y.view(), 3, Some(pair(9).cond.mapv(|v| v as f32).view())).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn execution_modes_give_identical_updates() {
        let s = build_schedule(ScheduleKind::Linear, 100).unwrap();
        let model = Denoiser::<f32>::new(cfg(0.5), 10).unwrap();
        let batch: Vec<_> = (0..4).map(pair).collect();
        let mut a = Trainer::new(model.clone(), TrainHyper::default());
        let mut b = Trainer::new(model, TrainHyper::default());
        let mut ra = ChaCha8Rng::seed_from_u64(1);
        let mut rb = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3 {
            let la = a.train_step(&batch, &s, &mut ra, ExecMode::Sequential).unwrap();
            let lb = b.train_step(&batch, &s, &mut rb, ExecMode::Parallel).unwrap();
            assert_eq!(la, lb);
        }
        assert_eq!(a.model.params, b.model.params);
        assert_eq!(a.ema, b.ema);
    }

    #[test]
    fn rejects_empty_and_mismatched_batches() {
        let s = build_schedule(ScheduleKind::Cosine, 100).unwrap();
        let mut tr = Trainer::new(Denoiser::<f32>::new(cfg(0.1), 0).unwrap(), TrainHyper::default());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(tr.train_step(&[], &s, &mut rng, ExecMode::Sequential), Err(Error::EmptyInput(_))));
        let bad = TrainPair {
            y0: Array2::zeros((9, 8)),
            cond: Array2::zeros((10, 8)),
        };
        assert!(matches!(tr.train_step(&[bad], &s, &mut rng, ExecMode::Sequential), Err(Error::Shape(_))));
    }

    #[test]
    fn diverging_loss_is_reported() {
        let s = build_schedule(ScheduleKind::Cosine, 100).unwrap();
        let mut model = Denoiser::<f32>::new(cfg(0.0), 0).unwrap();
        model.params[0] = f32::NAN;
        let mut tr = Trainer::new(model, TrainHyper::default());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = tr.train_step(&[pair(1)], &s, &mut rng, ExecMode::Sequential).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        assert!(err.to_string().contains("learning rate"));
    }
}
