//! `WMCK` checkpoint files.
//!
//! All multi-byte values are little-endian.
//!
//! ```text
//! "WMCK"  u8 version (1)
//! config  u32 blocks, latent_dim, heads, ff_dim, feature_dim, seq_len, max_timestep
//!         f64 cond_drop_prob
//!         u32 frames, channels, history   f64 fps
//!         u8 basis name length, name bytes (ASCII)
//!         u8 schedule kind (0 cosine, 1 linear, 2 sigmoid)   u32 schedule steps
//!         u64 training step counter
//! norm    u32 channels, f64 mean × channels, f64 std × channels
//! params  u32 count, f32 × count           EMA weights in layout order
//! state   u8 flag; when 1: f32 × count raw weights, Adam m, Adam v
//! ```

use std::path::Path;

use ndarray::Array1;

use super::{Denoiser, DenoiserConfig};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};
use crate::manifold::NormStats;
use crate::schedule::ScheduleKind;
use crate::train::{TrainHyper, Trainer};

const MAGIC: &[u8; 4] = b"WMCK";
const VERSION: u8 = 1;

/// Shape and preprocessing facts a model was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub basis: String,
    pub frames: usize,
    pub channels: usize,
    pub history: usize,
    pub fps: f64,
    pub schedule: ScheduleKind,
    pub schedule_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: Vec<f32>,
    pub adam_m: Vec<f32>,
    pub adam_v: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: DenoiserConfig,
    pub meta: ModelMeta,
    pub step: u64,
    pub norm: NormStats,
    pub ema: Vec<f32>,
    pub state: Option<TrainState>,
}

impl Checkpoint {
    pub fn from_trainer(trainer: &Trainer, meta: ModelMeta, norm: NormStats) -> Self {
        Self {
            config: trainer.model.config.clone(),
            meta,
            step: trainer.step,
            norm,
            ema: trainer.ema.clone(),
            state: Some(TrainState {
                params: trainer.model.params.clone(),
                adam_m: trainer.adam_m.clone(),
                adam_v: trainer.adam_v.clone(),
            }),
        }
    }

    /// The EMA weights as an inference model.
    pub fn model(&self) -> Result<Denoiser<f32>> {
        Denoiser::from_params(self.config.clone(), self.ema.clone())
    }

    /// A trainer that continues from this checkpoint.
    pub fn trainer(&self, hyper: TrainHyper) -> Result<Trainer> {
        match &self.state {
            Some(s) => Trainer::resume(
                Denoiser::from_params(self.config.clone(), s.params.clone())?,
                self.ema.clone(),
                s.adam_m.clone(),
                s.adam_v.clone(),
                self.step,
                hyper,
            ),
            None => {
                let mut t = Trainer::new(self.model()?, hyper);
                t.step = self.step;
                Ok(t)
            }
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.config.schedule != self.meta.schedule || self.config.max_timestep != self.meta.schedule_steps {
            return Err(Error::Format("model config and metadata disagree on the noise schedule".into()));
        }
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u8(VERSION);
        let c = &self.config;
        for v in [c.blocks, c.latent_dim, c.heads, c.ff_dim, c.feature_dim, c.seq_len, c.max_timestep] {
            w.u32(v)?;
        }
        w.f64(c.cond_drop_prob);
        let m = &self.meta;
        w.u32(m.frames)?;
        w.u32(m.channels)?;
        w.u32(m.history)?;
        w.f64(m.fps);
        let name = m.basis.as_bytes();
        let len = u8::try_from(name.len()).map_err(|_| Error::Format("basis name longer than 255 bytes".into()))?;
        w.u8(len);
        w.bytes(name);
        w.u8(m.schedule.id());
        w.u32(m.schedule_steps)?;
        w.u64(self.step);

        w.u32(self.norm.channels())?;
        self.norm.mean.iter().for_each(|v| w.f64(*v));
        self.norm.std.iter().for_each(|v| w.f64(*v));

        w.u32(self.ema.len())?;
        self.ema.iter().for_each(|v| w.f32(*v));
        match &self.state {
            Some(s) => {
                w.u8(1);
                for part in [&s.params, &s.adam_m, &s.adam_v] {
                    part.iter().for_each(|v| w.f32(*v));
                }
            }
            None => w.u8(0),
        }
        Ok(w.buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "checkpoint");
        r.expect_magic(MAGIC)?;
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let mut dims = [0usize; 7];
        for d in &mut dims {
            *d = r.u32()?;
        }
        let cond_drop_prob = r.f64()?;
        let frames = r.u32()?;
        let channels = r.u32()?;
        let history = r.u32()?;
        let fps = r.f64()?;
        let name_len = r.u8()? as usize;
        let basis = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| Error::Format("basis name is not valid UTF-8".into()))?;
        let schedule = ScheduleKind::from_id(r.u8()?)?;
        let schedule_steps = r.u32()?;
        let step = r.u64()?;
        let meta = ModelMeta {
            basis,
            frames,
            channels,
            history,
            fps,
            schedule,
            schedule_steps,
        };
        let config = DenoiserConfig {
            blocks: dims[0],
            latent_dim: dims[1],
            heads: dims[2],
            ff_dim: dims[3],
            feature_dim: dims[4],
            seq_len: dims[5],
            max_timestep: dims[6],
            schedule,
            cond_drop_prob,
        };
        config.validate().map_err(|e| Error::Format(format!("checkpoint config: {e}")))?;

        let nc = r.u32()?;
        let mut read_f64s = |n: usize| -> Result<Array1<f64>> { (0..n).map(|_| r.f64()).collect() };
        let mean = read_f64s(nc)?;
        let std = read_f64s(nc)?;
        let norm = NormStats { mean, std };

        let count = r.u32()?;
        let expected = super::Layout::new(&config).num_params();
        if count != expected {
            return Err(Error::Format(format!(
                "checkpoint stores {count} parameters, its config needs {expected}"
            )));
        }
        let read_f32s = |r: &mut Reader| -> Result<Vec<f32>> { (0..count).map(|_| r.f32()).collect() };
        let ema = read_f32s(&mut r)?;
        let state = match r.u8()? {
            0 => None,
            1 => Some(TrainState {
                params: read_f32s(&mut r)?,
                adam_m: read_f32s(&mut r)?,
                adam_v: read_f32s(&mut r)?,
            }),
            f => return Err(Error::Format(format!("bad training-state flag {f}"))),
        };
        if r.remaining() != 0 {
            return Err(Error::Format(format!("{} trailing bytes after checkpoint", r.remaining())));
        }
        if ema.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("checkpoint weights contain NaN or Inf".into()));
        }
        Ok(Self {
            config,
            meta,
            step,
            norm,
            ema,
            state,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let config = DenoiserConfig {
            blocks: 1,
            latent_dim: 4,
            heads: 2,
            ff_dim: 6,
            feature_dim: 8,
            seq_len: 3,
            max_timestep: 10,
            schedule: ScheduleKind::Sigmoid,
            cond_drop_prob: 0.25,
        };
        let trainer = Trainer::new(Denoiser::<f32>::new(config, 1).unwrap(), TrainHyper::default());
        let meta = ModelMeta {
            basis: "haar".into(),
            frames: 6,
            channels: 6,
            history: 2,
            fps: 25.0,
            schedule: ScheduleKind::Sigmoid,
            schedule_steps: 10,
        };
        let norm = NormStats {
            mean: Array1::from(vec![0.5, -1.0, 2.0, 0.0, 1.0, 3.0]),
            std: Array1::from(vec![1.0, 2.0, 0.5, 1.0, 1.0, 4.0]),
        };
        Checkpoint::from_trainer(&trainer, meta, norm)
    }

    #[test]
    fn bytes_roundtrip_exactly() {
        let ck = sample();
        let bytes = ck.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"WMCK");
        assert_eq!(bytes[4], 1);
        assert_eq!(u32::from_le_bytes(bytes[5..9].try_into().unwrap()), 1);
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, ck);
        let mut inference = ck.clone();
        inference.state = None;
        assert_eq!(Checkpoint::from_bytes(&inference.to_bytes().unwrap()).unwrap(), inference);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = sample().to_bytes().unwrap();
        assert!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&bad), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(Checkpoint::from_bytes(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(Checkpoint::from_bytes(&extra).is_err());
    }

    #[test]
    fn resume_restores_counter_and_state() {
        let ck = sample();
        let t = ck.trainer(TrainHyper::default()).unwrap();
        assert_eq!(t.step, ck.step);
        assert_eq!(t.model.params, ck.state.as_ref().unwrap().params);
    }

    #[test]
    fn schedule_mismatch_is_rejected() {
        let mut ck = sample();
        ck.meta.schedule = ScheduleKind::Linear;
        assert!(matches!(ck.to_bytes(), Err(Error::Format(_))));
        let mut ck = sample();
        ck.meta.schedule_steps = 20;
        assert!(ck.to_bytes().is_err());
    }
}
