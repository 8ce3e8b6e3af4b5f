//! Run configuration: a flat table of typed keys read from `key = value`
//! files and `--set key=value` overrides.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Unknown keys and malformed values are errors. [`RunConfig::dump`] writes
//! every key, and loading a dump reproduces the same configuration.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::data_io::SynthKind;
use crate::denoiser::DenoiserConfig;
use crate::error::{Error, Result};
use crate::sampler::SampleConfig;
use crate::schedule::ScheduleKind;
use crate::train::TrainHyper;

trait ConfigValue: Sized {
    fn parse_value(s: &str) -> std::result::Result<Self, String>;
    fn render(&self) -> String;
}

macro_rules! from_str_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(s: &str) -> std::result::Result<Self, String> {
                s.parse().map_err(|e| format!("{e}"))
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

from_str_value!(usize, u64, f64, bool, String);

impl ConfigValue for SynthKind {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        SynthKind::from_str(s).map_err(|e| e.to_string())
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for ScheduleKind {
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        ScheduleKind::from_str(s).map_err(|e| e.to_string())
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

macro_rules! run_config {
    ($( $key:literal => $field:ident : $ty:ty = $default:expr, $doc:literal; )*) => {
        /// Every tunable of a run. Field names mirror the dotted keys.
        #[derive(Debug, Clone, PartialEq)]
        pub struct RunConfig {
            $( #[doc = $doc] pub $field: $ty, )*
        }

        impl Default for RunConfig {
            fn default() -> Self {
                Self { $( $field: $default, )* }
            }
        }

        impl RunConfig {
            /// `(key, default, description)` for every key, in dump order.
            pub fn documented_keys() -> Vec<(&'static str, String, &'static str)> {
                let d = RunConfig::default();
                vec![ $( ($key, ConfigValue::render(&d.$field), $doc), )* ]
            }

            pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
                match key {
                    $( $key => {
                        self.$field = <$ty as ConfigValue>::parse_value(value)
                            .map_err(|e| Error::Config(format!("bad value `{value}` for {key}: {e}")))?;
                    } )*
                    other => return Err(Error::Config(format!("unknown key `{other}`"))),
                }
                Ok(())
            }

            /// Every key with its current value, one `key = value` per line.
            pub fn dump(&self) -> String {
                let mut out = String::new();
                $( let _ = writeln!(out, "{} = {}", $key, ConfigValue::render(&self.$field)); )*
                out
            }
        }
    };
}

run_config! {
    "data.kind" => data_kind: SynthKind = SynthKind::SineWalk, "synthetic motion kind: sine_walk, chirp, stop_start, mixture";
    "data.input" => data_input: String = String::new(), "comma-separated motion files to use instead of synthetic data";
    "data.frames" => data_frames: usize = 96, "frames per synthetic sequence";
    "data.joints" => data_joints: usize = 5, "joints per pose (3 channels each)";
    "data.fps" => data_fps: f64 = 50.0, "frame rate of synthetic data";
    "data.history" => data_history: usize = 16, "observed frames H";
    "data.future" => data_future: usize = 32, "predicted frames F";
    "data.stride" => data_stride: usize = 4, "window stride in frames";
    "data.train_sequences" => data_train_sequences: usize = 32, "synthetic training sequences";
    "data.test_sequences" => data_test_sequences: usize = 8, "synthetic test sequences";
    "data.seed" => data_seed: u64 = 1, "seed of the synthetic corpus";
    "model.basis" => model_basis: String = "bior2.8".to_string(), "wavelet basis";
    "model.blocks" => model_blocks: usize = 4, "denoiser blocks";
    "model.latent_dim" => model_latent_dim: usize = 64, "latent width";
    "model.heads" => model_heads: usize = 8, "attention heads";
    "model.ff_dim" => model_ff_dim: usize = 128, "hidden width of the feature-mixing layer";
    "model.cond_drop_prob" => model_cond_drop_prob: f64 = 0.1, "probability of training without the condition";
    "model.lr" => model_lr: f64 = 1e-4, "AdamW learning rate";
    "model.weight_decay" => model_weight_decay: f64 = 0.01, "AdamW decoupled weight decay";
    "model.clip_norm" => model_clip_norm: f64 = 1.0, "global gradient-norm clip";
    "model.ema_decay" => model_ema_decay: f64 = 0.999, "EMA decay of inference weights";
    "model.batch_size" => model_batch_size: usize = 16, "windows per optimizer step";
    "model.epochs" => model_epochs: usize = 80, "passes over the training windows";
    "model.max_steps" => model_max_steps: usize = 0, "stop after this many optimizer steps (0 = no limit)";
    "model.seed" => model_seed: u64 = 0, "seed of initialization and training draws";
    "schedule.kind" => schedule_kind: ScheduleKind = ScheduleKind::Cosine, "noise schedule: cosine, linear, sigmoid";
    "schedule.steps" => schedule_steps: usize = 1000, "diffusion steps T";
    "sample.ddim_steps" => sample_ddim_steps: usize = 100, "DDIM steps";
    "sample.w" => sample_w: f64 = 1.5, "classifier-free guidance scale";
    "sample.s" => sample_s: f64 = 1.0, "attention guidance scale";
    "sample.sigma" => sample_sigma: f64 = 2.5, "attention guidance noise scale";
    "sample.phi_quantile" => sample_phi_quantile: f64 = 0.8, "quantile of frame importance used as the mask threshold";
    "sample.m" => sample_m: usize = 3, "odd mask width in manifold rows";
    "sample.tabg_window" => sample_tabg_window: usize = 90, "initial steps with attention guidance";
    "sample.wmsg" => sample_wmsg: bool = true, "project onto the wavelet manifold after every step";
    "sample.control_window" => sample_control_window: usize = 90, "initial steps with ground-truth control blending";
    "sample.seed" => sample_seed: u64 = 0, "sampling seed";
    "sample.count" => sample_count: usize = 1, "predictions written by predict";
    "eval.samples" => eval_samples: usize = 50, "futures S drawn per test window";
    "eval.windows" => eval_windows: usize = 0, "test windows evaluated (0 = all)";
    "eval.mm_tau" => eval_mm_tau: f64 = 0.5, "history distance grouping multi-modal ground truth";
    "out.dir" => out_dir: String = "out".to_string(), "output directory";
    "out.checkpoint" => out_checkpoint: String = String::new(), "checkpoint path (default <out.dir>/model.wmck)";
    "out.svg" => out_svg: bool = true, "write SVG trajectory plots";
}

impl RunConfig {
    /// Applies `key = value` lines.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, found `{raw}`", n + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, e.to_string().trim_start_matches("config: "))))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(c)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{kv}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn total_frames(&self) -> usize {
        self.data_history + self.data_future
    }

    pub fn channels(&self) -> usize {
        3 * self.data_joints
    }

    pub fn checkpoint_path(&self) -> std::path::PathBuf {
        if self.out_checkpoint.is_empty() {
            Path::new(&self.out_dir).join("model.wmck")
        } else {
            self.out_checkpoint.clone().into()
        }
    }

    pub fn denoiser_config(&self, seq_len: usize, feature_dim: usize) -> DenoiserConfig {
        DenoiserConfig {
            blocks: self.model_blocks,
            latent_dim: self.model_latent_dim,
            heads: self.model_heads,
            ff_dim: self.model_ff_dim,
            feature_dim,
            seq_len,
            max_timestep: self.schedule_steps,
            schedule: self.schedule_kind,
            cond_drop_prob: self.model_cond_drop_prob,
        }
    }

    pub fn train_hyper(&self) -> TrainHyper {
        TrainHyper {
            lr: self.model_lr,
            weight_decay: self.model_weight_decay,
            clip_norm: self.model_clip_norm,
            ema_decay: self.model_ema_decay,
            ..TrainHyper::default()
        }
    }

    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig {
            ddim_steps: self.sample_ddim_steps,
            w: self.sample_w,
            s: self.sample_s,
            sigma: self.sample_sigma,
            phi_quantile: self.sample_phi_quantile,
            m: self.sample_m,
            tabg_window: self.sample_tabg_window,
            wmsg_enabled: self.sample_wmsg,
            control_window: self.sample_control_window,
            seed: self.sample_seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut c = RunConfig::default();
        c.apply_text("# toy\n\ndata.joints = 3   # three joints\nschedule.kind = linear\nsample.wmsg = false\n")
            .unwrap();
        assert_eq!(c.data_joints, 3);
        assert_eq!(c.schedule_kind, ScheduleKind::Linear);
        assert!(!c.sample_wmsg);
        c.apply_override("sample.w=0.25").unwrap();
        assert_eq!(c.sample_w, 0.25);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::default();
        let e = c.apply_text("data.jionts = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(e.to_string().contains("line 1"));
        assert!(c.apply_text("data.joints = three\n").is_err());
        assert!(c.apply_text("data.kind = walk\n").is_err());
        assert!(c.apply_text("no equals sign\n").is_err());
        assert!(c.apply_override("sample.w").is_err());
    }

    #[test]
    fn dump_roundtrips() {
        let mut c = RunConfig::default();
        c.apply_text("model.lr = 0.00123\ndata.kind = mixture\nout.dir = /tmp/x y\n").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&c.dump()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.dump().lines().count(), RunConfig::documented_keys().len());
    }
}
