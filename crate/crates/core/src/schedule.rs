//! Noise schedules and the closed-form forward (noising) process.
//!
//! Timesteps are 1-based at the API (`t ∈ 1..=T`) and 0-based in the
//! stored arrays. `alpha_bar_at(0)` is defined as 1 (clean data).

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::error::{shape_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScheduleKind {
    #[default]
    Cosine,
    Linear,
    Sigmoid,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 3] = [ScheduleKind::Cosine, ScheduleKind::Linear, ScheduleKind::Sigmoid];

    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleKind::Cosine => "cosine",
            ScheduleKind::Linear => "linear",
            ScheduleKind::Sigmoid => "sigmoid",
        }
    }

    pub fn id(self) -> u8 {
        match self {
            ScheduleKind::Cosine => 0,
            ScheduleKind::Linear => 1,
            ScheduleKind::Sigmoid => 2,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        ScheduleKind::ALL
            .into_iter()
            .find(|k| k.id() == id)
            .ok_or_else(|| Error::Format(format!("unknown schedule id {id}")))
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cosine" => Ok(ScheduleKind::Cosine),
            "linear" => Ok(ScheduleKind::Linear),
            "sigmoid" => Ok(ScheduleKind::Sigmoid),
            other => Err(Error::InvalidArgument(format!(
                "unknown schedule kind `{other}` (expected cosine, linear or sigmoid)"
            ))),
        }
    }
}

const COSINE_OFFSET: f64 = 0.008;
const BETA_START: f64 = 1e-4;
const BETA_END: f64 = 2e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    pub kind: ScheduleKind,
    pub steps: usize,
    pub alpha: Vec<f64>,
    pub alpha_bar: Vec<f64>,
}

fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    let step = (end - start) / (n - 1) as f64;
    (0..n).map(|i| start + step * i as f64).collect()
}

pub fn build_schedule(kind: ScheduleKind, steps: usize) -> Result<NoiseSchedule> {
    if steps < 1 {
        return Err(Error::InvalidArgument("schedule needs at least one step".into()));
    }
    let alpha: Vec<f64> = match kind {
        ScheduleKind::Cosine => {
            let f = |t: f64| {
                let c = ((t / steps as f64 + COSINE_OFFSET) / (1.0 + COSINE_OFFSET) * FRAC_PI_2).cos();
                c * c
            };
            let f0 = f(0.0);
            (1..=steps)
                .map(|t| {
                    let ratio = (f(t as f64) / f0) / (f((t - 1) as f64) / f0);
                    ratio.clamp(0.001, 0.999)
                })
                .collect()
        }
        ScheduleKind::Linear => linspace(BETA_START, BETA_END, steps)
            .into_iter()
            .map(|b| 1.0 - b)
            .collect(),
        ScheduleKind::Sigmoid => linspace(-6.0, 6.0, steps)
            .into_iter()
            .map(|l| {
                let sig = 1.0 / (1.0 + (-l).exp());
                1.0 - (sig * (BETA_END - BETA_START) + BETA_START)
            })
            .collect(),
    };
    let mut alpha_bar = Vec::with_capacity(steps);
    let mut acc = 1.0;
    for &a in &alpha {
        acc *= a;
        alpha_bar.push(acc);
    }
    Ok(NoiseSchedule {
        kind,
        steps,
        alpha,
        alpha_bar,
    })
}

impl NoiseSchedule {
    pub fn check_t(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps {
            return Err(Error::TimestepOutOfRange { t, steps: self.steps });
        }
        Ok(())
    }

    /// ᾱ_t for `t ∈ 0..=T`, with ᾱ_0 = 1.
    pub fn alpha_bar_at(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bar[t - 1]
        }
    }

    pub fn alpha_at(&self, t: usize) -> f64 {
        self.alpha[t - 1]
    }

    /// Evenly spaced descending sub-sequence of `n` timesteps
    /// `(i − 1)·T/n + 1` for `i = n..=1`, so the last step is `t = 1`.
    pub fn ddim_timesteps(&self, n: usize) -> Result<Vec<usize>> {
        if n == 0 || n > self.steps {
            return Err(Error::InvalidArgument(format!(
                "DDIM steps must lie in 1..={}, got {n}",
                self.steps
            )));
        }
        Ok((1..=n).rev().map(|i| (i - 1) * self.steps / n + 1).collect())
    }
}

/// `√ᾱ_t · y0 + √(1 − ᾱ_t) · noise`.
pub fn q_sample(y0: ArrayView2<f64>, t: usize, noise: ArrayView2<f64>, schedule: &NoiseSchedule) -> Result<Array2<f64>> {
    schedule.check_t(t)?;
    if y0.dim() != noise.dim() {
        return Err(shape_err(format!("y0 is {:?}, noise is {:?}", y0.dim(), noise.dim())));
    }
    let ab = schedule.alpha_bar_at(t);
    let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
    let mut out = Array2::zeros(y0.dim());
    ndarray::Zip::from(&mut out)
        .and(&y0)
        .and(&noise)
        .for_each(|o, &y, &e| *o = a * y + b * e);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn strictly_decreasing(v: &[f64]) -> bool {
        v.windows(2).all(|w| w[1] < w[0])
    }

    #[test]
    fn cosine_1000_reaches_near_zero() {
        let s = build_schedule(ScheduleKind::Cosine, 1000).unwrap();
        assert!(strictly_decreasing(&s.alpha_bar));
        assert!(s.alpha_bar[999] < 0.01);
        assert!(s.alpha_bar[0] > 0.99);
    }

    #[test]
    fn single_step_schedules() {
        for kind in ScheduleKind::ALL {
            let s = build_schedule(kind, 1).unwrap();
            assert_eq!(s.alpha.len(), 1);
            assert!(s.alpha[0] > 0.0 && s.alpha[0] < 1.0);
        }
        assert!(build_schedule(ScheduleKind::Linear, 0).is_err());
    }

    #[test]
    fn cumulative_product_identity() {
        for kind in ScheduleKind::ALL {
            let s = build_schedule(kind, 100).unwrap();
            for t in 1..100 {
                assert_eq!(s.alpha_bar[t], s.alpha_bar[t - 1] * s.alpha[t]);
            }
        }
    }

    #[test]
    fn ddim_subsequence() {
        let s = build_schedule(ScheduleKind::Cosine, 1000).unwrap();
        let ts = s.ddim_timesteps(100).unwrap();
        assert_eq!(ts.len(), 100);
        assert_eq!((ts[0], ts[99]), (991, 1));
        assert!(s.ddim_timesteps(1001).is_err());
        let s7 = build_schedule(ScheduleKind::Cosine, 7).unwrap();
        let ts = s7.ddim_timesteps(3).unwrap();
        assert_eq!(ts, vec![5, 3, 1]);
    }

    #[test]
    fn q_sample_limits() {
        let s = build_schedule(ScheduleKind::Linear, 10).unwrap();
        let y0 = Array2::from_elem((3, 4), 2.0);
        let noise = Array2::from_elem((3, 4), -1.0);
        let z = q_sample(Array2::zeros((3, 4)).view(), 5, noise.view(), &s).unwrap();
        let scale = (1.0 - s.alpha_bar_at(5)).sqrt();
        assert!(z.iter().all(|v| (*v + scale).abs() < 1e-15));
        // ᾱ = 1 returns y0 untouched
        let clean = NoiseSchedule {
            kind: ScheduleKind::Linear,
            steps: 1,
            alpha: vec![1.0],
            alpha_bar: vec![1.0],
        };
        assert_eq!(q_sample(y0.view(), 1, noise.view(), &clean).unwrap(), y0);
        assert!(q_sample(y0.view(), 11, noise.view(), &s).is_err());
        assert!(q_sample(y0.view(), 1, Array2::zeros((2, 2)).view(), &s).is_err());
    }

    #[test]
    fn q_sample_monte_carlo_moments() {
        let s = build_schedule(ScheduleKind::Cosine, 1000).unwrap();
        let t = 400;
        let ab = s.alpha_bar_at(t);
        let y0 = ndarray::array![[0.5, -1.0], [2.0, 0.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 10_000;
        let mut sum = Array2::<f64>::zeros((2, 2));
        let mut sq = Array2::<f64>::zeros((2, 2));
        for _ in 0..n {
            let e = Array2::from_shape_fn((2, 2), |_| StandardNormal.sample(&mut rng));
            let y = q_sample(y0.view(), t, e.view(), &s).unwrap();
            sum += &y;
            sq += &(&y * &y);
        }
        let mean = &sum / n as f64;
        let var = &sq / n as f64 - &mean * &mean;
        for ((i, j), v) in var.indexed_iter() {
            assert!((v / (1.0 - ab) - 1.0).abs() < 0.05, "var {v}");
            assert!((mean[[i, j]] - ab.sqrt() * y0[[i, j]]).abs() < 0.05);
        }
    }

    proptest! {
        #[test]
        fn schedules_are_monotone(steps in 1usize..400, k in 0u8..3) {
            let s = build_schedule(ScheduleKind::from_id(k).unwrap(), steps).unwrap();
            prop_assert!(strictly_decreasing(&s.alpha_bar));
            prop_assert!(s.alpha_bar.iter().all(|v| *v > 0.0 && *v <= 1.0));
        }

        #[test]
        fn q_sample_is_affine(a in -3.0f64..3.0, b in -3.0f64..3.0, t in 1usize..50) {
            let s = build_schedule(ScheduleKind::Sigmoid, 50).unwrap();
            let y1 = ndarray::array![[1.0, -2.0], [0.5, 3.0]];
            let y2 = ndarray::array![[0.0, 1.0], [-1.5, 2.0]];
            let e1 = ndarray::array![[0.3, 0.1], [-0.7, 1.1]];
            let e2 = ndarray::array![[-1.0, 0.4], [0.2, 0.0]];
            let lhs = q_sample((a * &y1 + b * &y2).view(), t, (a * &e1 + b * &e2).view(), &s).unwrap();
            let rhs = a * &q_sample(y1.view(), t, e1.view(), &s).unwrap()
                + b * &q_sample(y2.view(), t, e2.view(), &s).unwrap();
            for (x, y) in lhs.iter().zip(rhs.iter()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
