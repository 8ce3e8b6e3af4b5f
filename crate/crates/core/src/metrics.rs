//! Diversity and accuracy metrics for sets of predicted futures.
//!
//! A pose is one row (a 3J vector); distances between poses are Euclidean.

use std::fmt::Write as _;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{shape_err, Error, Result};
use crate::exec::{map_indexed, ExecMode};

/// Predictions for one observed history.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub samples: Vec<Array2<f64>>,
    pub gt: Array2<f64>,
    pub mm_gt: Vec<Array2<f64>>,
}

impl PredictionSet {
    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::EmptyInput("prediction samples"));
        }
        let shape = self.gt.dim();
        for m in self.samples.iter().chain(&self.mm_gt) {
            if m.dim() != shape {
                return Err(shape_err(format!("prediction {:?} differs from ground truth {:?}", m.dim(), shape)));
            }
        }
        Ok(())
    }
}

fn flat_dist(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn frame_dists(a: &Array2<f64>, b: ArrayView2<f64>) -> Vec<f64> {
    (a - &b)
        .mapv(|v| v * v)
        .sum_axis(Axis(1))
        .iter()
        .map(|v| v.sqrt())
        .collect()
}

fn check_samples(samples: &[Array2<f64>], gt: ArrayView2<f64>) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("prediction samples"));
    }
    if gt.nrows() == 0 {
        return Err(Error::EmptyInput("ground-truth frames"));
    }
    if let Some(s) = samples.iter().find(|s| s.dim() != gt.dim()) {
        return Err(shape_err(format!("sample {:?} differs from ground truth {:?}", s.dim(), gt.dim())));
    }
    Ok(())
}

/// Mean L2 distance over unordered pairs of flattened samples; 0 when S < 2.
pub fn apd(samples: &[Array2<f64>]) -> f64 {
    let s = samples.len();
    if s < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..s {
        for j in i + 1..s {
            total += flat_dist(&samples[i], &samples[j]);
        }
    }
    total / (s * (s - 1) / 2) as f64
}

/// Smallest over samples of the frame-averaged pose distance to `gt`.
pub fn ade(samples: &[Array2<f64>], gt: ArrayView2<f64>) -> Result<f64> {
    check_samples(samples, gt)?;
    Ok(samples
        .iter()
        .map(|s| {
            let d = frame_dists(s, gt);
            d.iter().sum::<f64>() / d.len() as f64
        })
        .fold(f64::INFINITY, f64::min))
}

/// Smallest over samples of the last-frame pose distance to `gt`.
pub fn fde(samples: &[Array2<f64>], gt: ArrayView2<f64>) -> Result<f64> {
    check_samples(samples, gt)?;
    let last = gt.nrows() - 1;
    Ok(samples
        .iter()
        .map(|s| {
            s.row(last)
                .iter()
                .zip(gt.row(last).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min))
}

fn mm_mean(samples: &[Array2<f64>], mm_gt: &[Array2<f64>], f: fn(&[Array2<f64>], ArrayView2<f64>) -> Result<f64>) -> Result<f64> {
    if mm_gt.is_empty() {
        return Err(Error::EmptyInput("multi-modal ground truth"));
    }
    let mut total = 0.0;
    for g in mm_gt {
        total += f(samples, g.view())?;
    }
    Ok(total / mm_gt.len() as f64)
}

pub fn mmade(samples: &[Array2<f64>], mm_gt: &[Array2<f64>]) -> Result<f64> {
    mm_mean(samples, mm_gt, ade)
}

pub fn mmfde(samples: &[Array2<f64>], mm_gt: &[Array2<f64>]) -> Result<f64> {
    mm_mean(samples, mm_gt, fde)
}

/// Repeats the last observed pose for `future` frames.
pub fn zero_velocity(history: ArrayView2<f64>, future: usize) -> Result<Array2<f64>> {
    let h = history.nrows();
    if h == 0 {
        return Err(Error::EmptyInput("history"));
    }
    let last = history.row(h - 1);
    Ok(Array2::from_shape_fn((future, history.ncols()), |(_, c)| last[c]))
}

/// Frame-averaged pose distance between two equally shaped clips.
pub fn mean_frame_distance(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let d = frame_dists(&a.to_owned(), b);
    d.iter().sum::<f64>() / d.len().max(1) as f64
}

/// For each history, the indices of histories within `tau` of it
/// (by [`mean_frame_distance`]), itself included.
pub fn mm_groups(histories: &[Array2<f64>], tau: f64) -> Vec<Vec<usize>> {
    (0..histories.len())
        .map(|i| {
            (0..histories.len())
                .filter(|&j| i == j || mean_frame_distance(histories[i].view(), histories[j].view()) < tau)
                .collect()
        })
        .collect()
}

/// Averages of the five metrics over evaluation items.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub apd: f64,
    pub ade: f64,
    pub fde: f64,
    pub mmade: f64,
    pub mmfde: f64,
    pub samples: usize,
    pub num_histories: usize,
    pub seed: u64,
}

impl MetricReport {
    pub const HEADER: &'static str = "metric,value,S,num_histories,seed";

    pub fn evaluate(items: &[PredictionSet], seed: u64, mode: ExecMode) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyInput("evaluation items"));
        }
        let rows = map_indexed(mode, items, |_, it| -> Result<[f64; 5]> {
            it.validate()?;
            Ok([
                apd(&it.samples),
                ade(&it.samples, it.gt.view())?,
                fde(&it.samples, it.gt.view())?,
                mmade(&it.samples, &it.mm_gt)?,
                mmfde(&it.samples, &it.mm_gt)?,
            ])
        });
        let mut sums = [0.0; 5];
        for r in rows {
            let r = r?;
            sums.iter_mut().zip(r).for_each(|(s, v)| *s += v);
        }
        let n = items.len() as f64;
        Ok(Self {
            apd: sums[0] / n,
            ade: sums[1] / n,
            fde: sums[2] / n,
            mmade: sums[3] / n,
            mmfde: sums[4] / n,
            samples: items[0].samples.len(),
            num_histories: items.len(),
            seed,
        })
    }

    pub fn rows(&self) -> [(&'static str, f64); 5] {
        [
            ("apd", self.apd),
            ("ade", self.ade),
            ("fde", self.fde),
            ("mmade", self.mmade),
            ("mmfde", self.mmfde),
        ]
    }

    /// CSV text: a convention comment, the header, one row per metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# apd_convention=unordered_pairs\n");
        out.push_str(Self::HEADER);
        out.push('\n');
        for (name, value) in self.rows() {
            let _ = writeln!(out, "{name},{value},{},{},{}", self.samples, self.num_histories, self.seed);
        }
        out
    }
}
