//! Motion sequences and their wavelet-manifold representation.
//!
//! A manifold is the four 2-D DWT subbands laid side by side along the
//! feature axis in the order LL, HL, LH, HH, giving a K × 4D matrix: a
//! length-K sequence of 4D-dimensional feature vectors.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};

use crate::error::{shape_err, Error, Result};
use crate::wavelet::{dwt2d, idwt2d, Subbands2D, WaveletBasis};

/// Joint coordinates, one row per frame, columns ordered (joint, axis).
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    pub data: Array2<f64>,
    pub fps: f64,
    pub joints: usize,
}

impl MotionSequence {
    pub fn new(data: Array2<f64>, fps: f64) -> Result<Self> {
        let cols = data.ncols();
        if cols == 0 || !cols.is_multiple_of(3) {
            return Err(shape_err(format!("motion has {cols} columns, expected a positive multiple of 3")));
        }
        if let Some(((i, j), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("motion entry at frame {i}, channel {j}")));
        }
        Ok(Self {
            joints: cols / 3,
            data,
            fps,
        })
    }

    pub fn frames(&self) -> usize {
        self.data.nrows()
    }

    pub fn channels(&self) -> usize {
        self.data.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletManifold {
    pub data: Array2<f64>,
    pub original_shape: (usize, usize),
    pub basis_name: String,
}

/// Manifold shape (K, 4D) for a motion of `frames × channels`.
pub fn manifold_shape(frames: usize, channels: usize, basis: &WaveletBasis) -> (usize, usize) {
    let (k, d) = basis.subband_shape(frames, channels);
    (k, 4 * d)
}

/// DWT of a raw matrix, concatenated as (LL, HL, LH, HH).
pub fn encode_matrix(x: ArrayView2<f64>, basis: &WaveletBasis) -> Result<Array2<f64>> {
    let sb = dwt2d(x, basis)?;
    Ok(concatenate(
        Axis(1),
        &[sb.ll.view(), sb.hl.view(), sb.lh.view(), sb.hh.view()],
    )
    .expect("subbands share a shape"))
}

/// Inverse of [`encode_matrix`] for a motion of `original_shape`.
pub fn decode_matrix(y: ArrayView2<f64>, original_shape: (usize, usize), basis: &WaveletBasis) -> Result<Array2<f64>> {
    let (k, cols) = y.dim();
    if cols % 4 != 0 {
        return Err(shape_err(format!("manifold has {cols} columns, not divisible by 4")));
    }
    let d = cols / 4;
    let expected = basis.subband_shape(original_shape.0, original_shape.1);
    if (k, d) != expected {
        return Err(shape_err(format!(
            "manifold subbands are {k}x{d}, `{}` expects {}x{} for motion {}x{}",
            basis.name, expected.0, expected.1, original_shape.0, original_shape.1
        )));
    }
    let band = |i: usize| y.slice(s![.., i * d..(i + 1) * d]).to_owned();
    let sb = Subbands2D {
        ll: band(0),
        hl: band(1),
        lh: band(2),
        hh: band(3),
        original_shape,
    };
    idwt2d(&sb, basis)
}

pub fn encode(motion: &MotionSequence, basis: &WaveletBasis) -> Result<WaveletManifold> {
    Ok(WaveletManifold {
        data: encode_matrix(motion.data.view(), basis)?,
        original_shape: motion.data.dim(),
        basis_name: basis.name.clone(),
    })
}

pub fn decode(manifold: &WaveletManifold, basis: &WaveletBasis, fps: f64) -> Result<MotionSequence> {
    if manifold.basis_name != basis.name {
        return Err(Error::InvalidArgument(format!(
            "manifold was encoded with `{}`, decode called with `{}`",
            manifold.basis_name, basis.name
        )));
    }
    let x = decode_matrix(manifold.data.view(), manifold.original_shape, basis)?;
    MotionSequence::new(x, fps)
}

/// Extends an observed history to `total_frames` by repeating its last frame.
pub fn pad_history(history: ArrayView2<f64>, total_frames: usize, fps: f64) -> Result<MotionSequence> {
    let h = history.nrows();
    if h == 0 {
        return Err(Error::EmptyInput("history"));
    }
    if h >= total_frames {
        return Err(Error::InvalidArgument(format!(
            "history has {h} frames, must be shorter than the {total_frames}-frame window"
        )));
    }
    let last = history.row(h - 1);
    let mut out = Array2::zeros((total_frames, history.ncols()));
    out.slice_mut(s![..h, ..]).assign(&history);
    for mut row in out.rows_mut().into_iter().skip(h) {
        row.assign(&last);
    }
    MotionSequence::new(out, fps)
}

/// Per-channel standardisation statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl NormStats {
    pub fn identity(channels: usize) -> Self {
        Self {
            mean: Array1::zeros(channels),
            std: Array1::ones(channels),
        }
    }

    /// Mean and standard deviation over all frames of all clips. Channels
    /// with (near) zero spread keep unit scale.
    pub fn fit<'a>(clips: impl IntoIterator<Item = ArrayView2<'a, f64>>) -> Result<Self> {
        let mut sum: Option<Array1<f64>> = None;
        let mut sq: Option<Array1<f64>> = None;
        let mut n = 0usize;
        for clip in clips {
            let s1 = clip.sum_axis(Axis(0));
            let s2 = clip.mapv(|v| v * v).sum_axis(Axis(0));
            match (&mut sum, &mut sq) {
                (Some(a), Some(b)) => {
                    if a.len() != s1.len() {
                        return Err(shape_err("clips with different channel counts"));
                    }
                    *a += &s1;
                    *b += &s2;
                }
                _ => {
                    sum = Some(s1);
                    sq = Some(s2);
                }
            }
            n += clip.nrows();
        }
        let (sum, sq) = match (sum, sq) {
            (Some(a), Some(b)) if n > 0 => (a, b),
            _ => return Err(Error::EmptyInput("normalisation corpus")),
        };
        let mean = &sum / n as f64;
        let var = &sq / n as f64 - &mean * &mean;
        let std = var.mapv(|v| if v > 1e-12 { v.sqrt() } else { 1.0 });
        Ok(Self { mean, std })
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, x: ArrayView2<f64>) -> Array2<f64> {
        (&x - &self.mean) / &self.std
    }

    pub fn denormalize(&self, x: ArrayView2<f64>) -> Array2<f64> {
        &x * &self.std + &self.mean
    }
}
