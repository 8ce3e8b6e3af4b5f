//! Single-level filter-bank DWT / iDWT in one and two dimensions.
//!
//! Index convention (zero padding outside the signal):
//!
//! ```text
//! a[k] = Σ_n h[n] · x[2k + 1 − n]        k = 0 .. ⌊(N + l − 1) / 2⌋
//! d[k] = Σ_n g[n] · x[2k + 1 − n]
//! x[n] = Σ_m h'[n + l − 2 − 2m] · a[m] + Σ_m g'[n + l − 2 − 2m] · d[m]
//! ```
//!
//! i.e. the odd phase of the full linear convolution is kept on analysis and
//! the `l − 2` leading samples of the up-sampled synthesis are dropped. With
//! these phases every supported filter bank reconstructs exactly.

mod tables;

use ndarray::{Array2, ArrayView2};

use crate::error::{shape_err, Error, Result};

/// Boundary handling for the analysis filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Padding {
    #[default]
    Zero,
}

/// The four filters of a two-channel filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBasis {
    pub name: String,
    pub dec_lo: Vec<f64>,
    pub dec_hi: Vec<f64>,
    pub rec_lo: Vec<f64>,
    pub rec_hi: Vec<f64>,
    pub orthogonal: bool,
}

impl WaveletBasis {
    /// Filter length `l`, the maximum over the four filters.
    pub fn len(&self) -> usize {
        self.dec_lo
            .len()
            .max(self.dec_hi.len())
            .max(self.rec_lo.len())
            .max(self.rec_hi.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of coefficients per band for a signal of length `n`.
    pub fn band_len(&self, n: usize) -> usize {
        (n + self.len() - 1) / 2
    }

    /// Subband shape (K, D) for a `rows × cols` input.
    pub fn subband_shape(&self, rows: usize, cols: usize) -> (usize, usize) {
        (self.band_len(rows), self.band_len(cols))
    }
}

/// Names accepted by [`make_basis`].
pub fn supported_bases() -> Vec<&'static str> {
    tables::TABLES.iter().map(|t| t.name).collect()
}

pub fn make_basis(name: &str) -> Result<WaveletBasis> {
    let key = name.trim().to_ascii_lowercase();
    let table = tables::TABLES
        .iter()
        .find(|t| t.name == key)
        .ok_or_else(|| Error::UnsupportedBasis {
            name: name.to_string(),
            supported: supported_bases().join(", "),
        })?;
    Ok(WaveletBasis {
        name: table.name.to_string(),
        dec_lo: table.dec_lo.to_vec(),
        dec_hi: table.dec_hi.to_vec(),
        rec_lo: table.rec_lo.to_vec(),
        rec_hi: table.rec_hi.to_vec(),
        orthogonal: table.orthogonal,
    })
}

/// Analysis of one contiguous signal into preallocated band buffers.
fn analyze(x: &[f64], lo: &[f64], hi: &[f64], a: &mut [f64], d: &mut [f64]) {
    let n_len = x.len() as isize;
    let flen = lo.len() as isize;
    for k in 0..a.len() {
        let centre = 2 * k as isize + 1;
        // x index centre - n must lie in [0, N)
        let n_lo = (centre - n_len + 1).max(0);
        let n_hi = centre.min(flen - 1);
        let mut sa = 0.0;
        let mut sd = 0.0;
        let mut n = n_lo;
        while n <= n_hi {
            let xv = x[(centre - n) as usize];
            sa += lo[n as usize] * xv;
            sd += hi[n as usize] * xv;
            n += 1;
        }
        a[k] = sa;
        d[k] = sd;
    }
}

/// Synthesis of one signal of length `out.len()` from its two bands.
fn synthesize(a: &[f64], d: &[f64], lo: &[f64], hi: &[f64], out: &mut [f64]) {
    let shift = lo.len() as isize - 2;
    let flen = lo.len() as isize;
    let bands = a.len() as isize;
    for (n, slot) in out.iter_mut().enumerate() {
        let p = n as isize + shift;
        // filter index p - 2m must lie in [0, l)
        let excess = p - flen + 1;
        let m_lo = if excess > 0 { (excess + 1) / 2 } else { 0 };
        let m_hi = (p / 2).min(bands - 1);
        let mut s = 0.0;
        let mut m = m_lo;
        while m <= m_hi {
            let f = (p - 2 * m) as usize;
            s += lo[f] * a[m as usize] + hi[f] * d[m as usize];
            m += 1;
        }
        *slot = s;
    }
}

pub fn dwt1d(signal: &[f64], basis: &WaveletBasis, padding: Padding) -> Result<(Vec<f64>, Vec<f64>)> {
    let Padding::Zero = padding;
    if signal.is_empty() {
        return Err(Error::EmptyInput("dwt1d signal"));
    }
    let k = basis.band_len(signal.len());
    let mut a = vec![0.0; k];
    let mut d = vec![0.0; k];
    analyze(signal, &basis.dec_lo, &basis.dec_hi, &mut a, &mut d);
    Ok((a, d))
}

fn check_target(bands: usize, target_len: usize, basis: &WaveletBasis) -> Result<()> {
    if target_len == 0 || basis.band_len(target_len) != bands {
        return Err(shape_err(format!(
            "target length {target_len} is inconsistent with {bands} coefficients per band for `{}` (l = {})",
            basis.name,
            basis.len()
        )));
    }
    Ok(())
}

pub fn idwt1d(a: &[f64], d: &[f64], basis: &WaveletBasis, target_len: usize) -> Result<Vec<f64>> {
    if a.len() != d.len() {
        return Err(shape_err(format!(
            "approximation has {} coefficients, detail has {}",
            a.len(),
            d.len()
        )));
    }
    check_target(a.len(), target_len, basis)?;
    let mut out = vec![0.0; target_len];
    synthesize(a, d, &basis.rec_lo, &basis.rec_hi, &mut out);
    Ok(out)
}

/// The four single-level subbands of a 2-D transform.
///
/// The first letter names the filter applied along rows (time), the second
/// the filter applied along columns (channels): `lh` is low-pass in time and
/// high-pass across channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Subbands2D {
    pub ll: Array2<f64>,
    pub lh: Array2<f64>,
    pub hl: Array2<f64>,
    pub hh: Array2<f64>,
    pub original_shape: (usize, usize),
}

impl Subbands2D {
    pub fn shape(&self) -> (usize, usize) {
        self.ll.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.ll.dim();
        for (name, band) in [("lh", &self.lh), ("hl", &self.hl), ("hh", &self.hh)] {
            if band.dim() != s {
                return Err(shape_err(format!(
                    "subband {name} is {:?}, ll is {:?}",
                    band.dim(),
                    s
                )));
            }
        }
        Ok(())
    }
}

/// Transforms every column of `x` along axis 0.
fn analyze_columns(x: ArrayView2<f64>, basis: &WaveletBasis) -> (Array2<f64>, Array2<f64>) {
    let (rows, cols) = x.dim();
    let k = basis.band_len(rows);
    let mut lo = Array2::zeros((k, cols));
    let mut hi = Array2::zeros((k, cols));
    let mut col = vec![0.0; rows];
    let mut a = vec![0.0; k];
    let mut d = vec![0.0; k];
    for j in 0..cols {
        for (dst, v) in col.iter_mut().zip(x.column(j)) {
            *dst = *v;
        }
        analyze(&col, &basis.dec_lo, &basis.dec_hi, &mut a, &mut d);
        for i in 0..k {
            lo[[i, j]] = a[i];
            hi[[i, j]] = d[i];
        }
    }
    (lo, hi)
}

/// Transforms every row of `x` along axis 1.
fn analyze_rows(x: &Array2<f64>, basis: &WaveletBasis) -> (Array2<f64>, Array2<f64>) {
    let (rows, cols) = x.dim();
    let k = basis.band_len(cols);
    let mut lo = Array2::zeros((rows, k));
    let mut hi = Array2::zeros((rows, k));
    for i in 0..rows {
        let row = x.row(i);
        let row = row.as_slice().expect("standard layout");
        let a = lo.row_mut(i).into_slice().expect("standard layout");
        let d = hi.row_mut(i).into_slice().expect("standard layout");
        analyze(row, &basis.dec_lo, &basis.dec_hi, a, d);
    }
    (lo, hi)
}

pub fn dwt2d(matrix: ArrayView2<f64>, basis: &WaveletBasis) -> Result<Subbands2D> {
    let (rows, cols) = matrix.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyInput("dwt2d matrix"));
    }
    let (lo_t, hi_t) = analyze_columns(matrix, basis);
    let (ll, lh) = analyze_rows(&lo_t, basis);
    let (hl, hh) = analyze_rows(&hi_t, basis);
    Ok(Subbands2D {
        ll,
        lh,
        hl,
        hh,
        original_shape: (rows, cols),
    })
}

fn synthesize_rows(lo: &Array2<f64>, hi: &Array2<f64>, basis: &WaveletBasis, cols: usize) -> Array2<f64> {
    let rows = lo.nrows();
    let mut out = Array2::zeros((rows, cols));
    let mut a = vec![0.0; lo.ncols()];
    let mut d = vec![0.0; lo.ncols()];
    for i in 0..rows {
        for (dst, v) in a.iter_mut().zip(lo.row(i)) {
            *dst = *v;
        }
        for (dst, v) in d.iter_mut().zip(hi.row(i)) {
            *dst = *v;
        }
        let slot = out.row_mut(i).into_slice().expect("standard layout");
        synthesize(&a, &d, &basis.rec_lo, &basis.rec_hi, slot);
    }
    out
}

fn synthesize_columns(lo: &Array2<f64>, hi: &Array2<f64>, basis: &WaveletBasis, rows: usize) -> Array2<f64> {
    let (k, cols) = lo.dim();
    let mut out = Array2::zeros((rows, cols));
    let mut a = vec![0.0; k];
    let mut d = vec![0.0; k];
    let mut col = vec![0.0; rows];
    for j in 0..cols {
        for i in 0..k {
            a[i] = lo[[i, j]];
            d[i] = hi[[i, j]];
        }
        synthesize(&a, &d, &basis.rec_lo, &basis.rec_hi, &mut col);
        out.column_mut(j)
            .iter_mut()
            .zip(&col)
            .for_each(|(o, v)| *o = *v);
    }
    out
}

pub fn idwt2d(subbands: &Subbands2D, basis: &WaveletBasis) -> Result<Array2<f64>> {
    subbands.validate()?;
    let (rows, cols) = subbands.original_shape;
    let (k, d) = subbands.shape();
    check_target(k, rows, basis)?;
    check_target(d, cols, basis)?;
    let lo_t = synthesize_rows(&subbands.ll, &subbands.lh, basis, cols);
    let hi_t = synthesize_rows(&subbands.hl, &subbands.hh, basis, cols);
    Ok(synthesize_columns(&lo_t, &hi_t, basis, rows))
}

/// Root-mean-square difference between two equally shaped arrays.
pub fn rmse(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    let n = a.len().max(1) as f64;
    let ss: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / n).sqrt()
}
