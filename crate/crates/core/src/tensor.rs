//! Tensorization of long filters and the dense tensor algebra behind the
//! spectral decomposition: mode-n unfolding, mode products, outer products,
//! and the Frobenius norm.
//!
//! A filter of length l^K maps bijectively onto a K-way tensor with every
//! mode of size l: the value at time t lands at the multi-index given by the
//! base-l digits of t, least-significant digit first. Mode j therefore
//! carries the layer j-1 filter of a stacked dilated network.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Dense matrix (row-major)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

// ---------------------------------------------------------------------------
// Dense K-way tensor with all modes of size l
// ---------------------------------------------------------------------------

/// Flat layout: the mode-1 digit runs fastest, so the linear index of the
/// multi-index (a_1, ..., a_K) is sum_j a_j l^(j-1).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    mode_size: usize,
    order: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(mode_size: usize, order: usize) -> Result<Self> {
        check_geometry(mode_size, order)?;
        let len = mode_size.checked_pow(order as u32).ok_or_else(|| {
            Error::InvalidParameter(format!("tensor size {mode_size}^{order} overflows"))
        })?;
        Ok(Self {
            mode_size,
            order,
            data: vec![0.0; len],
        })
    }

    pub fn from_data(mode_size: usize, order: usize, data: Vec<f64>) -> Result<Self> {
        let mut t = Self::zeros(mode_size, order)?;
        if data.len() != t.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries, got {}",
                t.data.len(),
                data.len()
            )));
        }
        t.data = data;
        Ok(t)
    }

    pub fn mode_size(&self) -> usize {
        self.mode_size
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_entries(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Entry at a full multi-index (one digit per mode, each in 0..l).
    pub fn get(&self, index: &[usize]) -> f64 {
        debug_assert_eq!(index.len(), self.order);
        self.data[self.linear_index(index)]
    }

    fn linear_index(&self, index: &[usize]) -> usize {
        let mut t = 0;
        let mut stride = 1;
        for &a in index {
            t += a * stride;
            stride *= self.mode_size;
        }
        t
    }

    /// Base-l digits of a linear index, mode-1 digit first.
    pub fn digits(&self, mut t: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order);
        for _ in 0..self.order {
            out.push(t % self.mode_size);
            t /= self.mode_size;
        }
        out
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.mode_size != other.mode_size || self.order != other.order {
            return Err(Error::ShapeMismatch("tensor shapes differ".into()));
        }
        Ok(DenseTensor {
            mode_size: self.mode_size,
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub(crate) fn add_scaled_in_place(&mut self, other: &DenseTensor, scale: f64) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }
}

fn check_geometry(mode_size: usize, order: usize) -> Result<()> {
    if mode_size < 2 {
        return Err(Error::InvalidParameter(format!(
            "mode size must be >= 2, got {mode_size}"
        )));
    }
    if order < 1 {
        return Err(Error::InvalidParameter("tensor order must be >= 1".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tensorization
// ---------------------------------------------------------------------------

/// Reshape a filter supported on [0, l^K) into a K-way tensor: the entry at
/// multi-index (a_1, ..., a_K) is the filter value at sum_j a_j l^(j-1).
/// Shorter inputs are zero-padded to exactly l^K.
pub fn tensorize(channel: &[f64], mode_size: usize, order: usize) -> Result<DenseTensor> {
    let mut t = DenseTensor::zeros(mode_size, order)?;
    if channel.len() > t.data.len() {
        return Err(Error::ShapeMismatch(format!(
            "filter of length {} exceeds {mode_size}^{order}",
            channel.len()
        )));
    }
    t.data[..channel.len()].copy_from_slice(channel);
    Ok(t)
}

/// Exact inverse of [`tensorize`]: read the tensor back as a filter of
/// length l^K.
pub fn detensorize(a: &DenseTensor) -> Vec<f64> {
    a.data.clone()
}

/// Mode-n matricization: rows indexed by the mode digit, columns by the
/// remaining digits in ascending mode order.
pub fn unfold(a: &DenseTensor, mode: usize) -> Result<Matrix> {
    check_mode(a, mode)?;
    let l = a.mode_size;
    let cols = a.data.len() / l;
    let mut m = Matrix::zeros(l, cols);
    for (t, &v) in a.data.iter().enumerate() {
        let (row, col) = split_index(a, t, mode);
        m.set(row, col, v);
    }
    Ok(m)
}

/// Exact inverse of [`unfold`].
pub fn fold(m: &Matrix, mode: usize, mode_size: usize, order: usize) -> Result<DenseTensor> {
    let mut a = DenseTensor::zeros(mode_size, order)?;
    check_mode(&a, mode)?;
    if m.rows() != mode_size || m.cols() != a.data.len() / mode_size {
        return Err(Error::ShapeMismatch(format!(
            "cannot fold {}x{} into mode {mode} of an order-{order} tensor",
            m.rows(),
            m.cols()
        )));
    }
    for t in 0..a.data.len() {
        let (row, col) = split_index(&a, t, mode);
        a.data[t] = m.get(row, col);
    }
    Ok(a)
}

fn check_mode(a: &DenseTensor, mode: usize) -> Result<()> {
    if mode < 1 || mode > a.order {
        return Err(Error::InvalidParameter(format!(
            "mode {mode} out of range 1..={}",
            a.order
        )));
    }
    Ok(())
}

/// Row and column of linear index `t` in the mode-n unfolding.
fn split_index(a: &DenseTensor, t: usize, mode: usize) -> (usize, usize) {
    let digits = a.digits(t);
    let row = digits[mode - 1];
    let mut col = 0;
    let mut stride = 1;
    for (j, &d) in digits.iter().enumerate() {
        if j == mode - 1 {
            continue;
        }
        col += d * stride;
        stride *= a.mode_size;
    }
    (row, col)
}

/// Multiply along one mode by a square l x l matrix:
/// fold(U * unfold(A, mode), mode). Rectangular factors are out of scope
/// since every mode keeps size l.
pub fn mode_product(a: &DenseTensor, u: &Matrix, mode: usize) -> Result<DenseTensor> {
    if u.cols() != a.mode_size || u.rows() != a.mode_size {
        return Err(Error::ShapeMismatch(format!(
            "mode product needs a {l}x{l} factor, got {}x{}",
            u.rows(),
            u.cols(),
            l = a.mode_size
        )));
    }
    let unfolded = unfold(a, mode)?;
    let product = u.matmul(&unfolded)?;
    fold(&product, mode, a.mode_size, a.order)
}

/// Rank-one tensor from K factor vectors listed outermost layer first:
/// outer_product([w_{K-1}, ..., w_0]) places w_0 on mode 1 (the
/// least-significant digit), matching the tensorization of a single-channel
/// network's effective filter.
pub fn outer_product(factors: &[Vec<f64>]) -> Result<DenseTensor> {
    let order = factors.len();
    if order == 0 {
        return Err(Error::InvalidParameter("need at least one factor".into()));
    }
    let l = factors[0].len();
    if factors.iter().any(|f| f.len() != l) {
        return Err(Error::ShapeMismatch("factor lengths differ".into()));
    }
    let mut t = DenseTensor::zeros(l, order)?;
    for idx in 0..t.data.len() {
        let digits = t.digits(idx);
        let mut v = 1.0;
        for (j, &a) in digits.iter().enumerate() {
            // digit j belongs to mode j+1, whose factor is listed last-first
            v *= factors[order - 1 - j][a];
        }
        t.data[idx] = v;
    }
    Ok(t)
}

pub fn frobenius(a: &DenseTensor) -> f64 {
    a.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}
