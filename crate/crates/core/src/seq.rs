//! Finitely supported sequences, causal dilated convolution, and evaluation
//! of linear functionals through their kernel representation.
//!
//! A functional H_t acting on vector sequences is represented by a kernel
//! rho (one scalar sequence per input dimension, supported on [0, T)) via
//! H_t(x) = sum_s rho(s)' x(t - s). The worst-case error between two
//! functionals over the unit ball of inputs equals the l2 distance of their
//! kernels; the mean-square error under iid standard normal inputs equals
//! the squared l2 distance.
//!
//! All sums accumulate in ascending time-index order in f64, so results are
//! deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

// ---------------------------------------------------------------------------
// Scalar sequences
// ---------------------------------------------------------------------------

/// A finitely supported scalar sequence. Values outside the stored window
/// are implicitly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSeq {
    start: i64,
    values: Vec<f64>,
}

impl ScalarSeq {
    pub fn new(start: i64, values: Vec<f64>) -> Self {
        Self { start, values }
    }

    /// The empty (identically zero) sequence.
    pub fn zero() -> Self {
        Self {
            start: 0,
            values: Vec::new(),
        }
    }

    /// Unit impulse at time `at`.
    pub fn delta(at: i64) -> Self {
        Self {
            start: at,
            values: vec![1.0],
        }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Exclusive end of the stored window.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, t: i64) -> f64 {
        if t < self.start || t >= self.end() {
            0.0
        } else {
            self.values[(t - self.start) as usize]
        }
    }

    /// Pointwise sum over the union of supports.
    pub fn add(&self, other: &ScalarSeq) -> ScalarSeq {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let start = self.start.min(other.start);
        let end = self.end().max(other.end());
        let mut values = vec![0.0; (end - start) as usize];
        for (i, v) in values.iter_mut().enumerate() {
            let t = start + i as i64;
            *v = self.get(t) + other.get(t);
        }
        ScalarSeq { start, values }
    }

    pub fn scale(&self, c: f64) -> ScalarSeq {
        ScalarSeq {
            start: self.start,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Copy the window [from, from + len) into a fresh sequence starting at
    /// `from` (entries outside the stored support read as zero).
    pub fn window(&self, from: i64, len: usize) -> ScalarSeq {
        let values = (0..len).map(|i| self.get(from + i as i64)).collect();
        ScalarSeq {
            start: from,
            values,
        }
    }
}

/// Causal dilated convolution of a filter with a scalar signal:
/// out(t) = sum_{s >= 0} filter(s) * signal(t - dilation * s).
///
/// The filter taps sit at times 0..filter.len(); the output support is
/// contained in [signal.start, signal.end + dilation * (filter.len - 1)].
pub fn dilated_convolve(filter: &[f64], signal: &ScalarSeq, dilation: usize) -> Result<ScalarSeq> {
    if dilation == 0 {
        return Err(Error::InvalidParameter(
            "dilation rate must be at least 1".into(),
        ));
    }
    if filter.is_empty() || signal.is_empty() {
        return Ok(ScalarSeq::zero());
    }
    let start = signal.start();
    let len = signal.len() + dilation * (filter.len() - 1);
    let mut values = vec![0.0; len];
    for (i, out) in values.iter_mut().enumerate() {
        let t = start + i as i64;
        let mut acc = 0.0;
        for (s, w) in filter.iter().enumerate() {
            acc += w * signal.get(t - (dilation * s) as i64);
        }
        *out = acc;
    }
    Ok(ScalarSeq { start, values })
}

/// Vector-valued variant: out(t) = sum_{s >= 0} filter(s)' signal(t - dilation*s),
/// with `filter[s]` a d-dimensional tap.
pub fn dilated_convolve_vec(
    filter: &[Vec<f64>],
    signal: &VectorSeq,
    dilation: usize,
) -> Result<ScalarSeq> {
    if dilation == 0 {
        return Err(Error::InvalidParameter(
            "dilation rate must be at least 1".into(),
        ));
    }
    if filter.is_empty() || signal.steps() == 0 {
        return Ok(ScalarSeq::zero());
    }
    let d = filter[0].len();
    if d != signal.dim() {
        return Err(Error::DimensionMismatch(d, signal.dim()));
    }
    if filter.iter().any(|tap| tap.len() != d) {
        return Err(Error::ShapeMismatch("ragged vector filter".into()));
    }
    let start = signal.start();
    let len = signal.steps() + dilation * (filter.len() - 1);
    let mut values = vec![0.0; len];
    for (i, out) in values.iter_mut().enumerate() {
        let t = start + i as i64;
        let mut acc = 0.0;
        for (s, tap) in filter.iter().enumerate() {
            let u = t - (dilation * s) as i64;
            for (j, w) in tap.iter().enumerate() {
                acc += w * signal.component(u, j);
            }
        }
        *out = acc;
    }
    Ok(ScalarSeq { start, values })
}

// ---------------------------------------------------------------------------
// Vector sequences
// ---------------------------------------------------------------------------

/// A finitely supported sequence of d-dimensional real vectors (time-major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorSeq {
    d: usize,
    start: i64,
    values: Vec<Vec<f64>>,
}

impl VectorSeq {
    pub fn new(start: i64, values: Vec<Vec<f64>>) -> Result<Self> {
        let d = match values.first() {
            Some(v) => v.len(),
            None => {
                return Err(Error::InvalidParameter(
                    "vector sequence needs at least one step; use `empty` for the zero input"
                        .into(),
                ))
            }
        };
        if d == 0 {
            return Err(Error::InvalidParameter("entry dimension must be >= 1".into()));
        }
        if values.iter().any(|v| v.len() != d) {
            return Err(Error::ShapeMismatch("ragged vector sequence".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite entry".into()));
        }
        Ok(Self { d, start, values })
    }

    pub fn empty(d: usize) -> Self {
        Self {
            d,
            start: 0,
            values: Vec::new(),
        }
    }

    /// Canonical basis impulse: e_dim at time `at`, zero elsewhere.
    pub fn impulse(d: usize, dim: usize, at: i64) -> Result<Self> {
        if dim >= d {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} out of range for d = {d}"
            )));
        }
        let mut v = vec![0.0; d];
        v[dim] = 1.0;
        Ok(Self {
            d,
            start: at,
            values: vec![v],
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn component(&self, t: i64, j: usize) -> f64 {
        if t < self.start || t >= self.end() {
            0.0
        } else {
            self.values[(t - self.start) as usize][j]
        }
    }

    /// The j-th coordinate as a scalar sequence.
    pub fn channel(&self, j: usize) -> Result<ScalarSeq> {
        if j >= self.d {
            return Err(Error::InvalidParameter(format!(
                "channel {j} out of range for d = {}",
                self.d
            )));
        }
        Ok(ScalarSeq {
            start: self.start,
            values: self.values.iter().map(|v| v[j]).collect(),
        })
    }

    /// Time shift: the result satisfies shifted(s) = self(s - tau).
    pub fn shift(&self, tau: i64) -> VectorSeq {
        VectorSeq {
            d: self.d,
            start: self.start + tau,
            values: self.values.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> VectorSeq {
        VectorSeq {
            d: self.d,
            start: self.start,
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|x| x * c).collect())
                .collect(),
        }
    }

    /// Pointwise sum over the union of supports.
    pub fn add(&self, other: &VectorSeq) -> Result<VectorSeq> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(self.d, other.d));
        }
        if self.steps() == 0 {
            return Ok(other.clone());
        }
        if other.steps() == 0 {
            return Ok(self.clone());
        }
        let start = self.start.min(other.start);
        let end = self.end().max(other.end());
        let values = (0..(end - start))
            .map(|i| {
                let t = start + i;
                (0..self.d)
                    .map(|j| self.component(t, j) + other.component(t, j))
                    .collect()
            })
            .collect();
        Ok(VectorSeq {
            d: self.d,
            start,
            values,
        })
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Deterministic sequence of iid standard normal entries.
    pub fn random_normal(d: usize, start: i64, steps: usize, rng: &mut SplitMix64) -> Self {
        let values = (0..steps)
            .map(|_| (0..d).map(|_| rng.next_normal()).collect())
            .collect();
        Self { d, start, values }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: VectorSeq = serde_json::from_str(text)?;
        if raw.values.is_empty() {
            if raw.d == 0 {
                return Err(Error::InvalidParameter("entry dimension must be >= 1".into()));
            }
            return Ok(Self::empty(raw.d));
        }
        let validated = Self::new(raw.start, raw.values)?;
        if validated.d != raw.d {
            return Err(Error::ShapeMismatch(format!(
                "input json declares d = {} but entries have dimension {}",
                raw.d, validated.d
            )));
        }
        Ok(validated)
    }
}

// ---------------------------------------------------------------------------
// Functional kernels
// ---------------------------------------------------------------------------

/// The kernel of a causal, linear, time-homogeneous functional on vector
/// sequences: one scalar sequence per input dimension, all supported on
/// [0, T) for a shared finite horizon T.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalKernel {
    d: usize,
    channels: Vec<Vec<f64>>,
}

impl FunctionalKernel {
    pub fn new(channels: Vec<Vec<f64>>) -> Result<Self> {
        let d = channels.len();
        if d == 0 {
            return Err(Error::InvalidParameter(
                "kernel needs at least one channel".into(),
            ));
        }
        let horizon = channels[0].len();
        if channels.iter().any(|c| c.len() != horizon) {
            return Err(Error::ShapeMismatch(
                "kernel channels must share one horizon".into(),
            ));
        }
        if channels.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite kernel entry".into()));
        }
        Ok(Self { d, channels })
    }

    /// Scalar (d = 1) kernel from a single channel.
    pub fn scalar(channel: Vec<f64>) -> Result<Self> {
        Self::new(vec![channel])
    }

    /// Scalar unit impulse at lag `at` (horizon at + 1).
    pub fn delta(at: usize) -> Self {
        let mut channel = vec![0.0; at + 1];
        channel[at] = 1.0;
        Self {
            d: 1,
            channels: vec![channel],
        }
    }

    pub fn zeros(d: usize, horizon: usize) -> Result<Self> {
        Self::new(vec![vec![0.0; horizon]; d.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.channels[0].len()
    }

    pub fn channel(&self, j: usize) -> &[f64] {
        &self.channels[j]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn get(&self, j: usize, s: usize) -> f64 {
        if j >= self.d || s >= self.horizon() {
            0.0
        } else {
            self.channels[j][s]
        }
    }

    /// Restriction to lags [0, n), zero-padded to exactly length n.
    pub fn restrict(&self, n: usize) -> FunctionalKernel {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let mut out = vec![0.0; n];
                let keep = c.len().min(n);
                out[..keep].copy_from_slice(&c[..keep]);
                out
            })
            .collect();
        FunctionalKernel {
            d: self.d,
            channels,
        }
    }

    pub fn sub(&self, other: &FunctionalKernel) -> Result<FunctionalKernel> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(self.d, other.d));
        }
        let horizon = self.horizon().max(other.horizon());
        let channels = (0..self.d)
            .map(|j| {
                (0..horizon)
                    .map(|s| self.get(j, s) - other.get(j, s))
                    .collect()
            })
            .collect();
        Ok(FunctionalKernel {
            d: self.d,
            channels,
        })
    }

    pub fn scale(&self, c: f64) -> FunctionalKernel {
        FunctionalKernel {
            d: self.d,
            channels: self
                .channels
                .iter()
                .map(|ch| ch.iter().map(|v| v * c).collect())
                .collect(),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.horizon() {
            for j in 0..self.d {
                let v = self.channels[j][s];
                acc += v * v;
            }
        }
        acc
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FunctionalKernel = serde_json::from_str(text)?;
        if raw.d != raw.channels.len() {
            return Err(Error::ShapeMismatch(format!(
                "kernel json declares d = {} but has {} channels",
                raw.d,
                raw.channels.len()
            )));
        }
        Self::new(raw.channels)
    }
}

// ---------------------------------------------------------------------------
// Functional evaluation and error norms
// ---------------------------------------------------------------------------

/// Evaluate the functional represented by `rho` on input `x` at time `t`:
/// sum_{s} rho(s)' x(t - s), an exact finite sum over the overlap of supports.
pub fn apply_functional(rho: &FunctionalKernel, x: &VectorSeq, t: i64) -> Result<f64> {
    if rho.dim() != x.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), x.dim()));
    }
    let mut acc = 0.0;
    for s in 0..rho.horizon() {
        let u = t - s as i64;
        if u < x.start() {
            break; // all further lags fall before the input's support
        }
        for j in 0..rho.dim() {
            acc += rho.channels[j][s] * x.component(u, j);
        }
    }
    Ok(acc)
}

/// l2 distance of two kernels over the union of their supports.
pub fn kernel_l2_distance(a: &FunctionalKernel, b: &FunctionalKernel) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let horizon = a.horizon().max(b.horizon());
    let mut acc = 0.0;
    for s in 0..horizon {
        for j in 0..a.dim() {
            let diff = a.get(j, s) - b.get(j, s);
            acc += diff * diff;
        }
    }
    Ok(acc.sqrt())
}

/// Worst-case output gap sup over the unit input ball of |H_t(x) - G_t(x)|.
/// By causality, linearity and time-homogeneity this supremum is attained
/// and equals the l2 distance of the two kernels (Cauchy-Schwarz with the
/// extremal input from [`worst_case_input`]).
pub fn functional_error_norm(a: &FunctionalKernel, b: &FunctionalKernel) -> Result<f64> {
    kernel_l2_distance(a, b)
}

/// The unit-norm input achieving the worst-case gap for a difference kernel
/// `delta` at time `t`: x(t - s) = delta(s) / ||delta||.
pub fn worst_case_input(delta: &FunctionalKernel, t: i64) -> Result<VectorSeq> {
    let norm = delta.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroKernel);
    }
    let horizon = delta.horizon();
    // Time-reverse the kernel: the earliest stored step is lag horizon - 1.
    let values = (0..horizon)
        .map(|i| {
            let s = horizon - 1 - i;
            (0..delta.dim()).map(|j| delta.get(j, s) / norm).collect()
        })
        .collect();
    VectorSeq::new(t - (horizon as i64 - 1), values)
}

/// Closed-form mean-square gap under iid standard normal inputs:
/// E |H_t(x) - G_t(x)|^2 = sum_s |a(s) - b(s)|^2.
pub fn gaussian_mse_exact(a: &FunctionalKernel, b: &FunctionalKernel) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let horizon = a.horizon().max(b.horizon());
    let mut acc = 0.0;
    for s in 0..horizon {
        for j in 0..a.dim() {
            let diff = a.get(j, s) - b.get(j, s);
            acc += diff * diff;
        }
    }
    Ok(acc)
}

/// Monte-Carlo estimate of the mean-square gap under iid standard normal
/// inputs, deterministic for a fixed seed. Samples are drawn over the union
/// support window in ascending lag order, dimensions ascending within a lag.
pub fn gaussian_mse(
    a: &FunctionalKernel,
    b: &FunctionalKernel,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let delta = a.sub(b)?;
    let horizon = delta.horizon();
    let d = delta.dim();
    let mut rng = SplitMix64::new(seed);
    let mut acc = 0.0;
    for _ in 0..n_samples {
        let mut gap = 0.0;
        for s in 0..horizon {
            for j in 0..d {
                gap += delta.channels[j][s] * rng.next_normal();
            }
        }
        acc += gap * gap;
    }
    Ok(acc / n_samples as f64)
}
