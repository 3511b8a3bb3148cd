//! Complexity measures of a target kernel: the spectral measure (decay of
//! the tensorized kernel's decomposition spectrum across depths) and the
//! memory measure (decay of the kernel's tail energy), each taken relative
//! to a non-increasing decay envelope.
//!
//! For an envelope g, the spectral constant is the supremum over depths K
//! and ranks s of tail(s, K) / g(s - 1); for an envelope f, the memory
//! constant is the supremum over lags s of tail(s) / f(s). A target is
//! efficiently approximable exactly when both constants are finite, and the
//! constants are the coefficients of the approximation-rate bound checked in
//! [`crate::bounds`].
//!
//! Supremum conventions: 0/0 counts as 0 (a vanishing tail constrains
//! nothing) and a positive tail over a vanishing envelope is infinite.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hosvd::{hosvd, spectrum};
use crate::seq::FunctionalKernel;
use crate::tensor::tensorize;

// ---------------------------------------------------------------------------
// Decay envelopes
// ---------------------------------------------------------------------------

/// A non-increasing nonnegative function on the lags, used to normalize
/// tail sums. User-supplied tables must be strictly positive; tables fitted
/// from measured tails may end in exact zeros (finitely supported targets).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DecayEnvelope {
    /// e^(-beta s)
    #[serde(rename = "exp")]
    Exponential { beta: f64 },
    /// (1 + s)^(-alpha)
    #[serde(rename = "pow")]
    Power { alpha: f64 },
    /// Tabulated values; reads past the end clamp to the last entry.
    #[serde(rename = "table")]
    Table { values: Vec<f64> },
}

impl DecayEnvelope {
    pub fn exponential(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidEnvelope(format!(
                "exponential rate must be positive and finite, got {beta}"
            )));
        }
        Ok(Self::Exponential { beta })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidEnvelope(format!(
                "power exponent must be positive and finite, got {alpha}"
            )));
        }
        Ok(Self::Power { alpha })
    }

    /// Tabulated envelope allowing zero entries (for fitted tails).
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidEnvelope("empty envelope table".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidEnvelope(
                "envelope table entries must be finite and nonnegative".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidEnvelope(
                "envelope table must be non-increasing".into(),
            ));
        }
        Ok(Self::Table { values })
    }

    /// Tabulated envelope for user input: additionally strictly positive.
    pub fn table_strict(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| *v <= 0.0) {
            return Err(Error::InvalidEnvelope(
                "envelope table entries must be strictly positive".into(),
            ));
        }
        Self::table(values)
    }

    pub fn eval(&self, s: usize) -> f64 {
        match self {
            Self::Exponential { beta } => (-beta * s as f64).exp(),
            Self::Power { alpha } => (1.0 + s as f64).powf(-alpha),
            Self::Table { values } => {
                let idx = s.min(values.len() - 1);
                values[idx]
            }
        }
    }

    /// Rescale a tabulated envelope pointwise by a positive constant.
    /// Closed forms have a fixed normalization; tabulate them first.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidEnvelope(format!(
                "envelope scale must be positive and finite, got {c}"
            )));
        }
        match self {
            Self::Table { values } => Ok(Self::Table {
                values: values.iter().map(|v| v * c).collect(),
            }),
            _ => Err(Error::InvalidEnvelope(
                "only tabulated envelopes can be rescaled".into(),
            )),
        }
    }
}

/// Parsed form of a CLI envelope argument.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvelopeSpec {
    Given(DecayEnvelope),
    /// Fit the tight tabulated envelope from the target's own tails.
    Fit,
}

/// Parse `exp:<beta>`, `pow:<alpha>`, `table:<path.json>` (a JSON array of
/// positive non-increasing numbers), or `fit`.
pub fn parse_envelope_spec(text: &str) -> Result<EnvelopeSpec> {
    if text == "fit" {
        return Ok(EnvelopeSpec::Fit);
    }
    let (kind, arg) = text
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("bad envelope spec {text:?}")))?;
    match kind {
        "exp" => {
            let beta: f64 = arg
                .parse()
                .map_err(|_| Error::Parse(format!("bad rate in envelope spec {text:?}")))?;
            Ok(EnvelopeSpec::Given(DecayEnvelope::exponential(beta)?))
        }
        "pow" => {
            let alpha: f64 = arg
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in envelope spec {text:?}")))?;
            Ok(EnvelopeSpec::Given(DecayEnvelope::power(alpha)?))
        }
        "table" => {
            if arg.is_empty() {
                return Err(Error::Parse(format!("bad envelope spec {text:?}")));
            }
            let text = std::fs::read_to_string(arg)?;
            let values: Vec<f64> = serde_json::from_str(&text)?;
            Ok(EnvelopeSpec::Given(DecayEnvelope::table_strict(values)?))
        }
        other => Err(Error::Parse(format!("unknown envelope kind {other:?}"))),
    }
}

/// tail / envelope with the supremum conventions of the module docs.
fn constraint_ratio(tail: f64, envelope: f64) -> f64 {
    if tail == 0.0 {
        0.0
    } else if envelope == 0.0 {
        f64::INFINITY
    } else {
        tail / envelope
    }
}

// ---------------------------------------------------------------------------
// Memory tails
// ---------------------------------------------------------------------------

/// Energy of the kernel beyond lag s: sum over dimensions of the squared
/// entries at lags >= s, accumulated in ascending lag order.
pub fn memory_tail(rho: &FunctionalKernel, s: usize) -> f64 {
    let mut acc = 0.0;
    for lag in s..rho.horizon() {
        for j in 0..rho.dim() {
            let v = rho.get(j, lag);
            acc += v * v;
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryEstimate {
    pub value: f64,
    pub witness_s: usize,
}

/// Smallest constant c with tail(s) <= c f(s) for all probed lags:
/// the supremum of tail(s) / f(s) over 0 <= s <= s_max (default: one past
/// the support). Ties keep the smallest witness lag.
pub fn c2_estimate(
    rho: &FunctionalKernel,
    f: &DecayEnvelope,
    s_max: Option<usize>,
) -> Result<MemoryEstimate> {
    let horizon = rho.horizon();
    let s_max = s_max.unwrap_or(horizon);
    if s_max + 1 < horizon {
        return Err(Error::InvalidParameter(format!(
            "s_max = {s_max} must reach the support end {}",
            horizon.saturating_sub(1)
        )));
    }
    let mut best = MemoryEstimate {
        value: 0.0,
        witness_s: 0,
    };
    for s in 0..=s_max {
        let ratio = constraint_ratio(memory_tail(rho, s), f.eval(s));
        if ratio > best.value {
            best = MemoryEstimate {
                value: ratio,
                witness_s: s,
            };
        }
    }
    Ok(best)
}

/// The measured memory tails themselves, as a tight tabulated envelope
/// (entries may be zero beyond the support).
pub fn fit_memory_envelope(rho: &FunctionalKernel) -> Result<DecayEnvelope> {
    let values: Vec<f64> = (0..=rho.horizon()).map(|s| memory_tail(rho, s)).collect();
    DecayEnvelope::table(values)
}

// ---------------------------------------------------------------------------
// Spectral tails
// ---------------------------------------------------------------------------

/// Spectrum tail energies for one depth: entry i is the sum over dimensions
/// of squared spectrum magnitudes from rank i+1 onward, for the kernel
/// restricted to [0, l^K).
pub fn spectral_tail_table(rho: &FunctionalKernel, l: usize, layers: usize) -> Result<Vec<f64>> {
    let window = l
        .checked_pow(layers as u32)
        .ok_or_else(|| Error::InvalidParameter(format!("l^K overflows for {l}^{layers}")))?;
    let mut table = vec![0.0; window];
    let restricted = rho.restrict(window);
    for j in 0..restricted.dim() {
        let t = tensorize(restricted.channel(j), l, layers)?;
        let spec = spectrum(&hosvd(&t)?);
        for (i, slot) in table.iter_mut().enumerate() {
            *slot += spec.tail_sq(i + 1);
        }
    }
    Ok(table)
}

/// Spectrum tail at rank s (1-based) for one depth; s = l^K + 1 is allowed
/// and gives zero.
pub fn spectral_tail(rho: &FunctionalKernel, l: usize, layers: usize, s: usize) -> Result<f64> {
    let table = spectral_tail_table(rho, l, layers)?;
    if s < 1 || s > table.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "rank {s} out of range 1..={}",
            table.len() + 1
        )));
    }
    Ok(if s > table.len() { 0.0 } else { table[s - 1] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub witness_s: usize,
    pub witness_k: usize,
    /// Supremum restricted to each depth K = 1..=K_max.
    pub per_k_sups: Vec<f64>,
    /// True when the last two per-depth suprema differ by under 1%.
    pub converged: bool,
}

/// Smallest constant c with tail(s, K) <= c g(s - 1) over every probed depth
/// K <= K_max and rank 1 <= s <= l^K. Ties keep the smallest depth, then the
/// smallest rank.
pub fn c1_estimate(
    rho: &FunctionalKernel,
    g: &DecayEnvelope,
    l: usize,
    k_max: usize,
) -> Result<SpectralEstimate> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("K_max must be >= 1".into()));
    }
    let mut best = (0.0_f64, 1usize, 1usize);
    let mut per_k_sups = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let table = spectral_tail_table(rho, l, k)?;
        let mut sup_k = 0.0_f64;
        for (i, &tail) in table.iter().enumerate() {
            let s = i + 1;
            let ratio = constraint_ratio(tail, g.eval(s - 1));
            if ratio > sup_k {
                sup_k = ratio;
            }
            if ratio > best.0 {
                best = (ratio, s, k);
            }
        }
        per_k_sups.push(sup_k);
    }
    let converged = if k_max >= 2 {
        let last = per_k_sups[k_max - 1];
        let prev = per_k_sups[k_max - 2];
        (last - prev).abs() <= 0.01 * last.abs()
    } else {
        false
    };
    Ok(SpectralEstimate {
        value: best.0,
        witness_s: best.1,
        witness_k: best.2,
        per_k_sups,
        converged,
    })
}

/// Tight tabulated spectral envelope: entry i is the largest measured tail
/// at rank i+1 across depths 1..=K_max, matching the convention that the
/// envelope is evaluated at s - 1.
pub fn fit_spectral_envelope(
    rho: &FunctionalKernel,
    l: usize,
    k_max: usize,
) -> Result<DecayEnvelope> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("K_max must be >= 1".into()));
    }
    let len = l
        .checked_pow(k_max as u32)
        .ok_or_else(|| Error::InvalidParameter(format!("l^K overflows for {l}^{k_max}")))?;
    let mut values = vec![0.0; len];
    for k in 1..=k_max {
        let table = spectral_tail_table(rho, l, k)?;
        for (i, &tail) in table.iter().enumerate() {
            if tail > values[i] {
                values[i] = tail;
            }
        }
    }
    DecayEnvelope::table(values)
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

/// Both complexity estimates with their witnesses and the raw tail tables
/// they were computed from. `c1`/`c2` are `None` exactly when the constant
/// is infinite (tail positive where the envelope vanishes).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub l: usize,
    #[serde(rename = "K_max")]
    pub k_max: usize,
    pub c1: Option<f64>,
    pub c1_witness_s: usize,
    #[serde(rename = "c1_witness_K")]
    pub c1_witness_k: usize,
    pub c1_converged: bool,
    pub c2: Option<f64>,
    pub c2_witness_s: usize,
    /// Smallest depth whose window l^K covers the whole support, if any;
    /// beyond it the per-depth suprema of finitely supported targets stop
    /// moving.
    #[serde(rename = "stabilization_K")]
    pub stabilization_k: Option<usize>,
    #[serde(rename = "per_K_sups")]
    pub per_k_sups: Vec<f64>,
    /// `spectral_tails[K-1][s-1]` = spectrum tail at rank s for depth K.
    pub spectral_tails: Vec<Vec<f64>>,
    /// `memory_tails[s]` = kernel tail energy beyond lag s.
    pub memory_tails: Vec<f64>,
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn complexity_report(
    rho: &FunctionalKernel,
    g: &DecayEnvelope,
    f: &DecayEnvelope,
    l: usize,
    k_max: usize,
) -> Result<ComplexityReport> {
    let c1 = c1_estimate(rho, g, l, k_max)?;
    let c2 = c2_estimate(rho, f, None)?;
    let spectral_tails = (1..=k_max)
        .map(|k| spectral_tail_table(rho, l, k))
        .collect::<Result<Vec<_>>>()?;
    let memory_tails: Vec<f64> = (0..=rho.horizon()).map(|s| memory_tail(rho, s)).collect();
    let stabilization_k = (1..=k_max).find(|&k| l.pow(k as u32) >= rho.horizon());
    Ok(ComplexityReport {
        l,
        k_max,
        c1: finite_or_none(c1.value),
        c1_witness_s: c1.witness_s,
        c1_witness_k: c1.witness_k,
        c1_converged: c1.converged,
        c2: finite_or_none(c2.value),
        c2_witness_s: c2.witness_s,
        stabilization_k,
        per_k_sups: c1.per_k_sups,
        spectral_tails,
        memory_tails,
    })
}

/// The per-depth tail tables keyed by depth, used by sweep drivers.
pub fn spectral_tail_tables(
    rho: &FunctionalKernel,
    l: usize,
    depths: &[usize],
) -> Result<BTreeMap<usize, Vec<f64>>> {
    depths
        .iter()
        .map(|&k| Ok((k, spectral_tail_table(rho, l, k)?)))
        .collect()
}
