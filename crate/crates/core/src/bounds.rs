//! Constructive approximation and its verification: build the best M-term
//! network for a target at a given geometry, check the two-sided error
//! identity and the rate bound on (M, K) grids, and run the inverse
//! estimation that recovers complexity constants from achieved errors.
//!
//! The constructed approximant keeps the top-M spectrum entries of the
//! tensorized target per input dimension, realized as network weights with
//! one channel per kept term. Its squared error splits exactly into the
//! dropped spectrum tail plus the kernel's memory tail beyond the window --
//! the identity every sweep asserts.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{
    c1_estimate, c2_estimate, complexity_report, memory_tail, spectral_tail_table,
    ComplexityReport, DecayEnvelope,
};
use crate::error::{Error, Result};
use crate::fmt::sig17;
use crate::hosvd::{hosvd, truncate, RankOneTerm};
use crate::network::{from_rank_one_terms, ConvNetParams};
use crate::seq::{kernel_l2_distance, FunctionalKernel};
use crate::tensor::tensorize;

/// Relative slack for exact construction identities.
pub const IDENTITY_RTOL: f64 = 1e-9;
/// Relative slack for the verified rate inequalities (absorbs
/// accumulated factorization error across depths).
pub const INEQUALITY_SLACK: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Constructive approximation
// ---------------------------------------------------------------------------

/// One grid point of a sweep: the achieved squared error, its two-term
/// split, and the rate bound when envelopes are in play.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacksonPoint {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    /// Squared worst-case error of the realized network, measured as the
    /// squared kernel distance.
    pub error_sq: f64,
    /// c1 g(M) + c2 f(l^K); absent when no envelopes were supplied.
    pub bound: Option<f64>,
    /// Dropped spectrum energy: tail from rank M+1 at depth K.
    pub spectral_tail: f64,
    /// Kernel energy beyond the window l^K.
    pub memory_tail: f64,
    /// Channels of the realized network (kept terms across dimensions).
    pub net_channels: usize,
}

/// Build the top-M approximant of `rho` at geometry (l, K): per input
/// dimension, restrict to the window l^K, tensorize, decompose, keep the
/// top M spectrum entries, and realize every kept term as a network channel.
pub fn jackson_approximate(
    rho: &FunctionalKernel,
    l: usize,
    layers: usize,
    m: usize,
) -> Result<(ConvNetParams, JacksonPoint)> {
    if l < 2 || layers < 1 {
        return Err(Error::InvalidParameter(
            "need filter length >= 2 and at least one layer".into(),
        ));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("must keep at least one term".into()));
    }
    let window = l
        .checked_pow(layers as u32)
        .ok_or_else(|| Error::InvalidParameter(format!("l^K overflows for {l}^{layers}")))?;
    let restricted = rho.restrict(window);

    let mut terms: Vec<RankOneTerm> = Vec::new();
    let mut term_dims: Vec<usize> = Vec::new();
    for j in 0..rho.dim() {
        let tens = tensorize(restricted.channel(j), l, layers)?;
        let decomposition = hosvd(&tens)?;
        let (kept, _) = truncate(&decomposition, m)?;
        for term in kept {
            terms.push(term);
            term_dims.push(j);
        }
    }
    let net = if terms.is_empty() {
        // Zero target (or zero window): the best approximant is the zero
        // network.
        ConvNetParams::zeros(l, layers, 1, rho.dim())?
    } else {
        from_rank_one_terms(&terms, &term_dims, l, layers, rho.dim())?
    };

    let effective = net.effective_filter()?;
    let distance = kernel_l2_distance(rho, &effective)?;
    let error_sq = distance * distance;

    let spectral_table = spectral_tail_table(rho, l, layers)?;
    let spectral = if m >= spectral_table.len() {
        0.0
    } else {
        spectral_table[m] // tail from rank m + 1
    };
    let memory = memory_tail(rho, window);

    let point = JacksonPoint {
        m,
        k: layers,
        error_sq,
        bound: None,
        spectral_tail: spectral,
        memory_tail: memory,
        net_channels: net.channels(),
    };
    Ok((net, point))
}

// ---------------------------------------------------------------------------
// Forward verification sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacksonSweep {
    pub c1: f64,
    pub c2: f64,
    pub points: Vec<JacksonPoint>,
    /// Per-point bound satisfaction, aligned with `points`.
    pub point_passed: Vec<bool>,
    pub passed: bool,
}

/// Construct the approximant at every grid point and assert the rate bound
/// error_sq <= c1 g(M) + c2 f(l^K). Grid points run in parallel; the output
/// is sorted by (K, M) regardless of completion order. Infinite complexity
/// constants are an error (the bound would be vacuous).
pub fn verify_jackson(
    rho: &FunctionalKernel,
    g: &DecayEnvelope,
    f: &DecayEnvelope,
    l: usize,
    grid: &[(usize, usize)],
) -> Result<JacksonSweep> {
    if grid.is_empty() {
        return Err(Error::DegenerateGrid("empty grid".into()));
    }
    let k_max = grid.iter().map(|&(_, k)| k).max().unwrap();
    let c1 = c1_estimate(rho, g, l, k_max)?;
    let c2 = c2_estimate(rho, f, None)?;
    if !c1.value.is_finite() {
        return Err(Error::InfiniteComplexity(format!(
            "spectral constant diverges at depth K = {}, rank s = {}; \
             the envelope g decays faster than the measured spectrum tails",
            c1.witness_k, c1.witness_s
        )));
    }
    if !c2.value.is_finite() {
        return Err(Error::InfiniteComplexity(format!(
            "memory constant diverges at lag s = {}; \
             the envelope f decays faster than the measured memory tails",
            c2.witness_s
        )));
    }

    let mut sorted_grid = grid.to_vec();
    sorted_grid.sort_by_key(|&(m, k)| (k, m));
    sorted_grid.dedup();

    let mut points: Vec<JacksonPoint> = sorted_grid
        .par_iter()
        .map(|&(m, k)| jackson_approximate(rho, l, k, m).map(|(_, p)| p))
        .collect::<Result<_>>()?;

    let mut point_passed = Vec::with_capacity(points.len());
    let mut passed = true;
    for p in points.iter_mut() {
        let window = l.pow(p.k as u32);
        let bound = c1.value * g.eval(p.m) + c2.value * f.eval(window);
        p.bound = Some(bound);
        let ok = p.error_sq <= bound * (1.0 + IDENTITY_RTOL);
        point_passed.push(ok);
        passed &= ok;
    }
    Ok(JacksonSweep {
        c1: c1.value,
        c2: c2.value,
        points,
        point_passed,
        passed,
    })
}

/// Sweep CSV with the pinned header
/// `M,K,error_sq,bound,spectral_tail,memory_tail,ratio`.
pub fn sweep_csv(points: &[JacksonPoint]) -> String {
    let mut out = String::from("M,K,error_sq,bound,spectral_tail,memory_tail,ratio\n");
    for p in points {
        let bound = p.bound.unwrap_or(f64::NAN);
        let ratio = if p.error_sq == 0.0 {
            0.0
        } else {
            p.error_sq / bound
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.m,
            p.k,
            sig17(p.error_sq),
            sig17(bound),
            sig17(p.spectral_tail),
            sig17(p.memory_tail),
            sig17(ratio)
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Inverse estimation
// ---------------------------------------------------------------------------

/// Complexity constants recovered from a grid of achieved errors: the
/// memory constant from the largest-M column (where the spectrum part is
/// exhausted), the spectral constant from the largest-K row after removing
/// the residual memory floor. The floor is reported so users can see how
/// far the grid is from the infinite-depth limit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BernsteinEstimate {
    pub a_est: f64,
    pub b_est: f64,
    pub a_witness_m: usize,
    pub b_witness_k: usize,
    pub memory_floor: f64,
}

/// Recover (A, B) from a map (M, K) -> achieved squared error. The grid
/// must contain its own corner (M_max, K_max) and at least two points.
pub fn bernstein_estimate(
    errors: &BTreeMap<(usize, usize), f64>,
    g: &DecayEnvelope,
    f: &DecayEnvelope,
    l: usize,
) -> Result<BernsteinEstimate> {
    if errors.len() < 2 {
        return Err(Error::DegenerateGrid(
            "inverse estimation needs more than one grid point".into(),
        ));
    }
    let m_max = errors.keys().map(|&(m, _)| m).max().unwrap();
    let k_max = errors.keys().map(|&(_, k)| k).max().unwrap();
    let floor = *errors.get(&(m_max, k_max)).ok_or_else(|| {
        Error::DegenerateGrid(format!(
            "grid is missing its corner point (M = {m_max}, K = {k_max})"
        ))
    })?;

    let mut b_est = (0.0_f64, k_max);
    for (&(m, k), &err) in errors.iter() {
        if m != m_max {
            continue;
        }
        let window = l
            .checked_pow(k as u32)
            .ok_or_else(|| Error::InvalidParameter(format!("l^K overflows for {l}^{k}")))?;
        let ratio = ratio_or_zero(err, f.eval(window));
        if ratio > b_est.0 {
            b_est = (ratio, k);
        }
    }

    let mut a_est = (0.0_f64, m_max);
    for (&(m, k), &err) in errors.iter() {
        if k != k_max {
            continue;
        }
        let excess = (err - floor).max(0.0);
        let ratio = ratio_or_zero(excess, g.eval(m));
        if ratio > a_est.0 {
            a_est = (ratio, m);
        }
    }

    Ok(BernsteinEstimate {
        a_est: a_est.0,
        b_est: b_est.0,
        a_witness_m: a_est.1,
        b_witness_k: b_est.1,
        memory_floor: floor,
    })
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BernsteinVerification {
    pub estimate: BernsteinEstimate,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c1_check: bool,
    pub c2_check: bool,
    pub passed: bool,
    pub points: Vec<JacksonPoint>,
    pub report: ComplexityReport,
}

/// Build optimal approximants over the grid, feed their errors to the
/// inverse estimator, and check the recovered constants against the
/// directly measured ones: c1 <= A_est and c2 <= B_est, each with relative
/// slack. The error grid is augmented with the zero-model column M = 0
/// (error = full kernel energy, for every depth); without it the estimator
/// cannot see the rank-one constraint of the spectral measure.
pub fn verify_bernstein(
    rho: &FunctionalKernel,
    g: &DecayEnvelope,
    f: &DecayEnvelope,
    l: usize,
    grid: &[(usize, usize)],
) -> Result<BernsteinVerification> {
    if grid.is_empty() {
        return Err(Error::DegenerateGrid("empty grid".into()));
    }
    let mut sorted_grid = grid.to_vec();
    sorted_grid.sort_by_key(|&(m, k)| (k, m));
    sorted_grid.dedup();

    let mut points: Vec<JacksonPoint> = sorted_grid
        .par_iter()
        .map(|&(m, k)| jackson_approximate(rho, l, k, m).map(|(_, p)| p))
        .collect::<Result<_>>()?;

    let mut errors: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for p in &points {
        errors.insert((p.m, p.k), p.error_sq);
    }
    let total_energy = memory_tail(rho, 0);
    let depths: Vec<usize> = {
        let mut v: Vec<usize> = sorted_grid.iter().map(|&(_, k)| k).collect();
        v.dedup();
        v
    };
    for &k in &depths {
        errors.insert((0, k), total_energy);
    }

    let estimate = bernstein_estimate(&errors, g, f, l)?;
    let k_max = depths.iter().copied().max().unwrap();
    let report = complexity_report(rho, g, f, l, k_max)?;

    if let (Some(c1), Some(c2)) = (report.c1, report.c2) {
        for p in points.iter_mut() {
            let window = l.pow(p.k as u32);
            p.bound = Some(c1 * g.eval(p.m) + c2 * f.eval(window));
        }
    }

    let c1_val = report.c1.unwrap_or(f64::INFINITY);
    let c2_val = report.c2.unwrap_or(f64::INFINITY);
    let c1_check = c1_val <= estimate.a_est * (1.0 + INEQUALITY_SLACK);
    let c2_check = c2_val <= estimate.b_est * (1.0 + INEQUALITY_SLACK);
    let passed = c1_check && c2_check;
    Ok(BernsteinVerification {
        estimate,
        c1: report.c1,
        c2: report.c2,
        c1_check,
        c2_check,
        passed,
        points,
        report,
    })
}
