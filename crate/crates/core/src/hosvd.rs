//! Higher-order singular value decomposition of dense all-modes-equal
//! tensors, spectrum extraction, and exact-error truncation.
//!
//! Per-mode factorizations use one-sided Jacobi rotations: deterministic,
//! and accurate to machine precision at the small mode sizes this crate
//! targets (l <= 16, l^K <= 4096). The decomposition contract is carried by
//! the result invariants (orthonormal factors, norm-preserving core, exact
//! tail-sum truncation error), not by the algorithm.

use crate::error::{Error, Result};
use crate::fmt::sig17;
use crate::tensor::{mode_product, outer_product, unfold, DenseTensor, Matrix};

const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 60;

// ---------------------------------------------------------------------------
// One-sided Jacobi
// ---------------------------------------------------------------------------

/// Orthogonalize the columns of `w` in place by plane rotations, accumulating
/// the rotations into a square matrix V with w_in = w_out * V^T.
fn jacobi_orthogonalize(w: &mut Matrix, v: &mut Matrix) {
    let n = w.cols();
    let m = w.rows();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    app += wp * wp;
                    aqq += wq * wq;
                    apq += wp * wq;
                }
                if apq.abs() <= JACOBI_TOL * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..m {
                    let wp = w.get(i, p);
                    let wq = w.get(i, q);
                    w.set(i, p, cs * wp - sn * wq);
                    w.set(i, q, sn * wp + cs * wq);
                }
                for i in 0..v.rows() {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, cs * vp - sn * vq);
                    v.set(i, q, sn * vp + cs * vq);
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Fill zero columns of `u` (marked by zero singular values) with vectors
/// orthonormal to the rest, so U is always column-orthonormal.
fn complete_orthonormal_columns(u: &mut Matrix, sigmas: &[f64]) {
    let m = u.rows();
    let n = u.cols();
    for j in 0..n {
        if sigmas.get(j).copied().unwrap_or(0.0) > 0.0 {
            continue;
        }
        // Pick the canonical basis vector with the largest residual after
        // projecting out every already-fixed column.
        let mut best: Option<(f64, Vec<f64>)> = None;
        for cand in 0..m {
            let mut vec = vec![0.0; m];
            vec[cand] = 1.0;
            for c in 0..n {
                if c == j || (c > j && sigmas.get(c).copied().unwrap_or(0.0) == 0.0) {
                    continue;
                }
                let dot: f64 = (0..m).map(|i| vec[i] * u.get(i, c)).sum();
                for (i, entry) in vec.iter_mut().enumerate() {
                    *entry -= dot * u.get(i, c);
                }
            }
            let norm_sq: f64 = vec.iter().map(|x| x * x).sum();
            if best.as_ref().is_none_or(|(b, _)| norm_sq > *b) {
                best = Some((norm_sq, vec));
            }
        }
        let (norm_sq, mut vec) = best.expect("matrix has at least one row");
        let norm = norm_sq.sqrt();
        for entry in vec.iter_mut() {
            *entry /= norm;
        }
        for (i, entry) in vec.iter().enumerate() {
            u.set(i, j, *entry);
        }
    }
}

/// Thin SVD of a tall-or-square matrix via one-sided Jacobi on its columns.
/// Returns (U: m x n, sigma: n, V: n x n) with a = U diag(sigma) V^T,
/// singular values descending, and the largest-magnitude entry of every left
/// singular vector nonnegative.
fn svd_tall(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    jacobi_orthogonalize(&mut w, &mut v);

    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w.get(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let mut u = Matrix::zeros(m, n);
    let mut vv = Matrix::zeros(n, n);
    let mut sigmas = vec![0.0; n];
    for (dst, &src) in order.iter().enumerate() {
        sigmas[dst] = norms[src];
        if norms[src] > 0.0 {
            for i in 0..m {
                u.set(i, dst, w.get(i, src) / norms[src]);
            }
        }
        for i in 0..n {
            vv.set(i, dst, v.get(i, src));
        }
    }
    norms.sort_by(|x, y| y.total_cmp(x));

    complete_orthonormal_columns(&mut u, &sigmas);

    // Sign convention: make the largest-magnitude entry of each left vector
    // nonnegative (first index wins ties), flipping U and V together.
    for j in 0..n {
        let mut imax = 0;
        for i in 1..m {
            if u.get(i, j).abs() > u.get(imax, j).abs() {
                imax = i;
            }
        }
        if u.get(imax, j) < 0.0 {
            for i in 0..m {
                u.set(i, j, -u.get(i, j));
            }
            for i in 0..n {
                vv.set(i, j, -vv.get(i, j));
            }
        }
    }
    (u, sigmas, vv)
}

// ---------------------------------------------------------------------------
// SVD
// ---------------------------------------------------------------------------

/// Thin singular value decomposition a = U diag(sigma) V^T with
/// min(rows, cols) triplets.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    /// U diag(sigma) V^T.
    pub fn reconstruct(&self) -> Matrix {
        let m = self.u.rows();
        let n = self.v.rows();
        let k = self.singular_values.len();
        let mut out = Matrix::zeros(m, n);
        for (c, &s) in self.singular_values.iter().enumerate().take(k) {
            if s == 0.0 {
                continue;
            }
            for i in 0..m {
                for j in 0..n {
                    let v = out.get(i, j) + s * self.u.get(i, c) * self.v.get(j, c);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

pub fn svd(a: &Matrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::InvalidParameter("non-finite matrix entry".into()));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::ShapeMismatch("empty matrix".into()));
    }
    if a.rows() >= a.cols() {
        let (u, s, v) = svd_tall(a);
        Ok(SvdResult {
            u,
            singular_values: s,
            v,
        })
    } else {
        // Work on the transpose and swap the roles of U and V. The sign
        // convention is re-applied so it refers to the left vectors of `a`.
        let (ut, s, vt) = svd_tall(&a.transpose());
        let mut u = vt;
        let mut v = ut;
        for j in 0..u.cols() {
            let mut imax = 0;
            for i in 1..u.rows() {
                if u.get(i, j).abs() > u.get(imax, j).abs() {
                    imax = i;
                }
            }
            if u.get(imax, j) < 0.0 {
                for i in 0..u.rows() {
                    u.set(i, j, -u.get(i, j));
                }
                for i in 0..v.rows() {
                    v.set(i, j, -v.get(i, j));
                }
            }
        }
        Ok(SvdResult {
            u,
            singular_values: s,
            v,
        })
    }
}

/// Full l x l orthogonal basis of left singular vectors of `w`, plus its
/// singular values padded to length l. This is what each tensor mode needs.
fn left_singular_basis(w: &Matrix) -> (Matrix, Vec<f64>) {
    let l = w.rows();
    if w.cols() >= l {
        // Jacobi on the transpose accumulates a full square rotation on the
        // row space of w, which is exactly the left basis, including the
        // null directions of rank-deficient unfoldings.
        let (_, sigmas, basis) = svd_tall(&w.transpose());
        (basis, sigmas)
    } else {
        let (mut u, mut sigmas, _) = svd_tall(w);
        let extra = l - w.cols();
        let mut full = Matrix::zeros(l, l);
        for j in 0..w.cols() {
            for i in 0..l {
                full.set(i, j, u.get(i, j));
            }
        }
        sigmas.resize(sigmas.len() + extra, 0.0);
        u = full;
        complete_orthonormal_columns(&mut u, &sigmas);
        (u, sigmas)
    }
}

// ---------------------------------------------------------------------------
// HOSVD
// ---------------------------------------------------------------------------

/// Orthogonal factor per mode plus the all-orthogonal core:
/// a = core x_1 U_1 x_2 ... x_K U_K.
#[derive(Clone, Debug)]
pub struct HosvdResult {
    factors: Vec<Matrix>,
    core: DenseTensor,
}

impl HosvdResult {
    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn factor(&self, mode: usize) -> &Matrix {
        &self.factors[mode - 1]
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn order(&self) -> usize {
        self.core.order()
    }

    pub fn mode_size(&self) -> usize {
        self.core.mode_size()
    }
}

pub fn hosvd(a: &DenseTensor) -> Result<HosvdResult> {
    let mut factors = Vec::with_capacity(a.order());
    for mode in 1..=a.order() {
        let w = unfold(a, mode)?;
        if !w.is_finite() {
            return Err(Error::InvalidParameter("non-finite tensor entry".into()));
        }
        let (basis, _) = left_singular_basis(&w);
        factors.push(basis);
    }
    let mut core = a.clone();
    for (k, factor) in factors.iter().enumerate() {
        core = mode_product(&core, &factor.transpose(), k + 1)?;
    }
    Ok(HosvdResult { factors, core })
}

/// a = core x_1 U_1 ... x_K U_K.
pub fn reconstruct(h: &HosvdResult) -> DenseTensor {
    let mut out = h.core.clone();
    for (k, factor) in h.factors.iter().enumerate() {
        out = mode_product(&out, factor, k + 1).expect("factor shapes fixed by construction");
    }
    out
}

// ---------------------------------------------------------------------------
// Spectrum and truncation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub magnitude: f64,
    pub value: f64,
    /// Position in the core, one 0-based digit per mode.
    pub multi_index: Vec<usize>,
}

/// Core entries sorted by decreasing magnitude; ties broken by ascending
/// lexicographic multi-index, so the order is deterministic.
#[derive(Clone, Debug)]
pub struct Spectrum {
    entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of squared magnitudes from 1-based rank `s` onward.
    pub fn tail_sq(&self, s: usize) -> f64 {
        if s < 1 {
            return self.tail_sq(1);
        }
        self.entries
            .iter()
            .skip(s - 1)
            .map(|e| e.magnitude * e.magnitude)
            .sum()
    }

    /// CSV with header `rank,magnitude,signed_value,multi_index`; digits of
    /// the multi-index are 0-based and semicolon-joined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,magnitude,signed_value,multi_index\n");
        for (i, e) in self.entries.iter().enumerate() {
            let digits: Vec<String> = e.multi_index.iter().map(|d| d.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                sig17(e.magnitude),
                sig17(e.value),
                digits.join(";")
            ));
        }
        out
    }
}

pub fn spectrum(h: &HosvdResult) -> Spectrum {
    let core = &h.core;
    let mut entries: Vec<SpectrumEntry> = core
        .data()
        .iter()
        .enumerate()
        .map(|(t, &v)| SpectrumEntry {
            magnitude: v.abs(),
            value: v,
            multi_index: core.digits(t),
        })
        .collect();
    entries.sort_by(|a, b| {
        b.magnitude
            .total_cmp(&a.magnitude)
            .then_with(|| a.multi_index.cmp(&b.multi_index))
    });
    Spectrum { entries }
}

/// One term of a rank-one expansion. `factors[k]` is the mode-(k+1) factor,
/// i.e. the layer-k filter once realized as a network.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneTerm {
    pub scale: f64,
    pub factors: Vec<Vec<f64>>,
}

/// Keep the top `m` spectrum entries as rank-one terms and return the
/// truncated tensor they sum to. Entries of exactly zero magnitude are
/// dropped, so a zero tensor yields an empty term list and a zero tensor.
/// The dropped tail satisfies |A - approx|_F^2 = sum of dropped magnitudes^2.
pub fn truncate(h: &HosvdResult, m: usize) -> Result<(Vec<RankOneTerm>, DenseTensor)> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "must keep at least one term".into(),
        ));
    }
    let spec = spectrum(h);
    let mut terms = Vec::new();
    let mut approx = DenseTensor::zeros(h.mode_size(), h.order())?;
    for entry in spec.entries().iter().take(m) {
        if entry.magnitude == 0.0 {
            break; // entries are sorted, the rest are zero too
        }
        let factors: Vec<Vec<f64>> = (0..h.order())
            .map(|k| h.factors[k].column(entry.multi_index[k]))
            .collect();
        let outermost_first: Vec<Vec<f64>> = factors.iter().rev().cloned().collect();
        let rank_one = outer_product(&outermost_first)?;
        approx.add_scaled_in_place(&rank_one, entry.value);
        terms.push(RankOneTerm {
            scale: entry.value,
            factors,
        });
    }
    Ok((terms, approx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::tensor::{frobenius, tensorize, DenseTensor};

    fn random_matrix(rows: usize, cols: usize, rng: &mut SplitMix64) -> Matrix {
        Matrix::from_rows(
            (0..rows)
                .map(|_| (0..cols).map(|_| rng.next_normal()).collect())
                .collect(),
        )
        .unwrap()
    }

    fn random_tensor(l: usize, k: usize, rng: &mut SplitMix64) -> DenseTensor {
        let len = l.pow(k as u32);
        DenseTensor::from_data(l, k, (0..len).map(|_| rng.next_normal()).collect()).unwrap()
    }

    fn assert_orthonormal_columns(m: &Matrix, tol: f64) {
        for a in 0..m.cols() {
            for b in 0..m.cols() {
                let dot: f64 = (0..m.rows()).map(|i| m.get(i, a) * m.get(i, b)).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() <= tol, "({a},{b}) dot {dot}");
            }
        }
    }

    /// Eigenvalues of the symmetric matrix a^T a via the classic two-sided
    /// Jacobi eigenvalue iteration -- an independent route to the singular
    /// values, used only as a test oracle.
    fn gram_eigenvalues(a: &Matrix) -> Vec<f64> {
        let n = a.cols();
        let mut g = vec![vec![0.0; n]; n];
        for (i, row) in g.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..a.rows()).map(|r| a.get(r, i) * a.get(r, j)).sum();
            }
        }
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += g[p][q] * g[p][q];
                }
            }
            if off <= 1e-28 {
                break;
            }
            for p in 0..n.saturating_sub(1) {
                for q in (p + 1)..n {
                    if g[p][q].abs() <= 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (g[q][q] - g[p][p]) / g[p][q];
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..n {
                        let gip = g[i][p];
                        let giq = g[i][q];
                        g[i][p] = c * gip - s * giq;
                        g[i][q] = s * gip + c * giq;
                    }
                    for i in 0..n {
                        let gpi = g[p][i];
                        let gqi = g[q][i];
                        g[p][i] = c * gpi - s * gqi;
                        g[q][i] = s * gpi + c * gqi;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| g[i][i].max(0.0)).collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        eig
    }

    #[test]
    fn svd_of_identity() {
        let r = svd(&Matrix::identity(2)).unwrap();
        assert_eq!(r.singular_values, vec![1.0, 1.0]);
    }

    #[test]
    fn svd_of_diagonal() {
        let a = Matrix::from_rows(vec![vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = svd(&a).unwrap();
        assert_eq!(r.singular_values, vec![3.0, 1.0]);
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((r.u.get(i, j) - expect).abs() <= 1e-14);
                assert!((r.v.get(i, j) - expect).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn svd_reconstructs_and_matches_gram_oracle() {
        let mut rng = SplitMix64::new(9);
        for (rows, cols) in [(4, 7), (7, 4), (5, 5), (2, 16)] {
            let a = random_matrix(rows, cols, &mut rng);
            let r = svd(&a).unwrap();
            assert_orthonormal_columns(&r.u, 1e-10);
            assert_orthonormal_columns(&r.v, 1e-10);
            for w in r.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let recon = r.reconstruct();
            let mut err = 0.0;
            for i in 0..rows {
                for j in 0..cols {
                    err += (a.get(i, j) - recon.get(i, j)).powi(2);
                }
            }
            assert!(
                err.sqrt() <= 1e-10 * a.frobenius_norm(),
                "reconstruction error {}",
                err.sqrt()
            );

            // Oracle on whichever orientation keeps the Gram matrix small.
            let gram = if rows >= cols {
                gram_eigenvalues(&a)
            } else {
                gram_eigenvalues(&a.transpose())
            };
            for (s, lam) in r.singular_values.iter().zip(gram.iter()) {
                assert!(
                    (s - lam.sqrt()).abs() <= 1e-8 * (1.0 + lam.sqrt()),
                    "sigma {s} vs oracle {}",
                    lam.sqrt()
                );
            }
        }
    }

    #[test]
    fn svd_of_zero_matrix_has_orthonormal_factors() {
        let a = Matrix::zeros(3, 2);
        let r = svd(&a).unwrap();
        assert_eq!(r.singular_values, vec![0.0, 0.0]);
        assert_orthonormal_columns(&r.u, 1e-14);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let a = Matrix::from_rows(vec![vec![f64::NAN]]).unwrap();
        assert!(svd(&a).is_err());
    }

    #[test]
    fn hosvd_of_rank_one_tensor() {
        let u = vec![1.0, 2.0];
        let v = vec![0.5, -1.0];
        let w = vec![2.0, 3.0];
        let t = outer_product(&[u.clone(), v.clone(), w.clone()]).unwrap();
        let h = hosvd(&t).unwrap();
        let spec = spectrum(&h);
        let prod = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let expect = prod(&u) * prod(&v) * prod(&w);
        assert!((spec.entries()[0].magnitude - expect).abs() <= 1e-12 * expect);
        for e in &spec.entries()[1..] {
            assert!(e.magnitude <= 1e-12, "stray entry {}", e.magnitude);
        }
    }

    #[test]
    fn hosvd_on_matrices_agrees_with_svd() {
        let mut rng = SplitMix64::new(10);
        let t = random_tensor(3, 2, &mut rng);
        let h = hosvd(&t).unwrap();
        let spec = spectrum(&h);
        let m = unfold(&t, 1).unwrap();
        let sv = svd(&m).unwrap();
        // Order-2 core is diagonal up to sign; its sorted magnitudes are the
        // singular values.
        for (i, s) in sv.singular_values.iter().enumerate() {
            assert!(
                (spec.entries()[i].magnitude - s).abs() <= 1e-10 * (1.0 + s),
                "rank {i}"
            );
        }
        for e in spec.entries().iter().skip(3) {
            assert!(e.magnitude <= 1e-10);
        }
    }

    #[test]
    fn hosvd_of_exponential_filter_is_rank_one() {
        for k in 1..=4usize {
            let len = 2usize.pow(k as u32);
            let channel: Vec<f64> = (0..len).map(|s| 0.7f64.powi(s as i32)).collect();
            let t = tensorize(&channel, 2, k).unwrap();
            let h = hosvd(&t).unwrap();
            let spec = spectrum(&h);
            assert!(spec.tail_sq(2) <= 1e-18, "K = {k}: {}", spec.tail_sq(2));
        }
    }

    #[test]
    fn hosvd_reconstruction_and_norm_preservation() {
        let mut rng = SplitMix64::new(11);
        for (l, k) in [(2, 3), (3, 3), (2, 4)] {
            let t = random_tensor(l, k, &mut rng);
            let h = hosvd(&t).unwrap();
            let norm = frobenius(&t);
            assert!((frobenius(h.core()) - norm).abs() <= 1e-12 * norm);
            let back = reconstruct(&h);
            let err = frobenius(&t.sub(&back).unwrap());
            assert!(err <= 1e-10 * norm, "reconstruction error {err}");
        }
    }

    #[test]
    fn spectrum_of_rank_one_and_parseval() {
        let t = outer_product(&[vec![3.0, 0.0], vec![4.0, 0.0]]).unwrap();
        let h = hosvd(&t).unwrap();
        let spec = spectrum(&h);
        assert!((spec.entries()[0].magnitude - 12.0).abs() <= 1e-12);
        let total: f64 = spec
            .entries()
            .iter()
            .map(|e| e.magnitude * e.magnitude)
            .sum();
        let norm_sq = frobenius(&t).powi(2);
        assert!((total - norm_sq).abs() <= 1e-12 * norm_sq);
    }

    #[test]
    fn spectrum_ties_break_lexicographically() {
        // A core with equal-magnitude entries must order by multi-index.
        let h = hosvd(&tensorize(&[0.0, 1.0, 1.0, 0.0], 2, 2).unwrap()).unwrap();
        let spec = spectrum(&h);
        assert!(spec.entries()[0].multi_index <= spec.entries()[1].multi_index);
    }

    #[test]
    fn truncate_keeps_everything_when_m_is_large() {
        let mut rng = SplitMix64::new(12);
        let t = random_tensor(2, 3, &mut rng);
        let h = hosvd(&t).unwrap();
        let (_, approx) = truncate(&h, 8).unwrap();
        let err = frobenius(&t.sub(&approx).unwrap());
        assert!(err <= 1e-10 * frobenius(&t));
    }

    #[test]
    fn truncate_rank_one_with_one_term_is_exact() {
        let t = outer_product(&[vec![1.0, -2.0], vec![0.3, 0.4], vec![5.0, 1.0]]).unwrap();
        let h = hosvd(&t).unwrap();
        let (terms, approx) = truncate(&h, 1).unwrap();
        assert_eq!(terms.len(), 1);
        let err = frobenius(&t.sub(&approx).unwrap());
        assert!(err <= 1e-12 * frobenius(&t));
    }

    #[test]
    fn truncation_error_equals_dropped_tail() {
        let mut rng = SplitMix64::new(13);
        let t = random_tensor(2, 3, &mut rng);
        let h = hosvd(&t).unwrap();
        let spec = spectrum(&h);
        for m in 1..=4 {
            let (_, approx) = truncate(&h, m).unwrap();
            let err_sq = frobenius(&t.sub(&approx).unwrap()).powi(2);
            let dropped = spec.tail_sq(m + 1);
            assert!(
                (err_sq - dropped).abs() <= 1e-10 * (1.0 + dropped),
                "m = {m}: {err_sq} vs {dropped}"
            );
        }
    }

    #[test]
    fn truncate_of_zero_tensor_returns_no_terms() {
        let t = DenseTensor::zeros(2, 3).unwrap();
        let h = hosvd(&t).unwrap();
        let (terms, approx) = truncate(&h, 4).unwrap();
        assert!(terms.is_empty());
        assert_eq!(frobenius(&approx), 0.0);
    }

    #[test]
    fn truncate_rejects_zero_terms() {
        let t = DenseTensor::zeros(2, 2).unwrap();
        let h = hosvd(&t).unwrap();
        assert!(truncate(&h, 0).is_err());
    }

    #[test]
    fn rank_one_basis_tensors_are_orthonormal() {
        let mut rng = SplitMix64::new(14);
        let t = random_tensor(2, 3, &mut rng);
        let h = hosvd(&t).unwrap();
        let spec = spectrum(&h);
        let basis: Vec<DenseTensor> = spec
            .entries()
            .iter()
            .map(|e| {
                let factors: Vec<Vec<f64>> = (0..3)
                    .rev()
                    .map(|k| h.factor(k + 1).column(e.multi_index[k]))
                    .collect();
                outer_product(&factors).unwrap()
            })
            .collect();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let dot: f64 = a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() <= 1e-10, "({i},{j}) dot {dot}");
            }
        }
    }

    #[test]
    fn core_is_all_orthogonal_with_ordered_slices() {
        let mut rng = SplitMix64::new(15);
        let t = random_tensor(3, 3, &mut rng);
        let h = hosvd(&t).unwrap();
        let core = h.core();
        let norm_sq = frobenius(core).powi(2);
        for mode in 1..=3 {
            let m = unfold(core, mode).unwrap();
            let mut slice_norms = Vec::new();
            for a in 0..3 {
                let mut self_dot = 0.0;
                for b in 0..3 {
                    let dot: f64 = (0..m.cols()).map(|c| m.get(a, c) * m.get(b, c)).sum();
                    if a == b {
                        self_dot = dot;
                    } else {
                        assert!(
                            dot.abs() <= 1e-10 * norm_sq,
                            "mode {mode} slices {a},{b}: {dot}"
                        );
                    }
                }
                slice_norms.push(self_dot.sqrt());
            }
            for w in slice_norms.windows(2) {
                assert!(w[0] >= w[1] - 1e-10 * norm_sq.sqrt());
            }
        }
    }

    #[test]
    fn spectrum_csv_has_pinned_columns() {
        let t = tensorize(&[1.0, 0.0, 0.0, 0.0], 2, 2).unwrap();
        let h = hosvd(&t).unwrap();
        let csv = spectrum(&h).to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "rank,magnitude,signed_value,multi_index"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("1,"));
        assert!(first.ends_with(",0;0"));
    }
}
