//! Python bindings for the ltcn toolkit.
//!
//! Exposes the kernel and network types plus the analysis entry points:
//! target generation, functional evaluation and error norms, decomposition
//! spectra, complexity constants, constructive approximation, and the
//! forward/inverse verification sweeps.
//!
//! Build with `cargo build --release -p ltcn-py`; the resulting
//! `libltcn.so` imports as the `ltcn` module once renamed to `ltcn.so`
//! (see python/smoke_test.py).

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use ltcn_core::bounds;
use ltcn_core::complexity::{
    self, fit_memory_envelope, fit_spectral_envelope, parse_envelope_spec, DecayEnvelope,
    EnvelopeSpec,
};
use ltcn_core::error::Error as CoreError;
use ltcn_core::hosvd;
use ltcn_core::network::ConvNetParams;
use ltcn_core::seq::{self, FunctionalKernel, ScalarSeq, VectorSeq};
use ltcn_core::targets;
use ltcn_core::tensor;

fn to_py_err(err: CoreError) -> PyErr {
    match err {
        CoreError::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn make_input(start: i64, values: Vec<Vec<f64>>) -> PyResult<VectorSeq> {
    VectorSeq::new(start, values).map_err(to_py_err)
}

fn seq_pair(s: &ScalarSeq) -> (i64, Vec<f64>) {
    (s.start(), s.values().to_vec())
}

fn resolve_envelope(
    spec: &str,
    rho: &FunctionalKernel,
    which: Tail,
    l: usize,
    k_max: usize,
) -> PyResult<DecayEnvelope> {
    match parse_envelope_spec(spec).map_err(to_py_err)? {
        EnvelopeSpec::Given(env) => Ok(env),
        EnvelopeSpec::Fit => match which {
            Tail::Spectral => fit_spectral_envelope(rho, l, k_max).map_err(to_py_err),
            Tail::Memory => fit_memory_envelope(rho).map_err(to_py_err),
        },
    }
}

enum Tail {
    Spectral,
    Memory,
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

/// Kernel of a causal linear time-homogeneous functional: one scalar
/// sequence per input dimension, supported on [0, horizon).
#[pyclass(module = "ltcn", skip_from_py_object)]
#[derive(Clone)]
struct Kernel {
    inner: FunctionalKernel,
}

#[pymethods]
impl Kernel {
    #[new]
    fn new(channels: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: FunctionalKernel::new(channels).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn channels(&self) -> Vec<Vec<f64>> {
        self.inner.channels().to_vec()
    }

    fn l2_norm(&self) -> f64 {
        self.inner.l2_norm()
    }

    /// Kernel energy beyond lag s.
    fn memory_tail(&self, s: usize) -> f64 {
        complexity::memory_tail(&self.inner, s)
    }

    /// Restriction to lags [0, n), zero-padded to length n.
    fn restrict(&self, n: usize) -> Kernel {
        Kernel {
            inner: self.inner.restrict(n),
        }
    }

    fn sub(&self, other: &Kernel) -> PyResult<Kernel> {
        Ok(Kernel {
            inner: self.inner.sub(&other.inner).map_err(to_py_err)?,
        })
    }

    fn scale(&self, c: f64) -> Kernel {
        Kernel {
            inner: self.inner.scale(c),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Kernel> {
        Ok(Kernel {
            inner: FunctionalKernel::from_json(text).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Kernel(d={}, horizon={}, l2_norm={:.6})",
            self.inner.dim(),
            self.inner.horizon(),
            self.inner.l2_norm()
        )
    }
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

/// A linear dilated temporal convolutional network.
#[pyclass(module = "ltcn", skip_from_py_object)]
#[derive(Clone)]
struct Network {
    inner: ConvNetParams,
}

#[pymethods]
impl Network {
    #[getter]
    fn filter_len(&self) -> usize {
        self.inner.filter_len()
    }

    #[getter]
    fn layers(&self) -> usize {
        self.inner.layers()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    /// Length of the effective filter, filter_len ** layers.
    #[getter]
    fn receptive_field(&self) -> PyResult<usize> {
        self.inner.receptive_field().map_err(to_py_err)
    }

    /// Run the network on a finitely supported input; returns
    /// (output_start, output_values).
    fn forward(&self, start: i64, values: Vec<Vec<f64>>) -> PyResult<(i64, Vec<f64>)> {
        let x = make_input(start, values)?;
        Ok(seq_pair(&self.inner.forward(&x).map_err(to_py_err)?))
    }

    /// The kernel this network represents.
    fn effective_filter(&self) -> PyResult<Kernel> {
        Ok(Kernel {
            inner: self.inner.effective_filter().map_err(to_py_err)?,
        })
    }

    /// Response to the canonical impulse on one input dimension.
    fn impulse_response(&self, dim: usize) -> PyResult<(i64, Vec<f64>)> {
        Ok(seq_pair(&self.inner.impulse_response(dim).map_err(to_py_err)?))
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Network> {
        Ok(Network {
            inner: ConvNetParams::from_json(text).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(l={}, K={}, M={}, d={})",
            self.inner.filter_len(),
            self.inner.layers(),
            self.inner.channels(),
            self.inner.input_dim()
        )
    }
}

// ---------------------------------------------------------------------------
// Result wrappers
// ---------------------------------------------------------------------------

/// One grid point of an approximation sweep.
#[pyclass(module = "ltcn", skip_from_py_object)]
#[derive(Clone)]
struct JacksonPoint {
    inner: bounds::JacksonPoint,
}

#[pymethods]
impl JacksonPoint {
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn error_sq(&self) -> f64 {
        self.inner.error_sq
    }

    #[getter]
    fn bound(&self) -> Option<f64> {
        self.inner.bound
    }

    #[getter]
    fn spectral_tail(&self) -> f64 {
        self.inner.spectral_tail
    }

    #[getter]
    fn memory_tail(&self) -> f64 {
        self.inner.memory_tail
    }

    #[getter]
    fn net_channels(&self) -> usize {
        self.inner.net_channels
    }

    fn __repr__(&self) -> String {
        format!(
            "JacksonPoint(M={}, K={}, error_sq={:.3e})",
            self.inner.m, self.inner.k, self.inner.error_sq
        )
    }
}

/// Complexity constants of a target against a pair of envelopes. `c1` and
/// `c2` are None exactly when the constant is infinite.
#[pyclass(module = "ltcn", skip_from_py_object)]
#[derive(Clone)]
struct ComplexityReport {
    inner: complexity::ComplexityReport,
}

#[pymethods]
impl ComplexityReport {
    #[getter]
    fn c1(&self) -> Option<f64> {
        self.inner.c1
    }

    #[getter]
    fn c2(&self) -> Option<f64> {
        self.inner.c2
    }

    #[getter]
    fn c1_witness(&self) -> (usize, usize) {
        (self.inner.c1_witness_s, self.inner.c1_witness_k)
    }

    #[getter]
    fn c2_witness(&self) -> usize {
        self.inner.c2_witness_s
    }

    #[getter]
    fn c1_converged(&self) -> bool {
        self.inner.c1_converged
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("ComplexityReport(c1={:?}, c2={:?})", self.inner.c1, self.inner.c2)
    }
}

/// Outcome of a forward verification sweep.
#[pyclass(module = "ltcn", skip_from_py_object)]
#[derive(Clone)]
struct JacksonSweep {
    inner: bounds::JacksonSweep,
}

#[pymethods]
impl JacksonSweep {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.inner.c1
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.inner.c2
    }

    fn points(&self) -> Vec<JacksonPoint> {
        self.inner
            .points
            .iter()
            .map(|p| JacksonPoint { inner: p.clone() })
            .collect()
    }

    /// The sweep as CSV (same format the command-line tool writes).
    fn csv(&self) -> String {
        bounds::sweep_csv(&self.inner.points)
    }

    fn __repr__(&self) -> String {
        format!(
            "JacksonSweep(passed={}, points={})",
            self.inner.passed,
            self.inner.points.len()
        )
    }
}

/// Outcome of an inverse verification run.
#[pyclass(module = "ltcn", skip_from_py_object)]
#[derive(Clone)]
struct BernsteinResult {
    inner: bounds::BernsteinVerification,
}

#[pymethods]
impl BernsteinResult {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed
    }

    #[getter]
    fn a_est(&self) -> f64 {
        self.inner.estimate.a_est
    }

    #[getter]
    fn b_est(&self) -> f64 {
        self.inner.estimate.b_est
    }

    #[getter]
    fn memory_floor(&self) -> f64 {
        self.inner.estimate.memory_floor
    }

    #[getter]
    fn c1(&self) -> Option<f64> {
        self.inner.c1
    }

    #[getter]
    fn c2(&self) -> Option<f64> {
        self.inner.c2
    }

    #[getter]
    fn c1_check(&self) -> bool {
        self.inner.c1_check
    }

    #[getter]
    fn c2_check(&self) -> bool {
        self.inner.c2_check
    }

    fn points(&self) -> Vec<JacksonPoint> {
        self.inner
            .points
            .iter()
            .map(|p| JacksonPoint { inner: p.clone() })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "BernsteinResult(passed={}, a_est={:.3e}, b_est={:.3e})",
            self.inner.passed, self.inner.estimate.a_est, self.inner.estimate.b_est
        )
    }
}

// ---------------------------------------------------------------------------
// Module functions
// ---------------------------------------------------------------------------

/// Generate a synthetic target from a spec string: shift:<k>,
/// exp:<lambda>:<horizon>, pow:<alpha>:<horizon>, lowrank:<l>:<K>:<rank>, or
/// file:<kernel.json>.
#[pyfunction]
#[pyo3(signature = (spec, d = 1, seed = 0))]
fn target(spec: &str, d: usize, seed: u64) -> PyResult<Kernel> {
    let parsed = targets::parse_target_spec(spec, d, seed).map_err(to_py_err)?;
    Ok(Kernel {
        inner: targets::generate(&parsed).map_err(to_py_err)?.kernel,
    })
}

/// Causal dilated convolution of filter taps (at lags 0..len) with a scalar
/// signal; returns (output_start, output_values).
#[pyfunction]
#[pyo3(signature = (filter, signal_values, dilation, signal_start = 0))]
fn dilated_convolve(
    filter: Vec<f64>,
    signal_values: Vec<f64>,
    dilation: usize,
    signal_start: i64,
) -> PyResult<(i64, Vec<f64>)> {
    let signal = ScalarSeq::new(signal_start, signal_values);
    Ok(seq_pair(
        &seq::dilated_convolve(&filter, &signal, dilation).map_err(to_py_err)?,
    ))
}

/// Evaluate the functional represented by a kernel on an input at time t.
#[pyfunction]
fn apply_functional(kernel: &Kernel, start: i64, values: Vec<Vec<f64>>, t: i64) -> PyResult<f64> {
    let x = make_input(start, values)?;
    seq::apply_functional(&kernel.inner, &x, t).map_err(to_py_err)
}

#[pyfunction]
fn kernel_l2_distance(a: &Kernel, b: &Kernel) -> PyResult<f64> {
    seq::kernel_l2_distance(&a.inner, &b.inner).map_err(to_py_err)
}

/// Worst-case output gap over the unit input ball (equals the kernel
/// distance).
#[pyfunction]
fn functional_error_norm(a: &Kernel, b: &Kernel) -> PyResult<f64> {
    seq::functional_error_norm(&a.inner, &b.inner).map_err(to_py_err)
}

/// The unit-norm input attaining the worst-case gap of a difference kernel
/// at time t; returns (start, values).
#[pyfunction]
fn worst_case_input(delta: &Kernel, t: i64) -> PyResult<(i64, Vec<Vec<f64>>)> {
    let x = seq::worst_case_input(&delta.inner, t).map_err(to_py_err)?;
    let values = (0..x.steps())
        .map(|i| {
            let time = x.start() + i as i64;
            (0..x.dim()).map(|j| x.component(time, j)).collect()
        })
        .collect();
    Ok((x.start(), values))
}

/// Monte-Carlo mean-square gap under iid standard normal inputs.
#[pyfunction]
#[pyo3(signature = (a, b, n_samples, seed = 0))]
fn gaussian_mse(a: &Kernel, b: &Kernel, n_samples: usize, seed: u64) -> PyResult<f64> {
    seq::gaussian_mse(&a.inner, &b.inner, n_samples, seed).map_err(to_py_err)
}

/// Closed form of the same expectation: the squared kernel distance.
#[pyfunction]
fn gaussian_mse_exact(a: &Kernel, b: &Kernel) -> PyResult<f64> {
    seq::gaussian_mse_exact(&a.inner, &b.inner).map_err(to_py_err)
}

/// Decomposition spectrum per input dimension of the kernel restricted to
/// the window l**k: lists of (magnitude, signed_value, multi_index).
#[pyfunction]
fn spectrum(kernel: &Kernel, l: usize, k: usize) -> PyResult<Vec<Vec<(f64, f64, Vec<usize>)>>> {
    let window = l
        .checked_pow(k as u32)
        .ok_or_else(|| PyValueError::new_err(format!("l**K overflows for {l}**{k}")))?;
    let restricted = kernel.inner.restrict(window);
    let mut out = Vec::with_capacity(restricted.dim());
    for j in 0..restricted.dim() {
        let tens = tensor::tensorize(restricted.channel(j), l, k).map_err(to_py_err)?;
        let spec = hosvd::spectrum(&hosvd::hosvd(&tens).map_err(to_py_err)?);
        out.push(
            spec.entries()
                .iter()
                .map(|e| (e.magnitude, e.value, e.multi_index.clone()))
                .collect(),
        );
    }
    Ok(out)
}

/// Complexity constants of a kernel against envelope specs (`"fit"` uses
/// the kernel's own measured tails).
#[pyfunction]
fn complexity_report(
    kernel: &Kernel,
    g: &str,
    f: &str,
    l: usize,
    k_max: usize,
) -> PyResult<ComplexityReport> {
    let ge = resolve_envelope(g, &kernel.inner, Tail::Spectral, l, k_max)?;
    let fe = resolve_envelope(f, &kernel.inner, Tail::Memory, l, k_max)?;
    Ok(ComplexityReport {
        inner: complexity::complexity_report(&kernel.inner, &ge, &fe, l, k_max)
            .map_err(to_py_err)?,
    })
}

/// Best M-term network for a kernel at geometry (l, K); returns
/// (Network, JacksonPoint).
#[pyfunction]
fn jackson_approximate(
    kernel: &Kernel,
    l: usize,
    k: usize,
    m: usize,
) -> PyResult<(Network, JacksonPoint)> {
    let (net, point) = bounds::jackson_approximate(&kernel.inner, l, k, m).map_err(to_py_err)?;
    Ok((Network { inner: net }, JacksonPoint { inner: point }))
}

/// Check the forward rate bound over a grid of (M, K) pairs.
#[pyfunction]
fn verify_jackson(
    kernel: &Kernel,
    g: &str,
    f: &str,
    l: usize,
    grid: Vec<(usize, usize)>,
) -> PyResult<JacksonSweep> {
    let k_max = grid.iter().map(|&(_, k)| k).max().unwrap_or(1);
    let ge = resolve_envelope(g, &kernel.inner, Tail::Spectral, l, k_max)?;
    let fe = resolve_envelope(f, &kernel.inner, Tail::Memory, l, k_max)?;
    Ok(JacksonSweep {
        inner: bounds::verify_jackson(&kernel.inner, &ge, &fe, l, &grid).map_err(to_py_err)?,
    })
}

/// Recover complexity constants from achieved errors over a grid and check
/// them against the measured ones.
#[pyfunction]
fn verify_bernstein(
    kernel: &Kernel,
    g: &str,
    f: &str,
    l: usize,
    grid: Vec<(usize, usize)>,
) -> PyResult<BernsteinResult> {
    let k_max = grid.iter().map(|&(_, k)| k).max().unwrap_or(1);
    let ge = resolve_envelope(g, &kernel.inner, Tail::Spectral, l, k_max)?;
    let fe = resolve_envelope(f, &kernel.inner, Tail::Memory, l, k_max)?;
    Ok(BernsteinResult {
        inner: bounds::verify_bernstein(&kernel.inner, &ge, &fe, l, &grid).map_err(to_py_err)?,
    })
}

#[pymodule]
fn ltcn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Kernel>()?;
    m.add_class::<Network>()?;
    m.add_class::<JacksonPoint>()?;
    m.add_class::<ComplexityReport>()?;
    m.add_class::<JacksonSweep>()?;
    m.add_class::<BernsteinResult>()?;
    m.add_function(wrap_pyfunction!(target, m)?)?;
    m.add_function(wrap_pyfunction!(dilated_convolve, m)?)?;
    m.add_function(wrap_pyfunction!(apply_functional, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_l2_distance, m)?)?;
    m.add_function(wrap_pyfunction!(functional_error_norm, m)?)?;
    m.add_function(wrap_pyfunction!(worst_case_input, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_mse, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_mse_exact, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(complexity_report, m)?)?;
    m.add_function(wrap_pyfunction!(jackson_approximate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_jackson, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bernstein, m)?)?;
    Ok(())
}
