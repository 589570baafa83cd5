//! Python bindings: `import qcmc`.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qcmc_core::attacks::{dca_wf_for, h_enumeration_wf, isda_wf_for};
use qcmc_core::crypto::{self, KeyMode};
use qcmc_core::decoder::{Algorithm, DecoderConfig};
use qcmc_core::design::{self, Construction};
use qcmc_core::gf2::BitPolynomial;
use qcmc_core::keyfile::{self, Ciphertext};
use qcmc_core::optimizer::{self, OptimizerConfig};
use qcmc_core::rng::{Seed, Stream};
use qcmc_core::sim;
use qcmc_core::threshold::{bf_threshold_detail, ThresholdQuery};

create_exception!(qcmc, QcmcError, PyException);
create_exception!(qcmc, ParameterError, QcmcError);
create_exception!(qcmc, DecodingFailure, QcmcError);
create_exception!(qcmc, KeygenFailure, QcmcError);
create_exception!(qcmc, FormatError, QcmcError);

fn to_py(e: qcmc_core::Error) -> PyErr {
    let msg = e.to_string();
    match e {
        qcmc_core::Error::Parameter(_) => ParameterError::new_err(msg),
        qcmc_core::Error::DecodingFailure { .. } => DecodingFailure::new_err(msg),
        qcmc_core::Error::KeygenFailure(_) => KeygenFailure::new_err(msg),
        qcmc_core::Error::Format(_) => FormatError::new_err(msg),
        _ => QcmcError::new_err(format!("{}: {msg}", e.category())),
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for qcmc_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

#[derive(FromPyObject)]
enum SeedArg {
    Int(u64),
    Text(String),
}

impl SeedArg {
    fn seed(&self) -> PyResult<Seed> {
        match self {
            SeedArg::Int(v) => Ok(Seed::from_u64(*v)),
            SeedArg::Text(s) => s.parse().py(),
        }
    }
}

#[pyclass(name = "SystemParams", module = "qcmc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySystemParams {
    inner: design::SystemParams,
}

#[pymethods]
impl PySystemParams {
    /// `w` is the n0×n0 weight pattern of Q; alternatively `w_sum` picks one
    /// with that total. Neither gives m = 1.
    #[new]
    #[pyo3(signature = (n0, p, d_v, t, w=None, w_sum=None))]
    fn new(n0: usize, p: usize, d_v: usize, t: usize, w: Option<Vec<Vec<usize>>>, w_sum: Option<usize>) -> PyResult<Self> {
        let w = match (w, w_sum) {
            (Some(_), Some(_)) => return Err(ParameterError::new_err("give either w or w_sum, not both")),
            (Some(w), None) => w,
            (None, Some(total)) => design::transform_pattern(n0, total).py()?,
            (None, None) => design::identity_pattern(n0),
        };
        Ok(PySystemParams { inner: design::SystemParams::new(n0, p, d_v, w, t).py()? })
    }

    #[getter]
    fn n0(&self) -> usize {
        self.inner.n0
    }
    #[getter]
    fn p(&self) -> usize {
        self.inner.p
    }
    #[getter]
    fn d_v(&self) -> usize {
        self.inner.d_v
    }
    #[getter]
    fn t(&self) -> usize {
        self.inner.t
    }
    #[getter]
    fn w(&self) -> Vec<Vec<usize>> {
        self.inner.w.clone()
    }
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }
    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }
    #[getter]
    fn m(&self) -> f64 {
        self.inner.m()
    }
    #[getter]
    fn t_prime(&self) -> usize {
        self.inner.t_prime()
    }
    #[getter]
    fn d_v_prime(&self) -> f64 {
        self.inner.d_v_prime()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("SystemParams(n0={}, p={}, d_v={}, t={}, w={:?})", p.n0, p.p, p.d_v, p.t, p.w)
    }
}

fn decoder_config(
    name: &str,
    params: &design::SystemParams,
    t_prime: usize,
    b: Option<usize>,
    delta: usize,
    p0: Option<f64>,
    max_iter: usize,
) -> PyResult<DecoderConfig> {
    let cfg = match name.parse::<Algorithm>().py()? {
        Algorithm::Spa => match p0 {
            Some(p0) => DecoderConfig::spa(p0),
            None => DecoderConfig::spa_for(t_prime, params.n()),
        },
        Algorithm::BfFixed => DecoderConfig::bf_fixed(b.unwrap_or((params.d_v / 2 + 1).min(params.d_v))),
        Algorithm::BfVariable => DecoderConfig::bf_variable(delta),
    };
    Ok(cfg.with_max_iterations(max_iter))
}

#[pyclass(name = "PublicKey", module = "qcmc", frozen)]
struct PyPublicKey {
    inner: crypto::PublicKey,
}

#[pymethods]
impl PyPublicKey {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyPublicKey { inner: keyfile::read_public(text).py()? })
    }

    fn to_text(&self) -> String {
        keyfile::write_public(&self.inner)
    }

    #[getter]
    fn params(&self) -> PySystemParams {
        PySystemParams { inner: self.inner.params.clone() }
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }

    #[getter]
    fn payload_bits(&self) -> usize {
        self.inner.payload_bits()
    }

    /// Encrypts one `k`-bit block given as a list of 0/1 values.
    fn encrypt(&self, u: Vec<u8>, seed: SeedArg) -> PyResult<Vec<u8>> {
        crypto::encrypt(&self.inner, &u, &mut seed.seed()?.rng(Stream::ErrorVector)).py()
    }

    /// Encrypts arbitrary bytes; returns the ciphertext file text.
    fn encrypt_bytes(&self, message: &[u8], seed: SeedArg) -> PyResult<String> {
        let ct = keyfile::encrypt_bytes(&self.inner, message, &mut seed.seed()?.rng(Stream::ErrorVector)).py()?;
        Ok(ct.to_text())
    }
}

#[pyclass(name = "PrivateKey", module = "qcmc", frozen)]
struct PyPrivateKey {
    inner: crypto::PrivateKey,
}

#[pymethods]
impl PyPrivateKey {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyPrivateKey { inner: keyfile::read_private(text).py()? })
    }

    fn to_text(&self) -> String {
        keyfile::write_private(&self.inner)
    }

    fn public_key(&self) -> PyPublicKey {
        PyPublicKey { inner: self.inner.public_key() }
    }

    #[getter]
    fn params(&self) -> PySystemParams {
        PySystemParams { inner: self.inner.params.clone() }
    }

    /// Supports of the circulant blocks of H.
    #[getter]
    fn h_supports(&self) -> Vec<Vec<usize>> {
        self.inner.h.blocks().iter().map(|b| b.indices().to_vec()).collect()
    }

    #[pyo3(signature = (c, decoder="spa", b=None, delta=0, p0=None, max_iter=100))]
    fn decrypt(
        &self,
        py: Python<'_>,
        c: Vec<u8>,
        decoder: &str,
        b: Option<usize>,
        delta: usize,
        p0: Option<f64>,
        max_iter: usize,
    ) -> PyResult<Vec<u8>> {
        let params = &self.inner.params;
        let cfg = decoder_config(decoder, params, params.t_prime(), b, delta, p0, max_iter)?;
        py.detach(|| crypto::decrypt(&self.inner, &c, &cfg)).py()
    }

    #[pyo3(signature = (ciphertext, decoder="spa", b=None, delta=0, p0=None, max_iter=100))]
    fn decrypt_bytes(
        &self,
        py: Python<'_>,
        ciphertext: &str,
        decoder: &str,
        b: Option<usize>,
        delta: usize,
        p0: Option<f64>,
        max_iter: usize,
    ) -> PyResult<Vec<u8>> {
        let params = &self.inner.params;
        let cfg = decoder_config(decoder, params, params.t_prime(), b, delta, p0, max_iter)?;
        let ct = Ciphertext::parse(ciphertext).py()?;
        py.detach(|| keyfile::decrypt_bytes(&self.inner, &ct, &cfg)).py()
    }

    /// Monte Carlo decoding of `t_err` errors on the private code.
    #[pyo3(signature = (t_err, trials, seed, decoder="spa", b=None, delta=0, p0=None, max_iter=100))]
    #[allow(clippy::too_many_arguments)]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        t_err: usize,
        trials: usize,
        seed: SeedArg,
        decoder: &str,
        b: Option<usize>,
        delta: usize,
        p0: Option<f64>,
        max_iter: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = decoder_config(decoder, &self.inner.params, t_err, b, delta, p0, max_iter)?;
        let seed = seed.seed()?;
        let r = py.detach(|| sim::run_trials(&self.inner.h, &cfg, t_err, trials, &seed)).py()?;
        let d = PyDict::new(py);
        d.set_item("t_err", r.t_err)?;
        d.set_item("trials", r.trials)?;
        d.set_item("codeword_errors", r.codeword_errors)?;
        d.set_item("bit_errors", r.bit_errors)?;
        d.set_item("cer", r.cer)?;
        d.set_item("ber", r.ber)?;
        d.set_item("avg_iterations", r.avg_iterations)?;
        d.set_item("ci_low", r.ci_low)?;
        d.set_item("ci_high", r.ci_high)?;
        Ok(d)
    }
}

#[pyfunction]
#[pyo3(signature = (params, seed, mode="classic", construction="random"))]
fn keygen(
    py: Python<'_>,
    params: &PySystemParams,
    seed: SeedArg,
    mode: &str,
    construction: &str,
) -> PyResult<(PyPrivateKey, PyPublicKey)> {
    let mode: KeyMode = mode.parse().py()?;
    let construction: Construction = construction.parse().py()?;
    let seed = seed.seed()?;
    let (sk, pk) = py.detach(|| crypto::keygen_with(&params.inner, &seed, mode, construction)).py()?;
    Ok((PyPrivateKey { inner: sk }, PyPublicKey { inner: pk }))
}

/// Product of two polynomials in GF(2)[x]/(x^p - 1), given by their supports.
#[pyfunction]
fn poly_mul(p: usize, a: Vec<usize>, b: Vec<usize>) -> PyResult<Vec<usize>> {
    let a = BitPolynomial::from_support(p, &a).py()?;
    let b = BitPolynomial::from_support(p, &b).py()?;
    Ok(a.mul(&b).py()?.support())
}

#[pyfunction]
fn poly_inverse(p: usize, a: Vec<usize>) -> PyResult<Vec<usize>> {
    Ok(BitPolynomial::from_support(p, &a).py()?.inverse().py()?.support())
}

/// `(t_max, b_opt)` for a code of length `n` with `n0` blocks of column weight `d_v`.
#[pyfunction]
fn bf_threshold(n: usize, n0: usize, d_v: usize) -> PyResult<(usize, usize)> {
    let r = bf_threshold_detail(&ThresholdQuery::new(n, n0, d_v)).py()?;
    Ok((r.t_max, r.b_opt))
}

/// log2 work factor of the dual-code attack for public column weight `d_v_prime`.
#[pyfunction]
fn dca_wf(n0: usize, p: usize, d_v_prime: usize) -> PyResult<f64> {
    Ok(dca_wf_for(n0, p, n0 * d_v_prime).py()?.log2_wf)
}

/// log2 work factor of information-set decoding of `t` errors.
#[pyfunction]
fn isda_wf(py: Python<'_>, n0: usize, p: usize, t: usize) -> PyResult<f64> {
    Ok(py.detach(|| isda_wf_for(n0, p, t)).py()?.log2_wf)
}

#[pyfunction]
fn h_enumeration_wf_log2(p: usize, d_v: usize) -> PyResult<f64> {
    h_enumeration_wf(p, d_v).py()
}

#[pyfunction]
#[pyo3(signature = (n, d_v_prime, m, iterations=10.0, alpha=1.0))]
fn complexity_c(n: usize, d_v_prime: f64, m: f64, iterations: f64, alpha: f64) -> PyResult<f64> {
    optimizer::complexity_c(n, d_v_prime, m, iterations, alpha).py()
}

#[pyfunction]
fn m_star(d_v_prime: f64, iterations: f64) -> f64 {
    optimizer::m_star(d_v_prime, iterations)
}

#[pyfunction]
fn security_targets(py: Python<'_>, security: f64, n0: usize, p_ref: usize) -> PyResult<(usize, usize)> {
    py.detach(|| optimizer::security_targets(security, n0, p_ref)).py()
}

/// Feasible designs, cheapest first, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (security, n0=4, iterations=10.0, alpha=1.0, d_v_candidates=None, p_grid=None))]
fn optimize<'py>(
    py: Python<'py>,
    security: f64,
    n0: usize,
    iterations: f64,
    alpha: f64,
    d_v_candidates: Option<Vec<usize>>,
    p_grid: Option<Vec<usize>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = OptimizerConfig::new(security, n0);
    cfg.iterations = iterations;
    cfg.alpha = alpha;
    if let Some(c) = d_v_candidates {
        cfg.d_v_candidates = c;
    }
    if let Some(g) = p_grid {
        cfg.p_grid = g;
    }
    let report = py.detach(|| optimizer::optimize_design(&cfg)).py()?;
    report
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("d_v", r.params.d_v)?;
            d.set_item("m", r.m)?;
            d.set_item("p", r.params.p)?;
            d.set_item("n", r.params.n())?;
            d.set_item("w", r.params.w.clone())?;
            d.set_item("t", r.t)?;
            d.set_item("t_prime", r.t_prime)?;
            d.set_item("threshold", r.threshold)?;
            d.set_item("c_log2", r.c_log2)?;
            d.set_item("dca_bits", r.dca_bits)?;
            d.set_item("isda_bits", r.isda_bits)?;
            d.set_item("h_enum_bits", r.h_enum_bits)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn qcmc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("QcmcError", py.get_type::<QcmcError>())?;
    m.add("ParameterError", py.get_type::<ParameterError>())?;
    m.add("DecodingFailure", py.get_type::<DecodingFailure>())?;
    m.add("KeygenFailure", py.get_type::<KeygenFailure>())?;
    m.add("FormatError", py.get_type::<FormatError>())?;
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyPublicKey>()?;
    m.add_class::<PyPrivateKey>()?;
    m.add_function(wrap_pyfunction!(keygen, m)?)?;
    m.add_function(wrap_pyfunction!(poly_mul, m)?)?;
    m.add_function(wrap_pyfunction!(poly_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(bf_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(dca_wf, m)?)?;
    m.add_function(wrap_pyfunction!(isda_wf, m)?)?;
    m.add_function(wrap_pyfunction!(h_enumeration_wf_log2, m)?)?;
    m.add_function(wrap_pyfunction!(complexity_c, m)?)?;
    m.add_function(wrap_pyfunction!(m_star, m)?)?;
    m.add_function(wrap_pyfunction!(security_targets, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    Ok(())
}
