//! Python bindings. Bit vectors cross the boundary as strings of `0`/`1`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use oneshot_core::checks::cpf_battery;
use oneshot_core::coset_state::SymbolicCosetState;
use oneshot_core::ecc::LinearCode;
use oneshot_core::experiments::{run_experiment as run_core_experiment, ExperimentConfig, ExperimentName};
use oneshot_core::oss;
use oneshot_core::{BitVec, Coset, DeterministicRng, Error, OracleSuite, Params, Seed, Subspace};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParams(_) | Error::InvalidHex { .. } | Error::InvalidSeed(_) | Error::DimensionMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn bits(s: &str, len: usize) -> PyResult<BitVec> {
    if s.len() != len || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(PyValueError::new_err(format!("expected a {len}-bit string, got {s:?}")));
    }
    Ok(BitVec::from_bit_str(s))
}

fn any_bits(s: &str) -> PyResult<BitVec> {
    bits(s, s.len())
}

#[pyclass(name = "Params", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: Params,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (n, r, k, ell_code, msg_len, rounds = 3, lambda_ = 1))]
    fn new(n: usize, r: usize, k: usize, ell_code: usize, msg_len: usize, rounds: usize, lambda_: usize) -> PyResult<Self> {
        let inner = Params {
            lambda: lambda_,
            s: 0,
            r,
            n,
            k,
            ell_code,
            rounds,
            bloat_s: None,
            msg_len,
        };
        inner.validate().map_err(py_err)?;
        Ok(PyParams { inner })
    }

    #[staticmethod]
    fn toy() -> Self {
        PyParams { inner: Params::toy() }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn ell_code(&self) -> usize {
        self.inner.ell_code
    }

    #[getter]
    fn msg_len(&self) -> usize {
        self.inner.msg_len
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("plain data serializes")
    }

    fn __repr__(&self) -> String {
        format!("Params({})", self.to_json())
    }
}

/// Oracles, a sampled code and a signing RNG under one seed.
#[pyclass(name = "Scheme")]
struct PyScheme {
    suite: OracleSuite,
    code: LinearCode,
    rng: DeterministicRng,
}

#[pyclass(name = "KeyPair")]
struct PyKeyPair {
    inner: oss::KeyPair,
}

#[pymethods]
impl PyKeyPair {
    #[getter]
    fn pk(&self) -> String {
        self.inner.pk.to_bit_string()
    }

    #[getter]
    fn spent(&self) -> bool {
        self.inner.is_spent()
    }

    /// Dimension of the coset carried by the secret state.
    fn secret_dim(&self) -> usize {
        self.inner.secret_state().support().dim()
    }
}

#[pymethods]
impl PyScheme {
    #[new]
    #[pyo3(signature = (seed = 0, params = None))]
    fn new(seed: u64, params: Option<PyParams>) -> PyResult<Self> {
        let params = params.map_or_else(Params::toy, |p| p.inner);
        let seed = Seed::from_u64(seed);
        let code = LinearCode::sample(&mut DeterministicRng::new(&seed, "code"), params.msg_len, params.ell_code)
            .map_err(py_err)?;
        Ok(PyScheme {
            suite: OracleSuite::new(params, seed).map_err(py_err)?,
            code,
            rng: DeterministicRng::new(&seed, "python"),
        })
    }

    #[getter]
    fn params(&self) -> PyParams {
        PyParams {
            inner: self.suite.params().clone(),
        }
    }

    /// Returns `(y, u)`.
    fn p_forward(&mut self, x: &str) -> PyResult<(String, String)> {
        let out = self.suite.p_forward(&bits(x, self.suite.params().n)?).map_err(py_err)?;
        Ok((out.y.to_bit_string(), out.u.to_bit_string()))
    }

    fn p_inverse(&mut self, y: &str, u: &str) -> PyResult<Option<String>> {
        let p = self.suite.params();
        let (y, u) = (bits(y, p.r)?, bits(u, p.k)?);
        Ok(self.suite.p_inverse(&y, &u).map_err(py_err)?.map(|x| x.to_bit_string()))
    }

    fn d_oracle(&mut self, y: &str, v: &str) -> PyResult<Option<String>> {
        let p = self.suite.params();
        let (y, v) = (bits(y, p.r)?, bits(v, p.k)?);
        Ok(self.suite.d_oracle(&y, &v).map_err(py_err)?.map(|c| c.to_bit_string()))
    }

    fn h(&mut self, x: &str) -> PyResult<String> {
        let x = bits(x, self.suite.params().n)?;
        Ok(self.suite.h(&x).map_err(py_err)?.to_bit_string())
    }

    fn keygen(&mut self) -> PyResult<PyKeyPair> {
        let inner = oss::siggen(&mut self.suite, &mut self.rng).map_err(py_err)?;
        Ok(PyKeyPair { inner })
    }

    /// Returns `(sigma, decoded)`. Raises on a spent key.
    fn sign(&mut self, key: &mut PyKeyPair, message: &str) -> PyResult<(String, bool)> {
        let m = bits(message, self.code.msg_len())?;
        let (sig, tr) = oss::sign(&mut self.suite, &mut key.inner, &m, &self.code, &mut self.rng).map_err(py_err)?;
        Ok((sig.sigma.to_bit_string(), tr.success))
    }

    fn verify(&mut self, pk: &str, message: &str, sigma: &str) -> PyResult<bool> {
        let p = self.suite.params();
        let (pk, sigma) = (bits(pk, p.r)?, bits(sigma, p.k)?);
        let m = bits(message, self.code.msg_len())?;
        Ok(oss::verify(&mut self.suite, &pk, &m, &sigma, &self.code))
    }
}

/// Uniform superposition over an affine coset, with optional phase.
#[pyclass(name = "CosetState", from_py_object)]
#[derive(Clone)]
struct PyCosetState {
    inner: SymbolicCosetState,
}

#[pymethods]
impl PyCosetState {
    #[new]
    #[pyo3(signature = (generators, offset, phase = None))]
    fn new(generators: Vec<String>, offset: &str, phase: Option<&str>) -> PyResult<Self> {
        let k = offset.len();
        let gens = generators.iter().map(|g| bits(g, k)).collect::<PyResult<Vec<_>>>()?;
        let support = Coset::new(Subspace::from_generators(k, &gens).map_err(py_err)?, &any_bits(offset)?).map_err(py_err)?;
        let inner = match phase {
            Some(p) => SymbolicCosetState::with_phase(support, &bits(p, k)?).map_err(py_err)?,
            None => SymbolicCosetState::uniform_over(support),
        };
        Ok(PyCosetState { inner })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.ambient()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.support().dim()
    }

    fn contains(&self, u: &str) -> PyResult<bool> {
        Ok(self.inner.support().contains(&bits(u, self.inner.ambient())?))
    }

    fn hadamard(&self) -> Self {
        PyCosetState {
            inner: self.inner.hadamard_all(),
        }
    }

    /// Returns `(outcome, post_state)`.
    #[pyo3(signature = (indices, seed = 0))]
    fn measure_bits(&self, indices: Vec<usize>, seed: u64) -> PyResult<(String, Self)> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.inner.ambient()) {
            return Err(PyValueError::new_err(format!("index {i} out of range")));
        }
        let mut rng = DeterministicRng::new(&Seed::from_u64(seed), "measure");
        let (out, post) = self.inner.measure_bits(&indices, &mut rng).map_err(py_err)?;
        Ok((out.to_bit_string(), PyCosetState { inner: post }))
    }

    /// Integer amplitudes over all `2^k` basis states, up to normalization.
    fn amplitudes(&self) -> PyResult<Vec<i64>> {
        Ok(self.inner.to_dense().map_err(py_err)?.amplitudes().to_vec())
    }
}

/// Runs one experiment and returns its JSON-lines report.
#[pyfunction]
#[pyo3(signature = (name, trials = None, seed = 0))]
fn run_experiment(name: &str, trials: Option<usize>, seed: u64) -> PyResult<(String, bool)> {
    let name: ExperimentName = name.parse().map_err(py_err)?;
    let cfg = ExperimentConfig::new(name, trials.unwrap_or_else(|| name.default_trials()), Seed::from_u64(seed));
    let report = run_core_experiment(&cfg).map_err(py_err)?;
    Ok((report.to_jsonl(), report.passed))
}

/// Exhaustive folding-CPF battery; returns `(check, passed)` pairs.
#[pyfunction]
#[pyo3(signature = (n = 12, r = 8, seed = 0))]
fn cpf_selftest(n: usize, r: usize, seed: u64) -> PyResult<Vec<(String, bool)>> {
    let report = cpf_battery(n, r, &Seed::from_u64(seed)).map_err(py_err)?;
    Ok(report.checks.into_iter().map(|c| (c.name, c.passed)).collect())
}

#[pymodule]
fn pyoneshot(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyScheme>()?;
    m.add_class::<PyKeyPair>()?;
    m.add_class::<PyCosetState>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(cpf_selftest, m)?)?;
    Ok(())
}
