//! Python bindings: dyadic integers, coefficient tables, the hull, the
//! matrix Ruelle iteration and the `verify` suite.

use std::sync::Arc;

use lpjacobi::coeffs::CoeffTable;
use lpjacobi::dynamics::CriticalOrbit;
use lpjacobi::numeric::{mat2_rows, Mat2};
use lpjacobi::suite::{self, RunConfig};
use lpjacobi::{hull, ruelle, DyadicInt, Error, Lambda};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Regime { .. }
        | Error::InvalidDyadic(_)
        | Error::InvalidRational(_)
        | Error::InvalidArgument(_)
        | Error::PrecisionExhausted { .. }
        | Error::TableRange { .. }
        | Error::Domain { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn lambda(text: &str) -> PyResult<Lambda> {
    text.parse().map_err(py_err)
}

type Rows = [[f64; 2]; 2];

/// Truncated dyadic integer, little-endian digits.
#[pyclass(name = "DyadicInt", frozen)]
struct PyDyadic(DyadicInt);

#[pymethods]
impl PyDyadic {
    /// Integer, digit string (`"0110"`) or pattern (`"1(10)*"`).
    #[new]
    #[pyo3(signature = (text, digits = 32))]
    fn new(text: &str, digits: usize) -> PyResult<Self> {
        DyadicInt::parse(text, digits).map(Self).map_err(py_err)
    }

    #[getter]
    fn digits(&self) -> Vec<u32> {
        self.0.digits().iter().map(|&d| d as u32).collect()
    }

    fn shift(&self) -> PyResult<Self> {
        self.0.shift().map(Self).map_err(py_err)
    }

    fn modified_shift(&self) -> PyResult<Self> {
        self.0.modified_shift().map(Self).map_err(py_err)
    }

    fn kappa_map(&self, n_terms: usize) -> PyResult<Self> {
        self.0.kappa_map(n_terms).map(Self).map_err(py_err)
    }

    fn negate(&self) -> Self {
        Self(self.0.negate())
    }

    fn double(&self) -> Self {
        Self(self.0.double())
    }

    fn max_run(&self) -> PyResult<usize> {
        Ok(self.0.run_profile(self.0.precision()).map_err(py_err)?.max_run())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("DyadicInt('{}')", self.0)
    }
}

/// Squared coefficients `a²_n`, exact rationals up to depth 13.
#[pyclass(name = "CoeffTable", frozen)]
struct PyCoeffTable(CoeffTable);

#[pymethods]
impl PyCoeffTable {
    #[new]
    #[pyo3(signature = (lam = "4", depth = 12, allow_small_lambda = false))]
    fn new(lam: &str, depth: usize, allow_small_lambda: bool) -> PyResult<Self> {
        CoeffTable::build_with(&lambda(lam)?, depth, allow_small_lambda).map(Self).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn a_sq(&self, n: usize) -> PyResult<f64> {
        self.check(n)?;
        Ok(self.0.a_sq(n))
    }

    fn a(&self, n: usize) -> PyResult<f64> {
        self.check(n)?;
        Ok(self.0.a(n))
    }

    /// `(numerator, denominator)` as decimal strings.
    fn a_sq_exact(&self, n: usize) -> PyResult<(String, String)> {
        self.check(n)?;
        let q = &self.0.exact_rows().expect("exact table")[n];
        Ok((q.numer().to_string(), q.denom().to_string()))
    }

    /// Raises `ValueError` naming the first broken relation.
    fn verify_relations(&self) -> PyResult<()> {
        self.0.verify_relations().map_err(py_err)
    }
}

impl PyCoeffTable {
    fn check(&self, n: usize) -> PyResult<()> {
        if n < self.0.len() {
            Ok(())
        } else {
            Err(py_err(Error::TableRange { index: n, len: self.0.len() }))
        }
    }
}

/// The hull `{J_ϰ}` over a float coefficient table.
#[pyclass(name = "Hull", frozen)]
struct PyHull {
    hull: hull::Hull,
    orbit: Arc<CriticalOrbit>,
}

#[pymethods]
impl PyHull {
    #[new]
    #[pyo3(signature = (lam = "4"))]
    fn new(lam: &str) -> PyResult<Self> {
        let hull = hull::Hull::new(&lambda(lam)?).map_err(py_err)?;
        let orbit = Arc::new(CriticalOrbit::new(*hull.params()));
        Ok(Self { hull, orbit })
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.hull.params().xi
    }

    fn a(&self, kappa: &PyDyadic, offset: i64) -> f64 {
        self.hull.table().a_shifted(&kappa.0, offset)
    }

    /// Atoms `(x, W)` of `Σ_ϰ` at half-width `n`.
    fn spectral_measure(&self, py: Python<'_>, kappa: &PyDyadic, n: usize) -> PyResult<Vec<(f64, Rows)>> {
        let sigma = py
            .detach(|| self.hull.truncation(&kappa.0, n)?.spectral_measure())
            .map_err(py_err)?;
        Ok(sigma.atoms.iter().map(|a| (a.x, mat2_rows(&a.w))).collect())
    }

    fn v_identity_residual(&self, kappa: &PyDyadic, z_re: f64, z_im: f64, n: usize) -> PyResult<f64> {
        hull::check_v_identity(&self.hull, &kappa.0, Complex64::new(z_re, z_im), n)
            .map(|r| r.residual)
            .map_err(py_err)
    }

    /// Largest renormalization-pairing residual over monomials up to `degree`.
    fn pairing_residual(&self, py: Python<'_>, kappa: &PyDyadic, degree: u32, n: usize) -> PyResult<f64> {
        let res = py
            .detach(|| hull::check_renormalization(&self.hull, &kappa.0, degree, n))
            .map_err(py_err)?;
        Ok(res.iter().map(|p| p.residual).fold(0.0, f64::max))
    }

    /// Coefficient matrices of `h_0, …, h_n`.
    fn ruelle_iterate(&self, kappa: &PyDyadic, n: usize) -> PyResult<Vec<Vec<Rows>>> {
        let hs = ruelle::iterate_h(&kappa.0, n, self.hull.table(), &self.orbit).map_err(py_err)?;
        Ok(hs.iter().map(|h| h.coeffs().iter().map(mat2_rows).collect()).collect())
    }

    /// `h_n(x)` as a 2×2 nested list.
    fn ruelle_eval(&self, kappa: &PyDyadic, n: usize, x: f64) -> PyResult<Rows> {
        let hs = ruelle::iterate_h(&kappa.0, n, self.hull.table(), &self.orbit).map_err(py_err)?;
        let v: Mat2 = hs[n].eval(x);
        Ok(mat2_rows(&v))
    }

    /// `f_0^1, …, f_0^n` from the scalar recurrence.
    fn f0_sequence(&self, kappa: &PyDyadic, n: usize) -> PyResult<Vec<f64>> {
        let f = ruelle::f0_recurrence(&kappa.0, n, self.hull.table(), &self.orbit).map_err(py_err)?;
        Ok((1..=n).map(|m| f.get(m)).collect())
    }
}

/// Runs the full certificate suite; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (lam = "4", digits = 32, depth = 12, truncation = 1024, seed = 1, inject_fault = None))]
fn verify(
    py: Python<'_>,
    lam: &str,
    digits: usize,
    depth: usize,
    truncation: usize,
    seed: u64,
    inject_fault: Option<usize>,
) -> PyResult<String> {
    let cfg = RunConfig {
        lambda: lambda(lam)?,
        digits,
        table_depth: depth,
        truncation,
        seed,
        corrupt_row: inject_fault,
        ..RunConfig::default()
    };
    let version = concat!(env!("CARGO_PKG_VERSION"), "+py");
    let report = py.detach(|| suite::run_verify(cfg, version)).map_err(py_err)?;
    Ok(suite::report_json(&report))
}

#[pymodule]
fn lpjacobi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDyadic>()?;
    m.add_class::<PyCoeffTable>()?;
    m.add_class::<PyHull>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
