//! Python bindings. Matrices cross the boundary as lists of rows; erasure
//! indices are 1-based; an infinite spark is returned as `None`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use kframe_core::canonical::canonical_kdual;
use kframe_core::recovery::{recover_consistency, recover_side_info, CodedSignal};
use kframe_core::redundancy::{mrc_subset, spark as spark_of, spark_via_kernel, DEFAULT_SPARK_CAP};
use kframe_core::simulate::{run_simulation, ExperimentConfig};
use kframe_core::{fixtures, DenseMatrix, ErasureSet, Error, KFrameSystem, TolerancePolicy};

type Rows = Vec<Vec<f64>>;

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() || matches!(e, Error::Shape(_) | Error::InvalidArgument(_) | Error::IndexOutOfRange { .. }) {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn matrix(rows: &Rows) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(rows).map_err(to_py)
}

fn rows_of(m: &DenseMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn system(f: &Rows, k: &Rows) -> PyResult<KFrameSystem> {
    KFrameSystem::new(matrix(f)?, matrix(k)?, TolerancePolicy::default()).map_err(to_py)
}

/// `(F, K, G or None)` for FIX-A … FIX-D.
#[pyfunction]
fn fixture(name: &str) -> PyResult<(Rows, Rows, Option<Rows>)> {
    let fx = fixtures::by_name(name).map_err(to_py)?;
    Ok((rows_of(&fx.f), rows_of(&fx.k), fx.g.as_ref().map(rows_of)))
}

/// Whether `R(K) ⊆ span{f_i}`.
#[pyfunction]
fn is_kframe(f: Rows, k: Rows) -> PyResult<bool> {
    kframe_core::frame::is_kframe(&matrix(&f)?, &matrix(&k)?, &TolerancePolicy::default()).map_err(to_py)
}

#[pyfunction]
fn gramian(f: Rows, k: Rows) -> PyResult<Rows> {
    Ok(rows_of(system(&f, &k)?.gramian()))
}

/// `(G, residual)` for the canonical K-dual.
#[pyfunction]
fn canonical_dual(f: Rows, k: Rows) -> PyResult<(Rows, f64)> {
    let dual = canonical_kdual(&system(&f, &k)?).map_err(to_py)?.dual;
    Ok((rows_of(&dual.g), dual.residual))
}

/// `(residual, is_valid)` of `‖F·Gᵀ − K‖`.
#[pyfunction]
fn verify_kdual(f: Rows, k: Rows, g: Rows) -> PyResult<(f64, bool)> {
    let dual = system(&f, &k)?.verify_kdual(matrix(&g)?).map_err(to_py)?;
    Ok((dual.residual, dual.is_valid))
}

/// `(spark or None, witness or None)`; `kernel=True` uses the kernel-support scan.
#[pyfunction]
#[pyo3(signature = (m, kernel = false))]
fn spark(m: Rows, kernel: bool) -> PyResult<(Option<usize>, Option<Vec<f64>>)> {
    let m = matrix(&m)?;
    let tol = TolerancePolicy::default();
    let res = if kernel {
        spark_via_kernel(&m, &tol, DEFAULT_SPARK_CAP)
    } else {
        spark_of(&m, &tol, DEFAULT_SPARK_CAP)
    }
    .map_err(to_py)?;
    Ok((res.value.finite(), res.witness))
}

/// `(is_mrc, necessary_condition_i)` for a 1-based erasure set.
#[pyfunction]
fn mrc(f: Rows, k: Rows, sigma: Vec<usize>) -> PyResult<(bool, bool)> {
    let (f, k) = (matrix(&f)?, matrix(&k)?);
    let sigma = ErasureSet::from_one_based(&sigma, f.cols()).map_err(to_py)?;
    let rep = mrc_subset(&f, &k, &sigma, &TolerancePolicy::default()).map_err(to_py)?;
    Ok((rep.is_mrc, rep.necessary_condition_i))
}

/// Recovers the `None` entries of `coefficients`. With `side_info` the
/// Gramian equations are used, otherwise the consistency estimate.
/// Returns `(coefficients, certified_exact)`.
#[pyfunction]
#[pyo3(signature = (f, k, g, coefficients, side_info = None))]
fn recover(
    f: Rows,
    k: Rows,
    g: Rows,
    coefficients: Vec<Option<f64>>,
    side_info: Option<Vec<f64>>,
) -> PyResult<(Vec<f64>, bool)> {
    let sys = system(&f, &k)?;
    let dual = sys.verify_kdual(matrix(&g)?).map_err(to_py)?;
    let erased = coefficients.iter().enumerate().filter(|(_, c)| c.is_none()).map(|(i, _)| i);
    let erased = ErasureSet::new(erased, coefficients.len()).map_err(to_py)?;
    let values = coefficients.iter().map(|c| c.unwrap_or(0.0)).collect();
    let coded = CodedSignal::new(values, erased).map_err(to_py)?;
    let rep = match side_info {
        Some(v) => recover_side_info(&sys, &dual, sys.gramian(), &coded, &v),
        None => recover_consistency(&sys, &dual, &coded),
    }
    .map_err(to_py)?;
    Ok((rep.recovered_coefficients, rep.certified_exact))
}

/// Simulation report as a JSON string; `g` defaults to the canonical dual.
#[pyfunction]
#[pyo3(signature = (f, k, r, signals, seed, g = None))]
fn simulate(f: Rows, k: Rows, r: usize, signals: usize, seed: u64, g: Option<Rows>) -> PyResult<String> {
    let sys = system(&f, &k)?;
    let dual = match g {
        Some(g) => sys.verify_kdual(matrix(&g)?).map_err(to_py)?,
        None => canonical_kdual(&sys).map_err(to_py)?.dual,
    };
    let report = run_simulation(&sys, &dual, &ExperimentConfig::new(r, signals, seed)).map_err(to_py)?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn kframe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(is_kframe, m)?)?;
    m.add_function(wrap_pyfunction!(gramian, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_dual, m)?)?;
    m.add_function(wrap_pyfunction!(verify_kdual, m)?)?;
    m.add_function(wrap_pyfunction!(spark, m)?)?;
    m.add_function(wrap_pyfunction!(mrc, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
