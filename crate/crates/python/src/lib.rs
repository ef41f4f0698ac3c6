//! Python access to presentation files: validation, Tor/Ext tables and the
//! epimorphism check. Reports come back as JSON strings.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dgepi::complex::Window;
use dgepi::derived::{ext_table, tor_table};
use dgepi::epi::{check_dga_epi, check_ring_epi, generate_test_family, summary_line};
use dgepi::text::{parse, validate_file, Session};
use dgepi::Error;

fn session(text: &str) -> Result<Session, String> {
    let file = parse(text).map_err(|e| e.to_string())?;
    Session::build(&file).map_err(|e| e.to_string())
}

fn describe(e: Error) -> String {
    match e {
        Error::ResourceBound { .. } => format!("resource bound: {e}"),
        e => e.to_string(),
    }
}

fn window(lo: i64, hi: i64) -> Result<Window, String> {
    Window::new(lo, hi).map_err(|e| e.to_string())
}

/// `(declaration, violation)` pairs; empty when everything is valid.
pub fn validate_text(text: &str) -> Result<Vec<(String, String)>, String> {
    let file = parse(text).map_err(|e| e.to_string())?;
    let (_, found) = validate_file(&file).map_err(|e| e.to_string())?;
    Ok(found.into_iter().map(|f| (f.decl, f.violation.to_string())).collect())
}

pub fn table_text(text: &str, kind: &str, m: &str, n: &str, lo: i64, hi: i64, cap: usize) -> Result<BTreeMap<i64, usize>, String> {
    let s = session(text)?;
    let (m, n) = (s.module(m).map_err(|e| e.to_string())?, s.module(n).map_err(|e| e.to_string())?);
    let w = window(lo, hi)?;
    let t = match kind {
        "tor" => tor_table(m, n, w, cap),
        _ => ext_table(m, n, w, cap),
    };
    t.map(|t| t.dims).map_err(describe)
}

/// Summary line and JSON report. Ring mode is used when both algebras sit
/// in degree 0.
pub fn check_epi_text(text: &str, morphism: &str, lo: i64, hi: i64, seed: u64, family_size: usize, cap: usize) -> Result<(String, String), String> {
    let s = session(text)?;
    let phi = s.morphism(morphism).map_err(|e| e.to_string())?;
    let family = generate_test_family(phi.target.clone(), seed, family_size).map_err(|e| e.to_string())?;
    let w = window(lo, hi)?;
    let r = if phi.source.concentrated_in_degree_zero() && phi.target.concentrated_in_degree_zero() {
        check_ring_epi(phi, w, &family, cap)
    } else {
        check_dga_epi(phi, w, &family, cap)
    }
    .map_err(describe)?;
    let json = serde_json::to_string(&serde_json::to_value(&r).expect("report serializes")).expect("json");
    Ok((summary_line(&r), json))
}

fn value_err(e: String) -> PyErr {
    if e.starts_with("resource bound") {
        PyRuntimeError::new_err(e)
    } else {
        PyValueError::new_err(e)
    }
}

#[pyfunction]
fn validate(text: &str) -> PyResult<Vec<(String, String)>> {
    validate_text(text).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (text, m, n, lo=0, hi=8, max_generators=10_000))]
fn tor(text: &str, m: &str, n: &str, lo: i64, hi: i64, max_generators: usize) -> PyResult<BTreeMap<i64, usize>> {
    table_text(text, "tor", m, n, lo, hi, max_generators).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (text, m, n, lo=0, hi=8, max_generators=10_000))]
fn ext(text: &str, m: &str, n: &str, lo: i64, hi: i64, max_generators: usize) -> PyResult<BTreeMap<i64, usize>> {
    table_text(text, "ext", m, n, lo, hi, max_generators).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (text, morphism, lo=0, hi=8, seed=0, family_size=6, max_generators=10_000))]
fn check_epi(text: &str, morphism: &str, lo: i64, hi: i64, seed: u64, family_size: usize, max_generators: usize) -> PyResult<(String, String)> {
    check_epi_text(text, morphism, lo, hi, seed, family_size, max_generators).map_err(value_err)
}

#[pymodule]
fn dgepi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(tor, m)?)?;
    m.add_function(wrap_pyfunction!(ext, m)?)?;
    m.add_function(wrap_pyfunction!(check_epi, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DUAL: &str = include_str!("../../../fixtures/epi/dual_to_k.dga");

    #[test]
    fn tables_and_verdict() {
        let t = table_text(DUAL, "tor", "kr", "kl", 0, 3, 100).unwrap();
        assert_eq!(t.values().copied().collect::<Vec<_>>(), vec![1, 1, 1, 1]);
        let (line, json) = check_epi_text(DUAL, "phi", 0, 3, 0, 2, 1000).unwrap();
        assert_eq!(line, "homological epimorphism: NO, Tor_1 dim 1");
        assert!(json.contains("\"epimorphism\":false"));
    }

    #[test]
    fn errors_are_strings() {
        assert!(validate_text("field Q\nalgebra A\n basis 1:0\n").unwrap_err().contains("unit"));
        assert!(check_epi_text(DUAL, "phi", 0, 3, 0, 2, 1).unwrap_err().starts_with("resource bound"));
        assert!(table_text(DUAL, "tor", "kr", "kl", 0, 8, 2).unwrap_err().starts_with("resource bound"));
    }
}
