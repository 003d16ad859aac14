//! Python bindings: Betti numbers, spectra, determinants and config runs.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use towerlab_core::lab::{self, parse_family, Diagnostics, RunConfig};
use towerlab_core::reduction::RankStrategy;
use towerlab_core::spectral::{fk_certificate, l2_moment as core_l2_moment, level_spectrum};
use towerlab_core::{
    betti as core_betti, builtin_complex, make_builtin_tower, BuiltinComplex, ChainComplexSpec, CoefficientRing,
    Tower,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn complex(name: &str) -> PyResult<(BuiltinComplex, ChainComplexSpec)> {
    let b: BuiltinComplex = name.parse().map_err(err)?;
    Ok((b, builtin_complex(b).map_err(err)?))
}

fn tower(
    c: &ChainComplexSpec,
    moduli: Option<Vec<u64>>,
    family: &str,
    p: u64,
    depth: usize,
    refine: bool,
) -> PyResult<Tower> {
    match moduli {
        Some(m) => Tower::from_moduli(c.model(), &m).map_err(err),
        None => make_builtin_tower(c.model(), parse_family(family).map_err(err)?, depth, p, refine).map_err(err),
    }
}

fn fraction<'py>(py: Python<'py>, text: String) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((text,))
}

/// Betti numbers of every level, one list per level.
#[pyfunction]
#[pyo3(signature = (complex, moduli=None, family="reduction", p=2, depth=3, refine=false, field="Q"))]
fn betti(
    complex: &str,
    moduli: Option<Vec<u64>>,
    family: &str,
    p: u64,
    depth: usize,
    refine: bool,
    field: &str,
) -> PyResult<Vec<Vec<u64>>> {
    let (_, c) = self::complex(complex)?;
    let field: CoefficientRing = field.parse().map_err(err)?;
    let t = tower(&c, moduli, family, p, depth, refine)?;
    t.levels().iter().map(|q| core_betti(&c, q, field).map_err(err)).collect()
}

/// Spectral measure of the degree-`degree` Laplacian at each level.
#[pyfunction]
#[pyo3(signature = (complex, degree, moduli=None, family="reduction", p=2, depth=3))]
fn spectrum<'py>(
    py: Python<'py>,
    complex: &str,
    degree: usize,
    moduli: Option<Vec<u64>>,
    family: &str,
    p: u64,
    depth: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let (_, c) = self::complex(complex)?;
    let delta = c.laplacian(degree).map_err(err)?;
    let t = tower(&c, moduli, family, p, depth, false)?;
    let strategy = RankStrategy::default();
    let mut out = Vec::new();
    for q in t.levels() {
        let mu = level_spectrum(&delta, q, 1e-8, &strategy).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("index", q.order())?;
        d.set_item("zero", fraction(py, mu.zero_multiplicity.to_string())?)?;
        d.set_item("atoms", mu.atoms.clone())?;
        out.push(d);
    }
    Ok(out)
}

/// Exact L² moment `tr(Δ^k)` as a `Fraction`.
#[pyfunction]
fn l2_moment<'py>(py: Python<'py>, complex: &str, degree: usize, k: u32) -> PyResult<Bound<'py, PyAny>> {
    let (_, c) = self::complex(complex)?;
    let delta = c.laplacian(degree).map_err(err)?;
    fraction(py, core_l2_moment(&delta, k).map_err(err)?.to_string())
}

/// Normalized log determinants certified by the lowest nonzero
/// characteristic polynomial coefficient.
#[pyfunction]
#[pyo3(signature = (complex, degree, moduli=None, family="reduction", p=2, depth=3))]
fn fk_log_det(
    complex: &str,
    degree: usize,
    moduli: Option<Vec<u64>>,
    family: &str,
    p: u64,
    depth: usize,
) -> PyResult<Vec<f64>> {
    let (_, c) = self::complex(complex)?;
    let delta = c.laplacian(degree).map_err(err)?;
    let t = tower(&c, moduli, family, p, depth, false)?;
    t.levels()
        .iter()
        .map(|q| fk_certificate(&delta, q).map(|c| c.log_normalized_det).map_err(err))
        .collect()
}

/// Rank gradient rows for a wedge of circles along an abelianized tower.
#[pyfunction]
#[pyo3(signature = (d, p=2, depth=3, primes=vec![2, 3, 5]))]
fn rank_gradient<'py>(py: Python<'py>, d: usize, p: u64, depth: usize, primes: Vec<u64>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let (b, c) = self::complex(&format!("wedge:{d}"))?;
    let t = make_builtin_tower(c.model(), towerlab_core::TowerFamily::AbelianizedReduction, depth, p, false)
        .map_err(err)?;
    let r = lab::rank_gradient(b, &t, &primes, &RankStrategy::default()).map_err(err)?;
    let mut out = Vec::new();
    for row in r.rows {
        let dict = PyDict::new(py);
        dict.set_item("index", row.index)?;
        dict.set_item("d", row.d_estimate)?;
        dict.set_item("rg_term", fraction(py, row.rg_term.to_string())?)?;
        dict.set_item("betti_modp", row.betti_modp)?;
        dict.set_item("identity_holds", row.identity_holds)?;
        out.push(dict);
    }
    Ok(out)
}

/// Run a JSON config; returns exit code, written files, violations and summary.
#[pyfunction]
#[pyo3(signature = (path, out=None, strict=false))]
fn run_config<'py>(py: Python<'py>, path: PathBuf, out: Option<PathBuf>, strict: bool) -> PyResult<Bound<'py, PyDict>> {
    let mut diag = if strict { Diagnostics::strict() } else { Diagnostics::lax() };
    let cfg = RunConfig::from_path(&path, &mut diag).map_err(err)?;
    let outcome = py.detach(|| lab::run(&cfg, &mut diag, out.as_deref())).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("exit_code", outcome.exit_code())?;
    d.set_item("out_dir", &outcome.out_dir)?;
    d.set_item("files", &outcome.files)?;
    d.set_item("violations", &outcome.violations)?;
    d.set_item("warnings", [diag.warnings, outcome.warnings].concat())?;
    d.set_item("summary", &outcome.summary)?;
    Ok(d)
}

#[pymodule]
fn towerlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(betti, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(l2_moment, m)?)?;
    m.add_function(wrap_pyfunction!(fk_log_det, m)?)?;
    m.add_function(wrap_pyfunction!(rank_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
