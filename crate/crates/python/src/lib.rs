use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use genlimit::harness::{
    build_table, cmd_compare, cmd_simulate, cmd_verify, mutation_self_test, parse_ratio,
    AttackKind, GeneratorKind, ReportDoc, ScheduleChoice, Setup, SimulateOptions,
};
use genlimit::oracle::{pareto_dominance, random_collection};
use genlimit::procedures::GroupPartition;

fn err(e: genlimit::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Parses a JSON report into plain Python objects.
fn to_py<'py>(py: Python<'py>, doc: &ReportDoc) -> PyResult<Bound<'py, PyAny>> {
    let text = doc.to_json().map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A countable collection of languages.
#[pyclass(name = "Collection", module = "genlimit", skip_from_py_object)]
#[derive(Clone)]
struct PyCollection {
    inner: genlimit::Collection,
}

#[pymethods]
impl PyCollection {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        genlimit::Collection::from_json(text)
            .map(|inner| PyCollection { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        genlimit::Collection::load(path)
            .map(|inner| PyCollection { inner })
            .map_err(err)
    }

    /// Seeded random collection of `n` languages.
    #[staticmethod]
    fn random(seed: u64, n: usize) -> Self {
        PyCollection {
            inner: random_collection(seed, n),
        }
    }

    fn names(&self) -> Vec<String> {
        (0..self.inner.len())
            .map(|i| self.inner.name(i).to_string())
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_doc())
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Collection({})", self.names().join(", "))
    }
}

fn setup(
    c: &genlimit::Collection,
    noisy: bool,
    levels: u32,
    groups: Option<&str>,
    alpha: &str,
    schedule: &str,
) -> PyResult<Setup> {
    let mut s = match groups {
        Some(text) => {
            let p = GroupPartition::from_json(text, &c.registry).map_err(err)?;
            Setup::repr(p, parse_ratio(alpha).map_err(err)?)
        }
        None if noisy => Setup::noisy(levels),
        None => Setup::plain(),
    };
    s.schedule = ScheduleChoice::parse(schedule).map_err(err)?;
    Ok(s)
}

/// Complexity table for the chosen setting. `groups` is a groups document
/// and selects the representative setting.
#[pyfunction]
#[pyo3(signature = (collection, noisy=false, levels=1, groups=None, alpha="1/2"))]
fn complexity<'py>(
    py: Python<'py>,
    collection: &PyCollection,
    noisy: bool,
    levels: u32,
    groups: Option<&str>,
    alpha: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let c = &collection.inner;
    let s = setup(c, noisy, levels, groups, alpha, "sufficient")?;
    let table = build_table(c, &s).map_err(err)?;
    to_py(
        py,
        &ReportDoc {
            table: Some(table.to_doc(c)),
            ..ReportDoc::default()
        },
    )
}

/// Runs the generator against an adversary for one target (1-based) or all.
#[pyfunction]
#[pyo3(signature = (
    collection, target=None, attack="intersection-first", noisy=false, levels=1,
    groups=None, alpha="1/2", schedule="sufficient", horizon=None, cp=false
))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    collection: &PyCollection,
    target: Option<usize>,
    attack: &str,
    noisy: bool,
    levels: u32,
    groups: Option<&str>,
    alpha: &str,
    schedule: &str,
    horizon: Option<usize>,
    cp: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let c = &collection.inner;
    let s = setup(c, noisy, levels, groups, alpha, schedule)?;
    let opts = SimulateOptions {
        targets: target
            .map(|t| vec![t.saturating_sub(1)])
            .unwrap_or_default(),
        attack: AttackKind::parse(attack).map_err(err)?,
        horizon,
        generator: if cp {
            GeneratorKind::Cp
        } else {
            GeneratorKind::Optimal
        },
    };
    let (table, reports) = cmd_simulate(c, &s, &opts).map_err(err)?;
    to_py(
        py,
        &ReportDoc {
            table: Some(table.to_doc(c)),
            sim_reports: reports.iter().map(|r| r.to_doc(c)).collect(),
            ..ReportDoc::default()
        },
    )
}

/// Time sequences and their pairwise dominance verdicts.
#[pyfunction]
fn compare<'py>(py: Python<'py>, collection: &PyCollection) -> PyResult<Bound<'py, PyAny>> {
    let report = cmd_compare(&collection.inner).map_err(err)?;
    let out = to_py(
        py,
        &ReportDoc {
            verdicts: report.verdict_docs(),
            ..ReportDoc::default()
        },
    )?;
    let times = pyo3::types::PyDict::new(py);
    for s in &report.sequences {
        times.set_item(&s.name, s.times.clone())?;
    }
    out.set_item("times", times)?;
    Ok(out)
}

/// Invariant suite; returns the list of results.
#[pyfunction]
#[pyo3(signature = (collection, noisy=false, levels=1, groups=None, alpha="1/2", mutation=false))]
fn verify<'py>(
    py: Python<'py>,
    collection: &PyCollection,
    noisy: bool,
    levels: u32,
    groups: Option<&str>,
    alpha: &str,
    mutation: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let c = &collection.inner;
    let s = setup(c, noisy, levels, groups, alpha, "sufficient")?;
    let mut report = cmd_verify(c, &s).map_err(err)?;
    if mutation {
        report
            .results
            .extend(mutation_self_test(c, &s).map_err(err)?);
    }
    to_py(
        py,
        &ReportDoc {
            invariant_results: report.results,
            ..ReportDoc::default()
        },
    )
}

/// Pareto verdict of `a` against `b`.
#[pyfunction]
fn dominance(a: Vec<u64>, b: Vec<u64>) -> PyResult<String> {
    pareto_dominance(&a, &b)
        .map(|v| format!("{v:?}"))
        .map_err(err)
}

#[pymodule]
#[pyo3(name = "genlimit")]
fn genlimit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCollection>()?;
    m.add_function(wrap_pyfunction!(complexity, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(dominance, m)?)?;
    Ok(())
}
