//! Python bindings for the open parity game solver.
//!
//! ```python
//! src = opg_py.Source(text)
//! report = json.loads(src.solve("main"))
//! ```

use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use opg_core::driver::{render_dot, run_solve, validate_file, RunOptions};
use opg_core::dsl::{parse_source, SourceFile};
use opg_core::orders;
use opg_core::report::Mode;

fn to_py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed source file of opg and diagram definitions.
#[pyclass]
struct Source {
    text: String,
    file: SourceFile,
}

#[pymethods]
impl Source {
    #[new]
    fn new(text: String) -> PyResult<Self> {
        let file = parse_source(&text).map_err(to_py_err)?;
        Ok(Source { text, file })
    }

    /// Names of the opg definitions, in file order.
    fn opgs(&self) -> Vec<String> {
        self.file.opgs.iter().map(|d| d.name.clone()).collect()
    }

    /// Names of the diagram definitions, in file order.
    fn diagrams(&self) -> Vec<String> {
        self.file.diagrams.iter().map(|d| d.name.clone()).collect()
    }

    /// Solves one definition and returns the report as a JSON string.
    #[pyo3(signature = (name, mode="compositional", pruning=false, jobs=1, oracle_bound=1_000_000))]
    fn solve(
        &self,
        name: &str,
        mode: &str,
        pruning: bool,
        jobs: usize,
        oracle_bound: u64,
    ) -> PyResult<String> {
        let mode = Mode::from_str(mode).map_err(to_py_err)?;
        let opts = RunOptions {
            mode,
            pruning,
            jobs,
            oracle_bound,
        };
        let report = run_solve(&self.text, name, &opts).map_err(to_py_err)?;
        Ok(report.to_json())
    }

    /// Renders one definition as a graphviz digraph.
    fn dot(&self, name: &str) -> PyResult<String> {
        render_dot(&self.text, name).map_err(to_py_err)
    }

    /// Violations per definition: a list of (name, [message, ...]).
    fn validate(&self) -> PyResult<Vec<(String, Vec<String>)>> {
        let results = validate_file(&self.text).map_err(to_py_err)?;
        Ok(results
            .into_iter()
            .map(|(name, violations)| (name, violations.iter().map(|v| v.to_string()).collect()))
            .collect())
    }

    /// The file printed in its canonical layout.
    fn render(&self) -> String {
        self.file.print()
    }

    fn __repr__(&self) -> String {
        format!(
            "Source({} opgs, {} diagrams)",
            self.file.opgs.len(),
            self.file.diagrams.len()
        )
    }
}

/// The least priority that combines with `m` to an even maximum.
#[pyfunction]
fn dual_priority(m: u32) -> u32 {
    orders::dual_priority(m)
}

/// -1, 0, or 1 as `m1` is below, equal to, or above `m2` in the
/// sub-priority order.
#[pyfunction]
fn compare_subpriority(m1: u32, m2: u32) -> i32 {
    match orders::cmp_subpriority(m1, m2) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

#[pymodule]
fn opg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Source>()?;
    m.add_function(wrap_pyfunction!(dual_priority, m)?)?;
    m.add_function(wrap_pyfunction!(compare_subpriority, m)?)?;
    Ok(())
}
