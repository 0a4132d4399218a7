//! End-to-end runs: parse a source file, solve one of its definitions,
//! report the outcome.

use std::time::Instant;

use crate::diagram::{
    operational_semantics, solve_diagram, DiagramError, DiagramTerm, FrontCache, Fronts,
};
use crate::dot::emit_dot;
use crate::dsl::{parse_source, DslError, SourceFile};
use crate::opg::{solve_pareto_fronts, OpgError, SolveOptions, SolveStats, Violation};
use crate::oracle::{brute_force_pareto, OracleError, DEFAULT_ORACLE_BOUND};
use crate::report::{Mode, RunStats, SolveReport};

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error(transparent)]
    Parse(#[from] DslError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Opg(#[from] OpgError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no opg or diagram named `{0}` in this file")]
    UnknownName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub mode: Mode,
    pub pruning: bool,
    pub jobs: usize,
    pub oracle_bound: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: Mode::Compositional,
            pruning: false,
            jobs: 1,
            oracle_bound: DEFAULT_ORACLE_BOUND,
        }
    }
}

/// The named definition as a diagram term. A bare opg counts as a
/// single-atom diagram.
fn lookup_term(file: &SourceFile, name: &str) -> Result<DiagramTerm, DriverError> {
    if let Some(diag) = file.diagram(name) {
        Ok(diag.term.clone())
    } else if let Some(def) = file.opg(name) {
        Ok(DiagramTerm::Atom(name.to_string(), def.game.clone()))
    } else {
        Err(DriverError::UnknownName(name.to_string()))
    }
}

/// Solves `name` from `text` in the requested mode.
pub fn run_solve(text: &str, name: &str, opts: &RunOptions) -> Result<SolveReport, DriverError> {
    let parse_start = Instant::now();
    let file = parse_source(text)?;
    let parse_ms = parse_start.elapsed().as_millis() as u64;

    let term = lookup_term(&file, name)?;
    let stats = SolveStats::new();
    let solve_opts = SolveOptions {
        pruning: opts.pruning,
        jobs: opts.jobs,
    };

    let solve_start = Instant::now();
    let fronts: Fronts = match opts.mode {
        Mode::Compositional => {
            let cache = FrontCache::new();
            solve_diagram(&term, &cache, &solve_opts, &stats)?
        }
        Mode::Monolithic => {
            let flat = operational_semantics(&term)?;
            solve_pareto_fronts(&flat, &solve_opts, &stats)?
        }
        Mode::Oracle => {
            let flat = operational_semantics(&term)?;
            let mut fronts = Fronts::new();
            for (entrance, _) in flat.entrances() {
                let front = brute_force_pareto(&flat, entrance, opts.oracle_bound)?;
                fronts.insert(entrance, front);
            }
            fronts
        }
    };
    let solve_ms = solve_start.elapsed().as_millis() as u64;

    let report = SolveReport::from_fronts(
        name,
        opts.mode,
        &fronts,
        RunStats {
            queries: stats.queries(),
            cache_hits: stats.cache_hits(),
            parse_ms,
            solve_ms,
        },
    )?;
    Ok(report)
}

/// Renders `name` from `text` as a graphviz digraph. Diagrams are
/// flattened first.
pub fn render_dot(text: &str, name: &str) -> Result<String, DriverError> {
    let file = parse_source(text)?;
    if let Some(def) = file.opg(name) {
        Ok(emit_dot(name, &def.game))
    } else if let Some(diag) = file.diagram(name) {
        let flat = operational_semantics(&diag.term)?;
        Ok(emit_dot(name, &flat))
    } else {
        Err(DriverError::UnknownName(name.to_string()))
    }
}

/// Validates every definition in `text`: opgs against the atomic rules,
/// diagrams against the composite rules after flattening. Returns each
/// definition's name with its violations, in file order.
pub fn validate_file(text: &str) -> Result<Vec<(String, Vec<Violation>)>, DriverError> {
    let file = parse_source(text)?;
    let mut out = Vec::new();
    for def in &file.opgs {
        out.push((def.name.clone(), def.game.validate(true)));
    }
    for diag in &file.diagrams {
        let flat = operational_semantics(&diag.term)?;
        out.push((diag.name.clone(), flat.validate(false)));
    }
    Ok(out)
}
