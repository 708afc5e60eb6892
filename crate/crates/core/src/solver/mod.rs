//! LP solving: a built-in bounded revised simplex, MPS exchange, and an
//! adapter for external solver executables.

mod external;
mod lu;
mod mps;
mod simplex;

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lpmodel::LpProblem;

pub use external::{parse_sol, solve_external, ExternalSolver, SOLVER_ENV};
pub use mps::{export_mps, import_mps, MpsExport, NameTable};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("MPS line {line}: {message}")]
    MpsParse { line: usize, message: String },
    #[error("MPS line {line}: unknown bound key {key}")]
    UnknownBoundKey { line: usize, key: String },
    #[error("solver command failed ({status}): {output}")]
    CommandFailed { status: String, output: String },
    #[error("solution file {path}: {message}")]
    SolutionFile { path: String, message: String },
    #[error("solution has no value for variable {0}")]
    MissingVariable(String),
    #[error("external solution violates the problem by {0:e}")]
    Violation(f64),
    #[error("command template is missing the {0} placeholder")]
    Template(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub feasibility_tol: f64,
    /// Reduced-cost tolerance, relative to the largest objective coefficient.
    pub optimality_tol: f64,
    pub max_iterations: usize,
    /// Forwarded to external solvers; the built-in simplex is single-threaded.
    pub threads: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-7,
            max_iterations: 2_000_000,
            threads: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective at the returned point; for an iteration limit this is the
    /// point where the simplex stopped, otherwise NaN unless optimal.
    pub objective: f64,
    /// Primal values in LP variable order; present iff optimal.
    pub primal: Option<Vec<f64>>,
    /// Row duals in LP constraint order, when the solver provides them.
    pub duals: Option<Vec<f64>>,
    /// Seconds spent in the solver proper.
    pub wall_time: f64,
    pub iterations: usize,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn primal_by_name(&self, lp: &LpProblem) -> Option<HashMap<String, f64>> {
        let x = self.primal.as_ref()?;
        Some(lp.variables().iter().zip(x).map(|(v, &x)| (v.name.clone(), x)).collect())
    }

    pub fn duals_by_name(&self, lp: &LpProblem) -> Option<HashMap<String, f64>> {
        let y = self.duals.as_ref()?;
        Some(lp.constraints().iter().zip(y).map(|(c, &y)| (c.name.clone(), y)).collect())
    }
}

/// Anything that can solve an [`LpProblem`].
pub trait LpSolver: Send + Sync {
    fn name(&self) -> String;
    fn solve(&self, lp: &LpProblem) -> Result<SolveResult, SolverError>;
}

/// Solves with the built-in revised simplex.
pub fn solve(lp: &LpProblem, options: &SolveOptions) -> SolveResult {
    let start = Instant::now();
    let out = simplex::run(lp, options);
    let wall_time = start.elapsed().as_secs_f64();
    let objective = match out.status {
        SolveStatus::Optimal | SolveStatus::IterationLimit => lp.objective_value(&out.x),
        _ => f64::NAN,
    };
    let optimal = out.status == SolveStatus::Optimal;
    SolveResult {
        status: out.status,
        objective,
        primal: optimal.then_some(out.x),
        duals: out.duals,
        wall_time,
        iterations: out.iterations,
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuiltinSolver {
    pub options: SolveOptions,
}

impl LpSolver for BuiltinSolver {
    fn name(&self) -> String {
        "builtin".into()
    }

    fn solve(&self, lp: &LpProblem) -> Result<SolveResult, SolverError> {
        Ok(solve(lp, &self.options))
    }
}

/// The external solver named by `TSAM_LOPF_SOLVER` if set, else the
/// built-in simplex.
pub fn default_solver(options: &SolveOptions) -> Box<dyn LpSolver> {
    match std::env::var(SOLVER_ENV) {
        Ok(template) if !template.trim().is_empty() => Box::new(ExternalSolver {
            template,
            options: options.clone(),
        }),
        _ => Box::new(BuiltinSolver {
            options: options.clone(),
        }),
    }
}
