//! Adapter for external solver executables.
//!
//! The problem is written as MPS, the command template is run through
//! `sh -c` with `{mps}`, `{sol}` and `{threads}` substituted, and the
//! solution file is read back. A solution file holds one `name value` pair
//! per line; blank lines and lines starting with `#` are ignored. Names may
//! be either the mangled MPS names or the original variable names.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use crate::lpmodel::LpProblem;

use super::{export_mps, LpSolver, SolveOptions, SolveResult, SolveStatus, SolverError};

/// Environment variable holding a command template that replaces the
/// built-in solver.
pub const SOLVER_ENV: &str = "TSAM_LOPF_SOLVER";

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub template: String,
    pub options: SolveOptions,
}

impl LpSolver for ExternalSolver {
    fn name(&self) -> String {
        format!("external: {}", self.template)
    }

    fn solve(&self, lp: &LpProblem) -> Result<SolveResult, SolverError> {
        solve_external(lp, &self.template, &self.options)
    }
}

/// Parses `.sol` text into name → value.
pub fn parse_sol(text: &str, path: &str) -> Result<HashMap<String, f64>, SolverError> {
    let mut values = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| SolverError::SolutionFile {
            path: path.to_string(),
            message: format!("line {}: {message}", n + 1),
        };
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad("expected `name value`".into()));
        };
        let value: f64 = value.parse().map_err(|_| bad(format!("invalid value {value:?}")))?;
        values.insert(name.to_string(), value);
    }
    Ok(values)
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

/// Solves by running an external command on an MPS export of `lp`.
pub fn solve_external(lp: &LpProblem, template: &str, options: &SolveOptions) -> Result<SolveResult, SolverError> {
    for placeholder in ["{mps}", "{sol}"] {
        if !template.contains(placeholder) {
            return Err(SolverError::Template(placeholder));
        }
    }
    let dir = tempfile::tempdir()?;
    let mps_path = dir.path().join("problem.mps");
    let sol_path = dir.path().join("problem.sol");
    let export = export_mps(lp);
    std::fs::write(&mps_path, &export.text)?;
    let threads = options.threads.map_or(String::new(), |t| t.to_string());
    let command = template
        .replace("{mps}", &shell_quote(&mps_path))
        .replace("{sol}", &shell_quote(&sol_path))
        .replace("{threads}", &threads);

    let start = Instant::now();
    let output = Command::new("sh").arg("-c").arg(&command).output()?;
    let wall_time = start.elapsed().as_secs_f64();
    if !output.status.success() {
        let mut captured = String::from_utf8_lossy(&output.stdout).into_owned();
        captured.push_str(&String::from_utf8_lossy(&output.stderr));
        return Err(SolverError::CommandFailed {
            status: output.status.to_string(),
            output: captured.trim().to_string(),
        });
    }

    let shown = sol_path.display().to_string();
    let text = std::fs::read_to_string(&sol_path).map_err(|e| SolverError::SolutionFile {
        path: shown.clone(),
        message: e.to_string(),
    })?;
    let values = parse_sol(&text, &shown)?;
    let mut x = Vec::with_capacity(lp.n_variables());
    for (mangled, original) in &export.names.columns {
        let v = values
            .get(mangled)
            .or_else(|| values.get(original))
            .ok_or_else(|| SolverError::MissingVariable(original.clone()))?;
        x.push(*v);
    }
    let violation = lp.max_violation(&x);
    if violation > options.feasibility_tol.max(1e-6) {
        return Err(SolverError::Violation(violation));
    }
    Ok(SolveResult {
        status: SolveStatus::Optimal,
        objective: lp.objective_value(&x),
        primal: Some(x),
        duals: None,
        wall_time,
        iterations: 0,
    })
}
