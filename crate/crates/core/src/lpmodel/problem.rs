use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    /// Objective coefficient.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sparse row as `(variable index, coefficient)` pairs, one per variable.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A minimization LP with bounded variables and sparse rows.
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    var_index: HashMap<String, usize>,
    row_index: HashMap<String, usize>,
}

impl PartialEq for LpProblem {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.constraints == other.constraints
    }
}

impl LpProblem {
    pub fn new(name: impl Into<String>) -> Self {
        LpProblem {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn n_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    pub fn constraint_index(&self, name: &str) -> Option<usize> {
        self.row_index.get(name).copied()
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraint_index(name).map(|i| &self.constraints[i])
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> Result<usize, LpError> {
        let name = name.into();
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(LpError::InvalidBounds { name, lower, upper });
        }
        let idx = self.variables.len();
        if self.var_index.insert(name.clone(), idx).is_some() {
            return Err(LpError::DuplicateName(name));
        }
        self.variables.push(Variable { name, lower, upper, cost });
        Ok(idx)
    }

    /// Adds a row. Repeated variables are summed; exact zeros are dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<usize, LpError> {
        let name = name.into();
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (var, coef) in coeffs {
            if var >= self.variables.len() {
                return Err(LpError::UnknownVariable(format!("index {var} in row {name}")));
            }
            match row.iter_mut().find(|(v, _)| *v == var) {
                Some(entry) => entry.1 += coef,
                None => row.push((var, coef)),
            }
        }
        row.retain(|&(_, c)| c != 0.0);
        let idx = self.constraints.len();
        if self.row_index.insert(name.clone(), idx).is_some() {
            return Err(LpError::DuplicateName(name));
        }
        self.constraints.push(Constraint {
            name,
            coeffs: row,
            relation,
            rhs,
        });
        Ok(idx)
    }

    /// Objective value of a primal vector given in variable order.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.variables.iter().zip(x).map(|(v, x)| v.cost * x).sum()
    }

    /// Row activity `a_i x`.
    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.constraints[row].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Largest absolute violation of any bound or row by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xj) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xj).max(xj - v.upper);
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let lhs = self.row_activity(i, x);
            let gap = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    /// Checks the container invariants: coefficients reference existing
    /// variables, bounds are ordered, names are unique.
    pub fn check(&self) -> Result<(), LpError> {
        let mut seen = std::collections::HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                return Err(LpError::DuplicateName(v.name.clone()));
            }
            if !(v.lower <= v.upper) {
                return Err(LpError::InvalidBounds {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for c in &self.constraints {
            if !seen.insert(c.name.as_str()) {
                return Err(LpError::DuplicateName(c.name.clone()));
            }
            if let Some(&(j, _)) = c.coeffs.iter().find(|(j, _)| *j >= self.variables.len()) {
                return Err(LpError::UnknownVariable(format!("index {j} in row {}", c.name)));
            }
        }
        Ok(())
    }
}
