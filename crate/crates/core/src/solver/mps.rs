//! Fixed-format MPS writer and reader.
//!
//! Names are replaced by 8-character codes (`C0000012` for columns,
//! `R0000003` for rows, `COST` for the objective) so that any LP fits the
//! fixed column layout; the [`NameTable`] maps them back. Numbers are
//! written in the 12-character fields with as many significant digits as
//! fit. The reader splits on whitespace, so it also accepts free-format
//! files whose names contain no blanks.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::lpmodel::{LpProblem, Relation};

use super::SolverError;

const OBJECTIVE_ROW: &str = "COST";

/// Bijective map between original and mangled names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameTable {
    /// `(mangled, original)` per column, in variable order.
    pub columns: Vec<(String, String)>,
    /// `(mangled, original)` per row, in constraint order.
    pub rows: Vec<(String, String)>,
}

impl NameTable {
    pub fn column_name(index: usize) -> String {
        format!("C{index:07}")
    }

    pub fn row_name(index: usize) -> String {
        format!("R{index:07}")
    }

    fn build(lp: &LpProblem) -> NameTable {
        NameTable {
            columns: lp
                .variables()
                .iter()
                .enumerate()
                .map(|(i, v)| (Self::column_name(i), v.name.clone()))
                .collect(),
            rows: lp
                .constraints()
                .iter()
                .enumerate()
                .map(|(i, c)| (Self::row_name(i), c.name.clone()))
                .collect(),
        }
    }

    /// Mangled column name → original name.
    pub fn column_lookup(&self) -> HashMap<&str, &str> {
        self.columns.iter().map(|(m, o)| (m.as_str(), o.as_str())).collect()
    }

    /// Renames a problem read back from MPS to the original names.
    pub fn restore(&self, lp: &LpProblem) -> Result<LpProblem, SolverError> {
        let cols = self.column_lookup();
        let rows: HashMap<&str, &str> = self.rows.iter().map(|(m, o)| (m.as_str(), o.as_str())).collect();
        let unknown = |name: &str| SolverError::MpsParse {
            line: 0,
            message: format!("name {name} not in the mangling table"),
        };
        let mut out = LpProblem::new(lp.name.clone());
        for v in lp.variables() {
            let name = cols.get(v.name.as_str()).ok_or_else(|| unknown(&v.name))?;
            out.add_variable(*name, v.lower, v.upper, v.cost).map_err(|e| SolverError::MpsParse {
                line: 0,
                message: e.to_string(),
            })?;
        }
        for c in lp.constraints() {
            let name = rows.get(c.name.as_str()).ok_or_else(|| unknown(&c.name))?;
            out.add_constraint(*name, c.coeffs.iter().copied(), c.relation, c.rhs)
                .map_err(|e| SolverError::MpsParse {
                    line: 0,
                    message: e.to_string(),
                })?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct MpsExport {
    pub text: String,
    pub names: NameTable,
}

/// Formats `v` in at most 12 characters, keeping as much precision as fits.
pub(crate) fn format_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    let mut best: Option<(f64, String)> = None;
    let mut consider = |s: String| {
        if s.len() > 12 {
            return;
        }
        let err = (s.parse::<f64>().unwrap_or(f64::INFINITY) - v).abs();
        if best.as_ref().is_none_or(|(e, b)| err < *e || (err == *e && s.len() < b.len())) {
            best = Some((err, s));
        }
    };
    for digits in (0..=11).rev() {
        let fixed = format!("{v:.digits$}");
        if let Some(rest) = fixed.strip_prefix("0.") {
            consider(format!(".{rest}"));
        } else if let Some(rest) = fixed.strip_prefix("-0.") {
            consider(format!("-.{rest}"));
        }
        consider(fixed);
        consider(format!("{v:.digits$e}"));
    }
    best.map(|(_, s)| s).unwrap_or(plain)
}

fn field_line(out: &mut String, code: &str, name1: &str, name2: &str, num1: &str, extra: Option<(&str, &str)>) {
    let mut line = format!(" {code:<2} {name1:<8}  {name2:<8}  {num1:>12}");
    if let Some((name3, num2)) = extra {
        let _ = write!(line, "   {name3:<8}  {num2:>12}");
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

/// Writes `lp` as fixed-format MPS.
pub fn export_mps(lp: &LpProblem) -> MpsExport {
    let names = NameTable::build(lp);
    let mut out = String::new();
    let title: String = lp.name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    let _ = writeln!(out, "NAME          {}", if title.is_empty() { "LP" } else { &title });
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    for (i, c) in lp.constraints().iter().enumerate() {
        let code = match c.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        let _ = writeln!(out, " {code:<2} {}", names.rows[i].0);
    }

    let mut by_column: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.n_variables()];
    for (i, c) in lp.constraints().iter().enumerate() {
        for &(j, a) in &c.coeffs {
            by_column[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    for (j, v) in lp.variables().iter().enumerate() {
        let col = &names.columns[j].0;
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if v.cost != 0.0 || by_column[j].is_empty() {
            entries.push((OBJECTIVE_ROW, v.cost));
        }
        entries.extend(by_column[j].iter().map(|&(i, a)| (names.rows[i].0.as_str(), a)));
        for pair in entries.chunks(2) {
            let extra = pair.get(1).map(|(r, a)| (*r, format_number(*a)));
            field_line(
                &mut out,
                "",
                col,
                pair[0].0,
                &format_number(pair[0].1),
                extra.as_ref().map(|(r, a)| (*r, a.as_str())),
            );
        }
    }

    out.push_str("RHS\n");
    let rhs: Vec<(usize, f64)> = lp
        .constraints()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.rhs != 0.0)
        .map(|(i, c)| (i, c.rhs))
        .collect();
    for pair in rhs.chunks(2) {
        let extra = pair.get(1).map(|&(i, b)| (names.rows[i].0.as_str(), format_number(b)));
        field_line(
            &mut out,
            "",
            "RHS",
            &names.rows[pair[0].0].0,
            &format_number(pair[0].1),
            extra.as_ref().map(|(r, b)| (*r, b.as_str())),
        );
    }

    let mut bounds = String::new();
    for (j, v) in lp.variables().iter().enumerate() {
        let col = &names.columns[j].0;
        let (lo, hi) = (v.lower, v.upper);
        if lo == hi {
            field_line(&mut bounds, "FX", "BND", col, &format_number(lo), None);
            continue;
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            field_line(&mut bounds, "FR", "BND", col, "", None);
            continue;
        }
        if lo == f64::NEG_INFINITY {
            field_line(&mut bounds, "MI", "BND", col, "", None);
        } else if lo != 0.0 {
            field_line(&mut bounds, "LO", "BND", col, &format_number(lo), None);
        }
        if hi.is_finite() {
            field_line(&mut bounds, "UP", "BND", col, &format_number(hi), None);
        }
    }
    if !bounds.is_empty() {
        out.push_str("BOUNDS\n");
        out.push_str(&bounds);
    }
    out.push_str("ENDATA\n");
    MpsExport { text: out, names }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
}

struct Column {
    name: String,
    cost: f64,
    entries: Vec<(usize, f64)>,
    lower: f64,
    upper: f64,
}

/// Reads MPS text into an LP with the names as written in the file.
pub fn import_mps(text: &str) -> Result<LpProblem, SolverError> {
    let err = |line: usize, message: String| SolverError::MpsParse { line, message };
    let mut name = String::new();
    let mut section: Option<Section> = None;
    let mut seen_name = false;
    let mut ended = false;
    let mut objective: Option<String> = None;
    let mut rows: Vec<(String, Relation)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut columns: Vec<Column> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if ended {
            return Err(err(line_no, "content after ENDATA".into()));
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let header = tokens[0];
            let next = match header {
                "NAME" => {
                    if seen_name || section.is_some() {
                        return Err(err(line_no, "unexpected NAME".into()));
                    }
                    seen_name = true;
                    name = tokens.get(1).map_or(String::new(), |s| s.to_string());
                    continue;
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => {
                    ended = true;
                    continue;
                }
                other => return Err(err(line_no, format!("unknown section {other:?}"))),
            };
            if !seen_name && next != Section::Rows {
                return Err(err(line_no, format!("section {header} before ROWS")));
            }
            section = Some(next);
            continue;
        }
        let Some(current) = section else {
            return Err(err(line_no, "data line outside any section".into()));
        };
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(line_no, format!("invalid number {s:?}")))
        };
        match current {
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err(line_no, "ROWS entry needs a type and a name".into()));
                }
                let relation = match tokens[0] {
                    "N" => {
                        if objective.is_none() {
                            objective = Some(tokens[1].to_string());
                        }
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    other => return Err(err(line_no, format!("unknown row type {other:?}"))),
                };
                if row_index.insert(tokens[1].to_string(), rows.len()).is_some() {
                    return Err(err(line_no, format!("duplicate row {}", tokens[1])));
                }
                rows.push((tokens[1].to_string(), relation));
                rhs.push(0.0);
            }
            Section::Columns => {
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err(line_no, "COLUMNS entry needs a column and one or two row/value pairs".into()));
                }
                let col = match col_index.get(tokens[0]) {
                    Some(&c) => c,
                    None => {
                        col_index.insert(tokens[0].to_string(), columns.len());
                        columns.push(Column {
                            name: tokens[0].to_string(),
                            cost: 0.0,
                            entries: Vec::new(),
                            lower: 0.0,
                            upper: f64::INFINITY,
                        });
                        columns.len() - 1
                    }
                };
                for pair in tokens[1..].chunks(2) {
                    let value = number(pair[1])?;
                    if objective.as_deref() == Some(pair[0]) {
                        columns[col].cost += value;
                    } else if let Some(&r) = row_index.get(pair[0]) {
                        columns[col].entries.push((r, value));
                    } else {
                        return Err(err(line_no, format!("unknown row {}", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                let pairs = match tokens.len() {
                    2 | 4 => &tokens[..],
                    3 | 5 => &tokens[1..],
                    _ => return Err(err(line_no, "malformed RHS entry".into())),
                };
                for pair in pairs.chunks(2) {
                    let value = number(pair[1])?;
                    if objective.as_deref() == Some(pair[0]) {
                        continue;
                    }
                    let &r = row_index
                        .get(pair[0])
                        .ok_or_else(|| err(line_no, format!("unknown row {}", pair[0])))?;
                    rhs[r] = value;
                }
            }
            Section::Ranges => {
                return Err(err(line_no, "ranged rows are not supported".into()));
            }
            Section::Bounds => {
                if tokens.len() < 2 {
                    return Err(err(line_no, "malformed BOUNDS entry".into()));
                }
                let key = tokens[0];
                let needs_value = matches!(key, "UP" | "LO" | "FX");
                let takes_no_value = matches!(key, "FR" | "MI" | "PL");
                if !needs_value && !takes_no_value {
                    return Err(SolverError::UnknownBoundKey {
                        line: line_no,
                        key: key.to_string(),
                    });
                }
                // Bound set name is optional.
                let (col_name, value) = match (needs_value, tokens.len()) {
                    (true, 4) => (tokens[2], Some(number(tokens[3])?)),
                    (true, 3) => (tokens[1], Some(number(tokens[2])?)),
                    (false, 3) => (tokens[2], None),
                    (false, 2) => (tokens[1], None),
                    _ => return Err(err(line_no, format!("malformed {key} bound"))),
                };
                let &c = col_index
                    .get(col_name)
                    .ok_or_else(|| err(line_no, format!("unknown column {col_name}")))?;
                let col = &mut columns[c];
                match (key, value) {
                    ("UP", Some(v)) => {
                        if v < 0.0 && col.lower == 0.0 {
                            col.lower = f64::NEG_INFINITY;
                        }
                        col.upper = v;
                    }
                    ("LO", Some(v)) => col.lower = v,
                    ("FX", Some(v)) => {
                        col.lower = v;
                        col.upper = v;
                    }
                    ("FR", _) => {
                        col.lower = f64::NEG_INFINITY;
                        col.upper = f64::INFINITY;
                    }
                    ("MI", _) => col.lower = f64::NEG_INFINITY,
                    ("PL", _) => col.upper = f64::INFINITY,
                    _ => unreachable!(),
                }
            }
        }
    }
    if !seen_name {
        return Err(err(1, "expected NAME record".into()));
    }
    if !ended {
        return Err(err(text.lines().count().max(1), "missing ENDATA".into()));
    }

    let lp_err = |e: crate::lpmodel::LpError| err(0, e.to_string());
    let mut lp = LpProblem::new(name);
    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    for col in &columns {
        let j = lp.add_variable(col.name.clone(), col.lower, col.upper, col.cost).map_err(lp_err)?;
        for &(r, a) in &col.entries {
            by_row[r].push((j, a));
        }
    }
    for ((row_name, relation), (coeffs, b)) in rows.into_iter().zip(by_row.into_iter().zip(rhs)) {
        lp.add_constraint(row_name, coeffs, relation, b).map_err(lp_err)?;
    }
    Ok(lp)
}
