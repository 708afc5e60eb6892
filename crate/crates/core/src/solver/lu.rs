//! Sparse LU factorization of simplex bases with product-form updates.
//!
//! Columns are factored left-looking in order of increasing nonzero count.
//! Each column is reduced by a sparse triangular solve whose nonzero pattern
//! comes from a depth-first search over the L graph, and the pivot is chosen
//! by threshold partial pivoting preferring sparse rows. Basis changes
//! between refactorizations are applied as eta columns.

/// A sparse column given as parallel index and value arrays.
#[derive(Debug, Clone, Default)]
pub struct SparseCol {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

#[cfg(test)]
impl SparseCol {
    fn push(&mut self, i: usize, v: f64) {
        self.idx.push(i);
        self.val.push(v);
    }
}

#[derive(Debug)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

/// Outcome of a factorization that hit structurally or numerically
/// singular columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Singular {
    /// Basis positions whose columns could not be pivoted.
    pub positions: Vec<usize>,
    /// Rows left without a pivot, as many as `positions`.
    pub rows: Vec<usize>,
}

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Default)]
pub struct BasisFactor {
    m: usize,
    /// step -> pivot row
    pivot_row: Vec<usize>,
    /// step -> basis position of the column factored at that step
    col_pos: Vec<usize>,
    l_start: Vec<usize>,
    l_row: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_step: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
}

impl BasisFactor {
    pub fn n_updates(&self) -> usize {
        self.etas.len()
    }

    /// Factors the basis whose column at position `p` is `cols[p]`.
    pub fn factorize(cols: &[SparseCol], m: usize) -> Result<BasisFactor, Singular> {
        assert_eq!(cols.len(), m);
        let mut row_count = vec![0usize; m];
        for c in cols {
            for &i in &c.idx {
                row_count[i] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| (cols[p].idx.len(), p));

        const UNSET: usize = usize::MAX;
        let mut f = BasisFactor {
            m,
            pivot_row: Vec::with_capacity(m),
            col_pos: Vec::with_capacity(m),
            l_start: vec![0],
            u_start: vec![0],
            ..Default::default()
        };
        let mut row_step = vec![UNSET; m];
        let mut x = vec![0.0; m];
        let mut in_pattern = vec![false; m];
        let mut pattern: Vec<usize> = Vec::new();
        let mut visited = vec![usize::MAX; m]; // step -> last column that visited it
        let mut topo: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut singular_positions = Vec::new();

        for (k_col, &pos) in order.iter().enumerate() {
            let col = &cols[pos];
            pattern.clear();
            for (&i, &v) in col.idx.iter().zip(&col.val) {
                x[i] += v;
                if !in_pattern[i] {
                    in_pattern[i] = true;
                    pattern.push(i);
                }
            }

            // Steps reachable from the column pattern, in topological order.
            topo.clear();
            for &i in &col.idx {
                let s = row_step[i];
                if s == UNSET || visited[s] == k_col {
                    continue;
                }
                visited[s] = k_col;
                stack.push((s, f.l_start[s]));
                while let Some(&mut (step, ref mut next)) = stack.last_mut() {
                    let end = f.l_start[step + 1];
                    let mut descended = false;
                    while *next < end {
                        let r = f.l_row[*next];
                        *next += 1;
                        let child = row_step[r];
                        if child != UNSET && visited[child] != k_col {
                            visited[child] = k_col;
                            stack.push((child, f.l_start[child]));
                            descended = true;
                            break;
                        }
                    }
                    if !descended {
                        topo.push(step);
                        stack.pop();
                    }
                }
            }

            for &step in topo.iter().rev() {
                let xj = x[f.pivot_row[step]];
                if xj == 0.0 {
                    continue;
                }
                for e in f.l_start[step]..f.l_start[step + 1] {
                    let r = f.l_row[e];
                    x[r] -= f.l_val[e] * xj;
                    if !in_pattern[r] {
                        in_pattern[r] = true;
                        pattern.push(r);
                    }
                }
            }

            let mut max_abs: f64 = 0.0;
            for &r in &pattern {
                if row_step[r] == UNSET {
                    max_abs = max_abs.max(x[r].abs());
                }
            }
            let step = f.pivot_row.len();
            let mut pivot = UNSET;
            if max_abs > SINGULAR_TOL {
                let mut best = (usize::MAX, 0.0f64);
                for &r in &pattern {
                    if row_step[r] != UNSET {
                        continue;
                    }
                    let a = x[r].abs();
                    if a < PIVOT_THRESHOLD * max_abs {
                        continue;
                    }
                    let better = row_count[r] < best.0
                        || (row_count[r] == best.0 && (a > best.1 || (a == best.1 && r < pivot)));
                    if better {
                        best = (row_count[r], a);
                        pivot = r;
                    }
                }
            }

            if pivot == UNSET {
                singular_positions.push(pos);
            } else {
                let piv = x[pivot];
                for &r in &pattern {
                    let v = x[r];
                    if r == pivot || v.abs() <= DROP_TOL {
                        continue;
                    }
                    if row_step[r] == UNSET {
                        f.l_row.push(r);
                        f.l_val.push(v / piv);
                    } else {
                        f.u_step.push(row_step[r]);
                        f.u_val.push(v);
                    }
                }
                f.u_diag.push(piv);
                f.pivot_row.push(pivot);
                f.col_pos.push(pos);
                f.l_start.push(f.l_row.len());
                f.u_start.push(f.u_step.len());
                row_step[pivot] = step;
            }
            for &r in &pattern {
                x[r] = 0.0;
                in_pattern[r] = false;
            }
        }

        if singular_positions.is_empty() {
            Ok(f)
        } else {
            let rows = (0..m).filter(|&r| row_step[r] == UNSET).collect();
            Err(Singular {
                positions: singular_positions,
                rows,
            })
        }
    }

    /// Solves `B z = rhs` in place. `rhs` is indexed by row on entry and by
    /// basis position on exit.
    pub fn ftran(&self, rhs: &mut Vec<f64>) {
        let m = self.m;
        let x = rhs;
        for step in 0..m {
            let v = x[self.pivot_row[step]];
            if v == 0.0 {
                continue;
            }
            for e in self.l_start[step]..self.l_start[step + 1] {
                x[self.l_row[e]] -= self.l_val[e] * v;
            }
        }
        let mut w: Vec<f64> = self.pivot_row.iter().map(|&r| x[r]).collect();
        let z = x;
        for k in (0..m).rev() {
            let v = w[k] / self.u_diag[k];
            z[self.col_pos[k]] = v;
            if v == 0.0 {
                continue;
            }
            for e in self.u_start[k]..self.u_start[k + 1] {
                w[self.u_step[e]] -= self.u_val[e] * v;
            }
        }
        for eta in &self.etas {
            let zr = z[eta.pos] / eta.pivot;
            z[eta.pos] = zr;
            if zr != 0.0 {
                for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                    z[i] -= a * zr;
                }
            }
        }
    }

    /// Solves `B^T y = c` in place. `c` is indexed by basis position on entry
    /// and by row on exit.
    pub fn btran(&self, c: &mut Vec<f64>) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                s -= a * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let mut v = vec![0.0; m];
        for k in 0..m {
            let mut s = c[self.col_pos[k]];
            for e in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[e] * v[self.u_step[e]];
            }
            v[k] = s / self.u_diag[k];
        }
        let y = c;
        for step in (0..m).rev() {
            let mut s = v[step];
            for e in self.l_start[step]..self.l_start[step + 1] {
                s -= self.l_val[e] * y[self.l_row[e]];
            }
            y[self.pivot_row[step]] = s;
        }
    }

    /// Records the replacement of the column at basis position `pos` by a
    /// column whose ftran image is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let mut eta = Eta {
            pos,
            pivot: alpha[pos],
            idx: Vec::new(),
            val: Vec::new(),
        };
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP_TOL {
                eta.idx.push(i);
                eta.val.push(a);
            }
        }
        self.etas.push(eta);
    }
}
