//! Optimal linear assignment (Hungarian / Munkres) with forbidden entries.
//!
//! Rectangular `rows × cols` problems (`rows ≤ cols`) are padded with
//! zero-cost dummy rows to a square matrix and solved with the
//! shortest-augmenting-path form of the Hungarian method in `O(cols³)`.
//! Forbidden entries are never relaxed into large penalties: they are simply
//! absent edges, so the solver either finds a feasible optimum or reports
//! a row set violating Hall's condition.
//!
//! Among equal-cost optima the lexicographically smallest `row_to_col` is
//! returned. This is done after solving by walking the tight edges of the
//! optimal duals.

use crate::error::{Error, Result};

/// Dense cost matrix; `None` marks a forbidden entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Option<f64>>,
}

impl CostMatrix {
    /// Row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Option<f64>>) -> Result<Self> {
        Error::check_dim("cost matrix entries", rows * cols, entries.len())?;
        if entries.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("cost", "finite costs only; use a forbidden entry instead"));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Option<f64>) -> Result<Self> {
        let entries = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self::new(rows, cols, entries)
    }

    /// All entries allowed.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("cost matrix", "rows have different lengths"));
        }
        Self::new(
            rows.len(),
            cols,
            rows.iter().flatten().map(|&c| Some(c)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.entries[row * self.cols + col]
    }

    pub fn is_forbidden(&self, row: usize, col: usize) -> bool {
        self.get(row, col).is_none()
    }

    pub fn set(&mut self, row: usize, col: usize, cost: f64) {
        assert!(cost.is_finite(), "finite costs only");
        self.entries[row * self.cols + col] = Some(cost);
    }

    pub fn forbid(&mut self, row: usize, col: usize) {
        self.entries[row * self.cols + col] = None;
    }

    /// Finite entries negated, forbidden entries kept.
    pub fn negated(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.map(|c| -c)).collect(),
        }
    }

    /// Sum of the selected entries; `None` if a selected entry is forbidden.
    pub fn total(&self, row_to_col: &[usize]) -> Option<f64> {
        row_to_col
            .iter()
            .enumerate()
            .map(|(r, &c)| self.get(r, c))
            .sum()
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().fold(0.0, |m, c| m.max(c.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column assigned to each row; injective.
    pub row_to_col: Vec<usize>,
    pub total_cost: f64,
}

/// Minimum-cost complete assignment of rows to distinct columns.
pub fn solve(matrix: &CostMatrix) -> Result<Assignment> {
    if matrix.rows > matrix.cols {
        return Err(Error::invalid(
            "cost matrix",
            format!("need rows <= cols, got {}x{}", matrix.rows, matrix.cols),
        ));
    }
    if matrix.rows == 0 {
        return Ok(Assignment {
            row_to_col: Vec::new(),
            total_cost: 0.0,
        });
    }
    let mut state = Hungarian::new(matrix);
    state.run()?;
    state.canonicalize();
    let row_to_col = state.col_of_row[..matrix.rows].to_vec();
    let total_cost = matrix.total(&row_to_col).expect("solver selects admissible entries");
    Ok(Assignment { row_to_col, total_cost })
}

/// Maximum-total-score assignment; `total_cost` holds the (unnegated) score.
pub fn maximize(matrix: &CostMatrix) -> Result<Assignment> {
    let mut assignment = solve(&matrix.negated())?;
    assignment.total_cost = matrix.total(&assignment.row_to_col).expect("admissible");
    Ok(assignment)
}

/// Square padded problem with dual potentials.
struct Hungarian<'a> {
    matrix: &'a CostMatrix,
    n: usize,
    row_potential: Vec<f64>,
    col_potential: Vec<f64>,
    col_of_row: Vec<usize>,
    row_of_col: Vec<usize>,
}

impl<'a> Hungarian<'a> {
    fn new(matrix: &'a CostMatrix) -> Self {
        let n = matrix.cols;
        Self {
            matrix,
            n,
            row_potential: vec![0.0; n],
            col_potential: vec![0.0; n],
            col_of_row: vec![usize::MAX; n],
            row_of_col: vec![usize::MAX; n],
        }
    }

    /// Cost in the padded matrix: dummy rows cost zero everywhere.
    fn cost(&self, row: usize, col: usize) -> Option<f64> {
        if row < self.matrix.rows {
            self.matrix.get(row, col)
        } else {
            Some(0.0)
        }
    }

    fn run(&mut self) -> Result<()> {
        let n = self.n;
        // Index 0 is the virtual root column; real column j lives at j + 1.
        let mut u = vec![0.0; n + 1];
        let mut v = vec![0.0; n + 1];
        let mut owner = vec![0usize; n + 1];
        let mut way = vec![0usize; n + 1];
        for row in 1..=n {
            owner[0] = row;
            let mut j0 = 0;
            let mut min_slack = vec![f64::INFINITY; n + 1];
            let mut used = vec![false; n + 1];
            loop {
                used[j0] = true;
                let i0 = owner[j0];
                let mut delta = f64::INFINITY;
                let mut j1 = 0;
                for j in 1..=n {
                    if used[j] {
                        continue;
                    }
                    if let Some(c) = self.cost(i0 - 1, j - 1) {
                        let reduced = c - u[i0] - v[j];
                        if reduced < min_slack[j] {
                            min_slack[j] = reduced;
                            way[j] = j0;
                        }
                    }
                    if min_slack[j] < delta {
                        delta = min_slack[j];
                        j1 = j;
                    }
                }
                if j1 == 0 {
                    let mut rows: Vec<usize> = (0..=n).filter(|&j| used[j]).map(|j| owner[j] - 1).collect();
                    rows.sort_unstable();
                    let columns = rows.len() - 1;
                    return Err(Error::Infeasible { rows, columns });
                }
                for j in 0..=n {
                    if used[j] {
                        u[owner[j]] += delta;
                        v[j] -= delta;
                    } else {
                        min_slack[j] -= delta;
                    }
                }
                j0 = j1;
                if owner[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = way[j0];
                owner[j0] = owner[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        for (j, &owner) in owner.iter().enumerate().skip(1) {
            let row = owner - 1;
            self.row_of_col[j - 1] = row;
            self.col_of_row[row] = j - 1;
        }
        self.row_potential.copy_from_slice(&u[1..]);
        self.col_potential.copy_from_slice(&v[1..]);
        Ok(())
    }

    fn tight(&self, row: usize, col: usize, tolerance: f64) -> bool {
        self.cost(row, col)
            .is_some_and(|c| (c - self.row_potential[row] - self.col_potential[col]).abs() <= tolerance)
    }

    /// Re-selects, among optimal matchings, the lexicographically smallest
    /// assignment of the real rows. Every optimal matching uses only
    /// zero-reduced-cost edges of the optimal duals, so the search stays in
    /// that subgraph.
    fn canonicalize(&mut self) {
        let tolerance = 1e-9 * (1.0 + self.matrix.max_abs());
        for row in 0..self.matrix.rows {
            let current = self.col_of_row[row];
            for col in 0..current {
                let holder = self.row_of_col[col];
                if holder < row || !self.tight(row, col, tolerance) {
                    continue;
                }
                let mut visited = vec![false; self.n];
                visited[col] = true;
                let mut path = Vec::new();
                if self.reroute(holder, row, current, tolerance, &mut visited, &mut path) {
                    // path holds (row, new column) pairs; apply them, then move `row`
                    for &(r, c) in &path {
                        self.col_of_row[r] = c;
                        self.row_of_col[c] = r;
                    }
                    self.col_of_row[row] = col;
                    self.row_of_col[col] = row;
                    break;
                }
            }
        }
    }

    /// Finds tight columns for `row` (and whoever it displaces) ending at
    /// the column `target` that `fixed_upto` is about to release.
    fn reroute(
        &self,
        row: usize,
        fixed_upto: usize,
        target: usize,
        tolerance: f64,
        visited: &mut [bool],
        path: &mut Vec<(usize, usize)>,
    ) -> bool {
        for col in 0..self.n {
            if visited[col] || !self.tight(row, col, tolerance) {
                continue;
            }
            visited[col] = true;
            if col == target {
                path.push((row, col));
                return true;
            }
            let holder = self.row_of_col[col];
            if holder > fixed_upto && self.reroute(holder, fixed_upto, target, tolerance, visited, path) {
                path.push((row, col));
                return true;
            }
        }
        false
    }
}
