//! Dense two-phase simplex for small linear programs.
//!
//! Solves `max c·x` subject to `A_ub x ≤ b_ub`, `A_eq x = b_eq`, `x ≥ 0`.
//! Pivoting follows Bland's rule (lowest-index entering column, lowest-index
//! leaving basic variable on ratio ties), except that tied leaving rows with
//! a pivot far below the largest tied pivot are passed over: tiny pivots on
//! degenerate vertices destroy the tableau's accuracy. The optimum carries
//! the dual prices of every constraint, upper rows first.

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_EPS: f64 = 1e-9;
/// Pivots smaller than this fraction of the column's largest entry are refused.
const RELATIVE_PIVOT: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
/// Tied leaving rows must have a pivot at least this share of the largest tied pivot.
const TIE_PIVOT_SHARE: f64 = 0.1;

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub upper: Vec<(Vec<f64>, f64)>,
    pub equal: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64, duals: Vec<f64> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("malformed program: {0}")]
    Malformed(String),
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_cols: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.n_cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over columns flagged in `allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool], limit: usize) -> Result<Phase, LpError> {
        for _ in 0..limit {
            // reduced cost z_j - c_j
            let entering = (0..self.n_cols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .map(|(row, &b)| cost[b] * row[j])
                    .sum();
                z - cost[j] < -PIVOT_EPS
            });
            let Some(c) = entering else {
                return Ok(Phase::Optimal);
            };
            // Ratio test. Among ties, prefer pivots within a factor of the
            // largest tied pivot, then the lowest basic index.
            let col_max = self.rows.iter().map(|row| row[c].abs()).fold(0.0, f64::max);
            let min_pivot = PIVOT_EPS.max(RELATIVE_PIVOT * col_max);
            let mut best_ratio = f64::INFINITY;
            for row in &self.rows {
                let a = row[c];
                if a > min_pivot {
                    best_ratio = best_ratio.min(row[self.n_cols].max(0.0) / a);
                }
            }
            let tied: Vec<usize> = (0..self.rows.len())
                .filter(|&r| {
                    let a = self.rows[r][c];
                    a > min_pivot && self.rhs(r).max(0.0) / a <= best_ratio + RATIO_TIE * (1.0 + best_ratio)
                })
                .collect();
            let largest = tied.iter().map(|&r| self.rows[r][c]).fold(0.0, f64::max);
            let leave = tied
                .iter()
                .copied()
                .filter(|&r| self.rows[r][c] >= TIE_PIVOT_SHARE * largest)
                .min_by_key(|&r| self.basis[r])
                .map(|r| (r, best_ratio));
            let Some((r, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(r, c);
        }
        Err(LpError::IterationLimit(limit))
    }
}

impl LinearProgram {
    pub fn maximize(&self) -> Result<LpOutcome, LpError> {
        let n = self.objective.len();
        if self
            .upper
            .iter()
            .chain(&self.equal)
            .any(|(row, b)| row.len() != n || !b.is_finite() || row.iter().any(|v| !v.is_finite()))
        {
            return Err(LpError::Malformed("row length or non-finite coefficient".into()));
        }
        let n_slack = self.upper.len();
        let m = self.upper.len() + self.equal.len();

        // Which rows need an artificial variable.
        let mut needs_art = Vec::with_capacity(m);
        for (_, b) in &self.upper {
            needs_art.push(*b < 0.0);
        }
        for _ in &self.equal {
            needs_art.push(true);
        }
        let n_art = needs_art.iter().filter(|&&x| x).count();
        let n_cols = n + n_slack + n_art;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut art_col = n + n_slack;
        // Column that starts as the unit vector of each row, and the row sign.
        let mut unit_col = Vec::with_capacity(m);
        let mut signs = Vec::with_capacity(m);
        for (r, (coeffs, b)) in self.upper.iter().chain(&self.equal).enumerate() {
            let mut row = vec![0.0; n_cols + 1];
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for (dst, &v) in row.iter_mut().zip(coeffs) {
                *dst = sign * v;
            }
            if r < n_slack {
                row[n + r] = sign;
            }
            row[n_cols] = sign * b;
            signs.push(sign);
            if needs_art[r] {
                row[art_col] = 1.0;
                basis.push(art_col);
                unit_col.push(art_col);
                art_col += 1;
            } else {
                basis.push(n + r);
                unit_col.push(n + r);
            }
            rows.push(row);
        }
        let mut t = Tableau { rows, basis, n_cols };
        let limit = 100 * (m + n_cols) + 1000;
        let is_art = |j: usize| j >= n + n_slack;

        if n_art > 0 {
            let cost: Vec<f64> = (0..n_cols).map(|j| if is_art(j) { -1.0 } else { 0.0 }).collect();
            let allowed = vec![true; n_cols];
            t.optimize(&cost, &allowed, limit)?;
            let infeas: f64 = (0..m).filter(|&r| is_art(t.basis[r])).map(|r| t.rhs(r)).sum();
            if infeas > FEASIBILITY_EPS {
                return Ok(LpOutcome::Infeasible);
            }
            // Drive remaining zero-level artificials out of the basis.
            for r in 0..m {
                if is_art(t.basis[r]) {
                    if let Some(c) = (0..n + n_slack).find(|&j| t.rows[r][j].abs() > PIVOT_EPS) {
                        t.pivot(r, c);
                    }
                }
            }
        }

        let mut cost = vec![0.0; n_cols];
        cost[..n].copy_from_slice(&self.objective);
        let allowed: Vec<bool> = (0..n_cols).map(|j| !is_art(j)).collect();
        match t.optimize(&cost, &allowed, limit)? {
            Phase::Unbounded => Ok(LpOutcome::Unbounded),
            Phase::Optimal => {
                let mut x = vec![0.0; n];
                for (r, &b) in t.basis.iter().enumerate() {
                    if b < n {
                        x[b] = t.rhs(r);
                    }
                }
                let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
                let duals = (0..m)
                    .map(|r| {
                        let z: f64 = t.rows.iter().zip(&t.basis).map(|(row, &b)| cost[b] * row[unit_col[r]]).sum();
                        signs[r] * z
                    })
                    .collect();
                Ok(LpOutcome::Optimal { x, value, duals })
            }
        }
    }
}
