//! Minimal dense two-phase revised simplex for problems of the form
//! `min c.w  s.t.  A w = b, w >= 0` with very few rows (the simplex
//! dimension, <= ~6) and many columns (grid points). This is all the convex
//! hull machinery the envelope evaluation needs: the optimal basis is the
//! lower-hull facet containing `b`, and the basic weights are its
//! barycentric coordinates.

const RC_TOL: f64 = 1e-10;
const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub feasible: bool,
    pub objective: f64,
    /// Column indices of the optimal basis (artificials removed).
    pub basis: Vec<usize>,
    /// Weights of the basic columns, parallel to `basis`.
    pub weights: Vec<f64>,
    /// Phase-1 residual; zero (up to tolerance) when feasible.
    pub infeasibility: f64,
}

/// Solve `min c.w : A w = b, w >= 0`. `columns` is column-major with
/// `n_rows` stride. `warm_basis` is tried first and silently discarded if
/// it is singular or infeasible.
pub(crate) fn solve_min(
    n_rows: usize,
    columns: &[f64],
    costs: &[f64],
    rhs: &[f64],
    warm_basis: Option<&[usize]>,
) -> LpSolution {
    let n_cols = costs.len();
    debug_assert_eq!(columns.len(), n_rows * n_cols);
    debug_assert_eq!(rhs.len(), n_rows);
    let mut state = Tableau {
        n_rows,
        n_cols,
        columns,
        rhs,
        basis: Vec::new(),
    };

    let mut need_phase1 = true;
    if let Some(warm) = warm_basis {
        if warm.len() == n_rows && warm.iter().all(|&j| j < n_cols) {
            state.basis = warm.to_vec();
            if let Some(x) = state.basic_point() {
                if x.iter().all(|&v| v >= -FEAS_TOL) {
                    need_phase1 = false;
                }
            }
        }
    }

    if need_phase1 {
        // artificial columns are e_i with index n_cols + i
        state.basis = (0..n_rows).map(|i| n_cols + i).collect();
        let phase1_costs = Phase::One;
        state.optimize(&phase1_costs, costs);
        let x = state.basic_point().unwrap_or_else(|| vec![0.0; n_rows]);
        let residual: f64 = state
            .basis
            .iter()
            .zip(&x)
            .filter(|(&j, _)| j >= n_cols)
            .map(|(_, &v)| v.max(0.0))
            .sum();
        if residual > FEAS_TOL {
            return LpSolution {
                feasible: false,
                objective: f64::INFINITY,
                basis: Vec::new(),
                weights: Vec::new(),
                infeasibility: residual,
            };
        }
        state.evict_artificials();
    }

    state.optimize(&Phase::Two, costs);
    let x = state.basic_point().unwrap_or_else(|| vec![0.0; n_rows]);
    let mut basis = Vec::new();
    let mut weights = Vec::new();
    let mut objective = 0.0;
    for (&j, &w) in state.basis.iter().zip(&x) {
        if j < n_cols {
            basis.push(j);
            weights.push(w.max(0.0));
            objective += costs[j] * w.max(0.0);
        }
    }
    LpSolution {
        feasible: true,
        objective,
        basis,
        weights,
        infeasibility: 0.0,
    }
}

enum Phase {
    One,
    Two,
}

struct Tableau<'a> {
    n_rows: usize,
    n_cols: usize,
    columns: &'a [f64],
    rhs: &'a [f64],
    basis: Vec<usize>,
}

impl<'a> Tableau<'a> {
    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.n_cols {
            out.copy_from_slice(&self.columns[j * self.n_rows..(j + 1) * self.n_rows]);
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j - self.n_cols] = 1.0;
        }
    }

    fn cost(&self, j: usize, phase: &Phase, costs: &[f64]) -> f64 {
        match phase {
            Phase::One => {
                if j < self.n_cols {
                    0.0
                } else {
                    1.0
                }
            }
            Phase::Two => {
                if j < self.n_cols {
                    costs[j]
                } else {
                    0.0
                }
            }
        }
    }

    fn basis_matrix(&self) -> Vec<f64> {
        let n = self.n_rows;
        let mut b = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for (k, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            b[k * n..(k + 1) * n].copy_from_slice(&col);
        }
        b
    }

    /// Solve `B x = rhs` for the current basis.
    fn basic_point(&self) -> Option<Vec<f64>> {
        solve_dense(self.n_rows, &self.basis_matrix(), self.rhs)
    }

    /// Solve `B^T y = c_B`.
    fn duals(&self, phase: &Phase, costs: &[f64]) -> Option<Vec<f64>> {
        let n = self.n_rows;
        let b = self.basis_matrix();
        let mut bt = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                bt[c * n + r] = b[r * n + c];
            }
        }
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&j| self.cost(j, phase, costs))
            .collect();
        solve_dense(n, &bt, &cb)
    }

    fn optimize(&mut self, phase: &Phase, costs: &[f64]) {
        let n = self.n_rows;
        let mut col = vec![0.0; n];
        for iter in 0..20_000 {
            let bland = iter > 2_000;
            let (x, y) = match (self.basic_point(), self.duals(phase, costs)) {
                (Some(x), Some(y)) => (x, y),
                _ => return, // singular basis; give up with current state
            };

            // pricing
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.n_cols {
                if self.basis.contains(&j) {
                    continue;
                }
                self.column(j, &mut col);
                let mut rc = self.cost(j, phase, costs);
                for (yi, ci) in y.iter().zip(&col) {
                    rc -= yi * ci;
                }
                if rc < -RC_TOL {
                    if bland {
                        enter = Some((j, rc));
                        break;
                    }
                    match enter {
                        Some((_, best)) if rc >= best => {}
                        _ => enter = Some((j, rc)),
                    }
                }
            }
            let Some((j_in, _)) = enter else {
                return; // optimal
            };

            // direction d = B^{-1} a_j
            self.column(j_in, &mut col);
            let Some(d) = solve_dense(n, &self.basis_matrix(), &col) else {
                return;
            };

            // ratio test; basic artificials must not rise above zero
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..n {
                if d[i] > PIVOT_TOL {
                    let ratio = (x[i].max(0.0)) / d[i];
                    match leave {
                        Some((li, lr))
                            if ratio > lr + 1e-15
                                || (ratio >= lr - 1e-15 && self.basis[i] >= self.basis[li]) => {}
                        _ => leave = Some((i, ratio)),
                    }
                } else if d[i] < -PIVOT_TOL && self.basis[i] >= self.n_cols && x[i] <= FEAS_TOL {
                    // degenerate exchange that kicks the artificial out
                    leave = Some((i, 0.0));
                    break;
                }
            }
            let Some((i_out, _)) = leave else {
                return; // unbounded direction; cannot happen on the simplex hull
            };
            self.basis[i_out] = j_in;
        }
    }

    /// After phase 1, replace zero-level basic artificials with real columns
    /// where possible (redundant rows keep their artificial at level zero).
    fn evict_artificials(&mut self) {
        let n = self.n_rows;
        let mut col = vec![0.0; n];
        for i in 0..n {
            if self.basis[i] < self.n_cols {
                continue;
            }
            for j in 0..self.n_cols {
                if self.basis.contains(&j) {
                    continue;
                }
                self.column(j, &mut col);
                if let Some(d) = solve_dense(n, &self.basis_matrix(), &col) {
                    if d[i].abs() > 1e-7 {
                        self.basis[i] = j;
                        break;
                    }
                }
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; `a` is column-major `n x n`.
fn solve_dense(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let at = |m: &[f64], r: usize, c: usize| m[c * n + r];
    for k in 0..n {
        let mut piv = k;
        for r in k + 1..n {
            if at(&m, r, k).abs() > at(&m, piv, k).abs() {
                piv = r;
            }
        }
        if at(&m, piv, k).abs() < 1e-13 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                m.swap(c * n + piv, c * n + k);
            }
            x.swap(piv, k);
        }
        let pivot = at(&m, k, k);
        for r in k + 1..n {
            let factor = at(&m, r, k) / pivot;
            if factor != 0.0 {
                for c in k..n {
                    m[c * n + r] -= factor * at(&m, k, c);
                }
                x[r] -= factor * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for c in k + 1..n {
            acc -= at(&m, k, c) * x[c];
        }
        x[k] = acc / at(&m, k, k);
    }
    Some(x)
}
