//! Dense two-phase primal simplex over f64.
//!
//! Upper bounds become explicit rows, `>=`/`=` rows get artificial variables,
//! and pricing is Dantzig with a Bland fallback once degeneracy is suspected.
//! The instances this solver sees are small and dense, so the tableau form is
//! fast enough and easy to audit.

use super::Relation;

pub(crate) const PIVOT_TOL: f64 = 1e-9;

/// LP in the internal form `min c*y`, `y >= 0`, optional upper bounds,
/// arbitrary-relation rows.
pub(crate) struct LpProblem {
    pub costs: Vec<f64>,
    pub upper: Vec<Option<f64>>,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug)]
pub(crate) enum LpOutcome {
    Optimal { y: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Cycling guard exhausted or the tableau degenerated numerically.
#[derive(Debug)]
pub(crate) struct SimplexStalled {
    pub iterations: usize,
}

struct Tableau {
    /// m x (cols + 1); last column is the rhs.
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    dead: Vec<bool>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        let inv = 1.0 / piv;
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[row] = col;
    }

    /// Rebuild the reduced-cost row for the given per-column costs.
    fn set_costs(&mut self, costs: &[f64]) {
        self.obj = vec![0.0; self.cols + 1];
        self.obj[..self.cols].copy_from_slice(costs);
        for i in 0..self.rows.len() {
            let cb = costs[self.basis[i]];
            if cb != 0.0 {
                for j in 0..=self.cols {
                    self.obj[j] -= cb * self.rows[i][j];
                }
            }
        }
    }

    /// Current objective value; `set_costs` keeps `-value` in the rhs cell.
    fn value(&self) -> f64 {
        -self.obj[self.cols]
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

/// Run the simplex iterations until optimality or unboundedness, mutating
/// the tableau in place. `allowed` filters the columns pricing may enter.
fn run_phase(
    t: &mut Tableau,
    allowed: &[bool],
    iters: &mut usize,
    bland_after: usize,
    cap: usize,
) -> Result<PhaseEnd, SimplexStalled> {
    loop {
        if *iters > cap {
            return Err(SimplexStalled { iterations: *iters });
        }
        let bland = *iters > bland_after;
        let mut entering = None;
        if bland {
            for (j, ok) in allowed.iter().enumerate().take(t.cols) {
                if *ok && t.obj[j] < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
        } else {
            let mut best = -PIVOT_TOL;
            for (j, ok) in allowed.iter().enumerate().take(t.cols) {
                if *ok && t.obj[j] < best {
                    best = t.obj[j];
                    entering = Some(j);
                }
            }
        }
        let Some(e) = entering else {
            return Ok(PhaseEnd::Optimal);
        };
        // Ratio test over live rows.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..t.rows.len() {
            if t.dead[i] {
                continue;
            }
            let a = t.rows[i][e];
            if a > PIVOT_TOL {
                let ratio = t.rhs(i) / a;
                match leave {
                    None => {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                    Some(l) => {
                        let tie_eps = 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio - tie_eps {
                            best_ratio = ratio;
                            leave = Some(i);
                        } else if (ratio - best_ratio).abs() <= tie_eps
                            && bland
                            && t.basis[i] < t.basis[l]
                        {
                            // Ties: Bland prefers the smallest basis
                            // variable, otherwise keep the lowest row index.
                            leave = Some(i);
                        }
                    }
                }
            }
        }
        let Some(l) = leave else {
            return Ok(PhaseEnd::Unbounded);
        };
        t.pivot(l, e);
        *iters += 1;
    }
}

pub(crate) fn solve_lp(p: &LpProblem) -> Result<LpOutcome, SimplexStalled> {
    let n = p.costs.len();
    // Upper bounds as explicit rows, then normalize every rhs to be >= 0.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(p.rows.len() + n);
    for (coeffs, rel, rhs) in &p.rows {
        rows.push((coeffs.clone(), *rel, *rhs));
    }
    for (j, ub) in p.upper.iter().enumerate() {
        if let Some(ub) = ub {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            rows.push((coeffs, Relation::Le, *ub));
        }
    }
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            for c in coeffs.iter_mut() {
                *c = -*c;
            }
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows
        .iter()
        .filter(|(_, rel, _)| !matches!(rel, Relation::Eq))
        .count();
    let n_art = rows
        .iter()
        .filter(|(_, rel, _)| !matches!(rel, Relation::Le))
        .count();
    let cols = n + n_slack + n_art;

    let mut t = Tableau {
        rows: vec![vec![0.0; cols + 1]; m],
        obj: vec![0.0; cols + 1],
        basis: vec![0; m],
        dead: vec![false; m],
        cols,
    };
    let mut slack_at = n;
    let mut art_at = n + n_slack;
    let mut art_cols = Vec::with_capacity(n_art);
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        t.rows[i][..n].copy_from_slice(coeffs);
        t.rows[i][cols] = *rhs;
        match rel {
            Relation::Le => {
                t.rows[i][slack_at] = 1.0;
                t.basis[i] = slack_at;
                slack_at += 1;
            }
            Relation::Ge => {
                t.rows[i][slack_at] = -1.0;
                slack_at += 1;
                t.rows[i][art_at] = 1.0;
                t.basis[i] = art_at;
                art_cols.push(art_at);
                art_at += 1;
            }
            Relation::Eq => {
                t.rows[i][art_at] = 1.0;
                t.basis[i] = art_at;
                art_cols.push(art_at);
                art_at += 1;
            }
        }
    }

    let mut iters = 0usize;
    let bland_after = 10 * (m + cols);
    let cap = 10_000 + 200 * (m + cols);

    // Phase 1: drive the artificial variables to zero.
    if !art_cols.is_empty() {
        let mut costs1 = vec![0.0; cols];
        for &c in &art_cols {
            costs1[c] = 1.0;
        }
        t.set_costs(&costs1);
        let allowed: Vec<bool> = (0..cols).map(|j| j < n + n_slack).collect();
        match run_phase(&mut t, &allowed, &mut iters, bland_after, cap)? {
            PhaseEnd::Optimal => {}
            // The phase-1 objective is bounded below by zero, so an
            // unbounded ray here is a numerical breakdown.
            PhaseEnd::Unbounded => return Err(SimplexStalled { iterations: iters }),
        }
        let max_rhs = rows.iter().map(|(_, _, r)| r.abs()).fold(0.0_f64, f64::max);
        if t.value() > 1e-7 * (1.0 + max_rhs) {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot basic artificials out; rows without a usable pivot are
        // redundant and excluded from further work.
        for i in 0..m {
            if t.basis[i] >= n + n_slack {
                let col = (0..n + n_slack).find(|&j| t.rows[i][j].abs() > PIVOT_TOL);
                match col {
                    Some(j) => t.pivot(i, j),
                    None => t.dead[i] = true,
                }
            }
        }
    }

    // Phase 2 with the real costs; artificial columns may not re-enter.
    let mut costs2 = vec![0.0; cols];
    costs2[..n].copy_from_slice(&p.costs);
    t.set_costs(&costs2);
    let allowed: Vec<bool> = (0..cols).map(|j| j < n + n_slack).collect();
    match run_phase(&mut t, &allowed, &mut iters, bland_after, cap)? {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => return Ok(LpOutcome::Unbounded),
    }

    let mut y = vec![0.0; n];
    for i in 0..m {
        if !t.dead[i] && t.basis[i] < n {
            y[t.basis[i]] = t.rhs(i);
        }
    }
    let value = p.costs.iter().zip(&y).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { y, value })
}
