//! Exact single-objective integer linear programming.
//!
//! `solve` runs best-first branch-and-bound over a dense two-phase simplex
//! relaxation. Problem data is exact rational; the simplex works in f64 and
//! every candidate integer solution is re-checked and re-evaluated in exact
//! arithmetic before it can become the incumbent, so the reported objective
//! of an `Optimal` result is exact. `solve_exhaustive` is the enumeration
//! oracle used to cross-check the solver in tests.

mod simplex;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::problems::ProblemInstance;
use simplex::{solve_lp, LpOutcome, LpProblem};

/// Constraint relation. The serialized forms match the instance file schema.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub lower: BigRational,
    pub upper: Option<BigRational>,
    pub integer: bool,
}

#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

/// A minimization ILP with rational data. `offset` is a constant added to
/// the objective so that scalarized programs report the true scalarization
/// value rather than just the linear part.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<BigRational>,
    pub offset: BigRational,
    pub constraints: Vec<LinearConstraint>,
    pub variables: Vec<Variable>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    BudgetExceeded,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Exact values for all variables; empty when no solution is available.
    pub x: Vec<BigRational>,
    /// Exact objective of `x` (including the offset) when one exists.
    pub objective: Option<BigRational>,
    /// Objective-space image under the owning multiobjective instance,
    /// filled by the caller.
    pub z: Option<Point>,
    pub node_count: u64,
    pub wall_time: Duration,
}

impl SolveResult {
    /// Values of the integer variables rounded to `i64`, in variable order.
    pub fn integer_assignment(&self, lp: &LinearProgram) -> Vec<i64> {
        self.x
            .iter()
            .zip(&lp.variables)
            .filter(|(_, v)| v.integer)
            .map(|(x, _)| {
                x.to_integer()
                    .to_i64()
                    .expect("integer value out of i64 range")
            })
            .collect()
    }

    pub fn objective_f64(&self) -> Option<f64> {
        self.objective.as_ref().and_then(|o| o.to_f64())
    }
}

#[derive(Debug, Error)]
pub enum IlpError {
    #[error("malformed program: {0}")]
    Invalid(String),
    #[error("simplex stalled after {iterations} iterations")]
    SimplexStalled { iterations: usize },
    #[error("domain too large for exhaustive enumeration: {size} > {limit}")]
    DomainTooLarge { size: u128, limit: u128 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

pub fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Integrality is accepted within this distance of an integer, and a node is
/// pruned when its relaxation bound cannot beat the incumbent by more than
/// this margin. Mirrors running the reference solver with zero tolerances as
/// closely as f64 relaxations allow.
pub const INT_TOL: f64 = 1e-9;

const ENUMERATION_LIMIT: u128 = 1 << 24;

fn validate(lp: &LinearProgram) -> Result<(), IlpError> {
    let n = lp.variables.len();
    if n == 0 {
        return Err(IlpError::Invalid("no variables".into()));
    }
    if lp.objective.len() != n {
        return Err(IlpError::Invalid("objective length mismatch".into()));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(IlpError::Invalid(format!("constraint {i} length mismatch")));
        }
    }
    let mut continuous = 0usize;
    for (j, v) in lp.variables.iter().enumerate() {
        if v.integer && v.upper.is_none() {
            return Err(IlpError::Invalid(format!(
                "integer variable {j} has no upper bound"
            )));
        }
        if let Some(u) = &v.upper {
            if *u < v.lower {
                return Err(IlpError::Invalid(format!("variable {j} has empty bounds")));
            }
        }
        if !v.integer {
            continuous += 1;
        }
    }
    if continuous > 1 {
        return Err(IlpError::Invalid(
            "at most one continuous variable is supported".into(),
        ));
    }
    Ok(())
}

/// Tightest integer bounds implied by the rational variable bounds.
/// Returns one `(lo, hi)` pair per integer variable, in variable order.
fn integer_bounds(lp: &LinearProgram) -> Result<Vec<(i64, i64)>, IlpError> {
    let mut out = Vec::new();
    for v in &lp.variables {
        if !v.integer {
            continue;
        }
        let lo = v
            .lower
            .ceil()
            .to_integer()
            .to_i64()
            .ok_or_else(|| IlpError::Invalid("integer bound out of i64 range".into()))?;
        let hi = v
            .upper
            .as_ref()
            .expect("validated")
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| IlpError::Invalid("integer bound out of i64 range".into()))?;
        out.push((lo, hi));
    }
    Ok(out)
}

enum CandidateEval {
    Feasible {
        x: Vec<BigRational>,
        objective: BigRational,
    },
    Infeasible,
    Unbounded,
}

/// Exact feasibility check and objective evaluation for a fixed assignment
/// of the integer variables. The single continuous variable, if present, is
/// set to the bound that minimizes the objective among the values allowed by
/// the rows.
fn evaluate_candidate(lp: &LinearProgram, ints: &[i64]) -> CandidateEval {
    let n = lp.variables.len();
    let mut x: Vec<BigRational> = Vec::with_capacity(n);
    let mut cont: Option<usize> = None;
    let mut it = ints.iter();
    for (j, v) in lp.variables.iter().enumerate() {
        if v.integer {
            let val = rational(*it.next().expect("assignment length"));
            if val < v.lower || v.upper.as_ref().is_some_and(|u| val > *u) {
                return CandidateEval::Infeasible;
            }
            x.push(val);
        } else {
            cont = Some(j);
            x.push(BigRational::zero());
        }
    }

    let mut lb = cont.map(|t| lp.variables[t].lower.clone());
    let mut ub = cont.and_then(|t| lp.variables[t].upper.clone());
    for row in &lp.constraints {
        let a = cont
            .map(|t| row.coeffs[t].clone())
            .unwrap_or_else(BigRational::zero);
        let mut s = BigRational::zero();
        for (j, c) in row.coeffs.iter().enumerate() {
            if Some(j) != cont && !c.is_zero() {
                s += c * &x[j];
            }
        }
        if a.is_zero() {
            let ok = match row.relation {
                Relation::Le => s <= row.rhs,
                Relation::Eq => s == row.rhs,
                Relation::Ge => s >= row.rhs,
            };
            if !ok {
                return CandidateEval::Infeasible;
            }
            continue;
        }
        let bound = (&row.rhs - &s) / &a;
        let tightens_upper = match row.relation {
            Relation::Le => a.is_positive(),
            Relation::Ge => a.is_negative(),
            Relation::Eq => true,
        };
        let tightens_lower = match row.relation {
            Relation::Le => a.is_negative(),
            Relation::Ge => a.is_positive(),
            Relation::Eq => true,
        };
        if tightens_upper {
            ub = Some(match ub {
                Some(u) if u <= bound => u,
                _ => bound.clone(),
            });
        }
        if tightens_lower {
            let l = lb.take().expect("rows mention a continuous variable");
            lb = Some(if l >= bound { l } else { bound });
        }
    }

    if let Some(t) = cont {
        let lb = lb.expect("continuous lower bound");
        if let Some(u) = &ub {
            if lb > *u {
                return CandidateEval::Infeasible;
            }
        }
        let c = &lp.objective[t];
        let v = if c.is_negative() {
            match ub {
                Some(u) => u,
                None => return CandidateEval::Unbounded,
            }
        } else {
            lb
        };
        x[t] = v;
    }

    let mut objective = lp.offset.clone();
    for (c, xi) in lp.objective.iter().zip(&x) {
        if !c.is_zero() {
            objective += c * xi;
        }
    }
    CandidateEval::Feasible { x, objective }
}

/// f64 image of the program used by the relaxations.
struct F64Cache {
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
    offset: f64,
    lower: Vec<f64>,
    upper: Vec<Option<f64>>,
    int_index: Vec<Option<usize>>,
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(if r.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

impl F64Cache {
    fn new(lp: &LinearProgram) -> Self {
        let mut int_index = Vec::with_capacity(lp.variables.len());
        let mut k = 0;
        for v in &lp.variables {
            int_index.push(v.integer.then(|| {
                let i = k;
                k += 1;
                i
            }));
        }
        F64Cache {
            objective: lp.objective.iter().map(to_f64).collect(),
            rows: lp
                .constraints
                .iter()
                .map(|c| {
                    (
                        c.coeffs.iter().map(to_f64).collect(),
                        c.relation,
                        to_f64(&c.rhs),
                    )
                })
                .collect(),
            offset: to_f64(&lp.offset),
            lower: lp.variables.iter().map(|v| to_f64(&v.lower)).collect(),
            upper: lp
                .variables
                .iter()
                .map(|v| v.upper.as_ref().map(to_f64))
                .collect(),
            int_index,
        }
    }

    /// Solve the relaxation with the given bounds on the integer variables.
    /// Variables are shifted to start at zero for the simplex.
    fn relax(&self, int_bounds: &[(i64, i64)]) -> Result<LpOutcome, IlpError> {
        let n = self.objective.len();
        let mut lo = vec![0.0; n];
        let mut span = vec![None; n];
        for j in 0..n {
            match self.int_index[j] {
                Some(k) => {
                    let (l, h) = int_bounds[k];
                    lo[j] = l as f64;
                    span[j] = Some((h - l) as f64);
                }
                None => {
                    lo[j] = self.lower[j];
                    span[j] = self.upper[j].map(|u| u - self.lower[j]);
                }
            }
        }
        let rows = self
            .rows
            .iter()
            .map(|(coeffs, rel, rhs)| {
                let shift: f64 = coeffs.iter().zip(&lo).map(|(c, l)| c * l).sum();
                (coeffs.clone(), *rel, rhs - shift)
            })
            .collect();
        let problem = LpProblem {
            costs: self.objective.clone(),
            upper: span,
            rows,
        };
        match solve_lp(&problem) {
            Ok(LpOutcome::Optimal { y, value }) => {
                let x: Vec<f64> = y.iter().zip(&lo).map(|(yi, l)| yi + l).collect();
                let shift: f64 = self.objective.iter().zip(&lo).map(|(c, l)| c * l).sum();
                Ok(LpOutcome::Optimal {
                    y: x,
                    value: value + shift + self.offset,
                })
            }
            Ok(other) => Ok(other),
            Err(e) => Err(IlpError::SimplexStalled {
                iterations: e.iterations,
            }),
        }
    }
}

struct Node {
    bound: f64,
    seq: u64,
    int_bounds: Vec<(i64, i64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Best-first: smaller bound pops first, FIFO on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Exact branch-and-bound. Deterministic: most-fractional branching with
/// lowest-index ties, best-bound node selection with FIFO ties.
pub fn solve(lp: &LinearProgram, budget: Option<Duration>) -> Result<SolveResult, IlpError> {
    validate(lp)?;
    let start = Instant::now();
    let cache = F64Cache::new(lp);
    let root_bounds = integer_bounds(lp)?;
    let mut node_count = 0u64;
    let mut incumbent: Option<(Vec<BigRational>, BigRational)> = None;
    let mut incumbent_f64 = f64::INFINITY;

    let done = |status: SolveStatus,
                incumbent: Option<(Vec<BigRational>, BigRational)>,
                node_count: u64| {
        let (x, objective) = match incumbent {
            Some((x, o)) => (x, Some(o)),
            None => (Vec::new(), None),
        };
        Ok(SolveResult {
            status,
            x,
            objective,
            z: None,
            node_count,
            wall_time: start.elapsed(),
        })
    };

    if root_bounds.iter().any(|(l, h)| l > h) {
        return done(SolveStatus::Infeasible, None, 0);
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq,
        int_bounds: root_bounds,
    });

    while let Some(node) = heap.pop() {
        if let Some(b) = budget {
            if start.elapsed() > b {
                let status = SolveStatus::BudgetExceeded;
                return done(status, incumbent, node_count);
            }
        }
        if node.bound >= incumbent_f64 - INT_TOL {
            continue;
        }
        let outcome = cache.relax(&node.int_bounds)?;
        node_count += 1;
        let (x, value) = match outcome {
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => return done(SolveStatus::Unbounded, None, node_count),
            LpOutcome::Optimal { y, value } => (y, value),
        };
        if value >= incumbent_f64 - INT_TOL {
            continue;
        }

        // Most-fractional integer variable; ties by lowest index.
        let mut branch: Option<(usize, usize, f64)> = None; // (var, int slot, score)
        for (j, slot) in cache.int_index.iter().enumerate() {
            let Some(k) = *slot else { continue };
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist <= INT_TOL {
                continue;
            }
            let score = (frac - 0.5).abs();
            if branch.is_none_or(|(_, _, s)| score < s) {
                branch = Some((j, k, score));
            }
        }

        match branch {
            None => {
                // Relaxation is integral: round exactly and certify.
                let ints: Vec<i64> = cache
                    .int_index
                    .iter()
                    .enumerate()
                    .filter_map(|(j, slot)| slot.map(|k| (j, k)))
                    .map(|(j, k)| {
                        let (l, h) = node.int_bounds[k];
                        (x[j].round() as i64).clamp(l, h)
                    })
                    .collect();
                match evaluate_candidate(lp, &ints) {
                    CandidateEval::Feasible { x, objective } => {
                        let better = incumbent.as_ref().is_none_or(|(_, inc)| objective < *inc);
                        if better {
                            incumbent_f64 = to_f64(&objective);
                            incumbent = Some((x, objective));
                        }
                    }
                    CandidateEval::Unbounded => {
                        return done(SolveStatus::Unbounded, None, node_count)
                    }
                    CandidateEval::Infeasible => {
                        // The f64 relaxation accepted a point the exact check
                        // rejects. Split the widest remaining domain so no
                        // integer point is lost.
                        if let Some(k) = (0..node.int_bounds.len())
                            .find(|&k| node.int_bounds[k].0 < node.int_bounds[k].1)
                        {
                            let (l, h) = node.int_bounds[k];
                            let mid = l + (h - l) / 2;
                            for (cl, ch) in [(l, mid), (mid + 1, h)] {
                                seq += 1;
                                let mut b = node.int_bounds.clone();
                                b[k] = (cl, ch);
                                heap.push(Node {
                                    bound: value,
                                    seq,
                                    int_bounds: b,
                                });
                            }
                        }
                    }
                }
            }
            Some((j, k, _)) => {
                let floor = x[j].floor() as i64;
                let (l, h) = node.int_bounds[k];
                for (cl, ch) in [(l, floor.min(h)), ((floor + 1).max(l), h)] {
                    if cl > ch {
                        continue;
                    }
                    seq += 1;
                    let mut b = node.int_bounds.clone();
                    b[k] = (cl, ch);
                    heap.push(Node {
                        bound: value,
                        seq,
                        int_bounds: b,
                    });
                }
            }
        }
    }

    match incumbent {
        Some(_) => done(SolveStatus::Optimal, incumbent, node_count),
        None => done(SolveStatus::Infeasible, None, node_count),
    }
}

/// Ground-truth oracle: enumerate every integer assignment. The feasible-set
/// size is capped; the one allowed continuous variable is set to its implied
/// optimum per assignment, exactly as in `evaluate_candidate`.
pub fn solve_exhaustive(lp: &LinearProgram) -> Result<SolveResult, IlpError> {
    validate(lp)?;
    let start = Instant::now();
    let bounds = integer_bounds(lp)?;
    let mut size: u128 = 1;
    for &(l, h) in &bounds {
        if l > h {
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                x: Vec::new(),
                objective: None,
                z: None,
                node_count: 0,
                wall_time: start.elapsed(),
            });
        }
        size = size.saturating_mul((h - l + 1) as u128);
        if size > ENUMERATION_LIMIT {
            return Err(IlpError::DomainTooLarge {
                size,
                limit: ENUMERATION_LIMIT,
            });
        }
    }

    let mut best: Option<(Vec<BigRational>, BigRational)> = None;
    let mut count = 0u64;
    let mut assignment: Vec<i64> = bounds.iter().map(|&(l, _)| l).collect();
    loop {
        count += 1;
        match evaluate_candidate(lp, &assignment) {
            CandidateEval::Feasible { x, objective } => {
                if best.as_ref().is_none_or(|(_, b)| objective < *b) {
                    best = Some((x, objective));
                }
            }
            CandidateEval::Unbounded => {
                return Ok(SolveResult {
                    status: SolveStatus::Unbounded,
                    x: Vec::new(),
                    objective: None,
                    z: None,
                    node_count: count,
                    wall_time: start.elapsed(),
                });
            }
            CandidateEval::Infeasible => {}
        }
        // Odometer step, last variable fastest.
        let mut k = bounds.len();
        loop {
            if k == 0 {
                let (status, x, objective) = match best {
                    Some((x, o)) => (SolveStatus::Optimal, x, Some(o)),
                    None => (SolveStatus::Infeasible, Vec::new(), None),
                };
                return Ok(SolveResult {
                    status,
                    x,
                    objective,
                    z: None,
                    node_count: count,
                    wall_time: start.elapsed(),
                });
            }
            k -= 1;
            if assignment[k] < bounds[k].1 {
                assignment[k] += 1;
                break;
            }
            assignment[k] = bounds[k].0;
        }
    }
}

/// Optimal value of a single objective of a multiobjective instance over its
/// feasible set, as one exact ILP solve. Used for the ideal point (`Min`)
/// and the nadir upper bound (`Max`).
pub fn optimize_single_objective(
    inst: &ProblemInstance,
    objective: usize,
    sense: Sense,
) -> Result<SolveResult, IlpError> {
    assert!(objective < inst.p, "objective index out of range");
    let coeffs: Vec<BigRational> = inst.objectives[objective]
        .iter()
        .map(|&c| rational(if sense == Sense::Max { -c } else { c }))
        .collect();
    let lp = inst.to_lp_with_objective(coeffs, BigRational::zero());
    let mut res = solve(&lp, None)?;
    if sense == Sense::Max {
        res.objective = res.objective.map(|o| -o);
    }
    Ok(res)
}

/// Root LP relaxation value as seen by the branch-and-bound; test hook for
/// the bound-validity invariant.
#[cfg(test)]
pub(crate) fn root_relaxation_value(lp: &LinearProgram) -> Option<f64> {
    validate(lp).ok()?;
    let cache = F64Cache::new(lp);
    let bounds = integer_bounds(lp).ok()?;
    match cache.relax(&bounds) {
        Ok(LpOutcome::Optimal { value, .. }) => Some(value),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_var() -> Variable {
        Variable {
            lower: rational(0),
            upper: Some(rational(1)),
            integer: true,
        }
    }

    fn knapsack_toy() -> LinearProgram {
        // min -3 x1 - 4 x2  s.t. x1 + x2 <= 1, x binary.
        LinearProgram {
            objective: vec![rational(-3), rational(-4)],
            offset: BigRational::zero(),
            constraints: vec![LinearConstraint {
                coeffs: vec![rational(1), rational(1)],
                relation: Relation::Le,
                rhs: rational(1),
            }],
            variables: vec![binary_var(), binary_var()],
        }
    }

    #[test]
    fn knapsack_toy_solves() {
        let lp = knapsack_toy();
        let res = solve(&lp, None).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, Some(rational(-4)));
        assert_eq!(res.integer_assignment(&lp), vec![0, 1]);

        let oracle = solve_exhaustive(&lp).unwrap();
        assert_eq!(oracle.status, SolveStatus::Optimal);
        assert_eq!(oracle.objective, Some(rational(-4)));
    }

    #[test]
    fn contradictory_bounds_infeasible() {
        let lp = LinearProgram {
            objective: vec![BigRational::zero()],
            offset: BigRational::zero(),
            constraints: vec![LinearConstraint {
                coeffs: vec![rational(1)],
                relation: Relation::Ge,
                rhs: rational(2),
            }],
            variables: vec![binary_var()],
        };
        assert_eq!(solve(&lp, None).unwrap().status, SolveStatus::Infeasible);
        assert_eq!(
            solve_exhaustive(&lp).unwrap().status,
            SolveStatus::Infeasible
        );
    }

    #[test]
    fn unconstrained_binary_minimum() {
        let lp = LinearProgram {
            objective: vec![rational(1)],
            offset: BigRational::zero(),
            constraints: vec![],
            variables: vec![binary_var()],
        };
        let res = solve(&lp, None).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, Some(rational(0)));
    }

    #[test]
    fn all_zero_objective_any_feasible() {
        let lp = LinearProgram {
            objective: vec![BigRational::zero(), BigRational::zero()],
            offset: BigRational::zero(),
            constraints: vec![],
            variables: vec![binary_var(), binary_var()],
        };
        let res = solve_exhaustive(&lp).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, Some(rational(0)));
    }

    #[test]
    fn budget_zero_reports_exceeded() {
        let res = solve(&knapsack_toy(), Some(Duration::ZERO)).unwrap();
        assert_eq!(res.status, SolveStatus::BudgetExceeded);
    }

    #[test]
    fn continuous_aux_variable_implied() {
        // min t  s.t. 2 x - t <= 1, x - t <= 0, x binary: at x=1 the rows
        // force t >= 1; at x=0, t >= 0. Optimum t = 0 at x = 0.
        let lp = LinearProgram {
            objective: vec![BigRational::zero(), rational(1)],
            offset: BigRational::zero(),
            constraints: vec![
                LinearConstraint {
                    coeffs: vec![rational(2), rational(-1)],
                    relation: Relation::Le,
                    rhs: rational(1),
                },
                LinearConstraint {
                    coeffs: vec![rational(1), rational(-1)],
                    relation: Relation::Le,
                    rhs: rational(0),
                },
            ],
            variables: vec![
                binary_var(),
                Variable {
                    lower: rational(0),
                    upper: None,
                    integer: false,
                },
            ],
        };
        let res = solve(&lp, None).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, Some(rational(0)));
        let oracle = solve_exhaustive(&lp).unwrap();
        assert_eq!(oracle.objective, Some(rational(0)));
    }

    #[test]
    fn rejects_two_continuous_variables() {
        let lp = LinearProgram {
            objective: vec![rational(1), rational(1)],
            offset: BigRational::zero(),
            constraints: vec![],
            variables: vec![
                Variable {
                    lower: rational(0),
                    upper: None,
                    integer: false,
                },
                Variable {
                    lower: rational(0),
                    upper: None,
                    integer: false,
                },
            ],
        };
        assert!(matches!(solve(&lp, None), Err(IlpError::Invalid(_))));
    }

    fn random_small_lp(seed: u64) -> LinearProgram {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |lo: i64, hi: i64| lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64;
        let n = 3 + (draw(0, 9)) as usize; // 3..=12 binaries
        let m = 1 + (draw(0, 2)) as usize;
        let objective = (0..n).map(|_| rational(draw(-9, 9))).collect();
        let constraints = (0..m)
            .map(|_| {
                let coeffs: Vec<i64> = (0..n).map(|_| draw(-4, 8)).collect();
                let pos: i64 = coeffs.iter().filter(|&&c| c > 0).sum();
                LinearConstraint {
                    coeffs: coeffs.into_iter().map(rational).collect(),
                    relation: Relation::Le,
                    rhs: rational(pos / 2),
                }
            })
            .collect();
        LinearProgram {
            objective,
            offset: BigRational::zero(),
            constraints,
            variables: (0..n).map(|_| binary_var()).collect(),
        }
    }

    #[test]
    fn oracle_equivalence_on_random_instances() {
        for seed in 0..40 {
            let lp = random_small_lp(seed);
            let a = solve(&lp, None).unwrap();
            let b = solve_exhaustive(&lp).unwrap();
            assert_eq!(a.status, b.status, "seed {seed}");
            assert_eq!(a.objective, b.objective, "seed {seed}");
        }
    }

    /// General bounded-integer domains with mixed relations, not just
    /// binaries.
    fn random_bounded_lp(seed: u64) -> LinearProgram {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |lo: i64, hi: i64| lo + (rng.next_u64() % (hi - lo + 1) as u64) as i64;
        let n = 2 + draw(0, 3) as usize; // 2..=5 variables
        let domains: Vec<(i64, i64)> = (0..n)
            .map(|_| {
                let lo = draw(-3, 2);
                (lo, lo + draw(1, 4))
            })
            .collect();
        let m = 1 + draw(0, 2) as usize;
        let objective = (0..n).map(|_| rational(draw(-9, 9))).collect();
        let constraints = (0..m)
            .map(|_| {
                let coeffs: Vec<i64> = (0..n).map(|_| draw(-5, 5)).collect();
                let relation = match draw(0, 2) {
                    0 => Relation::Le,
                    1 => Relation::Ge,
                    _ => Relation::Eq,
                };
                LinearConstraint {
                    coeffs: coeffs.into_iter().map(rational).collect(),
                    relation,
                    rhs: rational(draw(-6, 10)),
                }
            })
            .collect();
        LinearProgram {
            objective,
            offset: rational(draw(-5, 5)),
            constraints,
            variables: domains
                .into_iter()
                .map(|(lo, hi)| Variable {
                    lower: rational(lo),
                    upper: Some(rational(hi)),
                    integer: true,
                })
                .collect(),
        }
    }

    #[test]
    fn oracle_equivalence_on_bounded_integer_domains() {
        let mut infeasible = 0;
        for seed in 100..180 {
            let lp = random_bounded_lp(seed);
            let a = solve(&lp, None).unwrap();
            let b = solve_exhaustive(&lp).unwrap();
            assert_eq!(a.status, b.status, "seed {seed}");
            assert_eq!(a.objective, b.objective, "seed {seed}");
            if a.status == SolveStatus::Infeasible {
                infeasible += 1;
            } else {
                // The reported solution must satisfy the program exactly.
                let x = a.integer_assignment(&lp);
                match evaluate_candidate(&lp, &x) {
                    CandidateEval::Feasible { objective, .. } => {
                        assert_eq!(Some(objective), a.objective, "seed {seed}")
                    }
                    _ => panic!("seed {seed}: reported solution is infeasible"),
                }
            }
        }
        // The draw mix must exercise both outcomes.
        assert!(infeasible > 0 && infeasible < 80);
    }

    #[test]
    fn relaxation_bound_below_integer_optimum() {
        for seed in 0..20 {
            let lp = random_small_lp(seed);
            let integer = solve(&lp, None).unwrap();
            if integer.status == SolveStatus::Optimal {
                let bound = root_relaxation_value(&lp).unwrap();
                let opt = integer.objective_f64().unwrap();
                assert!(bound <= opt + 1e-7, "seed {seed}: {bound} > {opt}");
            }
        }
    }

    #[test]
    fn deterministic_node_counts() {
        let lp = random_small_lp(7);
        let a = solve(&lp, None).unwrap();
        let b = solve(&lp, None).unwrap();
        assert_eq!(a.node_count, b.node_count);
        assert_eq!(a.x, b.x);
        assert_eq!(a.objective, b.objective);
    }
}
