//! Multiobjective problem instances: the model, benchmark generators for the
//! knapsack (KP), assignment (AP) and integer-linear-programming (ILP)
//! classes, JSON persistence for instances and fronts, ideal/nadir-bound
//! computation, and the brute-force Pareto oracle.

mod generate;

use std::io::{Read, Write};
use std::path::Path;

use num::{BigRational, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::ilp::{
    self, IlpError, LinearConstraint, LinearProgram, Relation, Sense, SolveStatus, Variable,
};

pub use generate::generate;

pub const FILE_FORMAT: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemClass {
    #[serde(rename = "KP")]
    Kp,
    #[serde(rename = "AP")]
    Ap,
    #[serde(rename = "ILP")]
    Ilp,
}

impl std::fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemClass::Kp => "KP",
            ProblemClass::Ap => "AP",
            ProblemClass::Ilp => "ILP",
        })
    }
}

impl std::str::FromStr for ProblemClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "KP" => Ok(ProblemClass::Kp),
            "AP" => Ok(ProblemClass::Ap),
            "ILP" => Ok(ProblemClass::Ilp),
            other => Err(format!("unknown problem class {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntConstraint {
    pub coeffs: Vec<i64>,
    pub relation: Relation,
    pub rhs: i64,
}

/// An integer-coefficient multiobjective linear program over bounded integer
/// variables, always stored in minimization form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    pub name: String,
    pub class: ProblemClass,
    /// Number of objectives.
    pub p: usize,
    /// Number of variables.
    pub n: usize,
    /// p x n objective coefficient rows.
    pub objectives: Vec<Vec<i64>>,
    pub constraints: Vec<IntConstraint>,
    /// Inclusive per-variable (lo, hi) bounds.
    pub domains: Vec<(i64, i64)>,
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("instance {0} has an empty feasible set")]
    Infeasible(String),
    #[error("feasible set too large to enumerate: {size} > {limit}")]
    DomainTooLarge { size: u128, limit: u128 },
    #[error("solver failure: {0}")]
    Solver(#[from] IlpError),
}

const ENUMERATION_LIMIT: u128 = 1 << 24;

impl ProblemInstance {
    /// Shape and range checks that do not require solving anything.
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.p < 2 {
            return Err(ProblemError::Invalid(format!(
                "p = {} but at least 2 objectives are required",
                self.p
            )));
        }
        if self.n == 0 {
            return Err(ProblemError::Invalid("instance has no variables".into()));
        }
        if self.objectives.len() != self.p {
            return Err(ProblemError::Invalid(format!(
                "expected {} objective rows, found {}",
                self.p,
                self.objectives.len()
            )));
        }
        for (i, row) in self.objectives.iter().enumerate() {
            if row.len() != self.n {
                return Err(ProblemError::Invalid(format!(
                    "objective row {i} has length {} != n = {}",
                    row.len(),
                    self.n
                )));
            }
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.n {
                return Err(ProblemError::Invalid(format!(
                    "constraint {k} has length {} != n = {}",
                    c.coeffs.len(),
                    self.n
                )));
            }
        }
        if self.domains.len() != self.n {
            return Err(ProblemError::Invalid(format!(
                "expected {} domains, found {}",
                self.n,
                self.domains.len()
            )));
        }
        for (j, &(lo, hi)) in self.domains.iter().enumerate() {
            if lo > hi {
                return Err(ProblemError::Invalid(format!(
                    "variable {j} has empty domain [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// One ILP feasibility solve; rejects instances with an empty feasible
    /// set at load time.
    pub fn check_feasible(&self) -> Result<(), ProblemError> {
        let lp = self.to_lp_with_objective(vec![BigRational::zero(); self.n], BigRational::zero());
        let res = ilp::solve(&lp, None)?;
        match res.status {
            SolveStatus::Optimal => Ok(()),
            SolveStatus::Infeasible => Err(ProblemError::Infeasible(self.name.clone())),
            other => Err(ProblemError::Invalid(format!(
                "feasibility solve returned {other:?}"
            ))),
        }
    }

    /// Objective-space image of an assignment.
    pub fn evaluate(&self, x: &[i64]) -> Point {
        assert_eq!(x.len(), self.n, "assignment length mismatch");
        let coords = self
            .objectives
            .iter()
            .map(|row| {
                let v: i128 = row
                    .iter()
                    .zip(x)
                    .map(|(&c, &xi)| c as i128 * xi as i128)
                    .sum();
                i64::try_from(v).expect("objective value out of i64 range")
            })
            .collect();
        Point(coords)
    }

    pub fn is_feasible(&self, x: &[i64]) -> bool {
        assert_eq!(x.len(), self.n, "assignment length mismatch");
        if x.iter()
            .zip(&self.domains)
            .any(|(&xi, &(lo, hi))| xi < lo || xi > hi)
        {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: i128 = c
                .coeffs
                .iter()
                .zip(x)
                .map(|(&a, &xi)| a as i128 * xi as i128)
                .sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs as i128,
                Relation::Eq => lhs == c.rhs as i128,
                Relation::Ge => lhs >= c.rhs as i128,
            }
        })
    }

    /// The single-objective ILP over this instance's feasible set with the
    /// given rational objective.
    pub fn to_lp_with_objective(
        &self,
        objective: Vec<BigRational>,
        offset: BigRational,
    ) -> LinearProgram {
        LinearProgram {
            objective,
            offset,
            constraints: self
                .constraints
                .iter()
                .map(|c| LinearConstraint {
                    coeffs: c.coeffs.iter().map(|&a| ilp::rational(a)).collect(),
                    relation: c.relation,
                    rhs: ilp::rational(c.rhs),
                })
                .collect(),
            variables: self
                .domains
                .iter()
                .map(|&(lo, hi)| Variable {
                    lower: ilp::rational(lo),
                    upper: Some(ilp::rational(hi)),
                    integer: true,
                })
                .collect(),
        }
    }

    /// Number of integer assignments in the domain grid.
    pub fn domain_size(&self) -> u128 {
        self.domains.iter().fold(1u128, |acc, &(lo, hi)| {
            acc.saturating_mul((hi - lo + 1) as u128)
        })
    }
}

fn integral_objective(res: &ilp::SolveResult) -> Result<i64, ProblemError> {
    let obj = res
        .objective
        .as_ref()
        .ok_or_else(|| ProblemError::Invalid("solve returned no objective".into()))?;
    if !obj.is_integer() {
        return Err(ProblemError::Invalid(format!(
            "expected integral objective, got {obj}"
        )));
    }
    obj.to_integer()
        .to_i64()
        .ok_or_else(|| ProblemError::Invalid("objective out of i64 range".into()))
}

fn optimize_each(inst: &ProblemInstance, sense: Sense) -> Result<Point, ProblemError> {
    let mut coords = Vec::with_capacity(inst.p);
    for i in 0..inst.p {
        let res = ilp::optimize_single_objective(inst, i, sense)?;
        match res.status {
            SolveStatus::Optimal => coords.push(integral_objective(&res)?),
            SolveStatus::Infeasible => return Err(ProblemError::Infeasible(inst.name.clone())),
            other => {
                return Err(ProblemError::Invalid(format!(
                    "objective solve returned {other:?}"
                )))
            }
        }
    }
    Ok(Point(coords))
}

/// Componentwise minimum of each objective over the feasible set (`p` exact
/// ILP solves).
pub fn ideal_point(inst: &ProblemInstance) -> Result<Point, ProblemError> {
    optimize_each(inst, Sense::Min)
}

/// Componentwise maximum of each objective over the whole feasible set (not
/// just the efficient set); a valid upper bound of the nadir point.
pub fn nadir_upper_bound(inst: &ProblemInstance) -> Result<Point, ProblemError> {
    optimize_each(inst, Sense::Max)
}

/// A complete Pareto front with one anti-image per point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontFile {
    pub name: String,
    pub p: usize,
    pub points: Vec<Point>,
    pub solutions: Option<Vec<Vec<i64>>>,
}

impl FrontFile {
    /// Builds a front in canonical (lexicographic) point order, validating
    /// that the points are distinct and mutually nondominated.
    pub fn new(
        name: String,
        p: usize,
        points: Vec<Point>,
        solutions: Option<Vec<Vec<i64>>>,
    ) -> Result<Self, ProblemError> {
        if let Some(sols) = &solutions {
            if sols.len() != points.len() {
                return Err(ProblemError::Invalid(
                    "solutions/points length mismatch".into(),
                ));
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].cmp(&points[b]));
        let points: Vec<Point> = order.iter().map(|&i| points[i].clone()).collect();
        let solutions = solutions.map(|sols| order.iter().map(|&i| sols[i].clone()).collect());
        let front = FrontFile {
            name,
            p,
            points,
            solutions,
        };
        front.validate()?;
        Ok(front)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        for z in &self.points {
            if z.dim() != self.p {
                return Err(ProblemError::Invalid(format!(
                    "front point {z} has dimension != {}",
                    self.p
                )));
            }
        }
        for i in 0..self.points.len() {
            for j in 0..self.points.len() {
                if i != j && self.points[i].weakly_dominates(&self.points[j]) {
                    return Err(ProblemError::Invalid(format!(
                        "front points {} and {} are not mutually nondominated",
                        self.points[i], self.points[j]
                    )));
                }
            }
        }
        if let Some(sols) = &self.solutions {
            if sols.len() != self.points.len() {
                return Err(ProblemError::Invalid(
                    "solutions/points length mismatch".into(),
                ));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON persistence.

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    format: u32,
    name: String,
    class: ProblemClass,
    p: usize,
    n: usize,
    sense: String,
    objectives: Vec<Vec<i64>>,
    constraints: Vec<ConstraintRecord>,
    domains: Vec<DomainRecord>,
}

#[derive(Serialize, Deserialize)]
struct ConstraintRecord {
    coeffs: Vec<i64>,
    rel: Relation,
    rhs: i64,
}

#[derive(Serialize, Deserialize)]
struct DomainRecord {
    lo: i64,
    hi: i64,
}

#[derive(Serialize, Deserialize)]
struct FrontRecord {
    format: u32,
    name: String,
    p: usize,
    points: Vec<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solutions: Option<Vec<Vec<i64>>>,
}

pub fn write_instance<W: Write>(inst: &ProblemInstance, mut w: W) -> Result<(), ProblemError> {
    let file = InstanceFile {
        format: FILE_FORMAT,
        name: inst.name.clone(),
        class: inst.class,
        p: inst.p,
        n: inst.n,
        sense: "min".into(),
        objectives: inst.objectives.clone(),
        constraints: inst
            .constraints
            .iter()
            .map(|c| ConstraintRecord {
                coeffs: c.coeffs.clone(),
                rel: c.relation,
                rhs: c.rhs,
            })
            .collect(),
        domains: inst
            .domains
            .iter()
            .map(|&(lo, hi)| DomainRecord { lo, hi })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut w, &file).map_err(|e| ProblemError::Schema(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

pub fn parse_instance<R: Read>(r: R) -> Result<ProblemInstance, ProblemError> {
    let file: InstanceFile =
        serde_json::from_reader(r).map_err(|e| ProblemError::Schema(e.to_string()))?;
    if file.format != FILE_FORMAT {
        return Err(ProblemError::Schema(format!(
            "unsupported format {}",
            file.format
        )));
    }
    if file.sense != "min" {
        return Err(ProblemError::Schema(format!(
            "unsupported sense {:?}",
            file.sense
        )));
    }
    let inst = ProblemInstance {
        name: file.name,
        class: file.class,
        p: file.p,
        n: file.n,
        objectives: file.objectives,
        constraints: file
            .constraints
            .into_iter()
            .map(|c| IntConstraint {
                coeffs: c.coeffs,
                relation: c.rel,
                rhs: c.rhs,
            })
            .collect(),
        domains: file.domains.into_iter().map(|d| (d.lo, d.hi)).collect(),
    };
    inst.validate()?;
    Ok(inst)
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance, ProblemError> {
    let file = std::fs::File::open(path)?;
    parse_instance(std::io::BufReader::new(file))
}

pub fn save_instance(inst: &ProblemInstance, path: &Path) -> Result<(), ProblemError> {
    let file = std::fs::File::create(path)?;
    write_instance(inst, std::io::BufWriter::new(file))
}

pub fn write_front<W: Write>(front: &FrontFile, mut w: W) -> Result<(), ProblemError> {
    let record = FrontRecord {
        format: FILE_FORMAT,
        name: front.name.clone(),
        p: front.p,
        points: front.points.clone(),
        solutions: front.solutions.clone(),
    };
    serde_json::to_writer_pretty(&mut w, &record)
        .map_err(|e| ProblemError::Schema(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

pub fn parse_front<R: Read>(r: R) -> Result<FrontFile, ProblemError> {
    let record: FrontRecord =
        serde_json::from_reader(r).map_err(|e| ProblemError::Schema(e.to_string()))?;
    if record.format != FILE_FORMAT {
        return Err(ProblemError::Schema(format!(
            "unsupported format {}",
            record.format
        )));
    }
    let front = FrontFile {
        name: record.name,
        p: record.p,
        points: record.points,
        solutions: record.solutions,
    };
    front.validate()?;
    Ok(front)
}

pub fn load_front(path: &Path) -> Result<FrontFile, ProblemError> {
    let file = std::fs::File::open(path)?;
    parse_front(std::io::BufReader::new(file))
}

pub fn save_front(front: &FrontFile, path: &Path) -> Result<(), ProblemError> {
    let file = std::fs::File::create(path)?;
    write_front(front, std::io::BufWriter::new(file))
}

// ---------------------------------------------------------------------------
// Brute-force oracle.

struct Enumerator<'a> {
    inst: &'a ProblemInstance,
    /// Per constraint, the minimum and maximum achievable contribution of the
    /// variables from depth d onward; used for exact bound pruning.
    min_rem: Vec<Vec<i128>>,
    max_rem: Vec<Vec<i128>>,
    row_partial: Vec<i128>,
    obj_partial: Vec<i128>,
    assignment: Vec<i64>,
    kept: Vec<Point>,
    kept_x: Vec<Vec<i64>>,
}

impl<'a> Enumerator<'a> {
    fn new(inst: &'a ProblemInstance) -> Self {
        let n = inst.n;
        let mut min_rem = Vec::with_capacity(inst.constraints.len());
        let mut max_rem = Vec::with_capacity(inst.constraints.len());
        for c in &inst.constraints {
            let mut mins = vec![0i128; n + 1];
            let mut maxs = vec![0i128; n + 1];
            for d in (0..n).rev() {
                let (lo, hi) = inst.domains[d];
                let a = c.coeffs[d] as i128;
                let (vmin, vmax) = if a >= 0 {
                    (a * lo as i128, a * hi as i128)
                } else {
                    (a * hi as i128, a * lo as i128)
                };
                mins[d] = mins[d + 1] + vmin;
                maxs[d] = maxs[d + 1] + vmax;
            }
            min_rem.push(mins);
            max_rem.push(maxs);
        }
        Enumerator {
            inst,
            min_rem,
            max_rem,
            row_partial: vec![0; inst.constraints.len()],
            obj_partial: vec![0; inst.p],
            assignment: vec![0; n],
            kept: Vec::new(),
            kept_x: Vec::new(),
        }
    }

    fn prune(&self, depth: usize) -> bool {
        for (k, c) in self.inst.constraints.iter().enumerate() {
            let lo = self.row_partial[k] + self.min_rem[k][depth];
            let hi = self.row_partial[k] + self.max_rem[k][depth];
            let rhs = c.rhs as i128;
            let dead = match c.relation {
                Relation::Le => lo > rhs,
                Relation::Ge => hi < rhs,
                Relation::Eq => lo > rhs || hi < rhs,
            };
            if dead {
                return true;
            }
        }
        false
    }

    fn visit_leaf(&mut self) {
        let z = Point(
            self.obj_partial
                .iter()
                .map(|&v| i64::try_from(v).expect("objective out of i64 range"))
                .collect(),
        );
        // Streaming Pareto filter; first assignment reaching a surviving
        // vector is kept as its anti-image.
        if self.kept.iter().any(|k| k.weakly_dominates(&z)) {
            return;
        }
        let mut i = 0;
        while i < self.kept.len() {
            if z.weakly_dominates(&self.kept[i]) {
                self.kept.swap_remove(i);
                self.kept_x.swap_remove(i);
            } else {
                i += 1;
            }
        }
        self.kept.push(z);
        self.kept_x.push(self.assignment.clone());
    }

    fn dfs(&mut self, depth: usize) {
        if self.prune(depth) {
            return;
        }
        if depth == self.inst.n {
            self.visit_leaf();
            return;
        }
        let (lo, hi) = self.inst.domains[depth];
        for v in lo..=hi {
            self.assignment[depth] = v;
            for (k, c) in self.inst.constraints.iter().enumerate() {
                self.row_partial[k] += c.coeffs[depth] as i128 * v as i128;
            }
            for (i, row) in self.inst.objectives.iter().enumerate() {
                self.obj_partial[i] += row[depth] as i128 * v as i128;
            }
            self.dfs(depth + 1);
            for (k, c) in self.inst.constraints.iter().enumerate() {
                self.row_partial[k] -= c.coeffs[depth] as i128 * v as i128;
            }
            for (i, row) in self.inst.objectives.iter().enumerate() {
                self.obj_partial[i] -= row[depth] as i128 * v as i128;
            }
        }
    }
}

/// Exact Pareto front by full enumeration of the domain grid, with one
/// anti-image per point (the first feasible assignment reaching it in
/// lexicographic order). The grid is capped at 2^24 assignments.
pub fn brute_force_front(inst: &ProblemInstance) -> Result<FrontFile, ProblemError> {
    inst.validate()?;
    let size = inst.domain_size();
    if size > ENUMERATION_LIMIT {
        return Err(ProblemError::DomainTooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut en = Enumerator::new(inst);
    en.dfs(0);
    if en.kept.is_empty() {
        return Err(ProblemError::Infeasible(inst.name.clone()));
    }
    FrontFile::new(inst.name.clone(), inst.p, en.kept, Some(en.kept_x))
}
