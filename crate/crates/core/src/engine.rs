//! The anytime search loops.
//!
//! `run_tpa` alternates the search direction over `p` priority queues of
//! boxes, scalarizes each selected box, and partitions every box that still
//! contains a newly found point into disjoint children, merging redundant
//! same-direction boxes via join boxes. `run_fullsplit` is the baseline:
//! one pool of ideal-anchored zones, split overlappingly at each new point
//! and filtered by redundancy elimination. Both are exact: run to completion
//! they enumerate the whole Pareto front, and the archive is a set of
//! mutually nondominated points at every instant in between.

use std::io::{BufRead, Write};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::geometry::{
    full_p_split, join, p_partition, reduced_scaled, scaled, GeometryError, Point, ScalingBounds,
    SearchBox,
};
use crate::ilp::{self};
use crate::problems::{self, FrontFile, ProblemError, ProblemInstance};
use crate::tchebycheff::{build_program, interpret, BoxVerdict, ScalarizerConfig};

/// Stopping rule for a run. `Points(n)` stops once `n` points are in the
/// archive (the deterministic budget used for reproducible traces);
/// `Wall(d)` is checked once per outer iteration, before box selection, so
/// an in-flight ILP solve is never interrupted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Unlimited,
    Wall(Duration),
    Points(u64),
}

impl Budget {
    fn intime(&self, started: Instant, points: usize) -> bool {
        match self {
            Budget::Unlimited => true,
            Budget::Wall(d) => started.elapsed() < *d,
            Budget::Points(n) => (points as u64) < *n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ArchiveEntry {
    pub x: Vec<i64>,
    pub z: Point,
    pub found_at: Duration,
    pub solver_calls: u64,
}

/// The (solution, objective vector) pairs found so far. Entries are kept in
/// discovery order; insertion rejects any vector that repeats or disturbs
/// mutual nondominance, which the exact search guarantees never happens.
#[derive(Clone, Debug, Default)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.entries.iter().map(|e| &e.z)
    }

    fn push(
        &mut self,
        x: Vec<i64>,
        z: Point,
        found_at: Duration,
        solver_calls: u64,
    ) -> Result<(), EngineError> {
        for e in &self.entries {
            if e.z.weakly_dominates(&z) || z.weakly_dominates(&e.z) {
                return Err(EngineError::ArchiveViolation(format!(
                    "new point {z} conflicts with archived {}",
                    e.z
                )));
            }
        }
        self.entries.push(ArchiveEntry {
            x,
            z,
            found_at,
            solver_calls,
        });
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceKind {
    PointFound(Point),
    /// Payload is the discarded box's upper bound; absent on traces read
    /// back from CSV, which does not serialize it.
    BoxDiscarded(Option<Point>),
    Finished,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub elapsed: Duration,
    pub kind: TraceKind,
    pub solver_calls: u64,
    pub open_boxes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Finished,
    BudgetExhausted,
    /// Solver failure; the archive holds the points found before the abort.
    Aborted(String),
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub archive: ParetoArchive,
    pub trace: Vec<TraceEvent>,
    pub status: RunStatus,
    pub bounds: ScalingBounds,
    pub solver_calls: u64,
}

impl RunOutput {
    /// The archive as a front file (canonical order, with anti-images).
    pub fn front(&self, name: &str, p: usize) -> Result<FrontFile, ProblemError> {
        FrontFile::new(
            name.to_string(),
            p,
            self.archive.points().cloned().collect(),
            Some(self.archive.entries().iter().map(|e| e.x.clone()).collect()),
        )
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("archive invariant violated: {0}")]
    ArchiveViolation(String),
}

/// Per-iteration view handed to observers; used by tests to check the
/// selection, alternation and safety invariants without re-implementing the
/// loop.
#[derive(Clone, Debug)]
pub struct IterationSnapshot {
    /// Direction of the queue the box was selected from (box direction for
    /// the full-split pool).
    pub selected_direction: usize,
    /// Queue sizes at selection time (single entry for the full-split pool).
    pub queue_sizes: Vec<usize>,
    /// The new point when the solve succeeded.
    pub found: Option<Point>,
    /// Upper bounds of all open boxes per queue after the iteration.
    pub queues_after: Vec<Vec<Point>>,
    pub archive_len: usize,
}

pub type Observer<'a> = &'a mut dyn FnMut(&IterationSnapshot);

#[derive(Clone, Debug)]
struct QueueEntry {
    bx: SearchBox,
    seq: u64,
}

/// Preference order for box selection: highest priority first, ties broken
/// by lexicographically smallest upper bound, then insertion order.
fn better(a: &QueueEntry, b: &QueueEntry) -> std::cmp::Ordering {
    a.bx.priority
        .total_cmp(&b.bx.priority)
        .then_with(|| b.bx.upper.cmp(&a.bx.upper))
        .then_with(|| b.seq.cmp(&a.seq))
}

fn best_index(entries: &[QueueEntry]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, e) in entries.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) => {
                if better(e, &entries[b]) == std::cmp::Ordering::Greater {
                    best = Some(i);
                }
            }
        }
    }
    best
}

struct QueueSet {
    queues: Vec<Vec<QueueEntry>>,
    cursor: usize,
    seq: u64,
}

impl QueueSet {
    fn new(p: usize) -> Self {
        // The cursor starts so that the first advance lands on queue 0.
        QueueSet {
            queues: vec![Vec::new(); p],
            cursor: p - 1,
            seq: 0,
        }
    }

    fn push(&mut self, bx: SearchBox) {
        assert!(
            bx.priority.is_finite() && bx.priority >= 0.0,
            "bad priority"
        );
        self.seq += 1;
        let dir = bx.direction;
        self.queues[dir].push(QueueEntry { bx, seq: self.seq });
    }

    fn open_boxes(&self) -> usize {
        self.queues.iter().map(Vec::len).sum()
    }

    fn sizes(&self) -> Vec<usize> {
        self.queues.iter().map(Vec::len).collect()
    }

    fn uppers(&self) -> Vec<Vec<Point>> {
        self.queues
            .iter()
            .map(|q| q.iter().map(|e| e.bx.upper.clone()).collect())
            .collect()
    }

    /// Advance the direction cursor cyclically to the next non-empty queue
    /// and return that queue's best box without removing it.
    fn select_next_box(&mut self) -> Option<(usize, usize)> {
        if self.open_boxes() == 0 {
            return None;
        }
        let p = self.queues.len();
        self.cursor = (self.cursor + 1) % p;
        while self.queues[self.cursor].is_empty() {
            self.cursor = (self.cursor + 1) % p;
        }
        Some((self.cursor, best_index(&self.queues[self.cursor])?))
    }

    /// Split every box that still contains `z` into its non-empty partition
    /// children (phase 1), then merge comparable same-direction boxes until
    /// no pair is left (phase 2).
    fn update(&mut self, z: &Point, sb: &ScalingBounds) {
        let mut parents = Vec::new();
        for q in self.queues.iter_mut() {
            let mut i = 0;
            while i < q.len() {
                if z.strictly_below(&q[i].bx.upper) {
                    parents.push(q.remove(i));
                } else {
                    i += 1;
                }
            }
        }
        for parent in &parents {
            for mut child in p_partition(&parent.bx, z) {
                child.priority = reduced_scaled(&parent.bx, child.direction, z, sb);
                self.push(child);
            }
        }
        for dir in 0..self.queues.len() {
            self.join_fixpoint(dir, sb);
        }
    }

    /// Replace pairs `A, B` with `A.u <= B.u` by `join(A, B)` until a full
    /// scan finds no such pair. Each join shrinks the queue, so this ends.
    fn join_fixpoint(&mut self, dir: usize, sb: &ScalingBounds) {
        'scan: loop {
            let q = &self.queues[dir];
            for i in 0..q.len() {
                for j in i + 1..q.len() {
                    let (a, b) = if q[i].bx.upper.weakly_dominates(&q[j].bx.upper) {
                        (i, j)
                    } else if q[j].bx.upper.weakly_dominates(&q[i].bx.upper) {
                        (j, i)
                    } else {
                        continue;
                    };
                    let mut merged = join(&self.queues[dir][a].bx, &self.queues[dir][b].bx);
                    merged.priority = scaled(&merged, sb);
                    let q = &mut self.queues[dir];
                    q.remove(a.max(b));
                    q.remove(a.min(b));
                    self.push(merged);
                    continue 'scan;
                }
            }
            break;
        }
    }
}

/// Shared run preamble: reject malformed/degenerate instances, compute the
/// scaling bounds (2p exact ILP solves) and the scalarizer parameters.
fn prepare(
    inst: &ProblemInstance,
    solver_calls: &mut u64,
) -> Result<(ScalingBounds, ScalarizerConfig), EngineError> {
    inst.validate()?;
    let ideal = problems::ideal_point(inst)?;
    *solver_calls += inst.p as u64;
    let nadir = problems::nadir_upper_bound(inst)?;
    *solver_calls += inst.p as u64;
    let bounds = ScalingBounds::new(ideal, nadir)?;
    let cfg = ScalarizerConfig::new(inst.p, bounds.clone());
    Ok((bounds, cfg))
}

/// Upper bound of the initial search box. Boxes are half-open, but a
/// nondominated point can sit exactly on the nadir upper bound in some
/// coordinate (a lexicographic extreme pairs a best coordinate with a worst
/// one), so the root box must reach one unit past the bound to contain
/// every feasible image.
fn initial_upper(bounds: &ScalingBounds) -> Point {
    Point(
        bounds
            .nadir_bound
            .as_slice()
            .iter()
            .map(|v| v + 1)
            .collect(),
    )
}

enum SolveStep {
    Found { x: Vec<i64>, z: Point },
    NoPoint,
    Failed(String),
}

fn solve_box(
    inst: &ProblemInstance,
    upper: &Point,
    cfg: &ScalarizerConfig,
    sb: &ScalingBounds,
) -> SolveStep {
    let program = build_program(inst, upper, cfg);
    let mut res = match ilp::solve(&program.lp, None) {
        Ok(res) => res,
        Err(e) => return SolveStep::Failed(e.to_string()),
    };
    if res.status == ilp::SolveStatus::Optimal {
        let x = res.integer_assignment(&program.lp);
        res.z = Some(inst.evaluate(&x));
    }
    match interpret(&res, &program, sb) {
        Ok(BoxVerdict::FoundInBox { x, z }) => SolveStep::Found { x, z },
        Ok(BoxVerdict::NoPointInBox) => SolveStep::NoPoint,
        Err(e) => SolveStep::Failed(e.to_string()),
    }
}

/// The alternating-direction partition search. Runs until the box queues
/// are exhausted (complete front) or the budget expires.
pub fn run_tpa(inst: &ProblemInstance, budget: Budget) -> Result<RunOutput, EngineError> {
    run_tpa_inner(inst, budget, None)
}

pub fn run_tpa_observed(
    inst: &ProblemInstance,
    budget: Budget,
    observer: Observer<'_>,
) -> Result<RunOutput, EngineError> {
    run_tpa_inner(inst, budget, Some(observer))
}

fn run_tpa_inner(
    inst: &ProblemInstance,
    budget: Budget,
    mut observer: Option<Observer<'_>>,
) -> Result<RunOutput, EngineError> {
    let started = Instant::now();
    let mut solver_calls = 0u64;
    let (bounds, cfg) = prepare(inst, &mut solver_calls)?;

    let mut queues = QueueSet::new(inst.p);
    let mut initial = SearchBox::new(bounds.ideal.clone(), initial_upper(&bounds), 0, 0.0);
    initial.priority = scaled(&initial, &bounds);
    queues.push(initial);

    let mut archive = ParetoArchive::default();
    let mut trace = Vec::new();
    let status = loop {
        if queues.open_boxes() == 0 {
            trace.push(TraceEvent {
                elapsed: started.elapsed(),
                kind: TraceKind::Finished,
                solver_calls,
                open_boxes: 0,
            });
            break RunStatus::Finished;
        }
        if !budget.intime(started, archive.len()) {
            trace.push(TraceEvent {
                elapsed: started.elapsed(),
                kind: TraceKind::BudgetExhausted,
                solver_calls,
                open_boxes: queues.open_boxes(),
            });
            break RunStatus::BudgetExhausted;
        }
        let sizes = queues.sizes();
        let (qi, idx) = queues.select_next_box().expect("checked non-empty");
        let upper = queues.queues[qi][idx].bx.upper.clone();
        let step = solve_box(inst, &upper, &cfg, &bounds);
        solver_calls += 1;
        let found = match step {
            SolveStep::Found { x, z } => {
                archive.push(x, z.clone(), started.elapsed(), solver_calls)?;
                queues.update(&z, &bounds);
                trace.push(TraceEvent {
                    elapsed: started.elapsed(),
                    kind: TraceKind::PointFound(z.clone()),
                    solver_calls,
                    open_boxes: queues.open_boxes(),
                });
                Some(z)
            }
            SolveStep::NoPoint => {
                queues.queues[qi].remove(idx);
                trace.push(TraceEvent {
                    elapsed: started.elapsed(),
                    kind: TraceKind::BoxDiscarded(Some(upper)),
                    solver_calls,
                    open_boxes: queues.open_boxes(),
                });
                None
            }
            SolveStep::Failed(msg) => break RunStatus::Aborted(msg),
        };
        if let Some(obs) = observer.as_mut() {
            obs(&IterationSnapshot {
                selected_direction: qi,
                queue_sizes: sizes,
                found,
                queues_after: queues.uppers(),
                archive_len: archive.len(),
            });
        }
    };
    Ok(RunOutput {
        archive,
        trace,
        status,
        bounds,
        solver_calls,
    })
}

/// The full p-split baseline: a single pool of ideal-anchored zones ordered
/// by scaled volume, overlapping splits, and redundancy elimination.
pub fn run_fullsplit(inst: &ProblemInstance, budget: Budget) -> Result<RunOutput, EngineError> {
    run_fullsplit_inner(inst, budget, None)
}

pub fn run_fullsplit_observed(
    inst: &ProblemInstance,
    budget: Budget,
    observer: Observer<'_>,
) -> Result<RunOutput, EngineError> {
    run_fullsplit_inner(inst, budget, Some(observer))
}

fn update_fullsplit(pool: &mut Vec<QueueEntry>, z: &Point, sb: &ScalingBounds, seq: &mut u64) {
    let mut parents = Vec::new();
    let mut i = 0;
    while i < pool.len() {
        if z.strictly_below(&pool[i].bx.upper) {
            parents.push(pool.remove(i));
        } else {
            i += 1;
        }
    }
    for parent in &parents {
        for (dir, upper) in full_p_split(&parent.bx.upper, z).into_iter().enumerate() {
            if !sb.ideal.strictly_below(&upper) {
                continue; // zone empty relative to the ideal point
            }
            let mut bx = SearchBox::new(sb.ideal.clone(), upper, dir, 0.0);
            bx.priority = scaled(&bx, sb);
            *seq += 1;
            pool.push(QueueEntry { bx, seq: *seq });
        }
    }
    // Redundancy elimination: drop any zone whose upper bound is covered by
    // another's; exactly one survivor among equal bounds (the earliest).
    let uppers: Vec<Point> = pool.iter().map(|e| e.bx.upper.clone()).collect();
    let mut dead = vec![false; pool.len()];
    for i in 0..pool.len() {
        for j in 0..pool.len() {
            if i != j && uppers[i].weakly_dominates(&uppers[j]) && (uppers[i] != uppers[j] || j < i)
            {
                dead[i] = true;
                break;
            }
        }
    }
    let mut k = 0;
    pool.retain(|_| {
        let keep = !dead[k];
        k += 1;
        keep
    });
}

fn run_fullsplit_inner(
    inst: &ProblemInstance,
    budget: Budget,
    mut observer: Option<Observer<'_>>,
) -> Result<RunOutput, EngineError> {
    let started = Instant::now();
    let mut solver_calls = 0u64;
    let (bounds, cfg) = prepare(inst, &mut solver_calls)?;

    let mut pool: Vec<QueueEntry> = Vec::new();
    let mut seq = 0u64;
    let mut initial = SearchBox::new(bounds.ideal.clone(), initial_upper(&bounds), 0, 0.0);
    initial.priority = scaled(&initial, &bounds);
    seq += 1;
    pool.push(QueueEntry { bx: initial, seq });

    let mut archive = ParetoArchive::default();
    let mut trace = Vec::new();
    let status = loop {
        if pool.is_empty() {
            trace.push(TraceEvent {
                elapsed: started.elapsed(),
                kind: TraceKind::Finished,
                solver_calls,
                open_boxes: 0,
            });
            break RunStatus::Finished;
        }
        if !budget.intime(started, archive.len()) {
            trace.push(TraceEvent {
                elapsed: started.elapsed(),
                kind: TraceKind::BudgetExhausted,
                solver_calls,
                open_boxes: pool.len(),
            });
            break RunStatus::BudgetExhausted;
        }
        let pool_size = pool.len();
        let idx = best_index(&pool).expect("non-empty pool");
        let direction = pool[idx].bx.direction;
        let upper = pool[idx].bx.upper.clone();
        let step = solve_box(inst, &upper, &cfg, &bounds);
        solver_calls += 1;
        let found = match step {
            SolveStep::Found { x, z } => {
                archive.push(x, z.clone(), started.elapsed(), solver_calls)?;
                update_fullsplit(&mut pool, &z, &bounds, &mut seq);
                trace.push(TraceEvent {
                    elapsed: started.elapsed(),
                    kind: TraceKind::PointFound(z.clone()),
                    solver_calls,
                    open_boxes: pool.len(),
                });
                Some(z)
            }
            SolveStep::NoPoint => {
                pool.remove(idx);
                trace.push(TraceEvent {
                    elapsed: started.elapsed(),
                    kind: TraceKind::BoxDiscarded(Some(upper)),
                    solver_calls,
                    open_boxes: pool.len(),
                });
                None
            }
            SolveStep::Failed(msg) => break RunStatus::Aborted(msg),
        };
        if let Some(obs) = observer.as_mut() {
            obs(&IterationSnapshot {
                selected_direction: direction,
                queue_sizes: vec![pool_size],
                found,
                queues_after: vec![pool.iter().map(|e| e.bx.upper.clone()).collect()],
                archive_len: archive.len(),
            });
        }
    };
    Ok(RunOutput {
        archive,
        trace,
        status,
        bounds,
        solver_calls,
    })
}

// ---------------------------------------------------------------------------
// Trace stream persistence.

#[derive(Debug, Error)]
pub enum TraceFormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace format error at line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn event_name(kind: &TraceKind) -> &'static str {
    match kind {
        TraceKind::PointFound(_) => "point_found",
        TraceKind::BoxDiscarded(_) => "box_discarded",
        TraceKind::Finished => "finished",
        TraceKind::BudgetExhausted => "budget_exhausted",
    }
}

/// Write a trace as CSV with header `elapsed_ms,event,z_1..z_p,
/// solver_calls,open_boxes`. The z columns are filled for point events only.
/// Under `deterministic`, the elapsed cells are left empty so byte-identical
/// reruns produce byte-identical files.
pub fn write_trace_csv<W: Write>(
    mut w: W,
    p: usize,
    trace: &[TraceEvent],
    deterministic: bool,
) -> Result<(), TraceFormatError> {
    write!(w, "elapsed_ms,event")?;
    for i in 1..=p {
        write!(w, ",z_{i}")?;
    }
    writeln!(w, ",solver_calls,open_boxes")?;
    for ev in trace {
        if deterministic {
            write!(w, ",")?;
        } else {
            write!(w, "{:.3},", ev.elapsed.as_secs_f64() * 1e3)?;
        }
        write!(w, "{}", event_name(&ev.kind))?;
        for i in 0..p {
            match &ev.kind {
                TraceKind::PointFound(z) => write!(w, ",{}", z[i])?,
                _ => write!(w, ",")?,
            }
        }
        writeln!(w, ",{},{}", ev.solver_calls, ev.open_boxes)?;
    }
    Ok(())
}

/// Read back a trace CSV. Returns the number of objectives implied by the
/// header and the events; box-discard payloads are not serialized and come
/// back as `None`, and empty elapsed cells (deterministic traces) as zero.
pub fn parse_trace_csv<R: BufRead>(r: R) -> Result<(usize, Vec<TraceEvent>), TraceFormatError> {
    let mut lines = r.lines();
    let header = lines.next().ok_or(TraceFormatError::Malformed {
        line: 1,
        message: "empty trace".into(),
    })??;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    if cols.len() < 4 || cols[0] != "elapsed_ms" || cols[1] != "event" {
        return Err(TraceFormatError::Malformed {
            line: 1,
            message: "bad header".into(),
        });
    }
    let p = cols.len() - 4;
    for (i, c) in cols[2..2 + p].iter().enumerate() {
        if *c != format!("z_{}", i + 1) {
            return Err(TraceFormatError::Malformed {
                line: 1,
                message: "bad z columns".into(),
            });
        }
    }
    let mut events = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let line_id = lineno + 2;
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != p + 4 {
            return Err(TraceFormatError::Malformed {
                line: line_id,
                message: format!("expected {} fields, found {}", p + 4, fields.len()),
            });
        }
        let malformed = |message: String| TraceFormatError::Malformed {
            line: line_id,
            message,
        };
        let elapsed = if fields[0].is_empty() {
            Duration::ZERO
        } else {
            let ms: f64 = fields[0]
                .parse()
                .map_err(|_| malformed("bad elapsed".into()))?;
            Duration::from_secs_f64(ms / 1e3)
        };
        let kind = match fields[1] {
            "point_found" => {
                let coords = fields[2..2 + p]
                    .iter()
                    .map(|f| f.parse::<i64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| malformed("bad point coordinates".into()))?;
                TraceKind::PointFound(Point(coords))
            }
            "box_discarded" => TraceKind::BoxDiscarded(None),
            "finished" => TraceKind::Finished,
            "budget_exhausted" => TraceKind::BudgetExhausted,
            other => return Err(malformed(format!("unknown event {other:?}"))),
        };
        let solver_calls = fields[p + 2]
            .parse()
            .map_err(|_| malformed("bad solver_calls".into()))?;
        let open_boxes = fields[p + 3]
            .parse()
            .map_err(|_| malformed("bad open_boxes".into()))?;
        events.push(TraceEvent {
            elapsed,
            kind,
            solver_calls,
            open_boxes,
        });
    }
    Ok((p, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::Relation;
    use crate::problems::{generate, IntConstraint, ProblemClass};

    fn pt(coords: &[i64]) -> Point {
        Point(coords.to_vec())
    }

    fn bounds(ideal: &[i64], nadir: &[i64]) -> ScalingBounds {
        ScalingBounds::new(pt(ideal), pt(nadir)).unwrap()
    }

    fn entry(bx: SearchBox, seq: u64) -> QueueEntry {
        QueueEntry { bx, seq }
    }

    #[test]
    fn select_alternates_and_skips_empty_queues() {
        let sb = bounds(&[0, 0, 0], &[10, 10, 10]);
        let mut qs = QueueSet::new(3);
        let push_dir = |qs: &mut QueueSet, dir: usize| {
            let mut bx = SearchBox::new(pt(&[0, 0, 0]), pt(&[10, 10, 10]), dir, 0.0);
            bx.priority = scaled(&bx, &sb);
            qs.push(bx);
        };
        // Cursor just used queue 0; queue 1 is empty, queue 2 is not:
        // selection skips to queue 2.
        push_dir(&mut qs, 0);
        push_dir(&mut qs, 2);
        qs.cursor = 0;
        let (qi, _) = qs.select_next_box().unwrap();
        assert_eq!(qi, 2);
        // From the last queue the cursor wraps around to the first.
        let (qi, _) = qs.select_next_box().unwrap();
        assert_eq!(qi, 0);
        // A single non-empty queue keeps being selected.
        qs.queues[2].clear();
        let (qi, _) = qs.select_next_box().unwrap();
        assert_eq!(qi, 0);
        let (qi, _) = qs.select_next_box().unwrap();
        assert_eq!(qi, 0);
    }

    #[test]
    fn update_matches_partition_example() {
        let sb = bounds(&[0, 0, 0], &[20, 15, 10]);
        let mut qs = QueueSet::new(3);
        let mut initial = SearchBox::new(pt(&[0, 0, 0]), pt(&[20, 15, 10]), 0, 0.0);
        initial.priority = scaled(&initial, &sb);
        qs.push(initial);
        qs.update(&pt(&[5, 5, 5]), &sb);
        assert_eq!(qs.sizes(), vec![1, 1, 1]);
        assert_eq!(qs.queues[0][0].bx.lower, pt(&[0, 5, 5]));
        assert_eq!(qs.queues[0][0].bx.upper, pt(&[5, 15, 10]));
        assert_eq!(qs.queues[1][0].bx.lower, pt(&[0, 0, 5]));
        assert_eq!(qs.queues[1][0].bx.upper, pt(&[20, 5, 10]));
        assert_eq!(qs.queues[2][0].bx.lower, pt(&[0, 0, 0]));
        assert_eq!(qs.queues[2][0].bx.upper, pt(&[20, 15, 5]));
        assert_eq!(qs.queues[0][0].bx.priority, 1.0);
        assert_eq!(qs.queues[1][0].bx.priority, 1.0);
        assert_eq!(qs.queues[2][0].bx.priority, 1.0 - 125.0 / 3000.0);
    }

    #[test]
    fn update_joins_comparable_boxes() {
        let sb = bounds(&[0, 0], &[10, 10]);
        let mut qs = QueueSet::new(2);
        qs.queues[1].push(entry(SearchBox::new(pt(&[2, 3]), pt(&[5, 6]), 1, 0.1), 1));
        qs.queues[1].push(entry(SearchBox::new(pt(&[0, 4]), pt(&[7, 6]), 1, 0.1), 2));
        qs.join_fixpoint(1, &sb);
        assert_eq!(qs.queues[1].len(), 1);
        assert_eq!(qs.queues[1][0].bx.lower, pt(&[0, 3]));
        assert_eq!(qs.queues[1][0].bx.upper, pt(&[7, 6]));
        assert_eq!(
            qs.queues[1][0].bx.priority,
            scaled(&qs.queues[1][0].bx, &sb)
        );
    }

    #[test]
    fn update_without_affected_boxes_is_identity() {
        let sb = bounds(&[0, 0], &[10, 10]);
        let mut qs = QueueSet::new(2);
        let mut bx = SearchBox::new(pt(&[0, 0]), pt(&[4, 4]), 0, 0.0);
        bx.priority = scaled(&bx, &sb);
        qs.push(bx);
        qs.update(&pt(&[6, 2]), &sb);
        assert_eq!(qs.sizes(), vec![1, 0]);
        assert_eq!(qs.queues[0][0].bx.upper, pt(&[4, 4]));
    }

    #[test]
    fn fullsplit_update_matches_figure_and_dedupes() {
        let sb = bounds(&[0, 0, 0], &[20, 15, 10]);
        let mut pool = Vec::new();
        let mut seq = 0u64;
        let mut initial = SearchBox::new(pt(&[0, 0, 0]), pt(&[20, 15, 10]), 0, 0.0);
        initial.priority = scaled(&initial, &sb);
        seq += 1;
        pool.push(entry(initial, seq));
        update_fullsplit(&mut pool, &pt(&[5, 5, 5]), &sb, &mut seq);
        let uppers: Vec<Point> = pool.iter().map(|e| e.bx.upper.clone()).collect();
        assert_eq!(
            uppers,
            vec![pt(&[5, 15, 10]), pt(&[20, 5, 10]), pt(&[20, 15, 5])]
        );
        for e in &pool {
            assert_eq!(e.bx.lower, pt(&[0, 0, 0]));
        }

        // Duplicate upper bounds collapse to a single zone (z outside both,
        // so only the redundancy filter acts).
        let mut pool = vec![
            entry(SearchBox::new(pt(&[0, 0, 0]), pt(&[9, 9, 9]), 1, 0.5), 1),
            entry(SearchBox::new(pt(&[0, 0, 0]), pt(&[9, 9, 9]), 2, 0.5), 2),
        ];
        update_fullsplit(&mut pool, &pt(&[50, 1, 1]), &sb, &mut seq);
        assert_eq!(pool.len(), 1);
        assert_eq!(pool[0].seq, 1);
    }

    #[test]
    fn tie_breaking_prefers_lex_smallest_upper_then_insertion() {
        let a = entry(SearchBox::new(pt(&[0, 0]), pt(&[5, 9]), 0, 0.25), 1);
        let b = entry(SearchBox::new(pt(&[0, 0]), pt(&[5, 8]), 0, 0.25), 2);
        let c = entry(SearchBox::new(pt(&[0, 0]), pt(&[5, 8]), 0, 0.25), 3);
        assert_eq!(best_index(&[a.clone(), b.clone(), c.clone()]), Some(1));
        assert_eq!(best_index(&[a, c, b]), Some(2));
    }

    fn tiny_kp() -> ProblemInstance {
        ProblemInstance {
            name: "tiny".into(),
            class: ProblemClass::Kp,
            p: 2,
            n: 3,
            objectives: vec![vec![-4, -1, -3], vec![-2, -5, -1]],
            constraints: vec![IntConstraint {
                coeffs: vec![3, 4, 2],
                relation: Relation::Le,
                rhs: 5,
            }],
            domains: vec![(0, 1); 3],
        }
    }

    #[test]
    fn complete_runs_match_oracle_front() {
        let inst = tiny_kp();
        let oracle = crate::problems::brute_force_front(&inst).unwrap();
        for run in [
            run_tpa(&inst, Budget::Unlimited).unwrap(),
            run_fullsplit(&inst, Budget::Unlimited).unwrap(),
        ] {
            assert_eq!(run.status, RunStatus::Finished);
            let front = run.front("tiny", inst.p).unwrap();
            assert_eq!(front.points, oracle.points);
        }
    }

    #[test]
    fn zero_budget_yields_empty_archive() {
        let inst = tiny_kp();
        let run = run_tpa(&inst, Budget::Wall(Duration::ZERO)).unwrap();
        assert_eq!(run.status, RunStatus::BudgetExhausted);
        assert!(run.archive.is_empty());
        assert_eq!(run.trace.len(), 1);
        assert_eq!(run.trace[0].kind, TraceKind::BudgetExhausted);
    }

    #[test]
    fn point_budget_caps_found_points() {
        let inst = tiny_kp();
        let run = run_tpa(&inst, Budget::Points(1)).unwrap();
        assert_eq!(run.archive.len(), 1);
        let found = run
            .trace
            .iter()
            .filter(|e| matches!(e.kind, TraceKind::PointFound(_)))
            .count();
        assert_eq!(found, 1);
        assert_eq!(run.status, RunStatus::BudgetExhausted);
    }

    #[test]
    fn point_budget_applies_to_fullsplit_too() {
        let inst = tiny_kp();
        let oracle = crate::problems::brute_force_front(&inst).unwrap();
        let run = run_fullsplit(&inst, Budget::Points(2)).unwrap();
        assert_eq!(run.archive.len(), 2);
        assert_eq!(run.status, RunStatus::BudgetExhausted);
        for z in run.archive.points() {
            assert!(oracle.points.contains(z));
        }
    }

    #[test]
    fn single_point_front_discards_all_remaining_boxes() {
        let mut inst = tiny_kp();
        // Both objectives identical: |PF| = 1 but the ranges are not
        // degenerate, so the run proceeds and drains every residual box.
        inst.objectives[1] = inst.objectives[0].clone();
        let run = run_tpa(&inst, Budget::Unlimited).unwrap();
        assert_eq!(run.status, RunStatus::Finished);
        assert_eq!(run.archive.len(), 1);
    }

    #[test]
    fn degenerate_objective_rejected() {
        let inst = ProblemInstance {
            name: "deg".into(),
            class: ProblemClass::Ilp,
            p: 2,
            n: 1,
            objectives: vec![vec![0], vec![1]],
            constraints: vec![],
            domains: vec![(0, 3)],
        };
        assert!(matches!(
            run_tpa(&inst, Budget::Unlimited),
            Err(EngineError::Geometry(GeometryError::DegenerateObjective {
                index: 0,
                ..
            }))
        ));
    }

    #[test]
    fn deterministic_traces_under_point_budget() {
        let inst = generate(ProblemClass::Kp, 2, 8, None, 11).unwrap();
        let a = run_tpa(&inst, Budget::Points(3)).unwrap();
        let b = run_tpa(&inst, Budget::Points(3)).unwrap();
        let strip = |t: &[TraceEvent]| -> Vec<(TraceKind, u64, usize)> {
            t.iter()
                .map(|e| (e.kind.clone(), e.solver_calls, e.open_boxes))
                .collect()
        };
        assert_eq!(strip(&a.trace), strip(&b.trace));
    }

    #[test]
    fn trace_csv_round_trip() {
        let inst = tiny_kp();
        let run = run_tpa(&inst, Budget::Unlimited).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, inst.p, &run.trace, false).unwrap();
        let (p, events) = parse_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(p, inst.p);
        assert_eq!(events.len(), run.trace.len());
        for (parsed, original) in events.iter().zip(&run.trace) {
            match (&parsed.kind, &original.kind) {
                (TraceKind::PointFound(a), TraceKind::PointFound(b)) => assert_eq!(a, b),
                (TraceKind::BoxDiscarded(None), TraceKind::BoxDiscarded(Some(_))) => {}
                (a, b) => assert_eq!(a, b),
            }
            assert_eq!(parsed.solver_calls, original.solver_calls);
            assert_eq!(parsed.open_boxes, original.open_boxes);
        }

        // Deterministic mode blanks the elapsed column byte-stably.
        let mut det_a = Vec::new();
        let mut det_b = Vec::new();
        write_trace_csv(&mut det_a, inst.p, &run.trace, true).unwrap();
        write_trace_csv(&mut det_b, inst.p, &run.trace, true).unwrap();
        assert_eq!(det_a, det_b);
        let (_, parsed) = parse_trace_csv(det_a.as_slice()).unwrap();
        assert!(parsed.iter().all(|e| e.elapsed == Duration::ZERO));
    }
}
