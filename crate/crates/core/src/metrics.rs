//! Quality indicators for anytime performance evaluation: the fraction of
//! the front found (ONVGR), exact hypervolume and its ratio (HVR), the
//! general spread, and the additive epsilon indicator, plus cut-point
//! evaluation of run traces and the rank tables used to compare algorithms
//! per instance.

use std::time::Duration;

use itertools::Itertools;
use thiserror::Error;

use crate::engine::{TraceEvent, TraceKind};
use crate::geometry::Point;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("reference front is empty")]
    EmptyFront,
    #[error("front points must be mutually nondominated: {0} vs {1}")]
    DominatedFrontPoint(Point, Point),
    #[error("point {0} is not part of the reference front; archive and front disagree")]
    NotInFront(Point),
    #[error("{p} objectives exceed the factorial cap for lexicographic extremes (p <= 6)")]
    TooManyObjectives { p: usize },
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("reference front hypervolume is zero")]
    ZeroFrontVolume,
}

/// Everything the indicator formulas need about one instance: the complete
/// reference front, the reference point one unit above the nadir point, and
/// the images of the lexicographic optima.
#[derive(Clone, Debug)]
pub struct MetricContext {
    pub front: Vec<Point>,
    pub reference: Point,
    pub extremes: Vec<Point>,
}

impl MetricContext {
    pub fn new(front: Vec<Point>) -> Result<Self, MetricError> {
        if front.is_empty() {
            return Err(MetricError::EmptyFront);
        }
        let p = front[0].dim();
        if front.iter().any(|z| z.dim() != p) {
            return Err(MetricError::DimensionMismatch);
        }
        for a in &front {
            for b in &front {
                if !std::ptr::eq(a, b) && a.weakly_dominates(b) {
                    return Err(MetricError::DominatedFrontPoint(a.clone(), b.clone()));
                }
            }
        }
        // One unit above the nadir point, so every front point strictly
        // dominates the reference and extreme points carry hypervolume.
        let reference = Point(
            (0..p)
                .map(|i| front.iter().map(|z| z[i]).max().unwrap() + 1)
                .collect(),
        );
        let extremes = lexicographic_extremes(&front)?;
        Ok(MetricContext {
            front,
            reference,
            extremes,
        })
    }
}

/// Fraction of the complete front found. Exact algorithms only ever report
/// front members, so a point outside the front is an error, not a metric.
pub fn onvgr(n: &[Point], front: &[Point]) -> Result<f64, MetricError> {
    if front.is_empty() {
        return Err(MetricError::EmptyFront);
    }
    for z in n {
        if !front.contains(z) {
            return Err(MetricError::NotInFront(z.clone()));
        }
    }
    Ok(n.len() as f64 / front.len() as f64)
}

/// Exact lattice hypervolume of the union of boxes `[z, reference)` by
/// recursive dimension sweep. Integer inputs make the result an exact
/// integer count of unit cells.
pub fn hypervolume_exact(n: &[Point], reference: &Point) -> u128 {
    let pts: Vec<Vec<i64>> = n
        .iter()
        .filter(|z| {
            assert_eq!(z.dim(), reference.dim(), "dimension mismatch");
            let ok = z.strictly_below(reference);
            if !ok {
                log::warn!("hypervolume: clipping point {z} not below reference {reference}");
            }
            ok
        })
        .map(|z| z.0.clone())
        .collect();
    hv_sweep(pts, reference.as_slice())
}

fn hv_sweep(mut pts: Vec<Vec<i64>>, r: &[i64]) -> u128 {
    if pts.is_empty() {
        return 0;
    }
    let d = r.len();
    if d == 1 {
        let min = pts.iter().map(|z| z[0]).min().unwrap();
        return (r[0] - min) as u128;
    }
    pts.sort_by_key(|z| z[d - 1]);
    let mut total = 0u128;
    let mut i = 0;
    while i < pts.len() {
        let v = pts[i][d - 1];
        let mut j = i;
        while j < pts.len() && pts[j][d - 1] == v {
            j += 1;
        }
        let next = if j < pts.len() {
            pts[j][d - 1]
        } else {
            r[d - 1]
        };
        if next > v {
            let slice: Vec<Vec<i64>> = pts[..j].iter().map(|z| z[..d - 1].to_vec()).collect();
            total += (next - v) as u128 * hv_sweep(slice, &r[..d - 1]);
        }
        i = j;
    }
    total
}

pub fn hypervolume(n: &[Point], reference: &Point) -> f64 {
    hypervolume_exact(n, reference) as f64
}

/// Fraction of the complete front's hypervolume covered by `n`.
pub fn hvr(n: &[Point], front: &[Point], reference: &Point) -> Result<f64, MetricError> {
    if front.is_empty() {
        return Err(MetricError::EmptyFront);
    }
    let total = hypervolume_exact(front, reference);
    if total == 0 {
        return Err(MetricError::ZeroFrontVolume);
    }
    Ok(hypervolume_exact(n, reference) as f64 / total as f64)
}

/// Smallest factor by which `n` must be translated to weakly dominate the
/// front, with each objective scaled by its range in `n` (clamped to at
/// least one, which keeps the indicator finite for singleton sets).
/// Positive infinity for an empty `n`.
pub fn additive_epsilon(n: &[Point], front: &[Point]) -> f64 {
    if n.is_empty() {
        return f64::INFINITY;
    }
    let p = n[0].dim();
    let ranges: Vec<f64> = (0..p)
        .map(|i| {
            let min = n.iter().map(|z| z[i]).min().unwrap();
            let max = n.iter().map(|z| z[i]).max().unwrap();
            (max - min).max(1) as f64
        })
        .collect();
    front
        .iter()
        .map(|x| {
            n.iter()
                .map(|y| {
                    (0..p)
                        .map(|i| (y[i] - x[i]) as f64 / ranges[i])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn euclidean(a: &Point, b: &Point) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| {
            let d = (x - y) as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// General spread: deviation of nearest-neighbor distances plus the distance
/// from each lexicographic extreme to the set. Interior terms exclude the
/// point itself; extreme terms do not, so an extreme already found
/// contributes zero and every missing extreme adds a positive penalty.
/// Undefined (`None`) for fewer than two points.
pub fn general_spread(n: &[Point], extremes: &[Point]) -> Option<f64> {
    if n.len() < 2 {
        return None;
    }
    let nn: Vec<f64> = n
        .iter()
        .enumerate()
        .map(|(i, x)| {
            n.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, y)| euclidean(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nn.iter().sum::<f64>() / nn.len() as f64;
    let extreme_sum: f64 = extremes
        .iter()
        .map(|e| {
            n.iter()
                .map(|y| euclidean(e, y))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    let deviation: f64 = nn.iter().map(|d| (d - mean).abs()).sum();
    Some((extreme_sum + deviation) / (extreme_sum + n.len() as f64 * mean))
}

/// Images of the lexicographic optimal solutions: for each of the `p!`
/// objective permutations, the front point minimizing the reordered vector,
/// deduplicated. Capped at `p <= 6`.
pub fn lexicographic_extremes(front: &[Point]) -> Result<Vec<Point>, MetricError> {
    if front.is_empty() {
        return Err(MetricError::EmptyFront);
    }
    let p = front[0].dim();
    if p > 6 {
        return Err(MetricError::TooManyObjectives { p });
    }
    let mut extremes: Vec<Point> = (0..p)
        .permutations(p)
        .map(|perm| {
            front
                .iter()
                .min_by_key(|z| perm.iter().map(|&i| z[i]).collect::<Vec<i64>>())
                .expect("front is non-empty")
                .clone()
        })
        .collect();
    extremes.sort();
    extremes.dedup();
    Ok(extremes)
}

/// Reference point when no complete front is known: the componentwise
/// maximum of the evaluated set itself. Points on that boundary carry zero
/// hypervolume, so results must be flagged as fallback-based.
pub fn fallback_reference(points: &[Point]) -> Option<Point> {
    let first = points.first()?;
    let p = first.dim();
    Some(Point(
        (0..p)
            .map(|i| points.iter().map(|z| z[i]).max().unwrap())
            .collect(),
    ))
}

/// Indicator values of one trace at one cut point.
#[derive(Clone, Debug)]
pub struct CutRow {
    pub cut: Duration,
    pub n_points: usize,
    pub onvgr: f64,
    pub hvr: f64,
    /// `None` below two points, where the spread is undefined.
    pub spread: Option<f64>,
    /// Positive infinity for an empty set (serialized as an empty cell).
    pub eps_add: f64,
}

/// Reconstruct the archive at each cut point (all points found by that
/// elapsed time; cuts beyond the end of the trace see the final archive)
/// and evaluate every indicator against the complete front.
pub fn evaluate_trace(
    trace: &[TraceEvent],
    ctx: &MetricContext,
    cuts: &[Duration],
) -> Result<Vec<CutRow>, MetricError> {
    let found: Vec<(Duration, Point)> = trace
        .iter()
        .filter_map(|e| match &e.kind {
            TraceKind::PointFound(z) => Some((e.elapsed, z.clone())),
            _ => None,
        })
        .collect();
    cuts.iter()
        .map(|&cut| {
            let n: Vec<Point> = found
                .iter()
                .filter(|(t, _)| *t <= cut)
                .map(|(_, z)| z.clone())
                .collect();
            Ok(CutRow {
                cut,
                n_points: n.len(),
                onvgr: onvgr(&n, &ctx.front)?,
                hvr: hvr(&n, &ctx.front, &ctx.reference)?,
                spread: general_spread(&n, &ctx.extremes),
                eps_add: additive_epsilon(&n, &ctx.front),
            })
        })
        .collect()
}

/// Elapsed time of the trace's `Finished` event, if the run completed.
pub fn finished_at(trace: &[TraceEvent]) -> Option<Duration> {
    trace.iter().find_map(|e| match e.kind {
        TraceKind::Finished => Some(e.elapsed),
        _ => None,
    })
}

/// Competition ranks (1 = best) with average-rank tie handling: tied values
/// share the mean of the positions they occupy.
pub fn rank_with_ties(values: &[f64], lower_is_better: bool) -> Vec<f64> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    let key = |v: f64| if lower_is_better { v } else { -v };
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])));
    let mut ranks = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j < m && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i+1..=j averaged over the tie group.
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Ranks with the completed-run override: algorithms that already finished
/// take the leading ranks (tied among themselves), the rest are ranked by
/// metric value after them.
pub fn rank_with_finished(values: &[f64], lower_is_better: bool, finished: &[bool]) -> Vec<f64> {
    assert_eq!(values.len(), finished.len());
    let nf = finished.iter().filter(|&&f| f).count();
    if nf == 0 {
        return rank_with_ties(values, lower_is_better);
    }
    let mut ranks = vec![0.0; values.len()];
    let finished_rank = (nf + 1) as f64 / 2.0;
    let rest: Vec<f64> = values
        .iter()
        .zip(finished)
        .filter(|(_, &f)| !f)
        .map(|(&v, _)| v)
        .collect();
    let rest_ranks = rank_with_ties(&rest, lower_is_better);
    let mut k = 0;
    for (i, &f) in finished.iter().enumerate() {
        if f {
            ranks[i] = finished_rank;
        } else {
            ranks[i] = rest_ranks[k] + nf as f64;
            k += 1;
        }
    }
    ranks
}
