//! Objective-space geometry: points, half-open boxes, dominance relations,
//! the two box-splitting schemes (`p_partition` and `full_p_split`), join
//! boxes, and the `scaled`/`reduced_scaled` priority functions.
//!
//! All coordinates are exact integers; the priority functions switch to
//! floating point only for the final division, so every comparison made by
//! the search is free of accumulation error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point in `p`-dimensional objective space with exact integer coordinates.
///
/// `Ord`/`PartialOrd` are the *lexicographic* order (used for canonical
/// sorting and deterministic tie-breaking), not a dominance order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    /// Componentwise `self <= other` (weak dominance under minimization).
    pub fn weakly_dominates(&self, other: &Point) -> bool {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise strict `self < other`.
    pub fn strictly_below(&self, other: &Point) -> bool {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0.iter().zip(&other.0).all(|(a, b)| a < b)
    }
}

impl std::ops::Index<usize> for Point {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl std::fmt::Debug for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Relation of a point `a` to a point `b` under componentwise minimization.
///
/// The classification is total and mutually exclusive. The first three
/// variants are the nested relations of the dominance order read in the
/// `a`-over-`b` direction; `DominatedBy` covers the reverse direction
/// (`b` weakly dominates `a` and they differ), so `Incomparable` means
/// exactly "neither weakly dominates the other".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// `a == b`.
    Equal,
    /// `a_i < b_i` for every coordinate.
    StrictlyDominates,
    /// `a <= b` with at least one strict coordinate, but not all strict.
    Dominates,
    /// `b <= a` and `a != b`.
    DominatedBy,
    /// Neither point weakly dominates the other.
    Incomparable,
}

/// Classify the dominance relation of `a` with respect to `b`.
///
/// Panics on dimension mismatch.
pub fn dominance(a: &Point, b: &Point) -> Dominance {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch");
    let mut a_le = true;
    let mut b_le = true;
    let mut a_all_lt = true;
    let mut equal = true;
    for (&x, &y) in a.0.iter().zip(&b.0) {
        if x > y {
            a_le = false;
            a_all_lt = false;
        } else if x < y {
            b_le = false;
        } else {
            a_all_lt = false;
        }
        equal &= x == y;
    }
    if equal {
        Dominance::Equal
    } else if a_le {
        if a_all_lt {
            Dominance::StrictlyDominates
        } else {
            Dominance::Dominates
        }
    } else if b_le {
        Dominance::DominatedBy
    } else {
        Dominance::Incomparable
    }
}

/// Half-open axis-aligned region `[l, u)` of objective space.
///
/// `direction` is the 0-based coordinate fixed by the split that created the
/// box. A stored box is never empty: `lower[i] < upper[i]` for every `i`.
#[derive(Clone, Debug)]
pub struct SearchBox {
    pub lower: Point,
    pub upper: Point,
    pub direction: usize,
    pub priority: f64,
}

impl SearchBox {
    pub fn new(lower: Point, upper: Point, direction: usize, priority: f64) -> Self {
        assert_eq!(lower.dim(), upper.dim(), "dimension mismatch");
        assert!(
            lower.0.iter().zip(&upper.0).all(|(l, u)| l < u),
            "box [{lower}, {upper}) is empty"
        );
        assert!(direction < lower.dim(), "direction out of range");
        assert!(priority >= 0.0 && priority.is_finite(), "bad priority");
        SearchBox {
            lower,
            upper,
            direction,
            priority,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// Half-open membership: `lower <= x < upper` componentwise.
    pub fn contains(&self, x: &Point) -> bool {
        assert_eq!(self.dim(), x.dim(), "dimension mismatch");
        x.0.iter()
            .zip(&self.lower.0)
            .zip(&self.upper.0)
            .all(|((xi, li), ui)| li <= xi && xi < ui)
    }
}

/// Global scaling data for a run: the ideal point, the upper bound of the
/// nadir point, and the largest per-objective range.
#[derive(Clone, Debug)]
pub struct ScalingBounds {
    pub ideal: Point,
    pub nadir_bound: Point,
    pub range: i64,
}

#[derive(Debug, Error)]
pub enum GeometryError {
    /// Objective `index` takes a single value over the feasible set; such
    /// instances are rejected because the objective could be discarded.
    #[error("objective {index} has zero range (value {value}); instance rejected")]
    DegenerateObjective { index: usize, value: i64 },
}

impl ScalingBounds {
    pub fn new(ideal: Point, nadir_bound: Point) -> Result<Self, GeometryError> {
        assert_eq!(ideal.dim(), nadir_bound.dim(), "dimension mismatch");
        let mut range = 0i64;
        for (i, (&lo, &hi)) in ideal.0.iter().zip(&nadir_bound.0).enumerate() {
            if lo >= hi {
                return Err(GeometryError::DegenerateObjective {
                    index: i,
                    value: lo,
                });
            }
            range = range.max(hi - lo);
        }
        Ok(ScalingBounds {
            ideal,
            nadir_bound,
            range,
        })
    }

    pub fn dim(&self) -> usize {
        self.ideal.dim()
    }
}

/// The disjoint children `B_i(z)` of a box for `i = 1..p`, dropping the empty
/// ones and the weakly dominated corner `B_0(z)`.
///
/// Child `i` keeps the parent bounds except that its upper bound is clamped
/// to `max(z_i, l_i)` at coordinate `i` and its lower bound is raised to
/// `max(z_j, l_j)` for every `j > i`. Emptiness is decided analytically from
/// those clamped values, so no invalid box is ever constructed.
///
/// Panics unless `z < B.upper` componentwise.
pub fn p_partition(b: &SearchBox, z: &Point) -> Vec<SearchBox> {
    assert_eq!(b.dim(), z.dim(), "dimension mismatch");
    assert!(z.strictly_below(&b.upper), "p_partition requires z < B.u");
    let p = b.dim();
    let hat: Vec<i64> =
        z.0.iter()
            .zip(&b.lower.0)
            .map(|(&zi, &li)| zi.max(li))
            .collect();
    let mut children = Vec::new();
    for i in 0..p {
        // Non-empty iff the clamped value exceeds the lower bound at i and
        // stays below the upper bound for all later coordinates.
        if hat[i] <= b.lower[i] {
            continue;
        }
        if (i + 1..p).any(|j| hat[j] >= b.upper[j]) {
            continue;
        }
        let lower: Vec<i64> = (0..p)
            .map(|j| if j <= i { b.lower[j] } else { hat[j] })
            .collect();
        let upper: Vec<i64> = (0..p)
            .map(|j| if j == i { hat[i] } else { b.upper[j] })
            .collect();
        children.push(SearchBox::new(Point(lower), Point(upper), i, 0.0));
    }
    children
}

/// Upper bounds of the `p` overlapping boxes produced by splitting the zone
/// below `u` at `z`: the i-th bound replaces `u_i` by `z_i`. The implied
/// lower bound of every resulting zone is the ideal point; callers drop the
/// zones that become empty.
///
/// Panics unless `z < u` componentwise.
pub fn full_p_split(u: &Point, z: &Point) -> Vec<Point> {
    assert_eq!(u.dim(), z.dim(), "dimension mismatch");
    assert!(z.strictly_below(u), "full_p_split requires z < u");
    (0..u.dim())
        .map(|i| {
            let mut coords = u.0.clone();
            coords[i] = z[i];
            Point(coords)
        })
        .collect()
}

/// Join two same-direction boxes with `a.upper <= b.upper` into the box that
/// covers both: componentwise-minimum lower bound, `b`'s upper bound.
///
/// Panics if the preconditions do not hold.
pub fn join(a: &SearchBox, b: &SearchBox) -> SearchBox {
    assert_eq!(a.dim(), b.dim(), "dimension mismatch");
    assert_eq!(a.direction, b.direction, "join requires equal directions");
    assert!(
        a.upper.weakly_dominates(&b.upper),
        "join requires A.u <= B.u"
    );
    let lower: Vec<i64> = a
        .lower
        .0
        .iter()
        .zip(&b.lower.0)
        .map(|(&x, &y)| x.min(y))
        .collect();
    SearchBox::new(Point(lower), b.upper.clone(), b.direction, 0.0)
}

/// Product of the side lengths of `[l, u)`, or `None` on i128 overflow.
/// An interval with any non-positive side is empty and has volume zero.
fn lattice_volume(lower: &[i64], upper: &[i64]) -> Option<i128> {
    let mut vol: i128 = 1;
    for (&l, &u) in lower.iter().zip(upper) {
        if u <= l {
            return Some(0);
        }
        vol = vol.checked_mul((u - l) as i128)?;
    }
    Some(vol)
}

fn lattice_volume_f64(lower: &[i64], upper: &[i64]) -> f64 {
    let mut vol = 1.0;
    for (&l, &u) in lower.iter().zip(upper) {
        if u <= l {
            return 0.0;
        }
        vol *= (u - l) as f64;
    }
    vol
}

/// Volume of `[lower, upper)` divided by the volume of the full region
/// `[ideal, nadir_bound)`; zero for an empty interval. Both products are
/// computed exactly in integers, with a single division at the end.
fn scaled_interval(lower: &[i64], upper: &[i64], sb: &ScalingBounds) -> f64 {
    match (
        lattice_volume(lower, upper),
        lattice_volume(sb.ideal.as_slice(), sb.nadir_bound.as_slice()),
    ) {
        (Some(num), Some(den)) => num as f64 / den as f64,
        // Overflow fallback; only reachable with astronomically wide ranges.
        _ => {
            lattice_volume_f64(lower, upper)
                / lattice_volume_f64(sb.ideal.as_slice(), sb.nadir_bound.as_slice())
        }
    }
}

/// The fraction of the full search region occupied by a box; always positive
/// for a stored (non-empty) box and monotone under inclusion.
pub fn scaled(b: &SearchBox, sb: &ScalingBounds) -> f64 {
    assert_eq!(b.dim(), sb.dim(), "dimension mismatch");
    scaled_interval(b.lower.as_slice(), b.upper.as_slice(), sb)
}

/// Priority of the child `B_i(z)` of a parent box `b`. Children in every
/// direction but the last inherit the parent's scaled volume; the child in
/// the last direction contains the region `[l, z)` that dominates `z` and
/// cannot hold further nondominated points, so that region's volume is
/// subtracted. The result is always non-negative.
///
/// Panics unless `z < b.upper` componentwise and `direction < p`.
pub fn reduced_scaled(b: &SearchBox, direction: usize, z: &Point, sb: &ScalingBounds) -> f64 {
    assert_eq!(b.dim(), z.dim(), "dimension mismatch");
    assert!(direction < b.dim(), "direction out of range");
    assert!(
        z.strictly_below(&b.upper),
        "reduced_scaled requires z < B.u"
    );
    if direction + 1 != b.dim() {
        return scaled(b, sb);
    }
    // [l, z) is non-empty only when z > l componentwise; lattice_volume
    // already yields 0 otherwise. Subtract before dividing to stay exact.
    match (
        lattice_volume(b.lower.as_slice(), b.upper.as_slice()),
        lattice_volume(b.lower.as_slice(), z.as_slice()),
        lattice_volume(sb.ideal.as_slice(), sb.nadir_bound.as_slice()),
    ) {
        (Some(vb), Some(vz), Some(den)) => (vb - vz) as f64 / den as f64,
        _ => scaled(b, sb) - scaled_interval(b.lower.as_slice(), z.as_slice(), sb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[i64]) -> Point {
        Point(coords.to_vec())
    }

    fn bx(l: &[i64], u: &[i64]) -> SearchBox {
        SearchBox::new(pt(l), pt(u), 0, 0.0)
    }

    fn bounds(ideal: &[i64], nadir: &[i64]) -> ScalingBounds {
        ScalingBounds::new(pt(ideal), pt(nadir)).unwrap()
    }

    #[test]
    fn dominance_classification() {
        assert_eq!(dominance(&pt(&[1, 1]), &pt(&[1, 1])), Dominance::Equal);
        assert_eq!(
            dominance(&pt(&[1, 2, 3]), &pt(&[2, 2, 3])),
            Dominance::Dominates
        );
        assert_eq!(
            dominance(&pt(&[1, 5]), &pt(&[5, 1])),
            Dominance::Incomparable
        );
        assert_eq!(
            dominance(&pt(&[0, 0]), &pt(&[1, 1])),
            Dominance::StrictlyDominates
        );
        assert_eq!(
            dominance(&pt(&[2, 2, 3]), &pt(&[1, 2, 3])),
            Dominance::DominatedBy
        );
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn dominance_dimension_mismatch() {
        dominance(&pt(&[1, 2]), &pt(&[1, 2, 3]));
    }

    #[test]
    fn p_partition_figure_example() {
        let b = bx(&[0, 0, 0], &[20, 15, 10]);
        let children = p_partition(&b, &pt(&[5, 5, 5]));
        assert_eq!(children.len(), 3);
        assert_eq!(children[0].direction, 0);
        assert_eq!(children[0].lower, pt(&[0, 5, 5]));
        assert_eq!(children[0].upper, pt(&[5, 15, 10]));
        assert_eq!(children[1].direction, 1);
        assert_eq!(children[1].lower, pt(&[0, 0, 5]));
        assert_eq!(children[1].upper, pt(&[20, 5, 10]));
        assert_eq!(children[2].direction, 2);
        assert_eq!(children[2].lower, pt(&[0, 0, 0]));
        assert_eq!(children[2].upper, pt(&[20, 15, 5]));
    }

    #[test]
    fn p_partition_at_lower_corner_is_empty() {
        let b = bx(&[0, 0], &[4, 4]);
        assert!(p_partition(&b, &pt(&[0, 0])).is_empty());
    }

    #[test]
    fn p_partition_with_z_below_box() {
        let b = bx(&[0, 0], &[4, 4]);
        let children = p_partition(&b, &pt(&[-1, 2]));
        assert_eq!(children.len(), 1);
        assert_eq!(children[0].direction, 1);
        assert_eq!(children[0].lower, pt(&[0, 0]));
        assert_eq!(children[0].upper, pt(&[4, 2]));
    }

    #[test]
    #[should_panic(expected = "z < B.u")]
    fn p_partition_contract_violation() {
        let b = bx(&[0, 0], &[4, 4]);
        p_partition(&b, &pt(&[4, 1]));
    }

    #[test]
    fn full_p_split_examples() {
        let ups = full_p_split(&pt(&[20, 15, 10]), &pt(&[5, 5, 5]));
        assert_eq!(
            ups,
            vec![pt(&[5, 15, 10]), pt(&[20, 5, 10]), pt(&[20, 15, 5])]
        );
        let ups = full_p_split(&pt(&[4, 4]), &pt(&[3, 3]));
        assert_eq!(ups, vec![pt(&[3, 4]), pt(&[4, 3])]);
        // Degenerate bounds are still emitted; the caller is responsible for
        // dropping zones that are empty relative to the ideal point.
        let ups = full_p_split(&pt(&[1, 1]), &pt(&[0, 0]));
        assert_eq!(ups, vec![pt(&[0, 1]), pt(&[1, 0])]);
    }

    #[test]
    fn join_examples() {
        let a = SearchBox::new(pt(&[2, 3]), pt(&[5, 6]), 1, 0.0);
        let b = SearchBox::new(pt(&[0, 4]), pt(&[7, 6]), 1, 0.0);
        let c = join(&a, &b);
        assert_eq!(c.lower, pt(&[0, 3]));
        assert_eq!(c.upper, pt(&[7, 6]));

        let c = join(&a, &a);
        assert_eq!(c.lower, a.lower);
        assert_eq!(c.upper, a.upper);

        let a = SearchBox::new(pt(&[0, 5, 5]), pt(&[5, 15, 10]), 0, 0.0);
        let b = SearchBox::new(pt(&[0, 0, 0]), pt(&[5, 15, 10]), 0, 0.0);
        let c = join(&a, &b);
        assert_eq!(c.lower, pt(&[0, 0, 0]));
        assert_eq!(c.upper, pt(&[5, 15, 10]));
    }

    #[test]
    #[should_panic(expected = "A.u <= B.u")]
    fn join_requires_comparable_uppers() {
        let a = SearchBox::new(pt(&[0, 0]), pt(&[5, 3]), 0, 0.0);
        let b = SearchBox::new(pt(&[0, 0]), pt(&[4, 6]), 0, 0.0);
        join(&a, &b);
    }

    #[test]
    fn scaled_examples() {
        let sb = bounds(&[0, 0, 0], &[20, 15, 10]);
        let full = bx(&[0, 0, 0], &[20, 15, 10]);
        assert_eq!(scaled(&full, &sb), 1.0);
        let half = bx(&[0, 0, 0], &[20, 15, 5]);
        assert_eq!(scaled(&half, &sb), 0.5);
        assert_eq!(
            scaled_interval(&[3, 3], &[3, 5], &bounds(&[0, 0], &[4, 4])),
            0.0
        );
    }

    #[test]
    fn reduced_scaled_examples() {
        let sb = bounds(&[0, 0, 0], &[20, 15, 10]);
        let b = bx(&[0, 0, 0], &[20, 15, 10]);
        let z = pt(&[5, 5, 5]);
        assert_eq!(reduced_scaled(&b, 0, &z, &sb), 1.0);
        assert_eq!(reduced_scaled(&b, 1, &z, &sb), 1.0);
        assert_eq!(reduced_scaled(&b, 2, &z, &sb), 1.0 - 125.0 / 3000.0);
        // z at or below the lower bound in some coordinate: [l, z) is empty.
        let z = pt(&[0, 5, 5]);
        assert_eq!(reduced_scaled(&b, 2, &z, &sb), 1.0);
    }

    #[test]
    fn box_membership_is_half_open() {
        let b = bx(&[0, 0], &[2, 2]);
        assert!(b.contains(&pt(&[0, 0])));
        assert!(b.contains(&pt(&[1, 1])));
        assert!(!b.contains(&pt(&[2, 1])));
        assert!(!b.contains(&pt(&[1, 2])));
        assert!(!b.contains(&pt(&[-1, 0])));
    }

    #[test]
    fn zero_range_objective_rejected() {
        let err = ScalingBounds::new(pt(&[0, 3]), pt(&[5, 3])).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::DegenerateObjective { index: 1, .. }
        ));
    }

    /// Membership in `B_i(z)` straight from the set definition, as an oracle
    /// independent of the interval construction used by `p_partition`.
    fn definition_member(b: &SearchBox, z: &Point, i: usize, x: &Point) -> bool {
        if !b.contains(x) {
            return false;
        }
        if i == 0 {
            return x.0.iter().zip(&z.0).all(|(xj, zj)| xj >= zj);
        }
        let i = i - 1;
        x[i] < z[i] && (i + 1..b.dim()).all(|j| x[j] >= z[j])
    }

    fn lattice_points(b: &SearchBox) -> Vec<Point> {
        let mut out = vec![vec![]];
        for d in 0..b.dim() {
            let mut next = Vec::new();
            for prefix in &out {
                for v in b.lower[d]..b.upper[d] {
                    let mut coords = prefix.clone();
                    coords.push(v);
                    next.push(coords);
                }
            }
            out = next;
        }
        out.into_iter().map(Point).collect()
    }

    #[test]
    fn partition_property_exhaustive_small() {
        let b = bx(&[0, 0, 0], &[4, 3, 5]);
        for z in [
            pt(&[2, 1, 3]),
            pt(&[0, 2, 4]),
            pt(&[-1, 1, 2]),
            pt(&[3, 2, 4]),
        ] {
            let children = p_partition(&b, &z);
            for x in lattice_points(&b) {
                // Exactly one of B_0..B_p contains x, by the definition.
                let def_count = (0..=b.dim())
                    .filter(|&i| definition_member(&b, &z, i, &x))
                    .count();
                assert_eq!(def_count, 1, "x={x:?} z={z:?}");
                // The constructed children agree with the definition and
                // cover exactly B \ B_0.
                let in_children = children.iter().filter(|c| c.contains(&x)).count();
                let in_b0 = definition_member(&b, &z, 0, &x);
                assert_eq!(in_children, usize::from(!in_b0), "x={x:?} z={z:?}");
                for c in &children {
                    assert_eq!(
                        c.contains(&x),
                        definition_member(&b, &z, c.direction + 1, &x),
                        "x={x:?} z={z:?} dir={}",
                        c.direction
                    );
                }
            }
        }
    }

    #[test]
    fn dominated_corner_inside_last_child() {
        let b = bx(&[0, 0, 0], &[6, 6, 6]);
        let z = pt(&[3, 2, 4]);
        let children = p_partition(&b, &z);
        let last = children.iter().find(|c| c.direction == 2).unwrap();
        let corner = SearchBox::new(b.lower.clone(), z.clone(), 0, 0.0);
        for x in lattice_points(&corner) {
            assert!(last.contains(&x));
        }
    }

    #[test]
    fn upper_bounds_match_full_p_split() {
        let b = bx(&[0, 0, 0], &[20, 15, 10]);
        let z = pt(&[5, 5, 5]);
        let split_ups = full_p_split(&b.upper, &z);
        for c in p_partition(&b, &z) {
            assert_eq!(c.upper, split_ups[c.direction]);
        }
    }

    #[test]
    fn join_covers_both_inputs() {
        let a = SearchBox::new(pt(&[2, 3]), pt(&[5, 6]), 1, 0.0);
        let b = SearchBox::new(pt(&[0, 4]), pt(&[7, 6]), 1, 0.0);
        let c = join(&a, &b);
        for x in lattice_points(&a).into_iter().chain(lattice_points(&b)) {
            assert!(c.contains(&x));
        }
    }
}
