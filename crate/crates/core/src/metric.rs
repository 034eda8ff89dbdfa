//! Validated finite metric spaces and the primitive geometric queries the
//! rest of the library is built from: balls, greedy separated nets, doubling
//! estimates, and restriction to subsets.
//!
//! A [`FiniteMetricSpace`] is immutable once validated. All operations take
//! points by [`PointId`] (index into the space) and subsets as [`SubsetRef`]
//! (strictly increasing id lists), so every derived object can be traced back
//! to concrete rows of the input matrix.

use rayon::prelude::*;
use thiserror::Error;

use crate::METRIC_SLACK;

/// Index of a point within a [`FiniteMetricSpace`].
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PointId(pub usize);

impl std::fmt::Display for PointId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p{}", self.0)
    }
}

impl serde::Serialize for PointId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.0 as u64)
    }
}

/// A subset of a space, stored as strictly increasing point ids.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubsetRef {
    members: Vec<PointId>,
}

impl SubsetRef {
    /// Canonicalizing constructor: sorts and deduplicates.
    pub fn new(mut members: Vec<PointId>) -> Self {
        members.sort_unstable();
        members.dedup();
        SubsetRef { members }
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self::new(indices.into_iter().map(PointId).collect())
    }

    pub fn members(&self) -> &[PointId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.members.binary_search(&p).is_ok()
    }

    /// Position of `p` within the subset, if present.
    pub fn position(&self, p: PointId) -> Option<usize> {
        self.members.binary_search(&p).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = PointId> + '_ {
        self.members.iter().copied()
    }

    /// True when every member id is below `n`.
    pub fn fits(&self, n: usize) -> bool {
        self.members.last().map_or(true, |p| p.0 < n)
    }
}

impl std::fmt::Display for SubsetRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Whether a ball includes its boundary sphere.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum BallKind {
    Open,
    Closed,
}

/// Validation failures for a candidate distance matrix. Each variant carries
/// the indices of an offending witness.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum MetricError {
    #[error("matrix is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare { row: usize, got: usize, expected: usize },
    #[error("non-finite entry at ({i},{j})")]
    NonFinite { i: usize, j: usize },
    #[error("matrix not symmetric at ({i},{j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("negative distance at ({i},{j}): {value}")]
    NegativeDistance { i: usize, j: usize, value: f64 },
    #[error("nonzero diagonal at ({i},{i}): {value}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("duplicate point: zero distance between distinct points {i} and {j}")]
    DuplicatePoint { i: usize, j: usize },
    #[error("triangle inequality violated: d({i},{j}) > d({i},{via}) + d({via},{j})")]
    TriangleViolation { i: usize, j: usize, via: usize },
    #[error("expected {expected} labels, got {got}")]
    LabelCountMismatch { expected: usize, got: usize },
}

/// An immutable finite metric space: a validated symmetric distance matrix
/// plus one label per point.
#[derive(Clone, Debug)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>, // row-major n*n
    n: usize,
}

/// Validates `matrix` as a metric and wraps it. Checks, in order: squareness,
/// finiteness, zero diagonal, symmetry (bitwise equality), nonnegativity,
/// positivity off the diagonal, and the triangle inequality up to relative
/// slack `METRIC_SLACK` (violation means
/// `d[i][j] > d[i][k] + d[k][j] + METRIC_SLACK * d[i][j]`).
pub fn validate_metric(
    matrix: &[Vec<f64>],
    labels: Option<Vec<String>>,
) -> Result<FiniteMetricSpace, MetricError> {
    let n = matrix.len();
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(MetricError::NotSquare { row, got: r.len(), expected: n });
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !matrix[i][j].is_finite() {
                return Err(MetricError::NonFinite { i, j });
            }
        }
    }
    for i in 0..n {
        if matrix[i][i] != 0.0 {
            return Err(MetricError::NonzeroDiagonal { i, value: matrix[i][i] });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if matrix[i][j] != matrix[j][i] {
                return Err(MetricError::NotSymmetric { i, j, a: matrix[i][j], b: matrix[j][i] });
            }
            if matrix[i][j] < 0.0 {
                return Err(MetricError::NegativeDistance { i, j, value: matrix[i][j] });
            }
            if matrix[i][j] == 0.0 {
                return Err(MetricError::DuplicatePoint { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dij = matrix[i][j];
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if dij > matrix[i][k] + matrix[k][j] + METRIC_SLACK * dij {
                    return Err(MetricError::TriangleViolation { i, j, via: k });
                }
            }
        }
    }
    let labels = match labels {
        Some(l) => {
            if l.len() != n {
                return Err(MetricError::LabelCountMismatch { expected: n, got: l.len() });
            }
            l
        }
        None => (0..n).map(|i| format!("p{i}")).collect(),
    };
    Ok(FiniteMetricSpace { labels, dist: flatten(matrix), n })
}

fn flatten(matrix: &[Vec<f64>]) -> Vec<f64> {
    matrix.iter().flat_map(|r| r.iter().copied()).collect()
}

impl FiniteMetricSpace {
    /// Number of points.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distance between two points.
    #[inline]
    pub fn d(&self, a: PointId, b: PointId) -> f64 {
        self.dist[a.0 * self.n + b.0]
    }

    pub fn label(&self, p: PointId) -> &str {
        &self.labels[p.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.n).map(PointId)
    }

    /// All points, as a subset.
    pub fn all(&self) -> SubsetRef {
        SubsetRef::from_indices(0..self.n)
    }

    /// Largest pairwise distance; 0 for spaces with fewer than two points.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                best = best.max(self.dist[i * self.n + j]);
            }
        }
        best
    }

    /// Sorted, deduplicated positive pairwise distances.
    pub fn pairwise_distances(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                v.push(self.dist[i * self.n + j]);
            }
        }
        v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// Points within distance `r` of `center`; the boundary sphere is
    /// included exactly when `kind` is [`BallKind::Closed`].
    pub fn ball(&self, center: PointId, r: f64, kind: BallKind) -> SubsetRef {
        let keep = |d: f64| match kind {
            BallKind::Open => d < r,
            BallKind::Closed => d <= r,
        };
        SubsetRef::new(
            self.points().filter(|&p| keep(self.d(center, p))).collect(),
        )
    }

    /// Distance from `p` to the nearest member of `set`; infinite when the
    /// set is empty.
    pub fn dist_to_set(&self, p: PointId, set: &SubsetRef) -> f64 {
        set.iter().map(|q| self.d(p, q)).fold(f64::INFINITY, f64::min)
    }

    /// The subspace on `subset`, with labels carried over. Point `i` of the
    /// result corresponds to `subset.members()[i]`.
    pub fn restrict(&self, subset: &SubsetRef) -> FiniteMetricSpace {
        assert!(subset.fits(self.n), "subset out of range");
        let m = subset.len();
        let mut dist = vec![0.0; m * m];
        for (i, p) in subset.iter().enumerate() {
            for (j, q) in subset.iter().enumerate() {
                dist[i * m + j] = self.d(p, q);
            }
        }
        let labels = subset.iter().map(|p| self.labels[p.0].clone()).collect();
        FiniteMetricSpace { labels, dist, n: m }
    }
}

/// Greedy maximal `r`-separated subset of `candidates`, scanned in ascending
/// id order: a candidate is kept iff it is at distance >= `r` from every
/// point kept so far. The result is pairwise >= `r` separated and maximal
/// (every rejected candidate lies within < `r` of some kept point).
pub fn greedy_maximal_separated(
    space: &FiniteMetricSpace,
    candidates: &SubsetRef,
    r: f64,
) -> SubsetRef {
    assert!(r > 0.0, "separation radius must be positive");
    let mut kept: Vec<PointId> = Vec::new();
    for c in candidates.iter() {
        if kept.iter().all(|&s| space.d(c, s) >= r) {
            kept.push(c);
        }
    }
    SubsetRef::new(kept)
}

/// Smallest lambda such that for every center `x` and every radius `R` drawn
/// from the set of positive pairwise distances, the closed ball `B_R(x)` is
/// covered by lambda closed balls of radius `R/2` centered at points of the
/// space. Covering counts are exact minima (branch and bound over candidate
/// centers), so the certificate holds: lambda admits a verified cover
/// everywhere and lambda - 1 admits none for at least one (center, radius).
///
/// Radii are tested at pairwise distances only; ball membership is piecewise
/// constant in `R` between consecutive values. Returns 1 for spaces with
/// fewer than two points.
pub fn doubling_constant_estimate(space: &FiniteMetricSpace) -> usize {
    assert!(!space.is_empty(), "doubling estimate needs a nonempty space");
    let radii = space.pairwise_distances();
    if radii.is_empty() {
        return 1;
    }
    let per_center: Vec<usize> = (0..space.len())
        .into_par_iter()
        .map(|c| {
            let center = PointId(c);
            let mut worst = 1usize;
            for &r in &radii {
                let target = space.ball(center, r, BallKind::Closed);
                worst = worst.max(min_half_ball_cover(space, &target, r / 2.0));
            }
            worst
        })
        .collect();
    per_center.into_iter().max().unwrap_or(1)
}

/// Exact minimum number of closed `half_r`-balls (centered anywhere in the
/// space) needed to cover `target`.
fn min_half_ball_cover(space: &FiniteMetricSpace, target: &SubsetRef, half_r: f64) -> usize {
    let m = target.len();
    if m == 0 {
        return 0;
    }
    // Candidate sets as bitmasks over target positions.
    let masks: Vec<u128> = {
        assert!(m <= 128, "cover search supports targets up to 128 points");
        let mut masks: Vec<u128> = space
            .points()
            .map(|y| {
                let mut mask = 0u128;
                for (pos, t) in target.iter().enumerate() {
                    if space.d(y, t) <= half_r {
                        mask |= 1 << pos;
                    }
                }
                mask
            })
            .filter(|&mask| mask != 0)
            .collect();
        // Drop sets dominated by a superset; keeps the search small.
        masks.sort_unstable_by_key(|mask| std::cmp::Reverse(mask.count_ones()));
        let mut kept: Vec<u128> = Vec::new();
        for mask in masks {
            if !kept.iter().any(|&k| k & mask == mask) {
                kept.push(mask);
            }
        }
        kept
    };
    let full: u128 = if m == 128 { u128::MAX } else { (1 << m) - 1 };

    // Greedy cover for the initial upper bound.
    let mut best = {
        let mut covered = 0u128;
        let mut used = 0usize;
        while covered != full {
            let pick = masks
                .iter()
                .max_by_key(|&&mask| (mask & !covered).count_ones())
                .copied()
                .expect("target must be coverable: every point covers itself");
            covered |= pick;
            used += 1;
        }
        used
    };
    let max_gain = masks.iter().map(|m| m.count_ones()).max().unwrap_or(1) as usize;
    branch_cover(&masks, full, 0, 0, &mut best, max_gain);
    best
}

fn branch_cover(
    masks: &[u128],
    remaining: u128,
    covered: u128,
    depth: usize,
    best: &mut usize,
    max_gain: usize,
) {
    if covered & remaining == remaining {
        *best = (*best).min(depth);
        return;
    }
    let uncovered = remaining & !covered;
    let need = (uncovered.count_ones() as usize).div_ceil(max_gain);
    if depth + need >= *best {
        return;
    }
    // Branch on the uncovered element with the fewest covering candidates.
    let mut pick_bit = 0u128;
    let mut pick_count = usize::MAX;
    let mut scan = uncovered;
    while scan != 0 {
        let bit = scan & scan.wrapping_neg();
        let count = masks.iter().filter(|&&mask| mask & bit != 0).count();
        if count < pick_count {
            pick_count = count;
            pick_bit = bit;
        }
        scan &= scan - 1;
    }
    for &mask in masks.iter().filter(|&&mask| mask & pick_bit != 0) {
        branch_cover(masks, remaining, covered | mask, depth + 1, best, max_gain);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> FiniteMetricSpace {
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        validate_metric(&m, None).unwrap()
    }

    #[test]
    fn accepts_unit_line() {
        let s = line(4);
        assert_eq!(s.len(), 4);
        assert_eq!(s.d(PointId(0), PointId(3)), 3.0);
        assert_eq!(s.diameter(), 3.0);
    }

    #[test]
    fn rejects_triangle_violation_with_witness() {
        // d(0,2) = 3 > d(0,1) + d(1,2) = 2.
        let m = vec![
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ];
        match validate_metric(&m, None) {
            Err(MetricError::TriangleViolation { i: 0, j: 2, via: 1 }) => {}
            other => panic!("expected triangle violation at (0,2,1), got {other:?}"),
        }
    }

    #[test]
    fn triangle_tolerance_is_relative() {
        // Equality plus a sub-tolerance perturbation must pass.
        let d02 = 2.0 * (1.0 + 0.5e-12);
        let m = vec![
            vec![0.0, 1.0, d02],
            vec![1.0, 0.0, 1.0],
            vec![d02, 1.0, 0.0],
        ];
        assert!(validate_metric(&m, None).is_ok());
        let d02 = 2.0 * (1.0 + 1e-11);
        let m = vec![
            vec![0.0, 1.0, d02],
            vec![1.0, 0.0, 1.0],
            vec![d02, 1.0, 0.0],
        ];
        assert!(matches!(
            validate_metric(&m, None),
            Err(MetricError::TriangleViolation { .. })
        ));
    }

    #[test]
    fn rejects_asymmetry_negativity_diagonal_duplicates() {
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(matches!(
            validate_metric(&asym, None),
            Err(MetricError::NotSymmetric { i: 0, j: 1, .. })
        ));
        let neg = vec![vec![0.0, -1.0], vec![-1.0, 0.0]];
        assert!(matches!(
            validate_metric(&neg, None),
            Err(MetricError::NegativeDistance { .. })
        ));
        let diag = vec![vec![0.5]];
        assert!(matches!(
            validate_metric(&diag, None),
            Err(MetricError::NonzeroDiagonal { i: 0, .. })
        ));
        let dup = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(matches!(
            validate_metric(&dup, None),
            Err(MetricError::DuplicatePoint { i: 0, j: 1 })
        ));
    }

    #[test]
    fn ball_flags_differ_exactly_on_the_sphere() {
        let s = line(4);
        let open = s.ball(PointId(0), 2.0, BallKind::Open);
        let closed = s.ball(PointId(0), 2.0, BallKind::Closed);
        assert_eq!(open.members(), &[PointId(0), PointId(1)]);
        assert_eq!(closed.members(), &[PointId(0), PointId(1), PointId(2)]);
    }

    #[test]
    fn greedy_net_on_unit_line() {
        let s = line(4);
        let net = greedy_maximal_separated(&s, &s.all(), 1.5);
        assert_eq!(net.members(), &[PointId(0), PointId(2)]);
    }

    #[test]
    fn greedy_net_certificates() {
        let s = line(9);
        for r in [0.5, 1.0, 2.5, 4.0] {
            let net = greedy_maximal_separated(&s, &s.all(), r);
            for (i, p) in net.iter().enumerate() {
                for q in net.iter().skip(i + 1) {
                    assert!(s.d(p, q) >= r);
                }
            }
            for c in s.points() {
                assert!(
                    net.contains(c) || net.iter().any(|m| s.d(c, m) < r),
                    "maximality fails at {c}"
                );
            }
        }
    }

    #[test]
    fn doubling_of_single_point_is_one() {
        let s = validate_metric(&[vec![0.0]], None).unwrap();
        assert_eq!(doubling_constant_estimate(&s), 1);
    }

    #[test]
    fn doubling_of_two_points_is_two() {
        // Closed B_1 around either point holds both; half-balls hold one each.
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let s = validate_metric(&m, None).unwrap();
        assert_eq!(doubling_constant_estimate(&s), 2);
    }

    /// Brute-force minimum cover: try every subset of centers (spaces here
    /// are small enough for a full 2^n sweep).
    fn brute_min_cover(space: &FiniteMetricSpace, target: &SubsetRef, half_r: f64) -> usize {
        let n = space.len();
        assert!(n <= 20, "brute-force cover oracle is exponential");
        let mut best = usize::MAX;
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size >= best {
                continue;
            }
            let covers = target.iter().all(|t| {
                (0..n).any(|c| mask & (1 << c) != 0 && space.d(PointId(c), t) <= half_r)
            });
            if covers {
                best = size;
            }
        }
        best
    }

    #[test]
    fn doubling_matches_brute_force_cover_oracle() {
        let spaces = [line(4), line(7)];
        for s in &spaces {
            let mut expected = 1usize;
            for c in s.points() {
                for r in s.pairwise_distances() {
                    let target = s.ball(c, r, BallKind::Closed);
                    expected = expected.max(brute_min_cover(s, &target, r / 2.0));
                }
            }
            assert_eq!(doubling_constant_estimate(s), expected);
        }
    }

    #[test]
    fn doubling_of_four_point_line() {
        // R = 1 around an interior point needs three half-balls.
        assert_eq!(doubling_constant_estimate(&line(4)), 3);
    }

    #[test]
    fn restrict_carries_labels_and_distances() {
        let s = line(5);
        let sub = s.restrict(&SubsetRef::from_indices([1, 3, 4]));
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.d(PointId(0), PointId(1)), 2.0);
        assert_eq!(sub.d(PointId(1), PointId(2)), 1.0);
        assert_eq!(sub.label(PointId(0)), "p1");
    }

    #[test]
    fn subset_ref_canonicalizes() {
        let s = SubsetRef::from_indices([3, 1, 3, 0]);
        assert_eq!(s.members(), &[PointId(0), PointId(1), PointId(3)]);
        assert!(s.contains(PointId(1)));
        assert!(!s.contains(PointId(2)));
        assert_eq!(s.position(PointId(3)), Some(2));
    }
}
