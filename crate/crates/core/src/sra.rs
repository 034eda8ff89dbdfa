//! SRA (small rough angle) analysis.
//!
//! A triple (x, z, y) of distinct points satisfies the SRA(alpha) inequality
//! when `d(x,y) <= max{ d(x,z) + alpha*d(z,y), alpha*d(x,z) + d(z,y) }`.
//! A subset satisfies the SRA(alpha) condition when every triple of its
//! members does; a space is *free of k-point SRA(alpha) subsets* when every
//! k-subset contains a strictly violating triple. Freeness at k implies
//! freeness at every larger size, since any violating triple of a k-subset
//! survives into supersets.
//!
//! Comparisons are exact IEEE comparisons. Ties (equality within one ulp of
//! the max) are kept as satisfying: the violating direction is strict.

use rayon::prelude::*;
use thiserror::Error;

use crate::metric::{FiniteMetricSpace, PointId, SubsetRef};

/// Parameters for SRA searches: the angle bound `alpha` in (0,1) and the
/// subset size `k >= 2`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SraParams {
    alpha: f64,
    k: usize,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SraError {
    #[error("alpha must lie in (0,1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("k must be at least 2, got {0}")]
    KTooSmall(usize),
}

impl SraParams {
    pub fn new(alpha: f64, k: usize) -> Result<Self, SraError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(SraError::AlphaOutOfRange(alpha));
        }
        if k < 2 {
            return Err(SraError::KTooSmall(k));
        }
        Ok(SraParams { alpha, k })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// SRA(alpha) inequality for one ordered triple. Points are required to be
/// distinct; triples with repeats can never violate the inequality (the
/// comparison degenerates to equality), so distinctness loses nothing.
pub fn sra_triple_ok(
    space: &FiniteMetricSpace,
    x: PointId,
    z: PointId,
    y: PointId,
    alpha: f64,
) -> bool {
    debug_assert!(x != z && z != y && x != y, "triple points must be distinct");
    let dxz = space.d(x, z);
    let dzy = space.d(z, y);
    space.d(x, y) <= (dxz + alpha * dzy).max(alpha * dxz + dzy)
}

/// True when every triple of distinct members of `subset` satisfies the
/// SRA(alpha) inequality.
pub fn subset_is_sra(space: &FiniteMetricSpace, subset: &SubsetRef, alpha: f64) -> bool {
    let m = subset.members();
    for (ai, &a) in m.iter().enumerate() {
        for &b in m.iter().skip(ai + 1) {
            // The inequality is symmetric in its endpoints, so one unordered
            // endpoint pair per middle point suffices.
            for &z in m.iter() {
                if z == a || z == b {
                    continue;
                }
                if !sra_triple_ok(space, a, z, b, alpha) {
                    return false;
                }
            }
        }
    }
    true
}

/// Triples of `subset` that violate SRA(alpha), as (x, z, y) with
/// `d(x,y) > max{d(x,z) + alpha*d(z,y), alpha*d(x,z) + d(z,y)}`.
pub fn violating_triples(
    space: &FiniteMetricSpace,
    subset: &SubsetRef,
    alpha: f64,
) -> Vec<(PointId, PointId, PointId)> {
    let m = subset.members();
    let mut out = Vec::new();
    for (ai, &a) in m.iter().enumerate() {
        for &b in m.iter().skip(ai + 1) {
            for &z in m.iter() {
                if z == a || z == b {
                    continue;
                }
                if !sra_triple_ok(space, a, z, b, alpha) {
                    out.push((a, z, b));
                }
            }
        }
    }
    out
}

/// Finds a k-subset satisfying the SRA(alpha) condition, or `None` when the
/// space is free of such subsets. Searches depth-first in lexicographic id
/// order, pruning any partial subset that already contains a violating
/// triple (the condition is closed under subsets, so pruning is sound); the
/// returned witness is the lexicographically smallest one.
pub fn find_sra_subspace(space: &FiniteMetricSpace, params: SraParams) -> Option<SubsetRef> {
    let k = params.k;
    if space.len() < k {
        return None;
    }
    let mut partial: Vec<PointId> = Vec::with_capacity(k);
    if dfs_sra(space, params.alpha, k, 0, &mut partial) {
        Some(SubsetRef::new(partial))
    } else {
        None
    }
}

fn dfs_sra(
    space: &FiniteMetricSpace,
    alpha: f64,
    k: usize,
    from: usize,
    partial: &mut Vec<PointId>,
) -> bool {
    if partial.len() == k {
        return true;
    }
    let remaining = k - partial.len();
    let n = space.len();
    for c in from..n {
        if n - c < remaining {
            return false;
        }
        let cand = PointId(c);
        if extends_sra(space, alpha, partial, cand) {
            partial.push(cand);
            if dfs_sra(space, alpha, k, c + 1, partial) {
                return true;
            }
            partial.pop();
        }
    }
    false
}

/// All triples of `partial + [cand]` that involve `cand` satisfy SRA(alpha).
fn extends_sra(space: &FiniteMetricSpace, alpha: f64, partial: &[PointId], cand: PointId) -> bool {
    for (ai, &a) in partial.iter().enumerate() {
        // cand as middle point of (a, b); endpoints symmetric.
        for &b in partial.iter().skip(ai + 1) {
            if !sra_triple_ok(space, a, cand, b, alpha) {
                return false;
            }
        }
        // cand as an endpoint against every middle point.
        for &z in partial.iter() {
            if z == a {
                continue;
            }
            if !sra_triple_ok(space, a, z, cand, alpha) {
                return false;
            }
        }
    }
    true
}

/// Smallest `k >= 3` such that the space is free of k-point SRA(alpha)
/// subsets. When every `k <= n` admits a witness the space is vacuously free
/// at `n + 1`, which is returned.
pub fn sra_free_parameter(space: &FiniteMetricSpace, alpha: f64) -> usize {
    let n = space.len();
    for k in 3..=n {
        let params = SraParams::new(alpha, k).expect("validated alpha, k >= 3");
        if find_sra_subspace(space, params).is_none() {
            return k;
        }
    }
    n + 1
}

/// Critical radius data for one point: the best spread achievable by an
/// SRA(alpha/2) configuration of size k-1 through it.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalRadiusEntry {
    pub point: PointId,
    /// Max over qualifying configurations of their min pairwise distance;
    /// 0 when no configuration through the point is SRA(alpha/2).
    pub radius: f64,
    /// A maximizing configuration (contains `point`, size k-1), when any.
    pub witness: Option<SubsetRef>,
}

/// Computes the critical radius of `x` for `params = (alpha, k)`: the
/// maximum, over subsets `Y` of size k-1 that contain `x` and satisfy the
/// SRA(alpha/2) condition, of the minimum pairwise distance of `Y`. Searches
/// lexicographically with two sound prunes: partial configurations that are
/// not SRA(alpha/2) cannot complete (subset closure), and partial
/// configurations whose min pairwise distance already fails to beat the best
/// found cannot improve it (the min only decreases under extension). The
/// witness is the lexicographically first maximizer. Requires `k >= 3`.
pub fn critical_radius(
    space: &FiniteMetricSpace,
    x: PointId,
    params: SraParams,
) -> CriticalRadiusEntry {
    assert!(params.k >= 3, "critical radius needs k >= 3");
    let size = params.k - 1;
    let half_alpha = params.alpha / 2.0;
    let mut best: Option<(f64, Vec<PointId>)> = None;
    let mut partial = vec![x];
    config_dfs(space, half_alpha, size, 0, f64::INFINITY, &mut partial, &mut best);
    match best {
        Some((radius, members)) => CriticalRadiusEntry {
            point: x,
            radius,
            witness: Some(SubsetRef::new(members)),
        },
        None => CriticalRadiusEntry { point: x, radius: 0.0, witness: None },
    }
}

fn config_dfs(
    space: &FiniteMetricSpace,
    half_alpha: f64,
    size: usize,
    from: usize,
    min_so_far: f64,
    partial: &mut Vec<PointId>,
    best: &mut Option<(f64, Vec<PointId>)>,
) {
    if partial.len() == size {
        if best.as_ref().is_none_or(|(r, _)| min_so_far > *r) {
            *best = Some((min_so_far, partial.clone()));
        }
        return;
    }
    let n = space.len();
    let remaining = size - partial.len();
    for c in from..n {
        if n - c < remaining {
            return;
        }
        let cand = PointId(c);
        if partial.contains(&cand) {
            continue;
        }
        let min_with = partial
            .iter()
            .map(|&p| space.d(p, cand))
            .fold(min_so_far, f64::min);
        // A completed configuration through this branch has min pairwise
        // distance <= min_with, so it cannot strictly beat the current best.
        if best.as_ref().is_some_and(|(r, _)| min_with <= *r) {
            continue;
        }
        if extends_sra(space, half_alpha, partial, cand) {
            partial.push(cand);
            config_dfs(space, half_alpha, size, c + 1, min_with, partial, best);
            partial.pop();
        }
    }
}

/// Critical radii of all points, in id order.
pub fn critical_radius_all(
    space: &FiniteMetricSpace,
    params: SraParams,
) -> Vec<CriticalRadiusEntry> {
    (0..space.len())
        .into_par_iter()
        .map(|i| critical_radius(space, PointId(i), params))
        .collect()
}

/// Builds the core subset for one recursion level: the greedy (ascending id)
/// maximal subset `C` such that every pair `x, y` in `C` has
/// `d(x,y) > min{R(x), R(y)}`, where `R` is the critical radius at `params`.
/// Every excluded point `x` then satisfies `d(x, C) <= R(x)`: exclusion
/// means some earlier member sits within `min{R(x), R(.)} <= R(x)` of it.
/// Points with `R(x) = 0` are always kept (distances are positive).
/// Requires `k >= 4`.
pub fn build_core_subset(
    space: &FiniteMetricSpace,
    params: SraParams,
) -> (SubsetRef, Vec<CriticalRadiusEntry>) {
    assert!(params.k >= 4, "core subsets arise only for k >= 4");
    let entries = critical_radius_all(space, params);
    let mut kept: Vec<PointId> = Vec::new();
    for x in space.points() {
        let rx = entries[x.0].radius;
        if kept
            .iter()
            .all(|&y| space.d(x, y) > rx.min(entries[y.0].radius))
        {
            kept.push(x);
        }
    }
    (SubsetRef::new(kept), entries)
}
