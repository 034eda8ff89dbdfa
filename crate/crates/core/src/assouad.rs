//! The layered-net construction.
//!
//! Given a nonnegative 1-Lipschitz scale function `f` and, around every
//! point, a local chart of bounded distortion on a ball of radius `f(x)`,
//! this module assembles a single finite-dimensional map `Phi` that
//!
//! 1. vanishes exactly on the zero set of `f`,
//! 2. is Lipschitz with constant `110*D*sqrt((nbar+1)*M*j)`, and
//! 3. expands every pair with `d <= zeta * max{f}` by at least `9/(40*zeta)`.
//!
//! The construction layers the space into dyadic bands `2^k <= f <= 2^(k+2)`,
//! picks a greedy maximal `2^k/10`-separated net per band, colors net points
//! so that same-color same-band points are at least `10*2^k*zeta` apart,
//! turns every net point into a bump map supported near it, and sums bumps
//! whose (band mod M, color) keys agree into one block per key. Blocks of
//! distinct keys have disjoint, far-apart supports, which is what keeps the
//! sum Lipschitz and lets a single bump dominate locally.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::audit::{check_inequality, CheckRecord, Direction};
use crate::extension::{euclidean, mcshane_extend, norm, ExtensionError, PointMap};
use crate::metric::{BallKind, FiniteMetricSpace, PointId, SubsetRef};
use crate::{METRIC_SLACK, PROOF_SLACK};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AssouadError {
    #[error("scale function has {got} values, expected {expected}")]
    ScaleValueCount { got: usize, expected: usize },
    #[error("scale function value at {point} is negative or non-finite: {value}")]
    ScaleValueInvalid { point: PointId, value: f64 },
    #[error(
        "scale function is not {gamma}-Lipschitz: |f({a}) - f({b})| = {gap} > {allowed}"
    )]
    ScaleNotLipschitz { a: PointId, b: PointId, gamma: f64, gap: f64, allowed: f64 },
    #[error(
        "chart at {center} (radius {radius}) too small: needs radius at least {required}"
    )]
    ChartTooSmall { center: PointId, radius: f64, required: f64 },
    #[error(
        "chart at {center} contracts pair ({a},{b}): image distance {image} < {needed}"
    )]
    ChartNotNoncontracting { center: PointId, a: PointId, b: PointId, image: f64, needed: f64 },
    #[error(
        "chart at {center} expands pair ({a},{b}) beyond distortion: {image} > {allowed}"
    )]
    ChartExpansionExceeded { center: PointId, a: PointId, b: PointId, image: f64, allowed: f64 },
    #[error("chart at {center} maps into R^{got}, expected R^{expected}")]
    ChartDimMismatch { center: PointId, got: usize, expected: usize },
    #[error("provider returned a chart centered at {got} for point {requested}")]
    ChartCenterMismatch { requested: PointId, got: PointId },
    #[error("chart provider failed for {center}: {reason}")]
    Provider { center: PointId, reason: String },
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

/// A nonnegative `gamma`-Lipschitz function on a space, one value per point.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleFunction {
    values: Vec<f64>,
    gamma: f64,
}

impl ScaleFunction {
    /// Validates nonnegativity and the `gamma`-Lipschitz property (relative
    /// slack `METRIC_SLACK`).
    pub fn new(
        space: &FiniteMetricSpace,
        values: Vec<f64>,
        gamma: f64,
    ) -> Result<Self, AssouadError> {
        if values.len() != space.len() {
            return Err(AssouadError::ScaleValueCount { got: values.len(), expected: space.len() });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(AssouadError::ScaleValueInvalid { point: PointId(i), value: v });
            }
        }
        for a in space.points() {
            for b in space.points().skip(a.0 + 1) {
                let gap = (values[a.0] - values[b.0]).abs();
                let allowed = gamma * space.d(a, b);
                if gap > allowed * (1.0 + METRIC_SLACK) {
                    return Err(AssouadError::ScaleNotLipschitz { a, b, gamma, gap, allowed });
                }
            }
        }
        Ok(ScaleFunction { values, gamma })
    }

    pub fn value(&self, p: PointId) -> f64 {
        self.values[p.0]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Points where the function vanishes.
    pub fn zero_set(&self) -> SubsetRef {
        SubsetRef::from_indices(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == 0.0)
                .map(|(i, _)| i),
        )
    }
}

/// `f(x) = theta * d(x, y)`: the distance to `y` scaled by `theta`. Since
/// `theta <= 1` the result is 1-Lipschitz; gamma is recorded as 1.
pub fn build_scale_function(
    space: &FiniteMetricSpace,
    y: &SubsetRef,
    theta: f64,
) -> ScaleFunction {
    assert!(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
    assert!(!y.is_empty(), "base set must be nonempty");
    let values = space
        .points()
        .map(|p| theta * space.dist_to_set(p, y))
        .collect();
    ScaleFunction { values, gamma: 1.0 }
}

/// Greedy maximal `2^k/10`-separated net of the dyadic band
/// `{x : 2^k <= f(x) <= 2^(k+2)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleNet {
    pub k: i32,
    pub members: SubsetRef,
}

#[inline]
fn pow2(k: i32) -> f64 {
    2.0f64.powi(k)
}

/// Largest `e` with `2^e <= v`, robust against log rounding at powers of 2.
fn floor_log2(v: f64) -> i32 {
    debug_assert!(v > 0.0 && v.is_finite());
    let mut e = v.log2().floor() as i32;
    while pow2(e) > v {
        e -= 1;
    }
    while pow2(e + 1) <= v {
        e += 1;
    }
    e
}

/// Builds one net per nonempty dyadic band of `f`, in ascending band order.
/// A point with `f(x) > 0` belongs to band `k` exactly when
/// `2^k <= f(x) <= 2^(k+2)` (two or three consecutive bands); points with
/// `f(x) = 0` belong to none. Net members are chosen greedily in ascending
/// id order, so each net is `2^k/10`-separated and maximal in its band.
pub fn build_scale_nets(space: &FiniteMetricSpace, f: &ScaleFunction) -> Vec<ScaleNet> {
    let mut bands: BTreeMap<i32, Vec<PointId>> = BTreeMap::new();
    for p in space.points() {
        let v = f.value(p);
        if v == 0.0 {
            continue;
        }
        let e = floor_log2(v);
        for k in (e - 2)..=e {
            if pow2(k) <= v && v <= pow2(k + 2) {
                bands.entry(k).or_default().push(p);
            }
        }
    }
    bands
        .into_iter()
        .map(|(k, members)| {
            let band = SubsetRef::new(members);
            let net = crate::metric::greedy_maximal_separated(space, &band, pow2(k) / 10.0);
            ScaleNet { k, members: net }
        })
        .collect()
}

/// Nets plus a conflict coloring: members of the same net sharing a color
/// are at least `10 * 2^k * zeta` apart.
#[derive(Clone, Debug, PartialEq)]
pub struct ColoredScaleNets {
    pub nets: Vec<ScaleNet>,
    colors: BTreeMap<(i32, PointId), usize>,
    /// Number of colors used; 0 when there are no nets.
    pub palette: usize,
    /// `ceil(lambda^(2 + log2(100*zeta)))` when a doubling estimate was
    /// supplied; the greedy palette is expected to stay within it.
    pub palette_bound: Option<f64>,
}

impl ColoredScaleNets {
    /// Color of a net member (1-based).
    pub fn color(&self, k: i32, x: PointId) -> Option<usize> {
        self.colors.get(&(k, x)).copied()
    }

    /// True when the greedy palette exceeded the supplied doubling bound.
    pub fn palette_exceeds_bound(&self) -> bool {
        self.palette_bound
            .is_some_and(|b| (self.palette as f64) > b)
    }
}

/// Greedily colors each net in ascending id order: a member takes the
/// smallest positive color not used by an earlier same-net member closer
/// than `10 * 2^k * zeta`. When a doubling estimate `lambda` is supplied the
/// expected palette bound is recorded so callers can warn if the greedy
/// palette exceeds it (it cannot fail, only grow).
pub fn color_nets(
    space: &FiniteMetricSpace,
    nets: &[ScaleNet],
    zeta: f64,
    lambda: Option<usize>,
) -> ColoredScaleNets {
    assert!(zeta >= 1.0, "zeta must be at least 1");
    let mut colors: BTreeMap<(i32, PointId), usize> = BTreeMap::new();
    let mut palette = 0usize;
    for net in nets {
        let conflict_r = 10.0 * pow2(net.k) * zeta;
        let members = net.members.members();
        for (i, &x) in members.iter().enumerate() {
            let used: Vec<usize> = members[..i]
                .iter()
                .filter(|&&y| space.d(x, y) < conflict_r)
                .map(|&y| colors[&(net.k, y)])
                .collect();
            let mut c = 1usize;
            while used.contains(&c) {
                c += 1;
            }
            colors.insert((net.k, x), c);
            palette = palette.max(c);
        }
    }
    let palette_bound =
        lambda.map(|l| (l as f64).powf(2.0 + (100.0 * zeta).log2()).ceil());
    ColoredScaleNets { nets: nets.to_vec(), colors, palette, palette_bound }
}

/// Scale-separation modulus: bands whose indices agree mod `M` but differ
/// are at least `M` apart, which keeps far-scale same-color bumps from
/// interfering. `M = max{8, ceil(log2(440 * d_cap * sqrt(nbar+1)))}`.
pub fn modulus(d_cap: f64, nbar: usize) -> u32 {
    assert!(d_cap >= 1.0, "distortion bound must be at least 1");
    assert!(nbar >= 1, "chart dimension must be at least 1");
    let m = (440.0 * d_cap * ((nbar + 1) as f64).sqrt()).log2().ceil();
    (m as u32).max(8)
}

/// A bounded-distortion map of a ball around `center` into `R^dim`.
/// The map's recorded scale may be arbitrary; consumers normalize via
/// [`PointMap::rescaled_to_unit`] so that non-contraction holds at scale 1.
#[derive(Clone, Debug)]
pub struct LocalChart {
    pub center: PointId,
    pub radius: f64,
    pub map: PointMap,
}

impl LocalChart {
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn distortion(&self) -> f64 {
        self.map.claimed_distortion()
    }
}

/// Supplies a local chart of radius at least `f(x)` around any requested
/// point. Implementations must be `Sync`: charts are requested in parallel.
pub trait ChartProvider: Sync {
    fn chart(&self, x: PointId) -> Result<LocalChart, AssouadError>;
}

impl<F> ChartProvider for F
where
    F: Fn(PointId) -> Result<LocalChart, AssouadError> + Sync,
{
    fn chart(&self, x: PointId) -> Result<LocalChart, AssouadError> {
        self(x)
    }
}

/// Orthonormal basis of the hyperplane `{sum of coordinates = 0}` in
/// `R^(nbar+1)`, as `nbar` columns, built by Gram-Schmidt over the
/// difference vectors `e_i - e_(i+1)` in index order. Deterministic.
pub fn hyperplane_isometry(nbar: usize) -> Vec<Vec<f64>> {
    let dim = nbar + 1;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(nbar);
    for i in 0..nbar {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v[i + 1] = -1.0;
        for q in &cols {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        let len = norm(&v);
        for vi in &mut v {
            *vi /= len;
        }
        cols.push(v);
    }
    cols
}

/// Applies the column basis to `v`: the image of `v` under the isometry
/// into the zero-sum hyperplane.
fn apply_isometry(cols: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let dim = cols.first().map_or(1, |c| c.len());
    let mut out = vec![0.0; dim];
    for (vi, q) in v.iter().zip(cols) {
        for (o, qi) in out.iter_mut().zip(q) {
            *o += vi * qi;
        }
    }
    out
}

/// Builds the bump map of a net point `x` at band `k` from a unit-scale
/// chart: on the closed ball of radius `2^(k-1)` the map is
/// `c + A(psi(z) - psi(x))` with `A` the hyperplane isometry and
/// `c = (2^k/sqrt(nbar+1)) * (1,..,1)`, so values live in the affine
/// hyperplane with coordinate sum `2^k * sqrt(nbar+1)` and `x` itself maps
/// to a vector of norm `2^k`; outside the closed ball of radius
/// `(11/10)*2^(k-1)` the map is zero; the gap is filled per coordinate by
/// McShane extension with constant `40*d_cap`, making the whole map
/// `40*d_cap*sqrt(nbar+1)`-Lipschitz.
///
/// Preconditions checked here: the chart covers the inner ball, and on
/// inner-ball pairs it neither contracts (scale 1) nor expands beyond
/// `d_cap`.
pub fn build_bump_chart(
    space: &FiniteMetricSpace,
    x: PointId,
    k: i32,
    chart: &LocalChart,
    d_cap: f64,
) -> Result<PointMap, AssouadError> {
    assert_eq!(chart.center, x, "bump chart needs a chart centered at its net point");
    assert!(
        chart.map.scale() == 1.0,
        "bump charts require unit-scale charts; normalize first"
    );
    let nbar = chart.dim();
    let r_inner = pow2(k - 1);
    let r_support = 1.1 * pow2(k - 1);
    if chart.radius < r_inner {
        return Err(AssouadError::ChartTooSmall {
            center: x,
            radius: chart.radius,
            required: r_inner,
        });
    }
    let inner = space.ball(x, r_inner, BallKind::Closed);
    for z in inner.iter() {
        if chart.map.value(z).is_none() {
            return Err(AssouadError::ChartTooSmall {
                center: x,
                radius: chart.radius,
                required: space.d(x, z),
            });
        }
    }
    // Bi-Lipschitz certificate on the pairs the bump actually uses.
    for (i, a) in inner.iter().enumerate() {
        for b in inner.iter().skip(i + 1) {
            let d = space.d(a, b);
            let image = euclidean(chart.map.value(a).unwrap(), chart.map.value(b).unwrap());
            if image < d * (1.0 - PROOF_SLACK) {
                return Err(AssouadError::ChartNotNoncontracting {
                    center: x,
                    a,
                    b,
                    image,
                    needed: d,
                });
            }
            if image > d_cap * d * (1.0 + PROOF_SLACK) {
                return Err(AssouadError::ChartExpansionExceeded {
                    center: x,
                    a,
                    b,
                    image,
                    allowed: d_cap * d,
                });
            }
        }
    }
    let cols = hyperplane_isometry(nbar);
    let c = pow2(k) / ((nbar + 1) as f64).sqrt();
    let psi_x = chart.map.value(x).expect("center lies in its own inner ball");
    let psi_x = psi_x.to_vec();
    let mut members: Vec<PointId> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for z in space.points() {
        let dz = space.d(x, z);
        if dz <= r_inner {
            let psi_z = chart.map.value(z).unwrap();
            let diff: Vec<f64> = psi_z.iter().zip(&psi_x).map(|(a, b)| a - b).collect();
            let mut v = apply_isometry(&cols, &diff);
            for vi in &mut v {
                *vi += c;
            }
            members.push(z);
            values.push(v);
        } else if dz > r_support {
            members.push(z);
            values.push(vec![0.0; nbar + 1]);
        }
    }
    let partial = PointMap::new(SubsetRef::new(members), nbar + 1, values, 1.0, 1.0)?;
    Ok(mcshane_extend(space, &partial, 40.0 * d_cap)?)
}

/// One bump map with its block key.
#[derive(Clone, Debug)]
pub struct BumpChart {
    pub k: i32,
    pub center: PointId,
    pub color: usize,
    pub map: PointMap,
}

impl BumpChart {
    /// Points where the bump is nonzero.
    pub fn support(&self) -> SubsetRef {
        SubsetRef::new(
            self.map
                .iter()
                .filter(|(_, v)| v.iter().any(|&c| c != 0.0))
                .map(|(p, _)| p)
                .collect(),
        )
    }
}

/// The assembled map with everything needed to audit it.
#[derive(Clone, Debug)]
pub struct AssembledPhi {
    /// Total map into `R^((nbar+1)*M*j)`. Its recorded scale and distortion
    /// are placeholders: the real guarantees are the methods below.
    pub map: PointMap,
    pub colored: ColoredScaleNets,
    pub modulus: u32,
    pub nbar: usize,
    pub d_cap: f64,
    pub zeta: f64,
    pub bumps: Vec<BumpChart>,
}

impl AssembledPhi {
    /// Width of one block: `nbar + 1`.
    pub fn block_width(&self) -> usize {
        self.nbar + 1
    }

    /// Number of blocks: `M * j`.
    pub fn block_count(&self) -> usize {
        self.modulus as usize * self.colored.palette
    }

    /// Flat block index of a (band, color) key.
    pub fn block_index(&self, k: i32, color: usize) -> usize {
        let residue = k.rem_euclid(self.modulus as i32) as usize;
        residue * self.colored.palette + (color - 1)
    }

    /// Guaranteed Lipschitz constant: `110 * d_cap * sqrt((nbar+1)*M*j)`.
    pub fn lipschitz_bound(&self) -> f64 {
        110.0 * self.d_cap * (((self.nbar + 1) * self.block_count()) as f64).sqrt()
    }

    /// Per-block Lipschitz constant: `110 * d_cap * sqrt(nbar+1)`.
    pub fn block_lipschitz_bound(&self) -> f64 {
        110.0 * self.d_cap * ((self.nbar + 1) as f64).sqrt()
    }

    /// Guaranteed expansion of pairs with `d <= zeta * max{f}`: `9/(40*zeta)`.
    pub fn near_colipschitz_bound(&self) -> f64 {
        9.0 / (40.0 * self.zeta)
    }

    /// Euclidean norms of the per-block slices of the value at `z`.
    pub fn block_norms(&self, z: PointId) -> Vec<f64> {
        let w = self.block_width();
        let v = self.map.value(z).expect("assembled map is total");
        (0..self.block_count())
            .map(|b| norm(&v[b * w..(b + 1) * w]))
            .collect()
    }
}

/// Assembles `Phi` from the scale function and a chart provider.
///
/// Requires `zeta >= 1`, `gamma = 1`, `d_cap >= 1`, `nbar >= 1`, and charts
/// of dimension `nbar` with radius at least `f(x)` at every net point. The
/// output dimension is exactly `(nbar+1) * M * j` with `M` the modulus and
/// `j` the greedy palette size (0 when `f` vanishes identically, making the
/// map empty); blocks with no bumps are emitted as zeros.
pub fn assemble_phi(
    space: &FiniteMetricSpace,
    f: &ScaleFunction,
    provider: &dyn ChartProvider,
    d_cap: f64,
    nbar: usize,
    zeta: f64,
    lambda: Option<usize>,
) -> Result<AssembledPhi, AssouadError> {
    assert!(zeta >= 1.0, "zeta must be at least 1");
    assert!(f.gamma() == 1.0, "scale functions enter at gamma = 1; rescale first");
    let nets = build_scale_nets(space, f);
    let colored = color_nets(space, &nets, zeta, lambda);
    let m = modulus(d_cap, nbar);
    let keys: Vec<(i32, PointId)> = colored
        .nets
        .iter()
        .flat_map(|net| net.members.iter().map(move |x| (net.k, x)))
        .collect();
    let built: Vec<Result<BumpChart, AssouadError>> = keys
        .par_iter()
        .map(|&(k, x)| -> Result<BumpChart, AssouadError> {
            let chart = provider.chart(x)?;
            if chart.center != x {
                return Err(AssouadError::ChartCenterMismatch { requested: x, got: chart.center });
            }
            if chart.dim() != nbar {
                return Err(AssouadError::ChartDimMismatch {
                    center: x,
                    got: chart.dim(),
                    expected: nbar,
                });
            }
            let fx = f.value(x);
            if chart.radius < fx {
                return Err(AssouadError::ChartTooSmall {
                    center: x,
                    radius: chart.radius,
                    required: fx,
                });
            }
            let unit = LocalChart {
                center: chart.center,
                radius: chart.radius,
                map: chart.map.rescaled_to_unit(),
            };
            let map = build_bump_chart(space, x, k, &unit, d_cap)?;
            let color = colored.color(k, x).expect("net members are colored");
            Ok(BumpChart { k, center: x, color, map })
        })
        .collect();
    // Ordered collect + sequential unwrap: the reported error is always the
    // one at the smallest (band, center) key, independent of thread timing.
    let bumps: Vec<BumpChart> = built.into_iter().collect::<Result<_, _>>()?;

    let width = nbar + 1;
    let palette = colored.palette;
    let total_dim = width * m as usize * palette;
    let mut values: Vec<Vec<f64>> = vec![vec![0.0; total_dim]; space.len()];
    for bump in &bumps {
        let residue = bump.k.rem_euclid(m as i32) as usize;
        let offset = (residue * palette + (bump.color - 1)) * width;
        for (z, v) in bump.map.iter() {
            for (i, &vi) in v.iter().enumerate() {
                values[z.0][offset + i] += vi;
            }
        }
    }
    let map = PointMap::new(space.all(), total_dim, values, 1.0, 1.0)?;
    Ok(AssembledPhi { map, colored, modulus: m, nbar, d_cap, zeta, bumps })
}

/// Re-checks the three conclusions of the construction plus the support
/// separation claim, through the uniform inequality gate.
pub fn audit_assembled(
    space: &FiniteMetricSpace,
    f: &ScaleFunction,
    phi: &AssembledPhi,
) -> Vec<CheckRecord> {
    let mut checks = Vec::new();

    // Phi vanishes exactly where f does.
    let worst_zero = f
        .zero_set()
        .iter()
        .map(|p| norm(phi.map.value(p).unwrap()))
        .fold(0.0, f64::max);
    checks.push(check_inequality("phi-zero-on-zero-set", 0.0, worst_zero, Direction::AtMost));

    // Per-block and global Lipschitz constants.
    let width = phi.block_width();
    let mut worst_block = 0.0f64;
    let mut worst_global = 0.0f64;
    for a in space.points() {
        for b in space.points().skip(a.0 + 1) {
            let d = space.d(a, b);
            let va = phi.map.value(a).unwrap();
            let vb = phi.map.value(b).unwrap();
            worst_global = worst_global.max(euclidean(va, vb) / d);
            for blk in 0..phi.block_count() {
                let s = blk * width;
                let gap = euclidean(&va[s..s + width], &vb[s..s + width]);
                worst_block = worst_block.max(gap / d);
            }
        }
    }
    checks.push(check_inequality(
        "block-lipschitz-max",
        phi.block_lipschitz_bound(),
        worst_block,
        Direction::AtMost,
    ));
    checks.push(check_inequality(
        "phi-lipschitz",
        phi.lipschitz_bound(),
        worst_global,
        Direction::AtMost,
    ));

    // Expansion of near pairs.
    let mut min_near = f64::INFINITY;
    for a in space.points() {
        for b in space.points().skip(a.0 + 1) {
            let d = space.d(a, b);
            if d <= phi.zeta * f.value(a).max(f.value(b)) {
                min_near = min_near.min(phi.map.image_distance(a, b).unwrap() / d);
            }
        }
    }
    checks.push(check_inequality(
        "phi-near-colipschitz",
        phi.near_colipschitz_bound(),
        min_near,
        Direction::AtLeast,
    ));

    // Same-block bumps with distinct centers keep their supports
    // 2/5 * 2^max(k1,k2) apart.
    let supports: Vec<SubsetRef> = phi.bumps.iter().map(|b| b.support()).collect();
    let mut min_sep = f64::INFINITY;
    for (i, b1) in phi.bumps.iter().enumerate() {
        for (jj, b2) in phi.bumps.iter().enumerate().skip(i + 1) {
            if b1.center == b2.center && b1.k == b2.k {
                continue;
            }
            if phi.block_index(b1.k, b1.color) != phi.block_index(b2.k, b2.color) {
                continue;
            }
            let scale = pow2(b1.k.max(b2.k));
            for z1 in supports[i].iter() {
                for z2 in supports[jj].iter() {
                    min_sep = min_sep.min(space.d(z1, z2) / scale);
                }
            }
        }
    }
    checks.push(check_inequality("support-separation", 0.4, min_sep, Direction::AtLeast));
    checks
}
