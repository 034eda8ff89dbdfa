//! Lipschitz maps into Euclidean space and their extension.
//!
//! [`PointMap`] is the common currency of the library: a map from (a subset
//! of) a space into `R^m` together with its recorded scale `s` and claimed
//! distortion `D`. A map flagged verified promises
//! `s*d(x,y) <= |f(x)-f(y)| <= D*s*d(x,y)` on its domain (up to the library
//! proof slack).
//!
//! [`mcshane_extend`] extends a map whose coordinates are L-Lipschitz on a
//! subset to the whole space via the lower inf-convolution
//! `F_i(x) = min_y (f_i(y) + L*d(x,y))`, which preserves the per-coordinate
//! constant and therefore costs at most a `sqrt(m)` factor overall.

use thiserror::Error;

use crate::metric::{FiniteMetricSpace, PointId, SubsetRef};
use crate::{METRIC_SLACK, PROOF_SLACK};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("domain has {domain} members but {values} value rows")]
    ValueCountMismatch { domain: usize, values: usize },
    #[error("value row for {point} has {got} coordinates, expected {expected}")]
    DimMismatch { point: PointId, got: usize, expected: usize },
    #[error("scale must be positive, got {0}")]
    NonpositiveScale(f64),
    #[error("claimed distortion must be >= 1, got {0}")]
    DistortionBelowOne(f64),
    #[error("non-finite coordinate for {point}")]
    NonFiniteValue { point: PointId },
    #[error(
        "coordinate {coordinate} is not Lipschitz at the required constant on \
         the domain: |f({a}) - f({b})| = {gap} > {allowed}"
    )]
    CoordinateNotLipschitz {
        coordinate: usize,
        a: PointId,
        b: PointId,
        gap: f64,
        allowed: f64,
    },
    #[error("lipschitz constant must be positive, got {0}")]
    NonpositiveLipschitz(f64),
}

/// A map from a subset of a space into `R^m`, with recorded constants.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMap {
    domain: SubsetRef,
    dim: usize,
    /// One row per domain member, in domain order.
    values: Vec<Vec<f64>>,
    scale: f64,
    claimed_distortion: f64,
    verified: bool,
}

impl PointMap {
    /// Builds a map and checks shape: one value row of length `dim` per
    /// domain member, finite entries, `scale > 0`, `claimed_distortion >= 1`.
    pub fn new(
        domain: SubsetRef,
        dim: usize,
        values: Vec<Vec<f64>>,
        scale: f64,
        claimed_distortion: f64,
    ) -> Result<Self, ExtensionError> {
        if values.len() != domain.len() {
            return Err(ExtensionError::ValueCountMismatch {
                domain: domain.len(),
                values: values.len(),
            });
        }
        for (i, row) in values.iter().enumerate() {
            let point = domain.members()[i];
            if row.len() != dim {
                return Err(ExtensionError::DimMismatch { point, got: row.len(), expected: dim });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(ExtensionError::NonFiniteValue { point });
            }
        }
        if !(scale > 0.0) {
            return Err(ExtensionError::NonpositiveScale(scale));
        }
        if !(claimed_distortion >= 1.0) {
            return Err(ExtensionError::DistortionBelowOne(claimed_distortion));
        }
        Ok(PointMap { domain, dim, values, scale, claimed_distortion, verified: false })
    }

    pub fn domain(&self) -> &SubsetRef {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn claimed_distortion(&self) -> f64 {
        self.claimed_distortion
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    pub fn set_verified(&mut self, v: bool) {
        self.verified = v;
    }

    /// Value at `p`, if `p` is in the domain.
    pub fn value(&self, p: PointId) -> Option<&[f64]> {
        self.domain.position(p).map(|i| self.values[i].as_slice())
    }

    /// (point, value) pairs in domain order.
    pub fn iter(&self) -> impl Iterator<Item = (PointId, &[f64])> {
        self.domain
            .iter()
            .zip(self.values.iter().map(|v| v.as_slice()))
    }

    pub fn is_total(&self, space: &FiniteMetricSpace) -> bool {
        self.domain.len() == space.len()
    }

    /// Euclidean distance between the images of two domain points.
    pub fn image_distance(&self, a: PointId, b: PointId) -> Option<f64> {
        let va = self.value(a)?;
        let vb = self.value(b)?;
        Some(euclidean(va, vb))
    }

    /// Concatenates coordinates of two maps over the identical domain.
    /// The caller supplies the constants of the combined map.
    pub fn concat(
        &self,
        other: &PointMap,
        scale: f64,
        claimed_distortion: f64,
    ) -> Result<PointMap, ExtensionError> {
        assert_eq!(
            self.domain, other.domain,
            "concat requires identical domains"
        );
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.iter().chain(b.iter()).copied().collect())
            .collect();
        PointMap::new(
            self.domain.clone(),
            self.dim + other.dim,
            values,
            scale,
            claimed_distortion,
        )
    }

    /// The same map with every value divided by its scale, so the recorded
    /// scale becomes 1 and the claimed distortion is unchanged.
    pub fn rescaled_to_unit(&self) -> PointMap {
        let values = self
            .values
            .iter()
            .map(|row| row.iter().map(|v| v / self.scale).collect())
            .collect();
        PointMap {
            domain: self.domain.clone(),
            dim: self.dim,
            values,
            scale: 1.0,
            claimed_distortion: self.claimed_distortion,
            verified: self.verified,
        }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Extends `partial` to the whole space, coordinate by coordinate, via
/// `F_i(x) = min over domain y of (f_i(y) + lip * d(x,y))`.
///
/// Each coordinate is first checked to be `lip`-Lipschitz on the domain
/// (relative slack `METRIC_SLACK`); the witness pair and coordinate are
/// reported on failure. On domain points the input values are copied
/// bitwise, which agrees with the formula in exact arithmetic. Each output
/// coordinate is again `lip`-Lipschitz (a minimum of `lip`-Lipschitz cone
/// functions), so the extension is `sqrt(m)*lip`-Lipschitz overall. The
/// recorded scale and distortion are carried over from `partial` and
/// describe its restriction to the original domain, not the whole space;
/// the verified flag is cleared.
pub fn mcshane_extend(
    space: &FiniteMetricSpace,
    partial: &PointMap,
    lip: f64,
) -> Result<PointMap, ExtensionError> {
    if !(lip > 0.0) {
        return Err(ExtensionError::NonpositiveLipschitz(lip));
    }
    let dom = partial.domain().members();
    for (i, &a) in dom.iter().enumerate() {
        for &b in dom.iter().skip(i + 1) {
            let d = space.d(a, b);
            let allowed = lip * d;
            for c in 0..partial.dim() {
                let gap = (partial.value(a).unwrap()[c] - partial.value(b).unwrap()[c]).abs();
                if gap > allowed * (1.0 + METRIC_SLACK) {
                    return Err(ExtensionError::CoordinateNotLipschitz {
                        coordinate: c,
                        a,
                        b,
                        gap,
                        allowed,
                    });
                }
            }
        }
    }
    let values: Vec<Vec<f64>> = space
        .points()
        .map(|x| match partial.value(x) {
            Some(v) => v.to_vec(),
            None => (0..partial.dim())
                .map(|c| {
                    partial
                        .iter()
                        .map(|(y, vy)| vy[c] + lip * space.d(x, y))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect(),
        })
        .collect();
    PointMap::new(
        space.all(),
        partial.dim(),
        values,
        partial.scale(),
        partial.claimed_distortion(),
    )
}

/// Co-Lipschitz report for far pairs of an extended map.
#[derive(Clone, Debug, PartialEq)]
pub struct FarPairReport {
    /// Pairs with `d(x1,x2) > kappa * nu * max{d(x1,Y), d(x2,Y)}`.
    pub qualifying_pairs: usize,
    /// Min over qualifying pairs of `|F(x1)-F(x2)| / (s * d(x1,x2))`;
    /// infinite when no pair qualifies.
    pub min_ratio: f64,
    pub witness: Option<(PointId, PointId)>,
    /// The guaranteed lower bound `1 - 2/(kappa*nu) - 2*distortion/kappa`.
    pub bound: f64,
    /// Whether `min_ratio` clears `bound` at the proof slack (vacuously true
    /// with no qualifying pairs).
    pub holds: bool,
}

/// Scans all pairs of a total map `extended` that lie far from the original
/// domain `y`, relative to `kappa * nu` times their distance to `y`, and
/// reports the worst co-Lipschitz ratio against the guaranteed bound
/// `1 - 2/(kappa*nu) - 2*distortion/kappa`. With `nu = sqrt(m)` and
/// `kappa = 5*distortion` the bound is at least 1/5.
pub fn far_pair_colipschitz_report(
    space: &FiniteMetricSpace,
    extended: &PointMap,
    y: &SubsetRef,
    scale: f64,
    distortion: f64,
    nu: f64,
    kappa: f64,
) -> FarPairReport {
    assert!(extended.is_total(space), "far-pair scan needs a total map");
    assert!(!y.is_empty(), "far-pair scan needs a nonempty base set");
    let to_y: Vec<f64> = space.points().map(|p| space.dist_to_set(p, y)).collect();
    let bound = 1.0 - 2.0 / (kappa * nu) - 2.0 * distortion / kappa;
    let mut qualifying = 0usize;
    let mut min_ratio = f64::INFINITY;
    let mut witness = None;
    for a in space.points() {
        for b in space.points().skip(a.0 + 1) {
            let d = space.d(a, b);
            if d > kappa * nu * to_y[a.0].max(to_y[b.0]) {
                qualifying += 1;
                let ratio = extended.image_distance(a, b).unwrap() / (scale * d);
                if ratio < min_ratio {
                    min_ratio = ratio;
                    witness = Some((a, b));
                }
            }
        }
    }
    let holds = qualifying == 0 || min_ratio >= bound - PROOF_SLACK * bound.abs();
    FarPairReport { qualifying_pairs: qualifying, min_ratio, witness, bound, holds }
}
