//! End-to-end embedding pipelines.
//!
//! [`embed`] turns a space that is free of k-point SRA(alpha) subsets into a
//! bi-Lipschitz map into Euclidean space by recursion on k: the base case
//! (k = 3) maps every point to its distances from a coarse net, and each
//! larger k selects a core subset whose exclusion radii are controlled,
//! embeds the core at (k-1, alpha/2), and extends the core embedding to the
//! whole space with [`extend_embedding`] — a McShane extension concatenated
//! with the layered-net map of the [`crate::assouad`] module, whose bump
//! charts come from the critical-radius witness configurations.
//!
//! Every level re-measures its map and records named inequality checks, so
//! the returned [`Embedding`] carries an audit trail from base to top.

use serde::Serialize;
use thiserror::Error;

use crate::assouad::{
    assemble_phi, audit_assembled, build_scale_function, AssembledPhi, AssouadError,
    ChartProvider, LocalChart,
};
use crate::audit::{check_inequality, distortion_audit, AuditError, CheckRecord, Direction};
use crate::extension::{
    euclidean, far_pair_colipschitz_report, mcshane_extend, ExtensionError, PointMap,
};
use crate::metric::{
    greedy_maximal_separated, BallKind, FiniteMetricSpace, PointId, SubsetRef,
};
use crate::sra::{
    build_core_subset, find_sra_subspace, subset_is_sra, CriticalRadiusEntry, SraError,
    SraParams,
};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PipelineError {
    #[error(
        "space is not free of {k}-point SRA({alpha}) subsets: {witness} satisfies the condition"
    )]
    NotSraFree { k: usize, alpha: f64, witness: SubsetRef },
    #[error("configuration has {got} points, expected {expected}")]
    ConfigWrongSize { got: usize, expected: usize },
    #[error("configuration does not contain its chart center {center}")]
    ConfigMissingCenter { center: PointId },
    #[error("configuration is not SRA({alpha})")]
    ConfigNotSra { alpha: f64 },
    #[error(transparent)]
    Sra(#[from] SraError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Assouad(#[from] AssouadError),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

/// Embeds a space free of 3-point SRA(alpha) subsets: every point maps to
/// its vector of distances to a greedy maximal `diam/10`-separated net.
/// The recorded scale is `min(1/10, alpha)` and the claimed distortion
/// `sqrt(|net|) * max(10, 1/alpha)`; their product `sqrt(|net|)` is the
/// Lipschitz bound (each coordinate is 1-Lipschitz).
pub fn base_case_embed(
    space: &FiniteMetricSpace,
    alpha: f64,
) -> Result<PointMap, PipelineError> {
    let params = SraParams::new(alpha, 3)?;
    if let Some(witness) = find_sra_subspace(space, params) {
        return Err(PipelineError::NotSraFree { k: 3, alpha, witness });
    }
    let scale = 0.1f64.min(alpha);
    let claimed_per_coord = 10.0f64.max(1.0 / alpha);
    if space.len() == 1 {
        return Ok(PointMap::new(space.all(), 1, vec![vec![0.0]], scale, claimed_per_coord)?);
    }
    let net = greedy_maximal_separated(space, &space.all(), space.diameter() / 10.0);
    let values: Vec<Vec<f64>> = space
        .points()
        .map(|x| net.iter().map(|z| space.d(x, z)).collect())
        .collect();
    let claimed = (net.len() as f64).sqrt() * claimed_per_coord;
    Ok(PointMap::new(space.all(), net.len(), values, scale, claimed)?)
}

/// Builds the local chart of `x` from a configuration of `k-1` points that
/// contains `x` and satisfies the SRA(alpha/2) condition: on the open ball
/// of radius `alpha/6 * R` around `x` (with `R` the configuration's minimum
/// pairwise distance), the chart maps `z` to its distances from the `k-2`
/// other configuration members, in ascending id order. The recorded scale
/// `alpha` and distortion `sqrt(k-2)/alpha` hold whenever the ambient space
/// is free of k-point SRA(alpha) subsets; downstream consumers re-verify
/// them pair by pair on the ball.
pub fn local_chart_from_config(
    space: &FiniteMetricSpace,
    config: &SubsetRef,
    x: PointId,
    alpha: f64,
    k: usize,
) -> Result<LocalChart, PipelineError> {
    assert!(k >= 3, "charts need configurations of at least two points");
    if config.len() != k - 1 {
        return Err(PipelineError::ConfigWrongSize { got: config.len(), expected: k - 1 });
    }
    if !config.contains(x) {
        return Err(PipelineError::ConfigMissingCenter { center: x });
    }
    if !subset_is_sra(space, config, alpha / 2.0) {
        return Err(PipelineError::ConfigNotSra { alpha: alpha / 2.0 });
    }
    let members = config.members();
    let mut r_min = f64::INFINITY;
    for (i, &a) in members.iter().enumerate() {
        for &b in members.iter().skip(i + 1) {
            r_min = r_min.min(space.d(a, b));
        }
    }
    // Same expression shape as the scale function theta * d so that a point
    // at distance exactly R from the core gets a chart of radius exactly
    // its scale value, bitwise.
    let radius = alpha / 6.0 * r_min;
    let ball = space.ball(x, radius, BallKind::Open);
    let anchors: Vec<PointId> = config.iter().filter(|&p| p != x).collect();
    let values: Vec<Vec<f64>> = ball
        .iter()
        .map(|z| anchors.iter().map(|&a| space.d(z, a)).collect())
        .collect();
    let map = PointMap::new(
        ball,
        k - 2,
        values,
        alpha,
        ((k - 2) as f64).sqrt() / alpha,
    )?;
    Ok(LocalChart { center: x, radius, map })
}

/// The result of extending a partial embedding to the whole space.
#[derive(Clone, Debug)]
pub struct Extension {
    /// Total map: McShane-extended coordinates followed by the layered-net
    /// blocks. Its recorded scale is the guaranteed co-Lipschitz constant.
    pub map: PointMap,
    /// The McShane part alone.
    pub mcshane: PointMap,
    /// The layered-net part with its construction data.
    pub assembled: AssembledPhi,
    pub theta: f64,
    pub zeta: f64,
    /// Every inequality the construction promises, re-measured.
    pub checks: Vec<CheckRecord>,
}

/// Extends a bi-Lipschitz map `phi` on `y` to the whole space.
///
/// `phi` must be verified-quality on `y`: scale `s`, distortion `D`, so each
/// coordinate is `s*D`-Lipschitz there. The extension concatenates the
/// McShane extension of `phi` (handles pairs far from `y`) with the
/// layered-net map driven by the scale function `f = theta * d(., y)` and
/// charts from `provider` (handles pairs near `y`, i.e. within `zeta * max
/// f`). The default `zeta = 5*D*sqrt(n)/theta` makes the two regimes meet
/// exactly; overriding it below the default voids the guarantee for pairs
/// in the uncovered gap, which the recorded checks will then expose.
///
/// The combined map is recorded with scale
/// `min(s/5, 9*min(1,s)/(40*zeta))` and Lipschitz constant
/// `sqrt(n*(s*D)^2 + lip(blocks)^2)`.
#[allow(clippy::too_many_arguments)]
pub fn extend_embedding(
    space: &FiniteMetricSpace,
    y: &SubsetRef,
    phi: &PointMap,
    provider: &dyn ChartProvider,
    theta: f64,
    d_chart: f64,
    nbar: usize,
    lambda: Option<usize>,
    zeta_override: Option<f64>,
) -> Result<Extension, PipelineError> {
    assert!(!y.is_empty(), "extension needs a nonempty base set");
    assert_eq!(phi.domain(), y, "phi must be defined exactly on the base set");
    assert!(phi.dim() >= 1, "extension needs at least one coordinate");
    assert!(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
    let s = phi.scale();
    let d_phi = phi.claimed_distortion();
    let n = phi.dim();
    let nu = (n as f64).sqrt();
    let lip_phi = s * d_phi;

    let mcshane = mcshane_extend(space, phi, lip_phi)?;
    let f = build_scale_function(space, y, theta);
    let zeta = zeta_override.unwrap_or(5.0 * d_phi * nu / theta);
    let assembled = assemble_phi(space, &f, provider, d_chart, nbar, zeta, lambda)?;

    let scale = (s / 5.0).min(9.0 * s.min(1.0) / (40.0 * zeta));
    let lip_total = ((nu * lip_phi).powi(2) + assembled.lipschitz_bound().powi(2)).sqrt();
    let map = mcshane.concat(&assembled.map, scale, lip_total / scale)?;

    let mut checks = Vec::new();
    // On the base set the extension reproduces phi exactly (bitwise copy in
    // the McShane part, exact zeros in every block).
    let worst_identity = y
        .iter()
        .map(|p| {
            let full = map.value(p).unwrap();
            let head = euclidean(&full[..n], phi.value(p).unwrap());
            let tail: f64 = full[n..].iter().map(|v| v * v).sum::<f64>().sqrt();
            (head * head + tail * tail).sqrt()
        })
        .fold(0.0, f64::max);
    checks.push(check_inequality("extension-identity", 0.0, worst_identity, Direction::AtMost));

    let far = far_pair_colipschitz_report(space, &mcshane, y, s, d_phi, nu, 5.0 * d_phi);
    checks.push(check_inequality(
        "far-pair-colipschitz",
        far.bound,
        far.min_ratio,
        Direction::AtLeast,
    ));
    checks.extend(audit_assembled(space, &f, &assembled));
    if space.len() >= 2 {
        let mcshane_report = distortion_audit(space, &mcshane)?;
        checks.push(check_inequality(
            "mcshane-lipschitz",
            nu * lip_phi,
            mcshane_report.lipschitz,
            Direction::AtMost,
        ));
        let report = distortion_audit(space, &map)?;
        checks.push(check_inequality(
            "extension-colipschitz",
            scale,
            report.colipschitz,
            Direction::AtLeast,
        ));
        checks.push(check_inequality(
            "extension-lipschitz",
            lip_total,
            report.lipschitz,
            Direction::AtMost,
        ));
    }
    Ok(Extension { map, mcshane, assembled, theta, zeta, checks })
}

/// Which construction produced a level's map.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelKind {
    Base,
    Extension,
}

/// Constants and measurements for one recursion level, base first.
#[derive(Clone, Debug, Serialize)]
pub struct LevelConstants {
    pub kind: LevelKind,
    /// Freeness size at this level.
    pub k: usize,
    pub alpha: f64,
    /// Points of the space embedded at this level.
    pub points: usize,
    /// Target dimension of this level's map.
    pub dim: usize,
    /// Guaranteed co-Lipschitz constant.
    pub scale: f64,
    pub claimed_distortion: f64,
    /// Core subset size (extension levels).
    pub core_points: Option<usize>,
    pub theta: Option<f64>,
    pub zeta: Option<f64>,
    pub modulus: Option<u32>,
    pub palette: Option<usize>,
    /// Measured over all pairs; absent for one-point spaces.
    pub measured_lipschitz: Option<f64>,
    pub measured_colipschitz: Option<f64>,
    pub measured_distortion: Option<f64>,
    pub checks: Vec<CheckRecord>,
}

/// A finished embedding with its per-level audit trail.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub map: PointMap,
    /// One entry per recursion level, deepest (base) first.
    pub levels: Vec<LevelConstants>,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// Guaranteed co-Lipschitz constant of the final map.
    pub fn scale(&self) -> f64 {
        self.map.scale()
    }

    pub fn claimed_distortion(&self) -> f64 {
        self.map.claimed_distortion()
    }

    pub fn all_checks_pass(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.checks.iter().all(|c| c.pass))
    }
}

fn measure(
    space: &FiniteMetricSpace,
    map: &PointMap,
) -> Result<(Option<f64>, Option<f64>, Option<f64>), PipelineError> {
    if space.len() < 2 {
        return Ok((None, None, None));
    }
    let report = distortion_audit(space, map)?;
    Ok((
        Some(report.lipschitz),
        Some(report.colipschitz),
        Some(report.distortion),
    ))
}

/// Serves charts during [`embed`]: excluded points get the chart of their
/// critical-radius witness configuration; core points (radius is irrelevant
/// there — their scale value is zero, so no bump ever requests the chart)
/// get a trivial zero-radius chart.
pub struct WitnessChartProvider<'a> {
    space: &'a FiniteMetricSpace,
    entries: &'a [CriticalRadiusEntry],
    alpha: f64,
    k: usize,
    nbar: usize,
}

impl<'a> WitnessChartProvider<'a> {
    /// `entries` must hold one critical-radius record per point of `space`,
    /// computed at the same `(alpha, k)`.
    pub fn new(
        space: &'a FiniteMetricSpace,
        entries: &'a [CriticalRadiusEntry],
        alpha: f64,
        k: usize,
    ) -> Self {
        assert_eq!(entries.len(), space.len(), "one radius entry per point");
        assert!(k >= 3, "witness configurations need k >= 3");
        WitnessChartProvider { space, entries, alpha, k, nbar: k - 2 }
    }
}

impl ChartProvider for WitnessChartProvider<'_> {
    fn chart(&self, x: PointId) -> Result<LocalChart, AssouadError> {
        match &self.entries[x.0].witness {
            Some(config) if self.entries[x.0].radius > 0.0 => {
                local_chart_from_config(self.space, config, x, self.alpha, self.k).map_err(
                    |e| AssouadError::Provider { center: x, reason: e.to_string() },
                )
            }
            _ => {
                let map = PointMap::new(
                    SubsetRef::new(vec![x]),
                    self.nbar,
                    vec![vec![0.0; self.nbar]],
                    1.0,
                    1.0,
                )
                .expect("trivial chart is well-formed");
                Ok(LocalChart { center: x, radius: 0.0, map })
            }
        }
    }
}

/// Embeds a space free of k-point SRA(alpha) subsets into Euclidean space,
/// recursing on k down to the base case. Freeness is verified at every
/// level (an SRA witness aborts with [`PipelineError::NotSraFree`]); each
/// level's map is measured and its promised inequalities are re-checked.
pub fn embed(
    space: &FiniteMetricSpace,
    k: usize,
    alpha: f64,
) -> Result<Embedding, PipelineError> {
    assert!(k >= 3, "embedding needs k >= 3");
    assert!(!space.is_empty(), "embedding needs a nonempty space");
    let params = SraParams::new(alpha, k)?;
    if let Some(witness) = find_sra_subspace(space, params) {
        return Err(PipelineError::NotSraFree { k, alpha, witness });
    }
    if k == 3 {
        let map = base_case_embed(space, alpha)?;
        let (lip, colip, dist) = measure(space, &map)?;
        let mut checks = Vec::new();
        if let (Some(l), Some(c)) = (lip, colip) {
            checks.push(check_inequality(
                "level-lipschitz",
                map.scale() * map.claimed_distortion(),
                l,
                Direction::AtMost,
            ));
            checks.push(check_inequality("level-colipschitz", map.scale(), c, Direction::AtLeast));
        }
        let level = LevelConstants {
            kind: LevelKind::Base,
            k,
            alpha,
            points: space.len(),
            dim: map.dim(),
            scale: map.scale(),
            claimed_distortion: map.claimed_distortion(),
            core_points: None,
            theta: None,
            zeta: None,
            modulus: None,
            palette: None,
            measured_lipschitz: lip,
            measured_colipschitz: colip,
            measured_distortion: dist,
            checks,
        };
        return Ok(Embedding { map, levels: vec![level] });
    }

    let (core, entries) = build_core_subset(space, params);
    let sub = space.restrict(&core);
    let inner = embed(&sub, k - 1, alpha / 2.0)?;
    // Reindex the recursive map from subspace ids (0..m) back to parent ids:
    // restriction preserves ascending order, so row i belongs to member i.
    let phi_y = PointMap::new(
        core.clone(),
        inner.map.dim(),
        inner.map.iter().map(|(_, v)| v.to_vec()).collect(),
        inner.map.scale(),
        inner.map.claimed_distortion(),
    )?;

    let nbar = k - 2;
    let theta = alpha / 6.0;
    let d_chart = ((k - 2) as f64).sqrt() / alpha;
    let provider = WitnessChartProvider::new(space, &entries, alpha, k);
    let ext = extend_embedding(
        space, &core, &phi_y, &provider, theta, d_chart, nbar, None, None,
    )?;

    let (lip, colip, dist) = measure(space, &ext.map)?;
    let level = LevelConstants {
        kind: LevelKind::Extension,
        k,
        alpha,
        points: space.len(),
        dim: ext.map.dim(),
        scale: ext.map.scale(),
        claimed_distortion: ext.map.claimed_distortion(),
        core_points: Some(core.len()),
        theta: Some(ext.theta),
        zeta: Some(ext.zeta),
        modulus: Some(ext.assembled.modulus),
        palette: Some(ext.assembled.colored.palette),
        measured_lipschitz: lip,
        measured_colipschitz: colip,
        measured_distortion: dist,
        checks: ext.checks,
    };
    let mut levels = inner.levels;
    levels.push(level);
    Ok(Embedding { map: ext.map, levels })
}
