//! Measurement and verification.
//!
//! [`distortion_audit`] measures the exact Lipschitz and co-Lipschitz
//! constants of a map by exhaustive pair scan and reports witnesses.
//! [`check_inequality`] is the single gate through which every quantitative
//! bound in the library is asserted, so reports stay uniform and
//! machine-diffable: a named bound, a measured value, a direction, and a
//! pass flag at relative slack [`PROOF_SLACK`].

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::extension::PointMap;
use crate::metric::{FiniteMetricSpace, PointId};
use crate::PROOF_SLACK;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum AuditError {
    #[error("distortion audit needs at least two domain points, got {0}")]
    DegenerateDomain(usize),
}

/// Direction of a checked inequality: is `measured` required to stay at or
/// above the bound, or at or below it?
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtLeast,
    AtMost,
}

/// One named, checked inequality.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub bound: f64,
    pub measured: f64,
    pub direction: Direction,
    pub pass: bool,
}

/// Checks `measured` against `bound` in the given direction with relative
/// slack [`PROOF_SLACK`] (`measured >= bound - slack*|bound|` or the mirror
/// image). Equality always passes.
pub fn check_inequality(
    name: impl Into<String>,
    bound: f64,
    measured: f64,
    direction: Direction,
) -> CheckRecord {
    let give = PROOF_SLACK * bound.abs();
    let pass = match direction {
        Direction::AtLeast => measured >= bound - give,
        Direction::AtMost => measured <= bound + give,
    };
    CheckRecord { name: name.into(), bound, measured, direction, pass }
}

/// Measured bi-Lipschitz data of a map, with extremal witnesses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    /// Max over domain pairs of `|f(a)-f(b)| / d(a,b)`.
    pub lipschitz: f64,
    /// Min over domain pairs of the same ratio.
    pub colipschitz: f64,
    /// `lipschitz / colipschitz`; infinite when the map collapses a pair.
    pub distortion: f64,
    pub witness_max: (PointId, PointId),
    pub witness_min: (PointId, PointId),
    /// Named bound checks appended by callers.
    pub checks: Vec<CheckRecord>,
}

/// Exhaustively measures the distortion of `map` over its domain. The scan
/// is split by rows and merged in row order, so results (including witness
/// pairs, which are the first pair attaining each extreme in row-major
/// order) are identical to a plain nested loop, bitwise.
pub fn distortion_audit(
    space: &FiniteMetricSpace,
    map: &PointMap,
) -> Result<AuditReport, AuditError> {
    let dom = map.domain().members();
    if dom.len() < 2 {
        return Err(AuditError::DegenerateDomain(dom.len()));
    }
    struct RowExtremes {
        max: f64,
        max_pair: (PointId, PointId),
        min: f64,
        min_pair: (PointId, PointId),
    }
    let rows: Vec<Option<RowExtremes>> = dom
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut out: Option<RowExtremes> = None;
            for &b in dom.iter().skip(i + 1) {
                let ratio = map.image_distance(a, b).unwrap() / space.d(a, b);
                match &mut out {
                    None => {
                        out = Some(RowExtremes {
                            max: ratio,
                            max_pair: (a, b),
                            min: ratio,
                            min_pair: (a, b),
                        })
                    }
                    Some(e) => {
                        if ratio > e.max {
                            e.max = ratio;
                            e.max_pair = (a, b);
                        }
                        if ratio < e.min {
                            e.min = ratio;
                            e.min_pair = (a, b);
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut lipschitz = f64::NEG_INFINITY;
    let mut colipschitz = f64::INFINITY;
    let mut witness_max = (dom[0], dom[1]);
    let mut witness_min = (dom[0], dom[1]);
    for e in rows.into_iter().flatten() {
        if e.max > lipschitz {
            lipschitz = e.max;
            witness_max = e.max_pair;
        }
        if e.min < colipschitz {
            colipschitz = e.min;
            witness_min = e.min_pair;
        }
    }
    let distortion = if colipschitz > 0.0 { lipschitz / colipschitz } else { f64::INFINITY };
    Ok(AuditReport { lipschitz, colipschitz, distortion, witness_max, witness_min, checks: Vec::new() })
}
