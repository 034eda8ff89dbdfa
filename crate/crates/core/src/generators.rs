//! Deterministic instance generators for tests, benchmarks, and the CLI.
//!
//! Every generator returns a validated [`FiniteMetricSpace`]; randomness
//! comes from a hand-rolled splitmix64 stream so that a (family, parameters,
//! seed) triple produces the same instance on every platform and run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{validate_metric, FiniteMetricSpace, MetricError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum GenError {
    #[error("instance needs at least one point, got n = {0}")]
    EmptyInstance(usize),
    #[error("snowflake exponent must lie in (0, 1], got {0}")]
    InvalidExponent(f64),
    #[error("dimension must be at least 1, got {0}")]
    InvalidDim(usize),
    #[error("family {family} requires the `{field}` parameter")]
    MissingParameter { family: Family, field: &'static str },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// splitmix64: a tiny, well-mixed 64-bit generator. State advances by a
/// fixed odd constant and the output is a finalizer of the state, so any
/// seed gives a full-period, platform-independent stream.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Instance family names as they appear in specs and on the CLI.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Integer points 0..n on the real line.
    Line,
    /// The line with distances raised to a power in (0, 1].
    SnowflakeLine,
    /// Uniform random points in the unit cube with Euclidean distance.
    EuclideanCloud,
    /// An initial segment of the integer grid with the L1 distance.
    GridL1,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Family::Line => "line",
            Family::SnowflakeLine => "snowflake_line",
            Family::EuclideanCloud => "euclidean_cloud",
            Family::GridL1 => "grid_l1",
        };
        f.write_str(name)
    }
}

/// A generator invocation, serializable for reproducibility records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GenSpec {
    pub fn build(&self) -> Result<FiniteMetricSpace, GenError> {
        match self.family {
            Family::Line => line(self.n),
            Family::SnowflakeLine => {
                let e = self.exponent.ok_or(GenError::MissingParameter {
                    family: self.family,
                    field: "exponent",
                })?;
                snowflake_line(self.n, e)
            }
            Family::EuclideanCloud => {
                let dim = self.dim.ok_or(GenError::MissingParameter {
                    family: self.family,
                    field: "dim",
                })?;
                euclidean_cloud(self.n, dim, self.seed.unwrap_or(0))
            }
            Family::GridL1 => {
                let dim = self.dim.ok_or(GenError::MissingParameter {
                    family: self.family,
                    field: "dim",
                })?;
                grid_l1(self.n, dim)
            }
        }
    }
}

/// Points 0, 1, ..., n-1 with `d(i,j) = |i-j|`.
pub fn line(n: usize) -> Result<FiniteMetricSpace, GenError> {
    if n == 0 {
        return Err(GenError::EmptyInstance(0));
    }
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
        .collect();
    Ok(validate_metric(&m, None)?)
}

/// The line with every distance raised to `exponent` in (0, 1]. Raising a
/// metric to a power below 1 keeps the triangle inequality and sharpens
/// triangles, so small exponents produce spaces rich in SRA subsets.
pub fn snowflake_line(n: usize, exponent: f64) -> Result<FiniteMetricSpace, GenError> {
    if n == 0 {
        return Err(GenError::EmptyInstance(0));
    }
    if !(exponent > 0.0 && exponent <= 1.0) {
        return Err(GenError::InvalidExponent(exponent));
    }
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (i as f64 - j as f64).abs().powf(exponent))
                .collect()
        })
        .collect();
    Ok(validate_metric(&m, None)?)
}

/// The coordinates behind [`euclidean_cloud`]: `n` points drawn uniformly
/// from `[0,1)^dim` by a splitmix64 stream seeded with `seed`, row by row.
/// Exposed so callers can build coordinate charts over the same instance.
pub fn cloud_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.next_f64()).collect())
        .collect()
}

/// Euclidean distance matrix of [`cloud_points`].
pub fn euclidean_cloud(n: usize, dim: usize, seed: u64) -> Result<FiniteMetricSpace, GenError> {
    if n == 0 {
        return Err(GenError::EmptyInstance(0));
    }
    if dim == 0 {
        return Err(GenError::InvalidDim(0));
    }
    let pts = cloud_points(n, dim, seed);
    let m: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| pts.iter().map(|b| crate::extension::euclidean(a, b)).collect())
        .collect();
    Ok(validate_metric(&m, None)?)
}

/// The first `n` points of `[0, m)^dim` in row-major order, where `m` is the
/// smallest side with `m^dim >= n`, under the L1 (taxicab) distance.
pub fn grid_l1(n: usize, dim: usize) -> Result<FiniteMetricSpace, GenError> {
    if n == 0 {
        return Err(GenError::EmptyInstance(0));
    }
    if dim == 0 {
        return Err(GenError::InvalidDim(0));
    }
    let mut side = 1usize;
    while side.pow(dim as u32) < n {
        side += 1;
    }
    let pts: Vec<Vec<usize>> = (0..n)
        .map(|mut idx| {
            let mut coord = vec![0usize; dim];
            for c in coord.iter_mut().rev() {
                *c = idx % side;
                idx /= side;
            }
            coord
        })
        .collect();
    let m: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| {
                    a.iter()
                        .zip(b)
                        .map(|(&x, &y)| x.abs_diff(y) as f64)
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(validate_metric(&m, None)?)
}
