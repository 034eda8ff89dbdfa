//! Constructive bi-Lipschitz embeddings of finite metric spaces into
//! Euclidean space.
//!
//! The central obstruction this library works around is local snowflake-like
//! geometry: a finite metric space in which every small triangle is "fat"
//! cannot be mapped into any `R^N` without distortion blowing up with the
//! point count. The SRA (small rough angle) condition makes that precise,
//! and spaces that are *free* of large SRA subsets admit embeddings whose
//! distortion depends only on the freeness parameters, never on cardinality.
//!
//! Modules, bottom of the stack first:
//!
//! * [`metric`] - validated finite metric spaces, balls, separated nets,
//!   doubling estimates.
//! * [`sra`] - SRA triple tests, witness search, critical radii, core
//!   subsets.
//! * [`extension`] - per-coordinate McShane extension of Lipschitz maps and
//!   the far-pair co-Lipschitz report.
//! * [`audit`] - exhaustive distortion measurement and uniform inequality
//!   checks; every quantitative claim made elsewhere is re-checked here.
//! * [`assouad`] - the layered-net construction: scale function, dyadic
//!   nets, conflict coloring, bump charts, and the assembled map `Phi`.
//! * [`pipeline`] - the recursive embedding: distance-map base case, local
//!   charts from witness configurations, one extension step per level.
//! * [`generators`] - deterministic instance families for tests and the CLI.
//! * [`io`] - JSON/CSV parsing and serialization for spaces and embeddings.

pub mod assouad;
pub mod audit;
pub mod extension;
pub mod generators;
pub mod io;
pub mod metric;
pub mod pipeline;
pub mod sra;

/// Relative slack applied when checking proved inequalities against measured
/// values. Absorbs floating-point rounding only; every bound is asserted at
/// this tolerance, never looser.
pub const PROOF_SLACK: f64 = 1e-9;

/// Relative tolerance for metric validation (triangle inequality) and for
/// exactness-grade checks such as the McShane Lipschitz certificate.
pub const METRIC_SLACK: f64 = 1e-12;

pub use extension::PointMap;
pub use metric::{FiniteMetricSpace, PointId, SubsetRef};
