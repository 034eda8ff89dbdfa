//! Command-line front end for the sra-embed library.
//!
//! Subcommands: `validate` (check an instance file), `analyze` (freeness
//! diagnostics), `embed` (full recursive embedding), `assouad` (extend an
//! embedding of a chosen subset to the whole space), `audit` (measure an
//! embedding CSV against a space), and `gen` (write generated instances).
//!
//! Exit codes: 0 success, 1 domain or verification failure, 2 usage errors.
//! Set `SRA_EMBED_THREADS` to pin the worker-thread count (0 = automatic).

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use sra_embed::audit::{check_inequality, distortion_audit, CheckRecord, Direction};
use sra_embed::generators::{Family, GenSpec};
use sra_embed::io::{
    embedding_ledger_json, read_embedding_csv, read_space_csv, read_space_json,
    write_embedding_csv, write_space_csv, write_space_json,
};
use sra_embed::metric::doubling_constant_estimate;
use sra_embed::pipeline::{embed, extend_embedding, Extension, WitnessChartProvider};
use sra_embed::sra::{critical_radius_all, find_sra_subspace, sra_free_parameter, SraParams};
use sra_embed::{FiniteMetricSpace, PointMap, SubsetRef};

#[derive(Parser)]
#[command(
    name = "sra-embed",
    version,
    about = "Bi-Lipschitz embeddings of finite metric spaces into Euclidean space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Pick by file extension (.csv reads as CSV, anything else as JSON).
    Auto,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance file and print its basic invariants.
    Validate {
        /// Instance file (JSON `{"labels", "matrix"}` or CSV).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
    },
    /// Report SRA freeness diagnostics for an instance.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
        /// Angle parameter in (0, 1).
        #[arg(long)]
        alpha: f64,
        /// Also check freeness at this subset size and report a witness.
        #[arg(long)]
        k: Option<usize>,
        /// Include per-point critical radii (needs --k >= 3; can be slow).
        #[arg(long)]
        debug: bool,
    },
    /// Embed an instance that is free of k-point SRA(alpha) subsets.
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
        /// Freeness size (>= 3).
        #[arg(long)]
        k: usize,
        /// Angle parameter in (0, 1).
        #[arg(long)]
        alpha: f64,
        /// Output embedding CSV.
        #[arg(long)]
        out: PathBuf,
        /// Ledger JSON path (default: <out>.ledger.json).
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Print the ledger to stderr as well.
        #[arg(long)]
        debug: bool,
    },
    /// Embed a chosen subset, then extend the embedding to the whole space.
    Assouad {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
        /// Base subset: comma-separated labels or point ids (e.g. "p0,p3,7").
        #[arg(long)]
        subset: String,
        /// Freeness size used for the subset embedding and for the
        /// critical-radius witness charts (>= 3).
        #[arg(long)]
        k: usize,
        /// Angle parameter in (0, 1).
        #[arg(long)]
        alpha: f64,
        /// Scale-function slope in (0, 1] (default alpha/6).
        #[arg(long)]
        theta: Option<f64>,
        /// Override the near/far crossover (values below the default void
        /// the guarantee; the ledger checks will show it).
        #[arg(long)]
        zeta: Option<f64>,
        /// Doubling estimate used to record the expected palette bound.
        #[arg(long)]
        lambda: Option<usize>,
        /// Output embedding CSV.
        #[arg(long)]
        out: PathBuf,
        /// Ledger JSON path (default: <out>.ledger.json).
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[arg(long)]
        debug: bool,
    },
    /// Measure an embedding CSV against an instance.
    Audit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
        /// Embedding CSV (any nonempty subset of the points).
        #[arg(long)]
        embedding: PathBuf,
        /// Fail unless the measured co-Lipschitz constant is at least this.
        #[arg(long)]
        scale: Option<f64>,
        /// Fail unless the measured distortion is at most this.
        #[arg(long)]
        distortion: Option<f64>,
    },
    /// Generate an instance file.
    Gen {
        #[arg(long, value_enum)]
        family: CliFamily,
        /// Number of points.
        #[arg(long)]
        n: usize,
        /// Snowflake exponent in (0, 1] (snowflake-line only).
        #[arg(long)]
        exponent: Option<f64>,
        /// Ambient dimension (euclidean-cloud, grid-l1).
        #[arg(long)]
        dim: Option<usize>,
        /// Random seed (euclidean-cloud; default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Output instance file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CliFamily {
    Line,
    SnowflakeLine,
    EuclideanCloud,
    GridL1,
}

impl From<CliFamily> for Family {
    fn from(f: CliFamily) -> Family {
        match f {
            CliFamily::Line => Family::Line,
            CliFamily::SnowflakeLine => Family::SnowflakeLine,
            CliFamily::EuclideanCloud => Family::EuclideanCloud,
            CliFamily::GridL1 => Family::GridL1,
        }
    }
}

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    match std::env::var("SRA_EMBED_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| format!("SRA_EMBED_THREADS must be a nonnegative integer, got {v:?}"))?;
            if n == 0 {
                return Ok(()); // automatic
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())
        }
    }
}

fn resolve_format(format: Format, path: &Path) -> Format {
    match format {
        Format::Auto => {
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                Format::Csv
            } else {
                Format::Json
            }
        }
        f => f,
    }
}

fn read_space(path: &Path, format: Format) -> Result<FiniteMetricSpace, Box<dyn Error>> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    match resolve_format(format, path) {
        Format::Csv => Ok(read_space_csv(&text)?),
        _ => Ok(read_space_json(&text)?),
    }
}

/// Parses a comma-separated list of labels or point ids. Labels win over
/// ids when both would match; a bare integer or `p<integer>` falls back to
/// the id.
fn parse_subset(spec: &str, space: &FiniteMetricSpace) -> Result<SubsetRef, Box<dyn Error>> {
    let mut ids = Vec::new();
    for raw in spec.split(',') {
        let token = raw.trim();
        if token.is_empty() {
            continue;
        }
        if let Some(i) = space.labels().iter().position(|l| l == token) {
            ids.push(i);
            continue;
        }
        let digits = token.strip_prefix('p').unwrap_or(token);
        match digits.parse::<usize>() {
            Ok(i) if i < space.len() => ids.push(i),
            Ok(i) => return Err(format!("point id {i} out of range (n = {})", space.len()).into()),
            Err(_) => return Err(format!("unknown point {token:?}").into()),
        }
    }
    let subset = SubsetRef::from_indices(ids);
    if subset.is_empty() {
        return Err("subset must name at least one point".into());
    }
    Ok(subset)
}

fn default_ledger_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.ledger.json", out.display()))
}

/// Reindexes a map produced on a restricted space back to parent-space ids.
fn reindex(map: &PointMap, parent_ids: &SubsetRef) -> Result<PointMap, Box<dyn Error>> {
    Ok(PointMap::new(
        parent_ids.clone(),
        map.dim(),
        map.iter().map(|(_, v)| v.to_vec()).collect(),
        map.scale(),
        map.claimed_distortion(),
    )?)
}

fn extension_ledger_json(ext: &Extension, core: &SubsetRef) -> String {
    let doc = json!({
        "kind": "extension",
        "base_points": core.len(),
        "dim": ext.map.dim(),
        "scale": ext.map.scale(),
        "claimed_distortion": ext.map.claimed_distortion(),
        "theta": ext.theta,
        "zeta": ext.zeta,
        "modulus": ext.assembled.modulus,
        "palette": ext.assembled.colored.palette,
        "palette_bound": ext.assembled.colored.palette_bound,
        "all_checks_pass": ext.checks.iter().all(|c| c.pass),
        "checks": ext.checks,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

fn run(command: Command) -> Result<ExitCode, Box<dyn Error>> {
    match command {
        Command::Validate { input, format } => {
            let space = read_space(&input, format)?;
            println!(
                "valid metric space: {} points, diameter {:.6e}",
                space.len(),
                space.diameter()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { input, format, alpha, k, debug } => {
            let space = read_space(&input, format)?;
            SraParams::new(alpha, 3)?;
            let doubling = if space.len() <= 128 {
                Some(doubling_constant_estimate(&space))
            } else {
                None
            };
            let mut doc = json!({
                "points": space.len(),
                "diameter": space.diameter(),
                "alpha": alpha,
                "free_parameter": sra_free_parameter(&space, alpha),
                "doubling": doubling,
            });
            if let Some(k) = k {
                let params = SraParams::new(alpha, k)?;
                let witness = find_sra_subspace(&space, params);
                doc["k"] = json!(k);
                doc["free_at_k"] = json!(witness.is_none());
                doc["witness"] = json!(witness
                    .as_ref()
                    .map(|w| w.members().iter().map(|p| p.0).collect::<Vec<_>>()));
                if debug && k >= 3 {
                    let entries = critical_radius_all(&space, params);
                    doc["critical_radii"] = json!(entries
                        .iter()
                        .map(|e| json!({
                            "point": e.point.0,
                            "radius": e.radius,
                            "witness": e.witness.as_ref().map(|w| w
                                .members()
                                .iter()
                                .map(|p| p.0)
                                .collect::<Vec<_>>()),
                        }))
                        .collect::<Vec<_>>());
                }
            }
            println!("{}", serde_json::to_string_pretty(&doc)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Embed { input, format, k, alpha, out, ledger, debug } => {
            let space = read_space(&input, format)?;
            let emb = embed(&space, k, alpha)?;
            fs::write(&out, write_embedding_csv(&space, &emb.map))
                .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            let ledger_path = ledger.unwrap_or_else(|| default_ledger_path(&out));
            let ledger_text = embedding_ledger_json(&emb);
            fs::write(&ledger_path, &ledger_text)
                .map_err(|e| format!("cannot write {}: {e}", ledger_path.display()))?;
            if debug {
                eprint!("{ledger_text}");
            }
            let ok = emb.all_checks_pass();
            println!(
                "embedded {} points into R^{}: scale {:.6e}, claimed distortion {:.6e}, checks {}",
                space.len(),
                emb.dim(),
                emb.scale(),
                emb.claimed_distortion(),
                if ok { "pass" } else { "FAIL" },
            );
            if ok {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: one or more recorded checks failed; see {}", ledger_path.display());
                Ok(ExitCode::from(1))
            }
        }
        Command::Assouad {
            input,
            format,
            subset,
            k,
            alpha,
            theta,
            zeta,
            lambda,
            out,
            ledger,
            debug,
        } => {
            let space = read_space(&input, format)?;
            let params = SraParams::new(alpha, k)?;
            if k < 3 {
                return Err("assouad needs k >= 3".into());
            }
            let y = parse_subset(&subset, &space)?;
            let sub = space.restrict(&y);
            let inner = embed(&sub, k, alpha)?;
            let phi_y = reindex(&inner.map, &y)?;
            let entries = critical_radius_all(&space, params);
            let provider = WitnessChartProvider::new(&space, &entries, alpha, k);
            let theta = theta.unwrap_or(alpha / 6.0);
            let d_chart = ((k - 2) as f64).sqrt() / alpha;
            let ext = extend_embedding(
                &space, &y, &phi_y, &provider, theta, d_chart, k - 2, lambda, zeta,
            )?;
            fs::write(&out, write_embedding_csv(&space, &ext.map))
                .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            let ledger_path = ledger.unwrap_or_else(|| default_ledger_path(&out));
            let ledger_text = extension_ledger_json(&ext, &y);
            fs::write(&ledger_path, &ledger_text)
                .map_err(|e| format!("cannot write {}: {e}", ledger_path.display()))?;
            if debug {
                eprint!("{ledger_text}");
            }
            let ok = ext.checks.iter().all(|c| c.pass);
            println!(
                "extended {} base points to {} points in R^{}: scale {:.6e}, checks {}",
                y.len(),
                space.len(),
                ext.map.dim(),
                ext.map.scale(),
                if ok { "pass" } else { "FAIL" },
            );
            if ok {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: one or more recorded checks failed; see {}", ledger_path.display());
                Ok(ExitCode::from(1))
            }
        }
        Command::Audit { input, format, embedding, scale, distortion } => {
            let space = read_space(&input, format)?;
            let text = fs::read_to_string(&embedding)
                .map_err(|e| format!("cannot read {}: {e}", embedding.display()))?;
            let map = read_embedding_csv(&text, &space)?;
            let report = distortion_audit(&space, &map)?;
            let mut checks: Vec<CheckRecord> = Vec::new();
            if let Some(s) = scale {
                checks.push(check_inequality(
                    "audit-colipschitz",
                    s,
                    report.colipschitz,
                    Direction::AtLeast,
                ));
            }
            if let Some(d) = distortion {
                checks.push(check_inequality(
                    "audit-distortion",
                    d,
                    report.distortion,
                    Direction::AtMost,
                ));
            }
            let ok = checks.iter().all(|c| c.pass);
            let doc = json!({
                "points_measured": map.domain().len(),
                "dim": map.dim(),
                "lipschitz": report.lipschitz,
                "colipschitz": report.colipschitz,
                "distortion": report.distortion,
                "witness_max": [report.witness_max.0.0, report.witness_max.1.0],
                "witness_min": [report.witness_min.0.0, report.witness_min.1.0],
                "checks": checks,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
            if ok {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: measured constants violate the requested bounds");
                Ok(ExitCode::from(1))
            }
        }
        Command::Gen { family, n, exponent, dim, seed, out, format } => {
            let spec = GenSpec { family: family.into(), n, exponent, dim, seed };
            let space = spec.build()?;
            let text = match resolve_format(format, &out) {
                Format::Csv => write_space_csv(&space),
                _ => write_space_json(&space),
            };
            fs::write(&out, text).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            println!("wrote {} ({} points, {})", out.display(), space.len(), spec.family);
            Ok(ExitCode::SUCCESS)
        }
    }
}
