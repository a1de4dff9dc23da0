//! On-disk formats shared by the pipeline commands.
//!
//! Graphs, sample sets, and fit reports are JSON; run records are JSONL with
//! a provenance header line; ratio points are CSV with a `# provenance:`
//! comment line ahead of the header. All writers are deterministic given
//! their inputs.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{RatioPoint, RatioSource};
use crate::annealer::RunRecord;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind};
use crate::quantum::{PulseKind, SampleSet};

pub const BIT_ORDER: &str = "v0-leftmost";

/// The invoking configuration embedded in every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
}

impl Provenance {
    pub fn new(command: &str, args: Vec<String>) -> Self {
        Provenance {
            tool: "qesa".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
        }
    }
}

// ============================================================================
// Graph JSON
// ============================================================================

#[derive(Serialize, Deserialize)]
struct GraphFile {
    kind: GraphKind,
    n: usize,
    positions: Vec<[f64; 2]>,
    edges: Vec<(u32, u32)>,
    blockade_radius: Option<f64>,
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    provenance: Option<Provenance>,
}

pub fn write_graph(path: &Path, graph: &Graph, provenance: Option<Provenance>) -> Result<()> {
    let file = GraphFile {
        kind: graph.kind(),
        n: graph.n(),
        positions: graph.positions().to_vec(),
        edges: graph.edges().to_vec(),
        blockade_radius: graph.blockade_radius(),
        seed: graph.seed(),
        provenance,
    };
    write_json_pretty(path, &file)
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    let file: GraphFile = read_json(path)?;
    if file.n != file.positions.len() {
        return Err(Error::Format(format!(
            "{}: n = {} but {} positions",
            path.display(),
            file.n,
            file.positions.len()
        )));
    }
    Graph::from_parts(
        file.kind,
        file.positions,
        file.edges,
        file.blockade_radius,
        file.seed,
    )
}

// ============================================================================
// Sample set JSON
// ============================================================================

#[derive(Serialize, Deserialize)]
struct SamplesFile {
    n: usize,
    shots: u64,
    bit_order: String,
    counts: BTreeMap<String, u64>,
    /// Pulse kind that produced the samples, when known; external datasets
    /// should set this to label warm starts.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    mode: Option<PulseKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    provenance: Option<Provenance>,
}

pub fn write_samples(
    path: &Path,
    samples: &SampleSet,
    mode: Option<PulseKind>,
    provenance: Option<Provenance>,
) -> Result<()> {
    let file = SamplesFile {
        n: samples.n(),
        shots: samples.shots(),
        bit_order: BIT_ORDER.into(),
        counts: samples.counts().clone(),
        mode,
        provenance,
    };
    write_json_pretty(path, &file)
}

/// Loads and validates a sample set; also the ingestion path for external
/// hardware shot data. Returns the samples and their pulse kind, if labeled.
pub fn load_samples(path: &Path) -> Result<(SampleSet, Option<PulseKind>)> {
    let file: SamplesFile = read_json(path)?;
    if file.bit_order != BIT_ORDER {
        return Err(Error::InvalidSamples(format!(
            "unsupported bit order {:?} (expected {BIT_ORDER:?})",
            file.bit_order
        )));
    }
    let samples = SampleSet::from_counts(file.n, file.counts)?;
    if samples.shots() != file.shots {
        return Err(Error::InvalidSamples(format!(
            "counts sum to {} but the file declares {} shots",
            samples.shots(),
            file.shots
        )));
    }
    Ok((samples, file.mode))
}

// ============================================================================
// Run record JSONL
// ============================================================================

#[derive(Serialize, Deserialize)]
struct JsonlHeader {
    provenance: Provenance,
}

/// Trajectory points kept when persisting: every epoch up to 100, every
/// tenth epoch beyond, and always the last point.
fn subsample_trajectory(trajectory: &[(u32, f64)]) -> Vec<(u32, f64)> {
    let last = trajectory.len().saturating_sub(1);
    trajectory
        .iter()
        .enumerate()
        .filter(|&(i, &(epoch, _))| epoch <= 100 || epoch % 10 == 0 || i == last)
        .map(|(_, &p)| p)
        .collect()
}

pub fn write_run_records(
    path: &Path,
    records: &[RunRecord],
    provenance: Option<Provenance>,
) -> Result<()> {
    let mut out = Vec::new();
    if let Some(p) = provenance {
        let header = JsonlHeader { provenance: p };
        out.extend_from_slice(serde_json::to_string(&header).expect("header serializes").as_bytes());
        out.push(b'\n');
    }
    for record in records {
        let mut slim = record.clone();
        slim.alpha_trajectory = subsample_trajectory(&record.alpha_trajectory);
        let line = serde_json::to_string(&slim).map_err(|e| Error::json(path, e))?;
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_run_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::json(path, e))?;
        if value.get("graph_id").is_some() {
            let record: RunRecord =
                serde_json::from_value(value).map_err(|e| Error::json(path, e))?;
            records.push(record);
        } else if value.get("provenance").is_none() {
            return Err(Error::Format(format!(
                "{}:{}: neither a run record nor a provenance header",
                path.display(),
                lineno + 1
            )));
        }
    }
    Ok(records)
}

// ============================================================================
// Ratio point CSV
// ============================================================================

pub const RATIO_CSV_HEADER: &str = "hd_over_n,epoch_ratio,n,source";

pub fn write_ratio_points_csv(
    path: &Path,
    points: &[RatioPoint],
    provenance: Option<&Provenance>,
) -> Result<()> {
    let mut out = String::new();
    if let Some(p) = provenance {
        out.push_str("# provenance: ");
        out.push_str(&serde_json::to_string(p).expect("provenance serializes"));
        out.push('\n');
    }
    out.push_str(RATIO_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.hd_over_n,
            p.epoch_ratio,
            p.n,
            p.source.as_str()
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_ratio_points_csv(path: &Path) -> Result<Vec<RatioPoint>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(header) if header.trim() == RATIO_CSV_HEADER => {}
        other => {
            return Err(Error::Format(format!(
                "{}: expected header {RATIO_CSV_HEADER:?}, found {other:?}",
                path.display()
            )))
        }
    }
    let mut points = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Format(format!(
                "{}: expected 4 fields, got {}",
                path.display(),
                fields.len()
            )));
        }
        let parse_f64 = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Format(format!("{}: bad number {s:?}", path.display())))
        };
        points.push(RatioPoint {
            hd_over_n: parse_f64(fields[0])?,
            epoch_ratio: parse_f64(fields[1])?,
            n: fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("{}: bad n {:?}", path.display(), fields[2])))?,
            source: RatioSource::parse(fields[3].trim())?,
        });
    }
    Ok(points)
}

// ============================================================================
// Fit report JSON
// ============================================================================

/// Serialized result of a model fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub params: serde_json::Value,
    pub r2_adj: f64,
    pub n_points: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residuals_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::json(path, e))?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&content).map_err(|e| Error::json(path, e))
}

/// Writes a residuals CSV of `(x, observed, predicted, residual)` rows.
pub fn write_residuals_csv(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = String::from("x,observed,predicted,residual\n");
    for &(x, observed, predicted) in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            x,
            observed,
            predicted,
            observed - predicted
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, content: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(content.as_bytes()).map_err(|e| Error::io(path, e))
}
