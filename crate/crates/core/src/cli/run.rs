//! Experiment execution and CSV/JSON emission.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, MethodConfig, SweepPoint};
use crate::design::{design_error_exact, design_error_mc, DesignErrorReport, Method};
use crate::error::{Error, Result};
use crate::twirl::RandomStream;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// One CSV row. Entropies are in nats; `N2_nats` lists every reported cut,
/// separated by `;`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub experiment_id: String,
    pub variant: String,
    pub n_sites: usize,
    pub t: usize,
    pub sweep_param: String,
    pub sweep_value: Option<usize>,
    pub error: f64,
    pub method: String,
    pub samples: Option<usize>,
    pub dispersion: Option<f64>,
    #[serde(rename = "N2_nats")]
    pub n2_nats: String,
    #[serde(rename = "C2_nats")]
    pub c2_nats: Option<f64>,
    pub bound_thm1: Option<f64>,
    pub bound_thm2: Option<f64>,
    pub bound_thm3: Option<f64>,
    pub bound_lem4: Option<f64>,
    pub residual_scale: Option<f64>,
    pub seed: u64,
}

impl CsvRow {
    fn new(config: &ExperimentConfig, point: &SweepPoint, report: &DesignErrorReport, seed: u64) -> Self {
        let (samples, dispersion) = match &report.method {
            Method::Exact => (None, None),
            Method::MonteCarlo { samples, dispersion, .. } => (Some(*samples), Some(*dispersion)),
        };
        let n2: Vec<String> = report.entropies.n2.iter().map(|c| c.nats.to_string()).collect();
        Self {
            experiment_id: config.id.clone(),
            variant: report.variant.clone(),
            n_sites: report.site_dims.len(),
            t: report.t,
            sweep_param: config.sweep.as_ref().map(|s| s.param.name().to_string()).unwrap_or_default(),
            sweep_value: point.sweep_value,
            error: report.error,
            method: report.method.name().into(),
            samples,
            dispersion,
            n2_nats: n2.join(";"),
            c2_nats: report.entropies.c2,
            bound_thm1: report.bounds.get("thm1"),
            bound_thm2: report.bounds.get("thm2"),
            bound_thm3: report.bounds.get("thm3"),
            bound_lem4: report.bounds.get("lem4"),
            residual_scale: report.bounds.residual_scale,
            seed,
        }
    }
}

#[derive(Serialize)]
struct PointRecord<'a> {
    index: usize,
    t: usize,
    sweep_value: Option<usize>,
    stream: Option<RandomStream>,
    report: &'a DesignErrorReport,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment_id: &'a str,
    version: &'static str,
    seed: u64,
    jobs: usize,
    config: &'a ExperimentConfig,
    csv: String,
    total_seconds: f64,
    points: Vec<PointRecord<'a>>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
    pub rows: Vec<CsvRow>,
    pub reports: Vec<DesignErrorReport>,
}

/// Default worker count: `STATEDESIGN_JOBS`, else the available parallelism.
pub fn default_jobs() -> usize {
    std::env::var("STATEDESIGN_JOBS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn point_stream(seed: u64, point: &SweepPoint, index: usize) -> Option<RandomStream> {
    matches!(point.method, MethodConfig::Mc { .. }).then(|| RandomStream::new(seed).derive(index as u64))
}

fn run_point(seed: u64, index: usize, point: &SweepPoint) -> Result<DesignErrorReport> {
    match (&point.method, point_stream(seed, point, index)) {
        (MethodConfig::Mc { samples, batches }, Some(stream)) => {
            design_error_mc(&point.spec, point.t, *samples, *batches, stream)
        }
        _ => design_error_exact(&point.spec, point.t),
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn csv_bytes(rows: &[CsvRow]) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Error::Config(format!("CSV serialization: {e}")))?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Runs every sweep point and writes the CSV and its JSON sidecar. Nothing
/// is written unless all points succeed.
pub fn run_experiment(config: &ExperimentConfig, base_dir: &Path, options: &RunOptions) -> Result<RunOutput> {
    let start = Instant::now();
    let points = config.points(base_dir)?;
    let seed = options.seed.unwrap_or(config.seed);
    let jobs = options.jobs.unwrap_or_else(default_jobs).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<DesignErrorReport>> =
        pool.install(|| points.par_iter().enumerate().map(|(i, p)| run_point(seed, i, p)).collect());
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;

    let rows: Vec<CsvRow> = points.iter().zip(&reports).map(|(p, r)| CsvRow::new(config, p, r, seed)).collect();
    let csv_path = options
        .output
        .clone()
        .or_else(|| config.output.as_ref().map(|o| base_dir.join(o)))
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.id)));
    let json_path = csv_path.with_extension("json");
    let sidecar = Sidecar {
        experiment_id: &config.id,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        jobs,
        config,
        csv: csv_path.display().to_string(),
        total_seconds: start.elapsed().as_secs_f64(),
        points: points
            .iter()
            .zip(&reports)
            .enumerate()
            .map(|(index, (p, report))| PointRecord {
                index,
                t: p.t,
                sweep_value: p.sweep_value,
                stream: point_stream(seed, p, index),
                report,
            })
            .collect(),
    };
    let json = serde_json::to_vec_pretty(&sidecar)?;
    write_atomic(&csv_path, &csv_bytes(&rows)?)?;
    write_atomic(&json_path, &json)?;
    Ok(RunOutput { csv_path, json_path, rows, reports })
}
