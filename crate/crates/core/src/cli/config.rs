//! Experiment configuration documents.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleDoc, EnsembleSpec, StateRef};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Maximally entangled rank, EC-orbit rank, or every Bell-chain interface rank.
    Rank,
    /// GHZ level.
    Level,
    /// Size of a uniform-superposition support.
    Support,
    /// Monte Carlo sample count.
    Samples,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Rank => "rank",
            SweepParam::Level => "level",
            SweepParam::Support => "support",
            SweepParam::Samples => "samples",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    Exact,
    Mc {
        samples: usize,
        #[serde(default = "default_batches")]
        batches: usize,
    },
}

fn default_batches() -> usize {
    crate::twirl::DEFAULT_BATCHES
}

/// One experiment: an ensemble, copy counts, an optional sweep and a method.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleDoc>,
    /// Path to an ensemble document, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble_file: Option<PathBuf>,
    pub t: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub method: MethodConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Free-form tolerance overrides, recorded in the sidecar.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

/// Parses JSON with the failing field path and position in the message.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let at = if path == "." { String::new() } else { format!(" at `{path}`") };
        Error::Config(format!("{origin}{at}: {inner}"))
    })
}

/// One resolved point of a sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub t: usize,
    pub sweep_value: Option<usize>,
    pub spec: EnsembleSpec,
    pub method: MethodConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let config = parse_json(&text, &path.display().to_string())?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((config, base))
    }

    fn ensemble_doc(&self, base_dir: &Path) -> Result<EnsembleDoc> {
        match (&self.ensemble, &self.ensemble_file) {
            (Some(doc), None) => Ok(doc.clone()),
            (None, Some(file)) => {
                let path = base_dir.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_json(&text, &path.display().to_string())
            }
            _ => Err(Error::Config("exactly one of \"ensemble\" and \"ensemble_file\" is required".into())),
        }
    }

    /// Resolves and checks every sweep point, in output order (t outer).
    pub fn points(&self, base_dir: &Path) -> Result<Vec<SweepPoint>> {
        if self.id.is_empty() {
            return Err(Error::Config("empty experiment id".into()));
        }
        if self.t.is_empty() || self.t.contains(&0) {
            return Err(Error::Config("\"t\" must be a nonempty list of positive integers".into()));
        }
        if let MethodConfig::Mc { samples, batches } = self.method {
            crate::twirl::batch_sizes(samples, batches).map_err(|e| Error::Config(e.to_string()))?;
        }
        let doc = self.ensemble_doc(base_dir)?;
        let values: Vec<Option<usize>> = match &self.sweep {
            None => vec![None],
            Some(s) if s.values.is_empty() || s.values.contains(&0) => {
                return Err(Error::Config("sweep values must be a nonempty list of positive integers".into()))
            }
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
        };
        let mut points = Vec::new();
        for &t in &self.t {
            for &value in &values {
                let mut doc = doc.clone();
                let mut method = self.method.clone();
                if let (Some(sweep), Some(v)) = (&self.sweep, value) {
                    apply_sweep(&mut doc, &mut method, sweep.param, v)?;
                }
                let spec = doc.resolve(base_dir).map_err(|e| match e {
                    Error::Config(_) | Error::SizeCap { .. } => e,
                    other => Error::Config(format!("sweep point t={t}, value={value:?}: {other}")),
                })?;
                if method == MethodConfig::Exact && !spec.has_exact_route(t) {
                    return Err(Error::Config(format!(
                        "{} has no exact route at t = {t}",
                        spec.variant_name()
                    )));
                }
                crate::copyspace::CopySpace::new(spec.register().total_dim(), t)?;
                points.push(SweepPoint { t, sweep_value: value, spec, method });
            }
        }
        Ok(points)
    }
}

fn apply_sweep(doc: &mut EnsembleDoc, method: &mut MethodConfig, param: SweepParam, value: usize) -> Result<()> {
    let unsupported = |doc: &EnsembleDoc| {
        Err(Error::Config(format!(
            "sweep parameter \"{}\" does not apply to {}",
            param.name(),
            serde_json::to_value(doc).ok().and_then(|v| v["variant"].as_str().map(String::from)).unwrap_or_default()
        )))
    };
    match (param, doc) {
        (SweepParam::Samples, _) => match method {
            MethodConfig::Mc { samples, .. } => *samples = value,
            MethodConfig::Exact => return Err(Error::Config("a samples sweep needs the mc method".into())),
        },
        (_, EnsembleDoc::WeightedOrbit { base, .. }) => apply_sweep(base, method, param, value)?,
        (SweepParam::Rank, EnsembleDoc::EcOrbit { rank, .. }) => *rank = value,
        (SweepParam::Rank, EnsembleDoc::MarkovOrbit { ranks, .. }) => ranks.iter_mut().for_each(|k| *k = value),
        (SweepParam::Rank, EnsembleDoc::EntOrbit { state: StateRef::MaxEntangled { rank }, .. }) => *rank = value,
        (SweepParam::Level, EnsembleDoc::GhzOrbit { level, .. }) => *level = value,
        (
            SweepParam::Support,
            EnsembleDoc::EntOrbit { state: StateRef::UniformSuperposition { support }, .. }
            | EnsembleDoc::CohOrbit { state: StateRef::UniformSuperposition { support }, .. },
        ) => *support = value,
        (_, doc) => return unsupported(doc),
    }
    Ok(())
}
