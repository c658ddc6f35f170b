//! Locating and loading models from disk.
//!
//! A model directory holds two kinds of entries:
//! - `<stem>.dimacs` (or `.cnf`) with `<stem>.objectives.json` and
//!   `<stem>.features.csv` alongside; pools are enumerated on demand.
//! - `<stem>.csv` with `<stem>.objectives.json`: a pre-evaluated candidate
//!   table used as-is.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use isneak::model_io::{enumerate_valid, load_candidate_table, parse_dimacs, CandidatePool, CnfModel, ObjectiveSpec};
use isneak::preprocess::{encode_pool, EncodedPool};
use serde::Serialize;

const OBJECTIVES_SUFFIX: &str = ".objectives.json";
const FEATURES_SUFFIX: &str = ".features.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dimacs,
    Table,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelEntry {
    pub id: String,
    pub kind: ModelKind,
    #[serde(skip)]
    pub path: PathBuf,
}

impl ModelEntry {
    /// Builds and encodes a pool. Tables are used whole; `count` and `seed`
    /// only apply to enumerated models.
    pub fn load_pool(&self, count: usize, seed: u64) -> Result<EncodedPool> {
        let pool = match self.kind {
            ModelKind::Dimacs => {
                let (model, spec) = load_model(&self.path)?;
                enumerate_valid(model, spec, count, seed)
                    .with_context(|| format!("enumerating {}", self.path.display()))?
            }
            ModelKind::Table => load_table(&self.path, &sidecar(&self.path, OBJECTIVES_SUFFIX))?,
        };
        encode_pool(pool).with_context(|| format!("encoding {}", self.path.display()))
    }
}

/// `dir/foo.dimacs` -> `dir/foo<suffix>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn objectives_path(path: &Path) -> PathBuf {
    sidecar(path, OBJECTIVES_SUFFIX)
}

pub fn features_path(path: &Path) -> PathBuf {
    sidecar(path, FEATURES_SUFFIX)
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn load_objectives(path: &Path) -> Result<ObjectiveSpec> {
    ObjectiveSpec::from_sidecar_json(&read(path)?).with_context(|| format!("{}", path.display()))
}

/// Loads a DIMACS model with its objective and per-feature value sidecars.
pub fn load_model(path: &Path) -> Result<(Arc<CnfModel>, ObjectiveSpec)> {
    let model = parse_dimacs(&read(path)?).with_context(|| format!("{}", path.display()))?;
    let spec = load_objectives(&objectives_path(path))?;
    let features = features_path(path);
    let table = spec
        .parse_feature_table(&read(&features)?, &model.var_names)
        .with_context(|| format!("{}", features.display()))?;
    let spec = spec.with_feature_values(table).with_context(|| format!("{}", features.display()))?;
    Ok((Arc::new(model), spec))
}

pub fn load_table(path: &Path, objectives: &Path) -> Result<CandidatePool> {
    let text = read(path)?;
    let spec = load_objectives(objectives)?;
    load_candidate_table(&text, spec).with_context(|| format!("{}", path.display()))
}

fn classify(path: &Path) -> Option<ModelKind> {
    let name = path.file_name()?.to_str()?;
    if name.ends_with(FEATURES_SUFFIX) {
        return None;
    }
    match path.extension()?.to_str()? {
        "dimacs" | "cnf" => Some(ModelKind::Dimacs),
        "csv" if objectives_path(path).is_file() => Some(ModelKind::Table),
        _ => None,
    }
}

/// Lists loadable models in `dir`, sorted by id.
pub fn discover(dir: &Path) -> Result<Vec<ModelEntry>> {
    if !dir.is_dir() {
        bail!("model directory {} does not exist", dir.display());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("cannot list {}", dir.display()))? {
        let path = entry?.path();
        if let Some(kind) = classify(&path) {
            let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            out.push(ModelEntry { id, kind, path });
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    for w in out.windows(2) {
        if w[0].id == w[1].id {
            bail!("two models named `{}` in {}", w[0].id, dir.display());
        }
    }
    Ok(out)
}

/// Model entry for a single file given on the command line.
pub fn entry_for(path: &Path) -> Result<ModelEntry> {
    let kind = classify(path).with_context(|| {
        format!(
            "{} is not a model (.dimacs/.cnf, or .csv with an objectives sidecar)",
            path.display()
        )
    })?;
    if !path.is_file() {
        bail!("cannot read {}", path.display());
    }
    let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    Ok(ModelEntry {
        id,
        kind,
        path: path.to_path_buf(),
    })
}
