//! Model persistence: one JSON file per class network plus a set-level
//! manifest. Parameter arrays serialize as plain decimal floats, which
//! round-trip f64 exactly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};
use crate::pipeline::ModelSet;
use crate::scorenet::{NetSpec, Params};
use crate::sde::SdeConfig;
use crate::tabular::{ClassId, Encoder};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ClassModelFile {
    format_version: u32,
    class_id: ClassId,
    spec: NetSpec,
    sde_config: SdeConfig,
    params: Params,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelSetFile {
    format_version: u32,
    classes: Vec<ClassId>,
    major_class: ClassId,
    finetuned: bool,
    encoder: Encoder,
}

fn class_file_name(class: ClassId) -> String {
    format!("model_class_{class}.json")
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value)
        .map_err(|e| SosError::Json { path: path.display().to_string(), source: e })?;
    std::fs::write(path, text)
        .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SosError::Io { path: path.display().to_string(), source: e })?;
    serde_json::from_str(&text)
        .map_err(|e| SosError::Json { path: path.display().to_string(), source: e })
}

fn check_version(got: u32) -> Result<()> {
    if got != MODEL_FORMAT_VERSION {
        return Err(SosError::VersionMismatch {
            got: got.to_string(),
            want: MODEL_FORMAT_VERSION.to_string(),
        });
    }
    Ok(())
}

/// Write the model set into `dir` (created if absent).
pub fn save_models(dir: &Path, modelset: &ModelSet) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| SosError::Io { path: dir.display().to_string(), source: e })?;
    let set = ModelSetFile {
        format_version: MODEL_FORMAT_VERSION,
        classes: modelset.models.keys().copied().collect(),
        major_class: modelset.major_class,
        finetuned: modelset.finetuned,
        encoder: modelset.encoder.clone(),
    };
    write_json(&dir.join("modelset.json"), &set)?;
    for (class, params) in &modelset.models {
        let file = ClassModelFile {
            format_version: MODEL_FORMAT_VERSION,
            class_id: *class,
            spec: modelset.spec.clone(),
            sde_config: modelset.sde,
            params: params.clone(),
        };
        write_json(&dir.join(class_file_name(*class)), &file)?;
    }
    Ok(())
}

/// Read a model set back; every class file named by the manifest must exist
/// and carry the expected format version.
pub fn load_models(dir: &Path) -> Result<ModelSet> {
    let set_path = dir.join("modelset.json");
    if !set_path.exists() {
        return Err(SosError::MissingArtifact(format!("model set at {}", dir.display())));
    }
    let set: ModelSetFile = read_json(&set_path)?;
    check_version(set.format_version)?;
    let mut models = BTreeMap::new();
    let mut spec: Option<NetSpec> = None;
    let mut sde: Option<SdeConfig> = None;
    for class in &set.classes {
        let path = dir.join(class_file_name(*class));
        if !path.exists() {
            return Err(SosError::MissingArtifact(class.to_string()));
        }
        let file: ClassModelFile = read_json(&path)?;
        check_version(file.format_version)?;
        if file.class_id != *class {
            return Err(SosError::BadConfig(format!(
                "class file {} holds class {}",
                path.display(),
                file.class_id
            )));
        }
        spec.get_or_insert(file.spec);
        sde.get_or_insert(file.sde_config);
        models.insert(*class, file.params);
    }
    let spec = spec.ok_or_else(|| SosError::MissingArtifact("any class model".into()))?;
    let sde = sde.expect("set alongside spec");
    Ok(ModelSet {
        spec,
        sde,
        encoder: set.encoder,
        models,
        major_class: set.major_class,
        finetuned: set.finetuned,
    })
}
