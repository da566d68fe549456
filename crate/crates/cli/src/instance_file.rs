//! JSON instance files: `{"n": 4, "sims": [...], "ground_truth": [...]}` with
//! `sims` in lexicographic pair order and `ground_truth` optional.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qecc_core::{Clustering, Instance};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    sims: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground_truth: Option<Vec<usize>>,
}

pub fn to_json(instance: &Instance) -> String {
    let file = InstanceFile {
        n: instance.n(),
        sims: instance.sims().to_vec(),
        ground_truth: instance.ground_truth().map(|c| c.labels().to_vec()),
    };
    let mut out = serde_json::to_string(&file).expect("instance serializes");
    out.push('\n');
    out
}

pub fn from_json(text: &str) -> std::result::Result<Instance, String> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let inst = Instance::new(file.n, file.sims).map_err(|e| e.to_string())?;
    match file.ground_truth {
        Some(labels) => inst
            .with_ground_truth(Clustering::from_labels(labels))
            .map_err(|e| e.to_string()),
        None => Ok(inst),
    }
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })?;
    let inst = Instance::new(file.n, file.sims)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    match file.ground_truth {
        Some(labels) => inst
            .with_ground_truth(Clustering::from_labels(labels))
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => Ok(inst),
    }
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    fs::write(path, to_json(instance)).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}
