//! Field files: `{"d": .., "N": .., "coefficients": [[[k..], re, im], ..]}`.
//! Coefficients not listed are zero.

use std::collections::HashSet;
use std::path::Path;

use noiselab_core::lattice::{Dim, FreqIndex};
use noiselab_core::{Complex64, SpectralField};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    d: usize,
    #[serde(rename = "N")]
    n: u32,
    coefficients: Vec<(Vec<i64>, f64, f64)>,
}

fn schema(msg: impl Into<String>) -> AppError {
    AppError::Schema { what: "field file".into(), msg: msg.into() }
}

pub fn to_json(field: &SpectralField) -> String {
    let file = FieldFile {
        d: field.dim().get(),
        n: field.cutoff(),
        coefficients: field
            .iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| (k.components().to_vec(), c.re, c.im))
            .collect(),
    };
    serde_json::to_string(&file).expect("field serializes")
}

pub fn from_json(text: &str, max_coefficients: usize) -> Result<SpectralField> {
    let file: FieldFile = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    let dim = Dim::new(file.d).map_err(|e| schema(e.to_string()))?;
    let mut field = SpectralField::zeros_with_budget(dim, file.n, max_coefficients).map_err(|e| match e {
        noiselab_core::Error::Budget { .. } => AppError::Resource(e.to_string()),
        e => schema(e.to_string()),
    })?;
    let mut seen = HashSet::new();
    for (k, re, im) in file.coefficients {
        if k.len() != file.d {
            return Err(schema(format!("index {k:?} does not have {} components", file.d)));
        }
        if !(re.is_finite() && im.is_finite()) {
            return Err(schema(format!("non-finite coefficient at {k:?}")));
        }
        let idx = FreqIndex::new(&k).map_err(|e| schema(e.to_string()))?;
        if !seen.insert(k.clone()) {
            return Err(schema(format!("duplicate index {k:?}")));
        }
        field
            .set(&idx, Complex64::new(re, im))
            .map_err(|e| schema(format!("index {k:?}: {e}")))?;
    }
    Ok(field)
}

pub fn read(path: &Path, max_coefficients: usize) -> Result<SpectralField> {
    if !path.exists() {
        return Err(AppError::MissingConfig(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    from_json(&text, max_coefficients)
}
