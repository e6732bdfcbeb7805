use std::fs;
use std::path::{Path, PathBuf};

use polyhom_core::geometry::{ConvexPolytope, PolytopeDoc};
use polyhom_core::periodic::{PeriodicDoc, PeriodicFunction};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::artifacts::SCHEMA;
use crate::error::{core, CliError};

/// A polytope given as a JSON file path, a named built-in or inline.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PolytopeSource {
    Path(String),
    Builtin { builtin: String },
    Inline(PolytopeDoc),
}

/// A trigonometric polynomial given as a JSON file path or inline.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FunctionSource {
    Path(String),
    Inline(PeriodicDoc),
}

/// A parsed config plus everything that feeds its hash.
pub struct Loaded<T> {
    pub params: T,
    base: PathBuf,
    hasher: Sha256,
}

/// Reads `path`, checks the schema field and deserializes the remaining
/// fields into `T`. Unknown fields are rejected by `T` itself.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {} is not valid JSON: {e}", path.display())))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Validation(format!("config {} must be a JSON object", path.display())))?;
    match obj.remove("schema").and_then(|v| v.as_u64()) {
        Some(s) if s == SCHEMA as u64 => {}
        Some(s) => return Err(CliError::Validation(format!("unsupported config schema {s} (expected {SCHEMA})"))),
        None => return Err(CliError::Validation(format!("config {} lacks \"schema\": {SCHEMA}", path.display()))),
    }
    let mut hasher = Sha256::new();
    // serde_json maps are key-sorted, so this is a canonical form
    hasher.update(serde_json::to_vec(&value).expect("value serializes"));
    let params = serde_json::from_value(value)
        .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?;
    Ok(Loaded {
        params,
        base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        hasher,
    })
}

impl<T> Loaded<T> {
    /// Reads a file referenced by the config, relative to the config's
    /// directory, and folds its bytes into the config hash.
    pub fn read_input(&mut self, rel: &str) -> Result<String, CliError> {
        let p = self.base.join(rel);
        let bytes = fs::read(&p)
            .map_err(|e| CliError::Validation(format!("cannot read input file {}: {e}", p.display())))?;
        self.hasher.update(rel.as_bytes());
        self.hasher.update(&bytes);
        String::from_utf8(bytes).map_err(|_| CliError::Validation(format!("{} is not UTF-8", p.display())))
    }

    pub fn polytope(&mut self, src: &PolytopeSource) -> Result<(ConvexPolytope, Vec<String>), CliError> {
        match src {
            PolytopeSource::Path(rel) => {
                let text = self.read_input(rel)?;
                ConvexPolytope::from_json_str(&text).map_err(core)
            }
            PolytopeSource::Builtin { builtin } => Ok((builtin_polytope(builtin)?, Vec::new())),
            PolytopeSource::Inline(doc) => ConvexPolytope::from_doc(doc).map_err(core),
        }
    }

    pub fn function(&mut self, src: &FunctionSource) -> Result<PeriodicFunction, CliError> {
        match src {
            FunctionSource::Path(rel) => {
                let text = self.read_input(rel)?;
                PeriodicFunction::from_json_str(&text).map_err(core)
            }
            FunctionSource::Inline(doc) => PeriodicFunction::from_doc(doc).map_err(core),
        }
    }

    pub fn hash(&self) -> String {
        hex::encode(self.hasher.clone().finalize())
    }
}

pub fn builtin_polytope(name: &str) -> Result<ConvexPolytope, CliError> {
    match name {
        "unit_square" => Ok(ConvexPolytope::unit_square()),
        "golden_square" => Ok(ConvexPolytope::golden_square()),
        "unit_cube" => Ok(ConvexPolytope::unit_cube()),
        "hexagon" => ConvexPolytope::regular_polygon(6, 1.0, [0.0, 0.0]).map_err(core),
        other => Err(CliError::Validation(format!(
            "unknown built-in polytope {other:?} (expected unit_square, golden_square, unit_cube or hexagon)"
        ))),
    }
}
