//! Checkpoint files: a single-line JSON manifest naming tensors, shapes and
//! offsets, followed by a little-endian 64-bit-float binary section.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl NamedTensor {
    pub fn from_matrix(name: &str, m: &DenseMatrix) -> Self {
        NamedTensor {
            name: name.to_string(),
            shape: vec![m.rows(), m.cols()],
            data: m.values().to_vec(),
        }
    }

    pub fn from_vector(name: &str, v: &[f64]) -> Self {
        NamedTensor {
            name: name.to_string(),
            shape: vec![v.len()],
            data: v.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub epoch: u64,
    pub seed: u64,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub version: u32,
    pub tensors: Vec<NamedTensor>,
    pub meta: CheckpointMeta,
}

#[derive(Serialize, Deserialize)]
struct ManifestTensor {
    name: String,
    shape: Vec<usize>,
    offset: usize,
    len: usize,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    tensors: Vec<ManifestTensor>,
    meta: CheckpointMeta,
}

impl Checkpoint {
    pub fn new(tensors: Vec<NamedTensor>, meta: CheckpointMeta) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            tensors,
            meta,
        }
    }

    pub fn tensor(&self, name: &str) -> Option<&NamedTensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    /// Fetch a 2-D tensor as a matrix.
    pub fn matrix(&self, name: &str) -> Result<DenseMatrix> {
        let t = self
            .tensor(name)
            .ok_or_else(|| Error::invalid_argument(format!("checkpoint has no tensor {name:?}")))?;
        if t.shape.len() != 2 {
            return Err(Error::invalid_argument(format!(
                "tensor {name:?} has shape {:?}, expected 2-D",
                t.shape
            )));
        }
        DenseMatrix::from_vec(t.shape[0], t.shape[1], t.data.clone())
    }

    pub fn vector(&self, name: &str) -> Result<Vec<f64>> {
        let t = self
            .tensor(name)
            .ok_or_else(|| Error::invalid_argument(format!("checkpoint has no tensor {name:?}")))?;
        if t.shape.len() != 1 {
            return Err(Error::invalid_argument(format!(
                "tensor {name:?} has shape {:?}, expected 1-D",
                t.shape
            )));
        }
        Ok(t.data.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut offset = 0usize;
        let mut manifest_tensors = Vec::with_capacity(self.tensors.len());
        for t in &self.tensors {
            let len: usize = t.shape.iter().product();
            if len != t.data.len() {
                return Err(Error::invalid_argument(format!(
                    "tensor {:?}: shape {:?} does not match {} values",
                    t.name,
                    t.shape,
                    t.data.len()
                )));
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid_argument(format!(
                    "tensor {:?} contains non-finite values",
                    t.name
                )));
            }
            manifest_tensors.push(ManifestTensor {
                name: t.name.clone(),
                shape: t.shape.clone(),
                offset,
                len,
            });
            offset += len;
        }
        let manifest = Manifest {
            version: self.version,
            tensors: manifest_tensors,
            meta: self.meta.clone(),
        };
        let mut bytes = serde_json::to_string(&manifest)?.into_bytes();
        bytes.push(b'\n');
        for t in &self.tensors {
            for v in &t.data {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        if !path.is_file() {
            return Err(Error::NotFound(path.to_path_buf()));
        }
        let bytes = fs::read(path)?;
        let file = path.display().to_string();
        let newline = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::format(&file, 1, "missing manifest line"))?;
        let manifest: Manifest = serde_json::from_slice(&bytes[..newline])
            .map_err(|e| Error::format(&file, 1, e.to_string()))?;
        if manifest.version != CHECKPOINT_VERSION {
            return Err(Error::format(
                &file,
                1,
                format!("unsupported checkpoint version {}", manifest.version),
            ));
        }
        let binary = &bytes[newline + 1..];
        let mut expected_offset = 0usize;
        let mut tensors = Vec::with_capacity(manifest.tensors.len());
        for mt in &manifest.tensors {
            let product: usize = mt.shape.iter().product();
            if mt.len != product {
                return Err(Error::format(
                    &file,
                    1,
                    format!("tensor {:?}: len {} != shape product {}", mt.name, mt.len, product),
                ));
            }
            if mt.offset != expected_offset {
                return Err(Error::format(
                    &file,
                    1,
                    format!("tensor {:?}: offset {} out of order", mt.name, mt.offset),
                ));
            }
            expected_offset += mt.len;
            let start = mt.offset * 8;
            let end = start + mt.len * 8;
            if end > binary.len() {
                return Err(Error::format(
                    &file,
                    1,
                    format!("tensor {:?} extends past end of file", mt.name),
                ));
            }
            let data: Vec<f64> = binary[start..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if data.iter().any(|v| !v.is_finite()) {
                return Err(Error::format(
                    &file,
                    1,
                    format!("tensor {:?} contains non-finite values", mt.name),
                ));
            }
            tensors.push(NamedTensor {
                name: mt.name.clone(),
                shape: mt.shape.clone(),
                data,
            });
        }
        if binary.len() != expected_offset * 8 {
            return Err(Error::format(
                &file,
                1,
                format!(
                    "binary section has {} bytes, manifest expects {}",
                    binary.len(),
                    expected_offset * 8
                ),
            ));
        }
        Ok(Checkpoint {
            version: manifest.version,
            tensors,
            meta: manifest.meta,
        })
    }
}

/// SHA-256 hex digest of a configuration's canonical JSON form.
pub fn config_digest<T: Serialize>(cfg: &T) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
