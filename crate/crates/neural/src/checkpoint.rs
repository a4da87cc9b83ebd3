//! Versioned JSON checkpoints: named parameter tensors plus an echo of the
//! model configuration and any model-specific extras.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{NeuralError, Result};
use crate::tensor::{Params, Tensor};

pub const CHECKPOINT_MAGIC: &str = "affectlag-checkpoint/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub magic: String,
    /// Model family, e.g. `"yun"`.
    pub kind: String,
    pub config: Value,
    pub labels: Vec<String>,
    pub tensors: Vec<NamedTensor>,
    #[serde(default)]
    pub extras: BTreeMap<String, Value>,
}

impl Checkpoint {
    pub fn new(kind: &str, config: Value, labels: Vec<String>, params: &Params) -> Self {
        let tensors = params
            .iter()
            .map(|(name, t)| NamedTensor {
                name: name.to_string(),
                shape: t.shape().to_vec(),
                data: t.data().to_vec(),
            })
            .collect();
        Self {
            magic: CHECKPOINT_MAGIC.to_string(),
            kind: kind.to_string(),
            config,
            labels,
            tensors,
            extras: BTreeMap::new(),
        }
    }

    /// Copies stored tensors into `params`, which must have been built with
    /// the same architecture (names, order and shapes).
    pub fn restore_into(&self, params: &mut Params) -> Result<()> {
        if self.tensors.len() != params.len() {
            return Err(NeuralError::Checkpoint(format!(
                "expected {} tensors, checkpoint has {}",
                params.len(),
                self.tensors.len()
            )));
        }
        let mut stored = Params::new();
        for nt in &self.tensors {
            stored.add(nt.name.clone(), Tensor::from_vec(&nt.shape, nt.data.clone())?);
        }
        params.copy_values_from(&stored)
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(NeuralError::Checkpoint(format!(
                "expected a {kind} checkpoint, found {}",
                self.kind
            )))
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        if ckpt.magic != CHECKPOINT_MAGIC {
            return Err(NeuralError::Checkpoint(format!(
                "unrecognized magic {:?}",
                ckpt.magic
            )));
        }
        Ok(ckpt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut params = Params::new();
        params.add(
            "w",
            Tensor::from_vec(&[2], vec![0.1 + 0.2, -1.0 / 3.0]).unwrap(),
        );
        let ckpt = Checkpoint::new("test", Value::Null, vec!["a".into()], &params);
        let dir = std::env::temp_dir().join(format!("ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        ckpt.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ckpt);
        let mut fresh = Params::new();
        fresh.add("w", Tensor::zeros(&[2]));
        back.restore_into(&mut fresh).unwrap();
        assert_eq!(fresh.get(fresh.find("w").unwrap()).data(), &[0.1 + 0.2, -1.0 / 3.0]);
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn rejects_wrong_magic_and_layout() {
        let mut params = Params::new();
        params.add("w", Tensor::zeros(&[2]));
        let mut ckpt = Checkpoint::new("test", Value::Null, vec![], &params);
        let mut other = Params::new();
        other.add("v", Tensor::zeros(&[2]));
        assert!(ckpt.restore_into(&mut other).is_err());

        ckpt.magic = "nope".into();
        let path = std::env::temp_dir().join(format!("ckpt-magic-{}.json", std::process::id()));
        ckpt.save(&path).unwrap();
        assert!(Checkpoint::load(&path).is_err());
        std::fs::remove_file(path).ok();
    }
}
