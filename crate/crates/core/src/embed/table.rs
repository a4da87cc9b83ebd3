use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::EmbedError;

/// Key → vector lookup. Missing keys read as the zero vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    keys: Vec<String>,
    key_index: BTreeMap<String, usize>,
    matrix: Vec<f64>,
    dim: usize,
    zeros: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(keys: Vec<String>, matrix: Vec<f64>, dim: usize) -> Result<Self, EmbedError> {
        let fail = |message: String| Err(EmbedError::Format { line: 0, message });
        if dim == 0 {
            return fail("dim must be >= 1".into());
        }
        if matrix.len() != keys.len() * dim {
            return fail(format!(
                "{} values for {} keys of dim {dim}",
                matrix.len(),
                keys.len()
            ));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return fail("non-finite value".into());
        }
        let mut key_index = BTreeMap::new();
        for (i, k) in keys.iter().enumerate() {
            if k.is_empty() || k.chars().any(char::is_whitespace) {
                return fail(format!("invalid key {k:?}"));
            }
            if key_index.insert(k.clone(), i).is_some() {
                return fail(format!("duplicate key {k:?}"));
            }
        }
        Ok(Self {
            keys,
            key_index,
            matrix,
            dim,
            zeros: vec![0.0; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn contains(&self, key: &str) -> bool {
        self.key_index.contains_key(key)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.key_index.get(key).map(|&i| self.row(i))
    }

    pub fn get_or_zeros(&self, key: &str) -> &[f64] {
        self.get(key).unwrap_or(&self.zeros)
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Text vector format: a `count dim` header, then `key v1 .. vdim`.
    /// Values use the shortest round-trip representation.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.keys.len(), self.dim)?;
        for (i, k) in self.keys.iter().enumerate() {
            w.write_all(k.as_bytes())?;
            for v in self.row(i) {
                write!(w, " {v}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self, EmbedError> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(EmbedError::Format {
            line: 1,
            message: "missing header".into(),
        })??;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| EmbedError::Format {
                line: 1,
                message: format!("bad header {header:?}: {e}"),
            })?;
        let [count, dim] = head[..] else {
            return Err(EmbedError::Format {
                line: 1,
                message: format!("header must be `count dim`, got {header:?}"),
            });
        };
        let mut keys = Vec::with_capacity(count);
        let mut matrix = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default().to_string();
            let before = matrix.len();
            for tok in parts {
                let v: f64 = tok.parse().map_err(|e| EmbedError::Format {
                    line: lineno,
                    message: format!("bad value {tok:?}: {e}"),
                })?;
                matrix.push(v);
            }
            if matrix.len() - before != dim {
                return Err(EmbedError::Format {
                    line: lineno,
                    message: format!("expected {dim} values, got {}", matrix.len() - before),
                });
            }
            keys.push(key);
        }
        if keys.len() != count {
            return Err(EmbedError::Format {
                line: 1,
                message: format!("header declares {count} rows, found {}", keys.len()),
            });
        }
        Self::new(keys, matrix, dim)
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbedError> {
        self.write_text(BufWriter::new(File::create(path)?))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EmbedError> {
        Self::read_text(BufReader::new(File::open(path)?))
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
