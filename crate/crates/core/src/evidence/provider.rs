use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::{EmbeddingVector, EvidenceError, Result};

pub const DEFAULT_DIM: usize = 256;

/// Maps text to unit vectors of a fixed dimension.
///
/// Implementations must be deterministic. Returned vectors are expected to
/// be L2-normalized; [`EmbeddingVector::normalized`] is the usual way to get
/// there.
pub trait EmbeddingProvider: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector>;
}

/// Lower-cased alphanumeric runs.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Signed feature hashing of token counts.
///
/// Each token lands in bucket `fnv1a(token) % dim` with sign taken from the
/// hash's top bit. Text without tokens embeds as the first basis vector.
#[derive(Debug, Clone)]
pub struct HashingProvider {
    dim: usize,
    name: String,
}

impl HashingProvider {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            name: format!("hashing-{dim}"),
        }
    }

    /// Unnormalized signed counts.
    pub fn raw_counts(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for t in tokens(text) {
            let h = fnv1a(t.as_bytes());
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            v[(h % self.dim as u64) as usize] += sign;
        }
        v
    }
}

impl Default for HashingProvider {
    fn default() -> Self {
        Self::new(DEFAULT_DIM)
    }
}

impl EmbeddingProvider for HashingProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        Ok(EmbeddingVector::normalized(self.raw_counts(text)))
    }
}

/// Key under which a text's vector is stored in a sidecar file.
pub fn sidecar_key(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Precomputed vectors read from a sidecar file.
///
/// Lines are `key<TAB>v1,v2,...,vD` where `key` is [`sidecar_key`] of the
/// text. Blank lines and `#` comments are ignored. Vectors are normalized
/// on load.
#[derive(Debug, Clone)]
pub struct SidecarProvider {
    name: String,
    dim: usize,
    vectors: HashMap<String, EmbeddingVector>,
}

impl SidecarProvider {
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: String| EvidenceError::Sidecar { line: i + 1, message: m };
            let (key, values) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected `key<TAB>values`".into()))?;
            let values = values
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| bad(format!("`{v}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(bad("non-finite component".into()));
            }
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(bad(format!("expected {d} components, found {}", values.len())))
                }
                Some(_) => {}
            }
            if values.iter().all(|v| *v == 0.0) {
                return Err(bad("zero vector".into()));
            }
            vectors.insert(key.trim().to_owned(), EmbeddingVector::normalized(values));
        }
        let dim = dim.ok_or(EvidenceError::Sidecar {
            line: 0,
            message: "no vectors".into(),
        })?;
        Ok(Self {
            name: name.into(),
            dim,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for SidecarProvider {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let key = sidecar_key(text);
        self.vectors
            .get(&key)
            .cloned()
            .ok_or(EvidenceError::MissingVector(key))
    }
}
