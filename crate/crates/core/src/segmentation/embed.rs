use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use super::chunk::DialogueChunk;
use super::SegmentationError;
use crate::text::{fnv1a, tokens};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ProviderError(pub String);

/// Maps chunk text to a fixed-dimension vector.
pub trait EmbeddingProvider {
    fn embed(&self, chunk_id: &str, text: &str) -> Result<Vec<f64>, ProviderError>;
}

/// Offline embedding: case-folded tokens hashed into buckets, L2-normalized.
#[derive(Debug, Clone, Copy)]
pub struct HashedBagOfWords {
    pub dims: usize,
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        Self { dims: 256 }
    }
}

impl HashedBagOfWords {
    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a(token.as_bytes()) % self.dims as u64) as usize
    }

    pub fn vector(&self, text: &str) -> Vec<f64> {
        let mut v = alloc::vec![0.0; self.dims];
        for tok in tokens(text) {
            v[self.bucket(&tok)] += 1.0;
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

impl EmbeddingProvider for HashedBagOfWords {
    fn embed(&self, _chunk_id: &str, text: &str) -> Result<Vec<f64>, ProviderError> {
        Ok(self.vector(text))
    }
}

/// Attaches an embedding to every chunk; all vectors must share one dimension.
pub fn embed_chunks(chunks: &mut [DialogueChunk], provider: &dyn EmbeddingProvider) -> Result<(), SegmentationError> {
    let mut dims = None;
    for chunk in chunks.iter_mut() {
        let v = provider
            .embed(&chunk.id, &chunk.text)
            .map_err(|e| SegmentationError::Provider {
                chunk_id: chunk.id.clone(),
                message: e.0,
            })?;
        match dims {
            None => dims = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(SegmentationError::DimensionMismatch {
                    chunk_id: chunk.id.clone(),
                    expected: d,
                    got: v.len(),
                })
            }
            Some(_) => {}
        }
        chunk.embedding = Some(v);
    }
    Ok(())
}

/// Cosine similarity; `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum::<f64>());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum::<f64>());
    (na > 0.0 && nb > 0.0).then(|| dot / (na * nb))
}
