//! Phrase embeddings behind a small trait.

use std::collections::HashMap;
use std::path::Path;

use super::dictionary::tokenize;
use crate::error::{Error, Result};

/// Deterministic text embedding with unit L2 norm.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f64>;
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    } else if let Some(first) = v.first_mut() {
        *first = 1.0;
    }
    v
}

/// 64-bit FNV-1a.
pub fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Bag of words: each token adds one count to bucket `fnv1a(token) mod dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedding {
    dim: usize,
}

impl HashEmbedding {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashEmbedding { dim }
    }

    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a(token) % self.dim as u64) as usize
    }
}

impl Default for HashEmbedding {
    fn default() -> Self {
        HashEmbedding::new(256)
    }
}

impl EmbeddingProvider for HashEmbedding {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for t in tokenize(text) {
            v[self.bucket(&t)] += 1.0;
        }
        normalized(v)
    }
}

/// Token vectors loaded from a text table: a `count dim` header, then `token v1 ... vdim`
/// per line. A phrase embeds as the mean of its known token vectors; phrases with no
/// known token fall back to hashing.
#[derive(Debug, Clone)]
pub struct FileEmbedding {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
    fallback: HashEmbedding,
}

impl FileEmbedding {
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { file: file.to_string(), line, message };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| perr(1, "missing header".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| perr(1, format!("bad header: {e}")))?;
        let [count, dim] = nums[..] else {
            return Err(perr(1, "header must be `count dim`".into()));
        };
        if dim == 0 {
            return Err(perr(1, "dimension must be positive".into()));
        }
        let mut table = HashMap::with_capacity(count);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-empty line").to_lowercase();
            let v: Vec<f64> = parts
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(i + 1, format!("bad value: {e}")))?;
            if v.len() != dim {
                return Err(perr(i + 1, format!("expected {dim} values, got {}", v.len())));
            }
            table.insert(token, v);
        }
        if table.len() != count {
            return Err(perr(1, format!("header says {count} rows, found {}", table.len())));
        }
        Ok(FileEmbedding { dim, table, fallback: HashEmbedding::new(dim) })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

impl EmbeddingProvider for FileEmbedding {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let mut hits = 0;
        for t in tokenize(text) {
            if let Some(row) = self.table.get(&t) {
                v.iter_mut().zip(row).for_each(|(a, b)| *a += b);
                hits += 1;
            }
        }
        if hits == 0 {
            return self.fallback.embed(text);
        }
        normalized(v)
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
