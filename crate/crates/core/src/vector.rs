//! Sparse and dense feature vectors.

/// A sparse vector with strictly increasing indices and non-zero, finite
/// values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    dimension: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn empty(dimension: usize) -> Self {
        Self {
            dimension,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a vector from `(index, value)` pairs in any order. Zero
    /// values are dropped.
    ///
    /// # Panics
    ///
    /// On out-of-range or repeated indices, or non-finite values.
    pub fn from_pairs(dimension: usize, mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_unstable_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            assert!(i < dimension, "index {i} out of range for dimension {dimension}");
            assert!(v.is_finite(), "non-finite value at index {i}");
            assert!(indices.last().is_none_or(|&last| last < i), "repeated index {i}");
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Self {
            dimension,
            indices,
            values,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Value at `index`, zero when absent.
    pub fn get(&self, index: usize) -> f64 {
        self.indices
            .binary_search(&index)
            .map_or(0.0, |pos| self.values[pos])
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    /// Concatenates blocks, shifting each block's indices past the
    /// preceding blocks' dimensions.
    pub fn concat(blocks: &[SparseVector]) -> SparseVector {
        let dimension = blocks.iter().map(|b| b.dimension).sum();
        let nnz = blocks.iter().map(|b| b.nnz()).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        let mut offset = 0;
        for b in blocks {
            indices.extend(b.indices.iter().map(|i| i + offset));
            values.extend_from_slice(&b.values);
            offset += b.dimension;
        }
        SparseVector {
            dimension,
            indices,
            values,
        }
    }
}

/// A dense real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector(pub Vec<f64>);

impl DenseVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Operations the linear solver needs from a training example.
pub trait FeatureVector {
    fn dim(&self) -> usize;
    fn dot(&self, weights: &[f64]) -> f64;
    /// `weights += scale * self`
    fn add_scaled_to(&self, scale: f64, weights: &mut [f64]);
    fn squared_norm(&self) -> f64;
}

impl FeatureVector for SparseVector {
    fn dim(&self) -> usize {
        self.dimension
    }

    fn dot(&self, weights: &[f64]) -> f64 {
        self.iter().map(|(i, v)| weights[i] * v).sum()
    }

    fn add_scaled_to(&self, scale: f64, weights: &mut [f64]) {
        for (i, v) in self.iter() {
            weights[i] += scale * v;
        }
    }

    fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

impl FeatureVector for DenseVector {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn dot(&self, weights: &[f64]) -> f64 {
        self.0.iter().zip(weights).map(|(a, b)| a * b).sum()
    }

    fn add_scaled_to(&self, scale: f64, weights: &mut [f64]) {
        for (w, x) in weights.iter_mut().zip(&self.0) {
            *w += scale * x;
        }
    }

    fn squared_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}
