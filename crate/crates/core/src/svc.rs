//! L2-regularized, L1-loss (hinge) linear SVM trained by dual coordinate
//! descent, with one-vs-rest multiclass prediction.
//!
//! The bias is learned by appending a constant `1` feature, so it is
//! regularized together with the weights. For a binary problem the solver
//! maximizes
//!
//! ```text
//! D(a) = sum_i a_i - 1/2 || sum_i a_i y_i x~_i ||^2,   0 <= a_i <= C
//! ```
//!
//! one coordinate at a time, with the usual shrinking heuristic.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::{CodecError, Decoder, Encoder, Persist};
use crate::vector::FeatureVector;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SvcError {
    #[error("binary problem needs at least one example of each sign")]
    SingleSign,
    #[error("feature dimension {found} does not match expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("class {0} has no training examples")]
    MissingClass(usize),
    #[error("label {label} out of range for {class_count} classes")]
    LabelOutOfRange { label: usize, class_count: usize },
    #[error("targets must be +1 or -1, got {0}")]
    InvalidTarget(f64),
    #[error("{0} features but {1} targets")]
    LengthMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvcParams {
    pub c: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SvcParams {
    fn default() -> Self {
        Self {
            c: 100.0,
            tolerance: 1e-4,
            max_sweeps: 1000,
            seed: 0,
        }
    }
}

impl SvcParams {
    pub fn validate(&self) -> Result<(), SvcError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(SvcError::InvalidParams(format!("C must be positive, got {}", self.c)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(SvcError::InvalidParams(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_sweeps == 0 {
            return Err(SvcError::InvalidParams("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// Result of one binary solve.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alpha: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Dual objective before the first sweep and after every sweep.
    pub dual_history: Vec<f64>,
}

impl BinarySolution {
    pub fn decision<F: FeatureVector>(&self, x: &F) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn dual_objective(&self) -> f64 {
        dual_objective(&self.alpha, &self.weights, self.bias)
    }
}

fn dual_objective(alpha: &[f64], weights: &[f64], bias: f64) -> f64 {
    let sq: f64 = weights.iter().map(|w| w * w).sum::<f64>() + bias * bias;
    alpha.iter().sum::<f64>() - 0.5 * sq
}

/// Primal objective `1/2 ||w~||^2 + C sum_i max(0, 1 - y_i w~.x~_i)`.
pub fn primal_objective<F: FeatureVector>(features: &[F], targets: &[f64], weights: &[f64], bias: f64, c: f64) -> f64 {
    let reg = 0.5 * (weights.iter().map(|w| w * w).sum::<f64>() + bias * bias);
    let loss: f64 = features
        .iter()
        .zip(targets)
        .map(|(x, &y)| (1.0 - y * (x.dot(weights) + bias)).max(0.0))
        .sum();
    reg + c * loss
}

fn check_dims<F: FeatureVector>(features: &[F]) -> Result<usize, SvcError> {
    let dim = features.first().map_or(0, |x| x.dim());
    match features.iter().find(|x| x.dim() != dim) {
        Some(x) => Err(SvcError::DimensionMismatch {
            expected: dim,
            found: x.dim(),
        }),
        None => Ok(dim),
    }
}

pub fn train_binary<F: FeatureVector>(
    features: &[F],
    targets: &[f64],
    params: &SvcParams,
) -> Result<BinarySolution, SvcError> {
    params.validate()?;
    if features.len() != targets.len() {
        return Err(SvcError::LengthMismatch(features.len(), targets.len()));
    }
    if let Some(&y) = targets.iter().find(|&&y| y != 1.0 && y != -1.0) {
        return Err(SvcError::InvalidTarget(y));
    }
    if !(targets.contains(&1.0) && targets.contains(&-1.0)) {
        return Err(SvcError::SingleSign);
    }
    let dim = check_dims(features)?;
    Ok(solve_dual(features, targets, dim, params))
}

fn solve_dual<F: FeatureVector>(features: &[F], y: &[f64], dim: usize, params: &SvcParams) -> BinarySolution {
    let l = features.len();
    let c = params.c;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut alpha = vec![0.0; l];
    let qd: Vec<f64> = features.iter().map(|x| x.squared_norm() + 1.0).collect();
    let mut index: Vec<usize> = (0..l).collect();
    let mut active = l;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // shrinking thresholds from the previous sweep
    let mut pg_max_old = f64::INFINITY;
    let mut pg_min_old = f64::NEG_INFINITY;
    let mut history = vec![0.0];
    let mut sweeps = 0;
    let mut converged = false;

    while sweeps < params.max_sweeps {
        index[..active].shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        let mut s = 0;
        while s < active {
            let i = index[s];
            let g = y[i] * (features[i].dot(&w) + b) - 1.0;
            let mut pg = 0.0;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g < 0.0 {
                    pg = g;
                }
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g > 0.0 {
                    pg = g;
                }
            } else {
                pg = g;
            }
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let d = (alpha[i] - old) * y[i];
                features[i].add_scaled_to(d, &mut w);
                b += d;
            }
            s += 1;
        }
        sweeps += 1;
        history.push(dual_objective(&alpha, &w, b));

        if pg_max.max(-pg_min) < params.tolerance {
            if active == l {
                converged = true;
                break;
            }
            // re-check the full set before declaring convergence
            active = l;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
    }
    if !converged {
        log::debug!("dual coordinate descent stopped after {sweeps} sweeps without reaching tolerance");
    }
    BinarySolution {
        weights: w,
        bias: b,
        alpha,
        sweeps,
        converged,
        dual_history: history,
    }
}

/// One hyperplane per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvcModel {
    pub weight_matrix: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub class_names: Vec<String>,
    pub params: SvcParams,
    dimension: usize,
}

pub fn train_ovr<F: FeatureVector + Sync>(
    features: &[F],
    labels: &[usize],
    class_count: usize,
    params: &SvcParams,
) -> Result<LinearSvcModel, SvcError> {
    params.validate()?;
    if class_count < 2 {
        return Err(SvcError::InvalidParams("at least two classes required".into()));
    }
    if features.len() != labels.len() {
        return Err(SvcError::LengthMismatch(features.len(), labels.len()));
    }
    let mut counts = vec![0usize; class_count];
    for &label in labels {
        if label >= class_count {
            return Err(SvcError::LabelOutOfRange { label, class_count });
        }
        counts[label] += 1;
    }
    if let Some(missing) = counts.iter().position(|&n| n == 0) {
        return Err(SvcError::MissingClass(missing));
    }
    let dimension = check_dims(features)?;
    let rows: Vec<BinarySolution> = (0..class_count)
        .into_par_iter()
        .map(|class| {
            let targets: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            solve_dual(features, &targets, dimension, params)
        })
        .collect();
    let (weight_matrix, bias) = rows.into_iter().map(|s| (s.weights, s.bias)).unzip();
    Ok(LinearSvcModel {
        weight_matrix,
        bias,
        class_names: (0..class_count).map(|c| c.to_string()).collect(),
        params: *params,
        dimension,
    })
}

impl LinearSvcModel {
    pub fn from_parts(
        weight_matrix: Vec<Vec<f64>>,
        bias: Vec<f64>,
        class_names: Vec<String>,
        params: SvcParams,
    ) -> Result<Self, SvcError> {
        let dimension = weight_matrix.first().map_or(0, Vec::len);
        if weight_matrix.len() != bias.len() || weight_matrix.len() != class_names.len() {
            return Err(SvcError::InvalidParams("inconsistent class counts".into()));
        }
        if let Some(row) = weight_matrix.iter().find(|r| r.len() != dimension) {
            return Err(SvcError::DimensionMismatch {
                expected: dimension,
                found: row.len(),
            });
        }
        Ok(Self {
            weight_matrix,
            bias,
            class_names,
            params,
            dimension,
        })
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.class_count(), "one name per class");
        self.class_names = names;
        self
    }

    pub fn class_count(&self) -> usize {
        self.bias.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn decision_values<F: FeatureVector>(&self, x: &F) -> Result<Vec<f64>, SvcError> {
        if x.dim() != self.dimension {
            return Err(SvcError::DimensionMismatch {
                expected: self.dimension,
                found: x.dim(),
            });
        }
        Ok(self
            .weight_matrix
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| x.dot(w) + b)
            .collect())
    }

    /// Index of the largest decision value; the lowest index wins ties.
    pub fn predict<F: FeatureVector>(&self, x: &F) -> Result<usize, SvcError> {
        Ok(argmax(&self.decision_values(x)?))
    }

    pub fn predict_all<F: FeatureVector>(&self, xs: &[F]) -> Result<Vec<usize>, SvcError> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

/// First index holding the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl Persist for LinearSvcModel {
    const KIND: u8 = 3;

    fn encode(&self, enc: &mut Encoder) {
        enc.f64(self.params.c);
        enc.f64(self.params.tolerance);
        enc.usize(self.params.max_sweeps);
        enc.u64(self.params.seed);
        enc.usize(self.dimension);
        enc.usize(self.class_count());
        for ((name, row), b) in self.class_names.iter().zip(&self.weight_matrix).zip(&self.bias) {
            enc.str(name);
            enc.f64(*b);
            enc.f64s(row);
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let params = SvcParams {
            c: dec.f64()?,
            tolerance: dec.f64()?,
            max_sweeps: dec.usize()?,
            seed: dec.u64()?,
        };
        let dimension = dec.usize()?;
        let n = dec.len(16)?;
        let mut names = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        let mut bias = Vec::with_capacity(n);
        for _ in 0..n {
            names.push(dec.str()?);
            bias.push(dec.f64()?);
            let at = dec.offset();
            let row = dec.f64s()?;
            if row.len() != dimension {
                return Err(CodecError::CorruptFile(at));
            }
            rows.push(row);
        }
        let at = dec.offset();
        let mut model = LinearSvcModel::from_parts(rows, bias, names, params).map_err(|_| CodecError::CorruptFile(at))?;
        model.dimension = dimension;
        Ok(model)
    }
}
