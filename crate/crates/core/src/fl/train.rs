use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::data::{DataShard, Dataset};
use super::model::{ModelState, Objective};

/// Local optimisation and on-board compute parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig<T> {
    /// `I`: local epochs per round.
    pub local_epochs: usize,
    /// `η`.
    pub learning_rate: T,
    /// `b_k`.
    pub batch_size: usize,
    /// `c_k`: processor cycles per training sample.
    pub cycles_per_sample: T,
    /// `f_k`: processor frequency (Hz).
    pub cpu_freq: T,
    /// Seed of the mini-batch shuffles.
    pub seed: u64,
}

impl<T: Scalar> Default for TrainingConfig<T> {
    fn default() -> Self {
        Self {
            local_epochs: 100,
            learning_rate: T::lit(0.001),
            batch_size: 32,
            cycles_per_sample: T::lit(1e3),
            cpu_freq: T::lit(1e9),
            seed: 0,
        }
    }
}

impl<T: Scalar> TrainingConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.local_epochs < 1 {
            return Err(Error::Invalid("local_epochs I must be >= 1".into()));
        }
        if !(self.learning_rate > T::zero() && self.learning_rate.is_finite()) {
            return Err(Error::Invalid("learning_rate must be > 0".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Invalid("batch_size b_k must be >= 1".into()));
        }
        if !(self.cpu_freq > T::zero() && self.cpu_freq.is_finite()) {
            return Err(Error::Invalid("cpu_freq f_k must be > 0".into()));
        }
        if !(self.cycles_per_sample >= T::zero() && self.cycles_per_sample.is_finite()) {
            return Err(Error::Invalid("cycles_per_sample c_k must be >= 0".into()));
        }
        Ok(())
    }

    /// `n_k = ⌈m_k / b_k⌉`.
    pub fn num_batches(&self, sample_count: usize) -> usize {
        sample_count.div_ceil(self.batch_size)
    }
}

/// On-board training time `I·n_k·b_k·c_k / f_k`.
pub fn training_time<T: Scalar>(sample_count: usize, cfg: &TrainingConfig<T>) -> Result<T> {
    if sample_count == 0 {
        return Err(Error::domain("training_time needs m_k >= 1"));
    }
    let n = cfg.num_batches(sample_count);
    Ok(T::count(cfg.local_epochs) * T::count(n) * T::count(cfg.batch_size) * cfg.cycles_per_sample / cfg.cpu_freq)
}

/// `F_k(w)`: mean loss over the shard.
pub fn local_loss<T: Scalar, O: Objective<T>>(objective: &O, weights: &[T], shard: &Dataset<T>) -> Result<T> {
    objective.check(weights)?;
    if shard.is_empty() {
        return Err(Error::domain("local_loss on an empty shard"));
    }
    let rows: Vec<usize> = (0..shard.len()).collect();
    Ok(objective.loss_grad(weights, shard, &rows, None))
}

/// `F(w) = Σ (m_k/m)·F_k(w)`.
pub fn global_loss<T: Scalar, O: Objective<T>>(objective: &O, shards: &[DataShard<T>], weights: &[T]) -> Result<T> {
    let m: usize = shards.iter().map(DataShard::size).sum();
    if m == 0 {
        return Err(Error::domain("global_loss needs non-empty shards"));
    }
    let mut total = T::zero();
    for shard in shards.iter().filter(|s| s.size() > 0) {
        total += T::count(shard.size()) / T::count(m) * local_loss(objective, weights, &shard.data)?;
    }
    Ok(total)
}

/// `I` epochs of mini-batch SGD over a seeded per-epoch shuffle; the final
/// batch of an epoch may be short.
pub fn local_train<T: Scalar, O: Objective<T>>(
    objective: &O,
    model: &ModelState<T>,
    shard: &Dataset<T>,
    cfg: &TrainingConfig<T>,
) -> Result<ModelState<T>> {
    objective.check(&model.weights)?;
    if shard.is_empty() {
        return Err(Error::domain("local_train on an empty shard"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights = model.weights.clone();
    let mut grad = vec![T::zero(); weights.len()];
    let mut order: Vec<usize> = (0..shard.len()).collect();
    for epoch in 0..cfg.local_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            objective.loss_grad(&weights, shard, batch, Some(&mut grad));
            for (w, g) in weights.iter_mut().zip(&grad) {
                *w -= cfg.learning_rate * *g;
            }
        }
        if !weights.iter().all(|w| w.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
    }
    Ok(ModelState::new(weights, shard.class_histogram()))
}

/// Fraction of rows whose arg-max prediction matches the label.
pub fn evaluate<T: Scalar, O: Objective<T>>(objective: &O, weights: &[T], test: &Dataset<T>) -> Result<T> {
    objective.check(weights)?;
    if test.is_empty() {
        return Err(Error::domain("evaluate on an empty test set"));
    }
    let correct = (0..test.len())
        .filter(|&i| objective.predict(weights, test.row(i)) == test.label(i))
        .count();
    Ok(T::count(correct) / T::count(test.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl::{gaussian_blobs, SoftmaxRegression, SyntheticSpec};
    use rand::Rng;

    fn toy(n: usize, seed: u64) -> Dataset<f64> {
        gaussian_blobs(&SyntheticSpec { num_samples: n, dim: 4, num_classes: 3, separation: 3.0 }, seed).unwrap()
    }

    #[test]
    fn training_time_arithmetic() {
        let cfg = TrainingConfig::<f64>::default();
        // n_k = ceil(1000/32) = 32; 100*32*32*1e3/1e9
        assert!((training_time(1000, &cfg).unwrap() - 0.1024).abs() < 1e-15);
        let double = TrainingConfig { local_epochs: 200, ..cfg.clone() };
        assert_eq!(training_time(1000, &double).unwrap(), 2.0 * training_time(1000, &cfg).unwrap());
        assert_eq!(cfg.num_batches(20), 1);
        assert!(training_time(0, &cfg).is_err());
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let d = toy(30, 1);
        let m = SoftmaxRegression::new(4, 3);
        let start = ModelState::new(vec![0.3; 15], vec![0; 3]);
        // validate() rejects eta = 0; the optimiser itself still treats it as identity
        let cfg = TrainingConfig { learning_rate: 0.0, local_epochs: 3, ..TrainingConfig::default() };
        let out = local_train(&m, &start, &d, &cfg).unwrap();
        assert_eq!(out.weights, start.weights);
        assert_eq!(out.sample_count, 30);
    }

    #[test]
    fn full_batch_step_matches_finite_difference_gradient() {
        let d = toy(25, 2);
        let m = SoftmaxRegression::new(4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w: Vec<f64> = (0..15).map(|_| rng.random_range(-0.5..0.5)).collect();
        let eta = 0.05;
        let cfg = TrainingConfig { learning_rate: eta, local_epochs: 1, batch_size: 25, ..TrainingConfig::default() };
        let out = local_train(&m, &ModelState::new(w.clone(), vec![0; 3]), &d, &cfg).unwrap();
        let h = 1e-5;
        for j in 0..w.len() {
            let mut p = w.clone();
            let mut q = w.clone();
            p[j] += h;
            q[j] -= h;
            let fd = (local_loss(&m, &p, &d).unwrap() - local_loss(&m, &q, &d).unwrap()) / (2.0 * h);
            let expect = w[j] - eta * fd;
            let step = w[j] - out.weights[j];
            assert!((out.weights[j] - expect).abs() <= 1e-4 * step.abs().max(1e-8), "param {j}");
        }
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let d = toy(90, 3);
        let m = SoftmaxRegression::new(4, 3);
        let start = ModelState::zeros(15, 3);
        let cfg = TrainingConfig { learning_rate: 0.01, local_epochs: 5, batch_size: 8, seed: 11, ..TrainingConfig::default() };
        let a = local_train(&m, &start, &d, &cfg).unwrap();
        let b = local_train(&m, &start, &d, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(local_loss(&m, &a.weights, &d).unwrap() < local_loss(&m, &start.weights, &d).unwrap());
    }

    #[test]
    fn divergence_reports_epoch() {
        let d = toy(30, 4);
        let m = SoftmaxRegression::new(4, 3);
        let start = ModelState::new(vec![f64::MAX / 2.0; 15], vec![0; 3]);
        let cfg = TrainingConfig { learning_rate: 1e300, local_epochs: 4, ..TrainingConfig::default() };
        assert!(matches!(local_train(&m, &start, &d, &cfg), Err(Error::Divergence { epoch: 0 })));
    }

    #[test]
    fn loss_is_mean_over_samples() {
        let d = toy(40, 6);
        let m = SoftmaxRegression::new(4, 3);
        let w = vec![0.1; 15];
        let doubled = d.concat(&d).unwrap();
        let a = local_loss(&m, &w, &d).unwrap();
        assert!((a - local_loss(&m, &w, &doubled).unwrap()).abs() < 1e-12);
        assert!(local_loss(&m, &w, &Dataset::empty(4, 3)).is_err());
    }

    #[test]
    fn evaluation_cases() {
        let m = SoftmaxRegression::new(2, 3);
        let one = Dataset::new(2, 3, vec![1.0, 0.0], vec![2]).unwrap();
        // bias of class 2 dominates
        let w = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(evaluate(&m, &w, &one).unwrap(), 1.0);
        assert!(evaluate(&m, &w, &Dataset::empty(2, 3)).is_err());
    }
}
