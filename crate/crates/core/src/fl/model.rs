use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::data::Dataset;

/// Weights of one model plus the size and label mix of the data behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState<T> {
    pub weights: Vec<T>,
    /// `m_k`: number of samples the weights were trained on.
    pub sample_count: usize,
    pub class_histogram: Vec<usize>,
}

impl<T: Scalar> ModelState<T> {
    pub fn new(weights: Vec<T>, class_histogram: Vec<usize>) -> Self {
        Self {
            weights,
            sample_count: class_histogram.iter().sum(),
            class_histogram,
        }
    }

    /// Untrained global model: zero weights and no data behind it.
    pub fn zeros(num_params: usize, num_classes: usize) -> Self {
        Self::new(vec![T::zero(); num_params], vec![0; num_classes])
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }
}

/// Per-sample loss with an analytic gradient over a flat weight vector.
pub trait Objective<T: Scalar>: Sync {
    fn num_params(&self) -> usize;

    /// Mean loss over `rows` of `data`; when `grad` is given it receives the
    /// mean gradient (overwritten, not accumulated).
    fn loss_grad(&self, weights: &[T], data: &Dataset<T>, rows: &[usize], grad: Option<&mut [T]>) -> T;

    fn predict(&self, weights: &[T], x: &[T]) -> usize;

    fn check(&self, weights: &[T]) -> Result<()> {
        if weights.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                got: weights.len(),
            });
        }
        Ok(())
    }
}

/// Multinomial logistic regression. Parameters are laid out per class as
/// `dim` weights followed by one bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoftmaxRegression {
    pub dim: usize,
    pub num_classes: usize,
}

impl SoftmaxRegression {
    pub fn new(dim: usize, num_classes: usize) -> Self {
        Self { dim, num_classes }
    }

    fn logits<T: Scalar>(&self, weights: &[T], x: &[T], out: &mut [T]) {
        let stride = self.dim + 1;
        for (c, z) in out.iter_mut().enumerate() {
            let w = &weights[c * stride..(c + 1) * stride];
            *z = w[..self.dim].iter().zip(x).map(|(a, b)| *a * *b).sum::<T>() + w[self.dim];
        }
    }
}

impl<T: Scalar> Objective<T> for SoftmaxRegression {
    fn num_params(&self) -> usize {
        self.num_classes * (self.dim + 1)
    }

    fn loss_grad(&self, weights: &[T], data: &Dataset<T>, rows: &[usize], mut grad: Option<&mut [T]>) -> T {
        let stride = self.dim + 1;
        let mut z = vec![T::zero(); self.num_classes];
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = T::zero());
        }
        let mut total = T::zero();
        for &i in rows {
            let x = data.row(i);
            let y = data.label(i);
            self.logits(weights, x, &mut z);
            let max = z.iter().copied().fold(T::neg_infinity(), T::max);
            let shifted_y = z[y] - max;
            let mut sum = T::zero();
            for v in z.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            // -log softmax_y via log-sum-exp
            total += sum.ln() - shifted_y;
            if let Some(g) = grad.as_deref_mut() {
                for c in 0..self.num_classes {
                    let mut d = z[c] / sum;
                    if c == y {
                        d -= T::one();
                    }
                    let gc = &mut g[c * stride..(c + 1) * stride];
                    for (gj, xj) in gc[..self.dim].iter_mut().zip(x) {
                        *gj += d * *xj;
                    }
                    gc[self.dim] += d;
                }
            }
        }
        let n = T::count(rows.len().max(1));
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v /= n);
        }
        total / n
    }

    fn predict(&self, weights: &[T], x: &[T]) -> usize {
        let mut z = vec![T::zero(); self.num_classes];
        self.logits(weights, x, &mut z);
        // strict > keeps the lowest index on ties
        let mut best = 0;
        for c in 1..self.num_classes {
            if z[c] > z[best] {
                best = c;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_log_c_loss() {
        let m = SoftmaxRegression::new(3, 10);
        let data = Dataset::new(3, 10, vec![0.5; 30], (0..10).collect()).unwrap();
        let w = vec![0.0f64; 40];
        let rows: Vec<usize> = (0..10).collect();
        let loss = m.loss_grad(&w, &data, &rows, None);
        assert!((loss - 10f64.ln()).abs() < 1e-12);
        assert_eq!(m.predict(&w, data.row(0)), 0);
    }

    #[test]
    fn large_logits_stay_finite() {
        let m = SoftmaxRegression::new(1, 2);
        let data = Dataset::new(1, 2, vec![1.0], vec![1]).unwrap();
        let w = vec![1000.0f64, 0.0, -1000.0, 0.0];
        let mut g = vec![0.0; 4];
        let loss = m.loss_grad(&w, &data, &[0], Some(&mut g));
        assert!((loss - 2000.0).abs() < 1e-9);
        assert!(g.iter().all(|v| v.is_finite()));
    }
}
