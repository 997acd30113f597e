use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::model::ModelState;

/// How the ground station weights orbit partials in the global step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AggregationWeighting {
    /// `m_{K_l}/m`, the FedAvg weighting.
    #[default]
    SampleCount,
    /// Each class carries equal total weight, shared among the partials that
    /// hold it in proportion to their piggybacked histograms.
    InverseClassFrequency,
}

/// `Σ (c_k/Σc)·w_k` with histograms and sample counts summed.
pub fn weighted_average<T: Scalar>(models: &[ModelState<T>], coefficients: &[T]) -> Result<ModelState<T>> {
    let first = models.first().ok_or_else(|| Error::domain("aggregation of an empty model list"))?;
    let dim = first.dim();
    let classes = first.class_histogram.len();
    for m in models {
        if m.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
        }
        if m.class_histogram.len() != classes {
            return Err(Error::DimensionMismatch { expected: classes, got: m.class_histogram.len() });
        }
    }
    let total: T = coefficients.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::domain("aggregation weights sum to zero"));
    }
    let mut weights = vec![T::zero(); dim];
    let mut histogram = vec![0usize; classes];
    for (m, &c) in models.iter().zip(coefficients) {
        let share = c / total;
        for (acc, w) in weights.iter_mut().zip(&m.weights) {
            *acc += share * *w;
        }
        for (acc, h) in histogram.iter_mut().zip(&m.class_histogram) {
            *acc += h;
        }
    }
    let out = ModelState::new(weights, histogram);
    debug_assert_eq!(out.sample_count, models.iter().map(|m| m.sample_count).sum::<usize>());
    Ok(out)
}

fn sample_weights<T: Scalar>(models: &[ModelState<T>]) -> Vec<T> {
    models.iter().map(|m| T::count(m.sample_count)).collect()
}

/// Partial global model of one orbit: `Σ (m_k/m_{K_l})·w_k`.
pub fn aggregate_partial<T: Scalar>(models: &[ModelState<T>]) -> Result<ModelState<T>> {
    if models.len() == 1 {
        return Ok(models[0].clone());
    }
    weighted_average(models, &sample_weights(models))
}

/// Global model from exactly one partial per orbit.
pub fn aggregate_global<T: Scalar>(
    partials: &[ModelState<T>],
    num_orbits: usize,
    weighting: AggregationWeighting,
) -> Result<ModelState<T>> {
    if partials.len() != num_orbits {
        return Err(Error::MissingOrbit { expected: num_orbits, got: partials.len() });
    }
    let coefficients = match weighting {
        AggregationWeighting::SampleCount => sample_weights(partials),
        AggregationWeighting::InverseClassFrequency => {
            let classes = partials.first().map_or(0, |p| p.class_histogram.len());
            let mut totals = vec![0usize; classes];
            for p in partials {
                for (t, h) in totals.iter_mut().zip(&p.class_histogram) {
                    *t += h;
                }
            }
            partials
                .iter()
                .map(|p| {
                    p.class_histogram
                        .iter()
                        .zip(&totals)
                        .filter(|(_, &t)| t > 0)
                        .map(|(&h, &t)| T::count(h) / T::count(t))
                        .sum()
                })
                .collect()
        }
    };
    weighted_average(partials, &coefficients)
}
