use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::orbital::SatId;
use crate::scalar::Scalar;

/// Row-major labelled feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub dim: usize,
    pub num_classes: usize,
    features: Vec<T>,
    labels: Vec<usize>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(dim: usize, num_classes: usize, features: Vec<T>, labels: Vec<usize>) -> Result<Self> {
        if dim == 0 || num_classes == 0 {
            return Err(Error::domain("dataset needs dim >= 1 and num_classes >= 1"));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                got: features.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::IndexOutOfRange {
                what: "label",
                index: bad,
                limit: num_classes,
            });
        }
        Ok(Self {
            dim,
            num_classes,
            features,
            labels,
        })
    }

    pub fn empty(dim: usize, num_classes: usize) -> Self {
        Self {
            dim,
            num_classes,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.num_classes];
        for &y in &self.labels {
            h[y] += 1;
        }
        h
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Self {
            dim: self.dim,
            num_classes: self.num_classes,
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Appends `other` below `self`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim || other.num_classes != self.num_classes {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = self.clone();
        out.features.extend_from_slice(&other.features);
        out.labels.extend_from_slice(&other.labels);
        Ok(out)
    }
}

/// Local dataset held by one satellite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataShard<T> {
    pub owner: SatId,
    pub data: Dataset<T>,
}

impl<T: Scalar> DataShard<T> {
    pub fn size(&self) -> usize {
        self.data.len()
    }
}

/// Parameters of the Gaussian-blob corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub num_samples: usize,
    pub dim: usize,
    pub num_classes: usize,
    /// Scale of the class centres relative to unit within-class noise.
    pub separation: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            num_samples: 4400,
            dim: 16,
            num_classes: 10,
            separation: 1.5,
        }
    }
}

/// Balanced classes: sample `i` has label `i mod C`, features are the class
/// centre plus standard normal noise. Centres are drawn from
/// `N(0, separation²)` per coordinate.
pub fn gaussian_blobs<T: Scalar>(spec: &SyntheticSpec, seed: u64) -> Result<Dataset<T>> {
    if spec.num_samples == 0 || spec.dim == 0 || spec.num_classes == 0 {
        return Err(Error::domain("synthetic dataset needs samples, dim and classes >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<f64> = (0..spec.num_classes * spec.dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * spec.separation
        })
        .collect();
    let mut features = Vec::with_capacity(spec.num_samples * spec.dim);
    let mut labels = Vec::with_capacity(spec.num_samples);
    for i in 0..spec.num_samples {
        let y = i % spec.num_classes;
        for j in 0..spec.dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(T::lit(centres[y * spec.dim + j] + z));
        }
        labels.push(y);
    }
    Dataset::new(spec.dim, spec.num_classes, features, labels)
}

/// Seeded shuffle split; the test part holds `round(test_fraction·n)` rows.
pub fn train_test_split<T: Scalar>(data: &Dataset<T>, test_fraction: f64, seed: u64) -> Result<(Dataset<T>, Dataset<T>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::domain("test_fraction must lie in [0, 1)"));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = (test_fraction * data.len() as f64).round() as usize;
    let (test, train) = idx.split_at(n_test);
    Ok((data.subset(train), data.subset(test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_deterministic_and_balanced() {
        let spec = SyntheticSpec { num_samples: 1000, ..SyntheticSpec::default() };
        let a: Dataset<f64> = gaussian_blobs(&spec, 3).unwrap();
        let b: Dataset<f64> = gaussian_blobs(&spec, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.class_histogram(), vec![100; 10]);
        let c: Dataset<f64> = gaussian_blobs(&spec, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_labels_and_shapes() {
        assert!(Dataset::<f64>::new(2, 2, vec![0.0; 4], vec![0, 2]).is_err());
        assert!(Dataset::<f64>::new(2, 2, vec![0.0; 3], vec![0, 1]).is_err());
    }

    #[test]
    fn split_partitions_rows() {
        let spec = SyntheticSpec { num_samples: 200, ..SyntheticSpec::default() };
        let d: Dataset<f64> = gaussian_blobs(&spec, 1).unwrap();
        let (train, test) = train_test_split(&d, 0.1, 9).unwrap();
        assert_eq!(test.len(), 20);
        assert_eq!(train.len(), 180);
        let mut h = train.class_histogram();
        for (a, b) in h.iter_mut().zip(test.class_histogram()) {
            *a += b;
        }
        assert_eq!(h, d.class_histogram());
    }
}
