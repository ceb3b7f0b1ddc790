use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::resize::resize_bilinear;
use crate::error::{Error, Result};
use crate::metrics::Label;
use crate::rng::{self, Purpose};
use crate::tensor::Tensor;

/// Side length every sample is brought to.
pub const IMAGE_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// `100×100×1`, pixels in `[0, 1]`.
    pub image: Tensor,
    pub label: Label,
    pub source_id: String,
}

/// Resizes any `H×W×1` image to `100×100×1` and clamps pixels into `[0, 1]`.
pub fn preprocess(image: &Tensor) -> Result<Tensor> {
    let out = match *image.shape() {
        [_, _, 1] => resize_bilinear(image, IMAGE_SIZE, IMAGE_SIZE)?,
        _ => {
            return Err(Error::ShapeMismatch(format!(
                "expected a greyscale H×W×1 image, got {:?}",
                image.shape()
            )))
        }
    };
    Ok(out.map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) }))
}

/// Samples in load order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
}

impl Dataset {
    /// Rejects labels outside {0, 1}.
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if let Some(s) = samples.iter().find(|s| s.label > 1) {
            return Err(Error::Input(format!(
                "sample {} has label {}, expected 0 or 1",
                s.source_id, s.label
            )));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(negatives, positives)`
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.samples.iter().filter(|s| s.label == 1).count();
        (self.samples.len() - pos, pos)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    /// Exact training-set size; overrides `train_fraction` when set.
    pub train_count: Option<usize>,
    pub seed: u64,
}

impl SplitSpec {
    pub fn fraction(train_fraction: f64, seed: u64) -> Self {
        Self {
            train_fraction,
            train_count: None,
            seed,
        }
    }

    pub fn count(train_count: usize, seed: u64) -> Self {
        Self {
            train_fraction: 0.7,
            train_count: Some(train_count),
            seed,
        }
    }

    /// Training-set size for `n` samples: `⌊n·fraction + 0.5⌋` unless an
    /// explicit count is set.
    pub fn train_len(&self, n: usize) -> Result<usize> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        match self.train_count {
            Some(k) if k > n => Err(Error::Config(format!(
                "train count {k} exceeds the {n} available samples"
            ))),
            Some(k) => Ok(k),
            None => Ok(libm::floor(n as f64 * self.train_fraction + 0.5) as usize),
        }
    }
}

/// Seeded shuffle, then the first `spec.train_len(n)` samples train and the
/// rest validate.
pub fn split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::Input("cannot split an empty dataset".into()));
    }
    let n_train = spec.train_len(dataset.len())?;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng::stream(spec.seed, Purpose::Split, 0));
    let (train, val) = order.split_at(n_train);
    Ok((dataset.select(train), dataset.select(val)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::vec;

    fn toy(n: usize) -> Dataset {
        Dataset::new(
            (0..n)
                .map(|i| Sample {
                    image: Tensor::full(&[2, 2, 1], i as f64 / n as f64).unwrap(),
                    label: (i % 2) as u8,
                    source_id: format!("s{i}"),
                })
                .collect(),
        )
        .unwrap()
    }

    fn ids(d: &Dataset) -> Vec<String> {
        d.samples().iter().map(|s| s.source_id.clone()).collect()
    }

    #[test]
    fn seventy_thirty() {
        let (tr, va) = split(&toy(100), &SplitSpec::fraction(0.7, 3)).unwrap();
        assert_eq!((tr.len(), va.len()), (70, 30));
        let all: BTreeSet<String> = ids(&tr).into_iter().chain(ids(&va)).collect();
        assert_eq!(all.len(), 100);
    }

    #[test]
    fn single_sample() {
        let (tr, va) = split(&toy(1), &SplitSpec::fraction(0.7, 3)).unwrap();
        assert_eq!((tr.len(), va.len()), (1, 0));
    }

    #[test]
    fn same_seed_same_membership() {
        let d = toy(40);
        let a = split(&d, &SplitSpec::fraction(0.7, 11)).unwrap();
        let b = split(&d, &SplitSpec::fraction(0.7, 11)).unwrap();
        assert_eq!(ids(&a.0), ids(&b.0));
        assert_eq!(ids(&a.1), ids(&b.1));
        let c = split(&d, &SplitSpec::fraction(0.7, 12)).unwrap();
        assert_ne!(ids(&a.0), ids(&c.0));
    }

    #[test]
    fn explicit_count() {
        let (tr, va) = split(&toy(750), &SplitSpec::count(650, 1)).unwrap();
        assert_eq!((tr.len(), va.len()), (650, 100));
        assert!(split(&toy(10), &SplitSpec::count(11, 1)).is_err());
    }

    #[test]
    fn empty_and_bad_fraction() {
        assert!(matches!(split(&Dataset::default(), &SplitSpec::fraction(0.7, 0)), Err(Error::Input(_))));
        assert!(matches!(split(&toy(3), &SplitSpec::fraction(1.0, 0)), Err(Error::Config(_))));
    }

    #[test]
    fn labels_validated() {
        let bad = Sample {
            image: Tensor::zeros(&[1, 1, 1]).unwrap(),
            label: 2,
            source_id: "x".into(),
        };
        assert!(matches!(Dataset::new(vec![bad]), Err(Error::Input(_))));
        assert_eq!(toy(5).class_counts(), (3, 2));
    }

    #[test]
    fn preprocess_shapes_and_clamps() {
        let img = Tensor::from_vec(&[2, 3, 1], vec![-0.5, 0.2, 0.4, 1.7, 0.9, 0.1]).unwrap();
        let out = preprocess(&img).unwrap();
        assert_eq!(out.shape(), &[100, 100, 1]);
        assert!(out.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(preprocess(&Tensor::zeros(&[4, 4, 3]).unwrap()).is_err());
    }
}
