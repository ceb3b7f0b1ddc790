//! Deterministic two-class image set.
//!
//! Class 1 images are hard-edged diagonal stripes; class 0 images are soft
//! radial blobs on a flat background. Both get the same uniform pixel noise,
//! and global brightness ranges of the two classes overlap, so telling them
//! apart needs local texture rather than mean intensity.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng as _;

use super::dataset::{Dataset, Sample, IMAGE_SIZE};
use crate::error::{Error, Result};
use crate::metrics::Label;
use crate::rng::{self, Purpose, Rng};
use crate::tensor::Tensor;

pub const NOISE_AMPLITUDE: f64 = 0.1;

fn stripes(rng: &mut Rng, size: usize) -> Vec<f64> {
    let diagonal = if rng.gen_bool(0.5) { PI / 4.0 } else { 3.0 * PI / 4.0 };
    let angle = diagonal + rng.gen_range(-PI / 12.0..PI / 12.0);
    let period = rng.gen_range(8.0..16.0);
    let phase = rng.gen_range(0.0..period);
    let low = rng.gen_range(0.05..0.3);
    let high = rng.gen_range(0.7..0.95);
    let (s, c) = (libm::sin(angle), libm::cos(angle));
    let mut px = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let t = (x as f64 * c + y as f64 * s + phase) / period;
            px.push(if t - libm::floor(t) < 0.5 { high } else { low });
        }
    }
    px
}

fn blobs(rng: &mut Rng, size: usize) -> Vec<f64> {
    let background = rng.gen_range(0.15..0.45);
    let count = rng.gen_range(1..=3);
    let lo = size as f64 * 0.2;
    let hi = size as f64 * 0.8;
    let blobs: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            let cy = rng.gen_range(lo..hi);
            let cx = rng.gen_range(lo..hi);
            let sigma = rng.gen_range(8.0..18.0);
            let amplitude = rng.gen_range(0.3..0.5);
            (cy, cx, 2.0 * sigma * sigma, amplitude)
        })
        .collect();
    let mut px = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let v = blobs.iter().fold(background, |acc, &(cy, cx, two_var, amp)| {
                let r2 = (y as f64 - cy) * (y as f64 - cy) + (x as f64 - cx) * (x as f64 - cx);
                acc + amp * libm::exp(-r2 / two_var)
            });
            px.push(v);
        }
    }
    px
}

/// One `size×size×1` image of class `label`, from its own random stream.
pub fn synthetic_image(label: Label, seed: u64, index: u64, size: usize) -> Result<Tensor> {
    let mut rng = rng::stream(seed, Purpose::Synthetic, index);
    let mut px = match label {
        1 => stripes(&mut rng, size),
        0 => blobs(&mut rng, size),
        other => return Err(Error::Input(format!("label {other} is not 0 or 1"))),
    };
    for v in &mut px {
        *v = (*v + rng.gen_range(-NOISE_AMPLITUDE..=NOISE_AMPLITUDE)).clamp(0.0, 1.0);
    }
    Tensor::from_vec(&[size, size, 1], px)
}

/// `2·n_per_class` 100×100 samples alternating class 0, class 1, ...
pub fn generate_synthetic(n_per_class: usize, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::Config("need at least one sample per class".into()));
    }
    let samples = (0..2 * n_per_class)
        .map(|i| {
            let label = (i % 2) as Label;
            Ok(Sample {
                image: synthetic_image(label, seed, i as u64, IMAGE_SIZE)?,
                label,
                source_id: format!("synth-{i:05}-c{label}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_in_range() {
        let d = generate_synthetic(6, 42).unwrap();
        assert_eq!(d.len(), 12);
        assert_eq!(d.class_counts(), (6, 6));
        for s in d.samples() {
            assert_eq!(s.image.shape(), &[100, 100, 1]);
            assert!(s.image.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn reproducible() {
        assert_eq!(generate_synthetic(3, 7).unwrap(), generate_synthetic(3, 7).unwrap());
        assert_ne!(generate_synthetic(3, 7).unwrap(), generate_synthetic(3, 8).unwrap());
    }

    #[test]
    fn zero_per_class_rejected() {
        assert!(generate_synthetic(0, 1).is_err());
    }
}
