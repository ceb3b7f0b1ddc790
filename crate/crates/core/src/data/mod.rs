//! Image decoding, preprocessing, augmentation, splitting, and the
//! synthetic dataset.

mod augment;
mod dataset;
mod pgm;
mod resize;
mod synth;

pub use augment::{check_zoom_range, random_zoom, zoom};
pub use dataset::{preprocess, split, Dataset, Sample, SplitSpec, IMAGE_SIZE};
pub use pgm::{decode_pgm, encode_pgm};
pub use resize::resize_bilinear;
pub use synth::{generate_synthetic, synthetic_image, NOISE_AMPLITUDE};
