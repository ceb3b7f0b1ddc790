use alloc::format;
use alloc::vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Source coordinate and blend weight for output index `i` of `out` samples
/// spread corner to corner over `len` source samples.
#[inline]
fn sample_point(i: usize, out: usize, len: usize) -> (usize, usize, f64) {
    if out == 1 || len == 1 {
        return (0, 0, 0.0);
    }
    let pos = i as f64 * ((len - 1) as f64 / (out - 1) as f64);
    let lo = (libm::floor(pos) as usize).min(len - 1);
    let hi = (lo + 1).min(len - 1);
    (lo, hi, pos - lo as f64)
}

/// `a + (b − a)·t`, kept inside `[min(a, b), max(a, b)]`.
#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    (a + (b - a) * t).clamp(a.min(b), a.max(b))
}

/// Bilinear resize of an `H×W×C` image with corner-aligned sampling: the
/// output corners coincide with the input corners.
pub fn resize_bilinear(image: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    let &[h, w, c] = image.shape() else {
        return Err(Error::ShapeMismatch(format!(
            "resize needs an H×W×C image, got {:?}",
            image.shape()
        )));
    };
    if out_h == 0 || out_w == 0 {
        return Err(Error::Config(format!("resize target {out_h}×{out_w} has a zero dimension")));
    }
    if (out_h, out_w) == (h, w) {
        return Ok(image.clone());
    }
    let x = image.data();
    let mut out = vec![0.0; out_h * out_w * c];
    for i in 0..out_h {
        let (y0, y1, ty) = sample_point(i, out_h, h);
        for j in 0..out_w {
            let (x0, x1, tx) = sample_point(j, out_w, w);
            for ch in 0..c {
                let px = |y: usize, xx: usize| x[(y * w + xx) * c + ch];
                let top = lerp(px(y0, x0), px(y0, x1), tx);
                let bottom = lerp(px(y1, x0), px(y1, x1), tx);
                out[(i * out_w + j) * c + ch] = lerp(top, bottom, ty);
            }
        }
    }
    Tensor::from_vec(&[out_h, out_w, c], out)
}
