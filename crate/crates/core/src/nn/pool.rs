use alloc::format;
use alloc::vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

fn dims(input: &Tensor) -> Result<(usize, usize, usize)> {
    match *input.shape() {
        [h, w, c] if h >= 2 && w >= 2 => Ok((h, w, c)),
        _ => Err(Error::ShapeMismatch(format!(
            "maxpool2 needs an H×W×C input with H, W >= 2, got {:?}",
            input.shape()
        ))),
    }
}

/// Window origin in the input for pooled pixel `(i, j)` and its four taps,
/// in row-major order.
#[inline]
fn window(w: usize, c: usize, i: usize, j: usize) -> [usize; 4] {
    let top = ((2 * i) * w + 2 * j) * c;
    let bottom = ((2 * i + 1) * w + 2 * j) * c;
    [top, top + c, bottom, bottom + c]
}

/// 2×2 max pooling with stride 2. An odd trailing row or column is dropped.
pub fn maxpool2(input: &Tensor) -> Result<Tensor> {
    let (h, w, c) = dims(input)?;
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = vec![0.0; oh * ow * c];
    for i in 0..oh {
        for j in 0..ow {
            let taps = window(w, c, i, j);
            let dst = &mut out[(i * ow + j) * c..(i * ow + j + 1) * c];
            for (ch, o) in dst.iter_mut().enumerate() {
                *o = taps
                    .iter()
                    .map(|&t| x[t + ch])
                    .fold(f64::NEG_INFINITY, f64::max);
            }
        }
    }
    Tensor::from_vec(&[oh, ow, c], out)
}

/// Routes each pooled gradient to the first tap (row-major) holding the
/// window maximum.
pub(crate) fn maxpool2_backward(input: &Tensor, d_out: &Tensor) -> Result<Tensor> {
    let (h, w, c) = dims(input)?;
    let (oh, ow) = (h / 2, w / 2);
    if d_out.shape() != [oh, ow, c] {
        return Err(Error::ShapeMismatch(format!(
            "maxpool2 backward: upstream {:?} for input {:?}",
            d_out.shape(),
            input.shape()
        )));
    }
    let x = input.data();
    let dy = d_out.data();
    let mut dx = vec![0.0; x.len()];
    for i in 0..oh {
        for j in 0..ow {
            let taps = window(w, c, i, j);
            for ch in 0..c {
                let mut best = taps[0] + ch;
                for &t in &taps[1..] {
                    if x[t + ch] > x[best] {
                        best = t + ch;
                    }
                }
                dx[best] += dy[(i * ow + j) * c + ch];
            }
        }
    }
    Tensor::from_vec(input.shape(), dx)
}
