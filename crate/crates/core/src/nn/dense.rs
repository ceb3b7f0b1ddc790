use alloc::format;
use alloc::vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

const LANES: usize = 8;
/// Output block for wide layers.
const WIDE: usize = 32;

fn dims(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<(usize, usize)> {
    let &[n] = input.shape() else {
        return Err(Error::ShapeMismatch(format!(
            "dense input must be rank 1, got {:?}",
            input.shape()
        )));
    };
    let &[wn, m] = weights.shape() else {
        return Err(Error::ShapeMismatch(format!(
            "dense weights must be rank 2, got {:?}",
            weights.shape()
        )));
    };
    if wn != n || bias.shape() != [m] {
        return Err(Error::ShapeMismatch(format!(
            "dense: input {n}, weights {wn}×{m}, bias {:?}",
            bias.shape()
        )));
    }
    Ok((n, m))
}

/// `out = inputᵀ · weights + bias`; each output starts at its bias and adds
/// the input terms in index order.
pub fn dense_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (_, m) = dims(input, weights, bias)?;
    let x = input.data();
    let w = weights.data();
    let mut out = bias.clone();
    let o = out.data_mut();
    let mut j0 = 0;
    while j0 + WIDE <= m {
        forward_block::<WIDE>(x, w, m, j0, &mut o[j0..j0 + WIDE]);
        j0 += WIDE;
    }
    while j0 + LANES <= m {
        forward_block::<LANES>(x, w, m, j0, &mut o[j0..j0 + LANES]);
        j0 += LANES;
    }
    for j in j0..m {
        forward_block::<1>(x, w, m, j, &mut o[j..j + 1]);
    }
    Ok(out)
}

#[inline(always)]
fn forward_block<const B: usize>(x: &[f64], w: &[f64], m: usize, j0: usize, out: &mut [f64]) {
    let mut acc: [f64; B] = out.try_into().expect("block width");
    for (i, &v) in x.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let row: &[f64; B] = w[i * m + j0..][..B].try_into().expect("block width");
        for l in 0..B {
            acc[l] += v * row[l];
        }
    }
    out.copy_from_slice(&acc);
}

/// Accumulates weight and bias gradients; returns the input gradient when
/// asked for.
pub(crate) fn dense_backward(
    input: &Tensor,
    weights: &Tensor,
    d_out: &Tensor,
    d_weights: &mut Tensor,
    d_bias: &mut Tensor,
    want_input_grad: bool,
) -> Result<Option<Tensor>> {
    let (n, m) = dims(input, weights, d_bias)?;
    if d_out.shape() != [m] || d_weights.shape() != weights.shape() {
        return Err(Error::ShapeMismatch(format!(
            "dense backward: upstream {:?}, weight grad {:?}",
            d_out.shape(),
            d_weights.shape()
        )));
    }
    let x = input.data();
    let dy = d_out.data();
    d_bias.add_assign(d_out)?;
    let dw = d_weights.data_mut();
    for (i, &v) in x.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (acc, &d) in dw[i * m..(i + 1) * m].iter_mut().zip(dy) {
            *acc += v * d;
        }
    }
    if !want_input_grad {
        return Ok(None);
    }
    // LANES rows at a time so the dot products run side by side.
    let w = weights.data();
    let mut dx = vec![0.0; n];
    let mut i0 = 0;
    while i0 + LANES <= n {
        let mut acc = [0.0; LANES];
        for (j, &d) in dy.iter().enumerate() {
            for (r, a) in acc.iter_mut().enumerate() {
                *a += w[(i0 + r) * m + j] * d;
            }
        }
        dx[i0..i0 + LANES].copy_from_slice(&acc);
        i0 += LANES;
    }
    for (i, out) in dx.iter_mut().enumerate().skip(i0) {
        *out = w[i * m..(i + 1) * m].iter().zip(dy).fold(0.0, |acc, (&wv, &d)| acc + wv * d);
    }
    Tensor::from_vec(&[n], dx).map(Some)
}
