//! Valid (unpadded), stride-1 2-D cross-correlation over `H×W×C` tensors.
//!
//! Kernels are laid out `k×k×C×F`, so the `F` filter weights for one
//! `(row, col, channel)` tap sit next to each other and the output channels
//! of one pixel can be accumulated as a contiguous row.

use alloc::format;
use alloc::vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Filters accumulated together in registers.
const LANES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct ConvGeometry {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub kernel: usize,
    pub filters: usize,
}

impl ConvGeometry {
    pub fn out_height(&self) -> usize {
        self.height - self.kernel + 1
    }

    pub fn out_width(&self) -> usize {
        self.width - self.kernel + 1
    }

    fn taps(&self) -> usize {
        self.kernel * self.kernel * self.channels
    }

    fn of(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Self> {
        let &[height, width, channels] = input.shape() else {
            return Err(Error::ShapeMismatch(format!(
                "conv2d input must be H×W×C, got {:?}",
                input.shape()
            )));
        };
        let &[k, k2, kc, filters] = kernels.shape() else {
            return Err(Error::ShapeMismatch(format!(
                "conv2d kernels must be k×k×C×F, got {:?}",
                kernels.shape()
            )));
        };
        if k != k2 {
            return Err(Error::ShapeMismatch(format!("kernel is not square: {k}×{k2}")));
        }
        if kc != channels {
            return Err(Error::ShapeMismatch(format!(
                "kernel expects {kc} channels, input has {channels}"
            )));
        }
        if bias.shape() != [filters] {
            return Err(Error::ShapeMismatch(format!(
                "bias shape {:?} does not match {filters} filters",
                bias.shape()
            )));
        }
        if k > height || k > width {
            return Err(Error::ShapeMismatch(format!(
                "kernel {k}×{k} larger than input {height}×{width}"
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            kernel: k,
            filters,
        })
    }

    /// Offsets into the input of the taps for output pixel (0, 0), in
    /// `(a, b, c)` order matching the kernel's leading dimensions.
    fn for_each_tap(&self, mut f: impl FnMut(usize, usize)) {
        let mut tap = 0;
        for a in 0..self.kernel {
            for b in 0..self.kernel {
                let base = (a * self.width + b) * self.channels;
                for c in 0..self.channels {
                    f(tap, base + c);
                    tap += 1;
                }
            }
        }
    }
}

/// Output pixels accumulated together in the forward pass.
const PIXELS: usize = 8;
/// Kernel taps accumulated together in the kernel-gradient pass.
const TAPS: usize = 8;

/// `out[i,j,f] = bias[f] + Σ input[i+a, j+b, c] · kernels[a,b,c,f]`, summed in
/// `(a, b, c)` order.
pub fn conv2d_forward(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let g = ConvGeometry::of(input, kernels, bias)?;
    let (oh, ow, nf) = (g.out_height(), g.out_width(), g.filters);
    let c = g.channels;
    let mut offsets = vec![0usize; g.taps()];
    g.for_each_tap(|tap, off| offsets[tap] = off);

    let x = input.data();
    let w = kernels.data();
    let b = bias.data();
    let mut out = vec![0.0; oh * ow * nf];
    let blocked = nf - nf % LANES;
    for i in 0..oh {
        let mut j = 0;
        while j < ow {
            let px = if j + PIXELS <= ow { PIXELS } else { 1 };
            let origin = (i * g.width + j) * c;
            let row = (i * ow + j) * nf;
            for f0 in (0..blocked).step_by(LANES) {
                if px == PIXELS {
                    let acc = forward_block::<PIXELS>(x, w, b, &offsets, origin, c, nf, f0);
                    for (p, a) in acc.iter().enumerate() {
                        out[row + p * nf + f0..][..LANES].copy_from_slice(a);
                    }
                } else {
                    let acc = forward_block::<1>(x, w, b, &offsets, origin, c, nf, f0);
                    out[row + f0..][..LANES].copy_from_slice(&acc[0]);
                }
            }
            for p in 0..px {
                let origin = origin + p * c;
                for f in blocked..nf {
                    let mut acc = b[f];
                    for (tap, &off) in offsets.iter().enumerate() {
                        acc += x[origin + off] * w[tap * nf + f];
                    }
                    out[row + p * nf + f] = acc;
                }
            }
            j += px;
        }
    }
    Tensor::from_vec(&[oh, ow, nf], out)
}

/// `P` neighbouring output pixels by `LANES` filters starting at `f0`.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn forward_block<const P: usize>(
    x: &[f64],
    w: &[f64],
    b: &[f64],
    offsets: &[usize],
    origin: usize,
    channels: usize,
    nf: usize,
    f0: usize,
) -> [[f64; LANES]; P] {
    let bias: [f64; LANES] = b[f0..f0 + LANES].try_into().expect("lane width");
    let mut acc = [bias; P];
    let span = offsets.last().map_or(0, |&o| o + 1) + (P - 1) * channels;
    let x = &x[origin..origin + span];
    for (tap, &off) in offsets.iter().enumerate() {
        let k: [f64; LANES] = w[tap * nf + f0..][..LANES].try_into().expect("lane width");
        for (p, a) in acc.iter_mut().enumerate() {
            let v = x[off + p * channels];
            for l in 0..LANES {
                a[l] += v * k[l];
            }
        }
    }
    acc
}

/// Accumulates kernel and bias gradients into `d_kernels` / `d_bias` and,
/// when `want_input_grad` is set, returns the gradient for `input`.
///
/// Every accumulation runs over output pixels in row-major order, so the
/// result equals adding one pixel's contribution at a time.
pub(crate) fn conv2d_backward(
    input: &Tensor,
    kernels: &Tensor,
    d_out: &Tensor,
    d_kernels: &mut Tensor,
    d_bias: &mut Tensor,
    want_input_grad: bool,
) -> Result<Option<Tensor>> {
    let g = ConvGeometry::of(input, kernels, d_bias)?;
    let (oh, ow, nf) = (g.out_height(), g.out_width(), g.filters);
    if d_out.shape() != [oh, ow, nf] || d_kernels.shape() != kernels.shape() {
        return Err(Error::ShapeMismatch(format!(
            "conv2d backward: upstream {:?}, kernel grad {:?}",
            d_out.shape(),
            d_kernels.shape()
        )));
    }
    let taps = g.taps();
    let mut offsets = vec![0usize; taps];
    g.for_each_tap(|tap, off| offsets[tap] = off);
    let origins: alloc::vec::Vec<usize> = (0..oh)
        .flat_map(|i| (0..ow).map(move |j| (i * g.width + j) * g.channels))
        .collect();

    let x = input.data();
    let w = kernels.data();
    let dy = d_out.data();

    {
        let db = d_bias.data_mut();
        for drow in dy.chunks_exact(nf) {
            for (acc, &d) in db.iter_mut().zip(drow) {
                *acc += d;
            }
        }
    }

    let dk = d_kernels.data_mut();
    let blocked = nf - nf % LANES;
    let mut t0 = 0;
    while t0 < taps {
        let nt = if t0 + TAPS <= taps { TAPS } else { 1 };
        for f0 in (0..blocked).step_by(LANES) {
            if nt == TAPS {
                kernel_grad_block::<TAPS>(x, dy, &offsets[t0..t0 + TAPS], &origins, nf, f0, &mut dk[t0 * nf..]);
            } else {
                kernel_grad_block::<1>(x, dy, &offsets[t0..t0 + 1], &origins, nf, f0, &mut dk[t0 * nf..]);
            }
        }
        for t in t0..t0 + nt {
            let off = offsets[t];
            for f in blocked..nf {
                let mut acc = dk[t * nf + f];
                for (pos, &origin) in origins.iter().enumerate() {
                    acc += x[origin + off] * dy[pos * nf + f];
                }
                dk[t * nf + f] = acc;
            }
        }
        t0 += nt;
    }

    if !want_input_grad {
        return Ok(None);
    }
    // Filter-major copy of the kernels: row f holds every tap's weight.
    let mut by_filter = vec![0.0; taps * nf];
    for t in 0..taps {
        for f in 0..nf {
            by_filter[f * taps + t] = w[t * nf + f];
        }
    }
    let mut dx = vec![0.0; x.len()];
    let mut tap_grad = vec![0.0; PIXELS * taps];
    let mut pos = 0;
    while pos < origins.len() {
        let np = if pos + PIXELS <= origins.len() { PIXELS } else { 1 };
        let rows = &dy[pos * nf..(pos + np) * nf];
        let mut t0 = 0;
        while t0 + LANES <= taps {
            if np == PIXELS {
                tap_grad_block::<PIXELS, LANES>(&by_filter, taps, rows, t0, &mut tap_grad);
            } else {
                tap_grad_block::<1, LANES>(&by_filter, taps, rows, t0, &mut tap_grad);
            }
            t0 += LANES;
        }
        for t in t0..taps {
            if np == PIXELS {
                tap_grad_block::<PIXELS, 1>(&by_filter, taps, rows, t, &mut tap_grad);
            } else {
                tap_grad_block::<1, 1>(&by_filter, taps, rows, t, &mut tap_grad);
            }
        }
        for (p, &origin) in origins[pos..pos + np].iter().enumerate() {
            for (&off, &g) in offsets.iter().zip(&tap_grad[p * taps..(p + 1) * taps]) {
                dx[origin + off] += g;
            }
        }
        pos += np;
    }
    Tensor::from_vec(input.shape(), dx).map(Some)
}

/// Adds `Σ_pos x[origin(pos) + offset(t)] · dy[pos, f0..f0+LANES]` to `T`
/// consecutive kernel-gradient rows, where `dk` starts at the first row.
#[inline(always)]
fn kernel_grad_block<const T: usize>(
    x: &[f64],
    dy: &[f64],
    offsets: &[usize],
    origins: &[usize],
    nf: usize,
    f0: usize,
    dk: &mut [f64],
) {
    let offsets: [usize; T] = offsets.try_into().expect("tap block");
    let mut acc = [[0.0; LANES]; T];
    for (t, a) in acc.iter_mut().enumerate() {
        a.copy_from_slice(&dk[t * nf + f0..][..LANES]);
    }
    for (pos, &origin) in origins.iter().enumerate() {
        let d: [f64; LANES] = dy[pos * nf + f0..][..LANES].try_into().expect("lane width");
        for (a, &off) in acc.iter_mut().zip(&offsets) {
            let v = x[origin + off];
            for l in 0..LANES {
                a[l] += v * d[l];
            }
        }
    }
    for (t, a) in acc.iter().enumerate() {
        dk[t * nf + f0..][..LANES].copy_from_slice(a);
    }
}

/// `out[p, t] = Σ_f kernels[t, f] · dy[p, f]` for `P` output pixels and `B`
/// taps from `t0`, summing over filters in order.
#[inline(always)]
fn tap_grad_block<const P: usize, const B: usize>(
    by_filter: &[f64],
    taps: usize,
    dy: &[f64],
    t0: usize,
    out: &mut [f64],
) {
    let nf = dy.len() / P;
    let mut acc = [[0.0; B]; P];
    for f in 0..nf {
        let k: &[f64; B] = by_filter[f * taps + t0..][..B].try_into().expect("block width");
        for (p, a) in acc.iter_mut().enumerate() {
            let d = dy[p * nf + f];
            for l in 0..B {
                a[l] += k[l] * d;
            }
        }
    }
    for (p, a) in acc.iter().enumerate() {
        out[p * taps + t0..][..B].copy_from_slice(a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn identity_kernel() {
        let input = Tensor::from_vec(&[2, 3, 1], vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let k = Tensor::full(&[1, 1, 1, 1], 1.0).unwrap();
        let b = Tensor::zeros(&[1]).unwrap();
        assert_eq!(conv2d_forward(&input, &k, &b).unwrap(), input);
    }

    #[test]
    fn hand_dot_product() {
        let input = Tensor::from_vec(&[2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let k = Tensor::from_vec(&[2, 2, 1, 1], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = Tensor::zeros(&[1]).unwrap();
        let out = conv2d_forward(&input, &k, &b).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1]);
        assert_eq!(out.data(), &[5.0]);
    }

    #[test]
    fn zero_input_gives_bias_map() {
        // 11 filters exercises both the lane-blocked and the remainder paths.
        let input = Tensor::zeros(&[5, 4, 2]).unwrap();
        let k = Tensor::full(&[3, 3, 2, 11], 0.7).unwrap();
        let bias: Vec<f64> = (0..11).map(|f| f as f64 - 3.5).collect();
        let b = Tensor::vector(bias.clone()).unwrap();
        let out = conv2d_forward(&input, &k, &b).unwrap();
        assert_eq!(out.shape(), &[3, 2, 11]);
        for px in out.data().chunks(11) {
            assert_eq!(px, &bias[..]);
        }
    }

    #[test]
    fn blocked_path_matches_naive() {
        let (h, w, c, k, f) = (6, 5, 3, 3, 10);
        let x: Vec<f64> = (0..h * w * c).map(|i| ((i * 37 % 11) as f64) / 7.0 - 0.6).collect();
        let kw: Vec<f64> = (0..k * k * c * f).map(|i| ((i * 13 % 17) as f64) / 9.0 - 0.9).collect();
        let bias: Vec<f64> = (0..f).map(|i| i as f64 * 0.1).collect();
        let input = Tensor::from_vec(&[h, w, c], x.clone()).unwrap();
        let kernels = Tensor::from_vec(&[k, k, c, f], kw.clone()).unwrap();
        let out = conv2d_forward(&input, &kernels, &Tensor::vector(bias.clone()).unwrap()).unwrap();
        for i in 0..h - k + 1 {
            for j in 0..w - k + 1 {
                for ff in 0..f {
                    let mut s = bias[ff];
                    for a in 0..k {
                        for b in 0..k {
                            for cc in 0..c {
                                s += x[((i + a) * w + j + b) * c + cc] * kw[((a * k + b) * c + cc) * f + ff];
                            }
                        }
                    }
                    assert_eq!(out.data()[((i * (w - k + 1)) + j) * f + ff], s);
                }
            }
        }
    }

    #[test]
    fn kernel_larger_than_input() {
        let input = Tensor::zeros(&[2, 2, 1]).unwrap();
        let k = Tensor::zeros(&[3, 3, 1, 1]).unwrap();
        let b = Tensor::zeros(&[1]).unwrap();
        assert!(matches!(conv2d_forward(&input, &k, &b), Err(Error::ShapeMismatch(_))));
    }
}
