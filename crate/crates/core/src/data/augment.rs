use alloc::format;
use alloc::vec;

use rand::Rng as _;

use super::resize::resize_bilinear;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

pub fn check_zoom_range(zoom_range: f64) -> Result<()> {
    if (0.0..1.0).contains(&zoom_range) {
        Ok(())
    } else {
        Err(Error::Config(format!("zoom range must lie in [0, 1), got {zoom_range}")))
    }
}

/// Random scale jitter that keeps the image size.
///
/// Draws a factor `f` uniformly from `[1 − zoom_range, 1 + zoom_range]`.
/// Zooming in (`f > 1`) center-crops `⌊H/f⌋×⌊W/f⌋` and resizes it back up;
/// zooming out shrinks to `⌊H·f⌋×⌊W·f⌋` and pads symmetrically by repeating
/// the edge pixels. A zero range returns the image untouched and draws
/// nothing.
pub fn random_zoom(image: &Tensor, zoom_range: f64, rng: &mut Rng) -> Result<Tensor> {
    check_zoom_range(zoom_range)?;
    if zoom_range == 0.0 {
        return Ok(image.clone());
    }
    let factor = rng.gen_range(1.0 - zoom_range..=1.0 + zoom_range);
    zoom(image, factor)
}

/// Deterministic zoom by `factor` (> 0); see [`random_zoom`].
pub fn zoom(image: &Tensor, factor: f64) -> Result<Tensor> {
    let &[h, w, c] = image.shape() else {
        return Err(Error::ShapeMismatch(format!(
            "zoom needs an H×W×C image, got {:?}",
            image.shape()
        )));
    };
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Config(format!("zoom factor must be positive, got {factor}")));
    }
    if factor == 1.0 {
        return Ok(image.clone());
    }
    let scaled = |len: usize| -> usize {
        let v = if factor > 1.0 { len as f64 / factor } else { len as f64 * factor };
        (libm::floor(v) as usize).clamp(1, len)
    };
    let (sh, sw) = (scaled(h), scaled(w));
    let x = image.data();
    if factor > 1.0 {
        let (top, left) = ((h - sh) / 2, (w - sw) / 2);
        let mut crop = vec![0.0; sh * sw * c];
        for i in 0..sh {
            let src = ((top + i) * w + left) * c;
            crop[i * sw * c..(i + 1) * sw * c].copy_from_slice(&x[src..src + sw * c]);
        }
        resize_bilinear(&Tensor::from_vec(&[sh, sw, c], crop)?, h, w)
    } else {
        let small = resize_bilinear(image, sh, sw)?;
        let s = small.data();
        let (top, left) = ((h - sh) / 2, (w - sw) / 2);
        let mut out = vec![0.0; h * w * c];
        for i in 0..h {
            let si = i.saturating_sub(top).min(sh - 1);
            for j in 0..w {
                let sj = j.saturating_sub(left).min(sw - 1);
                let dst = (i * w + j) * c;
                let src = (si * sw + sj) * c;
                out[dst..dst + c].copy_from_slice(&s[src..src + c]);
            }
        }
        Tensor::from_vec(&[h, w, c], out)
    }
}
