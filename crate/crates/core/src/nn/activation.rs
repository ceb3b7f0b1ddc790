use alloc::format;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Largest `f64` strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu { slope: f64 },
    Sigmoid,
}

impl Activation {
    pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

    pub fn validate(&self) -> Result<()> {
        if let Activation::LeakyRelu { slope } = *self {
            check_slope(slope)?;
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        match *self {
            Activation::Relu => Ok(relu(x)),
            Activation::LeakyRelu { slope } => leaky_relu(x, slope),
            Activation::Sigmoid => Ok(sigmoid(x)),
        }
    }

    /// Gradient with respect to the activation input, given the input `x`,
    /// the forward output `y`, and the upstream gradient `dy`.
    pub(crate) fn backward(&self, x: &Tensor, y: &Tensor, dy: &Tensor) -> Tensor {
        let mut dx = dy.clone();
        match *self {
            Activation::Relu => {
                for (d, &xi) in dx.data_mut().iter_mut().zip(x.data()) {
                    if xi <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::LeakyRelu { slope } => {
                for (d, &xi) in dx.data_mut().iter_mut().zip(x.data()) {
                    if xi <= 0.0 {
                        *d *= slope;
                    }
                }
            }
            Activation::Sigmoid => {
                for (d, &yi) in dx.data_mut().iter_mut().zip(y.data()) {
                    *d *= yi * (1.0 - yi);
                }
            }
        }
        dx
    }
}

fn check_slope(slope: f64) -> Result<()> {
    if slope > 0.0 && slope < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "leaky relu slope must lie in (0, 1), got {slope}"
        )))
    }
}

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

pub fn leaky_relu(x: &Tensor, slope: f64) -> Result<Tensor> {
    check_slope(slope)?;
    Ok(x.map(|v| if v > 0.0 { v } else { slope * v }))
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    x.map(sigmoid_scalar)
}

/// Logistic function, strictly inside (0, 1) for every finite input.
///
/// Only ever exponentiates a non-positive argument.
pub fn sigmoid_scalar(z: f64) -> f64 {
    let y = if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    };
    y.clamp(f64::MIN_POSITIVE, BELOW_ONE)
}
