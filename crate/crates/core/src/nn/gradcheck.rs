//! Central finite-difference check of [`Model::backward`] against the full
//! binary cross-entropy loss.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;

use super::activation::Activation;
use super::model::{Model, ModelConfig, ParamGrads};
use crate::error::Result;
use crate::metrics::{bce_grad, bce_loss, Label};
use crate::rng::{self, Purpose};
use crate::tensor::Tensor;

pub const FD_STEP: f64 = 1e-6;

/// `|a − b| / max(|a|, |b|, 1e-8)`
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Worst error per parameter tensor, in model order.
    pub per_param: Vec<(String, f64)>,
}

pub fn grad_check(model: &Model, image: &Tensor, label: Label) -> Result<GradCheckReport> {
    grad_check_with(model, image, label, |_| {})
}

/// As [`grad_check`], letting `tamper` modify the analytic gradients before
/// comparison.
pub fn grad_check_with(
    model: &Model,
    image: &Tensor,
    label: Label,
    tamper: impl FnOnce(&mut ParamGrads),
) -> Result<GradCheckReport> {
    let (p, cache) = model.forward(image)?;
    let mut analytic = model.backward(&cache, bce_grad(p, label))?;
    tamper(&mut analytic);

    let mut probe = model.clone();
    let loss_at = |m: &Model| -> Result<f64> { Ok(bce_loss(m.predict(image)?, label)) };

    let mut per_param = Vec::with_capacity(analytic.len());
    let mut worst = 0.0f64;
    for (t, (name, grad)) in analytic.iter().enumerate() {
        let mut tensor_worst = 0.0f64;
        for k in 0..grad.len() {
            let original = probe.params().tensors()[t].data()[k];
            probe.params_mut().tensors_mut()[t].data_mut()[k] = original + FD_STEP;
            let up = loss_at(&probe)?;
            probe.params_mut().tensors_mut()[t].data_mut()[k] = original - FD_STEP;
            let down = loss_at(&probe)?;
            probe.params_mut().tensors_mut()[t].data_mut()[k] = original;
            let numeric = (up - down) / (2.0 * FD_STEP);
            tensor_worst = tensor_worst.max(relative_error(grad.data()[k], numeric));
        }
        worst = worst.max(tensor_worst);
        per_param.push((name.into(), tensor_worst));
    }
    Ok(GradCheckReport {
        max_relative_error: worst,
        per_param,
    })
}

/// A reduced model, input and label for gradient checking, all drawn from
/// `seed`.
///
/// Biases start in `[-0.1, 0.1]` rather than at zero so no unit sits exactly
/// on a ReLU kink, and the label is the opposite of the model's prediction so
/// gradients stay well above finite-difference round-off.
pub fn probe_case(seed: u64, first_activation: Activation) -> Result<(Model, Tensor, Label)> {
    let mut model = Model::build(ModelConfig::reduced(first_activation), seed)?;
    let mut rng = rng::stream(seed, Purpose::Probe, 1);
    let names: Vec<String> = model.params().names().to_vec();
    for (name, t) in names.iter().zip(model.params_mut().tensors_mut()) {
        if name.ends_with(".bias") {
            for v in t.data_mut() {
                *v = rng.gen_range(-0.1..=0.1);
            }
        }
    }
    let shape = model.input_shape().to_vec();
    let mut rng = rng::stream(seed, Purpose::Probe, 0);
    let n = shape.iter().product();
    let image = Tensor::from_vec(&shape, (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())?;
    let p = model.predict(&image)?;
    Ok((model, image, u8::from(p < 0.5)))
}
