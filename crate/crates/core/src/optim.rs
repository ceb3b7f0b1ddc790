//! Adam and RMSProp parameter updates.
//!
//! Both rules act elementwise on a [`ParamSet`] given gradients of the same
//! layout. Adam:
//!
//! ```text
//! v ← β₁v + (1−β₁)g        v̂ = v / (1 − β₁ᵗ)
//! s ← β₂s + (1−β₂)g²       ŝ = s / (1 − β₂ᵗ)
//! W ← W − α · v̂ / (√ŝ + ε)
//! ```
//!
//! RMSProp keeps only the squared-gradient average, without bias correction:
//!
//! ```text
//! s ← βs + (1−β)g²
//! W ← W − α · g / (√s + ε)
//! ```

use alloc::format;

use crate::error::{Error, Result};
use crate::nn::{ParamGrads, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// α
    pub learning_rate: f64,
    /// Adam first-moment decay, β₁.
    pub beta1: f64,
    /// Adam second-moment decay, β₂.
    pub beta2: f64,
    /// RMSProp decay, β.
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            rho: 0.9,
            epsilon: 1e-8,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2), ("rho", self.rho)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    RmsProp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    hyper: HyperParams,
    /// Completed steps.
    step: u64,
    /// v, Adam only.
    first_moment: Option<ParamSet>,
    /// s
    second_moment: ParamSet,
}

impl OptimizerState {
    /// Fresh state (t = 0, zero moments) shaped like `params`.
    pub fn new(kind: OptimizerKind, hyper: HyperParams, params: &ParamSet) -> Result<Self> {
        hyper.validate()?;
        Ok(Self {
            kind,
            hyper,
            step: 0,
            first_moment: (kind == OptimizerKind::Adam).then(|| params.zeros_like()),
            second_moment: params.zeros_like(),
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> Option<&ParamSet> {
        self.first_moment.as_ref()
    }

    pub fn second_moment(&self) -> &ParamSet {
        &self.second_moment
    }

    /// Applies whichever rule this state was created for.
    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamGrads) -> Result<()> {
        match self.kind {
            OptimizerKind::Adam => adam_step(params, grads, self),
            OptimizerKind::RmsProp => rmsprop_step(params, grads, self),
        }
    }

    fn check(&self, expected: OptimizerKind, params: &ParamSet, grads: &ParamGrads) -> Result<()> {
        if self.kind != expected {
            return Err(Error::Consistency(format!(
                "{expected:?} step on {:?} optimizer state",
                self.kind
            )));
        }
        params.check_compatible(grads)?;
        self.second_moment.check_compatible(params)
    }
}

pub fn adam_step(params: &mut ParamSet, grads: &ParamGrads, state: &mut OptimizerState) -> Result<()> {
    state.check(OptimizerKind::Adam, params, grads)?;
    let HyperParams {
        learning_rate: lr,
        beta1,
        beta2,
        epsilon,
        ..
    } = state.hyper;
    let t = state.step + 1;
    let correction1 = 1.0 - libm::pow(beta1, t as f64);
    let correction2 = 1.0 - libm::pow(beta2, t as f64);
    let first = state
        .first_moment
        .as_mut()
        .expect("adam state carries a first moment");
    for (((w, g), v), s) in params
        .tensors_mut()
        .iter_mut()
        .zip(grads.tensors())
        .zip(first.tensors_mut())
        .zip(state.second_moment.tensors_mut())
    {
        for (((w, &g), v), s) in w
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(v.data_mut())
            .zip(s.data_mut())
        {
            *v = beta1 * *v + (1.0 - beta1) * g;
            *s = beta2 * *s + (1.0 - beta2) * (g * g);
            let v_hat = *v / correction1;
            let s_hat = *s / correction2;
            *w -= lr * (v_hat / (libm::sqrt(s_hat) + epsilon));
        }
    }
    state.step = t;
    Ok(())
}

pub fn rmsprop_step(params: &mut ParamSet, grads: &ParamGrads, state: &mut OptimizerState) -> Result<()> {
    state.check(OptimizerKind::RmsProp, params, grads)?;
    let HyperParams {
        learning_rate: lr,
        rho,
        epsilon,
        ..
    } = state.hyper;
    for ((w, g), s) in params
        .tensors_mut()
        .iter_mut()
        .zip(grads.tensors())
        .zip(state.second_moment.tensors_mut())
    {
        for ((w, &g), s) in w.data_mut().iter_mut().zip(g.data()).zip(s.data_mut()) {
            *s = rho * *s + (1.0 - rho) * (g * g);
            *w -= lr * (g / (libm::sqrt(*s) + epsilon));
        }
    }
    state.step += 1;
    Ok(())
}
