//! CNN layers with hand-written forward and backward passes.

mod activation;
mod conv;
mod dense;
mod gradcheck;
mod model;
mod pool;

pub use activation::{leaky_relu, relu, sigmoid, sigmoid_scalar, Activation};
pub use conv::conv2d_forward;
pub use dense::dense_forward;
pub use gradcheck::{grad_check, grad_check_with, probe_case, relative_error, GradCheckReport, FD_STEP};
pub use model::{ForwardCache, LayerSpec, Model, ModelConfig, ParamGrads, ParamSet};
pub use pool::maxpool2;

