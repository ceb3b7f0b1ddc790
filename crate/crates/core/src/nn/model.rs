use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::activation::Activation;
use super::conv::{conv2d_backward, conv2d_forward};
use super::dense::{dense_backward, dense_forward};
use super::pool::{maxpool2, maxpool2_backward};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Conv2d { kernel: usize, filters: usize },
    MaxPool2,
    Flatten,
    Dense { units: usize },
    Activation(Activation),
}

impl LayerSpec {
    fn param_count(&self) -> usize {
        match self {
            LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. } => 2,
            _ => 0,
        }
    }

    /// Output shape for `input`, or why the layer cannot follow it.
    fn output_shape(&self, input: &[usize]) -> core::result::Result<Vec<usize>, String> {
        match (*self, input) {
            (LayerSpec::Conv2d { kernel, filters }, &[h, w, _]) => {
                if kernel == 0 || filters == 0 {
                    Err(format!("conv2d needs kernel and filters >= 1, got {kernel} and {filters}"))
                } else if kernel > h || kernel > w {
                    Err(format!("{kernel}×{kernel} kernel does not fit a {h}×{w} input"))
                } else {
                    Ok(vec![h - kernel + 1, w - kernel + 1, filters])
                }
            }
            (LayerSpec::MaxPool2, &[h, w, c]) if h >= 2 && w >= 2 => Ok(vec![h / 2, w / 2, c]),
            (LayerSpec::MaxPool2, &[h, w, _]) => Err(format!("maxpool2 on a {h}×{w} map")),
            (LayerSpec::Flatten, &[h, w, c]) => Ok(vec![h * w * c]),
            (LayerSpec::Dense { units }, &[_]) if units >= 1 => Ok(vec![units]),
            (LayerSpec::Dense { .. }, &[_]) => Err("dense needs units >= 1".into()),
            (LayerSpec::Activation(act), shape) => {
                act.validate().map_err(|e| format!("{e}"))?;
                Ok(shape.to_vec())
            }
            (spec, shape) => Err(format!("{spec:?} cannot take an input of shape {shape:?}")),
        }
    }
}

/// Architecture: input shape plus the ordered layer list.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// `[height, width, channels]`
    pub input_shape: [usize; 3],
    pub layers: Vec<LayerSpec>,
}

impl ModelConfig {
    /// conv3×3(16) → first activation → pool → conv3×3(32) → relu → pool →
    /// flatten → dense(64) → relu → dense(1) → sigmoid, over 100×100×1.
    pub fn standard(first_activation: Activation) -> Self {
        Self {
            input_shape: [100, 100, 1],
            layers: vec![
                LayerSpec::Conv2d { kernel: 3, filters: 16 },
                LayerSpec::Activation(first_activation),
                LayerSpec::MaxPool2,
                LayerSpec::Conv2d { kernel: 3, filters: 32 },
                LayerSpec::Activation(Activation::Relu),
                LayerSpec::MaxPool2,
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 64 },
                LayerSpec::Activation(Activation::Relu),
                LayerSpec::Dense { units: 1 },
                LayerSpec::Activation(Activation::Sigmoid),
            ],
        }
    }

    /// The standard layer kinds shrunk to an 8×8 input, for gradient checks.
    pub fn reduced(first_activation: Activation) -> Self {
        Self {
            input_shape: [8, 8, 1],
            layers: vec![
                LayerSpec::Conv2d { kernel: 3, filters: 2 },
                LayerSpec::Activation(first_activation),
                LayerSpec::MaxPool2,
                LayerSpec::Conv2d { kernel: 2, filters: 3 },
                LayerSpec::Activation(Activation::Relu),
                LayerSpec::MaxPool2,
                LayerSpec::Flatten,
                LayerSpec::Dense { units: 4 },
                LayerSpec::Activation(Activation::Relu),
                LayerSpec::Dense { units: 1 },
                LayerSpec::Activation(Activation::Sigmoid),
            ],
        }
    }

    /// Shapes flowing between layers: entry 0 is the input, entry `i + 1`
    /// the output of layer `i`. Fails on any incompatibility or a missing
    /// dense(1) → sigmoid head.
    pub fn shape_chain(&self) -> Result<Vec<Vec<usize>>> {
        if self.input_shape.contains(&0) {
            return Err(Error::Config(format!("input shape {:?} has a zero dimension", self.input_shape)));
        }
        let mut chain = vec![self.input_shape.to_vec()];
        for (i, spec) in self.layers.iter().enumerate() {
            let next = spec
                .output_shape(chain.last().expect("chain starts non-empty"))
                .map_err(|msg| Error::Config(format!("layer {i}: {msg}")))?;
            chain.push(next);
        }
        match self.layers.as_slice() {
            [.., LayerSpec::Dense { units: 1 }, LayerSpec::Activation(Activation::Sigmoid)] => Ok(chain),
            _ => Err(Error::Config("model must end with dense(1) followed by sigmoid".into())),
        }
    }
}

/// Named parameter tensors in layer order. Model weights and their
/// gradients share this layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

/// Gradient of the loss for every model parameter, same names and shapes.
pub type ParamGrads = ParamSet;

impl ParamSet {
    pub fn new(names: Vec<String>, tensors: Vec<Tensor>) -> Result<Self> {
        if names.len() != tensors.len() {
            return Err(Error::Consistency(format!(
                "{} names for {} tensors",
                names.len(),
                tensors.len()
            )));
        }
        Ok(Self { names, tensors })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &self.tensors[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn element_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            names: self.names.clone(),
            tensors: self.tensors.iter().map(Tensor::zeros_like).collect(),
        }
    }

    /// Errors unless `other` has the same names and shapes in the same order.
    pub fn check_compatible(&self, other: &ParamSet) -> Result<()> {
        if self.names != other.names {
            return Err(Error::Consistency(format!(
                "parameter names differ: {:?} vs {:?}",
                self.names, other.names
            )));
        }
        for ((name, a), b) in self.names.iter().zip(&self.tensors).zip(&other.tensors) {
            if a.shape() != b.shape() {
                return Err(Error::Consistency(format!(
                    "parameter {name}: shape {:?} vs {:?}",
                    a.shape(),
                    b.shape()
                )));
            }
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &ParamSet) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.add_assign(b)?;
        }
        Ok(())
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for t in &mut self.tensors {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }

    pub fn fill_zero(&mut self) {
        for t in &mut self.tensors {
            t.data_mut().fill(0.0);
        }
    }

    /// Largest absolute element over all tensors.
    pub fn max_abs(&self) -> f64 {
        self.tensors.iter().fold(0.0f64, |m, t| m.max(t.max_abs()))
    }
}

/// Every layer's input and output from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `values[0]` is the image, `values[i + 1]` the output of layer `i`.
    values: Vec<Tensor>,
}

impl ForwardCache {
    pub fn probability(&self) -> f64 {
        self.values.last().expect("cache holds the input").data()[0]
    }

    pub fn values(&self) -> &[Tensor] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    shapes: Vec<Vec<usize>>,
    params: ParamSet,
    /// Index of each layer's first parameter, for layers that have any.
    slots: Vec<Option<usize>>,
}

fn layout(config: &ModelConfig, shapes: &[Vec<usize>]) -> (Vec<String>, Vec<Vec<usize>>, Vec<Option<usize>>) {
    let mut names = Vec::new();
    let mut param_shapes = Vec::new();
    let mut slots = Vec::new();
    for (i, spec) in config.layers.iter().enumerate() {
        let input = &shapes[i];
        match *spec {
            LayerSpec::Conv2d { kernel, filters } => {
                slots.push(Some(names.len()));
                names.push(format!("conv{i}.kernel"));
                param_shapes.push(vec![kernel, kernel, input[2], filters]);
                names.push(format!("conv{i}.bias"));
                param_shapes.push(vec![filters]);
            }
            LayerSpec::Dense { units } => {
                slots.push(Some(names.len()));
                names.push(format!("dense{i}.weights"));
                param_shapes.push(vec![input[0], units]);
                names.push(format!("dense{i}.bias"));
                param_shapes.push(vec![units]);
            }
            _ => slots.push(None),
        }
        debug_assert_eq!(spec.param_count(), if slots[i].is_some() { 2 } else { 0 });
    }
    (names, param_shapes, slots)
}

impl Model {
    /// Glorot-uniform weights drawn from the seed's init stream; zero biases.
    pub fn build(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        let mut rng = rng::stream(seed, Purpose::Init, 0);
        for (i, spec) in model.config.layers.iter().enumerate() {
            let Some(slot) = model.slots[i] else { continue };
            let (fan_in, fan_out) = match *spec {
                LayerSpec::Conv2d { kernel, filters } => {
                    let c = model.shapes[i][2];
                    (kernel * kernel * c, kernel * kernel * filters)
                }
                LayerSpec::Dense { units } => (model.shapes[i][0], units),
                _ => unreachable!("only conv and dense layers own parameters"),
            };
            let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
            for w in model.params.tensors[slot].data_mut() {
                *w = rng.gen_range(-limit..=limit);
            }
        }
        Ok(model)
    }

    /// Every parameter zero.
    pub fn zeros(config: ModelConfig) -> Result<Self> {
        let shapes = config.shape_chain()?;
        let (names, param_shapes, slots) = layout(&config, &shapes);
        let tensors = param_shapes
            .iter()
            .map(|s| Tensor::zeros(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            shapes,
            params: ParamSet { names, tensors },
            slots,
        })
    }

    /// Model over given parameters; names and shapes must match the layout
    /// `config` implies.
    pub fn with_params(config: ModelConfig, params: ParamSet) -> Result<Self> {
        let mut model = Self::zeros(config)?;
        model.params.check_compatible(&params)?;
        model.params = params;
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub fn shape_chain(&self) -> &[Vec<usize>] {
        &self.shapes
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.shapes[0]
    }

    pub fn zero_grads(&self) -> ParamGrads {
        self.params.zeros_like()
    }

    pub fn forward(&self, image: &Tensor) -> Result<(f64, ForwardCache)> {
        if image.shape() != self.shapes[0].as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "image shape {:?}, model expects {:?}",
                image.shape(),
                self.shapes[0]
            )));
        }
        let mut values = Vec::with_capacity(self.config.layers.len() + 1);
        values.push(image.clone());
        for (i, spec) in self.config.layers.iter().enumerate() {
            let x = &values[i];
            let y = match *spec {
                LayerSpec::Conv2d { .. } => {
                    let s = self.slots[i].expect("conv owns params");
                    conv2d_forward(x, &self.params.tensors[s], &self.params.tensors[s + 1])?
                }
                LayerSpec::Dense { .. } => {
                    let s = self.slots[i].expect("dense owns params");
                    dense_forward(x, &self.params.tensors[s], &self.params.tensors[s + 1])?
                }
                LayerSpec::MaxPool2 => maxpool2(x)?,
                LayerSpec::Flatten => x.flatten(),
                LayerSpec::Activation(act) => act.forward(x)?,
            };
            debug_assert_eq!(y.shape(), self.shapes[i + 1].as_slice());
            values.push(y);
        }
        let cache = ForwardCache { values };
        Ok((cache.probability(), cache))
    }

    /// Probability for one image, without keeping the cache.
    pub fn predict(&self, image: &Tensor) -> Result<f64> {
        self.forward(image).map(|(p, _)| p)
    }

    /// Exact gradient of the loss for every parameter, given `dL/dp` at the
    /// sigmoid output.
    pub fn backward(&self, cache: &ForwardCache, dloss_dprob: f64) -> Result<ParamGrads> {
        let mut grads = self.zero_grads();
        self.backward_into(cache, dloss_dprob, &mut grads)?;
        Ok(grads)
    }

    /// As [`Model::backward`], adding into `grads` instead of allocating.
    pub fn backward_into(&self, cache: &ForwardCache, dloss_dprob: f64, grads: &mut ParamGrads) -> Result<()> {
        let values = &cache.values;
        if values.len() != self.shapes.len()
            || values.iter().zip(&self.shapes).any(|(v, s)| v.shape() != s.as_slice())
        {
            return Err(Error::Consistency("forward cache was not produced by this model's architecture".into()));
        }
        self.params.check_compatible(grads)?;

        let mut upstream = Tensor::scalar(dloss_dprob);
        for (i, spec) in self.config.layers.iter().enumerate().rev() {
            let x = &values[i];
            let want_input = i > 0;
            upstream = match *spec {
                LayerSpec::Conv2d { .. } => {
                    let s = self.slots[i].expect("conv owns params");
                    let (dk, db) = pair_mut(&mut grads.tensors, s);
                    match conv2d_backward(x, &self.params.tensors[s], &upstream, dk, db, want_input)? {
                        Some(dx) => dx,
                        None => break,
                    }
                }
                LayerSpec::Dense { .. } => {
                    let s = self.slots[i].expect("dense owns params");
                    let (dw, db) = pair_mut(&mut grads.tensors, s);
                    match dense_backward(x, &self.params.tensors[s], &upstream, dw, db, want_input)? {
                        Some(dx) => dx,
                        None => break,
                    }
                }
                LayerSpec::MaxPool2 => maxpool2_backward(x, &upstream)?,
                LayerSpec::Flatten => upstream.reshape(x.shape())?,
                LayerSpec::Activation(act) => act.backward(x, &values[i + 1], &upstream),
            };
        }
        Ok(())
    }
}

fn pair_mut(tensors: &mut [Tensor], slot: usize) -> (&mut Tensor, &mut Tensor) {
    let (head, tail) = tensors.split_at_mut(slot + 1);
    (&mut head[slot], &mut tail[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(shape: &[usize], seed: u64) -> Tensor {
        let mut rng = rng::stream(seed, Purpose::Probe, 0);
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn standard_shape_chain() {
        let chain = ModelConfig::standard(Activation::Relu).shape_chain().unwrap();
        assert_eq!(chain[1], vec![98, 98, 16]);
        assert_eq!(chain[3], vec![49, 49, 16]);
        assert_eq!(chain[4], vec![47, 47, 32]);
        assert_eq!(chain[6], vec![23, 23, 32]);
        assert_eq!(chain[7], vec![23 * 23 * 32]);
        assert_eq!(chain.last().unwrap(), &vec![1]);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ModelConfig::reduced(Activation::Relu);
        cfg.layers.pop();
        assert!(matches!(Model::zeros(cfg), Err(Error::Config(_))));

        let mut cfg = ModelConfig::reduced(Activation::Relu);
        cfg.layers[0] = LayerSpec::Conv2d { kernel: 9, filters: 2 };
        assert!(matches!(Model::zeros(cfg), Err(Error::Config(_))));

        let cfg = ModelConfig::reduced(Activation::LeakyRelu { slope: 1.5 });
        assert!(matches!(Model::zeros(cfg), Err(Error::Config(_))));

        let mut cfg = ModelConfig::reduced(Activation::Relu);
        cfg.layers.remove(6); // flatten
        assert!(matches!(Model::zeros(cfg), Err(Error::Config(_))));
    }

    #[test]
    fn zero_model_outputs_half() {
        let model = Model::zeros(ModelConfig::standard(Activation::Relu)).unwrap();
        let (p, _) = model.forward(&image(&[100, 100, 1], 3)).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn forward_is_deterministic_and_in_range() {
        let cfg = ModelConfig::standard(Activation::LeakyRelu { slope: 0.01 });
        let a = Model::build(cfg.clone(), 11).unwrap();
        let b = Model::build(cfg, 11).unwrap();
        let img = image(&[100, 100, 1], 4);
        let (pa, cache) = a.forward(&img).unwrap();
        let pb = b.predict(&img).unwrap();
        assert_eq!(pa.to_bits(), pb.to_bits());
        assert!(pa > 0.0 && pa < 1.0);
        for (v, s) in cache.values().iter().zip(a.shape_chain()) {
            assert_eq!(v.shape(), s.as_slice());
        }
    }

    #[test]
    fn glorot_bounds() {
        let model = Model::build(ModelConfig::standard(Activation::Relu), 5).unwrap();
        let w = model.params().get("conv0.kernel").unwrap();
        let limit = (6.0f64 / (9.0 + 9.0 * 16.0)).sqrt();
        assert!(w.max_abs() <= limit && w.max_abs() > 0.5 * limit);
        assert_eq!(model.params().get("conv0.bias").unwrap().max_abs(), 0.0);
        assert_eq!(model.params().get("dense7.weights").unwrap().shape(), &[16928, 64]);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let model = Model::build(ModelConfig::reduced(Activation::Relu), 2).unwrap();
        let (_, cache) = model.forward(&image(&[8, 8, 1], 1)).unwrap();
        let g = model.backward(&cache, 0.0).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        model.params().check_compatible(&g).unwrap();
    }

    #[test]
    fn dead_units_get_zero_grads() {
        let mut model = Model::build(ModelConfig::reduced(Activation::Relu), 2).unwrap();
        // Push every hidden dense unit negative: bias far below any reachable input.
        let s = model.params().names().iter().position(|n| n == "dense7.bias").unwrap();
        model.params_mut().tensors_mut()[s].data_mut().fill(-1e3);
        let (_, cache) = model.forward(&image(&[8, 8, 1], 1)).unwrap();
        let g = model.backward(&cache, 1.0).unwrap();
        for name in ["dense7.weights", "dense7.bias", "conv0.kernel", "conv3.kernel", "dense9.weights"] {
            assert_eq!(g.get(name).unwrap().max_abs(), 0.0, "{name}");
        }
        assert_ne!(g.get("dense9.bias").unwrap().max_abs(), 0.0);
    }

    #[test]
    fn cache_from_other_architecture_rejected() {
        let a = Model::build(ModelConfig::reduced(Activation::Relu), 2).unwrap();
        let mut cfg = ModelConfig::reduced(Activation::Relu);
        cfg.layers[7] = LayerSpec::Dense { units: 5 };
        let b = Model::build(cfg, 2).unwrap();
        let (_, cache) = b.forward(&image(&[8, 8, 1], 1)).unwrap();
        assert!(matches!(a.backward(&cache, 1.0), Err(Error::Consistency(_))));
    }

    #[test]
    fn with_params_checks_layout() {
        let a = Model::build(ModelConfig::reduced(Activation::Relu), 2).unwrap();
        let b = Model::with_params(a.config().clone(), a.params().clone()).unwrap();
        assert_eq!(a, b);
        let mut cfg = ModelConfig::reduced(Activation::Relu);
        cfg.layers[0] = LayerSpec::Conv2d { kernel: 3, filters: 4 };
        assert!(Model::with_params(cfg, a.params().clone()).is_err());
    }
}
