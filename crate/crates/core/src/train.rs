//! Seeded mini-batch training and evaluation.

use alloc::borrow::Cow;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::data::{check_zoom_range, random_zoom, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{bce_grad, bce_loss, check_threshold, classify, ConfusionMatrix, EpochRecord, DEFAULT_THRESHOLD};
use crate::nn::{Activation, Model, ModelConfig};
use crate::optim::{HyperParams, OptimizerKind, OptimizerState};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    /// Activation after the first convolution: relu or leaky relu.
    pub first_layer_activation: Activation,
    /// 0 disables augmentation.
    pub zoom_range: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub hyper: HyperParams,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Adam,
            first_layer_activation: Activation::Relu,
            zoom_range: 0.0,
            epochs: 50,
            batch_size: 16,
            seed: 0,
            hyper: HyperParams::default(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        match self.first_layer_activation {
            Activation::Relu | Activation::LeakyRelu { .. } => self.first_layer_activation.validate()?,
            Activation::Sigmoid => {
                return Err(Error::Config("first-layer activation must be relu or leaky relu".into()))
            }
        }
        check_zoom_range(self.zoom_range)?;
        check_threshold(self.threshold)?;
        self.hyper.validate()
    }

    /// The standard architecture with this config's first-layer activation.
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig::standard(self.first_layer_activation)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainingHistory {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub mean_loss: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

/// One forward pass per sample; the model is only read.
pub fn evaluate(model: &Model, dataset: &Dataset, threshold: f64) -> Result<Evaluation> {
    if dataset.is_empty() {
        return Err(Error::Input("cannot evaluate an empty dataset".into()));
    }
    check_threshold(threshold)?;
    let mut confusion = ConfusionMatrix::default();
    let mut loss_sum = 0.0;
    for s in dataset.samples() {
        let p = model.predict(&s.image)?;
        loss_sum += bce_loss(p, s.label);
        confusion.record(classify(p, threshold)?, s.label);
    }
    Ok(Evaluation {
        mean_loss: loss_sum / dataset.len() as f64,
        accuracy: confusion.accuracy(),
        confusion,
    })
}

fn check_samples(model: &Model, dataset: &Dataset, which: &str) -> Result<()> {
    for s in dataset.samples() {
        if s.image.shape() != model.input_shape() {
            return Err(Error::ShapeMismatch(format!(
                "{which} sample {} has shape {:?}, model expects {:?}",
                s.source_id,
                s.image.shape(),
                model.input_shape()
            )));
        }
    }
    Ok(())
}

/// Builds the standard model from `config.seed` and trains it.
pub fn train(config: &TrainConfig, train_set: &Dataset, val_set: &Dataset) -> Result<(Model, TrainingHistory)> {
    config.validate()?;
    let model = Model::build(config.model_config(), config.seed)?;
    train_model(model, config, train_set, val_set, |_| {})
}

/// Trains `model` in place of the standard one, calling `on_epoch` after
/// each epoch's record is made.
///
/// Each epoch shuffles the training set with the `(seed, epoch)` stream,
/// zooms each drawn sample when augmentation is on, takes one optimizer step
/// per mini-batch on the mean of the per-sample gradients, then measures
/// loss and accuracy on un-augmented training and validation passes.
/// Everything is checked before the first step.
pub fn train_model(
    mut model: Model,
    config: &TrainConfig,
    train_set: &Dataset,
    val_set: &Dataset,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Model, TrainingHistory)> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Input("training set is empty".into()));
    }
    check_samples(&model, train_set, "training")?;
    check_samples(&model, val_set, "validation")?;

    let mut optimizer = OptimizerState::new(config.optimizer, config.hyper, model.params())?;
    let mut grads = model.zero_grads();
    let mut history = TrainingHistory::default();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let samples = train_set.samples();

    for epoch in 1..=config.epochs {
        let epoch_index = epoch as u64;
        order.sort_unstable();
        order.shuffle(&mut rng::stream(config.seed, Purpose::Shuffle, epoch_index));
        let mut aug_rng = rng::stream(config.seed, Purpose::Augment, epoch_index);

        for batch in order.chunks(config.batch_size) {
            grads.fill_zero();
            for &i in batch {
                let sample = &samples[i];
                let image = if config.zoom_range > 0.0 {
                    Cow::Owned(random_zoom(&sample.image, config.zoom_range, &mut aug_rng)?)
                } else {
                    Cow::Borrowed(&sample.image)
                };
                let (p, cache) = model.forward(&image)?;
                model.backward_into(&cache, bce_grad(p, sample.label), &mut grads)?;
            }
            grads.scale_in_place(1.0 / batch.len() as f64);
            optimizer.step(model.params_mut(), &grads)?;
        }

        let train_eval = evaluate(&model, train_set, config.threshold)?;
        let val_eval = if val_set.is_empty() {
            None
        } else {
            Some(evaluate(&model, val_set, config.threshold)?)
        };
        let record = EpochRecord {
            epoch,
            train_loss: train_eval.mean_loss,
            train_accuracy: train_eval.accuracy,
            val_loss: val_eval.map(|e| e.mean_loss),
            val_accuracy: val_eval.map(|e| e.accuracy),
        };
        on_epoch(&record);
        history.records.push(record);
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthetic_image, Sample};
    use crate::nn::ModelConfig;

    fn small_set(n: usize, seed: u64) -> Dataset {
        Dataset::new(
            (0..n)
                .map(|i| {
                    let label = (i % 2) as u8;
                    Sample {
                        image: synthetic_image(label, seed, i as u64, 8).unwrap(),
                        label,
                        source_id: format!("{i}"),
                    }
                })
                .collect(),
        )
        .unwrap()
    }

    fn reduced(seed: u64) -> Model {
        Model::build(ModelConfig::reduced(Activation::Relu), seed).unwrap()
    }

    fn config(epochs: usize, batch_size: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size,
            seed: 5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn one_epoch_one_batch_is_one_step() {
        let data = small_set(6, 1);
        let cfg = config(1, 64);
        let mut steps = 0;
        let (_, history) = train_model(reduced(1), &cfg, &data, &Dataset::default(), |_| steps += 1).unwrap();
        assert_eq!(history.len(), 1);
        assert_eq!(steps, 1);
        assert_eq!(history.records[0].epoch, 1);
        assert!(history.records[0].val_loss.is_none());

        // one Adam step from fresh state moves every weight with a nonzero
        // gradient by about the learning rate
        let before = reduced(1);
        let (after, _) = train_model(reduced(1), &cfg, &data, &Dataset::default(), |_| {}).unwrap();
        let w0 = before.params().get("dense9.bias").unwrap().data()[0];
        let w1 = after.params().get("dense9.bias").unwrap().data()[0];
        assert!(((w0 - w1).abs() - cfg.hyper.learning_rate).abs() < 1e-6 * cfg.hyper.learning_rate);
    }

    #[test]
    fn history_is_bit_reproducible() {
        let data = small_set(20, 2);
        let val = small_set(6, 3);
        let cfg = TrainConfig {
            zoom_range: 0.2,
            ..config(3, 4)
        };
        let a = train_model(reduced(4), &cfg, &data, &val, |_| {}).unwrap();
        let b = train_model(reduced(4), &cfg, &data, &val, |_| {}).unwrap();
        assert_eq!(a.1, b.1);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.len(), 3);
        let epochs: Vec<usize> = a.1.records.iter().map(|r| r.epoch).collect();
        assert_eq!(epochs, [1, 2, 3]);
    }

    #[test]
    fn validates_before_training() {
        let data = small_set(4, 1);
        let mut calls = 0;
        let bad = TrainConfig {
            zoom_range: 1.0,
            ..config(2, 2)
        };
        assert!(train_model(reduced(1), &bad, &data, &Dataset::default(), |_| calls += 1).is_err());
        let wrong_val = Dataset::new(alloc::vec![Sample {
            image: crate::Tensor::zeros(&[9, 9, 1]).unwrap(),
            label: 0,
            source_id: "odd".into(),
        }])
        .unwrap();
        assert!(matches!(
            train_model(reduced(1), &config(2, 2), &data, &wrong_val, |_| calls += 1),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            train_model(reduced(1), &config(2, 2), &Dataset::default(), &data, |_| calls += 1),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            train_model(reduced(1), &config(0, 2), &data, &data, |_| calls += 1),
            Err(Error::Config(_))
        ));
        assert_eq!(calls, 0);
    }

    #[test]
    fn zero_model_predicts_positive_everywhere() {
        let data = small_set(10, 1);
        let model = Model::zeros(ModelConfig::reduced(Activation::Relu)).unwrap();
        let e = evaluate(&model, &data, 0.5).unwrap();
        assert_eq!(e.accuracy, 0.5);
        assert_eq!(e.confusion.true_positives + e.confusion.false_positives, 10);
        assert_eq!(e.confusion.total(), 10);
        assert_eq!(evaluate(&model, &data, 0.5).unwrap(), e);
        assert!(matches!(evaluate(&model, &Dataset::default(), 0.5), Err(Error::Input(_))));
    }
}
