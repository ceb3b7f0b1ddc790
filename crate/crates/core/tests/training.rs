use scnv_core::data::{synthetic_image, Dataset, Sample};
use scnv_core::nn::{Activation, Model, ModelConfig};
use scnv_core::optim::OptimizerKind;
use scnv_core::train::{evaluate, train_model, TrainConfig};

fn small_set(n: usize, seed: u64) -> Dataset {
    Dataset::new(
        (0..n)
            .map(|i| {
                let label = (i % 2) as u8;
                Sample {
                    image: synthetic_image(label, seed, i as u64, 8).unwrap(),
                    label,
                    source_id: format!("s{i}"),
                }
            })
            .collect(),
    )
    .unwrap()
}

fn configs() -> Vec<TrainConfig> {
    let base = TrainConfig {
        epochs: 6,
        batch_size: 4,
        seed: 3,
        ..TrainConfig::default()
    };
    vec![
        TrainConfig { optimizer: OptimizerKind::RmsProp, ..base },
        base,
        TrainConfig { first_layer_activation: Activation::LeakyRelu { slope: 0.3 }, ..base },
        TrainConfig { zoom_range: 0.2, ..base },
    ]
}

#[test]
fn loss_falls_for_every_configuration() {
    let train = small_set(24, 1);
    let val = small_set(8, 2);
    for cfg in configs() {
        let model = Model::build(ModelConfig::reduced(cfg.first_layer_activation), cfg.seed).unwrap();
        let initial = evaluate(&model, &train, cfg.threshold).unwrap().mean_loss;
        let (_, history) = train_model(model, &cfg, &train, &val, |_| {}).unwrap();
        assert_eq!(history.len(), cfg.epochs);
        let last = history.last().unwrap();
        assert!(last.train_loss < initial, "{cfg:?}: {initial} -> {}", last.train_loss);
        assert!(last.val_loss.is_some() && last.val_accuracy.is_some());
        for r in &history.records {
            assert!((0.0..=1.0).contains(&r.train_accuracy));
        }
    }
}

#[test]
fn evaluation_leaves_model_untouched() {
    let data = small_set(10, 4);
    let model = Model::build(ModelConfig::reduced(Activation::Relu), 9).unwrap();
    let copy = model.clone();
    let a = evaluate(&model, &data, 0.5).unwrap();
    let b = evaluate(&model, &data, 0.5).unwrap();
    assert_eq!(a, b);
    assert_eq!(model, copy);
    assert_eq!(a.confusion.total(), 10);
}
