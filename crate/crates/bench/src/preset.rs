//! The standard MLP used throughout the benchmarks.

use sparsefool::{train_sgd, MlpClassifier, Rng, TrainConfig, TrainReport};

use crate::data::Dataset;
use crate::error::{BenchError, Result};

pub const HIDDEN: [usize; 2] = [128, 64];

/// About 300k sample presentations, between 3 and 30 epochs.
pub fn preset_train_config(seed: u64, train_len: usize) -> TrainConfig {
    let epochs = (300_000 / train_len.max(1)).clamp(3, 30);
    TrainConfig { learning_rate: 0.05, epochs, batch_size: 32, seed }
}

/// `in → 128 → 64 → classes`, ReLU hidden layers, trained with minibatch SGD.
pub fn train_preset(
    train: &Dataset,
    validation: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<(MlpClassifier, TrainReport)> {
    let Some(shape) = train.input_shape() else {
        return Err(BenchError::Usage("cannot train on an empty dataset".into()));
    };
    let inputs: usize = shape.iter().product();
    let classes = train.num_classes().max(validation.map_or(0, Dataset::num_classes));
    let mut rng = Rng::new(cfg.seed);
    let model =
        MlpClassifier::random(&[inputs, HIDDEN[0], HIDDEN[1], classes], &mut rng)?.reshaped_input(shape.to_vec())?;
    let val = validation.map(|v| (v.samples.as_slice(), v.labels.as_slice()));
    Ok(train_sgd(model, &train.samples, &train.labels, val, cfg)?)
}
