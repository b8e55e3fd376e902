use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelDims;

use super::adam::AdamConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub use_crf: bool,
    /// Global-norm gradient clipping threshold; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            dropout_rate: 0.0,
            epochs: 4,
            seed: 0,
            batch_size: 32,
            beta1: 0.99,
            beta2: 0.999,
            epsilon: 1e-8,
            use_crf: true,
            clip_norm: Some(5.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(0.0..=0.4).contains(&self.dropout_rate) {
            return Err(Error::invalid(format!(
                "dropout rate {} outside [0, 0.4]",
                self.dropout_rate
            )));
        }
        if !(2..=6).contains(&self.epochs) {
            return Err(Error::invalid(format!(
                "epochs {} outside [2, 6]",
                self.epochs
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || !(self.epsilon > 0.0)
        {
            return Err(Error::invalid(
                "Adam betas must lie in [0, 1) and epsilon must be positive",
            ));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return Err(Error::invalid("clip norm must be positive"));
            }
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// Random-search ranges and budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    /// Base-10 exponent range of the learning rate.
    pub lr_exponent_range: (f64, f64),
    pub dropout_range: (f64, f64),
    /// Inclusive epoch range.
    pub epoch_range: (usize, usize),
    pub budget: usize,
    pub seeds_per_trial: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            lr_exponent_range: (-5.5, -1.0),
            dropout_range: (0.0, 0.4),
            epoch_range: (2, 6),
            budget: 10,
            seeds_per_trial: 3,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.lr_exponent_range;
        if !(lo <= hi) {
            return Err(Error::invalid("learning-rate exponent range is reversed"));
        }
        let (dlo, dhi) = self.dropout_range;
        if !(0.0 <= dlo && dlo <= dhi && dhi <= 0.4) {
            return Err(Error::invalid("dropout range must lie within [0, 0.4]"));
        }
        let (elo, ehi) = self.epoch_range;
        if !(2 <= elo && elo <= ehi && ehi <= 6) {
            return Err(Error::invalid("epoch range must lie within [2, 6]"));
        }
        if self.budget == 0 || self.seeds_per_trial == 0 {
            return Err(Error::invalid(
                "budget and seeds per trial must be at least 1",
            ));
        }
        Ok(())
    }
}

/// Draws learning rate, dropout and epochs from `space`; everything else
/// is copied from `base`.
pub fn sample_config<R: Rng>(space: &SearchSpace, base: &TrainConfig, rng: &mut R) -> TrainConfig {
    let uniform = |rng: &mut R, (lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            lo + (hi - lo) * rng.gen::<f64>()
        }
    };
    let exponent = uniform(rng, space.lr_exponent_range);
    let dropout_rate = uniform(rng, space.dropout_range);
    let epochs = rng.gen_range(space.epoch_range.0..=space.epoch_range.1);
    TrainConfig {
        learning_rate: 10f64.powf(exponent),
        dropout_rate,
        epochs,
        ..base.clone()
    }
}

/// Everything a config file may set. All sections and fields are optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub search: SearchSpace,
    pub model: ModelDims,
    pub vocab_min_freq: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.train.validate()?;
        config.search.validate()?;
        config.model.validate()?;
        Ok(config)
    }
}
