//! Optimization, multi-domain training, hyperparameter search and
//! cross-validation.

mod adam;
mod config;
mod cv;
mod search;
mod train;

pub use adam::{adam_step, clip_global_norm, AdamConfig, AdamState};
pub use config::{sample_config, RunConfig, SearchSpace, TrainConfig};
pub use cv::{cross_validate, CvReport, FoldResult};
pub use search::{
    random_search, random_search_models, train_and_score, SearchOutcome, SeedRun, TrialRecord,
    TrialResult,
};
pub use train::{select_decoder_head, train, EpochRecord, TrainHistory};
