use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};
use crate::eval::token_accuracy;
use crate::model::TaggerModel;
use crate::rng;

use super::adam::{adam_step, clip_global_norm, AdamState};
use super::config::TrainConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-sentence training loss over the epoch.
    pub train_loss: f64,
    /// Token accuracy of each validation corpus under its own head.
    pub val_token_accuracy: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.train_loss).collect()
    }
}

/// Trains `model` on the union of `train_corpora`, routing each sentence to
/// the head of its corpus's domain. The training objective follows
/// `config.use_crf`, which is also written back to the model.
///
/// Validation corpora whose domain has no head are skipped in the history.
pub fn train(
    model: &mut TaggerModel,
    train_corpora: &[&Corpus],
    val_corpora: &[&Corpus],
    config: &TrainConfig,
) -> Result<TrainHistory> {
    config.validate()?;
    let mut sentences: Vec<&Sentence> = Vec::new();
    for corpus in train_corpora {
        if !model.has_domain(&corpus.domain.name) {
            return Err(Error::UnknownDomain(corpus.domain.name.clone()));
        }
        for s in &corpus.sentences {
            if !s.is_tagged() {
                return Err(Error::Untagged(s.id.clone()));
            }
            if s.domain.name != corpus.domain.name {
                return Err(Error::invalid(format!(
                    "sentence `{}` is not in its corpus domain",
                    s.id
                )));
            }
        }
        sentences.extend(&corpus.sentences);
    }
    if sentences.is_empty() {
        return Err(Error::Empty("no training sentences".into()));
    }

    model.use_crf = config.use_crf;
    let adam = config.adam();
    let mut state = AdamState::new(&model.params);
    let mut shuffle_rng = rng::rng_for(config.seed, "shuffle");
    let mut dropout_rng = rng::rng_for(config.seed, "dropout");
    let mut history = TrainHistory::default();

    for epoch in 1..=config.epochs {
        sentences.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for batch in sentences.chunks(config.batch_size) {
            let (loss, mut grads) =
                model.loss_and_gradient(batch, config.dropout_rate, &mut dropout_rng)?;
            if let Some(max_norm) = config.clip_norm {
                clip_global_norm(&mut grads, max_norm);
            }
            adam_step(&mut model.params, &grads, &mut state, &adam)?;
            total += loss * batch.len() as f64;
        }
        let mut val_token_accuracy = BTreeMap::new();
        for corpus in val_corpora {
            if corpus.is_empty() || !model.has_domain(&corpus.domain.name) {
                continue;
            }
            let acc = token_accuracy(&model.with_domain(&corpus.domain.name)?, corpus)?;
            val_token_accuracy.insert(corpus.domain.name.clone(), acc);
        }
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: total / sentences.len() as f64,
            val_token_accuracy,
        });
    }
    Ok(history)
}

/// Returns the head whose decoding of `val_corpus` is most accurate, with
/// that accuracy. Ties go to the lower domain index.
pub fn select_decoder_head(model: &TaggerModel, val_corpus: &Corpus) -> Result<(String, f64)> {
    if model.domains.is_empty() {
        return Err(Error::invalid("model has no heads"));
    }
    let mut best: Option<(String, f64)> = None;
    for domain in &model.domains {
        let acc = token_accuracy(&model.with_domain(domain)?, val_corpus)?;
        if best.as_ref().is_none_or(|(_, b)| acc > *b) {
            best = Some((domain.clone(), acc));
        }
    }
    Ok(best.expect("at least one head"))
}
