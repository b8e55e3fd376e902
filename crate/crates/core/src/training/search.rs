//! Random hyperparameter search with multi-seed retraining.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::eval::token_accuracy;
use crate::model::TaggerModel;
use crate::rng;

use super::config::{sample_config, SearchSpace, TrainConfig};
use super::train::{select_decoder_head, train, TrainHistory};

/// Outcome of training one configuration under one seed.
#[derive(Clone, Debug)]
pub struct SeedRun<M> {
    pub val_token_accuracy: f64,
    pub selected_head: String,
    pub history: TrainHistory,
    pub model: M,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    /// Sampled configuration; its `seed` is the search's base seed.
    pub config: TrainConfig,
    pub seeds: Vec<u64>,
    pub per_seed_val_token_acc: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (zero for a single seed).
    pub stddev: f64,
    /// Head chosen by the best-scoring seed.
    pub selected_head: String,
}

/// One line of the trial log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub config: TrainConfig,
    pub epoch_losses: Vec<f64>,
    pub epoch_val_token_accuracy: Vec<BTreeMap<String, f64>>,
    pub val_token_accuracy: f64,
    pub selected_head: String,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome<M> {
    pub best: TrialResult,
    pub trials: Vec<TrialResult>,
    pub log: Vec<TrialRecord>,
    /// Model of the most accurate seed within the best trial.
    pub best_model: M,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Samples `space.budget` configurations and runs each under seeds
/// `base.seed, base.seed + 1, …`. The trial with the highest mean
/// validation accuracy wins; ties go to the earlier trial.
pub fn random_search<M, F>(
    space: &SearchSpace,
    base: &TrainConfig,
    run: F,
) -> Result<SearchOutcome<M>>
where
    M: Send,
    F: Fn(&TrainConfig) -> Result<SeedRun<M>> + Sync,
{
    space.validate()?;
    let mut sampler = rng::rng_for(base.seed, "search");
    let configs: Vec<TrainConfig> = (0..space.budget)
        .map(|_| sample_config(space, base, &mut sampler))
        .collect();
    let seeds: Vec<u64> = (0..space.seeds_per_trial as u64)
        .map(|i| base.seed.wrapping_add(i))
        .collect();

    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|t| seeds.iter().map(move |&s| (t, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(t, seed)| {
            let config = TrainConfig {
                seed,
                ..configs[t].clone()
            };
            run(&config).map(|r| (t, seed, config, r))
        })
        .collect::<Result<Vec<_>>>()?;

    let log: Vec<TrialRecord> = runs
        .iter()
        .map(|(t, seed, config, r)| TrialRecord {
            trial: *t,
            seed: *seed,
            config: config.clone(),
            epoch_losses: r.history.losses(),
            epoch_val_token_accuracy: r
                .history
                .epochs
                .iter()
                .map(|e| e.val_token_accuracy.clone())
                .collect(),
            val_token_accuracy: r.val_token_accuracy,
            selected_head: r.selected_head.clone(),
        })
        .collect();

    let per_trial = space.seeds_per_trial;
    let mut trials = Vec::with_capacity(configs.len());
    for (t, config) in configs.iter().enumerate() {
        let runs_t = &runs[t * per_trial..(t + 1) * per_trial];
        let accs: Vec<f64> = runs_t
            .iter()
            .map(|(_, _, _, r)| r.val_token_accuracy)
            .collect();
        let (mean, stddev) = mean_std(&accs);
        let best_seed = (0..accs.len()).fold(0, |b, i| if accs[i] > accs[b] { i } else { b });
        trials.push(TrialResult {
            index: t,
            config: config.clone(),
            seeds: seeds.clone(),
            per_seed_val_token_acc: accs,
            mean,
            stddev,
            selected_head: runs_t[best_seed].3.selected_head.clone(),
        });
    }
    let best_index = (0..trials.len()).fold(0, |b, i| {
        if trials[i].mean > trials[b].mean {
            i
        } else {
            b
        }
    });
    let best = trials[best_index].clone();
    let best_seed = (0..per_trial).fold(0, |b, i| {
        if best.per_seed_val_token_acc[i] > best.per_seed_val_token_acc[b] {
            i
        } else {
            b
        }
    });
    let best_model = runs
        .into_iter()
        .nth(best_index * per_trial + best_seed)
        .map(|(_, _, _, r)| r.model)
        .expect("run for best trial");
    Ok(SearchOutcome {
        best,
        trials,
        log,
        best_model,
    })
}

/// Trains and scores one model: validation accuracy on the selection
/// domain's corpus, decoded with that domain's head when the model has
/// one and with the best head otherwise.
pub fn train_and_score<F>(
    factory: &F,
    config: &TrainConfig,
    train_corpora: &[&Corpus],
    val_corpora: &[&Corpus],
    selection: &Corpus,
) -> Result<SeedRun<TaggerModel>>
where
    F: Fn(&TrainConfig) -> Result<TaggerModel>,
{
    let mut model = factory(config)?;
    let history = train(&mut model, train_corpora, val_corpora, config)?;
    let name = &selection.domain.name;
    let (selected_head, val_token_accuracy) = if model.has_domain(name) {
        (
            name.clone(),
            token_accuracy(&model.with_domain(name)?, selection)?,
        )
    } else {
        select_decoder_head(&model, selection)?
    };
    Ok(SeedRun {
        val_token_accuracy,
        selected_head,
        history,
        model,
    })
}

/// Random search over real training runs, selecting on the validation
/// corpus of `selection_domain`.
pub fn random_search_models<F>(
    space: &SearchSpace,
    base: &TrainConfig,
    factory: F,
    train_corpora: &[&Corpus],
    val_corpora: &[&Corpus],
    selection_domain: &str,
) -> Result<SearchOutcome<TaggerModel>>
where
    F: Fn(&TrainConfig) -> Result<TaggerModel> + Sync,
{
    let selection = val_corpora
        .iter()
        .find(|c| c.domain.name == selection_domain)
        .ok_or_else(|| Error::UnknownDomain(selection_domain.to_string()))?;
    if selection.is_empty() {
        return Err(Error::Empty(format!(
            "validation corpus `{selection_domain}` is empty"
        )));
    }
    random_search(space, base, |config| {
        train_and_score(&factory, config, train_corpora, val_corpora, selection)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(acc: f64) -> impl Fn(&TrainConfig) -> Result<SeedRun<u64>> + Sync {
        move |config: &TrainConfig| {
            Ok(SeedRun {
                val_token_accuracy: acc,
                selected_head: "h".into(),
                history: TrainHistory::default(),
                model: config.seed,
            })
        }
    }

    #[test]
    fn run_count_is_budget_times_seeds() {
        let space = SearchSpace::default();
        let out = random_search(&space, &TrainConfig::default(), constant(0.5)).unwrap();
        assert_eq!(out.log.len(), 30);
        assert_eq!(out.trials.len(), 10);
        assert!(out.trials.iter().all(|t| t.seeds == vec![0, 1, 2]));
    }

    #[test]
    fn single_trial_is_best() {
        let space = SearchSpace {
            budget: 1,
            ..SearchSpace::default()
        };
        let out = random_search(&space, &TrainConfig::default(), constant(0.7)).unwrap();
        assert_eq!(out.best.index, 0);
        assert_eq!(out.best, out.trials[0]);
    }

    #[test]
    fn best_is_argmax_with_early_tie_break() {
        let space = SearchSpace {
            budget: 2,
            seeds_per_trial: 1,
            ..SearchSpace::default()
        };
        // Learning rates are sampled in trial order; score trial 0 at 0.9
        // and trial 1 at 0.8 by looking the sampled rate up.
        let mut sampler = rng::rng_for(0, "search");
        let lrs: Vec<f64> = (0..2)
            .map(|_| sample_config(&space, &TrainConfig::default(), &mut sampler).learning_rate)
            .collect();
        let scores = [0.9, 0.8];
        let run = |c: &TrainConfig| {
            let t = lrs.iter().position(|&lr| lr == c.learning_rate).unwrap();
            Ok(SeedRun {
                val_token_accuracy: scores[t],
                selected_head: "h".into(),
                history: TrainHistory::default(),
                model: t,
            })
        };
        let out = random_search(&space, &TrainConfig::default(), run).unwrap();
        assert_eq!(out.best.index, 0);
        assert_eq!(out.best_model, 0);

        let tie = |_: &TrainConfig| {
            Ok(SeedRun {
                val_token_accuracy: 0.5,
                selected_head: "h".into(),
                history: TrainHistory::default(),
                model: 0usize,
            })
        };
        assert_eq!(
            random_search(&space, &TrainConfig::default(), tie)
                .unwrap()
                .best
                .index,
            0
        );
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std(&[0.8, 0.9, 1.0]);
        assert!((m - 0.9).abs() < 1e-12);
        assert!((s - 0.1).abs() < 1e-12);
        assert_eq!(mean_std(&[0.4]), (0.4, 0.0));
    }
}
