//! K-fold cross-validation with a train/validation split inside each fold.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{fold_sizes, Corpus};
use crate::error::{Error, Result};
use crate::eval::{evaluate, tag_corpus};
use crate::model::SequenceTagger;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub val_size: usize,
    pub test_ids: Vec<String>,
    pub token_accuracy: f64,
    pub sequence_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub mean_token_accuracy: f64,
    pub mean_sequence_accuracy: f64,
}

/// Rotates a contiguous test window over a seeded shuffle of `corpus`.
/// In each rotation the remaining sentences are split 3:1 into train and
/// validation (60/20 of the whole for `k = 5`), `fit` builds a tagger from
/// them, and the window is evaluated.
pub fn cross_validate<T, F>(corpus: &Corpus, k: usize, seed: u64, fit: F) -> Result<CvReport>
where
    T: SequenceTagger,
    F: Fn(&Corpus, &Corpus, usize) -> Result<T> + Sync,
{
    let n = corpus.len();
    if k < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if n < k {
        return Err(Error::invalid(format!(
            "{n} sentences cannot fill {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::rng_for(seed, "cv"));

    let mut windows = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        windows.push(start..start + size);
        start += size;
    }

    let subset = |idx: &[usize]| {
        Corpus::new(
            idx.iter().map(|&i| corpus.sentences[i].clone()).collect(),
            corpus.domain.clone(),
        )
    };

    let folds = windows
        .par_iter()
        .enumerate()
        .map(|(f, window)| {
            let test = subset(&order[window.clone()]);
            let rest: Vec<usize> = order[..window.start]
                .iter()
                .chain(&order[window.end..])
                .copied()
                .collect();
            let sizes = fold_sizes(rest.len(), &[0.75, 0.25])?;
            let train = subset(&rest[..sizes[0]]);
            let val = subset(&rest[sizes[0]..]);
            let tagger = fit(&train, &val, f)?;
            let report = evaluate(&test, &tag_corpus(&tagger, &test)?)?;
            Ok(FoldResult {
                fold: f,
                train_size: train.len(),
                val_size: val.len(),
                test_ids: test.sentences.iter().map(|s| s.id.clone()).collect(),
                token_accuracy: report.token_accuracy,
                sequence_accuracy: report.sequence_accuracy,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let kf = k as f64;
    Ok(CvReport {
        mean_token_accuracy: folds.iter().map(|f| f.token_accuracy).sum::<f64>() / kf,
        mean_sequence_accuracy: folds.iter().map(|f| f.sequence_accuracy).sum::<f64>() / kf,
        folds,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::corpus::{DomainId, Sentence};
    use crate::tag::PosTag;

    fn corpus(n: usize) -> Corpus {
        let d = DomainId::new("g", 0);
        Corpus::new(
            (0..n)
                .map(|i| {
                    Sentence::from_tagged(
                        format!("s{i}"),
                        &[("x", PosTag::Noun), ("y", PosTag::Verb)],
                        d.clone(),
                    )
                    .unwrap()
                })
                .collect(),
            d,
        )
    }

    fn perfect(_: &Corpus, _: &Corpus, _: usize) -> Result<impl SequenceTagger> {
        Ok(|s: &Sentence| s.gold_tags())
    }

    #[test]
    fn ten_sentences_five_folds() {
        let report = cross_validate(&corpus(10), 5, 1, perfect).unwrap();
        assert_eq!(report.folds.len(), 5);
        let mut seen = BTreeSet::new();
        for f in &report.folds {
            assert_eq!(f.test_ids.len(), 2);
            assert_eq!((f.train_size, f.val_size), (6, 2));
            for id in &f.test_ids {
                assert!(seen.insert(id.clone()), "{id} tested twice");
            }
        }
        assert_eq!(seen.len(), 10);
        assert_eq!(report.mean_token_accuracy, 1.0);
        assert_eq!(report.mean_sequence_accuracy, 1.0);
    }

    #[test]
    fn seeded_and_partitioning() {
        let a = cross_validate(&corpus(23), 5, 7, perfect).unwrap();
        let b = cross_validate(&corpus(23), 5, 7, perfect).unwrap();
        assert_eq!(a, b);
        let total: usize = a.folds.iter().map(|f| f.test_ids.len()).sum();
        assert_eq!(total, 23);
    }

    #[test]
    fn too_small_is_error() {
        assert!(cross_validate(&corpus(4), 5, 0, perfect).is_err());
    }
}
