//! Paired bootstrap comparison of two taggers on the same gold data.
//!
//! Sentences are resampled with replacement. The statistic is the
//! difference in pooled token accuracy `acc(b) − acc(a)`, and the p-value
//! is the add-one smoothed fraction of resamples in which `b` fails to
//! beat `a`: `(1 + #{δ* ≤ 0}) / (1 + R)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rng;
use crate::tag::PosTag;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub batch_fraction: f64,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            batch_fraction: 0.2,
            replications: 2000,
            alpha: 0.01,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.batch_fraction > 0.0 && self.batch_fraction <= 1.0) {
            return Err(Error::invalid("batch fraction must lie in (0, 1]"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("at least one replication is required"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub p_value: f64,
    pub significant: bool,
    /// Token accuracy of `b` minus that of `a` on the full data.
    pub observed_delta: f64,
    pub resample_size: usize,
    pub replications: usize,
    pub alpha: f64,
    /// Resamples in which the two systems tied exactly.
    pub ties: usize,
    pub statistic: String,
    pub alternative: String,
}

/// `⌈fraction · n⌉` sentences per resample, guarding against products like
/// `0.2 · 5280` landing a hair above an integer.
pub fn resample_size(n: usize, fraction: f64) -> usize {
    let raw = fraction * n as f64;
    let rounded = raw.round();
    let size = if (raw - rounded).abs() < 1e-9 {
        rounded
    } else {
        raw.ceil()
    };
    (size as usize).clamp(1, n.max(1))
}

fn correct_counts(gold: &Corpus, pred: &[Vec<PosTag>]) -> Result<Vec<u64>> {
    if pred.len() != gold.len() {
        return Err(Error::Mismatch {
            sentence_id: gold
                .sentences
                .get(pred.len().min(gold.len()))
                .map_or_else(|| "<end of gold>".into(), |s| s.id.clone()),
            message: format!(
                "{} gold sentences but {} predictions",
                gold.len(),
                pred.len()
            ),
        });
    }
    gold.sentences
        .iter()
        .zip(pred)
        .map(|(s, p)| {
            if s.len() != p.len() {
                return Err(Error::Mismatch {
                    sentence_id: s.id.clone(),
                    message: format!("{} gold tokens but {} predicted tags", s.len(), p.len()),
                });
            }
            let gold_tags = s.gold_tags()?;
            Ok(gold_tags.iter().zip(p).filter(|(g, p)| g == p).count() as u64)
        })
        .collect()
}

pub fn bootstrap_compare(
    gold: &Corpus,
    pred_a: &[Vec<PosTag>],
    pred_b: &[Vec<PosTag>],
    cfg: &BootstrapConfig,
) -> Result<BootstrapResult> {
    cfg.validate()?;
    if gold.is_empty() {
        return Err(Error::Empty("no gold sentences".into()));
    }
    let correct_a = correct_counts(gold, pred_a)?;
    let correct_b = correct_counts(gold, pred_b)?;
    let lengths: Vec<u64> = gold.sentences.iter().map(|s| s.len() as u64).collect();
    let n = gold.len();

    let total: u64 = lengths.iter().sum();
    let observed_delta = (correct_b.iter().sum::<u64>() as f64
        - correct_a.iter().sum::<u64>() as f64)
        / total as f64;

    let m = resample_size(n, cfg.batch_fraction);
    let deltas: Vec<i64> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::rng_indexed(cfg.seed, "bootstrap", r as u64);
            let mut diff = 0i64;
            for _ in 0..m {
                let i = rng.gen_range(0..n);
                diff += correct_b[i] as i64 - correct_a[i] as i64;
            }
            diff
        })
        .collect();
    // Every resample has a positive token count, so the sign of the summed
    // difference is the sign of the accuracy difference.
    let not_better = deltas.iter().filter(|&&d| d <= 0).count();
    let ties = deltas.iter().filter(|&&d| d == 0).count();
    let p_value = (1 + not_better) as f64 / (1 + cfg.replications) as f64;
    Ok(BootstrapResult {
        p_value,
        significant: p_value < cfg.alpha,
        observed_delta,
        resample_size: m,
        replications: cfg.replications,
        alpha: cfg.alpha,
        ties,
        statistic: "token accuracy difference (b - a), sentence-level resampling".into(),
        alternative: "one-sided: b more accurate than a".into(),
    })
}
