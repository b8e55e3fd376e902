//! Accuracy metrics, confusion analysis and significance testing.

mod bootstrap;
mod plot;

pub use bootstrap::{bootstrap_compare, resample_size, BootstrapConfig, BootstrapResult};
pub use plot::emit_tag_distribution;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Sentence, Token};
use crate::error::{Error, Result};
use crate::model::SequenceTagger;
use crate::tag::{PosTag, NUM_TAGS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TagScores {
    /// `None` when the tag was never predicted.
    pub precision: Option<f64>,
    /// `None` when the tag never occurs in the gold data.
    pub recall: Option<f64>,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub token_accuracy: f64,
    /// Fraction of sentences with every token correct.
    pub sequence_accuracy: f64,
    pub token_count: u64,
    pub sentence_count: u64,
    /// `confusion[gold][predicted]`, indexed by tag code.
    pub confusion: Vec<Vec<u64>>,
    pub per_tag: BTreeMap<PosTag, TagScores>,
}

impl EvalReport {
    pub fn confusion_total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

fn check_alignment(gold: &Corpus, pred: &[Vec<PosTag>]) -> Result<()> {
    if gold.len() != pred.len() {
        let sentence_id = gold
            .sentences
            .get(pred.len().min(gold.len()))
            .map_or_else(|| "<end of gold>".to_string(), |s| s.id.clone());
        return Err(Error::Mismatch {
            sentence_id,
            message: format!(
                "{} gold sentences but {} predictions",
                gold.len(),
                pred.len()
            ),
        });
    }
    for (s, p) in gold.sentences.iter().zip(pred) {
        if s.len() != p.len() {
            return Err(Error::Mismatch {
                sentence_id: s.id.clone(),
                message: format!("{} gold tokens but {} predicted tags", s.len(), p.len()),
            });
        }
    }
    Ok(())
}

pub fn evaluate(gold: &Corpus, pred: &[Vec<PosTag>]) -> Result<EvalReport> {
    check_alignment(gold, pred)?;
    let mut confusion = vec![vec![0u64; NUM_TAGS]; NUM_TAGS];
    let mut perfect = 0u64;
    let mut tokens = 0u64;
    let mut correct = 0u64;
    for (sentence, tags) in gold.sentences.iter().zip(pred) {
        let gold_tags = sentence.gold_tags()?;
        let mut all = true;
        for (g, p) in gold_tags.iter().zip(tags) {
            confusion[g.code()][p.code()] += 1;
            tokens += 1;
            if g == p {
                correct += 1;
            } else {
                all = false;
            }
        }
        perfect += u64::from(all);
    }
    if tokens == 0 {
        return Err(Error::Empty("nothing to evaluate".into()));
    }
    let per_tag = PosTag::ALL
        .iter()
        .filter_map(|&t| {
            let c = t.code();
            let hits = confusion[c][c];
            let support: u64 = confusion[c].iter().sum();
            let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
            if support == 0 && predicted == 0 {
                return None;
            }
            let ratio = |den: u64| (den > 0).then(|| hits as f64 / den as f64);
            Some((
                t,
                TagScores {
                    precision: ratio(predicted),
                    recall: ratio(support),
                    support,
                },
            ))
        })
        .collect();
    Ok(EvalReport {
        token_accuracy: correct as f64 / tokens as f64,
        sequence_accuracy: perfect as f64 / gold.len() as f64,
        token_count: tokens,
        sentence_count: gold.len() as u64,
        confusion,
        per_tag,
    })
}

/// Elementwise `a.confusion − b.confusion`.
pub fn confusion_diff(a: &EvalReport, b: &EvalReport) -> Result<Vec<Vec<i64>>> {
    if a.token_count != b.token_count || a.sentence_count != b.sentence_count {
        return Err(Error::Mismatch {
            sentence_id: "<report>".into(),
            message: format!(
                "reports cover different data ({} vs {} tokens)",
                a.token_count, b.token_count
            ),
        });
    }
    Ok(a.confusion
        .iter()
        .zip(&b.confusion)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(&x, &y)| x as i64 - y as i64)
                .collect()
        })
        .collect())
}

/// Extracts the tags of `pred` after checking that it holds the same
/// sentences as `gold`: same ids, same token forms, same order.
pub fn aligned_predictions(gold: &Corpus, pred: &Corpus) -> Result<Vec<Vec<PosTag>>> {
    let mut out = Vec::with_capacity(pred.len());
    for (i, p) in pred.sentences.iter().enumerate() {
        let Some(g) = gold.sentences.get(i) else {
            return Err(Error::Mismatch {
                sentence_id: p.id.clone(),
                message: format!(
                    "prediction has no gold counterpart ({} gold sentences)",
                    gold.len()
                ),
            });
        };
        let mismatch = |message: String| Error::Mismatch {
            sentence_id: g.id.clone(),
            message,
        };
        if g.id != p.id {
            return Err(mismatch(format!("prediction is sentence `{}`", p.id)));
        }
        if g.forms() != p.forms() {
            return Err(mismatch("token forms differ".into()));
        }
        out.push(
            p.gold_tags()
                .map_err(|_| mismatch("prediction is not fully tagged".into()))?,
        );
    }
    if let Some(g) = gold.sentences.get(pred.len()) {
        return Err(Error::Mismatch {
            sentence_id: g.id.clone(),
            message: "no prediction for this sentence".into(),
        });
    }
    Ok(out)
}

/// Tags every sentence of `corpus`, in order.
pub fn tag_corpus<T: SequenceTagger + ?Sized>(
    tagger: &T,
    corpus: &Corpus,
) -> Result<Vec<Vec<PosTag>>> {
    corpus.sentences.par_iter().map(|s| tagger.tag(s)).collect()
}

pub fn token_accuracy<T: SequenceTagger + ?Sized>(tagger: &T, corpus: &Corpus) -> Result<f64> {
    Ok(evaluate(corpus, &tag_corpus(tagger, corpus)?)?.token_accuracy)
}

/// Copy of `sentence` with a final `.` token appended. The new token is
/// tagged `PUNCT` when the sentence carries gold tags.
pub fn with_final_period(sentence: &Sentence) -> Sentence {
    let mut out = sentence.clone();
    out.tokens.push(Token {
        form: ".".to_string(),
        gold_tag: sentence.is_tagged().then_some(PosTag::Punct),
    });
    out
}

/// Tags `sentence` with a period appended and drops the period's tag.
pub fn tag_with_final_period<T: SequenceTagger + ?Sized>(
    tagger: &T,
    sentence: &Sentence,
) -> Result<Vec<PosTag>> {
    if sentence.is_empty() {
        return Err(Error::invalid(format!(
            "sentence `{}` is empty",
            sentence.id
        )));
    }
    let mut tags = tagger.tag(&with_final_period(sentence))?;
    tags.truncate(sentence.len());
    Ok(tags)
}

/// Wraps a tagger so that every sentence is tagged through
/// [`tag_with_final_period`].
pub struct FinalPeriod<T>(pub T);

impl<T: SequenceTagger> SequenceTagger for FinalPeriod<T> {
    fn tag(&self, sentence: &Sentence) -> Result<Vec<PosTag>> {
        tag_with_final_period(&self.0, sentence)
    }
}
