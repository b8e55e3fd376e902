//! Silver headline tags by projection from tagged lead sentences.
//!
//! A headline is usable when, after lowercasing, it is a (possibly
//! non-contiguous) subsequence of its lead sentence. Each headline token
//! then takes the tag the tagger predicted for its aligned lead token.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DomainId, Sentence, SentencePair};
use crate::error::{Error, Result};
use crate::model::{SequenceTagger, TaggerModel};
use crate::rng;
use crate::tag::PosTag;

/// Strictly increasing lead indices, one per headline token.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignedPair {
    pub id: String,
    pub headline: Sentence,
    pub lead: Sentence,
    pub alignment: Alignment,
}

impl AlignedPair {
    /// Aligns `pair`, returning `None` when the headline is not a
    /// subsequence of the lead.
    pub fn from_pair(pair: &SentencePair) -> Option<AlignedPair> {
        let alignment = align_subsequence(&pair.headline.forms(), &pair.lead.forms())?;
        Some(AlignedPair {
            id: pair.id.clone(),
            headline: pair.headline.clone(),
            lead: pair.lead.clone(),
            alignment,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SilverCorpusReport {
    pub candidates: usize,
    pub aligned: usize,
    pub train_count: usize,
    pub val_count: usize,
}

/// Greedy leftmost alignment of `headline` into `lead` under Unicode
/// lowercasing. Succeeds exactly when a subsequence match exists.
pub fn align_subsequence<S: AsRef<str>>(headline: &[S], lead: &[S]) -> Option<Alignment> {
    if headline.is_empty() || lead.is_empty() {
        return None;
    }
    let lead_lower: Vec<String> = lead.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let mut indices = Vec::with_capacity(headline.len());
    let mut next = 0;
    for token in headline {
        let key = token.as_ref().to_lowercase();
        let found = lead_lower[next..].iter().position(|l| *l == key)?;
        indices.push(next + found);
        next += found + 1;
    }
    Some(Alignment { indices })
}

/// Copies `lead_tags` onto the headline through the alignment.
pub fn project_tags(pair: &AlignedPair, lead_tags: &[PosTag]) -> Result<Vec<PosTag>> {
    if lead_tags.len() != pair.lead.len() {
        return Err(Error::Mismatch {
            sentence_id: pair.id.clone(),
            message: format!(
                "{} tags for a lead of {} tokens",
                lead_tags.len(),
                pair.lead.len()
            ),
        });
    }
    if pair.alignment.indices.len() != pair.headline.len() {
        return Err(Error::Mismatch {
            sentence_id: pair.id.clone(),
            message: "alignment length differs from headline length".into(),
        });
    }
    pair.alignment
        .indices
        .iter()
        .map(|&i| {
            lead_tags.get(i).copied().ok_or_else(|| Error::Mismatch {
                sentence_id: pair.id.clone(),
                message: format!(
                    "alignment index {i} outside lead of {} tokens",
                    lead_tags.len()
                ),
            })
        })
        .collect()
}

/// Projected silver corpus, split into train and validation folds.
#[derive(Clone, Debug)]
pub struct SilverCorpus {
    pub train: Corpus,
    pub val: Corpus,
    pub report: SilverCorpusReport,
}

/// Keeps alignable pairs, tags their leads with `tagger`, projects the tags
/// and splits the headlines under `seed`: `⌊train_frac · aligned⌋` go to
/// training and the rest to validation.
pub fn build_silver_corpus_with<T: SequenceTagger + ?Sized>(
    pairs: &[SentencePair],
    tagger: &T,
    silver_domain: &DomainId,
    train_frac: f64,
    seed: u64,
) -> Result<SilverCorpus> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction {train_frac} outside (0, 1)"
        )));
    }
    let aligned: Vec<AlignedPair> = pairs.iter().filter_map(AlignedPair::from_pair).collect();
    if aligned.is_empty() {
        return Err(Error::Empty(format!(
            "none of {} candidate pairs is alignable",
            pairs.len()
        )));
    }
    let headlines = aligned
        .par_iter()
        .map(|pair| {
            let lead_tags = tagger.tag(&pair.lead)?;
            let tags = project_tags(pair, &lead_tags)?;
            let mut headline = pair.headline.with_tags(&tags)?;
            headline.id = pair.id.clone();
            Ok(headline)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..headlines.len()).collect();
    rand::seq::SliceRandom::shuffle(
        order.as_mut_slice(),
        &mut rng::rng_for(seed, "silver-split"),
    );
    let train_count = (train_frac * headlines.len() as f64 + 1e-9).floor() as usize;
    let pick = |idx: &[usize]| {
        Corpus::new(
            idx.iter().map(|&i| headlines[i].clone()).collect(),
            silver_domain.clone(),
        )
    };
    let train = pick(&order[..train_count]);
    let val = pick(&order[train_count..]);
    let report = SilverCorpusReport {
        candidates: pairs.len(),
        aligned: headlines.len(),
        train_count: train.len(),
        val_count: val.len(),
    };
    Ok(SilverCorpus { train, val, report })
}

/// [`build_silver_corpus_with`] using `model` decoded under `tagger_domain`.
pub fn build_silver_corpus(
    pairs: &[SentencePair],
    model: &TaggerModel,
    tagger_domain: &str,
    silver_domain: &DomainId,
    train_frac: f64,
    seed: u64,
) -> Result<SilverCorpus> {
    let tagger = model.with_domain(tagger_domain)?;
    build_silver_corpus_with(pairs, &tagger, silver_domain, train_frac, seed)
}
