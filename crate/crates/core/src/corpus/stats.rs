use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tag::PosTag;

use super::Corpus;

/// Register statistics of a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Relative frequency of each gold tag; empty when the corpus is untagged.
    pub tag_unigram: BTreeMap<PosTag, f64>,
    /// Distinct lowercased forms over total tokens.
    pub type_token_ratio: f64,
    pub mean_length: f64,
    pub sentence_count: usize,
    pub token_count: usize,
}

impl CorpusStats {
    pub fn frequency(&self, tag: PosTag) -> f64 {
        self.tag_unigram.get(&tag).copied().unwrap_or(0.0)
    }
}

pub fn corpus_stats(corpus: &Corpus) -> Result<CorpusStats> {
    let token_count = corpus.token_count();
    if token_count == 0 {
        return Err(Error::Empty("corpus has no tokens".into()));
    }
    let types: HashSet<String> = corpus
        .sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .map(|t| t.form.to_lowercase())
        .collect();

    let mut counts: BTreeMap<PosTag, usize> = BTreeMap::new();
    let mut tagged = 0usize;
    for tag in corpus
        .sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .filter_map(|t| t.gold_tag)
    {
        *counts.entry(tag).or_default() += 1;
        tagged += 1;
    }
    let tag_unigram = counts
        .into_iter()
        .map(|(tag, c)| (tag, c as f64 / tagged as f64))
        .collect();

    Ok(CorpusStats {
        tag_unigram,
        type_token_ratio: types.len() as f64 / token_count as f64,
        mean_length: token_count as f64 / corpus.len() as f64,
        sentence_count: corpus.len(),
        token_count,
    })
}
