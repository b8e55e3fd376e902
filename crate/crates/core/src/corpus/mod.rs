//! Sentences, corpora and the file formats they travel in.

mod conllu;
pub(crate) mod pairs;
mod stats;
mod vocab;

pub use conllu::{parse_conllu, write_conllu};
pub use pairs::{pair_domain, parse_pairs, SentencePair};
pub use stats::{corpus_stats, CorpusStats};
pub use vocab::{build_vocab, Vocabulary, UNK_ID};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::tag::PosTag;

/// Names a training or evaluation domain. Each domain gets its own decoder
/// head in a multi-domain tagger.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DomainId {
    pub name: String,
    pub index: usize,
}

impl DomainId {
    pub fn new(name: impl Into<String>, index: usize) -> Self {
        DomainId {
            name: name.into(),
            index,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    pub gold_tag: Option<PosTag>,
}

impl Token {
    pub fn new(form: impl Into<String>, gold_tag: Option<PosTag>) -> Result<Self> {
        let form = form.into();
        if form.is_empty() {
            return Err(Error::invalid("empty token form"));
        }
        if form.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "token `{form}` contains whitespace"
            )));
        }
        Ok(Token { form, gold_tag })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<Token>,
    pub domain: DomainId,
}

impl Sentence {
    /// Builds a sentence, checking that it is non-empty and that tags are
    /// either present on every token or on none.
    pub fn new(id: impl Into<String>, tokens: Vec<Token>, domain: DomainId) -> Result<Self> {
        let id = id.into();
        if tokens.is_empty() {
            return Err(Error::invalid(format!("sentence `{id}` has no tokens")));
        }
        let tagged = tokens.iter().filter(|t| t.gold_tag.is_some()).count();
        if tagged != 0 && tagged != tokens.len() {
            return Err(Error::invalid(format!(
                "sentence `{id}` is partially tagged ({tagged} of {})",
                tokens.len()
            )));
        }
        Ok(Sentence { id, tokens, domain })
    }

    /// Untagged sentence from raw forms.
    pub fn from_forms<S: AsRef<str>>(
        id: impl Into<String>,
        forms: &[S],
        domain: DomainId,
    ) -> Result<Self> {
        let tokens = forms
            .iter()
            .map(|f| Token::new(f.as_ref(), None))
            .collect::<Result<Vec<_>>>()?;
        Sentence::new(id, tokens, domain)
    }

    /// Tagged sentence from `(form, tag)` pairs.
    pub fn from_tagged<S: AsRef<str>>(
        id: impl Into<String>,
        tagged: &[(S, PosTag)],
        domain: DomainId,
    ) -> Result<Self> {
        let tokens = tagged
            .iter()
            .map(|(f, t)| Token::new(f.as_ref(), Some(*t)))
            .collect::<Result<Vec<_>>>()?;
        Sentence::new(id, tokens, domain)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    pub fn is_tagged(&self) -> bool {
        self.tokens.first().is_some_and(|t| t.gold_tag.is_some())
    }

    /// Gold tags, or `Error::Untagged` when the sentence carries none.
    pub fn gold_tags(&self) -> Result<Vec<PosTag>> {
        self.tokens
            .iter()
            .map(|t| t.gold_tag.ok_or_else(|| Error::Untagged(self.id.clone())))
            .collect()
    }

    /// Copy of this sentence with `tags` as its gold layer.
    pub fn with_tags(&self, tags: &[PosTag]) -> Result<Sentence> {
        if tags.len() != self.len() {
            return Err(Error::Mismatch {
                sentence_id: self.id.clone(),
                message: format!("{} tags for {} tokens", tags.len(), self.len()),
            });
        }
        let tokens = self
            .tokens
            .iter()
            .zip(tags)
            .map(|(t, &tag)| Token {
                form: t.form.clone(),
                gold_tag: Some(tag),
            })
            .collect();
        Ok(Sentence {
            id: self.id.clone(),
            tokens,
            domain: self.domain.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub domain: DomainId,
}

impl Corpus {
    /// Builds a corpus, rebinding every sentence to `domain`.
    pub fn new(mut sentences: Vec<Sentence>, domain: DomainId) -> Self {
        for s in &mut sentences {
            s.domain = domain.clone();
        }
        Corpus { sentences, domain }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }
}

/// Fold sizes under floor allocation, with the leftover sentences going to
/// the first fold.
pub fn fold_sizes(total: usize, fractions: &[f64]) -> Result<Vec<usize>> {
    if fractions.is_empty() {
        return Err(Error::invalid("no fractions given"));
    }
    if fractions.iter().any(|&f| !(f > 0.0) || !f.is_finite()) {
        return Err(Error::invalid(format!(
            "fractions must be positive: {fractions:?}"
        )));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("fractions sum to {sum}, not 1")));
    }
    if total < fractions.len() {
        return Err(Error::invalid(format!(
            "{total} sentences cannot fill {} folds",
            fractions.len()
        )));
    }
    let mut sizes: Vec<usize> = fractions
        .iter()
        .map(|f| (f * total as f64 + 1e-9).floor() as usize)
        .collect();
    let assigned: usize = sizes.iter().sum();
    sizes[0] += total - assigned;
    Ok(sizes)
}

/// Shuffles `corpus` under `seed` and cuts it into consecutive folds.
pub fn split_corpus(corpus: &Corpus, fractions: &[f64], seed: u64) -> Result<Vec<Corpus>> {
    let sizes = fold_sizes(corpus.len(), fractions)?;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut rng::rng_for(seed, "split"));
    let mut folds = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for size in sizes {
        let sentences = order[start..start + size]
            .iter()
            .map(|&i| corpus.sentences[i].clone())
            .collect();
        folds.push(Corpus::new(sentences, corpus.domain.clone()));
        start += size;
    }
    Ok(folds)
}
