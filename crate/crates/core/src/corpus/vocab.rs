//! Word and character vocabularies. Word keys are lowercased; character
//! keys keep their case.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Corpus;

pub const UNK_ID: usize = 0;
const UNK: &str = "<unk>";

/// Bidirectional string-to-id map with id 0 reserved for unknown entries.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Index {
    entries: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl Index {
    fn from_entries(entries: Vec<String>) -> Self {
        let lookup = entries
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Index { entries, lookup }
    }

    fn from_counts(counts: HashMap<String, usize>, min_freq: usize) -> Self {
        let mut kept: Vec<(String, usize)> =
            counts.into_iter().filter(|(_, c)| *c >= min_freq).collect();
        kept.sort_by(|(a, ca), (b, cb)| cb.cmp(ca).then_with(|| a.cmp(b)));
        let entries = std::iter::once(UNK.to_string())
            .chain(kept.into_iter().map(|(e, _)| e))
            .collect();
        Index::from_entries(entries)
    }

    fn id(&self, key: &str) -> usize {
        self.lookup.get(key).copied().unwrap_or(UNK_ID)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyFile", into = "VocabularyFile")]
pub struct Vocabulary {
    words: Index,
    chars: Index,
    min_freq: usize,
}

/// On-disk layout: entries in id order, UNK first.
#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    min_freq: usize,
    words: Vec<String>,
    chars: Vec<String>,
}

impl From<Vocabulary> for VocabularyFile {
    fn from(v: Vocabulary) -> Self {
        VocabularyFile {
            min_freq: v.min_freq,
            words: v.words.entries,
            chars: v.chars.entries,
        }
    }
}

impl TryFrom<VocabularyFile> for Vocabulary {
    type Error = String;

    fn try_from(f: VocabularyFile) -> Result<Self, String> {
        if f.words.first().map(String::as_str) != Some(UNK)
            || f.chars.first().map(String::as_str) != Some(UNK)
        {
            return Err("vocabulary must start with the UNK entry".into());
        }
        if f.min_freq == 0 {
            return Err("min_freq must be at least 1".into());
        }
        Ok(Vocabulary {
            words: Index::from_entries(f.words),
            chars: Index::from_entries(f.chars),
            min_freq: f.min_freq,
        })
    }
}

impl Vocabulary {
    pub fn word_id(&self, form: &str) -> usize {
        self.words.id(&form.to_lowercase())
    }

    pub fn char_id(&self, c: char) -> usize {
        let mut buf = [0u8; 4];
        self.chars.id(c.encode_utf8(&mut buf))
    }

    pub fn char_ids(&self, form: &str) -> Vec<usize> {
        form.chars().map(|c| self.char_id(c)).collect()
    }

    /// Number of word ids, UNK included.
    pub fn word_count(&self) -> usize {
        self.words.entries.len()
    }

    pub fn char_count(&self) -> usize {
        self.chars.entries.len()
    }

    pub fn min_freq(&self) -> usize {
        self.min_freq
    }

    /// Words in id order; index 0 is the UNK placeholder.
    pub fn words(&self) -> &[String] {
        &self.words.entries
    }
}

/// Builds vocabularies over all `corpora`. Ids are assigned by descending
/// frequency, ties broken lexicographically. `min_freq` filters words only;
/// every observed character is kept.
pub fn build_vocab(corpora: &[&Corpus], min_freq: usize) -> Result<Vocabulary> {
    if corpora.is_empty() {
        return Err(Error::invalid("no corpora to build a vocabulary from"));
    }
    if min_freq == 0 {
        return Err(Error::invalid("min_freq must be at least 1"));
    }
    let mut word_counts: HashMap<String, usize> = HashMap::new();
    let mut char_counts: HashMap<String, usize> = HashMap::new();
    for token in corpora
        .iter()
        .flat_map(|c| &c.sentences)
        .flat_map(|s| &s.tokens)
    {
        *word_counts.entry(token.form.to_lowercase()).or_default() += 1;
        for c in token.form.chars() {
            *char_counts.entry(c.to_string()).or_default() += 1;
        }
    }
    Ok(Vocabulary {
        words: Index::from_counts(word_counts, min_freq),
        chars: Index::from_counts(char_counts, 1),
        min_freq,
    })
}
