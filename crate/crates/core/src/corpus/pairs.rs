//! Headline/lead pair files: one JSON object per line with `id`,
//! `headline_tokens` and `lead_tokens`.

use serde::Deserialize;

use crate::error::{Error, Result};

use super::{DomainId, Sentence};

/// A candidate headline and the lead sentence of its article.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentencePair {
    pub id: String,
    pub headline: Sentence,
    pub lead: Sentence,
}

#[derive(Deserialize)]
struct PairRecord {
    id: String,
    headline_tokens: Vec<String>,
    lead_tokens: Vec<String>,
}

/// Domain attached to sentences read from a pair file.
pub fn pair_domain() -> DomainId {
    DomainId::new("pairs", 0)
}

/// Reads candidate pairs in file order. Blank lines are ignored.
pub fn parse_pairs(text: &str) -> Result<Vec<SentencePair>> {
    let domain = pair_domain();
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let record: PairRecord =
            serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        if record.headline_tokens.is_empty() {
            return Err(parse_err("empty headline_tokens".into()));
        }
        if record.lead_tokens.is_empty() {
            return Err(parse_err("empty lead_tokens".into()));
        }
        let headline = Sentence::from_forms(
            format!("{}-headline", record.id),
            &record.headline_tokens,
            domain.clone(),
        )
        .map_err(|e| parse_err(e.to_string()))?;
        let lead = Sentence::from_forms(
            format!("{}-lead", record.id),
            &record.lead_tokens,
            domain.clone(),
        )
        .map_err(|e| parse_err(e.to_string()))?;
        pairs.push(SentencePair {
            id: record.id,
            headline,
            lead,
        });
    }
    Ok(pairs)
}
