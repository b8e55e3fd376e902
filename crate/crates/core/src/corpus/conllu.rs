//! CoNLL-U reading and writing. Only FORM and UPOS are modeled; the other
//! columns are read through and written back as `_`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tag::PosTag;

use super::{Corpus, DomainId, Sentence, Token};

const COLUMNS: usize = 10;

/// Parses CoNLL-U text into a corpus bound to `domain`.
///
/// Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are skipped.
/// A `# sent_id = x` comment names the following sentence; otherwise
/// sentences are numbered from 1 in file order.
pub fn parse_conllu(text: &str, domain: &DomainId) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut start_line = 1;

    let mut flush =
        |tokens: &mut Vec<Token>, sent_id: &mut Option<String>, line: usize| -> Result<()> {
            if tokens.is_empty() {
                *sent_id = None;
                return Ok(());
            }
            let id = sent_id
                .take()
                .unwrap_or_else(|| (sentences.len() + 1).to_string());
            let sentence =
                Sentence::new(id, std::mem::take(tokens), domain.clone()).map_err(|e| {
                    Error::Parse {
                        line,
                        message: e.to_string(),
                    }
                })?;
            sentences.push(sentence);
            Ok(())
        };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut tokens, &mut sent_id, start_line)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        if tokens.is_empty() {
            start_line = line_no;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != COLUMNS {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected {COLUMNS} tab-separated columns, found {}",
                    cols.len()
                ),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        if id.parse::<usize>().is_err() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("bad token id `{id}`"),
            });
        }
        let gold_tag = match cols[3] {
            "_" => None,
            upos => Some(upos.parse::<PosTag>().map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?),
        };
        let token = Token::new(cols[1], gold_tag).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        tokens.push(token);
    }
    flush(&mut tokens, &mut sent_id, start_line)?;
    Ok(Corpus::new(sentences, domain.clone()))
}

/// Serializes a fully tagged corpus as CoNLL-U.
pub fn write_conllu(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for sentence in &corpus.sentences {
        let tags = sentence.gold_tags()?;
        writeln!(out, "# sent_id = {}", sentence.id).unwrap();
        for (i, (token, tag)) in sentence.tokens.iter().zip(tags).enumerate() {
            writeln!(
                out,
                "{}\t{}\t_\t{}\t_\t_\t_\t_\t_\t_",
                i + 1,
                token.form,
                tag
            )
            .unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}
