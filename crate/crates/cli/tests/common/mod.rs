#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use headtag::corpus::{write_conllu, Corpus, DomainId, Sentence, SentencePair};
use headtag::PosTag;

/// Fresh scratch directory for one test.
pub fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

pub fn headtag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_headtag"))
        .args(args)
        .output()
        .unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn write(path: &Path, text: &str) -> PathBuf {
    fs::write(path, text).unwrap();
    path.to_path_buf()
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> PathBuf {
    write(path, &write_conllu(corpus).unwrap())
}

pub fn write_pairs(path: &Path, pairs: &[SentencePair]) -> PathBuf {
    let text: String = pairs
        .iter()
        .map(|pair| {
            serde_json::json!({
                "id": pair.id,
                "headline_tokens": pair.headline.forms(),
                "lead_tokens": pair.lead.forms(),
            })
            .to_string()
                + "\n"
        })
        .collect();
    write(path, &text)
}

/// Sentences in which every form has one tag.
pub fn toy_corpus(domain: &str, n: usize) -> Corpus {
    use PosTag::*;
    let d = DomainId::new(domain, 0);
    let patterns: &[&[(&str, PosTag)]] = &[
        &[("the", Det), ("dog", Noun), ("runs", Verb), (".", Punct)],
        &[
            ("Anna", Propn),
            ("sees", Verb),
            ("a", Det),
            ("red", Adj),
            ("cat", Noun),
            (".", Punct),
        ],
        &[
            ("three", Num),
            ("cats", Noun),
            ("sleep", Verb),
            ("in", Adp),
            ("Oslo", Propn),
            (".", Punct),
        ],
        &[
            ("the", Det),
            ("big", Adj),
            ("dog", Noun),
            ("and", Cconj),
            ("Anna", Propn),
            ("run", Verb),
            (".", Punct),
        ],
    ];
    let sentences = (0..n)
        .map(|i| {
            Sentence::from_tagged(
                format!("{domain}-{i}"),
                patterns[i % patterns.len()],
                d.clone(),
            )
            .unwrap()
        })
        .collect();
    Corpus::new(sentences, d)
}

/// Small-width run config for fast end-to-end tests.
pub fn tiny_config(path: &Path, learning_rate: f64, epochs: usize, batch_size: usize) -> PathBuf {
    write(
        path,
        &serde_json::json!({
            "model": { "word_dim": 8, "char_dim": 4, "char_hidden": 4, "hidden": 8, "layers": 1 },
            "train": { "learning_rate": learning_rate, "epochs": epochs, "batch_size": batch_size },
        })
        .to_string(),
    )
}
