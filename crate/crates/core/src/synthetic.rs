//! Template-generated body sentences and headlines derived from them.
//!
//! Body sentences follow a handful of news templates with gold tags and
//! sentence-initial capitalization. A headline drops every determiner and
//! auxiliary plus the final period, and capitalizes content words at
//! random, so capitalization stops separating common from proper nouns.
//! Several word forms are shared between tags (`bill`/`Bill`, `plans` as
//! noun or verb) so that context has to resolve them.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{pair_domain, Corpus, DomainId, Sentence, SentencePair, Token};
use crate::error::Result;
use crate::rng;
use crate::tag::PosTag::{self, *};

const DETERMINERS: &[&str] = &["the", "a", "this", "their"];
const PASSIVE_AUX: &[&str] = &["was", "is"];
const MODAL_AUX: &[&str] = &["will", "could", "should"];
const NOUNS: &[&str] = &[
    "bill", "rose", "mark", "court", "plan", "market", "report", "city", "budget", "strike",
    "deal", "vote", "price", "storm", "school", "union", "bank", "tax", "film", "team", "judge",
    "police", "fire", "border", "law",
];
const PLURAL_NOUNS: &[&str] = &[
    "plans", "cuts", "talks", "votes", "reports", "strikes", "deals", "prices",
];
const PROPER_NOUNS: &[&str] = &[
    "Bill", "Rose", "Mark", "Smith", "Obama", "Paris", "Texas", "Apple", "Congress", "Merkel",
    "Google", "Boston", "Lee", "Chen",
];
const VERBS_3SG: &[&str] = &[
    "approves", "rejects", "backs", "blocks", "wins", "sees", "hits", "opens", "cuts", "plans",
    "faces", "warns", "seeks", "ends", "reports", "votes",
];
const VERBS_BASE: &[&str] = &[
    "approve", "reject", "back", "block", "win", "see", "hit", "open", "cut", "face", "end", "seek",
];
const VERBS_PARTICIPLE: &[&str] = &[
    "approved", "rejected", "backed", "blocked", "won", "seen", "hit", "opened", "cut", "faced",
    "ended",
];
const ADJECTIVES: &[&str] = &["new", "big", "local", "top", "key", "major", "old", "small"];
const ADPOSITIONS: &[&str] = &["in", "on", "for", "over", "after", "by"];
const NUMBERS: &[&str] = &["2", "10", "300", "five", "40"];

#[derive(Clone, Copy)]
enum Slot {
    Det,
    PassiveAux,
    ModalAux,
    Noun,
    PluralNoun,
    Propn,
    Verb3sg,
    VerbBase,
    VerbParticiple,
    Adj,
    Adp,
    Num,
    Comma,
}

impl Slot {
    fn fill<R: Rng>(self, rng: &mut R) -> (&'static str, PosTag) {
        let pick =
            |words: &[&'static str], rng: &mut R| *words.choose(rng).expect("non-empty lexicon");
        match self {
            Slot::Det => (pick(DETERMINERS, rng), Det),
            Slot::PassiveAux => (pick(PASSIVE_AUX, rng), Aux),
            Slot::ModalAux => (pick(MODAL_AUX, rng), Aux),
            Slot::Noun => (pick(NOUNS, rng), Noun),
            Slot::PluralNoun => (pick(PLURAL_NOUNS, rng), Noun),
            Slot::Propn => (pick(PROPER_NOUNS, rng), Propn),
            Slot::Verb3sg => (pick(VERBS_3SG, rng), Verb),
            Slot::VerbBase => (pick(VERBS_BASE, rng), Verb),
            Slot::VerbParticiple => (pick(VERBS_PARTICIPLE, rng), Verb),
            Slot::Adj => (pick(ADJECTIVES, rng), Adj),
            Slot::Adp => (pick(ADPOSITIONS, rng), Adp),
            Slot::Num => (pick(NUMBERS, rng), Num),
            Slot::Comma => (",", Punct),
        }
    }
}

const TEMPLATES: &[&[Slot]] = {
    use Slot::*;
    &[
        &[Det, Noun, PassiveAux, VerbParticiple, Adp, Det, Noun],
        &[Propn, Verb3sg, Det, Adj, Noun, Adp, Propn],
        &[Det, Adj, Noun, Verb3sg, Det, PluralNoun],
        &[Propn, ModalAux, VerbBase, Det, Noun, Adp, Num, PluralNoun],
        &[Det, Noun, Adp, Propn, Verb3sg, Num, PluralNoun],
        &[Propn, Comma, Det, Adj, Noun, Comma, Verb3sg, Det, Noun],
        &[Det, PluralNoun, Adp, Det, Noun, PassiveAux, VerbParticiple],
    ]
};

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// One gold-tagged body sentence ending in a period.
pub fn body_sentence<R: Rng>(id: impl Into<String>, domain: &DomainId, rng: &mut R) -> Sentence {
    let template = TEMPLATES.choose(rng).expect("templates");
    let mut tokens: Vec<Token> = template
        .iter()
        .map(|slot| {
            let (form, tag) = slot.fill(rng);
            Token {
                form: form.to_string(),
                gold_tag: Some(tag),
            }
        })
        .collect();
    tokens[0].form = capitalize(&tokens[0].form);
    tokens.push(Token {
        form: ".".into(),
        gold_tag: Some(Punct),
    });
    Sentence::new(id, tokens, domain.clone()).expect("templates build valid sentences")
}

/// Headline derived from a tagged body sentence: determiners, auxiliaries
/// and the final period are removed, and each content word is capitalized
/// with probability `capitalize_prob`.
pub fn derive_headline<R: Rng>(body: &Sentence, capitalize_prob: f64, rng: &mut R) -> Sentence {
    let mut tokens: Vec<Token> = body
        .tokens
        .iter()
        .filter(|t| !matches!(t.gold_tag, Some(Det | Aux)))
        .cloned()
        .collect();
    if tokens.len() > 1 && tokens.last().is_some_and(|t| t.form == ".") {
        tokens.pop();
    }
    for (i, token) in tokens.iter_mut().enumerate() {
        let content = matches!(token.gold_tag, Some(Noun | Verb | Adj | Propn));
        if token.gold_tag == Some(Propn) {
            continue;
        }
        // Sentence-case leftovers from the body are undone first.
        if i == 0 || token.form.chars().next().is_some_and(char::is_uppercase) {
            token.form = token.form.to_lowercase();
        }
        if content && rng.gen_bool(capitalize_prob) {
            token.form = capitalize(&token.form);
        }
    }
    Sentence::new(body.id.clone(), tokens, body.domain.clone())
        .expect("headline keeps content tokens")
}

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub body_sentences: usize,
    /// Fraction of body sentences used for validation.
    pub body_val_fraction: f64,
    /// Candidate lead/headline pairs for projection.
    pub pairs: usize,
    /// Share of candidate pairs made unalignable on purpose.
    pub distractor_rate: f64,
    pub headline_test: usize,
    pub capitalize_prob: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            body_sentences: 2000,
            body_val_fraction: 0.2,
            pairs: 1500,
            distractor_rate: 0.1,
            headline_test: 500,
            capitalize_prob: 0.7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthData {
    pub body_train: Corpus,
    pub body_val: Corpus,
    /// Untagged candidate pairs; the headline side is never gold.
    pub pairs: Vec<SentencePair>,
    /// Gold headline tags for every alignable pair, keyed by pair order.
    pub pair_gold: Vec<Option<Vec<PosTag>>>,
    pub headline_test: Corpus,
}

fn untagged(s: &Sentence, id: String) -> Sentence {
    let forms = s.forms();
    Sentence::from_forms(id, &forms, pair_domain()).expect("non-empty")
}

/// Generates a full register-transfer dataset under `seed`.
pub fn generate(
    config: &SynthConfig,
    body_domain: &DomainId,
    headline_domain: &DomainId,
    seed: u64,
) -> Result<SynthData> {
    let mut rng = rng::rng_for(seed, "synthetic");
    let body: Vec<Sentence> = (0..config.body_sentences)
        .map(|i| body_sentence(format!("body-{i}"), body_domain, &mut rng))
        .collect();
    let val_count = (config.body_val_fraction * body.len() as f64).round() as usize;
    let (train, val) = body.split_at(body.len() - val_count);

    let mut pairs = Vec::with_capacity(config.pairs);
    let mut pair_gold = Vec::with_capacity(config.pairs);
    for i in 0..config.pairs {
        let lead = body_sentence(format!("lead-{i}"), body_domain, &mut rng);
        let headline = derive_headline(&lead, config.capitalize_prob, &mut rng);
        let id = format!("pair-{i}");
        let mut headline_plain = untagged(&headline, format!("{id}-headline"));
        let gold = if rng.gen_bool(config.distractor_rate) {
            // A word absent from the lead makes the pair unalignable.
            let lead_lower: Vec<String> = lead.forms().iter().map(|f| f.to_lowercase()).collect();
            let extra = NOUNS
                .iter()
                .find(|w| !lead_lower.iter().any(|l| l == *w))
                .expect("lexicon larger than any sentence");
            headline_plain.tokens.push(Token {
                form: capitalize(extra),
                gold_tag: None,
            });
            None
        } else {
            Some(headline.gold_tags()?)
        };
        pairs.push(SentencePair {
            id,
            headline: headline_plain,
            lead: untagged(&lead, format!("{i}-lead")),
        });
        pair_gold.push(gold);
    }

    let headline_test = (0..config.headline_test)
        .map(|i| {
            let body = body_sentence(format!("test-{i}"), headline_domain, &mut rng);
            derive_headline(&body, config.capitalize_prob, &mut rng)
        })
        .collect();

    Ok(SynthData {
        body_train: Corpus::new(train.to_vec(), body_domain.clone()),
        body_val: Corpus::new(val.to_vec(), body_domain.clone()),
        pairs,
        pair_gold,
        headline_test: Corpus::new(headline_test, headline_domain.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::align_subsequence;

    #[test]
    fn headlines_drop_function_words() {
        let mut rng = rng::rng_for(0, "t");
        let d = DomainId::new("body", 0);
        for i in 0..200 {
            let body = body_sentence(i.to_string(), &d, &mut rng);
            assert_eq!(body.tokens.last().unwrap().form, ".");
            let h = derive_headline(&body, 0.7, &mut rng);
            let tags = h.gold_tags().unwrap();
            assert!(!tags.contains(&Det) && !tags.contains(&Aux));
            assert_ne!(h.tokens.last().unwrap().form, ".");
            assert!(align_subsequence(&h.forms(), &body.forms()).is_some());
        }
    }

    #[test]
    fn generation_is_seeded() {
        let cfg = SynthConfig {
            body_sentences: 50,
            pairs: 40,
            headline_test: 10,
            ..SynthConfig::default()
        };
        let b = DomainId::new("body", 0);
        let h = DomainId::new("head", 1);
        let x = generate(&cfg, &b, &h, 5).unwrap();
        let y = generate(&cfg, &b, &h, 5).unwrap();
        assert_eq!(x.body_train, y.body_train);
        assert_eq!(x.pairs, y.pairs);
        assert_eq!(x.body_train.len() + x.body_val.len(), 50);
        assert_eq!(x.pairs.len(), 40);
        for (p, g) in x.pairs.iter().zip(&x.pair_gold) {
            let aligned = align_subsequence(&p.headline.forms(), &p.lead.forms()).is_some();
            assert_eq!(aligned, g.is_some());
        }
    }
}
