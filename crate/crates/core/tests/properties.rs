use headtag::corpus::{
    build_vocab, parse_conllu, split_corpus, write_conllu, Corpus, DomainId, Sentence, SentencePair,
};
use headtag::projection::{align_subsequence, project_tags, AlignedPair};
use headtag::PosTag;
use proptest::prelude::*;

/// Lexicographically smallest index tuple matching `headline` in `lead`,
/// found by trying every subset of lead positions.
fn brute_force_alignment(headline: &[String], lead: &[String]) -> Option<Vec<usize>> {
    let h = headline.len();
    let l = lead.len();
    let mut best: Option<Vec<usize>> = None;
    for mask in 0u32..(1 << l) {
        if mask.count_ones() as usize != h {
            continue;
        }
        let idx: Vec<usize> = (0..l).filter(|i| mask & (1 << i) != 0).collect();
        let ok = idx
            .iter()
            .zip(headline)
            .all(|(&i, w)| lead[i].to_lowercase() == w.to_lowercase());
        if ok && best.as_ref().is_none_or(|b| idx < *b) {
            best = Some(idx);
        }
    }
    best
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "A", "b", "B", "c", "dé", "DÉ", "e"]).prop_map(String::from)
}

fn tag() -> impl Strategy<Value = PosTag> {
    (0..PosTag::ALL.len()).prop_map(|c| PosTag::from_code(c).unwrap())
}

fn pair_domain() -> DomainId {
    DomainId::new("pairs", 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn alignment_matches_subset_search(
        lead in prop::collection::vec(word(), 1..=10),
        headline in prop::collection::vec(word(), 1..=6),
    ) {
        let got = align_subsequence(&headline, &lead).map(|a| a.indices);
        prop_assert_eq!(got, brute_force_alignment(&headline, &lead));
    }

    #[test]
    fn subsequences_always_align(
        lead in prop::collection::vec(word(), 1..=10),
        mask in 1u32..1024,
    ) {
        let headline: Vec<String> = lead
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, w)| w.to_uppercase())
            .collect();
        prop_assume!(!headline.is_empty());
        prop_assert!(align_subsequence(&headline, &lead).is_some());
    }

    #[test]
    fn unaligned_lead_tags_do_not_matter(
        lead in prop::collection::vec(word(), 1..=10),
        mask in 1u32..1024,
        tags in prop::collection::vec(tag(), 10),
        replacement in tag(),
        victim in 0usize..10,
    ) {
        let headline: Vec<String> = lead
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, w)| w.clone())
            .collect();
        prop_assume!(!headline.is_empty());
        let pair = SentencePair {
            id: "p".into(),
            headline: Sentence::from_forms("p-headline", &headline, pair_domain()).unwrap(),
            lead: Sentence::from_forms("p-lead", &lead, pair_domain()).unwrap(),
        };
        let aligned = AlignedPair::from_pair(&pair).unwrap();
        let lead_tags = &tags[..lead.len()];
        let projected = project_tags(&aligned, lead_tags).unwrap();
        for (h, &i) in aligned.alignment.indices.iter().enumerate() {
            prop_assert_eq!(projected[h], lead_tags[i]);
        }
        let victim = victim % lead.len();
        prop_assume!(!aligned.alignment.indices.contains(&victim));
        let mut changed = lead_tags.to_vec();
        changed[victim] = replacement;
        prop_assert_eq!(project_tags(&aligned, &changed).unwrap(), projected);
    }

    #[test]
    fn conllu_round_trip(
        sentences in prop::collection::vec(
            prop::collection::vec(("[a-zA-Z.,]{1,6}", tag()), 1..8),
            1..6,
        ),
    ) {
        let d = DomainId::new("body", 0);
        let corpus = Corpus::new(
            sentences
                .iter()
                .enumerate()
                .map(|(i, toks)| {
                    Sentence::from_tagged(format!("s{i}"), toks, d.clone()).unwrap()
                })
                .collect(),
            d.clone(),
        );
        let text = write_conllu(&corpus).unwrap();
        let back = parse_conllu(&text, &d).unwrap();
        prop_assert_eq!(&back, &corpus);
        prop_assert_eq!(write_conllu(&back).unwrap(), text);
    }

    #[test]
    fn split_is_a_partition(n in 3usize..60, seed in any::<u64>(), cut in 1usize..9) {
        let d = DomainId::new("body", 0);
        let corpus = Corpus::new(
            (0..n)
                .map(|i| Sentence::from_forms(format!("s{i}"), &[format!("w{i}")], d.clone()).unwrap())
                .collect(),
            d,
        );
        let first = cut as f64 / 10.0;
        let folds = split_corpus(&corpus, &[first, 1.0 - first], seed).unwrap();
        let mut ids: Vec<String> = folds.iter().flat_map(|f| f.sentences.iter().map(|s| s.id.clone())).collect();
        prop_assert_eq!(ids.len(), n);
        ids.sort();
        ids.dedup();
        prop_assert_eq!(ids.len(), n);
        prop_assert_eq!(folds[1].len(), ((1.0 - first) * n as f64 + 1e-9).floor() as usize);
        let again = split_corpus(&corpus, &[first, 1.0 - first], seed).unwrap();
        prop_assert_eq!(again, folds);
    }

    #[test]
    fn vocabulary_ignores_sentence_order(
        words in prop::collection::vec("[a-dA-D]{1,3}", 1..30),
        min_freq in 1usize..3,
    ) {
        let d = DomainId::new("body", 0);
        let sentences: Vec<Sentence> = words
            .iter()
            .enumerate()
            .map(|(i, w)| Sentence::from_forms(format!("s{i}"), &[w.as_str()], d.clone()).unwrap())
            .collect();
        let forward = Corpus::new(sentences.clone(), d.clone());
        let backward = Corpus::new(sentences.into_iter().rev().collect(), d);
        let a = build_vocab(&[&forward], min_freq).unwrap();
        let b = build_vocab(&[&backward], min_freq).unwrap();
        prop_assert_eq!(a, b);
    }
}
