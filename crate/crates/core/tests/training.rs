use headtag::corpus::{build_vocab, Corpus, DomainId, Sentence};
use headtag::eval::token_accuracy;
use headtag::model::{load_model, save_model, ModelDims, ParamSet, TaggerModel};
use headtag::rng::rng_for;
use headtag::synthetic::body_sentence;
use headtag::training::{
    adam_step, cross_validate, select_decoder_head, train, AdamState, TrainConfig,
};
use headtag::PosTag;
use rand::Rng;

fn dims() -> ModelDims {
    ModelDims {
        word_dim: 16,
        char_dim: 8,
        char_hidden: 8,
        hidden: 16,
        layers: 2,
        num_tags: 17,
    }
}

fn corpus(name: &str, index: usize, n: usize, seed: u64) -> Corpus {
    let d = DomainId::new(name, index);
    let mut rng = rng_for(seed, name);
    Corpus::new(
        (0..n)
            .map(|i| body_sentence(format!("{name}-{i}"), &d, &mut rng))
            .collect(),
        d,
    )
}

/// Sentences in which every word form has exactly one tag.
fn unambiguous(n: usize) -> Corpus {
    use PosTag::*;
    let d = DomainId::new("body", 0);
    let lexicon: &[(&str, PosTag)] = &[
        ("the", Det),
        ("a", Det),
        ("dog", Noun),
        ("cat", Noun),
        ("park", Noun),
        ("runs", Verb),
        ("sleeps", Verb),
        ("in", Adp),
        ("on", Adp),
        ("big", Adj),
        ("red", Adj),
        ("Anna", Propn),
        ("Oslo", Propn),
        (".", Punct),
        ("three", Num),
        ("and", Cconj),
    ];
    let mut rng = rng_for(11, "toy");
    let sentences = (0..n)
        .map(|i| {
            let len = rng.gen_range(3..8);
            let toks: Vec<(&str, PosTag)> = (0..len)
                .map(|_| lexicon[rng.gen_range(0..lexicon.len())])
                .collect();
            Sentence::from_tagged(format!("toy-{i}"), &toks, d.clone()).unwrap()
        })
        .collect();
    Corpus::new(sentences, d)
}

#[test]
fn memorizes_a_small_corpus() {
    let data = unambiguous(20);
    let vocab = build_vocab(&[&data], 1).unwrap();
    let mut model = TaggerModel::new(dims(), vocab, &["body"], true, 1).unwrap();
    let config = TrainConfig {
        learning_rate: 0.03,
        epochs: 6,
        batch_size: 1,
        seed: 1,
        ..TrainConfig::default()
    };
    let history = train(&mut model, &[&data], &[&data], &config).unwrap();
    let acc = token_accuracy(&model.with_domain("body").unwrap(), &data).unwrap();
    assert_eq!(acc, 1.0, "history: {:?}", history.losses());
}

#[test]
fn fixed_batch_loss_mostly_falls_at_small_learning_rate() {
    let data = unambiguous(20);
    let vocab = build_vocab(&[&data], 1).unwrap();
    let mut model = TaggerModel::new(dims(), vocab, &["body"], true, 4).unwrap();
    let adam = TrainConfig::default().adam();
    assert_eq!(adam.learning_rate, 1e-3);
    let batch: Vec<_> = data.sentences.iter().collect();
    let mut state = AdamState::new(&model.params);
    let mut losses = Vec::new();
    for _ in 0..40 {
        let (loss, grads) = model
            .loss_and_gradient(&batch, 0.0, &mut rng_for(0, "d"))
            .unwrap();
        losses.push(loss);
        adam_step(&mut model.params, &grads, &mut state, &adam).unwrap();
    }
    let falls = losses.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(falls * 10 >= (losses.len() - 1) * 9, "losses: {losses:?}");
    assert!(losses.last().unwrap() < &losses[0]);
}

#[test]
fn other_heads_are_untouched_by_one_domain() {
    let body = corpus("body", 0, 8, 3);
    let vocab = build_vocab(&[&body], 1).unwrap();
    let mut model = TaggerModel::new(dims(), vocab, &["body", "headline"], true, 5).unwrap();
    let before = model.params.heads[1].clone();
    let batch: Vec<_> = body.sentences.iter().collect();
    let (_, grads) = model
        .loss_and_gradient(&batch, 0.2, &mut rng_for(0, "d"))
        .unwrap();
    assert_eq!(grads.heads[1].emission_weights.squared_norm(), 0.0);
    let mut state = AdamState::new(&model.params);
    // Earlier steps leave nonzero moments on the idle head too.
    for (_, t) in state.first_moment.tensors_mut() {
        t.data.iter_mut().for_each(|v| *v = 0.3);
    }
    adam_step(
        &mut model.params,
        &grads,
        &mut state,
        &TrainConfig::default().adam(),
    )
    .unwrap();
    assert_eq!(model.params.heads[1], before);
    assert_ne!(
        model.params.heads[0],
        TaggerModel::new(dims(), model.vocab.clone(), &["body", "headline"], true, 5)
            .unwrap()
            .params
            .heads[0]
    );
}

#[test]
fn training_is_reproducible() {
    let data = corpus("body", 0, 30, 4);
    let vocab = build_vocab(&[&data], 1).unwrap();
    let config = TrainConfig {
        learning_rate: 0.01,
        dropout_rate: 0.2,
        epochs: 2,
        batch_size: 5,
        seed: 9,
        ..TrainConfig::default()
    };
    let run = || {
        let mut m = TaggerModel::new(dims(), vocab.clone(), &["body"], true, 1).unwrap();
        train(&mut m, &[&data], &[&data], &config).unwrap();
        save_model(&m).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    let loaded = load_model(&a).unwrap();
    assert_eq!(save_model(&loaded).unwrap(), a);
}

#[test]
fn selects_the_trained_head() {
    let body = corpus("body", 0, 40, 5);
    let vocab = build_vocab(&[&body], 1).unwrap();
    let mut model = TaggerModel::new(dims(), vocab, &["random", "body"], true, 2).unwrap();
    let config = TrainConfig {
        learning_rate: 0.01,
        epochs: 3,
        batch_size: 4,
        ..TrainConfig::default()
    };
    train(&mut model, &[&body], &[], &config).unwrap();
    let (head, acc) = select_decoder_head(&model, &body).unwrap();
    assert_eq!(head, "body");
    let random = token_accuracy(&model.with_domain("random").unwrap(), &body).unwrap();
    assert!(acc > random, "{acc} vs {random}");
}

#[test]
fn cross_validation_covers_every_sentence() {
    let data = corpus("body", 0, 40, 6);
    let report = cross_validate(&data, 4, 0, |train_fold, val_fold, fold| {
        let vocab = build_vocab(&[train_fold], 1)?;
        let mut m = TaggerModel::new(dims(), vocab, &["body"], true, fold as u64)?;
        let config = TrainConfig {
            learning_rate: 0.01,
            epochs: 2,
            batch_size: 4,
            ..TrainConfig::default()
        };
        train(&mut m, &[train_fold], &[val_fold], &config)?;
        Ok(OwnedTagger(m))
    })
    .unwrap();
    assert_eq!(report.folds.len(), 4);
    let mut ids: Vec<String> = report
        .folds
        .iter()
        .flat_map(|f| f.test_ids.clone())
        .collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 40);
}

struct OwnedTagger(TaggerModel);

impl headtag::model::SequenceTagger for OwnedTagger {
    fn tag(&self, s: &headtag::corpus::Sentence) -> headtag::Result<Vec<headtag::PosTag>> {
        self.0.tag_sentence(s, "body")
    }
}
