//! One function per subcommand.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use headtag::corpus::{
    build_vocab, corpus_stats, parse_conllu, parse_pairs, write_conllu, Corpus, DomainId,
};
use headtag::eval::{
    aligned_predictions, bootstrap_compare, emit_tag_distribution, evaluate, tag_corpus,
    BootstrapConfig, FinalPeriod,
};
use headtag::model::{load_model, save_model, TaggerModel};
use headtag::projection::{build_silver_corpus, SilverCorpusReport};
use headtag::training::{
    random_search_models, train as train_model, train_and_score, RunConfig, TrainConfig,
    TrialRecord,
};
use serde_json::json;

use crate::manifest::RunManifest;
use crate::{
    CliError, CompareArgs, DataArgs, EvalArgs, ProjectArgs, SearchArgs, StatsArgs, TagArgs,
    TrainArgs,
};

type CliResult<T = ()> = Result<T, CliError>;

fn pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Splits `path@domain` at the last `@`.
fn split_labeled(arg: &str) -> Option<(&str, &str)> {
    let (path, label) = arg.rsplit_once('@')?;
    (!path.is_empty() && !label.is_empty()).then_some((path, label))
}

fn file_stem(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map_or_else(|| path.to_string(), |s| s.to_string_lossy().into_owned())
}

/// Corpora named `path@domain`. Domain indices follow first appearance in
/// `known` and then in `args`.
fn load_labeled(
    args: &[String],
    known: &mut Vec<String>,
    manifest: &mut RunManifest,
) -> CliResult<Vec<Corpus>> {
    let mut parsed = Vec::new();
    for arg in args {
        let (path, domain) = split_labeled(arg)
            .ok_or_else(|| CliError::Usage(format!("`{arg}` must be written as path@domain")))?;
        parsed.push((path, domain.to_string()));
    }
    let mut corpora = Vec::with_capacity(parsed.len());
    for (path, domain) in parsed {
        let index = match known.iter().position(|d| *d == domain) {
            Some(i) => i,
            None => {
                known.push(domain.clone());
                known.len() - 1
            }
        };
        let text = manifest.read_input(Path::new(path))?;
        corpora.push(parse_conllu(&text, &DomainId::new(domain, index))?);
    }
    Ok(corpora)
}

pub fn stats(args: &StatsArgs, manifest: &mut RunManifest) -> CliResult {
    let mut named = Vec::new();
    for arg in &args.inputs {
        let (path, name) = match split_labeled(arg) {
            Some((p, n)) => (p.to_string(), n.to_string()),
            None => (arg.clone(), file_stem(arg)),
        };
        let text = manifest.read_input(Path::new(&path))?;
        let corpus = parse_conllu(&text, &DomainId::new(name.clone(), named.len()))?;
        named.push((name, path, corpus_stats(&corpus)?));
    }
    manifest.config = json!({ "inputs": args.inputs });
    let report: Vec<_> = named
        .iter()
        .map(|(name, path, stats)| json!({ "corpus": name, "path": path, "stats": stats }))
        .collect();
    manifest.write_output(&args.out, &pretty(&report))?;
    let columns: Vec<(&str, _)> = named.iter().map(|(n, _, s)| (n.as_str(), s)).collect();
    manifest.write_output(&args.csv, &emit_tag_distribution(&columns)?)?;
    Ok(())
}

pub fn project(args: &ProjectArgs, manifest: &mut RunManifest) -> CliResult {
    manifest.seed = Some(args.seed);
    manifest.config = json!({
        "tagger_domain": args.tagger_domain,
        "silver_domain": args.silver_domain,
        "train_frac": args.train_frac,
        "seed": args.seed,
    });
    let pairs = parse_pairs(&manifest.read_input(&args.pairs)?)?;
    let model = load_model(&manifest.read_input(&args.tagger)?)?;
    let silver_domain = DomainId::new(args.silver_domain.clone(), 0);
    match build_silver_corpus(
        &pairs,
        &model,
        &args.tagger_domain,
        &silver_domain,
        args.train_frac,
        args.seed,
    ) {
        Ok(silver) => {
            manifest.write_output(&args.out_train, &write_conllu(&silver.train)?)?;
            manifest.write_output(&args.out_val, &write_conllu(&silver.val)?)?;
            manifest.write_output(&args.report, &pretty(&silver.report))?;
            eprintln!(
                "{} of {} pairs aligned: {} train, {} validation",
                silver.report.aligned,
                silver.report.candidates,
                silver.report.train_count,
                silver.report.val_count
            );
            Ok(())
        }
        Err(e @ headtag::Error::Empty(_)) => {
            let report = SilverCorpusReport {
                candidates: pairs.len(),
                ..SilverCorpusReport::default()
            };
            manifest.write_output(&args.report, &pretty(&report))?;
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

struct Prepared {
    run: RunConfig,
    train: Vec<Corpus>,
    val: Vec<Corpus>,
    domains: Vec<String>,
    selection: Option<String>,
    vectors: Option<String>,
}

fn prepare(data: &DataArgs, manifest: &mut RunManifest) -> CliResult<Prepared> {
    let mut run = match &data.config {
        Some(path) => RunConfig::from_json(&manifest.read_input(path)?)?,
        None => RunConfig::default(),
    };
    run.train.seed = data.seed;
    manifest.seed = Some(data.seed);

    // Labels are checked before any file is read.
    for arg in data.train.iter().chain(&data.val) {
        if split_labeled(arg).is_none() {
            return Err(CliError::Usage(format!(
                "`{arg}` must be written as path@domain"
            )));
        }
    }
    let val_domains: BTreeSet<&str> = data
        .val
        .iter()
        .filter_map(|a| split_labeled(a))
        .map(|(_, d)| d)
        .collect();
    let selection = match (&data.select_domain, val_domains.len()) {
        (Some(d), _) if !val_domains.contains(d.as_str()) => {
            return Err(CliError::Usage(format!(
                "--select-domain `{d}` names no --val corpus"
            )));
        }
        (Some(d), _) => Some(d.clone()),
        (None, 0) => None,
        (None, 1) => val_domains.first().map(|d| d.to_string()),
        (None, _) => {
            return Err(CliError::Usage(
                "--select-domain is required when validation corpora span several domains".into(),
            ));
        }
    };

    let mut domains = Vec::new();
    let train = load_labeled(&data.train, &mut domains, manifest)?;
    let mut all_domains = domains.clone();
    let val = load_labeled(&data.val, &mut all_domains, manifest)?;
    let vectors = match &data.vectors {
        Some(p) => Some(manifest.read_input(p)?),
        None => None,
    };
    manifest.config = json!({
        "config": run,
        "train": data.train,
        "val": data.val,
        "domains": domains,
        "select_domain": selection,
    });
    Ok(Prepared {
        run,
        train,
        val,
        domains,
        selection,
        vectors,
    })
}

impl Prepared {
    fn factory(
        &self,
    ) -> CliResult<impl Fn(&TrainConfig) -> headtag::Result<TaggerModel> + Sync + '_> {
        let refs: Vec<&Corpus> = self.train.iter().collect();
        let vocab = build_vocab(&refs, self.run.vocab_min_freq.unwrap_or(1))?;
        Ok(move |config: &TrainConfig| {
            let mut model = TaggerModel::new(
                self.run.model,
                vocab.clone(),
                &self.domains,
                config.use_crf,
                config.seed,
            )?;
            if let Some(text) = &self.vectors {
                model.load_pretrained_vectors(text)?;
            }
            Ok(model)
        })
    }

    /// Concatenated validation corpora of the selection domain.
    fn selection_corpus(&self) -> Option<Corpus> {
        let name = self.selection.as_ref()?;
        let parts: Vec<&Corpus> = self.val.iter().filter(|c| &c.domain.name == name).collect();
        let sentences = parts
            .iter()
            .flat_map(|c| c.sentences.iter().cloned())
            .collect();
        Some(Corpus::new(sentences, parts[0].domain.clone()))
    }
}

pub fn train(args: &TrainArgs, manifest: &mut RunManifest) -> CliResult {
    let prepared = prepare(&args.data, manifest)?;
    let factory = prepared.factory()?;
    let train_refs: Vec<&Corpus> = prepared.train.iter().collect();
    let val_refs: Vec<&Corpus> = prepared.val.iter().collect();
    let config = &prepared.run.train;
    let (model, report) = match prepared.selection_corpus() {
        Some(selection) => {
            let run = train_and_score(&factory, config, &train_refs, &val_refs, &selection)?;
            let record = TrialRecord {
                trial: 0,
                seed: config.seed,
                config: config.clone(),
                epoch_losses: run.history.losses(),
                epoch_val_token_accuracy: run
                    .history
                    .epochs
                    .iter()
                    .map(|e| e.val_token_accuracy.clone())
                    .collect(),
                val_token_accuracy: run.val_token_accuracy,
                selected_head: run.selected_head.clone(),
            };
            eprintln!(
                "validation token accuracy {:.4} with head `{}`",
                run.val_token_accuracy, run.selected_head
            );
            (run.model, json!(record))
        }
        None => {
            let mut model = factory(config)?;
            let history = train_model(&mut model, &train_refs, &val_refs, config)?;
            (
                model,
                json!({ "config": config, "epoch_losses": history.losses() }),
            )
        }
    };
    manifest.write_output(&args.data.out, &save_model(&model)?)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| with_suffix(&args.data.out, ".report.json"));
    manifest.write_output(&report_path, &pretty(&report))?;
    Ok(())
}

pub fn search(args: &SearchArgs, manifest: &mut RunManifest) -> CliResult {
    let mut prepared = prepare(&args.data, manifest)?;
    if let Some(b) = args.budget {
        prepared.run.search.budget = b;
    }
    if let Some(s) = args.seeds {
        prepared.run.search.seeds_per_trial = s;
    }
    prepared.run.search.validate()?;
    if let Some(cfg) = manifest.config.get_mut("config") {
        *cfg = json!(prepared.run);
    }
    let Some(selection) = prepared.selection.clone() else {
        return Err(CliError::Usage(
            "search needs at least one --val corpus".into(),
        ));
    };
    let factory = prepared.factory()?;
    let train_refs: Vec<&Corpus> = prepared.train.iter().collect();
    let val_refs: Vec<&Corpus> = prepared.val.iter().collect();
    let outcome = random_search_models(
        &prepared.run.search,
        &prepared.run.train,
        factory,
        &train_refs,
        &val_refs,
        &selection,
    )?;

    manifest.write_output(&args.data.out, &save_model(&outcome.best_model)?)?;
    let log: String = outcome
        .log
        .iter()
        .map(|r| serde_json::to_string(r).expect("serializable") + "\n")
        .collect();
    let log_path = args
        .trial_log
        .clone()
        .unwrap_or_else(|| with_suffix(&args.data.out, ".trials.jsonl"));
    manifest.write_output(&log_path, &log)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| with_suffix(&args.data.out, ".search.json"));
    manifest.write_output(
        &report_path,
        &pretty(&json!({ "best": outcome.best, "trials": outcome.trials })),
    )?;
    eprintln!(
        "best trial {}: mean validation token accuracy {:.4} ± {:.4}",
        outcome.best.index, outcome.best.mean, outcome.best.stddev
    );
    Ok(())
}

pub fn tag(args: &TagArgs, manifest: &mut RunManifest) -> CliResult {
    manifest.config = json!({ "domain": args.domain, "append_period": args.append_period });
    let model = load_model(&manifest.read_input(&args.model)?)?;
    let index = model.domain_index(&args.domain)?;
    let corpus = parse_conllu(
        &manifest.read_input(&args.input)?,
        &DomainId::new(args.domain.clone(), index),
    )?;
    let tagger = model.with_domain(&args.domain)?;
    let predictions = if args.append_period {
        tag_corpus(&FinalPeriod(tagger), &corpus)?
    } else {
        tag_corpus(&tagger, &corpus)?
    };
    let sentences = corpus
        .sentences
        .iter()
        .zip(&predictions)
        .map(|(s, tags)| s.with_tags(tags))
        .collect::<headtag::Result<Vec<_>>>()?;
    let tagged = Corpus::new(sentences, corpus.domain.clone());
    manifest.write_output(&args.out, &write_conllu(&tagged)?)?;
    Ok(())
}

fn gold_and_predictions(
    gold: &Path,
    preds: &[&Path],
    manifest: &mut RunManifest,
) -> CliResult<(Corpus, Vec<Vec<Vec<headtag::PosTag>>>)> {
    let gold = parse_conllu(&manifest.read_input(gold)?, &DomainId::new("gold", 0))?;
    let mut out = Vec::new();
    for path in preds {
        let pred = parse_conllu(&manifest.read_input(path)?, &DomainId::new("pred", 0))?;
        out.push(aligned_predictions(&gold, &pred)?);
    }
    Ok((gold, out))
}

pub fn eval(args: &EvalArgs, manifest: &mut RunManifest) -> CliResult {
    manifest.config = json!({});
    let (gold, preds) = gold_and_predictions(&args.gold, &[&args.pred], manifest)?;
    let report = evaluate(&gold, &preds[0])?;
    manifest.write_output(&args.report, &pretty(&report))?;
    println!(
        "token accuracy {:.4}, sentence accuracy {:.4}",
        report.token_accuracy, report.sequence_accuracy
    );
    Ok(())
}

pub fn compare(args: &CompareArgs, manifest: &mut RunManifest) -> CliResult {
    let mut config = match &args.bootstrap_config {
        Some(path) => serde_json::from_str::<BootstrapConfig>(&manifest.read_input(path)?)
            .map_err(headtag::Error::from)?,
        None => BootstrapConfig::default(),
    };
    if let Some(r) = args.replications {
        config.replications = r;
    }
    if let Some(f) = args.batch_fraction {
        config.batch_fraction = f;
    }
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    config.seed = args.seed;
    config.validate()?;
    manifest.seed = Some(args.seed);
    manifest.config = json!(config);
    let (gold, preds) = gold_and_predictions(&args.gold, &[&args.pred_a, &args.pred_b], manifest)?;
    let result = bootstrap_compare(&gold, &preds[0], &preds[1], &config)?;
    manifest.write_output(&args.out, &pretty(&result))?;
    println!(
        "{} (p = {:.6}, delta = {:+.4})",
        if result.significant {
            "significant"
        } else {
            "not significant"
        },
        result.p_value,
        result.observed_delta
    );
    Ok(())
}
