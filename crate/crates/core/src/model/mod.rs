//! BiGRU-CRF tagger with a shared encoder and one decoder head per domain.
//!
//! Tokens are embedded as a lowercased word vector concatenated with the
//! final states of a character BiGRU over the cased spelling. A stack of
//! BiGRU layers contextualizes them, and the head of the sentence's domain
//! projects states to tag scores decoded by Viterbi (or per-token argmax
//! when the CRF is disabled).

mod crf;
mod gru;
mod head;
mod io;
mod params;
mod tensor;

pub use crf::{crf_log_likelihood, crf_log_partition, path_score, softmax_decode, viterbi_decode};
pub use gru::{BiGruParams, GruParams};
pub use head::{emissions, DomainHead, EmissionScores};
pub use io::{load_model, save_model, MODEL_FORMAT_VERSION};
pub use params::{ModelDims, ParamSet, TaggerParams};
pub use tensor::Tensor;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::corpus::{Sentence, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::{self, TagRng};
use crate::tag::PosTag;

use gru::BiGruTrace;
use tensor::{matvec_t_add, outer_add};

/// Sentences per gradient work unit. Fixed so that the summation order,
/// and therefore the result, does not depend on the thread count.
const GRADIENT_CHUNK: usize = 4;

/// Anything that can tag a sentence.
pub trait SequenceTagger: Sync {
    fn tag(&self, sentence: &Sentence) -> Result<Vec<PosTag>>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaggerModel {
    pub dims: ModelDims,
    pub vocab: Vocabulary,
    /// Domain names in head order.
    pub domains: Vec<String>,
    pub params: TaggerParams,
    pub use_crf: bool,
}

struct Embedded {
    n: usize,
    word_ids: Vec<usize>,
    chars: Vec<CharTrace>,
    /// `n × token_width`.
    vectors: Vec<f64>,
}

struct CharTrace {
    ids: Vec<usize>,
    inputs: Vec<f64>,
    trace: BiGruTrace,
}

struct Encoded {
    layer_inputs: Vec<Vec<f64>>,
    traces: Vec<BiGruTrace>,
    /// Inverted-dropout mask applied to each layer's output.
    masks: Vec<Option<Vec<f64>>>,
    /// `n × state_width`, after the last mask.
    states: Vec<f64>,
}

impl TaggerModel {
    /// Fresh model with one randomly initialized head per domain.
    pub fn new<S: AsRef<str>>(
        dims: ModelDims,
        vocab: Vocabulary,
        domains: &[S],
        use_crf: bool,
        seed: u64,
    ) -> Result<Self> {
        dims.validate()?;
        let domains: Vec<String> = domains.iter().map(|d| d.as_ref().to_string()).collect();
        if domains.is_empty() {
            return Err(Error::invalid("a tagger needs at least one domain head"));
        }
        for (i, d) in domains.iter().enumerate() {
            if domains[..i].contains(d) {
                return Err(Error::invalid(format!("duplicate domain `{d}`")));
            }
        }
        let mut init = rng::rng_for(seed, "init");
        let params = TaggerParams::new(
            &dims,
            vocab.word_count(),
            vocab.char_count(),
            domains.len(),
            &mut init,
        );
        Ok(TaggerModel {
            dims,
            vocab,
            domains,
            params,
            use_crf,
        })
    }

    pub fn domain_index(&self, domain: &str) -> Result<usize> {
        self.domains
            .iter()
            .position(|d| d == domain)
            .ok_or_else(|| Error::UnknownDomain(domain.to_string()))
    }

    pub fn has_domain(&self, domain: &str) -> bool {
        self.domains.iter().any(|d| d == domain)
    }

    pub fn head(&self, domain: &str) -> Result<&DomainHead> {
        Ok(&self.params.heads[self.domain_index(domain)?])
    }

    /// Overwrites word rows with vectors from a whitespace-separated text
    /// file (`token v1 … v_d` per line). Returns the number of rows set.
    /// Words missing from the file keep their uniform initialization.
    pub fn load_pretrained_vectors(&mut self, text: &str) -> Result<usize> {
        let dim = self.dims.word_dim;
        let mut loaded = 0;
        for (i, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values = fields
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if values.len() != dim {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {dim} values, found {}", values.len()),
                });
            }
            let id = self.vocab.word_id(word);
            if id != crate::corpus::UNK_ID {
                self.params
                    .word_embeddings
                    .row_mut(id)
                    .copy_from_slice(&values);
                loaded += 1;
            }
        }
        Ok(loaded)
    }

    fn embed(&self, sentence: &Sentence) -> Result<Embedded> {
        if sentence.is_empty() {
            return Err(Error::invalid(format!(
                "sentence `{}` is empty",
                sentence.id
            )));
        }
        let d = &self.dims;
        let n = sentence.len();
        let width = d.token_width();
        let mut vectors = Vec::with_capacity(n * width);
        let mut word_ids = Vec::with_capacity(n);
        let mut chars = Vec::with_capacity(n);
        for token in &sentence.tokens {
            let word = self.vocab.word_id(&token.form);
            word_ids.push(word);
            vectors.extend_from_slice(self.params.word_embeddings.row(word));

            let ids = self.vocab.char_ids(&token.form);
            let mut inputs = Vec::with_capacity(ids.len() * d.char_dim);
            for &c in &ids {
                inputs.extend_from_slice(self.params.char_embeddings.row(c));
            }
            let trace = self.params.char_encoder.run(&inputs, ids.len());
            vectors.extend(BiGruParams::summary(&trace));
            chars.push(CharTrace { ids, inputs, trace });
        }
        Ok(Embedded {
            n,
            word_ids,
            chars,
            vectors,
        })
    }

    fn encode_flat(
        &self,
        inputs: Vec<f64>,
        n: usize,
        dropout_rate: f64,
        rng: Option<&mut TagRng>,
    ) -> Encoded {
        let keep = 1.0 - dropout_rate;
        let mut rng = rng.filter(|_| dropout_rate > 0.0);
        let mut layer_inputs = Vec::with_capacity(self.dims.layers);
        let mut traces = Vec::with_capacity(self.dims.layers);
        let mut masks = Vec::with_capacity(self.dims.layers);
        let mut current = inputs;
        for layer in &self.params.encoder {
            let trace = layer.run(&current, n);
            let mut out = BiGruParams::outputs(&trace, n);
            let mask = rng.as_mut().map(|r| {
                let mask: Vec<f64> = (0..out.len())
                    .map(|_| {
                        if r.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect();
                for (o, m) in out.iter_mut().zip(&mask) {
                    *o *= m;
                }
                mask
            });
            layer_inputs.push(std::mem::replace(&mut current, out));
            traces.push(trace);
            masks.push(mask);
        }
        Encoded {
            layer_inputs,
            traces,
            masks,
            states: current,
        }
    }

    /// One `token_width` vector per token.
    pub fn embed_tokens(&self, sentence: &Sentence) -> Result<Vec<Vec<f64>>> {
        let embedded = self.embed(sentence)?;
        Ok(embedded
            .vectors
            .chunks_exact(self.dims.token_width())
            .map(<[f64]>::to_vec)
            .collect())
    }

    /// Contextual states, one `state_width` vector per input vector.
    /// Dropout is applied to every encoder layer's output only when
    /// `training` is set.
    pub fn encode<R: Rng>(
        &self,
        vectors: &[Vec<f64>],
        dropout_rate: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<Vec<Vec<f64>>> {
        let width = self.dims.token_width();
        if vectors.is_empty() {
            return Err(Error::shape("nothing to encode"));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != width) {
            return Err(Error::shape(format!("input width {} != {width}", v.len())));
        }
        check_dropout(dropout_rate)?;
        let flat: Vec<f64> = vectors.iter().flatten().copied().collect();
        let mut local = TagRng::seed_from_u64(rng.gen());
        let encoded = self.encode_flat(
            flat,
            vectors.len(),
            dropout_rate,
            training.then_some(&mut local),
        );
        Ok(encoded
            .states
            .chunks_exact(self.dims.state_width())
            .map(<[f64]>::to_vec)
            .collect())
    }

    pub fn emissions(&self, states: &[Vec<f64>], domain: &str) -> Result<EmissionScores> {
        let head = self.head(domain)?;
        if let Some(s) = states.iter().find(|s| s.len() != head.input_size()) {
            return Err(Error::shape(format!(
                "state width {} != {}",
                s.len(),
                head.input_size()
            )));
        }
        let flat: Vec<f64> = states.iter().flatten().copied().collect();
        emissions(&flat, head)
    }

    fn scores(&self, sentence: &Sentence, head: &DomainHead) -> Result<EmissionScores> {
        let embedded = self.embed(sentence)?;
        let encoded = self.encode_flat(embedded.vectors, embedded.n, 0.0, None);
        emissions(&encoded.states, head)
    }

    /// Evaluation-mode tagging under the head of `domain`.
    pub fn tag_sentence(&self, sentence: &Sentence, domain: &str) -> Result<Vec<PosTag>> {
        let head = self.head(domain)?;
        let e = self.scores(sentence, head)?;
        if self.use_crf {
            viterbi_decode(&e, head)
        } else {
            Ok(softmax_decode(&e))
        }
    }

    fn gold_codes(&self, sentence: &Sentence) -> Result<Vec<usize>> {
        let tags = sentence.gold_tags()?;
        if let Some(t) = tags.iter().find(|t| t.code() >= self.dims.num_tags) {
            return Err(Error::invalid(format!(
                "tag {t} in `{}` is outside this model's {} tags",
                sentence.id, self.dims.num_tags
            )));
        }
        Ok(crf::to_codes(&tags))
    }

    /// Loss of one sentence, with its gradient accumulated into `grads`.
    fn sentence_backward(
        &self,
        sentence: &Sentence,
        gold: &[usize],
        head_index: usize,
        dropout_rate: f64,
        rng: &mut TagRng,
        grads: &mut TaggerParams,
    ) -> Result<f64> {
        let d = self.dims;
        let embedded = self.embed(sentence)?;
        let n = embedded.n;
        let encoded = self.encode_flat(embedded.vectors.clone(), n, dropout_rate, Some(rng));
        let head = &self.params.heads[head_index];
        let e = emissions(&encoded.states, head)?;
        let head_grads = &mut grads.heads[head_index];
        let (loss, d_e) = if self.use_crf {
            crf::crf_nll_backward(&e, gold, head, head_grads)?
        } else {
            crf::softmax_nll_backward(&e, gold)?
        };

        // Tag projection.
        let k = head.num_tags();
        let sw = d.state_width();
        let mut d_states = vec![0.0; n * sw];
        for i in 0..n {
            let de = &d_e[i * k..(i + 1) * k];
            let state = &encoded.states[i * sw..(i + 1) * sw];
            outer_add(&mut head_grads.emission_weights.data, de, state);
            for (b, g) in head_grads.emission_bias.data.iter_mut().zip(de) {
                *b += g;
            }
            matvec_t_add(
                &mut d_states[i * sw..(i + 1) * sw],
                &head.emission_weights.data,
                sw,
                de,
            );
        }

        // Encoder layers, top down.
        let mut d_out = d_states;
        for l in (0..encoded.traces.len()).rev() {
            if let Some(mask) = &encoded.masks[l] {
                for (g, m) in d_out.iter_mut().zip(mask) {
                    *g *= m;
                }
            }
            let input = &encoded.layer_inputs[l];
            let mut d_in = vec![0.0; input.len()];
            self.params.encoder[l].backward_outputs(
                input,
                &encoded.traces[l],
                &d_out,
                n,
                &mut grads.encoder[l],
                &mut d_in,
            );
            d_out = d_in;
        }

        // Embeddings.
        let width = d.token_width();
        for (i, (&word, chars)) in embedded.word_ids.iter().zip(&embedded.chars).enumerate() {
            let d_vec = &d_out[i * width..(i + 1) * width];
            for (g, v) in grads
                .word_embeddings
                .row_mut(word)
                .iter_mut()
                .zip(&d_vec[..d.word_dim])
            {
                *g += v;
            }
            let len = chars.ids.len();
            let mut d_chars = vec![0.0; chars.inputs.len()];
            self.params.char_encoder.backward_summary(
                &chars.inputs,
                &chars.trace,
                &d_vec[d.word_dim..],
                len,
                &mut grads.char_encoder,
                &mut d_chars,
            );
            for (j, &c) in chars.ids.iter().enumerate() {
                let row = grads.char_embeddings.row_mut(c);
                for (g, v) in row
                    .iter_mut()
                    .zip(&d_chars[j * d.char_dim..(j + 1) * d.char_dim])
                {
                    *g += v;
                }
            }
        }
        Ok(loss)
    }

    /// Mean negative log-likelihood of `batch` (CRF, or per-token
    /// cross-entropy without it) and its gradient. Each sentence is routed to
    /// the head named by its domain; heads no sentence uses get zero gradient.
    pub fn loss_and_gradient<R: Rng>(
        &self,
        batch: &[&Sentence],
        dropout_rate: f64,
        rng: &mut R,
    ) -> Result<(f64, TaggerParams)> {
        if batch.is_empty() {
            return Err(Error::invalid("empty batch"));
        }
        check_dropout(dropout_rate)?;
        let jobs = batch
            .iter()
            .map(|s| {
                let head = self.domain_index(&s.domain.name)?;
                let gold = self.gold_codes(s)?;
                Ok((*s, head, gold, rng.gen::<u64>()))
            })
            .collect::<Result<Vec<_>>>()?;

        let partials = jobs
            .par_chunks(GRADIENT_CHUNK)
            .map(|chunk| {
                let mut grads = self.params.zeros_like();
                let mut loss = 0.0;
                for (sentence, head, gold, seed) in chunk {
                    let mut sentence_rng = TagRng::seed_from_u64(*seed);
                    loss += self.sentence_backward(
                        sentence,
                        gold,
                        *head,
                        dropout_rate,
                        &mut sentence_rng,
                        &mut grads,
                    )?;
                }
                Ok((loss, grads))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut parts = partials.into_iter();
        let (mut loss, mut grads) = parts.next().expect("non-empty batch");
        for (l, g) in parts {
            loss += l;
            for ((_, a), (_, b)) in grads.tensors_mut().into_iter().zip(g.tensors()) {
                a.add_assign(b);
            }
        }
        let scale = 1.0 / batch.len() as f64;
        for (_, t) in grads.tensors_mut() {
            t.scale(scale);
        }
        Ok((loss * scale, grads))
    }

    /// Tagger view that decodes with the head of `domain`.
    pub fn with_domain(&self, domain: &str) -> Result<DomainTagger<'_>> {
        self.domain_index(domain)?;
        Ok(DomainTagger {
            model: self,
            domain: domain.to_string(),
        })
    }
}

fn check_dropout(rate: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::invalid(format!(
            "dropout rate {rate} outside [0, 1)"
        )));
    }
    Ok(())
}

/// A model bound to one decoder head.
#[derive(Clone, Debug)]
pub struct DomainTagger<'a> {
    model: &'a TaggerModel,
    domain: String,
}

impl SequenceTagger for DomainTagger<'_> {
    fn tag(&self, sentence: &Sentence) -> Result<Vec<PosTag>> {
        self.model.tag_sentence(sentence, &self.domain)
    }
}

impl<F> SequenceTagger for F
where
    F: Fn(&Sentence) -> Result<Vec<PosTag>> + Sync,
{
    fn tag(&self, sentence: &Sentence) -> Result<Vec<PosTag>> {
        self(sentence)
    }
}
