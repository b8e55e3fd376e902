use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tag::NUM_TAGS;

use super::gru::BiGruParams;
use super::head::DomainHead;
use super::tensor::Tensor;

/// A collection of named tensors that optimizers and gradient checks can
/// walk in a fixed order.
pub trait ParamSet {
    fn tensors(&self) -> Vec<(String, &Tensor)>;
    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor)>;
    fn zeros_like(&self) -> Self;

    fn global_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|(_, t)| t.squared_norm())
            .sum::<f64>()
            .sqrt()
    }
}

impl ParamSet for Vec<Tensor> {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        self.iter()
            .enumerate()
            .map(|(i, t)| (i.to_string(), t))
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        self.iter_mut()
            .enumerate()
            .map(|(i, t)| (i.to_string(), t))
            .collect()
    }

    fn zeros_like(&self) -> Self {
        self.iter().map(Tensor::zeros_like).collect()
    }
}

/// Layer widths of the tagger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelDims {
    pub word_dim: usize,
    /// Width of the character lookup table.
    pub char_dim: usize,
    /// Hidden units per direction of the character BiGRU.
    pub char_hidden: usize,
    /// Hidden units per direction of each encoder layer.
    pub hidden: usize,
    pub layers: usize,
    pub num_tags: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            word_dim: 50,
            char_dim: 25,
            char_hidden: 25,
            hidden: 100,
            layers: 2,
            num_tags: NUM_TAGS,
        }
    }
}

impl ModelDims {
    /// Width of a token vector: word row plus character summary.
    pub fn token_width(&self) -> usize {
        self.word_dim + 2 * self.char_hidden
    }

    pub fn state_width(&self) -> usize {
        2 * self.hidden
    }

    pub fn validate(&self) -> Result<()> {
        let widths = [
            self.word_dim,
            self.char_dim,
            self.char_hidden,
            self.hidden,
            self.layers,
        ];
        if widths.contains(&0) {
            return Err(Error::invalid(format!(
                "model widths must be positive: {self:?}"
            )));
        }
        if self.num_tags == 0 || self.num_tags > NUM_TAGS {
            return Err(Error::invalid(format!(
                "num_tags must be in 1..={NUM_TAGS}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggerParams {
    pub word_embeddings: Tensor,
    pub char_embeddings: Tensor,
    pub char_encoder: BiGruParams,
    pub encoder: Vec<BiGruParams>,
    /// One head per domain, in domain-index order.
    pub heads: Vec<DomainHead>,
}

impl TaggerParams {
    pub fn new<R: Rng>(
        dims: &ModelDims,
        words: usize,
        chars: usize,
        domains: usize,
        rng: &mut R,
    ) -> Self {
        let char_encoder = BiGruParams::new(dims.char_dim, dims.char_hidden, rng);
        let mut encoder = Vec::with_capacity(dims.layers);
        for layer in 0..dims.layers {
            let input = if layer == 0 {
                dims.token_width()
            } else {
                dims.state_width()
            };
            encoder.push(BiGruParams::new(input, dims.hidden, rng));
        }
        let heads = (0..domains)
            .map(|_| DomainHead::new(dims.num_tags, dims.state_width(), rng))
            .collect();
        TaggerParams {
            word_embeddings: Tensor::uniform(&[words, dims.word_dim], 0.1, rng),
            char_embeddings: Tensor::uniform(&[chars, dims.char_dim], 0.1, rng),
            char_encoder,
            encoder,
            heads,
        }
    }

    /// Checks every tensor against the shapes implied by `dims`.
    pub fn check_shapes(
        &self,
        dims: &ModelDims,
        words: usize,
        chars: usize,
        domains: usize,
    ) -> Result<()> {
        let mut rng = crate::rng::rng_for(0, "shape-check");
        let expected = TaggerParams::new(dims, 1, 1, domains, &mut rng);
        if self.encoder.len() != expected.encoder.len() || self.heads.len() != expected.heads.len()
        {
            return Err(Error::shape(
                "layer or head count does not match model description",
            ));
        }
        let want = [words, dims.word_dim];
        if self.word_embeddings.shape != want {
            return Err(Error::shape(format!(
                "word_embeddings {:?}, expected {want:?}",
                self.word_embeddings.shape
            )));
        }
        let want = [chars, dims.char_dim];
        if self.char_embeddings.shape != want {
            return Err(Error::shape(format!(
                "char_embeddings {:?}, expected {want:?}",
                self.char_embeddings.shape
            )));
        }
        for ((name, got), (_, exp)) in self.tensors().into_iter().zip(expected.tensors()).skip(2) {
            if got.shape != exp.shape || got.data.len() != got.shape.iter().product::<usize>() {
                return Err(Error::shape(format!(
                    "{name} has shape {:?}, expected {:?}",
                    got.shape, exp.shape
                )));
            }
        }
        if !self
            .tensors()
            .iter()
            .all(|(_, t)| t.data.len() == t.shape.iter().product::<usize>() && t.all_finite())
        {
            return Err(Error::shape("tensor data length or values invalid"));
        }
        Ok(())
    }

    /// Tensors belonging to the head of domain `index`.
    pub fn head_tensors(&self, index: usize) -> Vec<&Tensor> {
        self.heads[index]
            .tensors()
            .into_iter()
            .map(|(_, t)| t)
            .collect()
    }
}

impl ParamSet for TaggerParams {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = vec![
            ("word_embeddings".to_string(), &self.word_embeddings),
            ("char_embeddings".to_string(), &self.char_embeddings),
        ];
        for (dir, gru) in [
            ("forward", &self.char_encoder.forward),
            ("backward", &self.char_encoder.backward),
        ] {
            out.extend(
                gru.tensors()
                    .into_iter()
                    .map(|(n, t)| (format!("char_encoder.{dir}.{n}"), t)),
            );
        }
        for (l, layer) in self.encoder.iter().enumerate() {
            for (dir, gru) in [("forward", &layer.forward), ("backward", &layer.backward)] {
                out.extend(
                    gru.tensors()
                        .into_iter()
                        .map(|(n, t)| (format!("encoder.{l}.{dir}.{n}"), t)),
                );
            }
        }
        for (h, head) in self.heads.iter().enumerate() {
            out.extend(
                head.tensors()
                    .into_iter()
                    .map(|(n, t)| (format!("heads.{h}.{n}"), t)),
            );
        }
        out
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = vec![
            ("word_embeddings".to_string(), &mut self.word_embeddings),
            ("char_embeddings".to_string(), &mut self.char_embeddings),
        ];
        let char_encoder = &mut self.char_encoder;
        for (dir, gru) in [
            ("forward", &mut char_encoder.forward),
            ("backward", &mut char_encoder.backward),
        ] {
            out.extend(
                gru.tensors_mut()
                    .into_iter()
                    .map(|(n, t)| (format!("char_encoder.{dir}.{n}"), t)),
            );
        }
        for (l, layer) in self.encoder.iter_mut().enumerate() {
            for (dir, gru) in [
                ("forward", &mut layer.forward),
                ("backward", &mut layer.backward),
            ] {
                out.extend(
                    gru.tensors_mut()
                        .into_iter()
                        .map(|(n, t)| (format!("encoder.{l}.{dir}.{n}"), t)),
                );
            }
        }
        for (h, head) in self.heads.iter_mut().enumerate() {
            out.extend(
                head.tensors_mut()
                    .into_iter()
                    .map(|(n, t)| (format!("heads.{h}.{n}"), t)),
            );
        }
        out
    }

    fn zeros_like(&self) -> Self {
        TaggerParams {
            word_embeddings: self.word_embeddings.zeros_like(),
            char_embeddings: self.char_embeddings.zeros_like(),
            char_encoder: self.char_encoder.zeros_like(),
            encoder: self.encoder.iter().map(BiGruParams::zeros_like).collect(),
            heads: self.heads.iter().map(DomainHead::zeros_like).collect(),
        }
    }
}
