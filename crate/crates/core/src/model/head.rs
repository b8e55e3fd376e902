use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::tensor::{matvec_add, Tensor};

/// Per-domain decoder: tag projection plus linear-chain CRF scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainHead {
    /// `[tags × input]`.
    pub emission_weights: Tensor,
    pub emission_bias: Tensor,
    /// `transitions[i][j]` scores tag `j` following tag `i`.
    pub transitions: Tensor,
    pub start_scores: Tensor,
    pub end_scores: Tensor,
}

impl DomainHead {
    /// All-zero head; mostly useful for tests and hand-built scorers.
    pub fn zeros(tags: usize, input: usize) -> Self {
        DomainHead {
            emission_weights: Tensor::zeros(&[tags, input]),
            emission_bias: Tensor::zeros(&[tags]),
            transitions: Tensor::zeros(&[tags, tags]),
            start_scores: Tensor::zeros(&[tags]),
            end_scores: Tensor::zeros(&[tags]),
        }
    }

    pub fn new<R: Rng>(tags: usize, input: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (tags + input) as f64).sqrt();
        DomainHead {
            emission_weights: Tensor::uniform(&[tags, input], bound, rng),
            emission_bias: Tensor::zeros(&[tags]),
            transitions: Tensor::uniform(&[tags, tags], 0.1, rng),
            start_scores: Tensor::uniform(&[tags], 0.1, rng),
            end_scores: Tensor::uniform(&[tags], 0.1, rng),
        }
    }

    pub fn num_tags(&self) -> usize {
        self.transitions.rows()
    }

    pub fn input_size(&self) -> usize {
        self.emission_weights.cols()
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transitions.data[from * self.num_tags() + to]
    }

    pub fn zeros_like(&self) -> Self {
        DomainHead::zeros(self.num_tags(), self.input_size())
    }

    pub(crate) fn tensors(&self) -> [(&'static str, &Tensor); 5] {
        [
            ("emission_weights", &self.emission_weights),
            ("emission_bias", &self.emission_bias),
            ("transitions", &self.transitions),
            ("start_scores", &self.start_scores),
            ("end_scores", &self.end_scores),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> [(&'static str, &mut Tensor); 5] {
        [
            ("emission_weights", &mut self.emission_weights),
            ("emission_bias", &mut self.emission_bias),
            ("transitions", &mut self.transitions),
            ("start_scores", &mut self.start_scores),
            ("end_scores", &mut self.end_scores),
        ]
    }
}

/// Per-token tag scores, `len × tags`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmissionScores {
    tags: usize,
    data: Vec<f64>,
}

impl EmissionScores {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let tags = rows.first().map_or(0, Vec::len);
        if tags == 0 {
            return Err(Error::shape(
                "emission scores need at least one row and one tag",
            ));
        }
        if rows.iter().any(|r| r.len() != tags) {
            return Err(Error::shape("ragged emission rows"));
        }
        Ok(EmissionScores {
            tags,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub(crate) fn from_flat(tags: usize, data: Vec<f64>) -> Self {
        debug_assert!(tags > 0 && data.len().is_multiple_of(tags));
        EmissionScores { tags, data }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.tags
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn num_tags(&self) -> usize {
        self.tags
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.tags..(i + 1) * self.tags]
    }

    pub fn get(&self, i: usize, tag: usize) -> f64 {
        self.data[i * self.tags + tag]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Affine tag projection of encoder states (`n × input`, row-major).
pub fn emissions(states: &[f64], head: &DomainHead) -> Result<EmissionScores> {
    let d = head.input_size();
    if d == 0 || !states.len().is_multiple_of(d) {
        return Err(Error::shape(format!(
            "state buffer of {} values is not a multiple of head input width {d}",
            states.len()
        )));
    }
    let n = states.len() / d;
    if n == 0 {
        return Err(Error::shape("no states to project"));
    }
    let k = head.num_tags();
    let mut out = Vec::with_capacity(n * k);
    for row in states.chunks_exact(d) {
        let mut scores = head.emission_bias.data.clone();
        matvec_add(&mut scores, &head.emission_weights.data, d, row);
        out.extend_from_slice(&scores);
    }
    Ok(EmissionScores::from_flat(k, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn zero_weights_yield_bias_rows() {
        let mut head = DomainHead::zeros(3, 4);
        head.emission_bias.data = vec![0.5, -1.0, 2.0];
        let states = vec![1.0; 8];
        let e = emissions(&states, &head).unwrap();
        assert_eq!(e.len(), 2);
        for i in 0..2 {
            assert_eq!(e.row(i), &[0.5, -1.0, 2.0]);
        }
    }

    #[test]
    fn width_mismatch_is_error() {
        let head = DomainHead::zeros(3, 4);
        assert!(emissions(&[1.0; 7], &head).is_err());
    }

    #[test]
    fn different_heads_route_differently() {
        let mut rng = rng_for(0, "heads");
        let a = DomainHead::new(5, 4, &mut rng);
        let b = DomainHead::new(5, 4, &mut rng);
        let states: Vec<f64> = (0..12).map(|i| i as f64 * 0.1).collect();
        assert_ne!(
            emissions(&states, &a).unwrap(),
            emissions(&states, &b).unwrap()
        );
    }
}
