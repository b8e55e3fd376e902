//! Gated recurrent units with hand-derived backward passes.
//!
//! Gate rows are stacked as `[reset; update; candidate]`:
//!
//! ```text
//! r  = σ(W_ir x + b_ir + W_hr h + b_hr)
//! z  = σ(W_iz x + b_iz + W_hz h + b_hz)
//! n  = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn))
//! h' = (1 − z) ⊙ n + z ⊙ h
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{matvec_add, matvec_t_add, outer_add, sigmoid, Tensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub input_weights: Tensor,
    pub hidden_weights: Tensor,
    pub input_bias: Tensor,
    pub hidden_bias: Tensor,
}

impl GruParams {
    pub fn new<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        GruParams {
            input_weights: Tensor::uniform(&[3 * hidden, input], bound, rng),
            hidden_weights: Tensor::uniform(&[3 * hidden, hidden], bound, rng),
            input_bias: Tensor::uniform(&[3 * hidden], bound, rng),
            hidden_bias: Tensor::uniform(&[3 * hidden], bound, rng),
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_weights.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_weights.cols()
    }

    pub fn zeros_like(&self) -> Self {
        GruParams {
            input_weights: self.input_weights.zeros_like(),
            hidden_weights: self.hidden_weights.zeros_like(),
            input_bias: self.input_bias.zeros_like(),
            hidden_bias: self.hidden_bias.zeros_like(),
        }
    }

    pub(crate) fn tensors(&self) -> [(&'static str, &Tensor); 4] {
        [
            ("input_weights", &self.input_weights),
            ("hidden_weights", &self.hidden_weights),
            ("input_bias", &self.input_bias),
            ("hidden_bias", &self.hidden_bias),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> [(&'static str, &mut Tensor); 4] {
        [
            ("input_weights", &mut self.input_weights),
            ("hidden_weights", &mut self.hidden_weights),
            ("input_bias", &mut self.input_bias),
            ("hidden_bias", &mut self.hidden_bias),
        ]
    }

    /// Runs the cell over `n` inputs laid out row-major by position.
    /// With `reverse`, positions are consumed from last to first.
    pub fn forward(&self, xs: &[f64], n: usize, reverse: bool) -> GruTrace {
        let h = self.hidden_size();
        let i_size = self.input_size();
        debug_assert_eq!(xs.len(), n * i_size);
        let mut trace = GruTrace {
            reverse,
            n,
            hidden: h,
            states: vec![0.0; (n + 1) * h],
            reset: vec![0.0; n * h],
            update: vec![0.0; n * h],
            candidate: vec![0.0; n * h],
            hidden_proj: vec![0.0; n * h],
        };
        let mut gi = vec![0.0; 3 * h];
        let mut gh = vec![0.0; 3 * h];
        for t in 0..n {
            let pos = trace.position(t);
            let x = &xs[pos * i_size..(pos + 1) * i_size];
            gi.copy_from_slice(&self.input_bias.data);
            matvec_add(&mut gi, &self.input_weights.data, i_size, x);
            let (prev, next) = trace.states.split_at_mut((t + 1) * h);
            let h_prev = &prev[t * h..];
            gh.copy_from_slice(&self.hidden_bias.data);
            matvec_add(&mut gh, &self.hidden_weights.data, h, h_prev);
            let h_new = &mut next[..h];
            for j in 0..h {
                let r = sigmoid(gi[j] + gh[j]);
                let z = sigmoid(gi[h + j] + gh[h + j]);
                let hn = gh[2 * h + j];
                let cand = (gi[2 * h + j] + r * hn).tanh();
                h_new[j] = (1.0 - z) * cand + z * h_prev[j];
                trace.reset[t * h + j] = r;
                trace.update[t * h + j] = z;
                trace.candidate[t * h + j] = cand;
                trace.hidden_proj[t * h + j] = hn;
            }
        }
        trace
    }

    /// Backpropagates `d_out` (gradient w.r.t. the output at each position)
    /// through `trace`, accumulating parameter gradients into `grads` and
    /// input gradients into `d_xs`.
    pub fn backward(
        &self,
        xs: &[f64],
        trace: &GruTrace,
        d_out: &[f64],
        grads: &mut GruParams,
        d_xs: &mut [f64],
    ) {
        let h = trace.hidden;
        let n = trace.n;
        let i_size = self.input_size();
        let mut dh_next = vec![0.0; h];
        let mut d_gi = vec![0.0; 3 * h];
        let mut d_gh = vec![0.0; 3 * h];
        let mut dh_prev = vec![0.0; h];
        for t in (0..n).rev() {
            let pos = trace.position(t);
            let h_prev = &trace.states[t * h..(t + 1) * h];
            for j in 0..h {
                let dh = d_out[pos * h + j] + dh_next[j];
                let r = trace.reset[t * h + j];
                let z = trace.update[t * h + j];
                let cand = trace.candidate[t * h + j];
                let hn = trace.hidden_proj[t * h + j];
                let d_cand = dh * (1.0 - z);
                let dz = dh * (h_prev[j] - cand);
                dh_prev[j] = dh * z;
                let da_n = d_cand * (1.0 - cand * cand);
                let da_z = dz * z * (1.0 - z);
                let da_r = da_n * hn * r * (1.0 - r);
                d_gi[j] = da_r;
                d_gi[h + j] = da_z;
                d_gi[2 * h + j] = da_n;
                d_gh[j] = da_r;
                d_gh[h + j] = da_z;
                d_gh[2 * h + j] = da_n * r;
            }
            let x = &xs[pos * i_size..(pos + 1) * i_size];
            outer_add(&mut grads.input_weights.data, &d_gi, x);
            outer_add(&mut grads.hidden_weights.data, &d_gh, h_prev);
            for k in 0..3 * h {
                grads.input_bias.data[k] += d_gi[k];
                grads.hidden_bias.data[k] += d_gh[k];
            }
            matvec_t_add(
                &mut d_xs[pos * i_size..(pos + 1) * i_size],
                &self.input_weights.data,
                i_size,
                &d_gi,
            );
            matvec_t_add(&mut dh_prev, &self.hidden_weights.data, h, &d_gh);
            std::mem::swap(&mut dh_next, &mut dh_prev);
        }
    }
}

/// Activations cached by a forward pass, indexed by processing step.
#[derive(Clone, Debug)]
pub struct GruTrace {
    reverse: bool,
    n: usize,
    hidden: usize,
    /// `(n + 1) × H` hidden states; row 0 is the zero initial state.
    states: Vec<f64>,
    reset: Vec<f64>,
    update: Vec<f64>,
    candidate: Vec<f64>,
    hidden_proj: Vec<f64>,
}

impl GruTrace {
    fn position(&self, step: usize) -> usize {
        if self.reverse {
            self.n - 1 - step
        } else {
            step
        }
    }

    fn step(&self, pos: usize) -> usize {
        self.position(pos)
    }

    /// Hidden state emitted at sequence position `pos`.
    pub fn output(&self, pos: usize) -> &[f64] {
        let t = self.step(pos);
        &self.states[(t + 1) * self.hidden..(t + 2) * self.hidden]
    }

    /// State after the whole sequence has been consumed.
    pub fn final_state(&self) -> &[f64] {
        &self.states[self.n * self.hidden..]
    }

    /// Position whose output is the final state.
    pub fn final_position(&self) -> usize {
        self.position(self.n - 1)
    }
}

/// A forward and a backward GRU whose outputs are concatenated per position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiGruParams {
    pub forward: GruParams,
    pub backward: GruParams,
}

pub struct BiGruTrace {
    pub forward: GruTrace,
    pub backward: GruTrace,
}

impl BiGruParams {
    pub fn new<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        BiGruParams {
            forward: GruParams::new(input, hidden, rng),
            backward: GruParams::new(input, hidden, rng),
        }
    }

    pub fn input_size(&self) -> usize {
        self.forward.input_size()
    }

    pub fn hidden_size(&self) -> usize {
        self.forward.hidden_size()
    }

    pub fn output_size(&self) -> usize {
        2 * self.hidden_size()
    }

    pub fn zeros_like(&self) -> Self {
        BiGruParams {
            forward: self.forward.zeros_like(),
            backward: self.backward.zeros_like(),
        }
    }

    pub fn run(&self, xs: &[f64], n: usize) -> BiGruTrace {
        BiGruTrace {
            forward: self.forward.forward(xs, n, false),
            backward: self.backward.forward(xs, n, true),
        }
    }

    /// Per-position outputs `[h_fwd; h_bwd]`, `n × 2H`.
    pub fn outputs(trace: &BiGruTrace, n: usize) -> Vec<f64> {
        let h = trace.forward.hidden;
        let mut out = Vec::with_capacity(n * 2 * h);
        for pos in 0..n {
            out.extend_from_slice(trace.forward.output(pos));
            out.extend_from_slice(trace.backward.output(pos));
        }
        out
    }

    /// Concatenated final states of both directions.
    pub fn summary(trace: &BiGruTrace) -> Vec<f64> {
        let mut out = trace.forward.final_state().to_vec();
        out.extend_from_slice(trace.backward.final_state());
        out
    }

    /// Backward pass given the gradient of the per-position outputs.
    pub fn backward_outputs(
        &self,
        xs: &[f64],
        trace: &BiGruTrace,
        d_out: &[f64],
        n: usize,
        grads: &mut BiGruParams,
        d_xs: &mut [f64],
    ) {
        let h = self.hidden_size();
        let mut d_fwd = vec![0.0; n * h];
        let mut d_bwd = vec![0.0; n * h];
        for pos in 0..n {
            let row = &d_out[pos * 2 * h..(pos + 1) * 2 * h];
            d_fwd[pos * h..(pos + 1) * h].copy_from_slice(&row[..h]);
            d_bwd[pos * h..(pos + 1) * h].copy_from_slice(&row[h..]);
        }
        self.forward
            .backward(xs, &trace.forward, &d_fwd, &mut grads.forward, d_xs);
        self.backward
            .backward(xs, &trace.backward, &d_bwd, &mut grads.backward, d_xs);
    }

    /// Backward pass given the gradient of [`BiGruParams::summary`].
    pub fn backward_summary(
        &self,
        xs: &[f64],
        trace: &BiGruTrace,
        d_summary: &[f64],
        n: usize,
        grads: &mut BiGruParams,
        d_xs: &mut [f64],
    ) {
        let h = self.hidden_size();
        let mut d_fwd = vec![0.0; n * h];
        let mut d_bwd = vec![0.0; n * h];
        let pf = trace.forward.final_position();
        let pb = trace.backward.final_position();
        d_fwd[pf * h..(pf + 1) * h].copy_from_slice(&d_summary[..h]);
        d_bwd[pb * h..(pb + 1) * h].copy_from_slice(&d_summary[h..]);
        self.forward
            .backward(xs, &trace.forward, &d_fwd, &mut grads.forward, d_xs);
        self.backward
            .backward(xs, &trace.backward, &d_bwd, &mut grads.backward, d_xs);
    }
}
