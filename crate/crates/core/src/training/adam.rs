//! Adam with bias correction.
//!
//! Elements whose gradient is exactly zero are skipped: neither their
//! moments nor their values move. A batch therefore never touches the
//! parameters it did not reach (unused heads, unseen embedding rows).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ParamSet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.99,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<P> {
    pub step_count: u64,
    pub first_moment: P,
    pub second_moment: P,
}

impl<P: ParamSet> AdamState<P> {
    pub fn new(params: &P) -> Self {
        AdamState {
            step_count: 0,
            first_moment: params.zeros_like(),
            second_moment: params.zeros_like(),
        }
    }
}

pub fn adam_step<P: ParamSet>(
    params: &mut P,
    grads: &P,
    state: &mut AdamState<P>,
    config: &AdamConfig,
) -> Result<()> {
    let grads = grads.tensors();
    let mut params = params.tensors_mut();
    let mut m = state.first_moment.tensors_mut();
    let mut v = state.second_moment.tensors_mut();
    if grads.len() != params.len() || m.len() != params.len() || v.len() != params.len() {
        return Err(Error::shape(
            "parameter, gradient and moment tensor counts differ",
        ));
    }
    for (((p, g), m), v) in params.iter().zip(&grads).zip(&m).zip(&v) {
        if p.1.shape != g.1.shape || p.1.shape != m.1.shape || p.1.shape != v.1.shape {
            return Err(Error::shape(format!(
                "tensor `{}`: {:?} vs gradient {:?}",
                p.0, p.1.shape, g.1.shape
            )));
        }
    }

    state.step_count += 1;
    let t = state.step_count as i32;
    let AdamConfig {
        learning_rate: lr,
        beta1: b1,
        beta2: b2,
        epsilon: eps,
    } = *config;
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(&grads)
        .zip(m.iter_mut())
        .zip(v.iter_mut())
    {
        for i in 0..p.1.data.len() {
            let gi = g.1.data[i];
            if gi == 0.0 {
                continue;
            }
            let mi = b1 * m.1.data[i] + (1.0 - b1) * gi;
            let vi = b2 * v.1.data[i] + (1.0 - b2) * gi * gi;
            m.1.data[i] = mi;
            v.1.data[i] = vi;
            p.1.data[i] -= lr * (mi / c1) / ((vi / c2).sqrt() + eps);
        }
    }
    Ok(())
}

/// Rescales `grads` so that their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm<P: ParamSet>(grads: &mut P, max_norm: f64) -> f64 {
    let norm = grads.global_norm();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for (_, t) in grads.tensors_mut() {
            t.scale(scale);
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Tensor;

    fn scalar(x: f64) -> Vec<Tensor> {
        vec![Tensor {
            shape: vec![1],
            data: vec![x],
        }]
    }

    #[test]
    fn zero_gradient_is_identity() {
        let mut p = scalar(0.7);
        let mut state = AdamState::new(&p);
        state.first_moment[0].data[0] = 0.3;
        state.second_moment[0].data[0] = 0.1;
        adam_step(&mut p, &scalar(0.0), &mut state, &AdamConfig::default()).unwrap();
        assert_eq!(p[0].data[0], 0.7);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let cfg = AdamConfig {
            learning_rate: 0.01,
            ..AdamConfig::default()
        };
        let mut p = scalar(0.0);
        let mut state = AdamState::new(&p);
        adam_step(&mut p, &scalar(1.0), &mut state, &cfg).unwrap();
        // m̂ = 1, v̂ = 1 after bias correction.
        let expected = -0.01 / (1.0 + 1e-8);
        assert!((p[0].data[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn descends_on_a_parabola() {
        let cfg = AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        };
        let mut p = scalar(1.0);
        let mut state = AdamState::new(&p);
        let f = |x: f64| x * x;
        let start = f(p[0].data[0]);
        for _ in 0..2 {
            let g = scalar(2.0 * p[0].data[0]);
            adam_step(&mut p, &g, &mut state, &cfg).unwrap();
        }
        assert!(f(p[0].data[0]) < start);
    }

    #[test]
    fn shape_mismatch_is_error() {
        let mut p = scalar(1.0);
        let mut state = AdamState::new(&p);
        let g = vec![Tensor::zeros(&[2])];
        assert!(adam_step(&mut p, &g, &mut state, &AdamConfig::default()).is_err());
    }

    #[test]
    fn clipping_caps_the_norm() {
        let mut g = vec![Tensor {
            shape: vec![2],
            data: vec![3.0, 4.0],
        }];
        assert_eq!(clip_global_norm(&mut g, 1.0), 5.0);
        assert!((g.global_norm() - 1.0).abs() < 1e-12);
    }
}
