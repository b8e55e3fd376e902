//! Linear-chain CRF inference over emission scores.
//!
//! A path `y` scores `start[y₀] + Σᵢ e[i, yᵢ] + Σᵢ trans[yᵢ, yᵢ₊₁] + end[yₙ₋₁]`.

use crate::error::{Error, Result};
use crate::tag::PosTag;

use super::head::{DomainHead, EmissionScores};
use super::tensor::log_sum_exp;

fn check(e: &EmissionScores, head: &DomainHead) -> Result<()> {
    if e.num_tags() != head.num_tags() {
        return Err(Error::shape(format!(
            "emissions have {} tags, head has {}",
            e.num_tags(),
            head.num_tags()
        )));
    }
    if e.is_empty() {
        return Err(Error::shape("empty emission matrix"));
    }
    if !e.as_slice().iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("non-finite emission score"));
    }
    Ok(())
}

fn check_gold(e: &EmissionScores, gold: &[usize]) -> Result<()> {
    if gold.len() != e.len() {
        return Err(Error::shape(format!(
            "{} gold tags for {} tokens",
            gold.len(),
            e.len()
        )));
    }
    if let Some(&bad) = gold.iter().find(|&&g| g >= e.num_tags()) {
        return Err(Error::shape(format!(
            "gold tag code {bad} outside a {}-tag head",
            e.num_tags()
        )));
    }
    Ok(())
}

pub fn to_codes(tags: &[PosTag]) -> Vec<usize> {
    tags.iter().map(|t| t.code()).collect()
}

fn to_tags(codes: Vec<usize>) -> Vec<PosTag> {
    codes
        .into_iter()
        .map(|c| PosTag::from_code(c).expect("tag code within the closed tag set"))
        .collect()
}

/// Forward log-potentials `alpha[i][j]`, flattened.
fn forward(e: &EmissionScores, head: &DomainHead) -> Vec<f64> {
    let k = e.num_tags();
    let n = e.len();
    let mut alpha = vec![0.0; n * k];
    for j in 0..k {
        alpha[j] = head.start_scores.data[j] + e.get(0, j);
    }
    let mut scratch = vec![0.0; k];
    for i in 1..n {
        for j in 0..k {
            for a in 0..k {
                scratch[a] = alpha[(i - 1) * k + a] + head.transition(a, j);
            }
            alpha[i * k + j] = e.get(i, j) + log_sum_exp(&scratch);
        }
    }
    alpha
}

/// Backward log-potentials `beta[i][j]`, flattened; `beta[n-1] = end`.
fn backward(e: &EmissionScores, head: &DomainHead) -> Vec<f64> {
    let k = e.num_tags();
    let n = e.len();
    let mut beta = vec![0.0; n * k];
    beta[(n - 1) * k..].copy_from_slice(&head.end_scores.data);
    let mut scratch = vec![0.0; k];
    for i in (0..n - 1).rev() {
        for a in 0..k {
            for b in 0..k {
                scratch[b] = head.transition(a, b) + e.get(i + 1, b) + beta[(i + 1) * k + b];
            }
            beta[i * k + a] = log_sum_exp(&scratch);
        }
    }
    beta
}

fn final_log_partition(alpha: &[f64], head: &DomainHead, n: usize) -> f64 {
    let k = head.num_tags();
    let last: Vec<f64> = (0..k)
        .map(|j| alpha[(n - 1) * k + j] + head.end_scores.data[j])
        .collect();
    log_sum_exp(&last)
}

/// `log Σ_y exp(score(y))`, by the forward algorithm.
pub fn crf_log_partition(e: &EmissionScores, head: &DomainHead) -> Result<f64> {
    check(e, head)?;
    let alpha = forward(e, head);
    Ok(final_log_partition(&alpha, head, e.len()))
}

/// Unnormalized score of the tag path `path` (tag codes).
pub fn path_score(e: &EmissionScores, head: &DomainHead, path: &[usize]) -> f64 {
    let mut s = head.start_scores.data[path[0]] + head.end_scores.data[path[path.len() - 1]];
    for (i, &y) in path.iter().enumerate() {
        s += e.get(i, y);
    }
    for w in path.windows(2) {
        s += head.transition(w[0], w[1]);
    }
    s
}

pub fn crf_log_likelihood(e: &EmissionScores, gold: &[PosTag], head: &DomainHead) -> Result<f64> {
    crf_log_likelihood_codes(e, &to_codes(gold), head)
}

pub fn crf_log_likelihood_codes(
    e: &EmissionScores,
    gold: &[usize],
    head: &DomainHead,
) -> Result<f64> {
    check(e, head)?;
    check_gold(e, gold)?;
    let log_z = crf_log_partition(e, head)?;
    Ok((path_score(e, head, gold) - log_z).min(0.0))
}

/// Best-scoring path as tag codes. Ties go to the lowest code, both at
/// each backpointer and at the final state.
pub fn viterbi_codes(e: &EmissionScores, head: &DomainHead) -> Result<Vec<usize>> {
    check(e, head)?;
    let k = e.num_tags();
    let n = e.len();
    let mut delta: Vec<f64> = (0..k)
        .map(|j| head.start_scores.data[j] + e.get(0, j))
        .collect();
    let mut backptr = vec![0usize; n * k];
    let mut next = vec![0.0; k];
    for i in 1..n {
        for j in 0..k {
            let mut best = 0;
            let mut best_score = delta[0] + head.transition(0, j);
            for (a, &d) in delta.iter().enumerate().skip(1) {
                let s = d + head.transition(a, j);
                if s > best_score {
                    best_score = s;
                    best = a;
                }
            }
            backptr[i * k + j] = best;
            next[j] = best_score + e.get(i, j);
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut last = 0;
    let mut last_score = delta[0] + head.end_scores.data[0];
    for j in 1..k {
        let s = delta[j] + head.end_scores.data[j];
        if s > last_score {
            last_score = s;
            last = j;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for i in (1..n).rev() {
        path[i - 1] = backptr[i * k + path[i]];
    }
    Ok(path)
}

pub fn viterbi_decode(e: &EmissionScores, head: &DomainHead) -> Result<Vec<PosTag>> {
    viterbi_codes(e, head).map(to_tags)
}

/// Independent per-token argmax, lowest code on ties.
pub fn softmax_codes(e: &EmissionScores) -> Vec<usize> {
    (0..e.len())
        .map(|i| {
            let row = e.row(i);
            let mut best = 0;
            for j in 1..row.len() {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

pub fn softmax_decode(e: &EmissionScores) -> Vec<PosTag> {
    to_tags(softmax_codes(e))
}

/// Negative log-likelihood of `gold` and its gradient with respect to the
/// emissions (returned, `n × k`) and the head's CRF scores (accumulated
/// into `head_grads`).
pub(crate) fn crf_nll_backward(
    e: &EmissionScores,
    gold: &[usize],
    head: &DomainHead,
    head_grads: &mut DomainHead,
) -> Result<(f64, Vec<f64>)> {
    check(e, head)?;
    check_gold(e, gold)?;
    let k = e.num_tags();
    let n = e.len();
    let alpha = forward(e, head);
    let beta = backward(e, head);
    let log_z = final_log_partition(&alpha, head, n);
    let nll = log_z - path_score(e, head, gold);

    let mut d_e = vec![0.0; n * k];
    for i in 0..n {
        for j in 0..k {
            d_e[i * k + j] = (alpha[i * k + j] + beta[i * k + j] - log_z).exp();
        }
        d_e[i * k + gold[i]] -= 1.0;
    }
    // Boundary gradients equal the first and last rows of the emission
    // gradient: marginal minus gold indicator.
    for j in 0..k {
        head_grads.start_scores.data[j] += d_e[j];
        head_grads.end_scores.data[j] += d_e[(n - 1) * k + j];
    }
    for i in 0..n - 1 {
        for a in 0..k {
            for b in 0..k {
                let p = (alpha[i * k + a]
                    + head.transition(a, b)
                    + e.get(i + 1, b)
                    + beta[(i + 1) * k + b]
                    - log_z)
                    .exp();
                head_grads.transitions.data[a * k + b] += p;
            }
        }
        head_grads.transitions.data[gold[i] * k + gold[i + 1]] -= 1.0;
    }
    Ok((nll, d_e))
}

/// Summed per-token cross-entropy of `gold` and its emission gradient.
pub(crate) fn softmax_nll_backward(e: &EmissionScores, gold: &[usize]) -> Result<(f64, Vec<f64>)> {
    check_gold(e, gold)?;
    if !e.as_slice().iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("non-finite emission score"));
    }
    let k = e.num_tags();
    let mut nll = 0.0;
    let mut d_e = vec![0.0; e.len() * k];
    for (i, &g) in gold.iter().enumerate() {
        let row = e.row(i);
        let lse = log_sum_exp(row);
        nll += lse - row[g];
        for j in 0..k {
            d_e[i * k + j] = (row[j] - lse).exp();
        }
        d_e[i * k + g] -= 1.0;
    }
    Ok((nll, d_e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use rand::Rng;

    /// All `k^n` paths in lexicographic order.
    fn all_paths(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut paths = vec![vec![]];
        for _ in 0..n {
            paths = paths
                .into_iter()
                .flat_map(|p| {
                    (0..k).map(move |t| {
                        let mut q = p.clone();
                        q.push(t);
                        q
                    })
                })
                .collect();
        }
        paths
    }

    fn random_instance(rng: &mut impl Rng, n: usize, k: usize) -> (EmissionScores, DomainHead) {
        let rows = (0..n)
            .map(|_| (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let mut head = DomainHead::zeros(k, 1);
        for x in head
            .transitions
            .data
            .iter_mut()
            .chain(head.start_scores.data.iter_mut())
            .chain(head.end_scores.data.iter_mut())
        {
            *x = rng.gen_range(-2.0..2.0);
        }
        (EmissionScores::new(rows).unwrap(), head)
    }

    fn uniform(n: usize, k: usize) -> (EmissionScores, DomainHead) {
        (
            EmissionScores::new(vec![vec![0.0; k]; n]).unwrap(),
            DomainHead::zeros(k, 1),
        )
    }

    #[test]
    fn uniform_partition_counts_paths() {
        let (e, h) = uniform(1, 2);
        assert!((crf_log_partition(&e, &h).unwrap() - 2f64.ln()).abs() < 1e-12);
        let (e, h) = uniform(2, 2);
        assert!((crf_log_partition(&e, &h).unwrap() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_edge_cases() {
        let (e, h) = uniform(3, 1);
        assert_eq!(crf_log_likelihood(&e, &[PosTag::Adj; 3], &h).unwrap(), 0.0);
        let (e, h) = uniform(1, 2);
        assert!((crf_log_likelihood(&e, &[PosTag::Adp], &h).unwrap() - 0.5f64.ln()).abs() < 1e-12);
        assert!(crf_log_likelihood(&e, &[PosTag::Adp, PosTag::Adj], &h).is_err());
    }

    #[test]
    fn non_finite_emissions_rejected() {
        let e = EmissionScores::new(vec![vec![0.0, f64::NAN]]).unwrap();
        assert!(crf_log_partition(&e, &DomainHead::zeros(2, 1)).is_err());
    }

    #[test]
    fn viterbi_small_cases() {
        let (e, h) = uniform(4, 1);
        assert_eq!(viterbi_codes(&e, &h).unwrap(), vec![0; 4]);

        let e = EmissionScores::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut h = DomainHead::zeros(2, 1);
        assert_eq!(viterbi_codes(&e, &h).unwrap(), vec![0, 1]);
        h.transitions.data[0] = 10.0;
        assert_eq!(viterbi_codes(&e, &h).unwrap(), vec![0, 0]);
    }

    #[test]
    fn ties_go_to_lowest_code() {
        let (e, h) = uniform(3, 4);
        assert_eq!(viterbi_codes(&e, &h).unwrap(), vec![0, 0, 0]);
        let e = EmissionScores::new(vec![vec![3.0, 1.0, 0.0], vec![0.0, 2.0, 2.0]]).unwrap();
        assert_eq!(softmax_codes(&e), vec![0, 1]);
    }

    #[test]
    fn agrees_with_enumeration() {
        let mut rng = rng_for(11, "crf-enum");
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let k = rng.gen_range(1..=4);
            let (e, h) = random_instance(&mut rng, n, k);
            let paths = all_paths(n, k);
            let scores: Vec<f64> = paths.iter().map(|p| path_score(&e, &h, p)).collect();
            let brute_z = log_sum_exp(&scores);
            let z = crf_log_partition(&e, &h).unwrap();
            assert!(((z - brute_z) / brute_z.abs().max(1e-300)).abs() < 1e-8);

            let best = (0..paths.len()).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
            let viterbi = viterbi_codes(&e, &h).unwrap();
            assert_eq!(viterbi, paths[best]);
            assert!(path_score(&e, &h, &viterbi) <= z + 1e-12 * z.abs().max(1.0));

            let total: f64 = paths
                .iter()
                .map(|p| crf_log_likelihood_codes(&e, p, &h).unwrap().exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn softmax_equals_viterbi_without_structure() {
        let mut rng = rng_for(12, "crf-softmax");
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let k = rng.gen_range(1..=6);
            let rows = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let e = EmissionScores::new(rows).unwrap();
            assert_eq!(
                viterbi_codes(&e, &DomainHead::zeros(k, 1)).unwrap(),
                softmax_codes(&e)
            );
        }
    }

    #[test]
    fn uniform_shift_keeps_viterbi_path() {
        let mut rng = rng_for(13, "crf-shift");
        for _ in 0..100 {
            let (e, h) = random_instance(&mut rng, 4, 3);
            let c = rng.gen_range(-5.0..5.0);
            let shifted =
                EmissionScores::from_flat(3, e.as_slice().iter().map(|x| x + c).collect());
            assert_eq!(
                viterbi_codes(&e, &h).unwrap(),
                viterbi_codes(&shifted, &h).unwrap()
            );
        }
    }

    #[test]
    fn nll_gradient_matches_finite_differences() {
        let mut rng = rng_for(14, "crf-grad");
        let (e, h) = random_instance(&mut rng, 4, 3);
        let gold = vec![2, 0, 1, 1];
        let mut hg = h.zeros_like();
        let (nll, d_e) = crf_nll_backward(&e, &gold, &h, &mut hg).unwrap();
        let ll = crf_log_likelihood_codes(&e, &gold, &h).unwrap();
        assert!((nll + ll).abs() < 1e-12);
        let eps = 1e-6;
        for idx in 0..e.as_slice().len() {
            let bump = |delta: f64| {
                let mut data = e.as_slice().to_vec();
                data[idx] += delta;
                -crf_log_likelihood_codes(&EmissionScores::from_flat(3, data), &gold, &h).unwrap()
            };
            let fd = (bump(eps) - bump(-eps)) / (2.0 * eps);
            assert!((fd - d_e[idx]).abs() < 1e-6);
        }
        for idx in 0..9 {
            let bump = |delta: f64| {
                let mut h2 = h.clone();
                h2.transitions.data[idx] += delta;
                -crf_log_likelihood_codes(&e, &gold, &h2).unwrap()
            };
            let fd = (bump(eps) - bump(-eps)) / (2.0 * eps);
            assert!((fd - hg.transitions.data[idx]).abs() < 1e-6);
        }
    }
}
