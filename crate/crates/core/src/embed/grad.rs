//! Batch loss and hand-derived analytic gradients for all four scoring
//! functions, in base and weighted form. Finite-difference tests are the
//! safety net for every formula here.

use std::collections::{BTreeMap, BTreeSet};

use crate::num::Scalar;

use super::corr::{circular_convolution_dispatch, circular_correlation_dispatch};
use super::{modulate, modulate_grad, EmbeddingState, ModelKind};

/// One positive with its corruptions, everything index-based.
#[derive(Debug, Clone)]
pub struct TrainingExample<S> {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
    pub weight: S,
    /// Corrupted (head, tail) pairs sharing the relation and weight.
    pub negatives: Vec<(usize, usize)>,
}

/// How candidate scores enter the loss.
#[derive(Debug, Clone, Copy)]
pub enum LossMode<S> {
    /// Raw scores; causal weights ignored.
    Base,
    /// Scores modulated by the causal weight at the given beta.
    Weighted { beta: S },
}

/// Sparse gradients of one batch plus the loss pieces.
#[derive(Debug, Clone)]
pub struct Gradients<S> {
    pub entity: BTreeMap<usize, Vec<S>>,
    pub relation: BTreeMap<usize, Vec<S>>,
    pub nll: S,
    pub l2: S,
}

fn transformed_score<S: Scalar>(raw: S, weight: S, mode: LossMode<S>, positive: bool) -> S {
    match mode {
        LossMode::Base => raw,
        LossMode::Weighted { beta } => modulate(raw, weight, beta, positive),
    }
}

fn transformed_grad<S: Scalar>(raw: S, weight: S, mode: LossMode<S>, positive: bool) -> S {
    match mode {
        LossMode::Base => S::one(),
        LossMode::Weighted { beta } => modulate_grad(raw, weight, beta, positive),
    }
}

fn log_sum_exp<S: Scalar>(scores: &[S]) -> S {
    let m = scores.iter().copied().fold(S::neg_infinity(), S::max);
    let sum: S = scores.iter().map(|&s| (s - m).exp()).sum();
    m + sum.ln()
}

/// Parameters (entity and relation indices) touched by a batch.
fn involved<S: Scalar>(examples: &[TrainingExample<S>]) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let mut entities = BTreeSet::new();
    let mut relations = BTreeSet::new();
    for ex in examples {
        entities.insert(ex.head);
        entities.insert(ex.tail);
        relations.insert(ex.relation);
        for &(h, t) in &ex.negatives {
            entities.insert(h);
            entities.insert(t);
        }
    }
    (entities, relations)
}

fn squared_norm<S: Scalar>(v: &[S]) -> S {
    v.iter().map(|&x| x * x).sum()
}

/// Multiclass negative log-likelihood of each positive against its
/// corruptions, plus an L2 penalty on every vector the batch touches:
/// loss = sum_ex [ logsumexp(z) - z_pos ] + l2 * sum_involved ||v||^2.
pub fn batch_loss<S: Scalar>(
    state: &EmbeddingState<S>,
    examples: &[TrainingExample<S>],
    mode: LossMode<S>,
    l2: S,
) -> S {
    let mut nll = S::zero();
    for ex in examples {
        let mut z = Vec::with_capacity(1 + ex.negatives.len());
        let raw_pos = state.score_idx(ex.head, ex.relation, ex.tail);
        z.push(transformed_score(raw_pos, ex.weight, mode, true));
        for &(h, t) in &ex.negatives {
            let raw = state.score_idx(h, ex.relation, t);
            z.push(transformed_score(raw, ex.weight, mode, false));
        }
        nll = nll + log_sum_exp(&z) - z[0];
    }
    let mut penalty = S::zero();
    let (entities, relations) = involved(examples);
    for idx in entities {
        penalty = penalty + squared_norm(state.entity_vec(idx));
    }
    for idx in relations {
        penalty = penalty + squared_norm(state.relation_vec(idx));
    }
    nll + l2 * penalty
}

/// Analytic gradients of [`batch_loss`] with respect to every involved
/// entity and relation vector.
pub fn batch_gradients<S: Scalar>(
    state: &EmbeddingState<S>,
    examples: &[TrainingExample<S>],
    mode: LossMode<S>,
    l2: S,
) -> Gradients<S> {
    let width = state.width();
    let mut grads = Gradients {
        entity: BTreeMap::new(),
        relation: BTreeMap::new(),
        nll: S::zero(),
        l2: S::zero(),
    };

    for ex in examples {
        let candidates: Vec<(usize, usize, bool)> = std::iter::once((ex.head, ex.tail, true))
            .chain(ex.negatives.iter().map(|&(h, t)| (h, t, false)))
            .collect();
        let raws: Vec<S> = candidates
            .iter()
            .map(|&(h, t, _)| state.score_idx(h, ex.relation, t))
            .collect();
        let z: Vec<S> = candidates
            .iter()
            .zip(&raws)
            .map(|(&(_, _, positive), &raw)| transformed_score(raw, ex.weight, mode, positive))
            .collect();
        let lse = log_sum_exp(&z);
        grads.nll = grads.nll + lse - z[0];

        for (j, (&(h, t, positive), &raw)) in candidates.iter().zip(&raws).enumerate() {
            let p = (z[j] - lse).exp();
            let dl_dz = if j == 0 { p - S::one() } else { p };
            let coeff = dl_dz * transformed_grad(raw, ex.weight, mode, positive);
            if coeff != S::zero() {
                accumulate_score_gradient(state, h, ex.relation, t, coeff, &mut grads, width);
            }
        }
    }

    let two = S::one() + S::one();
    let (entities, relations) = involved(examples);
    for idx in entities {
        grads.l2 = grads.l2 + squared_norm(state.entity_vec(idx));
        let slot = grads
            .entity
            .entry(idx)
            .or_insert_with(|| vec![S::zero(); width]);
        for (g, &v) in slot.iter_mut().zip(state.entity_vec(idx)) {
            *g = *g + two * l2 * v;
        }
    }
    for idx in relations {
        grads.l2 = grads.l2 + squared_norm(state.relation_vec(idx));
        let slot = grads
            .relation
            .entry(idx)
            .or_insert_with(|| vec![S::zero(); width]);
        for (g, &v) in slot.iter_mut().zip(state.relation_vec(idx)) {
            *g = *g + two * l2 * v;
        }
    }
    grads.l2 = grads.l2 * l2;
    grads
}

/// Adds `coeff * d(raw score)/d(vector)` for one candidate triple.
fn accumulate_score_gradient<S: Scalar>(
    state: &EmbeddingState<S>,
    h: usize,
    r: usize,
    t: usize,
    coeff: S,
    grads: &mut Gradients<S>,
    width: usize,
) {
    let hv = state.entity_vec(h);
    let rv = state.relation_vec(r);
    let tv = state.entity_vec(t);
    let zero_vec = || vec![S::zero(); width];

    match state.model() {
        ModelKind::TransE => {
            let delta: Vec<S> = hv
                .iter()
                .zip(rv)
                .zip(tv)
                .map(|((&a, &b), &c)| a + b - c)
                .collect();
            let norm = squared_norm(&delta).sqrt();
            if norm <= S::from_f64(1e-12).unwrap() {
                return;
            }
            let scale = coeff / norm;
            let gh = grads.entity.entry(h).or_insert_with(zero_vec);
            for (g, &d) in gh.iter_mut().zip(&delta) {
                *g = *g - scale * d;
            }
            let gr = grads.relation.entry(r).or_insert_with(zero_vec);
            for (g, &d) in gr.iter_mut().zip(&delta) {
                *g = *g - scale * d;
            }
            let gt = grads.entity.entry(t).or_insert_with(zero_vec);
            for (g, &d) in gt.iter_mut().zip(&delta) {
                *g = *g + scale * d;
            }
        }
        ModelKind::DistMult => {
            let gh = grads.entity.entry(h).or_insert_with(zero_vec);
            for i in 0..width {
                gh[i] = gh[i] + coeff * rv[i] * tv[i];
            }
            let gr = grads.relation.entry(r).or_insert_with(zero_vec);
            for i in 0..width {
                gr[i] = gr[i] + coeff * hv[i] * tv[i];
            }
            let gt = grads.entity.entry(t).or_insert_with(zero_vec);
            for i in 0..width {
                gt[i] = gt[i] + coeff * hv[i] * rv[i];
            }
        }
        ModelKind::ComplEx => {
            let d = state.dim();
            let (hr, hi) = hv.split_at(d);
            let (rr, ri) = rv.split_at(d);
            let (tr, ti) = tv.split_at(d);
            let gh = grads.entity.entry(h).or_insert_with(zero_vec);
            for i in 0..d {
                gh[i] = gh[i] + coeff * (rr[i] * tr[i] + ri[i] * ti[i]);
                gh[d + i] = gh[d + i] + coeff * (rr[i] * ti[i] - ri[i] * tr[i]);
            }
            let gr = grads.relation.entry(r).or_insert_with(zero_vec);
            for i in 0..d {
                gr[i] = gr[i] + coeff * (hr[i] * tr[i] + hi[i] * ti[i]);
                gr[d + i] = gr[d + i] + coeff * (hr[i] * ti[i] - hi[i] * tr[i]);
            }
            let gt = grads.entity.entry(t).or_insert_with(zero_vec);
            for i in 0..d {
                gt[i] = gt[i] + coeff * (rr[i] * hr[i] - ri[i] * hi[i]);
                gt[d + i] = gt[d + i] + coeff * (rr[i] * hi[i] + ri[i] * hr[i]);
            }
        }
        ModelKind::HolE => {
            // s = <r, corr(h, t)>: dr = corr(h, t), dh = corr(r, t),
            // dt = conv(h, r)
            let corr_ht = circular_correlation_dispatch(hv, tv);
            let gr = grads.relation.entry(r).or_insert_with(zero_vec);
            for (g, c) in gr.iter_mut().zip(&corr_ht) {
                *g = *g + coeff * *c;
            }
            let corr_rt = circular_correlation_dispatch(rv, tv);
            let gh = grads.entity.entry(h).or_insert_with(zero_vec);
            for (g, c) in gh.iter_mut().zip(&corr_rt) {
                *g = *g + coeff * *c;
            }
            let conv_hr = circular_convolution_dispatch(hv, rv);
            let gt = grads.entity.entry(t).or_insert_with(zero_vec);
            for (g, c) in gt.iter_mut().zip(&conv_hr) {
                *g = *g + coeff * *c;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::to_f64;
    use rand::{Rng, SeedableRng};

    fn random_state(model: ModelKind, dim: usize, seed: u64) -> EmbeddingState<f64> {
        EmbeddingState::init_for(
            model,
            ["e0", "e1", "e2", "e3", "e4"],
            ["r0", "r1"],
            dim,
            seed,
        )
        .unwrap()
    }

    fn random_examples(seed: u64) -> Vec<TrainingExample<f64>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..3)
            .map(|_| TrainingExample {
                head: rng.gen_range(0..5),
                relation: rng.gen_range(0..2),
                tail: rng.gen_range(0..5),
                weight: [0.25, 0.5, 0.75, 1.0][rng.gen_range(0..4)],
                negatives: (0..2)
                    .map(|_| (rng.gen_range(0..5), rng.gen_range(0..5)))
                    .collect(),
            })
            .collect()
    }

    /// Central finite differences against the analytic batch gradients.
    fn check_gradients(model: ModelKind, mode: LossMode<f64>, seed: u64) {
        let dim = 4;
        let state = random_state(model, dim, seed);
        let examples = random_examples(seed.wrapping_add(77));
        let l2 = 1e-3;
        let grads = batch_gradients(&state, &examples, mode, l2);
        let step = 1e-5;

        let mut checked = 0usize;
        for (&idx, grad) in &grads.entity {
            for comp in 0..state.width() {
                let mut plus = state.clone();
                plus.entity_vec_mut(idx)[comp] += step;
                let mut minus = state.clone();
                minus.entity_vec_mut(idx)[comp] -= step;
                let fd = (to_f64(batch_loss(&plus, &examples, mode, l2))
                    - to_f64(batch_loss(&minus, &examples, mode, l2)))
                    / (2.0 * step);
                let g = grad[comp];
                let denom = g.abs().max(fd.abs()).max(1e-6);
                assert!(
                    (g - fd).abs() / denom < 1e-4,
                    "{model} entity {idx}[{comp}]: analytic {g} vs fd {fd}"
                );
                checked += 1;
            }
        }
        for (&idx, grad) in &grads.relation {
            for comp in 0..state.width() {
                let mut plus = state.clone();
                plus.relation_vec_mut(idx)[comp] += step;
                let mut minus = state.clone();
                minus.relation_vec_mut(idx)[comp] -= step;
                let fd = (to_f64(batch_loss(&plus, &examples, mode, l2))
                    - to_f64(batch_loss(&minus, &examples, mode, l2)))
                    / (2.0 * step);
                let g = grad[comp];
                let denom = g.abs().max(fd.abs()).max(1e-6);
                assert!(
                    (g - fd).abs() / denom < 1e-4,
                    "{model} relation {idx}[{comp}]: analytic {g} vs fd {fd}"
                );
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn finite_differences_base_mode() {
        for model in ModelKind::ALL {
            for seed in 0..3 {
                check_gradients(model, LossMode::Base, seed);
            }
        }
    }

    #[test]
    fn finite_differences_weighted_mode() {
        for model in ModelKind::ALL {
            for (seed, beta) in [(0u64, 0.0), (1, 0.5), (2, 1.0)] {
                check_gradients(model, LossMode::Weighted { beta }, seed);
            }
        }
    }

    #[test]
    fn loss_is_positive_and_finite() {
        let state = random_state(ModelKind::DistMult, 4, 3);
        let examples = random_examples(9);
        let loss = batch_loss(&state, &examples, LossMode::Base, 0.0);
        assert!(loss.is_finite());
        assert!(loss > 0.0);
    }

    #[test]
    fn weighted_loss_at_beta_one_ignores_weights() {
        let state = random_state(ModelKind::TransE, 4, 5);
        let mut examples = random_examples(11);
        let a = batch_loss(&state, &examples, LossMode::Weighted { beta: 1.0 }, 1e-4);
        for ex in &mut examples {
            ex.weight = 1.0 - ex.weight;
        }
        let b = batch_loss(&state, &examples, LossMode::Weighted { beta: 1.0 }, 1e-4);
        assert_eq!(a, b);
    }
}
