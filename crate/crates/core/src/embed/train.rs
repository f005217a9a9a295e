//! Training loop: multiclass NLL over each positive and its corruptions,
//! lazy Adam updates, linear beta decay in weighted mode, TransE
//! renormalization, and early stopping on validation MRR.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use indexmap::IndexSet;

use crate::model::Quad;
use crate::num::{scalar, to_f64, Scalar};

use super::grad::{batch_gradients, LossMode, TrainingExample};
use super::{EmbedError, EmbeddingState, ModelKind, TrainConfig, WeightMode};

/// Outcome metadata of one training run.
#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    /// Mean multiclass NLL per positive, one entry per completed epoch.
    pub epoch_losses: Vec<f64>,
    /// Best validation MRR seen, when validation ran.
    pub best_valid_mrr: Option<f64>,
    /// Epoch (0-based) of the returned state.
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// Quads excluded from the positive stream because their weight is zero.
    pub zero_weight_excluded: usize,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
/// Validation quads scored per early-stop check.
const VALID_SAMPLE_CAP: usize = 256;

struct Adam<S> {
    m: Vec<S>,
    v: Vec<S>,
    step: usize,
}

impl<S: Scalar> Adam<S> {
    fn new(len: usize) -> Self {
        Adam {
            m: vec![S::zero(); len],
            v: vec![S::zero(); len],
            step: 0,
        }
    }

    /// One lazy step: moments update only for the touched span.
    fn update(&mut self, params: &mut [S], offset: usize, grad: &[S], lr: S) {
        let b1: S = scalar(ADAM_BETA1);
        let b2: S = scalar(ADAM_BETA2);
        let eps: S = scalar(ADAM_EPS);
        let t = self.step as i32;
        let corr1 = S::one() - b1.powi(t);
        let corr2 = S::one() - b2.powi(t);
        for (i, &g) in grad.iter().enumerate() {
            let j = offset + i;
            self.m[j] = b1 * self.m[j] + (S::one() - b1) * g;
            self.v[j] = b2 * self.v[j] + (S::one() - b2) * g * g;
            let m_hat = self.m[j] / corr1;
            let v_hat = self.v[j] / corr2;
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

struct Positive<S> {
    head: usize,
    relation: usize,
    tail: usize,
    weight: S,
}

fn sample_negative_indices<R: Rng>(
    head: usize,
    tail: usize,
    n_entities: usize,
    eta: usize,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(eta);
    for _ in 0..eta {
        let corrupt_head = rng.gen_bool(0.5);
        let original = if corrupt_head { head } else { tail };
        let replacement = loop {
            let candidate = rng.gen_range(0..n_entities);
            if candidate != original {
                break candidate;
            }
        };
        if corrupt_head {
            out.push((replacement, tail));
        } else {
            out.push((head, replacement));
        }
    }
    out
}

/// Unfiltered tail-ranking MRR over a deterministic validation sample;
/// midpoint tie policy. Used only for early stopping.
fn validation_mrr<S: Scalar>(state: &EmbeddingState<S>, sample: &[Positive<S>]) -> f64 {
    let n_entities = state.entity_count();
    let mut sum = 0.0;
    for quad in sample {
        let true_score = state.score_idx(quad.head, quad.relation, quad.tail);
        let mut worse = 0usize;
        let mut ties = 0usize;
        for e in 0..n_entities {
            if e == quad.tail {
                continue;
            }
            let s = state.score_idx(quad.head, quad.relation, e);
            if s > true_score {
                worse += 1;
            } else if s == true_score {
                ties += 1;
            }
        }
        let rank = 1 + worse + ties.div_ceil(2);
        sum += 1.0 / rank as f64;
    }
    if sample.is_empty() {
        0.0
    } else {
        sum / sample.len() as f64
    }
}

/// Trains an embedding over the training quads.
///
/// Positives with zero weight are excluded from the positive stream (their
/// entities still join the corruption pool). In weighted mode every
/// candidate's raw score is modulated by the positive's weight before the
/// softmax; in base mode raw scores feed the loss directly. Returns the state
/// with the best validation MRR when validation quads are supplied, otherwise
/// the final state.
pub fn train<S: Scalar>(
    model: ModelKind,
    train_quads: &[Quad],
    valid_quads: &[Quad],
    config: &TrainConfig<S>,
) -> Result<(EmbeddingState<S>, TrainReport), EmbedError> {
    config.validate()?;

    let mut entities: IndexSet<String> = IndexSet::new();
    let mut relations: IndexSet<String> = IndexSet::new();
    for quad in train_quads.iter().chain(valid_quads) {
        entities.insert(quad.head.name().to_owned());
        entities.insert(quad.tail.name().to_owned());
        relations.insert(quad.relation.as_str().to_owned());
    }
    if entities.len() < 2 {
        return Err(EmbedError::EmptyGraph);
    }

    let mut report = TrainReport::default();
    let to_positive = |quad: &Quad| Positive::<S> {
        head: entities.get_index_of(quad.head.name()).expect("registered"),
        relation: relations
            .get_index_of(quad.relation.as_str())
            .expect("registered"),
        tail: entities.get_index_of(quad.tail.name()).expect("registered"),
        weight: scalar(quad.weight),
    };
    let mut positives: Vec<Positive<S>> = Vec::with_capacity(train_quads.len());
    for quad in train_quads {
        if quad.weight == 0.0 {
            report.zero_weight_excluded += 1;
        } else {
            positives.push(to_positive(quad));
        }
    }
    if positives.is_empty() {
        return Err(EmbedError::EmptyGraph);
    }
    let valid: Vec<Positive<S>> = valid_quads.iter().map(to_positive).collect();
    let valid_sample: Vec<Positive<S>> = if valid.len() <= VALID_SAMPLE_CAP {
        valid
    } else {
        let stride = valid.len().div_ceil(VALID_SAMPLE_CAP);
        valid
            .into_iter()
            .step_by(stride)
            .collect()
    };

    let n_entities = entities.len();
    let width = model.width(config.dim);
    let mut state = EmbeddingState::init_for(
        model,
        entities.iter().cloned(),
        relations.iter().cloned(),
        config.dim,
        config.seed,
    )?;
    let mut adam: Adam<S> = Adam::new((n_entities + relations.len()) * width);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5851_f42d_4c95_7f2d);

    let mut order: Vec<usize> = (0..positives.len()).collect();
    let mut best: Option<(f64, usize, EmbeddingState<S>)> = None;
    let mut stale = 0usize;

    for epoch in 0..config.epochs {
        let beta = config.beta_at(epoch);
        let mode = match config.weight_mode {
            WeightMode::Base => LossMode::Base,
            WeightMode::Weighted => LossMode::Weighted { beta },
        };
        order.shuffle(&mut rng);
        let mut epoch_nll = 0.0f64;

        for chunk in order.chunks(config.batch_size) {
            let examples: Vec<TrainingExample<S>> = chunk
                .iter()
                .map(|&i| {
                    let p = &positives[i];
                    TrainingExample {
                        head: p.head,
                        relation: p.relation,
                        tail: p.tail,
                        weight: p.weight,
                        negatives: sample_negative_indices(
                            p.head,
                            p.tail,
                            n_entities,
                            config.negatives_per_positive,
                            &mut rng,
                        ),
                    }
                })
                .collect();
            let grads = batch_gradients(&state, &examples, mode, config.l2_coefficient);
            epoch_nll += to_f64(grads.nll);

            adam.step += 1;
            for (&idx, grad) in &grads.entity {
                let offset = idx * width;
                adam.update(state.entity_vec_mut(idx), offset, grad, config.learning_rate);
            }
            for (&idx, grad) in &grads.relation {
                let offset = (n_entities + idx) * width;
                adam.update(
                    state.relation_vec_mut(idx),
                    offset,
                    grad,
                    config.learning_rate,
                );
            }

            if model == ModelKind::TransE {
                for e in 0..n_entities {
                    let vec = state.entity_vec_mut(e);
                    let norm = vec.iter().map(|&x| x * x).sum::<S>().sqrt();
                    if norm > S::zero() {
                        for x in vec {
                            *x = *x / norm;
                        }
                    }
                }
            }
        }

        let mean_nll = epoch_nll / positives.len() as f64;
        if !mean_nll.is_finite() {
            return Err(EmbedError::DivergedTraining { epoch });
        }
        report.epoch_losses.push(mean_nll);
        state.set_epoch(epoch + 1);
        report.epochs_run = epoch + 1;

        if !valid_sample.is_empty() && config.early_stop_patience > 0 {
            let mrr = validation_mrr(&state, &valid_sample);
            let improved = best.as_ref().map_or(true, |(b, _, _)| mrr > b + 1e-9);
            if improved {
                best = Some((mrr, epoch, state.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.early_stop_patience {
                    break;
                }
            }
        }
    }

    if let Some((mrr, epoch, snapshot)) = best {
        report.best_valid_mrr = Some(mrr);
        report.best_epoch = epoch;
        state = snapshot;
    } else {
        report.best_epoch = report.epochs_run.saturating_sub(1);
    }
    Ok((state, report))
}
