//! Knowledge-graph embeddings over causal quads: four scoring functions
//! (TransE, DistMult, ComplEx, HolE), causal-weight modulation of the scoring
//! layer, negative sampling, training, and checkpoints.

pub mod checkpoint;
pub mod corr;
pub mod grad;
pub mod train;

use std::fmt;

use indexmap::IndexSet;
use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use thiserror::Error;

use crate::num::{scalar, Scalar};

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use corr::{circular_correlation, circular_correlation_fft, circular_correlation_naive};
pub use train::{train, TrainReport};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("empty graph: no entities to embed")]
    EmptyGraph,
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    DivergedTraining { epoch: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("malformed checkpoint at line {line}: {reason}")]
    MalformedCheckpoint { line: usize, reason: String },
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Scoring function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    TransE,
    DistMult,
    ComplEx,
    HolE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::TransE,
        ModelKind::DistMult,
        ModelKind::ComplEx,
        ModelKind::HolE,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::TransE => "TransE",
            ModelKind::DistMult => "DistMult",
            ModelKind::ComplEx => "ComplEx",
            ModelKind::HolE => "HolE",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s.to_lowercase().as_str() {
            "transe" => Some(ModelKind::TransE),
            "distmult" => Some(ModelKind::DistMult),
            "complex" => Some(ModelKind::ComplEx),
            "hole" => Some(ModelKind::HolE),
            _ => None,
        }
    }

    /// Components stored per vector: `dim` reals, doubled for ComplEx
    /// (real parts then imaginary parts).
    pub fn width(self, dim: usize) -> usize {
        match self {
            ModelKind::ComplEx => 2 * dim,
            _ => dim,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether training uses the causal weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Plain structural training; weights ignored.
    Base,
    /// Scoring-layer modulation by causal weights.
    Weighted,
}

impl WeightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::Base => "base",
            WeightMode::Weighted => "weighted",
        }
    }

    pub fn parse(s: &str) -> Option<WeightMode> {
        match s {
            "base" => Some(WeightMode::Base),
            "weighted" => Some(WeightMode::Weighted),
            _ => None,
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which slot of a quad a corruption replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Head,
    Tail,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Head => "head",
            Side::Tail => "tail",
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig<S: Scalar> {
    pub dim: usize,
    pub learning_rate: S,
    pub epochs: usize,
    pub batch_size: usize,
    /// Corruptions per positive (eta).
    pub negatives_per_positive: usize,
    pub weight_mode: WeightMode,
    /// Epochs over which the structural-influence coefficient beta decays
    /// linearly from 1 to 0; it stays 0 afterwards.
    pub structural_influence_decay_epochs: usize,
    pub l2_coefficient: S,
    pub seed: u64,
    /// Epochs without validation-MRR improvement before stopping; 0 disables.
    pub early_stop_patience: usize,
    /// Pins beta to a constant, overriding the decay schedule.
    pub beta_frozen: Option<S>,
}

impl<S: Scalar> Default for TrainConfig<S> {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            learning_rate: scalar(1e-3),
            epochs: 200,
            batch_size: 512,
            negatives_per_positive: 10,
            weight_mode: WeightMode::Base,
            structural_influence_decay_epochs: 100,
            l2_coefficient: scalar(1e-4),
            seed: 42,
            early_stop_patience: 20,
            beta_frozen: None,
        }
    }
}

impl<S: Scalar> TrainConfig<S> {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dim == 0 {
            return Err(EmbedError::InvalidConfig("dim must be positive".into()));
        }
        if self.negatives_per_positive == 0 {
            return Err(EmbedError::InvalidConfig("eta must be >= 1".into()));
        }
        if self.structural_influence_decay_epochs > self.epochs {
            return Err(EmbedError::InvalidConfig(
                "beta decay epochs exceed total epochs".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(EmbedError::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.learning_rate > S::zero()) {
            return Err(EmbedError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.l2_coefficient < S::zero() {
            return Err(EmbedError::InvalidConfig("l2 must be >= 0".into()));
        }
        if let Some(beta) = self.beta_frozen {
            if beta < S::zero() || beta > S::one() {
                return Err(EmbedError::InvalidConfig("frozen beta outside [0,1]".into()));
            }
        }
        Ok(())
    }

    /// Structural-influence coefficient at the given epoch.
    pub fn beta_at(&self, epoch: usize) -> S {
        if let Some(beta) = self.beta_frozen {
            return beta;
        }
        let d = self.structural_influence_decay_epochs;
        if d == 0 || epoch >= d {
            S::zero()
        } else {
            S::one() - scalar::<S>(epoch as f64) / scalar::<S>(d as f64)
        }
    }
}

/// Entity and relation vectors for one model kind.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState<S: Scalar> {
    model: ModelKind,
    dim: usize,
    entities: IndexSet<String>,
    relations: IndexSet<String>,
    entity_vecs: Vec<S>,
    relation_vecs: Vec<S>,
    epoch: usize,
}

impl<S: Scalar> EmbeddingState<S> {
    /// Initializes vectors i.i.d. uniform on [-sqrt(6/d), +sqrt(6/d)] from the
    /// seeded generator; entities first (in iteration order), then relations.
    pub fn init<I, J>(entities: I, relations: J, dim: usize, seed: u64) -> Result<Self, EmbedError>
    where
        I: IntoIterator,
        I::Item: Into<String>,
        J: IntoIterator,
        J::Item: Into<String>,
    {
        Self::init_for(ModelKind::DistMult, entities, relations, dim, seed)
    }

    pub fn init_for<I, J>(
        model: ModelKind,
        entities: I,
        relations: J,
        dim: usize,
        seed: u64,
    ) -> Result<Self, EmbedError>
    where
        I: IntoIterator,
        I::Item: Into<String>,
        J: IntoIterator,
        J::Item: Into<String>,
    {
        use rand::SeedableRng;
        let entities: IndexSet<String> = entities.into_iter().map(Into::into).collect();
        let relations: IndexSet<String> = relations.into_iter().map(Into::into).collect();
        if entities.is_empty() {
            return Err(EmbedError::EmptyGraph);
        }
        let width = model.width(dim);
        let bound: S = scalar::<S>(6.0 / dim as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let entity_vecs = (0..entities.len() * width)
            .map(|_| dist.sample(&mut rng))
            .collect();
        let relation_vecs = (0..relations.len() * width)
            .map(|_| dist.sample(&mut rng))
            .collect();
        Ok(EmbeddingState {
            model,
            dim,
            entities,
            relations,
            entity_vecs,
            relation_vecs,
            epoch: 0,
        })
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        self.model.width(self.dim)
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub(crate) fn set_epoch(&mut self, epoch: usize) {
        self.epoch = epoch;
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn entity_names(&self) -> impl Iterator<Item = &str> {
        self.entities.iter().map(String::as_str)
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(String::as_str)
    }

    pub fn entity_index(&self, name: &str) -> Option<usize> {
        self.entities.get_index_of(name)
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.get_index_of(name)
    }

    pub fn entity_vec(&self, idx: usize) -> &[S] {
        let w = self.width();
        &self.entity_vecs[idx * w..(idx + 1) * w]
    }

    pub fn relation_vec(&self, idx: usize) -> &[S] {
        let w = self.width();
        &self.relation_vecs[idx * w..(idx + 1) * w]
    }

    /// Direct mutable access, for custom initialization and tests.
    pub fn entity_vec_mut(&mut self, idx: usize) -> &mut [S] {
        let w = self.width();
        &mut self.entity_vecs[idx * w..(idx + 1) * w]
    }

    pub fn relation_vec_mut(&mut self, idx: usize) -> &mut [S] {
        let w = self.width();
        &mut self.relation_vecs[idx * w..(idx + 1) * w]
    }

    pub fn entity_vec_by_name(&self, name: &str) -> Option<&[S]> {
        self.entity_index(name).map(|i| self.entity_vec(i))
    }

    /// Restores a state from parsed checkpoint parts.
    pub(crate) fn from_parts(
        model: ModelKind,
        dim: usize,
        epoch: usize,
        entities: IndexSet<String>,
        relations: IndexSet<String>,
        entity_vecs: Vec<S>,
        relation_vecs: Vec<S>,
    ) -> Self {
        EmbeddingState {
            model,
            dim,
            entities,
            relations,
            entity_vecs,
            relation_vecs,
            epoch,
        }
    }

    /// Raw score of one (head, relation, tail) triple by entity/relation name.
    pub fn score(&self, head: &str, relation: &str, tail: &str) -> Result<S, EmbedError> {
        let h = self
            .entity_index(head)
            .ok_or_else(|| EmbedError::UnknownEntity(head.to_owned()))?;
        let r = self
            .relation_index(relation)
            .ok_or_else(|| EmbedError::UnknownRelation(relation.to_owned()))?;
        let t = self
            .entity_index(tail)
            .ok_or_else(|| EmbedError::UnknownEntity(tail.to_owned()))?;
        Ok(self.score_idx(h, r, t))
    }

    /// Raw score by index. TransE: -||h + r - t||; DistMult: <h, r, t>;
    /// ComplEx: Re(<h, r, conj(t)>); HolE: <r, h star t> with star the
    /// circular correlation.
    pub fn score_idx(&self, h: usize, r: usize, t: usize) -> S {
        let hv = self.entity_vec(h);
        let rv = self.relation_vec(r);
        let tv = self.entity_vec(t);
        match self.model {
            ModelKind::TransE => {
                let sq: S = hv
                    .iter()
                    .zip(rv)
                    .zip(tv)
                    .map(|((&a, &b), &c)| {
                        let d = a + b - c;
                        d * d
                    })
                    .sum();
                -sq.sqrt()
            }
            // r * (h * t): bit-exact under head/tail exchange
            ModelKind::DistMult => hv
                .iter()
                .zip(rv)
                .zip(tv)
                .map(|((&a, &b), &c)| b * (a * c))
                .sum(),
            ModelKind::ComplEx => {
                let d = self.dim;
                let (hr, hi) = hv.split_at(d);
                let (rr, ri) = rv.split_at(d);
                let (tr, ti) = tv.split_at(d);
                let mut acc = S::zero();
                for i in 0..d {
                    acc = acc
                        + rr[i] * (hr[i] * tr[i] + hi[i] * ti[i])
                        + ri[i] * (hr[i] * ti[i] - hi[i] * tr[i]);
                }
                acc
            }
            ModelKind::HolE => {
                let c = corr::circular_correlation_dispatch(hv, tv);
                rv.iter().zip(c).map(|(&r, c)| r * c).sum()
            }
        }
    }
}

/// Numerically stable softplus, ln(1 + e^x).
pub fn softplus<S: Scalar>(x: S) -> S {
    if x > S::zero() {
        x + x.neg().exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic sigmoid; the derivative of [`softplus`].
pub fn sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + x.neg().exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

/// Modulates a raw score by a causal weight: g = softplus(raw), and
/// alpha = beta + (1 - beta) * w for positives, beta + (1 - beta) * (1 - w)
/// for negatives; the result is alpha * g.
pub fn modulate<S: Scalar>(raw: S, weight: S, beta: S, positive: bool) -> S {
    let alpha = if positive {
        beta + (S::one() - beta) * weight
    } else {
        beta + (S::one() - beta) * (S::one() - weight)
    };
    alpha * softplus(raw)
}

/// Derivative of the modulated score with respect to the raw score.
pub(crate) fn modulate_grad<S: Scalar>(raw: S, weight: S, beta: S, positive: bool) -> S {
    let alpha = if positive {
        beta + (S::one() - beta) * weight
    } else {
        beta + (S::one() - beta) * (S::one() - weight)
    };
    alpha * sigmoid(raw)
}

/// Draws `eta` corruptions of a (head, tail) pair: a fair coin picks the
/// side, then a uniformly drawn entity different from the replaced one fills
/// the slot. Corrupted quads inherit the positive's weight downstream.
pub fn sample_negatives<R: Rng>(
    head: &str,
    tail: &str,
    entities: &[String],
    eta: usize,
    rng: &mut R,
) -> Vec<(Side, String)> {
    assert!(entities.len() >= 2, "corruption needs at least two entities");
    let mut out = Vec::with_capacity(eta);
    for _ in 0..eta {
        let side = if rng.gen_bool(0.5) { Side::Head } else { Side::Tail };
        let original = match side {
            Side::Head => head,
            Side::Tail => tail,
        };
        let replacement = loop {
            let candidate = &entities[rng.gen_range(0..entities.len())];
            if candidate != original {
                break candidate.clone();
            }
        };
        out.push((side, replacement));
    }
    out
}
