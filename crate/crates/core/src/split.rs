//! Train/validation/test splitting: the conventional random split and the
//! Markov-based split that cuts test CEGs at depth 1 and masks every causal
//! quad generated by a cut-crossing edge, plus the leakage auditor.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::builder::{build_kg, BuildError, EdgeOrigin, QuadOrigins, SubgraphView};
use crate::model::{CausalNetwork, ModelError, Quad, RelationKind, TripleKey};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("empty graph")]
    EmptyGraph,
    #[error("ratios {0:?} do not sum to 1")]
    BadRatios((f64, f64, f64)),
    #[error("CEG {scene:?} too shallow for the Markov split (max depth {depth})")]
    ShallowCeg { scene: String, depth: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Build(#[from] BuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitStrategy {
    Random,
    Markov,
}

impl SplitStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitStrategy::Random => "random",
            SplitStrategy::Markov => "markov",
        }
    }

    pub fn parse(s: &str) -> Option<SplitStrategy> {
        match s {
            "random" => Some(SplitStrategy::Random),
            "markov" => Some(SplitStrategy::Markov),
            _ => None,
        }
    }
}

impl fmt::Display for SplitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which causal question the split prepares test queries for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalTask {
    /// Find the effect type: queries over `causesType`.
    Prediction,
    /// Find the cause type: queries over `causedByType`.
    Explanation,
}

impl CausalTask {
    pub fn as_str(self) -> &'static str {
        match self {
            CausalTask::Prediction => "prediction",
            CausalTask::Explanation => "explanation",
        }
    }

    pub fn parse(s: &str) -> Option<CausalTask> {
        match s {
            "prediction" => Some(CausalTask::Prediction),
            "explanation" => Some(CausalTask::Explanation),
            _ => None,
        }
    }

    pub fn query_relation(self) -> RelationKind {
        match self {
            CausalTask::Prediction => RelationKind::CausesType,
            CausalTask::Explanation => RelationKind::CausedByType,
        }
    }
}

impl fmt::Display for CausalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One train/valid/test partition. `support` holds known-true quads that are
/// withheld from training but available to the evaluator's filter set
/// (Markov strategy only; empty for random splits).
#[derive(Debug, Clone)]
pub struct SplitBundle {
    pub train: Vec<Quad>,
    pub valid: Vec<Quad>,
    pub test: Vec<Quad>,
    pub support: Vec<Quad>,
    pub seed: u64,
    pub strategy: SplitStrategy,
    pub task: Option<CausalTask>,
}

impl SplitBundle {
    pub fn part_keys(quads: &[Quad]) -> HashSet<TripleKey> {
        quads.iter().map(Quad::key).collect()
    }

    /// All known-true keys: the evaluator's filter set.
    pub fn filter_keys(&self) -> HashSet<TripleKey> {
        self.train
            .iter()
            .chain(&self.valid)
            .chain(&self.test)
            .chain(&self.support)
            .map(Quad::key)
            .collect()
    }
}

/// Counters from one Markov split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MarkovReport {
    pub cegs_train: usize,
    pub cegs_test: usize,
    pub crossing_edges: usize,
    /// Quads withheld from training because a generating edge crosses the cut.
    pub masked_quads: usize,
    pub test_query_quads: usize,
    /// Test queries dropped because their head never appears in training.
    pub queries_dropped_unanswerable: usize,
}

impl MarkovReport {
    pub fn as_pairs(&self) -> Vec<(&'static str, usize)> {
        vec![
            ("cegs_train", self.cegs_train),
            ("cegs_test", self.cegs_test),
            ("crossing_edges", self.crossing_edges),
            ("masked_quads", self.masked_quads),
            ("test_query_quads", self.test_query_quads),
            ("queries_dropped_unanswerable", self.queries_dropped_unanswerable),
        ]
    }
}

/// Provenance of one split: generating edges per causal quad plus the set of
/// cut-crossing edges. Required by [`leakage_audit`].
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub origins: QuadOrigins,
    pub crossing: BTreeSet<EdgeOrigin>,
}

/// Split violations found by the auditor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// A (head, relation, tail) key appears in two split parts.
    OverlappingKey { key: TripleKey, parts: [&'static str; 2] },
    /// A trained quad has a generating edge that crosses the Markov cut.
    CrossingQuadInTrain { key: TripleKey, edge: EdgeOrigin },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OverlappingKey { key, parts } => {
                write!(f, "key {key} appears in both {} and {}", parts[0], parts[1])
            }
            Violation::CrossingQuadInTrain { key, edge } => write!(
                f,
                "trained quad {key} generated by crossing edge {}->{} in {}",
                edge.src, edge.dst, edge.scene
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Random split
// ---------------------------------------------------------------------------

/// Seeded uniform partition of the graph's quads. Part sizes are
/// `floor(n * ratio)` for valid and test with the remainder in train; quads
/// are then swapped so every valid/test entity keeps at least one training
/// occurrence.
pub fn random_split(
    kg: &crate::model::CausalKG,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<SplitBundle, SplitError> {
    if kg.is_empty() {
        return Err(SplitError::EmptyGraph);
    }
    let (r_train, r_valid, r_test) = ratios;
    let sum = r_train + r_valid + r_test;
    if !(sum - 1.0).abs().le(&1e-9) || r_train < 0.0 || r_valid < 0.0 || r_test < 0.0 {
        return Err(SplitError::BadRatios(ratios));
    }

    let mut quads = kg.sorted_quads();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    quads.shuffle(&mut rng);

    let n = quads.len();
    let n_valid = (n as f64 * r_valid).floor() as usize;
    let n_test = (n as f64 * r_test).floor() as usize;
    let n_train = n - n_valid - n_test;

    let mut train: Vec<Quad> = quads[..n_train].to_vec();
    let mut valid: Vec<Quad> = quads[n_train..n_train + n_valid].to_vec();
    let mut test: Vec<Quad> = quads[n_train + n_valid..].to_vec();

    // Entity-coverage repair: any entity that would vanish from train gets one
    // of its quads swapped in, exchanging it for a train quad whose entities
    // all occur at least twice in train.
    let mut train_count: HashMap<String, usize> = HashMap::new();
    let bump = |counts: &mut HashMap<String, usize>, quad: &Quad, delta: isize| {
        for name in [quad.head.name(), quad.tail.name()] {
            let c = counts.entry(name.to_owned()).or_insert(0);
            *c = (*c as isize + delta).max(0) as usize;
        }
    };
    for quad in &train {
        bump(&mut train_count, quad, 1);
    }
    for part in [&mut valid, &mut test] {
        let mut i = 0;
        while i < part.len() {
            let uncovered = {
                let q = &part[i];
                [q.head.name(), q.tail.name()]
                    .iter()
                    .any(|n| train_count.get(*n).copied().unwrap_or(0) == 0)
            };
            if !uncovered {
                i += 1;
                continue;
            }
            let moved = part[i].clone();
            bump(&mut train_count, &moved, 1);
            // pick a swap candidate from the back of train whose entities stay covered
            let swap_idx = (0..train.len()).rev().find(|&j| {
                let q = &train[j];
                train_count.get(q.head.name()).copied().unwrap_or(0) >= 2
                    && train_count.get(q.tail.name()).copied().unwrap_or(0) >= 2
            });
            match swap_idx {
                Some(j) => {
                    let swapped = train[j].clone();
                    bump(&mut train_count, &swapped, -1);
                    part[i] = swapped;
                    train[j] = moved;
                    i += 1;
                }
                None => {
                    // no safe exchange exists; grow train instead
                    train.push(moved);
                    part.remove(i);
                }
            }
        }
    }

    Ok(SplitBundle {
        train,
        valid,
        test,
        support: Vec::new(),
        seed,
        strategy: SplitStrategy::Random,
        task: None,
    })
}

// ---------------------------------------------------------------------------
// Markov split
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EdgeClass {
    TrainSide,
    TestSide,
    Crossing,
}

/// Markov-based split over a corpus of causal networks.
///
/// A seeded shuffle places `ceil(ceg_ratio * n)` CEGs in the train pool. Each
/// test-pool CEG is cut at depth 1: nodes at depth <= 1 are the upper half,
/// depth >= 2 the lower half. For the prediction task the upper half trains
/// and the lower half is held out (swapped for explanation). Every causal
/// quad generated by a cut-crossing edge is masked out of training; the
/// crossing edge's reified quad in the task's query relation becomes a test
/// query. Context quads (rdfType, includes, hasParticipant, hasProperty)
/// always stay in train. Validation is a seeded 10% carve-out of train.
/// `view` projects the trainable quads (test queries are causal and survive
/// every view).
pub fn markov_split(
    nets: &[CausalNetwork],
    task: CausalTask,
    ceg_ratio: f64,
    seed: u64,
    view: SubgraphView,
) -> Result<(SplitBundle, MarkovReport, Provenance), SplitError> {
    if nets.is_empty() {
        return Err(SplitError::EmptyGraph);
    }
    for net in nets {
        let depth = net.max_depth()?;
        if depth < 2 {
            return Err(SplitError::ShallowCeg {
                scene: net.scene().to_owned(),
                depth,
            });
        }
    }

    // deterministic pool assignment: sort by scene, then seeded shuffle
    let mut order: Vec<usize> = (0..nets.len()).collect();
    order.sort_by(|&a, &b| nets[a].scene().cmp(nets[b].scene()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train_pool = ((nets.len() as f64) * ceg_ratio).ceil().min(nets.len() as f64) as usize;
    let (train_pool, test_pool) = order.split_at(n_train_pool);
    let mut train_pool: Vec<usize> = train_pool.to_vec();
    let mut test_pool: Vec<usize> = test_pool.to_vec();
    train_pool.sort_by(|&a, &b| nets[a].scene().cmp(nets[b].scene()));
    test_pool.sort_by(|&a, &b| nets[a].scene().cmp(nets[b].scene()));

    let mut report = MarkovReport {
        cegs_train: train_pool.len(),
        cegs_test: test_pool.len(),
        ..MarkovReport::default()
    };
    let mut provenance = Provenance::default();
    let mut train: Vec<Quad> = Vec::new();
    let mut test: Vec<Quad> = Vec::new();
    let mut support: Vec<Quad> = Vec::new();
    let mut masked: BTreeSet<TripleKey> = BTreeSet::new();
    let mut query_keys: BTreeSet<TripleKey> = BTreeSet::new();

    for &i in &train_pool {
        let (kg, origins) = build_kg(&nets[i])?;
        provenance.origins.merge(origins);
        for quad in kg.quads() {
            if view.includes(quad.relation) {
                train.push(quad);
            }
        }
    }

    for &i in &test_pool {
        let net = &nets[i];
        let (kg, origins) = build_kg(net)?;
        let depths = net.node_depths()?;

        // classify this CEG's edges relative to the depth-1 cut
        let mut edge_class: HashMap<EdgeOrigin, EdgeClass> = HashMap::new();
        for edge in net.edges() {
            let upper_src = depths[&edge.src] <= 1;
            let upper_dst = depths[&edge.dst] <= 1;
            let class = match (upper_src, upper_dst) {
                (true, true) => match task {
                    CausalTask::Prediction => EdgeClass::TrainSide,
                    CausalTask::Explanation => EdgeClass::TestSide,
                },
                (false, false) => match task {
                    CausalTask::Prediction => EdgeClass::TestSide,
                    CausalTask::Explanation => EdgeClass::TrainSide,
                },
                _ => EdgeClass::Crossing,
            };
            let origin = EdgeOrigin {
                scene: net.scene().to_owned(),
                src: edge.src.clone(),
                dst: edge.dst.clone(),
            };
            if class == EdgeClass::Crossing {
                report.crossing_edges += 1;
                provenance.crossing.insert(origin.clone());
                // the reified quad in the task's query relation becomes a query
                let (head, other) = match task {
                    CausalTask::Prediction => (&edge.src, &edge.dst),
                    CausalTask::Explanation => (&edge.dst, &edge.src),
                };
                let other_type = net.node(other).expect("validated endpoint").type_entity_name();
                query_keys.insert(TripleKey::new(
                    head.clone(),
                    task.query_relation(),
                    other_type,
                ));
            }
            edge_class.insert(origin, class);
        }

        for quad in kg.quads() {
            let key = quad.key();
            match origins.origins(&key) {
                None => {
                    // context quad: always trainable
                    if view.includes(quad.relation) {
                        train.push(quad);
                    }
                }
                Some(edge_set) => {
                    let classes: Vec<EdgeClass> =
                        edge_set.iter().map(|o| edge_class[o]).collect();
                    if classes.contains(&EdgeClass::Crossing) {
                        masked.insert(key.clone());
                        if query_keys.contains(&key) {
                            test.push(quad);
                        } else {
                            support.push(quad);
                        }
                    } else if classes.contains(&EdgeClass::TestSide) {
                        support.push(quad);
                    } else if view.includes(quad.relation) {
                        train.push(quad);
                    }
                }
            }
        }
        provenance.origins.merge(origins);
    }

    report.masked_quads = masked.len();

    // seeded 10% carve-out of train for early stopping
    let mut carve_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut idx: Vec<usize> = (0..train.len()).collect();
    idx.shuffle(&mut carve_rng);
    let n_valid = train.len() / 10;
    let valid_idx: BTreeSet<usize> = idx.into_iter().take(n_valid).collect();
    let mut valid = Vec::with_capacity(n_valid);
    let mut kept_train = Vec::with_capacity(train.len() - n_valid);
    for (i, quad) in train.into_iter().enumerate() {
        if valid_idx.contains(&i) {
            valid.push(quad);
        } else {
            kept_train.push(quad);
        }
    }
    let train = kept_train;

    // drop test queries whose head entity never occurs in training
    let train_entities: HashSet<&str> = train
        .iter()
        .flat_map(|q| [q.head.name(), q.tail.name()])
        .collect();
    let (test, dropped): (Vec<Quad>, Vec<Quad>) = test
        .into_iter()
        .partition(|q| train_entities.contains(q.head.name()));
    report.queries_dropped_unanswerable = dropped.len();
    // unanswerable queries remain known-true for filtering purposes
    support.extend(dropped);
    report.test_query_quads = test.len();

    let bundle = SplitBundle {
        train,
        valid,
        test,
        support,
        seed,
        strategy: SplitStrategy::Markov,
        task: Some(task),
    };
    Ok((bundle, report, provenance))
}

// ---------------------------------------------------------------------------
// Leakage audit
// ---------------------------------------------------------------------------

/// Checks that the split parts are key-disjoint and, for Markov bundles, that
/// no trained (or validation) quad was generated by a cut-crossing edge.
/// Returns an empty list for every bundle this module produces.
pub fn leakage_audit(bundle: &SplitBundle, provenance: &Provenance) -> Vec<Violation> {
    let mut violations = BTreeSet::new();

    let parts: [(&'static str, &Vec<Quad>); 3] = [
        ("train", &bundle.train),
        ("valid", &bundle.valid),
        ("test", &bundle.test),
    ];
    for a in 0..parts.len() {
        for b in a + 1..parts.len() {
            let keys_a = SplitBundle::part_keys(parts[a].1);
            for quad in parts[b].1 {
                let key = quad.key();
                if keys_a.contains(&key) {
                    violations.insert(Violation::OverlappingKey {
                        key,
                        parts: [parts[a].0, parts[b].0],
                    });
                }
            }
        }
    }

    if bundle.strategy == SplitStrategy::Markov {
        for quad in bundle.train.iter().chain(&bundle.valid) {
            let key = quad.key();
            if let Some(origins) = provenance.origins.origins(&key) {
                for origin in origins {
                    if provenance.crossing.contains(origin) {
                        violations.insert(Violation::CrossingQuadInTrain {
                            key: key.clone(),
                            edge: origin.clone(),
                        });
                    }
                }
            }
        }
    }

    violations.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Manifest encoding
// ---------------------------------------------------------------------------

/// Key/value lines for the split manifest file.
pub fn split_manifest_pairs(
    bundle: &SplitBundle,
    report: Option<&MarkovReport>,
    view: SubgraphView,
) -> Vec<(String, String)> {
    let mut pairs = vec![
        ("seed".to_owned(), bundle.seed.to_string()),
        ("strategy".to_owned(), bundle.strategy.to_string()),
        (
            "task".to_owned(),
            bundle.task.map_or("none".to_owned(), |t| t.to_string()),
        ),
        ("view".to_owned(), view.to_string()),
        ("train_quads".to_owned(), bundle.train.len().to_string()),
        ("valid_quads".to_owned(), bundle.valid.len().to_string()),
        ("test_quads".to_owned(), bundle.test.len().to_string()),
        ("support_quads".to_owned(), bundle.support.len().to_string()),
    ];
    if let Some(report) = report {
        for (k, v) in report.as_pairs() {
            pairs.push((k.to_owned(), v.to_string()));
        }
    }
    pairs
}
