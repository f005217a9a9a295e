//! Synthetic CEG corpora with planted type-level causal regularities:
//! layered DAGs whose consecutive-layer edges follow a type-succession rule
//! table and score high, while layer-skipping noise edges break the rules and
//! score low. Downstream, synthetic and real corpora are interchangeable.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ingest::lexicon::lexicon;
use crate::model::{CausalNetwork, Ceg, CegEdge, CegNode, Color, EventArity, Material, Shape};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    BadConfig(String),
    #[error("CEG {ceg_index} unsatisfiable: depth >= 2 not reached in 100 retries")]
    Unsatisfiable { ceg_index: usize },
}

/// Weighted choice over annotation scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreDist(Vec<(u8, u32)>);

impl ScoreDist {
    pub fn new(choices: Vec<(u8, u32)>) -> Result<Self, SynthError> {
        if choices.is_empty() || choices.iter().all(|(_, w)| *w == 0) {
            return Err(SynthError::BadConfig("empty score distribution".into()));
        }
        if choices.iter().any(|(s, _)| !(1..=5).contains(s)) {
            return Err(SynthError::BadConfig("score outside 1..=5".into()));
        }
        Ok(ScoreDist(choices))
    }

    /// Scores 4-5, uniform: the strong causal responsibility band.
    pub fn strong() -> Self {
        ScoreDist(vec![(4, 1), (5, 1)])
    }

    /// Scores 2-3, uniform: present but weak responsibility.
    pub fn weak() -> Self {
        ScoreDist(vec![(2, 1), (3, 1)])
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u8 {
        let total: u32 = self.0.iter().map(|(_, w)| w).sum();
        let mut draw = rng.gen_range(0..total);
        for &(score, w) in &self.0 {
            if draw < w {
                return score;
            }
            draw -= w;
        }
        self.0.last().expect("non-empty").0
    }
}

/// Verbs the default rule tables draw event types from, mixed arity.
pub const DEFAULT_TYPE_VERBS: [&str; 12] = [
    "move", "collide", "roll", "hit", "enter", "slide", "bump", "exit", "spin", "push", "stop",
    "touch",
];

fn capitalize(lemma: &str) -> String {
    let mut chars = lemma.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Generator configuration. `rule_table` maps (cause type, effect type)
/// entity names to the score distribution of conforming edges.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_cegs: usize,
    pub nodes_per_ceg: (usize, usize),
    pub edge_probability: f64,
    pub n_event_types: usize,
    pub rule_table: BTreeMap<(String, String), ScoreDist>,
    pub noise_rate: f64,
    pub noise_scores: ScoreDist,
    pub seed: u64,
}

impl SynthConfig {
    /// Default configuration: the first `n_event_types` verbs of
    /// [`DEFAULT_TYPE_VERBS`] arranged in a succession cycle
    /// (Move -> Collide -> ... -> Move) with strong scores.
    pub fn new(
        n_cegs: usize,
        nodes_per_ceg: (usize, usize),
        edge_probability: f64,
        n_event_types: usize,
        noise_rate: f64,
        seed: u64,
    ) -> Result<SynthConfig, SynthError> {
        if n_event_types < 2 || n_event_types > DEFAULT_TYPE_VERBS.len() {
            return Err(SynthError::BadConfig(format!(
                "n_event_types must be in 2..={}",
                DEFAULT_TYPE_VERBS.len()
            )));
        }
        let mut rule_table = BTreeMap::new();
        for i in 0..n_event_types {
            let cause = capitalize(DEFAULT_TYPE_VERBS[i]);
            let effect = capitalize(DEFAULT_TYPE_VERBS[(i + 1) % n_event_types]);
            rule_table.insert((cause, effect), ScoreDist::strong());
        }
        let config = SynthConfig {
            n_cegs,
            nodes_per_ceg,
            edge_probability,
            n_event_types,
            rule_table,
            noise_rate,
            noise_scores: ScoreDist::weak(),
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// The corpus the acceptance suite trains on: 200 CEGs of 5-9 nodes,
    /// edge probability 0.3, 6 event types, noise rate 0.2.
    pub fn bundled() -> SynthConfig {
        SynthConfig::new(200, (5, 9), 0.3, 6, 0.2, 0x00ca_05a1).expect("bundled config is valid")
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_cegs == 0 {
            return Err(SynthError::BadConfig("n_cegs must be positive".into()));
        }
        let (lo, hi) = self.nodes_per_ceg;
        if lo == 0 || lo > hi {
            return Err(SynthError::BadConfig(format!(
                "bad nodes_per_ceg range ({lo}, {hi})"
            )));
        }
        if !(self.edge_probability > 0.0 && self.edge_probability < 1.0) {
            return Err(SynthError::BadConfig("edge_probability outside (0,1)".into()));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return Err(SynthError::BadConfig("noise_rate outside [0,1)".into()));
        }
        if self.rule_table.is_empty() {
            return Err(SynthError::BadConfig("empty rule table".into()));
        }
        for (cause, effect) in self.rule_table.keys() {
            for ty in [cause, effect] {
                let lemma = ty.to_lowercase();
                if lexicon().verb(&lemma).is_none() {
                    return Err(SynthError::BadConfig(format!(
                        "rule table type {ty:?} is not a vocabulary verb"
                    )));
                }
            }
        }
        Ok(())
    }

    /// cause type -> sorted successor effect types.
    fn successors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (cause, effect) in self.rule_table.keys() {
            succ.entry(cause.as_str()).or_default().push(effect.as_str());
        }
        succ
    }
}

fn random_object<R: Rng>(rng: &mut R) -> crate::model::ObjectRef {
    let color = Color::CANONICAL[rng.gen_range(0..Color::CANONICAL.len())];
    let shape = Shape::CANONICAL[rng.gen_range(0..Shape::CANONICAL.len())];
    let material = if rng.gen_bool(0.5) {
        Material::CANONICAL[rng.gen_range(0..Material::CANONICAL.len())]
    } else {
        Material::Unknown
    };
    crate::model::ObjectRef::new(color, shape, material)
}

fn object_phrase(obj: &crate::model::ObjectRef) -> String {
    let mut words = vec![obj.color.as_str()];
    if obj.material != Material::Unknown {
        words.push(obj.material.as_str());
    }
    words.push(obj.shape.as_str());
    format!("the {}", words.join(" "))
}

fn describe<R: Rng>(verb_lemma: &str, rng: &mut R) -> String {
    let verb = lexicon().verb(verb_lemma).expect("validated verb");
    match verb.arity {
        EventArity::Singular => {
            let obj = random_object(rng);
            format!("{} {}", object_phrase(&obj), verb.third_person)
        }
        EventArity::Binary => {
            let a = random_object(rng);
            let mut b = random_object(rng);
            for _ in 0..8 {
                if b != a {
                    break;
                }
                b = random_object(rng);
            }
            format!(
                "{} {} {}",
                object_phrase(&a),
                verb.third_person,
                object_phrase(&b)
            )
        }
    }
}

/// Generates one corpus. Each CEG is a layered DAG (>= 3 layers, so depth
/// >= 2 by construction): consecutive-layer edges appear with the configured
/// probability (every node keeps at least one parent) and follow the rule
/// table via a type walk; same-layer noise edges are inserted at the noise
/// rate, pair two nodes of the same event type, and never match a rule. Per-CEG generators are derived as
/// `seed xor index`, so corpora are reproducible and CEGs independent.
pub fn generate(config: &SynthConfig) -> Result<Vec<Ceg>, SynthError> {
    config.validate()?;
    let succ = config.successors();
    let mut cegs = Vec::with_capacity(config.n_cegs);
    for index in 0..config.n_cegs {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ index as u64);
        let ceg = generate_one(config, &succ, index, &mut rng)?;
        cegs.push(ceg);
    }
    Ok(cegs)
}

fn generate_one(
    config: &SynthConfig,
    succ: &BTreeMap<&str, Vec<&str>>,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Ceg, SynthError> {
    let (lo, hi) = config.nodes_per_ceg;
    'retry: for _attempt in 0..100 {
        let n = rng.gen_range(lo..=hi);
        if n < 3 {
            continue;
        }
        let max_layers = n.min(6);
        let n_layers = rng.gen_range(3..=max_layers);

        // layer assignment: one node per layer guaranteed, the rest uniform
        let mut layer_of = vec![0usize; n];
        for (node, slot) in layer_of.iter_mut().enumerate().take(n_layers) {
            *slot = node;
        }
        for slot in layer_of.iter_mut().skip(n_layers) {
            *slot = rng.gen_range(0..n_layers);
        }
        let mut by_layer: Vec<Vec<usize>> = vec![Vec::new(); n_layers];
        let mut topo: Vec<usize> = (0..n).collect();
        topo.sort_by_key(|&i| (layer_of[i], i));
        for (pos, &orig) in topo.iter().enumerate() {
            by_layer[layer_of[orig]].push(pos);
        }

        // type walk along the rule graph
        let type_names: Vec<&str> = succ.keys().copied().collect();
        let mut walk: Vec<&str> = Vec::with_capacity(n_layers);
        walk.push(type_names[rng.gen_range(0..type_names.len())]);
        for l in 1..n_layers {
            let prev = walk[l - 1];
            match succ.get(prev) {
                Some(options) if !options.is_empty() => {
                    walk.push(options[rng.gen_range(0..options.len())]);
                }
                _ => continue 'retry,
            }
        }

        // rule edges between consecutive layers
        let mut edges: Vec<(usize, usize, u8)> = Vec::new();
        for l in 0..n_layers - 1 {
            let dist = &config.rule_table[&(walk[l].to_owned(), walk[l + 1].to_owned())];
            for &u in &by_layer[l] {
                for &v in &by_layer[l + 1] {
                    if rng.gen_bool(config.edge_probability) {
                        edges.push((u, v, dist.sample(rng)));
                    }
                }
            }
            // every child keeps at least one parent so depth equals layer
            for &v in &by_layer[l + 1] {
                if !edges.iter().any(|&(_, dst, _)| dst == v) {
                    let u = by_layer[l][rng.gen_range(0..by_layer[l].len())];
                    edges.push((u, v, dist.sample(rng)));
                }
            }
        }

        // same-layer noise edges: same-type pairs that contradict the rule
        // table, scored low
        if config.noise_rate > 0.0 {
            for l in 0..n_layers {
                let pair = (walk[l].to_owned(), walk[l].to_owned());
                if config.rule_table.contains_key(&pair) {
                    continue;
                }
                let layer = &by_layer[l];
                for ai in 0..layer.len() {
                    for bi in ai + 1..layer.len() {
                        if rng.gen_bool(config.noise_rate) {
                            edges.push((layer[ai], layer[bi], config.noise_scores.sample(rng)));
                        }
                    }
                }
            }
        }

        let node_id = |pos: usize| format!("n{pos:02}");
        let mut nodes = Vec::with_capacity(n);
        for (pos, &orig) in topo.iter().enumerate() {
            let verb = walk[layer_of[orig]].to_lowercase();
            nodes.push(CegNode {
                id: node_id(pos),
                description: describe(&verb, rng),
                event: None,
            });
        }
        let edges: Vec<CegEdge> = edges
            .into_iter()
            .map(|(u, v, score)| CegEdge {
                src: node_id(u),
                dst: node_id(v),
                score,
            })
            .collect();

        let ceg = Ceg {
            video_id: format!("synth-{index:04}"),
            nodes,
            edges,
        };
        debug_assert!(ceg.is_acyclic());
        debug_assert!(ceg.max_depth().expect("acyclic") >= 2);
        return Ok(ceg);
    }
    Err(SynthError::Unsatisfiable { ceg_index: index })
}

/// Mutual information (nats) between the (cause type, effect type) pair and
/// the weight bucket (strong: w >= 0.75) over all network edges. Strictly
/// positive whenever the corpus carries a planted weight signal.
pub fn planted_signal_mutual_information(nets: &[CausalNetwork]) -> f64 {
    let mut joint: BTreeMap<((String, String), bool), usize> = BTreeMap::new();
    let mut total = 0usize;
    for net in nets {
        for edge in net.edges() {
            let src_ty = net.node(&edge.src).expect("valid edge").type_entity_name();
            let dst_ty = net.node(&edge.dst).expect("valid edge").type_entity_name();
            let strong = edge.weight >= 0.75;
            *joint.entry(((src_ty, dst_ty), strong)).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return 0.0;
    }
    let mut px: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut py: BTreeMap<bool, f64> = BTreeMap::new();
    for (((src, dst), strong), &count) in joint.iter().map(|(k, v)| (k.clone(), v)) {
        let p = count as f64 / total as f64;
        *px.entry((src, dst)).or_default() += p;
        *py.entry(strong).or_default() += p;
    }
    let mut mi = 0.0;
    for (((src, dst), strong), &count) in &joint {
        let pxy = count as f64 / total as f64;
        let marginal = px[&(src.clone(), dst.clone())] * py[strong];
        mi += pxy * (pxy / marginal).ln();
    }
    mi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::network_from_ceg;
    use crate::ingest::preprocess;

    fn small_config(noise: f64, seed: u64) -> SynthConfig {
        SynthConfig::new(20, (4, 7), 0.4, 4, noise, seed).unwrap()
    }

    #[test]
    fn generation_is_deterministic() {
        let config = small_config(0.2, 9);
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corpus_survives_preprocessing_without_cycle_removal() {
        let config = small_config(0.3, 4);
        let cegs = generate(&config).unwrap();
        let n = cegs.len();
        let (kept, report) = preprocess(cegs);
        assert_eq!(report.edges_dropped_cycle, 0);
        assert_eq!(report.nodes_dropped_composite, 0);
        assert_eq!(kept.len(), n);
    }

    #[test]
    fn zero_noise_means_every_edge_follows_a_rule() {
        let config = small_config(0.0, 11);
        let cegs = generate(&config).unwrap();
        let (kept, _) = preprocess(cegs);
        for ceg in &kept {
            let net = network_from_ceg(ceg).unwrap();
            for edge in net.edges() {
                let src_ty = net.node(&edge.src).unwrap().type_entity_name();
                let dst_ty = net.node(&edge.dst).unwrap().type_entity_name();
                assert!(
                    config.rule_table.contains_key(&(src_ty.clone(), dst_ty.clone())),
                    "edge pair ({src_ty}, {dst_ty}) not in rule table"
                );
                assert!(edge.weight >= 0.75, "rule edge scored low");
            }
        }
    }

    #[test]
    fn noisy_corpus_has_planted_signal() {
        let config = small_config(0.3, 2);
        let cegs = generate(&config).unwrap();
        let (kept, _) = preprocess(cegs);
        let nets: Vec<CausalNetwork> = kept.iter().map(|c| network_from_ceg(c).unwrap()).collect();
        let mi = planted_signal_mutual_information(&nets);
        assert!(mi > 0.0, "expected positive mutual information, got {mi}");
    }

    #[test]
    fn descriptions_parse_back_through_the_extractor() {
        let config = small_config(0.2, 5);
        let cegs = generate(&config).unwrap();
        for ceg in &cegs {
            for node in &ceg.nodes {
                match crate::ingest::extract_event(&node.description) {
                    crate::ingest::ExtractOutcome::Event(_) => {}
                    other => panic!("description {:?} gave {other:?}", node.description),
                }
            }
        }
    }

    #[test]
    fn unsatisfiable_when_nodes_cannot_reach_depth_two() {
        let config = SynthConfig {
            nodes_per_ceg: (1, 2),
            ..small_config(0.2, 1)
        };
        assert!(matches!(
            generate(&config),
            Err(SynthError::Unsatisfiable { .. })
        ));
    }
}
