//! Translates preprocessed CEGs into causal knowledge graphs: reified type
//! relations, scene/participant/property context, subgraph projections, and
//! the TSV quad file format.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::model::{
    CausalKG, CausalNetwork, Ceg, EntityId, EntityKind, ModelError, NetworkEdge, NetworkNode,
    Quad, RelationKind, TripleKey,
};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("score {0} outside 1..=5")]
    OutOfRange(u8),
    #[error("CEG {ceg:?} not preprocessed: {reason}")]
    UnpreprocessedInput { ceg: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed quad file at line {line}: {reason}")]
    MalformedQuadLine { line: usize, reason: String },
}

/// Increasingly expressive projections of one source knowledge graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SubgraphView {
    /// Causal relations only.
    C,
    /// Causal relations plus entity types.
    CT,
    /// Causal relations, entity types, and participant/scene/property context.
    CTP,
}

impl SubgraphView {
    pub fn as_str(self) -> &'static str {
        match self {
            SubgraphView::C => "C",
            SubgraphView::CT => "CT",
            SubgraphView::CTP => "CTP",
        }
    }

    pub fn parse(s: &str) -> Option<SubgraphView> {
        match s {
            "C" | "c" => Some(SubgraphView::C),
            "CT" | "ct" => Some(SubgraphView::CT),
            "CTP" | "ctp" => Some(SubgraphView::CTP),
            _ => None,
        }
    }

    pub fn relations(self) -> &'static [RelationKind] {
        match self {
            SubgraphView::C => &RelationKind::CAUSAL,
            SubgraphView::CT => &[
                RelationKind::Causes,
                RelationKind::CausedBy,
                RelationKind::CausesType,
                RelationKind::CausedByType,
                RelationKind::RdfType,
            ],
            SubgraphView::CTP => &RelationKind::ALL,
        }
    }

    pub fn includes(self, relation: RelationKind) -> bool {
        self.relations().contains(&relation)
    }
}

impl std::fmt::Display for SubgraphView {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Size summary of a built graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub entities: usize,
    pub quads: usize,
    pub entity_types: usize,
    pub relations: usize,
}

impl BuildStats {
    pub fn of(kg: &CausalKG) -> BuildStats {
        let entity_types = kg
            .entities()
            .filter(|(_, k)| *k == EntityKind::EventType)
            .count();
        let relations = kg
            .keys()
            .map(|k| k.relation)
            .collect::<BTreeSet<_>>()
            .len();
        BuildStats {
            entities: kg.entity_count(),
            quads: kg.len(),
            entity_types,
            relations,
        }
    }

    pub fn as_pairs(&self) -> Vec<(&'static str, usize)> {
        vec![
            ("entities", self.entities),
            ("quads", self.quads),
            ("entity_types", self.entity_types),
            ("relations", self.relations),
        ]
    }
}

// ---------------------------------------------------------------------------
// Provenance
// ---------------------------------------------------------------------------

/// Network edge that generated a quad, identified by scene and endpoints.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeOrigin {
    pub scene: String,
    pub src: String,
    pub dst: String,
}

/// Map from causal quad keys to the network edges that generated them.
/// Reified type quads can aggregate several edges; context quads have none.
#[derive(Debug, Clone, Default)]
pub struct QuadOrigins {
    map: HashMap<TripleKey, BTreeSet<EdgeOrigin>>,
}

impl QuadOrigins {
    fn record(&mut self, key: TripleKey, origin: EdgeOrigin) {
        self.map.entry(key).or_default().insert(origin);
    }

    pub fn origins(&self, key: &TripleKey) -> Option<&BTreeSet<EdgeOrigin>> {
        self.map.get(key)
    }

    pub fn merge(&mut self, other: QuadOrigins) {
        for (key, origins) in other.map {
            self.map.entry(key).or_default().extend(origins);
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Maps an annotation score 1-5 onto a causal weight via (score - 1) / 4.
pub fn normalize_weight(score: u8) -> Result<f64, BuildError> {
    if !(1..=5).contains(&score) {
        return Err(BuildError::OutOfRange(score));
    }
    Ok(f64::from(score - 1) / 4.0)
}

/// Converts a preprocessed CEG into a causal network. Nodes become event
/// instances named `<video_id>/<node_id>`; scores become weights. Requires
/// parsed events, scores >= 2, and acyclicity.
pub fn network_from_ceg(ceg: &Ceg) -> Result<CausalNetwork, BuildError> {
    let unprocessed = |reason: String| BuildError::UnpreprocessedInput {
        ceg: ceg.video_id.clone(),
        reason,
    };
    let mut nodes = Vec::with_capacity(ceg.nodes.len());
    for node in &ceg.nodes {
        let event = node
            .event
            .as_ref()
            .ok_or_else(|| unprocessed(format!("node {:?} has no parsed event", node.id)))?;
        nodes.push(NetworkNode {
            name: format!("{}/{}", ceg.video_id, node.id),
            event_type: event.event_type.clone(),
            participants: event.participants.clone(),
        });
    }
    let mut edges = Vec::with_capacity(ceg.edges.len());
    for edge in &ceg.edges {
        if edge.score < 2 {
            return Err(unprocessed(format!(
                "edge {}->{} has score {} (zero weight)",
                edge.src, edge.dst, edge.score
            )));
        }
        edges.push(NetworkEdge {
            src: format!("{}/{}", ceg.video_id, edge.src),
            dst: format!("{}/{}", ceg.video_id, edge.dst),
            weight: normalize_weight(edge.score)?,
        });
    }
    let net = CausalNetwork::new(ceg.video_id.clone(), nodes, edges)?;
    if !net.is_acyclic() {
        return Err(unprocessed("graph contains a cycle".to_owned()));
    }
    Ok(net)
}

/// Builds the causal quads of one network: per edge (u, v, w) the four quads
/// ⟨u,causes,v,w⟩, ⟨v,causedBy,u,w⟩, ⟨u,causesType,type(v),w⟩,
/// ⟨v,causedByType,type(u),w⟩, plus ⟨n,rdfType,type(n),1.0⟩ per node. When
/// several edges collapse onto one reified type key, the maximum weight wins.
pub fn kg_from_network(net: &CausalNetwork) -> Result<(CausalKG, QuadOrigins), BuildError> {
    if !net.is_acyclic() {
        return Err(BuildError::Model(ModelError::CyclicGraph));
    }
    let mut kg = CausalKG::new();
    let mut origins = QuadOrigins::default();

    for node in net.nodes() {
        let instance = EntityId::instance(&node.name)?;
        let event_type = EntityId::event_type(node.type_entity_name())?;
        kg.insert_quad(Quad::new(instance, RelationKind::RdfType, event_type, 1.0))?;
    }

    // direction-level quads, one pair per edge
    for edge in net.edges() {
        let origin = EdgeOrigin {
            scene: net.scene().to_owned(),
            src: edge.src.clone(),
            dst: edge.dst.clone(),
        };
        let cause = EntityId::instance(&edge.src)?;
        let effect = EntityId::instance(&edge.dst)?;
        let causes = Quad::new(cause.clone(), RelationKind::Causes, effect.clone(), edge.weight);
        origins.record(causes.key(), origin.clone());
        kg.insert_quad(causes)?;
        let caused_by = Quad::new(effect, RelationKind::CausedBy, cause, edge.weight);
        origins.record(caused_by.key(), origin);
        kg.insert_quad(caused_by)?;
    }

    // reified type-level quads, aggregated by maximum weight
    let mut reified: BTreeMap<TripleKey, f64> = BTreeMap::new();
    for edge in net.edges() {
        let origin = EdgeOrigin {
            scene: net.scene().to_owned(),
            src: edge.src.clone(),
            dst: edge.dst.clone(),
        };
        let src_type = net.node(&edge.src).expect("validated endpoint").type_entity_name();
        let dst_type = net.node(&edge.dst).expect("validated endpoint").type_entity_name();
        let forward = TripleKey::new(edge.src.clone(), RelationKind::CausesType, dst_type);
        let backward = TripleKey::new(edge.dst.clone(), RelationKind::CausedByType, src_type);
        for key in [forward, backward] {
            let slot = reified.entry(key.clone()).or_insert(edge.weight);
            *slot = slot.max(edge.weight);
            origins.record(key, origin.clone());
        }
    }
    for (key, weight) in reified {
        let head = EntityId::instance(&key.head)?;
        let tail = EntityId::event_type(&key.tail)?;
        kg.insert_quad(Quad::new(head, key.relation, tail, weight))?;
    }

    Ok((kg, origins))
}

/// Adds scene/participant/property context: ⟨scene,includes,event⟩ per node,
/// ⟨event,hasParticipant,object⟩ per participant, ⟨object,hasProperty,value⟩
/// per known field. Objects are deduplicated within the scene by
/// (color, shape, material).
pub fn enrich_context(mut kg: CausalKG, net: &CausalNetwork) -> Result<CausalKG, BuildError> {
    if net.nodes().is_empty() {
        return Ok(kg);
    }
    let scene = EntityId::scene(net.scene())?;
    for node in net.nodes() {
        let instance = EntityId::instance(&node.name)?;
        kg.insert_quad(Quad::new(
            scene.clone(),
            RelationKind::Includes,
            instance.clone(),
            1.0,
        ))?;
        for participant in &node.participants {
            let object = EntityId::object(format!("{}/{}", net.scene(), participant.slug()))?;
            kg.insert_quad(Quad::new(
                instance.clone(),
                RelationKind::HasParticipant,
                object.clone(),
                1.0,
            ))?;
            for property in participant.known_properties() {
                let value = EntityId::property_value(property)?;
                kg.insert_quad(Quad::new(
                    object.clone(),
                    RelationKind::HasProperty,
                    value,
                    1.0,
                ))?;
            }
        }
    }
    Ok(kg)
}

/// Builds the full (CTP) knowledge graph of one network.
pub fn build_kg(net: &CausalNetwork) -> Result<(CausalKG, QuadOrigins), BuildError> {
    let (kg, origins) = kg_from_network(net)?;
    Ok((enrich_context(kg, net)?, origins))
}

/// Builds the union graph of a corpus with merged provenance.
pub fn build_corpus_kg(nets: &[CausalNetwork]) -> Result<(CausalKG, QuadOrigins), BuildError> {
    let mut kg = CausalKG::new();
    let mut origins = QuadOrigins::default();
    for net in nets {
        let (part, part_origins) = build_kg(net)?;
        for quad in part.quads() {
            kg.insert_quad(quad)?;
        }
        origins.merge(part_origins);
    }
    Ok((kg, origins))
}

/// Keeps the quads whose relation belongs to the view; entities not referenced
/// by a retained quad are dropped.
pub fn project(kg: &CausalKG, view: SubgraphView) -> CausalKG {
    let mut out = CausalKG::new();
    for quad in kg.quads() {
        if view.includes(quad.relation) {
            out.insert_quad(quad).expect("projection of a valid graph");
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Quad file I/O
// ---------------------------------------------------------------------------

/// Formats a weight with exactly six decimals (round-half-even).
pub fn format_weight(w: f64) -> String {
    format!("{w:.6}")
}

fn quad_line(quad: &Quad) -> String {
    format!(
        "{}\t{}\t{}\t{}",
        quad.head.name(),
        quad.relation,
        quad.tail.name(),
        format_weight(quad.weight)
    )
}

/// Serializes quads one per line: `head TAB relation TAB tail TAB weight`,
/// sorted by key, UTF-8, LF endings.
pub fn export_quads(kg: &CausalKG, path: impl AsRef<Path>) -> Result<(), BuildError> {
    write_quad_list(&kg.sorted_quads(), path)
}

/// Writes an explicit quad list in the given order (split files rely on it).
pub fn write_quad_list(quads: &[Quad], path: impl AsRef<Path>) -> Result<(), BuildError> {
    let mut out = String::new();
    for quad in quads {
        out.push_str(&quad_line(quad));
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Entity kinds are not stored in quad files; they are re-derived from the
/// relation slots each entity occupies (e.g. `causesType` tails are event
/// types, `hasParticipant` tails are objects). Conflicting evidence is an
/// error.
fn infer_kinds(
    raw: &[(usize, String, RelationKind, String, f64)],
) -> Result<HashMap<String, EntityKind>, BuildError> {
    let mut kinds: HashMap<String, EntityKind> = HashMap::new();
    let mut assign = |line: usize, name: &str, kind: EntityKind| -> Result<(), BuildError> {
        match kinds.get(name) {
            Some(&existing) if existing != kind => Err(BuildError::MalformedQuadLine {
                line,
                reason: format!("entity {name:?} used as both {existing} and {kind}"),
            }),
            _ => {
                kinds.insert(name.to_owned(), kind);
                Ok(())
            }
        }
    };
    for (line, head, relation, tail, _) in raw {
        if let Some(kind) = relation.head_kind() {
            assign(*line, head, kind)?;
        }
        if let Some(kind) = relation.tail_kind() {
            assign(*line, tail, kind)?;
        }
    }
    Ok(kinds)
}

fn parse_quad_lines(
    content: &str,
) -> Result<Vec<(usize, String, RelationKind, String, f64)>, BuildError> {
    let mut raw = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(BuildError::MalformedQuadLine {
                line: line_no,
                reason: format!("expected 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let relation =
            RelationKind::parse(fields[1]).ok_or_else(|| BuildError::MalformedQuadLine {
                line: line_no,
                reason: format!("unknown relation {:?}", fields[1]),
            })?;
        let weight: f64 = fields[3]
            .parse()
            .map_err(|e| BuildError::MalformedQuadLine {
                line: line_no,
                reason: format!("bad weight {:?}: {e}", fields[3]),
            })?;
        raw.push((
            line_no,
            fields[0].to_owned(),
            relation,
            fields[2].to_owned(),
            weight,
        ));
    }
    Ok(raw)
}

/// Parses a quad file back into a graph. `#`-prefixed lines are ignored.
pub fn import_quads(path: impl AsRef<Path>) -> Result<CausalKG, BuildError> {
    import_quads_str(&fs::read_to_string(path)?)
}

pub fn import_quads_str(content: &str) -> Result<CausalKG, BuildError> {
    let raw = parse_quad_lines(content)?;
    let kinds = infer_kinds(&raw)?;
    let mut kg = CausalKG::new();
    for (line, head, relation, tail, weight) in raw {
        let wrap = |e: ModelError| BuildError::MalformedQuadLine {
            line,
            reason: e.to_string(),
        };
        let head_kind = kinds[&head];
        let tail_kind = kinds[&tail];
        let head = EntityId::new(head, head_kind).map_err(wrap)?;
        let tail = EntityId::new(tail, tail_kind).map_err(wrap)?;
        kg.insert_quad(Quad::new(head, relation, tail, weight))
            .map_err(wrap)?;
    }
    Ok(kg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest;
    use crate::model::{CegEdge, CegNode};

    fn typed_network(nodes: &[(&str, &str)], edges: &[(&str, &str, f64)]) -> CausalNetwork {
        let nodes = nodes
            .iter()
            .map(|(name, ty)| NetworkNode {
                name: (*name).to_owned(),
                event_type: (*ty).to_owned(),
                participants: vec![],
            })
            .collect();
        let edges = edges
            .iter()
            .map(|(s, d, w)| NetworkEdge {
                src: (*s).to_owned(),
                dst: (*d).to_owned(),
                weight: *w,
            })
            .collect();
        CausalNetwork::new("v", nodes, edges).unwrap()
    }

    #[test]
    fn weight_normalization_endpoints() {
        assert_eq!(normalize_weight(5).unwrap(), 1.0);
        assert_eq!(normalize_weight(1).unwrap(), 0.0);
        assert_eq!(normalize_weight(3).unwrap(), 0.5);
        assert_eq!(normalize_weight(2).unwrap(), 0.25);
        assert_eq!(normalize_weight(4).unwrap(), 0.75);
        assert!(matches!(normalize_weight(0), Err(BuildError::OutOfRange(0))));
        assert!(matches!(normalize_weight(6), Err(BuildError::OutOfRange(6))));
    }

    #[test]
    fn network_from_ceg_requires_events() {
        let ceg = crate::model::Ceg {
            video_id: "v".into(),
            nodes: vec![CegNode {
                id: "A".into(),
                description: "the red cube moves".into(),
                event: None,
            }],
            edges: vec![],
        };
        assert!(matches!(
            network_from_ceg(&ceg),
            Err(BuildError::UnpreprocessedInput { .. })
        ));
    }

    #[test]
    fn network_weights_follow_scores() {
        let ceg = crate::model::Ceg {
            video_id: "v".into(),
            nodes: vec![
                CegNode {
                    id: "A".into(),
                    description: "the red cube moves".into(),
                    event: None,
                },
                CegNode {
                    id: "B".into(),
                    description: "the blue sphere rolls".into(),
                    event: None,
                },
                CegNode {
                    id: "C".into(),
                    description: "the green cylinder slides".into(),
                    event: None,
                },
            ],
            edges: vec![
                CegEdge {
                    src: "A".into(),
                    dst: "B".into(),
                    score: 2,
                },
                CegEdge {
                    src: "B".into(),
                    dst: "C".into(),
                    score: 4,
                },
            ],
        };
        let (cegs, _) = ingest::preprocess(vec![ceg]);
        let net = network_from_ceg(&cegs[0]).unwrap();
        let weights: Vec<f64> = net.edges().iter().map(|e| e.weight).collect();
        assert_eq!(weights, vec![0.25, 0.75]);
        assert_eq!(net.nodes()[0].name, "v/A");
    }

    #[test]
    fn single_edge_generates_four_causal_quads() {
        let net = typed_network(&[("v/E", "bump"), ("v/A", "move")], &[("v/E", "v/A", 1.0)]);
        let (kg, origins) = kg_from_network(&net).unwrap();
        for (h, r, t) in [
            ("v/E", RelationKind::Causes, "v/A"),
            ("v/A", RelationKind::CausedBy, "v/E"),
            ("v/E", RelationKind::CausesType, "Move"),
            ("v/A", RelationKind::CausedByType, "Bump"),
        ] {
            let key = TripleKey::new(h, r, t);
            assert_eq!(kg.weight(&key), Some(1.0), "missing {key}");
            assert_eq!(origins.origins(&key).unwrap().len(), 1);
        }
        // plus one rdfType quad per node
        assert_eq!(kg.len(), 6);
        assert!(kg.causal_inverse_violations().is_empty());
    }

    #[test]
    fn fan_out_yields_two_causes_type_quads() {
        let net = typed_network(
            &[("v/A", "move"), ("v/C", "slide"), ("v/G", "collide")],
            &[("v/A", "v/C", 0.75), ("v/A", "v/G", 1.0)],
        );
        let (kg, _) = kg_from_network(&net).unwrap();
        let quads = kg.quads_by_head("v/A", RelationKind::CausesType);
        let mut tails: Vec<(String, f64)> = quads
            .iter()
            .map(|q| (q.tail.name().to_owned(), q.weight))
            .collect();
        tails.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(tails, vec![("Collide".to_owned(), 1.0), ("Slide".to_owned(), 0.75)]);
    }

    #[test]
    fn reified_duplicates_keep_maximum_weight() {
        let net = typed_network(
            &[("v/u", "move"), ("v/v1", "slide"), ("v/v2", "slide")],
            &[("v/u", "v/v1", 0.5), ("v/u", "v/v2", 0.75)],
        );
        let (kg, origins) = kg_from_network(&net).unwrap();
        let key = TripleKey::new("v/u", RelationKind::CausesType, "Slide");
        assert_eq!(kg.weight(&key), Some(0.75));
        assert_eq!(origins.origins(&key).unwrap().len(), 2);
    }

    #[test]
    fn context_quads_added_and_objects_deduplicated() {
        use crate::model::{Color, Material, ObjectRef, Shape};
        let brown_cube = ObjectRef::new(Color::Brown, Shape::Cube, Material::Unknown);
        let purple_cyl = ObjectRef::new(Color::Purple, Shape::Cylinder, Material::Unknown);
        let nodes = vec![
            NetworkNode {
                name: "v/A".into(),
                event_type: "move".into(),
                participants: vec![brown_cube],
            },
            NetworkNode {
                name: "v/G".into(),
                event_type: "collide".into(),
                participants: vec![brown_cube, purple_cyl],
            },
        ];
        let net = CausalNetwork::new(
            "v",
            nodes,
            vec![NetworkEdge {
                src: "v/A".into(),
                dst: "v/G".into(),
                weight: 1.0,
            }],
        )
        .unwrap();
        let (kg, _) = build_kg(&net).unwrap();
        for (h, r, t) in [
            ("v", RelationKind::Includes, "v/A"),
            ("v", RelationKind::Includes, "v/G"),
            ("v/G", RelationKind::HasParticipant, "v/brown-cube"),
            ("v/G", RelationKind::HasParticipant, "v/purple-cylinder"),
            ("v/A", RelationKind::HasParticipant, "v/brown-cube"),
            ("v/brown-cube", RelationKind::HasProperty, "brown"),
            ("v/brown-cube", RelationKind::HasProperty, "cube"),
        ] {
            assert!(kg.contains(&TripleKey::new(h, r, t)), "missing {h} {r} {t}");
        }
        // brown cube appears once as an entity despite two mentions
        assert_eq!(kg.entity_kind("v/brown-cube"), Some(EntityKind::Object));
        // object with two known fields gets exactly two hasProperty quads
        assert_eq!(kg.quads_by_head("v/brown-cube", RelationKind::HasProperty).len(), 2);
    }

    #[test]
    fn enrich_of_empty_network_is_identity() {
        let net = typed_network(&[], &[]);
        let (kg, _) = kg_from_network(&net).unwrap();
        let before = kg.clone();
        let after = enrich_context(kg, &net).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn views_are_nested() {
        let net = typed_network(
            &[("v/E", "bump"), ("v/A", "move")],
            &[("v/E", "v/A", 1.0)],
        );
        let (kg, _) = build_kg(&net).unwrap();
        let c = project(&kg, SubgraphView::C);
        let ct = project(&kg, SubgraphView::CT);
        let ctp = project(&kg, SubgraphView::CTP);
        assert!(c.len() < ct.len());
        assert!(ct.len() <= ctp.len());
        for quad in c.quads() {
            assert!(ct.contains(&quad.key()));
        }
        for quad in ct.quads() {
            assert!(ctp.contains(&quad.key()));
        }
        assert!(c.keys().all(|k| k.relation.is_causal()));
        assert!(c.causal_inverse_violations().is_empty());
    }

    #[test]
    fn view_ct_without_types_equals_c() {
        // a graph with causal quads only
        let net = typed_network(&[("v/a", "move"), ("v/b", "slide")], &[("v/a", "v/b", 0.5)]);
        let (kg, _) = kg_from_network(&net).unwrap();
        let causal_only = project(&kg, SubgraphView::C);
        let ct = project(&causal_only, SubgraphView::CT);
        assert_eq!(ct, causal_only);
    }

    #[test]
    fn quad_line_format_is_fixed() {
        let quad = Quad::new(
            EntityId::instance("E").unwrap(),
            RelationKind::Causes,
            EntityId::instance("A").unwrap(),
            1.0,
        );
        assert_eq!(quad_line(&quad), "E\tcauses\tA\t1.000000");
    }

    #[test]
    fn export_import_round_trip() {
        let net = typed_network(
            &[("v/E", "bump"), ("v/A", "move"), ("v/C", "slide")],
            &[("v/E", "v/A", 1.0), ("v/A", "v/C", 0.75)],
        );
        let (kg, _) = build_kg(&net).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kg.tsv");
        export_quads(&kg, &path).unwrap();
        let back = import_quads(&path).unwrap();
        assert_eq!(back, kg);
    }

    #[test]
    fn empty_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.tsv");
        export_quads(&CausalKG::new(), &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");
        let back = import_quads(&path).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn malformed_quad_line_reports_line_number() {
        let content = "a\tcauses\tb\t0.500000\nbroken line\n";
        match import_quads_str(content) {
            Err(BuildError::MalformedQuadLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected MalformedQuadLine, got {other:?}"),
        }
    }

    #[test]
    fn comments_ignored_on_import() {
        let content = "# preamble\na\tcauses\tb\t0.500000\nb\tcausedBy\ta\t0.500000\n";
        let kg = import_quads_str(content).unwrap();
        assert_eq!(kg.len(), 2);
        assert!(kg.causal_inverse_violations().is_empty());
    }
}
