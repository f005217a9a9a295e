//! Shared data model: entities, relations, quads, causal knowledge graphs,
//! causal event graphs, and causal networks with their graph utilities.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::Digraph;

/// Errors raised by the data model.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("graph contains a cycle")]
    CyclicGraph,
    #[error("invalid entity name {name:?}: {reason}")]
    InvalidEntityName { name: String, reason: &'static str },
    #[error("entity {name:?} already registered as {existing} but used as {new}")]
    KindConflict {
        name: String,
        existing: EntityKind,
        new: EntityKind,
    },
    #[error("duplicate quad {key} with conflicting weights {existing} and {new}")]
    DuplicateKey {
        key: TripleKey,
        existing: f64,
        new: f64,
    },
    #[error("invalid quad {key}: {reason}")]
    InvalidQuad { key: TripleKey, reason: String },
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
}

// ---------------------------------------------------------------------------
// Entities and relations
// ---------------------------------------------------------------------------

/// What an entity denotes in the knowledge graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    EventInstance,
    EventType,
    Object,
    PropertyValue,
    Scene,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::EventInstance => "event-instance",
            EntityKind::EventType => "event-type",
            EntityKind::Object => "object",
            EntityKind::PropertyValue => "property-value",
            EntityKind::Scene => "scene",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Named entity. Names are export-safe: non-empty, no whitespace, and no
/// leading `#` (which would collide with quad-file comments).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId {
    name: String,
    kind: EntityKind,
}

pub(crate) fn check_entity_name(name: &str) -> Result<(), ModelError> {
    let reason = if name.is_empty() {
        Some("empty")
    } else if name.contains([' ', '\t', '\n', '\r']) {
        Some("contains whitespace")
    } else if name.starts_with('#') {
        Some("starts with '#'")
    } else {
        None
    };
    match reason {
        Some(reason) => Err(ModelError::InvalidEntityName {
            name: name.to_owned(),
            reason,
        }),
        None => Ok(()),
    }
}

impl EntityId {
    pub fn new(name: impl Into<String>, kind: EntityKind) -> Result<Self, ModelError> {
        let name = name.into();
        check_entity_name(&name)?;
        Ok(EntityId { name, kind })
    }

    pub fn instance(name: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(name, EntityKind::EventInstance)
    }

    pub fn event_type(name: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(name, EntityKind::EventType)
    }

    pub fn object(name: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(name, EntityKind::Object)
    }

    pub fn property_value(name: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(name, EntityKind::PropertyValue)
    }

    pub fn scene(name: impl Into<String>) -> Result<Self, ModelError> {
        Self::new(name, EntityKind::Scene)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> EntityKind {
        self.kind
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Relation vocabulary. The first four are the causal relations; the rest
/// carry scene/participant/property context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    Causes,
    CausedBy,
    CausesType,
    CausedByType,
    RdfType,
    Includes,
    HasParticipant,
    HasProperty,
}

impl RelationKind {
    pub const ALL: [RelationKind; 8] = [
        RelationKind::Causes,
        RelationKind::CausedBy,
        RelationKind::CausesType,
        RelationKind::CausedByType,
        RelationKind::RdfType,
        RelationKind::Includes,
        RelationKind::HasParticipant,
        RelationKind::HasProperty,
    ];

    pub const CAUSAL: [RelationKind; 4] = [
        RelationKind::Causes,
        RelationKind::CausedBy,
        RelationKind::CausesType,
        RelationKind::CausedByType,
    ];

    pub fn is_causal(self) -> bool {
        matches!(
            self,
            RelationKind::Causes
                | RelationKind::CausedBy
                | RelationKind::CausesType
                | RelationKind::CausedByType
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Causes => "causes",
            RelationKind::CausedBy => "causedBy",
            RelationKind::CausesType => "causesType",
            RelationKind::CausedByType => "causedByType",
            RelationKind::RdfType => "rdfType",
            RelationKind::Includes => "includes",
            RelationKind::HasParticipant => "hasParticipant",
            RelationKind::HasProperty => "hasProperty",
        }
    }

    pub fn parse(s: &str) -> Option<RelationKind> {
        RelationKind::ALL.into_iter().find(|r| r.as_str() == s)
    }

    /// Entity kind required in the head slot, if the model pins one.
    pub fn head_kind(self) -> Option<EntityKind> {
        match self {
            RelationKind::Causes | RelationKind::CausedBy => Some(EntityKind::EventInstance),
            RelationKind::CausesType | RelationKind::CausedByType => {
                Some(EntityKind::EventInstance)
            }
            RelationKind::RdfType => Some(EntityKind::EventInstance),
            RelationKind::Includes => Some(EntityKind::Scene),
            RelationKind::HasParticipant => Some(EntityKind::EventInstance),
            RelationKind::HasProperty => Some(EntityKind::Object),
        }
    }

    /// Entity kind required in the tail slot, if the model pins one.
    pub fn tail_kind(self) -> Option<EntityKind> {
        match self {
            RelationKind::Causes | RelationKind::CausedBy => Some(EntityKind::EventInstance),
            RelationKind::CausesType | RelationKind::CausedByType => Some(EntityKind::EventType),
            RelationKind::RdfType => Some(EntityKind::EventType),
            RelationKind::Includes => Some(EntityKind::EventInstance),
            RelationKind::HasParticipant => Some(EntityKind::Object),
            RelationKind::HasProperty => Some(EntityKind::PropertyValue),
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---------------------------------------------------------------------------
// Quads
// ---------------------------------------------------------------------------

/// (head, relation, tail) lookup key; at most one weight per key in a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleKey {
    pub head: String,
    pub relation: RelationKind,
    pub tail: String,
}

impl TripleKey {
    pub fn new(head: impl Into<String>, relation: RelationKind, tail: impl Into<String>) -> Self {
        TripleKey {
            head: head.into(),
            relation,
            tail: tail.into(),
        }
    }
}

impl fmt::Display for TripleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

/// Weighted edge of the knowledge graph. Non-causal relations always carry
/// weight 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Quad {
    pub head: EntityId,
    pub relation: RelationKind,
    pub tail: EntityId,
    pub weight: f64,
}

impl Quad {
    pub fn new(head: EntityId, relation: RelationKind, tail: EntityId, weight: f64) -> Self {
        Quad {
            head,
            relation,
            tail,
            weight,
        }
    }

    pub fn key(&self) -> TripleKey {
        TripleKey::new(self.head.name(), self.relation, self.tail.name())
    }
}

// ---------------------------------------------------------------------------
// Causal knowledge graph
// ---------------------------------------------------------------------------

/// Entity/quad store with by-head and by-tail lookup indexes.
///
/// Immutable once construction finishes; all accessors take `&self`, so the
/// graph is safe to share across threads for reads.
#[derive(Debug, Clone, Default)]
pub struct CausalKG {
    entities: IndexMap<String, EntityKind>,
    quads: IndexMap<TripleKey, f64>,
    by_head: HashMap<(String, RelationKind), Vec<usize>>,
    by_tail: HashMap<(String, RelationKind), Vec<usize>>,
}

impl PartialEq for CausalKG {
    fn eq(&self, other: &Self) -> bool {
        self.entities == other.entities && self.quads == other.quads
    }
}

impl CausalKG {
    pub fn new() -> Self {
        CausalKG::default()
    }

    /// Registers an entity. Returns `false` when it was already present.
    pub fn insert_entity(&mut self, name: &str, kind: EntityKind) -> Result<bool, ModelError> {
        check_entity_name(name)?;
        match self.entities.get(name) {
            Some(&existing) if existing == kind => Ok(false),
            Some(&existing) => Err(ModelError::KindConflict {
                name: name.to_owned(),
                existing,
                new: kind,
            }),
            None => {
                self.entities.insert(name.to_owned(), kind);
                Ok(true)
            }
        }
    }

    /// Inserts a quad, registering its entities. Re-inserting an identical
    /// quad is a no-op; the same key with a different weight is rejected.
    pub fn insert_quad(&mut self, quad: Quad) -> Result<bool, ModelError> {
        let key = quad.key();
        if !quad.weight.is_finite() || !(0.0..=1.0).contains(&quad.weight) {
            return Err(ModelError::InvalidQuad {
                key,
                reason: format!("weight {} outside [0,1]", quad.weight),
            });
        }
        if !quad.relation.is_causal() && quad.weight != 1.0 {
            return Err(ModelError::InvalidQuad {
                key,
                reason: format!(
                    "non-causal relation {} requires weight 1.0, got {}",
                    quad.relation, quad.weight
                ),
            });
        }
        if let Some(required) = quad.relation.head_kind() {
            if quad.head.kind() != required {
                return Err(ModelError::InvalidQuad {
                    key,
                    reason: format!(
                        "head of {} must be {}, got {}",
                        quad.relation,
                        required,
                        quad.head.kind()
                    ),
                });
            }
        }
        if let Some(required) = quad.relation.tail_kind() {
            if quad.tail.kind() != required {
                return Err(ModelError::InvalidQuad {
                    key,
                    reason: format!(
                        "tail of {} must be {}, got {}",
                        quad.relation,
                        required,
                        quad.tail.kind()
                    ),
                });
            }
        }
        if let Some(&existing) = self.quads.get(&key) {
            if existing == quad.weight {
                return Ok(false);
            }
            return Err(ModelError::DuplicateKey {
                key,
                existing,
                new: quad.weight,
            });
        }
        self.insert_entity(quad.head.name(), quad.head.kind())?;
        self.insert_entity(quad.tail.name(), quad.tail.kind())?;
        let idx = self.quads.len();
        self.by_head
            .entry((key.head.clone(), key.relation))
            .or_default()
            .push(idx);
        self.by_tail
            .entry((key.tail.clone(), key.relation))
            .or_default()
            .push(idx);
        self.quads.insert(key, quad.weight);
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn entity_kind(&self, name: &str) -> Option<EntityKind> {
        self.entities.get(name).copied()
    }

    pub fn contains(&self, key: &TripleKey) -> bool {
        self.quads.contains_key(key)
    }

    pub fn weight(&self, key: &TripleKey) -> Option<f64> {
        self.quads.get(key).copied()
    }

    /// Entities in insertion order.
    pub fn entities(&self) -> impl Iterator<Item = (&str, EntityKind)> + '_ {
        self.entities.iter().map(|(n, &k)| (n.as_str(), k))
    }

    /// Names of all entities of one kind, sorted.
    pub fn entities_of_kind(&self, kind: EntityKind) -> Vec<String> {
        let mut names: Vec<String> = self
            .entities
            .iter()
            .filter(|(_, &k)| k == kind)
            .map(|(n, _)| n.clone())
            .collect();
        names.sort();
        names
    }

    fn quad_at(&self, idx: usize) -> Quad {
        let (key, &weight) = self.quads.get_index(idx).expect("index in range");
        self.materialize(key, weight)
    }

    fn materialize(&self, key: &TripleKey, weight: f64) -> Quad {
        let head_kind = self.entities[&key.head];
        let tail_kind = self.entities[&key.tail];
        Quad {
            head: EntityId {
                name: key.head.clone(),
                kind: head_kind,
            },
            relation: key.relation,
            tail: EntityId {
                name: key.tail.clone(),
                kind: tail_kind,
            },
            weight,
        }
    }

    /// Quads in insertion order.
    pub fn quads(&self) -> impl Iterator<Item = Quad> + '_ {
        self.quads.iter().map(|(k, &w)| self.materialize(k, w))
    }

    pub fn keys(&self) -> impl Iterator<Item = &TripleKey> + '_ {
        self.quads.keys()
    }

    /// Quads sorted by (head, relation, tail); the canonical export order.
    pub fn sorted_quads(&self) -> Vec<Quad> {
        let mut keys: Vec<&TripleKey> = self.quads.keys().collect();
        keys.sort();
        keys.into_iter()
            .map(|k| self.materialize(k, self.quads[k]))
            .collect()
    }

    pub fn quads_by_head(&self, head: &str, relation: RelationKind) -> Vec<Quad> {
        self.by_head
            .get(&(head.to_owned(), relation))
            .map(|v| v.iter().map(|&i| self.quad_at(i)).collect())
            .unwrap_or_default()
    }

    pub fn quads_by_tail(&self, tail: &str, relation: RelationKind) -> Vec<Quad> {
        self.by_tail
            .get(&(tail.to_owned(), relation))
            .map(|v| v.iter().map(|&i| self.quad_at(i)).collect())
            .unwrap_or_default()
    }

    /// Keys of `causes`/`causedBy` quads whose weight-equal inverse is
    /// missing. Empty on every graph produced by the builder.
    pub fn causal_inverse_violations(&self) -> Vec<TripleKey> {
        let mut bad = Vec::new();
        for (key, &w) in &self.quads {
            let inverse = match key.relation {
                RelationKind::Causes => {
                    TripleKey::new(key.tail.clone(), RelationKind::CausedBy, key.head.clone())
                }
                RelationKind::CausedBy => {
                    TripleKey::new(key.tail.clone(), RelationKind::Causes, key.head.clone())
                }
                _ => continue,
            };
            if self.weight(&inverse) != Some(w) {
                bad.push(key.clone());
            }
        }
        bad.sort();
        bad
    }
}

// ---------------------------------------------------------------------------
// Parsed events and object references
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Blue,
    Red,
    Yellow,
    Green,
    Purple,
    Gray,
    Cyan,
    Brown,
    Unknown,
}

impl Color {
    pub const CANONICAL: [Color; 8] = [
        Color::Blue,
        Color::Red,
        Color::Yellow,
        Color::Green,
        Color::Purple,
        Color::Gray,
        Color::Cyan,
        Color::Brown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Blue => "blue",
            Color::Red => "red",
            Color::Yellow => "yellow",
            Color::Green => "green",
            Color::Purple => "purple",
            Color::Gray => "gray",
            Color::Cyan => "cyan",
            Color::Brown => "brown",
            Color::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Sphere,
    Cube,
    Cylinder,
    Unknown,
}

impl Shape {
    pub const CANONICAL: [Shape; 3] = [Shape::Sphere, Shape::Cube, Shape::Cylinder];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Sphere => "sphere",
            Shape::Cube => "cube",
            Shape::Cylinder => "cylinder",
            Shape::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Material {
    Metal,
    Rubber,
    Unknown,
}

impl Material {
    pub const CANONICAL: [Material; 2] = [Material::Metal, Material::Rubber];

    pub fn as_str(self) -> &'static str {
        match self {
            Material::Metal => "metal",
            Material::Rubber => "rubber",
            Material::Unknown => "unknown",
        }
    }
}

/// Participating object, described by whichever of color/shape/material the
/// node description pinned down. At least one field is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectRef {
    pub color: Color,
    pub shape: Shape,
    pub material: Material,
}

impl ObjectRef {
    pub fn new(color: Color, shape: Shape, material: Material) -> Self {
        ObjectRef {
            color,
            shape,
            material,
        }
    }

    pub fn is_fully_unknown(&self) -> bool {
        self.color == Color::Unknown
            && self.shape == Shape::Unknown
            && self.material == Material::Unknown
    }

    /// Known property values in color, shape, material order.
    pub fn known_properties(&self) -> Vec<&'static str> {
        let mut props = Vec::new();
        if self.color != Color::Unknown {
            props.push(self.color.as_str());
        }
        if self.shape != Shape::Unknown {
            props.push(self.shape.as_str());
        }
        if self.material != Material::Unknown {
            props.push(self.material.as_str());
        }
        props
    }

    /// Entity-name fragment, e.g. `brown-cube` or `red-metal-sphere`.
    pub fn slug(&self) -> String {
        self.known_properties().join("-")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventArity {
    Singular,
    Binary,
}

impl EventArity {
    pub fn participant_count(self) -> usize {
        match self {
            EventArity::Singular => 1,
            EventArity::Binary => 2,
        }
    }
}

/// Single event extracted from a node description.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedEvent {
    /// Canonical verb lemma, e.g. `collide`.
    pub event_type: String,
    pub arity: EventArity,
    pub participants: Vec<ObjectRef>,
}

impl ParsedEvent {
    /// Capitalized event-type entity name, e.g. `Collide`.
    pub fn type_entity_name(&self) -> String {
        let mut chars = self.event_type.chars();
        match chars.next() {
            Some(c) => c.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Causal event graphs
// ---------------------------------------------------------------------------

/// Node of a raw causal event graph: an annotated event description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CegNode {
    pub id: String,
    pub description: String,
    /// Filled by preprocessing; absent in the canonical file schema.
    #[serde(skip)]
    pub event: Option<ParsedEvent>,
}

/// Directed edge scored 1-5 for causal responsibility.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CegEdge {
    pub src: String,
    pub dst: String,
    pub score: u8,
}

/// Raw annotated causal event graph for one video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ceg {
    pub video_id: String,
    pub nodes: Vec<CegNode>,
    pub edges: Vec<CegEdge>,
}

impl Ceg {
    /// Index-based digraph over this CEG's nodes, with the id-to-index map.
    pub(crate) fn digraph(&self) -> (Digraph, HashMap<&str, usize>) {
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut g = Digraph::new(self.nodes.len());
        for e in &self.edges {
            g.add_edge(index[e.src.as_str()], index[e.dst.as_str()]);
        }
        (g, index)
    }

    pub fn is_acyclic(&self) -> bool {
        self.digraph().0.is_acyclic()
    }

    /// Longest-path depth of the deepest node; `None` when cyclic.
    pub fn max_depth(&self) -> Option<usize> {
        let (g, _) = self.digraph();
        g.longest_depths().map(|d| d.into_iter().max().unwrap_or(0))
    }
}

// ---------------------------------------------------------------------------
// Causal networks
// ---------------------------------------------------------------------------

/// Typed event node of a causal network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkNode {
    /// Entity name, namespaced as `<video_id>/<node_id>`.
    pub name: String,
    /// Canonical event-type lemma, e.g. `collide`.
    pub event_type: String,
    pub participants: Vec<ObjectRef>,
}

impl NetworkNode {
    /// Capitalized event-type entity name.
    pub fn type_entity_name(&self) -> String {
        let mut chars = self.event_type.chars();
        match chars.next() {
            Some(c) => c.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    }
}

/// Weighted cause-to-effect edge; weights live in (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkEdge {
    pub src: String,
    pub dst: String,
    pub weight: f64,
}

/// Preprocessed weighted DAG of typed event instances.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalNetwork {
    scene: String,
    nodes: Vec<NetworkNode>,
    edges: Vec<NetworkEdge>,
    index: HashMap<String, usize>,
}

impl CausalNetwork {
    pub fn new(
        scene: impl Into<String>,
        nodes: Vec<NetworkNode>,
        edges: Vec<NetworkEdge>,
    ) -> Result<Self, ModelError> {
        let scene = scene.into();
        check_entity_name(&scene)?;
        let mut index = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            check_entity_name(&node.name)?;
            if index.insert(node.name.clone(), i).is_some() {
                return Err(ModelError::InvalidNetwork(format!(
                    "duplicate node {:?}",
                    node.name
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if !index.contains_key(&e.src) {
                return Err(ModelError::UnknownEntity(e.src.clone()));
            }
            if !index.contains_key(&e.dst) {
                return Err(ModelError::UnknownEntity(e.dst.clone()));
            }
            if !e.weight.is_finite() || e.weight <= 0.0 || e.weight > 1.0 {
                return Err(ModelError::InvalidNetwork(format!(
                    "edge {}->{} weight {} outside (0,1]",
                    e.src, e.dst, e.weight
                )));
            }
            if !seen.insert((e.src.clone(), e.dst.clone())) {
                return Err(ModelError::InvalidNetwork(format!(
                    "duplicate edge {}->{}",
                    e.src, e.dst
                )));
            }
        }
        Ok(CausalNetwork {
            scene,
            nodes,
            edges,
            index,
        })
    }

    pub fn scene(&self) -> &str {
        &self.scene
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }

    pub fn node(&self, name: &str) -> Option<&NetworkNode> {
        self.index.get(name).map(|&i| &self.nodes[i])
    }

    fn digraph(&self) -> Digraph {
        let mut g = Digraph::new(self.nodes.len());
        for e in &self.edges {
            g.add_edge(self.index[&e.src], self.index[&e.dst]);
        }
        g
    }

    /// True iff a topological order of all nodes exists.
    pub fn is_acyclic(&self) -> bool {
        self.digraph().is_acyclic()
    }

    /// Nodes with in-degree zero, in node order.
    pub fn roots(&self) -> Result<Vec<&str>, ModelError> {
        let g = self.digraph();
        if !g.is_acyclic() {
            return Err(ModelError::CyclicGraph);
        }
        Ok(g.roots()
            .into_iter()
            .map(|i| self.nodes[i].name.as_str())
            .collect())
    }

    /// Longest-path depth from any root, per node name; roots have depth 0.
    pub fn node_depths(&self) -> Result<std::collections::BTreeMap<String, usize>, ModelError> {
        let depths = self.digraph().longest_depths().ok_or(ModelError::CyclicGraph)?;
        Ok(self
            .nodes
            .iter()
            .zip(depths)
            .map(|(n, d)| (n.name.clone(), d))
            .collect())
    }

    pub fn max_depth(&self) -> Result<usize, ModelError> {
        let depths = self.digraph().longest_depths().ok_or(ModelError::CyclicGraph)?;
        Ok(depths.into_iter().max().unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn untyped_network(names: &[&str], edges: &[(&str, &str)]) -> CausalNetwork {
        let nodes = names
            .iter()
            .map(|n| NetworkNode {
                name: (*n).to_owned(),
                event_type: "move".to_owned(),
                participants: vec![],
            })
            .collect();
        let edges = edges
            .iter()
            .map(|(s, d)| NetworkEdge {
                src: (*s).to_owned(),
                dst: (*d).to_owned(),
                weight: 0.5,
            })
            .collect();
        CausalNetwork::new("t", nodes, edges).unwrap()
    }

    /// The worked example edge set: E->A, E->G, E->C, A->C, A->G, G->C, C->H.
    pub(crate) fn example_network() -> CausalNetwork {
        untyped_network(
            &["E", "A", "G", "C", "H"],
            &[
                ("E", "A"),
                ("E", "G"),
                ("E", "C"),
                ("A", "C"),
                ("A", "G"),
                ("G", "C"),
                ("C", "H"),
            ],
        )
    }

    #[test]
    fn empty_network_is_acyclic() {
        let net = untyped_network(&[], &[]);
        assert!(net.is_acyclic());
    }

    #[test]
    fn three_cycle_detected() {
        let net = untyped_network(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("C", "A")]);
        assert!(!net.is_acyclic());
        assert!(matches!(net.roots(), Err(ModelError::CyclicGraph)));
        assert!(matches!(net.node_depths(), Err(ModelError::CyclicGraph)));
    }

    #[test]
    fn example_edge_set_is_acyclic_with_single_root() {
        let net = example_network();
        assert!(net.is_acyclic());
        assert_eq!(net.roots().unwrap(), vec!["E"]);
    }

    #[test]
    fn single_node_is_its_own_root_at_depth_zero() {
        let net = untyped_network(&["N"], &[]);
        assert_eq!(net.roots().unwrap(), vec!["N"]);
        assert_eq!(net.node_depths().unwrap()["N"], 0);
    }

    #[test]
    fn disjoint_chains_have_two_roots() {
        let net = untyped_network(&["A", "B", "C", "D"], &[("A", "B"), ("C", "D")]);
        let mut roots = net.roots().unwrap();
        roots.sort();
        assert_eq!(roots, vec!["A", "C"]);
    }

    #[test]
    fn example_depths_use_longest_paths() {
        let net = example_network();
        let depths = net.node_depths().unwrap();
        let expected = [("E", 0), ("A", 1), ("G", 2), ("C", 3), ("H", 4)];
        for (name, d) in expected {
            assert_eq!(depths[name], d, "depth of {name}");
        }
    }

    #[test]
    fn chain_depths() {
        let net = untyped_network(&["A", "B", "C"], &[("A", "B"), ("B", "C")]);
        let depths = net.node_depths().unwrap();
        assert_eq!(depths["A"], 0);
        assert_eq!(depths["B"], 1);
        assert_eq!(depths["C"], 2);
    }

    #[test]
    fn entity_names_reject_whitespace() {
        assert!(EntityId::instance("video/A").is_ok());
        assert!(EntityId::instance("has space").is_err());
        assert!(EntityId::instance("tab\tname").is_err());
        assert!(EntityId::instance("nl\nname").is_err());
        assert!(EntityId::instance("").is_err());
        assert!(EntityId::instance("#lead").is_err());
    }

    #[test]
    fn kg_rejects_kind_conflicts_and_duplicate_weights() {
        let mut kg = CausalKG::new();
        let a = EntityId::instance("a").unwrap();
        let b = EntityId::instance("b").unwrap();
        kg.insert_quad(Quad::new(a.clone(), RelationKind::Causes, b.clone(), 0.5))
            .unwrap();
        // same key, same weight: idempotent
        assert!(!kg
            .insert_quad(Quad::new(a.clone(), RelationKind::Causes, b.clone(), 0.5))
            .unwrap());
        // same key, new weight: rejected
        assert!(matches!(
            kg.insert_quad(Quad::new(a.clone(), RelationKind::Causes, b.clone(), 0.75)),
            Err(ModelError::DuplicateKey { .. })
        ));
        // "a" reused with another kind: rejected
        assert!(matches!(
            kg.insert_entity("a", EntityKind::EventType),
            Err(ModelError::KindConflict { .. })
        ));
    }

    #[test]
    fn kg_rejects_weighted_context_quads() {
        let mut kg = CausalKG::new();
        let n = EntityId::instance("n").unwrap();
        let t = EntityId::event_type("Move").unwrap();
        assert!(kg
            .insert_quad(Quad::new(n.clone(), RelationKind::RdfType, t.clone(), 0.5))
            .is_err());
        assert!(kg
            .insert_quad(Quad::new(n, RelationKind::RdfType, t, 1.0))
            .is_ok());
    }

    #[test]
    fn kg_rejects_kind_violations_in_slots() {
        let mut kg = CausalKG::new();
        let n = EntityId::instance("n").unwrap();
        let t = EntityId::event_type("Move").unwrap();
        // causes must link two event instances
        assert!(kg
            .insert_quad(Quad::new(n.clone(), RelationKind::Causes, t.clone(), 0.5))
            .is_err());
        // causesType tail must be an event type
        assert!(kg
            .insert_quad(Quad::new(n.clone(), RelationKind::CausesType, n.clone(), 0.5))
            .is_err());
    }

    #[test]
    fn inverse_violations_found() {
        let mut kg = CausalKG::new();
        let a = EntityId::instance("a").unwrap();
        let b = EntityId::instance("b").unwrap();
        kg.insert_quad(Quad::new(a.clone(), RelationKind::Causes, b.clone(), 0.5))
            .unwrap();
        assert_eq!(kg.causal_inverse_violations().len(), 1);
        kg.insert_quad(Quad::new(b, RelationKind::CausedBy, a, 0.5))
            .unwrap();
        assert!(kg.causal_inverse_violations().is_empty());
    }

    #[test]
    fn indexes_agree_with_quad_set() {
        let mut kg = CausalKG::new();
        let a = EntityId::instance("a").unwrap();
        let b = EntityId::instance("b").unwrap();
        let c = EntityId::instance("c").unwrap();
        kg.insert_quad(Quad::new(a.clone(), RelationKind::Causes, b.clone(), 0.5))
            .unwrap();
        kg.insert_quad(Quad::new(a.clone(), RelationKind::Causes, c.clone(), 0.75))
            .unwrap();
        kg.insert_quad(Quad::new(b.clone(), RelationKind::Causes, c.clone(), 1.0))
            .unwrap();
        let by_head = kg.quads_by_head("a", RelationKind::Causes);
        assert_eq!(by_head.len(), 2);
        let by_tail = kg.quads_by_tail("c", RelationKind::Causes);
        assert_eq!(by_tail.len(), 2);
        assert!(kg.quads_by_head("c", RelationKind::Causes).is_empty());
    }

    #[test]
    fn object_slug_skips_unknown_fields() {
        let full = ObjectRef::new(Color::Red, Shape::Cube, Material::Metal);
        assert_eq!(full.slug(), "red-cube-metal");
        let partial = ObjectRef::new(Color::Red, Shape::Unknown, Material::Metal);
        assert_eq!(partial.slug(), "red-metal");
        assert_eq!(partial.known_properties(), vec!["red", "metal"]);
    }
}
