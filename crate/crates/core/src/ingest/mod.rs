//! CEG ingestion: canonical-schema parsing and the preprocessing pipeline
//! (score filtering, event extraction, cycle breaking, depth pruning).

pub mod adapter;
pub mod lexicon;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::model::{Ceg, CegEdge, ObjectRef, ParsedEvent};
use lexicon::lexicon;

pub use lexicon::{normalize_lexicon, RawObjectRef};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input at record {line}: {reason}")]
    MalformedInput { line: usize, reason: String },
    #[error("record {line}: edge references unknown node {node:?} in CEG {ceg:?}")]
    DanglingEdge {
        line: usize,
        ceg: String,
        node: String,
    },
}

/// Drop counters for one preprocessing run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub cegs_in: usize,
    pub edges_dropped_score1: usize,
    pub edges_dropped_cycle: usize,
    pub cegs_dropped_empty: usize,
    pub cegs_dropped_shallow: usize,
    pub nodes_dropped_composite: usize,
    /// CEGs retained with more than one root (flagged, not dropped).
    pub cegs_multi_root: usize,
    pub cegs_out: usize,
}

impl IngestReport {
    pub fn as_pairs(&self) -> Vec<(&'static str, usize)> {
        vec![
            ("cegs_in", self.cegs_in),
            ("edges_dropped_score1", self.edges_dropped_score1),
            ("edges_dropped_cycle", self.edges_dropped_cycle),
            ("cegs_dropped_empty", self.cegs_dropped_empty),
            ("cegs_dropped_shallow", self.cegs_dropped_shallow),
            ("nodes_dropped_composite", self.nodes_dropped_composite),
            ("cegs_multi_root", self.cegs_multi_root),
            ("cegs_out", self.cegs_out),
        ]
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.as_pairs() {
            writeln!(f, "{k}\t{v}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Canonical schema I/O
// ---------------------------------------------------------------------------

fn validate_ceg(ceg: &Ceg, line: usize) -> Result<(), IngestError> {
    let malformed = |reason: String| IngestError::MalformedInput { line, reason };
    crate::model::check_entity_name(&ceg.video_id)
        .map_err(|e| malformed(format!("bad video_id: {e}")))?;
    let mut ids = HashSet::new();
    for node in &ceg.nodes {
        crate::model::check_entity_name(&node.id)
            .map_err(|e| malformed(format!("bad node id: {e}")))?;
        if !ids.insert(node.id.as_str()) {
            return Err(malformed(format!("duplicate node id {:?}", node.id)));
        }
    }
    let mut pairs = HashSet::new();
    for edge in &ceg.edges {
        for endpoint in [&edge.src, &edge.dst] {
            if !ids.contains(endpoint.as_str()) {
                return Err(IngestError::DanglingEdge {
                    line,
                    ceg: ceg.video_id.clone(),
                    node: endpoint.clone(),
                });
            }
        }
        if !(1..=5).contains(&edge.score) {
            return Err(malformed(format!(
                "edge {}->{} score {} outside 1..=5",
                edge.src, edge.dst, edge.score
            )));
        }
        if !pairs.insert((edge.src.as_str(), edge.dst.as_str())) {
            return Err(malformed(format!(
                "duplicate edge {}->{}",
                edge.src, edge.dst
            )));
        }
    }
    Ok(())
}

/// Parses canonical-schema CEG records: one JSON object per line, or a single
/// JSON array for whole-file exports. Record numbers in errors are 1-based
/// line numbers (JSONL) or record positions (array form).
pub fn parse_ceg_str(content: &str) -> Result<Vec<Ceg>, IngestError> {
    if content.trim_start().starts_with('[') {
        let cegs: Vec<Ceg> =
            serde_json::from_str(content).map_err(|e| IngestError::MalformedInput {
                line: e.line(),
                reason: e.to_string(),
            })?;
        for (i, ceg) in cegs.iter().enumerate() {
            validate_ceg(ceg, i + 1)?;
        }
        return Ok(cegs);
    }
    let mut cegs = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ceg: Ceg = serde_json::from_str(line).map_err(|e| IngestError::MalformedInput {
            line: i + 1,
            reason: e.to_string(),
        })?;
        validate_ceg(&ceg, i + 1)?;
        cegs.push(ceg);
    }
    Ok(cegs)
}

pub fn parse_ceg_file(path: impl AsRef<Path>) -> Result<Vec<Ceg>, IngestError> {
    let content = fs::read_to_string(path)?;
    parse_ceg_str(&content)
}

/// Writes CEGs in the canonical schema, one JSON object per line, LF endings.
pub fn write_cegs(cegs: &[Ceg], path: impl AsRef<Path>) -> Result<(), IngestError> {
    let mut out = Vec::new();
    for ceg in cegs {
        serde_json::to_writer(&mut out, ceg).map_err(|e| IngestError::MalformedInput {
            line: 0,
            reason: e.to_string(),
        })?;
        out.push(b'\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Preprocessing steps
// ---------------------------------------------------------------------------

/// Removes edges with score 1 (no causal responsibility); nodes untouched.
pub fn drop_weak_edges(mut ceg: Ceg) -> Ceg {
    ceg.edges.retain(|e| e.score >= 2);
    ceg
}

/// Removes every back edge found by a depth-first search started from nodes
/// in lexicographic id order, visiting neighbors in lexicographic order.
/// Deterministic and linear-time; the result is acyclic.
pub fn break_cycles(ceg: Ceg) -> (Ceg, Vec<CegEdge>) {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }

    let mut order: Vec<&str> = ceg.nodes.iter().map(|n| n.id.as_str()).collect();
    order.sort_unstable();
    let mut adj: HashMap<&str, Vec<(&str, usize)>> = HashMap::new();
    for (i, e) in ceg.edges.iter().enumerate() {
        adj.entry(e.src.as_str())
            .or_default()
            .push((e.dst.as_str(), i));
    }
    for neighbors in adj.values_mut() {
        neighbors.sort_unstable();
    }

    let mut mark: HashMap<&str, Mark> = order.iter().map(|&id| (id, Mark::White)).collect();
    let mut removed_idx: Vec<usize> = Vec::new();
    let empty: Vec<(&str, usize)> = Vec::new();
    for &start in &order {
        if mark[start] != Mark::White {
            continue;
        }
        mark.insert(start, Mark::Gray);
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        while let Some(&(u, next)) = stack.last() {
            let neighbors = adj.get(u).unwrap_or(&empty);
            if next < neighbors.len() {
                stack.last_mut().expect("non-empty stack").1 += 1;
                let (v, eidx) = neighbors[next];
                match mark[v] {
                    Mark::Gray => removed_idx.push(eidx),
                    Mark::White => {
                        mark.insert(v, Mark::Gray);
                        stack.push((v, 0));
                    }
                    Mark::Black => {}
                }
            } else {
                mark.insert(u, Mark::Black);
                stack.pop();
            }
        }
    }

    removed_idx.sort_unstable();
    let removed_set: HashSet<usize> = removed_idx.iter().copied().collect();
    let removed: Vec<CegEdge> = removed_idx.iter().map(|&i| ceg.edges[i].clone()).collect();
    let kept = ceg
        .edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed_set.contains(i))
        .map(|(_, e)| e.clone())
        .collect();
    let ceg = Ceg {
        video_id: ceg.video_id,
        nodes: ceg.nodes,
        edges: kept,
    };
    debug_assert!(ceg.is_acyclic());
    (ceg, removed)
}

/// Per-CEG drop counters from [`prune_shallow`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneDeltas {
    pub cegs_dropped_empty: usize,
    pub cegs_dropped_shallow: usize,
}

/// Keeps CEGs that still have at least one edge and reach depth >= 2.
/// CEGs must already be acyclic.
pub fn prune_shallow(cegs: Vec<Ceg>) -> (Vec<Ceg>, PruneDeltas) {
    let mut deltas = PruneDeltas::default();
    let kept = cegs
        .into_iter()
        .filter(|ceg| {
            if ceg.edges.is_empty() {
                deltas.cegs_dropped_empty += 1;
                return false;
            }
            let depth = ceg.max_depth().expect("prune_shallow requires acyclic CEGs");
            if depth < 2 {
                deltas.cegs_dropped_shallow += 1;
                return false;
            }
            true
        })
        .collect();
    (kept, deltas)
}

// ---------------------------------------------------------------------------
// Event extraction
// ---------------------------------------------------------------------------

/// Result of extracting an event from a node description.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtractOutcome {
    Event(ParsedEvent),
    /// Two or more event verbs detected; the node describes composed events.
    Composite,
    /// No event verb, or participants inconsistent with the verb's arity.
    Unparseable,
}

fn tokenize(description: &str) -> Vec<String> {
    description
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Rule-based extraction over the closed vocabulary. Matching is
/// case-insensitive against the inflection table; a shape token completes an
/// object reference, pending color/material tokens attach to the next one.
pub fn extract_event(description: &str) -> ExtractOutcome {
    let lex = lexicon();
    let tokens = tokenize(description);

    let mut verb = None;
    let mut verb_tokens = 0usize;
    for t in &tokens {
        if let Some(entry) = lex.lookup_verb(t) {
            verb_tokens += 1;
            if verb.is_none() {
                verb = Some(entry);
            }
        }
    }
    if verb_tokens >= 2 {
        return ExtractOutcome::Composite;
    }
    let Some(verb) = verb else {
        return ExtractOutcome::Unparseable;
    };

    let mut participants: Vec<ObjectRef> = Vec::new();
    let mut pending = ObjectRef::new(
        crate::model::Color::Unknown,
        crate::model::Shape::Unknown,
        crate::model::Material::Unknown,
    );
    let unknown = pending;
    let flush = |pending: &mut ObjectRef, participants: &mut Vec<ObjectRef>| {
        if !pending.is_fully_unknown() {
            participants.push(*pending);
            *pending = unknown;
        }
    };
    for t in &tokens {
        if lex.lookup_verb(t).is_some() {
            continue;
        }
        if let Some(c) = lex.lookup_color(t) {
            if pending.color != crate::model::Color::Unknown {
                flush(&mut pending, &mut participants);
            }
            pending.color = c;
        } else if let Some(m) = lex.lookup_material(t) {
            if pending.material != crate::model::Material::Unknown {
                flush(&mut pending, &mut participants);
            }
            pending.material = m;
        } else if let Some(s) = lex.lookup_shape(t) {
            pending.shape = s;
            flush(&mut pending, &mut participants);
        }
    }
    flush(&mut pending, &mut participants);

    if participants.len() != verb.arity.participant_count() {
        return ExtractOutcome::Unparseable;
    }
    ExtractOutcome::Event(ParsedEvent {
        event_type: verb.lemma.clone(),
        arity: verb.arity,
        participants,
    })
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Full preprocessing pipeline, applied per CEG in order: score-1 edge
/// removal, event extraction (dropping composite/unparseable nodes and their
/// incident edges), cycle breaking, then empty/shallow pruning. Failures are
/// counted, never thrown.
pub fn preprocess(cegs: Vec<Ceg>) -> (Vec<Ceg>, IngestReport) {
    let mut report = IngestReport {
        cegs_in: cegs.len(),
        ..IngestReport::default()
    };

    let mut processed = Vec::with_capacity(cegs.len());
    for ceg in cegs {
        let before = ceg.edges.len();
        let mut ceg = drop_weak_edges(ceg);
        report.edges_dropped_score1 += before - ceg.edges.len();

        let mut kept_nodes = Vec::with_capacity(ceg.nodes.len());
        let mut kept_ids: HashSet<String> = HashSet::new();
        for mut node in ceg.nodes {
            match extract_event(&node.description) {
                ExtractOutcome::Event(event) => {
                    node.event = Some(event);
                    kept_ids.insert(node.id.clone());
                    kept_nodes.push(node);
                }
                ExtractOutcome::Composite | ExtractOutcome::Unparseable => {
                    report.nodes_dropped_composite += 1;
                }
            }
        }
        ceg.nodes = kept_nodes;
        ceg.edges
            .retain(|e| kept_ids.contains(&e.src) && kept_ids.contains(&e.dst));

        let (ceg, removed) = break_cycles(ceg);
        report.edges_dropped_cycle += removed.len();
        processed.push(ceg);
    }

    let (kept, deltas) = prune_shallow(processed);
    report.cegs_dropped_empty = deltas.cegs_dropped_empty;
    report.cegs_dropped_shallow = deltas.cegs_dropped_shallow;
    for ceg in &kept {
        let (g, _) = ceg.digraph();
        if g.roots().len() > 1 {
            report.cegs_multi_root += 1;
        }
    }
    report.cegs_out = kept.len();
    debug_assert_eq!(
        report.cegs_out,
        report.cegs_in - report.cegs_dropped_empty - report.cegs_dropped_shallow
    );
    (kept, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CegNode, Color, EventArity, Material, Shape};

    fn node(id: &str, description: &str) -> CegNode {
        CegNode {
            id: id.into(),
            description: description.into(),
            event: None,
        }
    }

    fn edge(src: &str, dst: &str, score: u8) -> CegEdge {
        CegEdge {
            src: src.into(),
            dst: dst.into(),
            score,
        }
    }

    #[test]
    fn parses_minimal_record() {
        let json = r#"{"video_id":"v1","nodes":[{"id":"A","description":"the red cube moves"},{"id":"B","description":"the blue sphere rolls"}],"edges":[{"src":"A","dst":"B","score":3}]}"#;
        let cegs = parse_ceg_str(json).unwrap();
        assert_eq!(cegs.len(), 1);
        assert_eq!(cegs[0].nodes.len(), 2);
        assert_eq!(cegs[0].edges.len(), 1);
    }

    #[test]
    fn dangling_edge_rejected() {
        let json = r#"{"video_id":"v1","nodes":[{"id":"A","description":"x"}],"edges":[{"src":"A","dst":"Z","score":3}]}"#;
        match parse_ceg_str(json) {
            Err(IngestError::DanglingEdge { node, .. }) => assert_eq!(node, "Z"),
            other => panic!("expected DanglingEdge, got {other:?}"),
        }
    }

    #[test]
    fn truncated_record_reports_line() {
        let good = r#"{"video_id":"v1","nodes":[],"edges":[]}"#;
        let content = format!("{good}\n{{\"video_id\":\"v2\",");
        match parse_ceg_str(&content) {
            Err(IngestError::MalformedInput { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected MalformedInput, got {other:?}"),
        }
    }

    #[test]
    fn weak_edges_dropped() {
        let ceg = Ceg {
            video_id: "v".into(),
            nodes: vec![node("A", "x"), node("B", "x"), node("C", "x")],
            edges: vec![edge("A", "B", 1), edge("B", "C", 4)],
        };
        let out = drop_weak_edges(ceg);
        assert_eq!(out.edges, vec![edge("B", "C", 4)]);
        assert_eq!(out.nodes.len(), 3);
    }

    #[test]
    fn self_loop_removed() {
        let ceg = Ceg {
            video_id: "v".into(),
            nodes: vec![node("A", "x")],
            edges: vec![edge("A", "A", 3)],
        };
        let (out, removed) = break_cycles(ceg);
        assert!(out.edges.is_empty());
        assert_eq!(removed, vec![edge("A", "A", 3)]);
    }

    #[test]
    fn three_cycle_breaks_at_back_edge() {
        // DFS from A visits A, B, C; C->A is the back edge.
        let ceg = Ceg {
            video_id: "v".into(),
            nodes: vec![node("A", "x"), node("B", "x"), node("C", "x")],
            edges: vec![edge("A", "B", 3), edge("B", "C", 3), edge("C", "A", 3)],
        };
        let (out, removed) = break_cycles(ceg);
        assert_eq!(removed, vec![edge("C", "A", 3)]);
        assert_eq!(out.edges.len(), 2);
        assert!(out.is_acyclic());
    }

    #[test]
    fn acyclic_graph_untouched() {
        let ceg = Ceg {
            video_id: "v".into(),
            nodes: vec![
                node("A", "x"),
                node("C", "x"),
                node("E", "x"),
                node("G", "x"),
                node("H", "x"),
            ],
            edges: vec![
                edge("E", "A", 5),
                edge("E", "G", 4),
                edge("E", "C", 3),
                edge("A", "C", 4),
                edge("A", "G", 5),
                edge("G", "C", 2),
                edge("C", "H", 3),
            ],
        };
        let expected = ceg.edges.clone();
        let (out, removed) = break_cycles(ceg);
        assert!(removed.is_empty());
        assert_eq!(out.edges, expected);
    }

    #[test]
    fn prune_drops_empty_and_shallow() {
        let empty = Ceg {
            video_id: "e".into(),
            nodes: vec![node("A", "x")],
            edges: vec![],
        };
        let shallow = Ceg {
            video_id: "s".into(),
            nodes: vec![node("A", "x"), node("B", "x")],
            edges: vec![edge("A", "B", 3)],
        };
        let deep = Ceg {
            video_id: "d".into(),
            nodes: vec![node("A", "x"), node("B", "x"), node("C", "x")],
            edges: vec![edge("A", "B", 3), edge("B", "C", 3)],
        };
        let (kept, deltas) = prune_shallow(vec![empty, shallow, deep]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].video_id, "d");
        assert_eq!(deltas.cegs_dropped_empty, 1);
        assert_eq!(deltas.cegs_dropped_shallow, 1);
    }

    #[test]
    fn composite_description_detected() {
        let outcome = extract_event(
            "The red ball collides with the blue sphere and hits the yellow cylinder",
        );
        assert_eq!(outcome, ExtractOutcome::Composite);
    }

    #[test]
    fn singular_event_extracted() {
        match extract_event("the red cube enters from the left") {
            ExtractOutcome::Event(ev) => {
                assert_eq!(ev.event_type, "enter");
                assert_eq!(ev.arity, EventArity::Singular);
                assert_eq!(
                    ev.participants,
                    vec![ObjectRef::new(Color::Red, Shape::Cube, Material::Unknown)]
                );
            }
            other => panic!("expected event, got {other:?}"),
        }
    }

    #[test]
    fn binary_event_with_alias_extracted() {
        match extract_event("the yellow ball hits the blue cylinder") {
            ExtractOutcome::Event(ev) => {
                assert_eq!(ev.event_type, "hit");
                assert_eq!(ev.arity, EventArity::Binary);
                assert_eq!(
                    ev.participants,
                    vec![
                        ObjectRef::new(Color::Yellow, Shape::Sphere, Material::Unknown),
                        ObjectRef::new(Color::Blue, Shape::Cylinder, Material::Unknown),
                    ]
                );
            }
            other => panic!("expected event, got {other:?}"),
        }
    }

    #[test]
    fn arity_mismatch_unparseable() {
        // "moves" is singular but two objects are described.
        assert_eq!(
            extract_event("the red cube moves the blue sphere"),
            ExtractOutcome::Unparseable
        );
        assert_eq!(extract_event("nothing happens here"), ExtractOutcome::Unparseable);
    }

    #[test]
    fn pipeline_counts_compose() {
        let only_weak = Ceg {
            video_id: "w".into(),
            nodes: vec![
                node("A", "the red cube moves"),
                node("B", "the blue sphere rolls"),
            ],
            edges: vec![edge("A", "B", 1)],
        };
        let (kept, report) = preprocess(vec![only_weak]);
        assert!(kept.is_empty());
        assert_eq!(report.cegs_in, 1);
        assert_eq!(report.edges_dropped_score1, 1);
        assert_eq!(report.cegs_dropped_empty, 1);
        assert_eq!(report.cegs_out, 0);
    }

    #[test]
    fn pipeline_is_idempotent() {
        let ceg = Ceg {
            video_id: "v".into(),
            nodes: vec![
                node("A", "the red cube moves"),
                node("B", "the blue sphere rolls"),
                node("C", "the green cylinder slides"),
                node("D", "word salad"),
            ],
            edges: vec![
                edge("A", "B", 3),
                edge("B", "C", 4),
                edge("C", "A", 2),
                edge("A", "D", 5),
            ],
        };
        let (once, _) = preprocess(vec![ceg]);
        let (twice, report2) = preprocess(once.clone());
        assert_eq!(once, twice);
        assert_eq!(report2.edges_dropped_score1, 0);
        assert_eq!(report2.edges_dropped_cycle, 0);
        assert_eq!(report2.nodes_dropped_composite, 0);
    }
}
