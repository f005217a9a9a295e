//! Adapter hook converting an upstream CEG export into the canonical schema.
//!
//! The single function boundary is [`adapt_record`]: one native JSON record
//! in, one canonical [`Ceg`] out. It accepts the common field spellings seen
//! in annotation exports (`video`/`video_id`, node lists as plain strings or
//! objects, edges as objects or `[src, dst, score]` triples, numeric node
//! references by list index).

use serde_json::Value;

use crate::model::{Ceg, CegEdge, CegNode};

use super::IngestError;

fn malformed(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedInput {
        line,
        reason: reason.into(),
    }
}

fn string_field<'a>(obj: &'a Value, names: &[&str]) -> Option<&'a str> {
    names.iter().find_map(|n| obj.get(n).and_then(Value::as_str))
}

fn node_ref(value: &Value, nodes: &[CegNode], line: usize) -> Result<String, IngestError> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => {
            let idx = n
                .as_u64()
                .ok_or_else(|| malformed(line, "negative node index"))? as usize;
            nodes
                .get(idx)
                .map(|n| n.id.clone())
                .ok_or_else(|| malformed(line, format!("node index {idx} out of range")))
        }
        other => Err(malformed(line, format!("bad node reference {other}"))),
    }
}

/// Converts one native record. `line` is carried into error messages.
pub fn adapt_record(native: &Value, line: usize) -> Result<Ceg, IngestError> {
    let video_id = string_field(native, &["video_id", "video", "id", "scene"])
        .ok_or_else(|| malformed(line, "missing video identifier"))?
        .to_owned();

    let raw_nodes = native
        .get("nodes")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed(line, "missing nodes list"))?;
    let mut nodes = Vec::with_capacity(raw_nodes.len());
    for (i, raw) in raw_nodes.iter().enumerate() {
        let (id, description) = match raw {
            Value::String(text) => (format!("n{i}"), text.clone()),
            Value::Object(_) => {
                let description = string_field(raw, &["description", "text", "desc", "label"])
                    .ok_or_else(|| malformed(line, format!("node {i} has no description")))?
                    .to_owned();
                let id = string_field(raw, &["id", "name"])
                    .map(str::to_owned)
                    .unwrap_or_else(|| format!("n{i}"));
                (id, description)
            }
            other => return Err(malformed(line, format!("bad node entry {other}"))),
        };
        nodes.push(CegNode {
            id,
            description,
            event: None,
        });
    }

    let raw_edges = native
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed(line, "missing edges list"))?;
    let mut edges = Vec::with_capacity(raw_edges.len());
    for raw in raw_edges {
        let (src, dst, score) = match raw {
            Value::Array(triple) if triple.len() == 3 => {
                let src = node_ref(&triple[0], &nodes, line)?;
                let dst = node_ref(&triple[1], &nodes, line)?;
                let score = triple[2]
                    .as_u64()
                    .ok_or_else(|| malformed(line, "non-integer edge score"))?;
                (src, dst, score)
            }
            Value::Object(map) => {
                let src_v = ["src", "source", "from"]
                    .iter()
                    .find_map(|k| map.get(*k))
                    .ok_or_else(|| malformed(line, "edge missing source"))?;
                let dst_v = ["dst", "target", "to"]
                    .iter()
                    .find_map(|k| map.get(*k))
                    .ok_or_else(|| malformed(line, "edge missing target"))?;
                let score = ["score", "weight", "label"]
                    .iter()
                    .find_map(|k| map.get(*k))
                    .and_then(Value::as_u64)
                    .ok_or_else(|| malformed(line, "edge missing integer score"))?;
                (
                    node_ref(src_v, &nodes, line)?,
                    node_ref(dst_v, &nodes, line)?,
                    score,
                )
            }
            other => return Err(malformed(line, format!("bad edge entry {other}"))),
        };
        if !(1..=5).contains(&score) {
            return Err(malformed(line, format!("edge score {score} outside 1..=5")));
        }
        edges.push(CegEdge {
            src,
            dst,
            score: score as u8,
        });
    }

    Ok(Ceg {
        video_id,
        nodes,
        edges,
    })
}

/// Adapts a whole native export: a JSON array of records or one record per
/// line. The result is validated against the canonical schema.
pub fn adapt_export(content: &str) -> Result<Vec<Ceg>, IngestError> {
    let mut cegs = Vec::new();
    if content.trim_start().starts_with('[') {
        let values: Vec<Value> =
            serde_json::from_str(content).map_err(|e| malformed(e.line(), e.to_string()))?;
        for (i, value) in values.iter().enumerate() {
            cegs.push(adapt_record(value, i + 1)?);
        }
    } else {
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let value: Value =
                serde_json::from_str(line).map_err(|e| malformed(i + 1, e.to_string()))?;
            cegs.push(adapt_record(&value, i + 1)?);
        }
    }
    // round-trip through the canonical validator
    let serialized: Vec<String> = cegs
        .iter()
        .map(|c| serde_json::to_string(c).expect("cegs serialize"))
        .collect();
    super::parse_ceg_str(&serialized.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adapts_index_based_edges() {
        let native = serde_json::json!({
            "video": "v17",
            "nodes": ["the red cube moves", "the blue sphere rolls"],
            "edges": [[0, 1, 4]],
        });
        let ceg = adapt_record(&native, 1).unwrap();
        assert_eq!(ceg.video_id, "v17");
        assert_eq!(ceg.nodes[0].id, "n0");
        assert_eq!(ceg.edges[0].src, "n0");
        assert_eq!(ceg.edges[0].dst, "n1");
        assert_eq!(ceg.edges[0].score, 4);
    }

    #[test]
    fn adapts_object_edges_with_alternate_names() {
        let native = serde_json::json!({
            "video_id": "v1",
            "nodes": [{"id": "a", "text": "x"}, {"id": "b", "text": "y"}],
            "edges": [{"source": "a", "target": "b", "label": 2}],
        });
        let ceg = adapt_record(&native, 1).unwrap();
        assert_eq!(ceg.edges[0].src, "a");
        assert_eq!(ceg.edges[0].score, 2);
    }

    #[test]
    fn score_range_enforced() {
        let native = serde_json::json!({
            "video_id": "v1",
            "nodes": ["x", "y"],
            "edges": [[0, 1, 9]],
        });
        assert!(adapt_record(&native, 3).is_err());
    }
}
