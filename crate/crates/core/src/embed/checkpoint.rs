//! Text checkpoints: a header line followed by one line per vector.
//!
//! ```text
//! model<TAB>DistMult<TAB>dim<TAB>32<TAB>epoch<TAB>17
//! E<TAB>fig4/A<TAB>c1 c2 ... cw
//! R<TAB>causes<TAB>c1 c2 ... cw
//! ```
//!
//! Components are space-separated shortest-round-trip decimals, so a saved
//! `f64` state reloads bit-identically.

use std::fs;
use std::io::Write;
use std::path::Path;

use indexmap::IndexSet;

use crate::num::Scalar;

use super::{EmbedError, EmbeddingState, ModelKind};

pub fn save_checkpoint<S: Scalar>(
    state: &EmbeddingState<S>,
    path: impl AsRef<Path>,
) -> Result<(), EmbedError> {
    let mut out = String::new();
    out.push_str(&format!(
        "model\t{}\tdim\t{}\tepoch\t{}\n",
        state.model(),
        state.dim(),
        state.epoch()
    ));
    let mut write_vec = |tag: &str, name: &str, vec: &[S]| {
        out.push_str(tag);
        out.push('\t');
        out.push_str(name);
        out.push('\t');
        for (i, c) in vec.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{c}"));
        }
        out.push('\n');
    };
    for (i, name) in state.entity_names().enumerate() {
        write_vec("E", name, state.entity_vec(i));
    }
    for (i, name) in state.relation_names().enumerate() {
        write_vec("R", name, state.relation_vec(i));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load_checkpoint<S: Scalar>(path: impl AsRef<Path>) -> Result<EmbeddingState<S>, EmbedError> {
    let content = fs::read_to_string(path)?;
    load_checkpoint_str(&content)
}

pub fn load_checkpoint_str<S: Scalar>(content: &str) -> Result<EmbeddingState<S>, EmbedError> {
    let malformed = |line: usize, reason: String| EmbedError::MalformedCheckpoint { line, reason };
    let mut lines = content.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| malformed(1, "empty checkpoint".into()))?;
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.len() != 6 || fields[0] != "model" || fields[2] != "dim" || fields[4] != "epoch" {
        return Err(malformed(1, format!("bad header {header:?}")));
    }
    let model = ModelKind::parse(fields[1])
        .ok_or_else(|| malformed(1, format!("unknown model {:?}", fields[1])))?;
    let dim: usize = fields[3]
        .parse()
        .map_err(|_| malformed(1, format!("bad dim {:?}", fields[3])))?;
    let epoch: usize = fields[5]
        .parse()
        .map_err(|_| malformed(1, format!("bad epoch {:?}", fields[5])))?;
    let width = model.width(dim);

    let mut entities: IndexSet<String> = IndexSet::new();
    let mut relations: IndexSet<String> = IndexSet::new();
    let mut entity_vecs: Vec<S> = Vec::new();
    let mut relation_vecs: Vec<S> = Vec::new();

    for (i, line) in lines {
        let line_no = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(malformed(
                line_no,
                format!("expected 3 tab-separated fields, got {}", fields.len()),
            ));
        }
        let mut components = Vec::with_capacity(width);
        for token in fields[2].split(' ') {
            let value: S = token
                .parse()
                .map_err(|_| malformed(line_no, format!("bad component {token:?}")))?;
            components.push(value);
        }
        if components.len() != width {
            return Err(malformed(
                line_no,
                format!("expected {width} components, got {}", components.len()),
            ));
        }
        match fields[0] {
            "E" => {
                if !entities.insert(fields[1].to_owned()) {
                    return Err(malformed(line_no, format!("duplicate entity {:?}", fields[1])));
                }
                entity_vecs.extend(components);
            }
            "R" => {
                if !relations.insert(fields[1].to_owned()) {
                    return Err(malformed(
                        line_no,
                        format!("duplicate relation {:?}", fields[1]),
                    ));
                }
                relation_vecs.extend(components);
            }
            other => return Err(malformed(line_no, format!("bad row tag {other:?}"))),
        }
    }
    if entities.is_empty() {
        return Err(EmbedError::EmptyGraph);
    }
    Ok(EmbeddingState::from_parts(
        model,
        dim,
        epoch,
        entities,
        relations,
        entity_vecs,
        relation_vecs,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let state: EmbeddingState<f64> =
            EmbeddingState::init_for(ModelKind::ComplEx, ["a", "b", "c"], ["causes"], 5, 23)
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.tsv");
        save_checkpoint(&state, &path).unwrap();
        let back: EmbeddingState<f64> = load_checkpoint(&path).unwrap();
        assert_eq!(back, state);
    }

    #[test]
    fn header_is_validated() {
        assert!(matches!(
            load_checkpoint_str::<f64>("model\tDistMult\tdim\tx\tepoch\t3\n"),
            Err(EmbedError::MalformedCheckpoint { line: 1, .. })
        ));
        assert!(matches!(
            load_checkpoint_str::<f64>("nonsense\n"),
            Err(EmbedError::MalformedCheckpoint { line: 1, .. })
        ));
    }

    #[test]
    fn component_count_is_validated() {
        let content = "model\tDistMult\tdim\t3\tepoch\t0\nE\ta\t0.5 0.5\n";
        assert!(matches!(
            load_checkpoint_str::<f64>(content),
            Err(EmbedError::MalformedCheckpoint { line: 2, .. })
        ));
    }
}
