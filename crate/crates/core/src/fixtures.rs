//! Bundled example data used by tests, the acceptance suite, and the README
//! walkthrough: an eight-node annotated event graph whose deepest chain runs
//! bump -> move -> collide -> slide -> strike.

use crate::builder::network_from_ceg;
use crate::ingest::{parse_ceg_str, preprocess};
use crate::model::{CausalNetwork, Ceg};

/// Canonical-schema serialization of the example CEG.
pub const EXAMPLE_CEG_JSONL: &str = include_str!("../fixtures/fig4.cegs.jsonl");

/// The example CEG as parsed (raw, before preprocessing).
pub fn example_ceg() -> Ceg {
    parse_ceg_str(EXAMPLE_CEG_JSONL)
        .expect("bundled fixture parses")
        .into_iter()
        .next()
        .expect("bundled fixture has one record")
}

/// The example CEG after preprocessing (events extracted).
pub fn example_ceg_preprocessed() -> Ceg {
    let (cegs, report) = preprocess(vec![example_ceg()]);
    assert_eq!(report.cegs_out, 1, "fixture must survive preprocessing");
    cegs.into_iter().next().expect("one retained CEG")
}

/// The example causal network (preprocessed and converted).
pub fn example_network() -> CausalNetwork {
    network_from_ceg(&example_ceg_preprocessed()).expect("fixture converts")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_parses_with_eight_nodes_and_seven_edges() {
        let ceg = example_ceg();
        assert_eq!(ceg.nodes.len(), 8);
        assert_eq!(ceg.edges.len(), 7);
        let ids: Vec<&str> = ceg.nodes.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, vec!["A", "B", "C", "D", "E", "F", "G", "H"]);
    }

    #[test]
    fn fixture_survives_preprocessing_intact() {
        let ceg = example_ceg_preprocessed();
        assert_eq!(ceg.nodes.len(), 8);
        assert_eq!(ceg.edges.len(), 7);
        assert!(ceg.nodes.iter().all(|n| n.event.is_some()));
    }

    #[test]
    fn fixture_network_types_match_the_worked_example() {
        let net = example_network();
        for (name, ty) in [
            ("fig4/E", "Bump"),
            ("fig4/A", "Move"),
            ("fig4/G", "Collide"),
            ("fig4/C", "Slide"),
            ("fig4/H", "Strike"),
        ] {
            assert_eq!(net.node(name).unwrap().type_entity_name(), ty);
        }
        let depths = net.node_depths().unwrap();
        assert_eq!(depths["fig4/E"], 0);
        assert_eq!(depths["fig4/A"], 1);
        assert_eq!(depths["fig4/G"], 2);
        assert_eq!(depths["fig4/C"], 3);
        assert_eq!(depths["fig4/H"], 4);
    }
}
