//! Shared random-instance generators for the integration tests.

#![allow(dead_code)]

use causallp_core::model::{CausalNetwork, NetworkEdge, NetworkNode};
use rand::Rng;

pub const EVENT_LEMMAS: [&str; 6] = ["move", "collide", "roll", "hit", "enter", "slide"];

/// Random DAG network: edges only run from lower to higher node index.
pub fn random_dag_network<R: Rng>(
    rng: &mut R,
    scene: &str,
    max_nodes: usize,
    edge_prob: f64,
) -> CausalNetwork {
    let n = rng.gen_range(1..=max_nodes);
    let nodes: Vec<NetworkNode> = (0..n)
        .map(|i| NetworkNode {
            name: format!("{scene}/n{i:02}"),
            event_type: EVENT_LEMMAS[rng.gen_range(0..EVENT_LEMMAS.len())].to_owned(),
            participants: vec![],
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push(NetworkEdge {
                    src: nodes[i].name.clone(),
                    dst: nodes[j].name.clone(),
                    weight: [0.25, 0.5, 0.75, 1.0][rng.gen_range(0..4)],
                });
            }
        }
    }
    CausalNetwork::new(scene, nodes, edges).expect("generated network is valid")
}

/// Random DAG network with depth >= 2, produced by rejection.
pub fn random_deep_network<R: Rng>(rng: &mut R, scene: &str, max_nodes: usize) -> CausalNetwork {
    loop {
        let net = random_dag_network(rng, scene, max_nodes.max(3), 0.45);
        if net.max_depth().expect("acyclic by construction") >= 2 {
            return net;
        }
    }
}

/// Small corpus of deep DAG networks with distinct scene names.
pub fn random_corpus<R: Rng>(rng: &mut R, n_cegs: usize, max_nodes: usize) -> Vec<CausalNetwork> {
    (0..n_cegs)
        .map(|i| random_deep_network(rng, &format!("s{i:03}"), max_nodes))
        .collect()
}
