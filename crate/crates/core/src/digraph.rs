//! Index-based digraph helpers shared by the CEG and causal-network code.

use std::collections::BinaryHeap;

/// Adjacency-list digraph over node indices `0..n`.
pub(crate) struct Digraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    indeg: Vec<usize>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            adj: vec![Vec::new(); n],
            indeg: vec![0; n],
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u].push(v);
        self.indeg[v] += 1;
    }

    /// Nodes with in-degree zero, in index order.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.indeg[v] == 0).collect()
    }

    /// Kahn's algorithm; smallest index first so the order is canonical.
    /// Returns `None` when the graph has a cycle.
    pub fn topo_order(&self) -> Option<Vec<usize>> {
        let mut indeg = self.indeg.clone();
        let mut heap: BinaryHeap<std::cmp::Reverse<usize>> =
            self.roots().into_iter().map(std::cmp::Reverse).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(std::cmp::Reverse(u)) = heap.pop() {
            order.push(u);
            for &v in &self.adj[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    heap.push(std::cmp::Reverse(v));
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topo_order().is_some()
    }

    /// Longest-path depth from any root, per node. `None` when cyclic.
    pub fn longest_depths(&self) -> Option<Vec<usize>> {
        let order = self.topo_order()?;
        let mut depth = vec![0usize; self.n];
        for &u in &order {
            for &v in &self.adj[u] {
                depth[v] = depth[v].max(depth[u] + 1);
            }
        }
        Some(depth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_detected() {
        let mut g = Digraph::new(3);
        g.add_edge(0, 1);
        g.add_edge(1, 2);
        g.add_edge(2, 0);
        assert!(!g.is_acyclic());
        assert!(g.longest_depths().is_none());
    }

    #[test]
    fn diamond_depths_take_longest_path() {
        // 0 -> 1 -> 3, 0 -> 3: depth(3) = 2, not 1.
        let mut g = Digraph::new(4);
        g.add_edge(0, 1);
        g.add_edge(1, 3);
        g.add_edge(0, 3);
        g.add_edge(0, 2);
        let d = g.longest_depths().unwrap();
        assert_eq!(d, vec![0, 1, 1, 2]);
        assert_eq!(g.roots(), vec![0]);
    }
}
