//! Exact max-flow (Edmonds–Karp) over rational capacities.

use std::collections::VecDeque;

use num_traits::Zero;

use crate::rational::Q;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: Q,
    flow: Q,
}

#[derive(Debug, Clone, Default)]
pub struct FlowNet {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNet {
    pub fn new(nodes: usize) -> Self {
        FlowNet {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Adds `u -> v` and returns its index for [`FlowNet::flow`].
    pub fn add_edge(&mut self, u: usize, v: usize, cap: Q) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge {
            to: v,
            cap,
            flow: Q::zero(),
        });
        self.edges.push(Edge {
            to: u,
            cap: Q::zero(),
            flow: Q::zero(),
        });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    pub fn flow(&self, edge: usize) -> Q {
        self.edges[edge].flow
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> Q {
        let mut total = Q::zero();
        loop {
            let mut prev: Vec<Option<usize>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if !seen[edge.to] && edge.cap - edge.flow > Q::zero() {
                        seen[edge.to] = true;
                        prev[edge.to] = Some(e);
                        queue.push_back(edge.to);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push: Option<Q> = None;
            let mut v = t;
            while let Some(e) = prev[v] {
                let r = self.edges[e].cap - self.edges[e].flow;
                push = Some(push.map_or(r, |p: Q| p.min(r)));
                v = self.edges[e ^ 1].to;
            }
            let push = push.expect("augmenting path has edges");
            let mut v = t;
            while let Some(e) = prev[v] {
                self.edges[e].flow += push;
                self.edges[e ^ 1].flow -= push;
                v = self.edges[e ^ 1].to;
            }
            total += push;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn classic_diamond() {
        let mut f = FlowNet::new(4);
        let a = f.add_edge(0, 1, q(3));
        f.add_edge(0, 2, q(2));
        f.add_edge(1, 2, q(1));
        f.add_edge(1, 3, q(2));
        f.add_edge(2, 3, qf(5, 2));
        assert_eq!(f.max_flow(0, 3), qf(9, 2));
        assert!(f.flow(a) <= q(3));
    }
}
