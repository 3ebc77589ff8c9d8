//! Minimal undirected simple graphs on `{0..order}`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Unordered vertex pair, always stored with `.0 < .1`.
pub type Edge = (usize, usize);

pub fn edge(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Loop-free undirected graph with a sorted edge set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UndirectedGraph {
    order: usize,
    edges: BTreeSet<Edge>,
}

impl UndirectedGraph {
    pub fn empty(order: usize) -> Self {
        Self {
            order,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(order: usize) -> Self {
        let mut g = Self::empty(order);
        for a in 0..order {
            for b in a + 1..order {
                g.edges.insert((a, b));
            }
        }
        g
    }

    /// Builds a graph from an edge list. Loops are dropped; endpoints must be `< order`.
    pub fn from_edges<I: IntoIterator<Item = Edge>>(order: usize, edges: I) -> Self {
        let mut g = Self::empty(order);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        assert!(a < self.order && b < self.order, "edge ({a},{b}) out of range");
        if a == b {
            return false;
        }
        self.edges.insert(edge(a, b))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&edge(a, b))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_subgraph_of(&self, other: &Self) -> bool {
        self.order == other.order && self.edges.is_subset(&other.edges)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.order];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Connected components of the subgraph induced on `allowed`, each sorted,
    /// ordered by their smallest vertex.
    pub fn components_within(&self, allowed: &[bool]) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.order];
        let mut out = Vec::new();
        for start in 0..self.order {
            if !allowed[start] || seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if allowed[y] && !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        self.components_within(&vec![true; self.order])
    }

    /// The empty graph and the single vertex count as connected.
    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}

impl fmt::Display for UndirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (a, b)) in self.edges.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}-{b}")?;
        }
        write!(f, "}}")
    }
}
