//! Combinatorics of boundary graphs: the lift `S(G)`, the operator `Lambda(G)`,
//! the graphs `G~` and `G^`, the `j`-components and the maps `L_j`.
//!
//! Paths "through the interior" may touch boundary ids `0..N` only at their
//! endpoints.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fractal::FractalTriple;
use crate::graph::UndirectedGraph;

/// A graph on the boundary ids `0..N`.
pub type BoundaryGraph = UndirectedGraph;

/// `S(G)`: every edge `{a, b}` of `g` copied into every cell as `{cells[i][a], cells[i][b]}`.
pub fn lifted_graph(triple: &FractalTriple, g: &BoundaryGraph) -> UndirectedGraph {
    lift_through(triple, g, 0..triple.k())
}

fn lift_through(triple: &FractalTriple, g: &BoundaryGraph, cells: impl Iterator<Item = usize>) -> UndirectedGraph {
    assert_eq!(g.order(), triple.n());
    let mut out = UndirectedGraph::empty(triple.num_v1());
    for i in cells {
        let cell = triple.cell(i);
        for (a, b) in g.edges() {
            out.add_edge(cell[a], cell[b]);
        }
    }
    out
}

/// Vertices reachable from `start` along `adj`, expanding only through non-boundary vertices.
fn interior_reach(adj: &[Vec<usize>], n: usize, start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if x != start && x < n {
            continue;
        }
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// `Lambda(G)`.
pub fn lambda_graph(triple: &FractalTriple, g: &BoundaryGraph) -> BoundaryGraph {
    let n = triple.n();
    let adj = lifted_graph(triple, g).adjacency();
    let mut out = BoundaryGraph::empty(n);
    for a in 0..n {
        let reach = interior_reach(&adj, n, a);
        for b in a + 1..n {
            if reach[b] {
                out.add_edge(a, b);
            }
        }
    }
    out
}

/// `G~`: boundary cells `j1`, `j2` are joined when they meet, directly or through
/// the complete graph lifted into the non-boundary cells.
pub fn tilde_graph(triple: &FractalTriple) -> BoundaryGraph {
    let n = triple.n();
    let g1 = lift_through(triple, &BoundaryGraph::complete(n), n..triple.k());
    let mut label = vec![usize::MAX; triple.num_v1()];
    for (c, comp) in g1.components().iter().enumerate() {
        for &x in comp {
            label[x] = c;
        }
    }
    let touched: Vec<BTreeSet<usize>> = (0..n)
        .map(|j| triple.cell(j).iter().map(|&x| label[x]).collect())
        .collect();
    let mut out = BoundaryGraph::empty(n);
    for a in 0..n {
        for b in a + 1..n {
            if !touched[a].is_disjoint(&touched[b]) {
                out.add_edge(a, b);
            }
        }
    }
    out
}

/// `G^ = Lambda^m(G~)` for the first `m` with `Lambda(G^) = G^`.
pub fn hat_graph(triple: &FractalTriple) -> Result<BoundaryGraph> {
    let n = triple.n();
    let cap = n * (n - 1) / 2;
    let mut g = tilde_graph(triple);
    for _ in 0..=cap {
        let next = lambda_graph(triple, &g);
        if next == g {
            return Ok(g);
        }
        g = next;
    }
    Err(Error::Consistency(format!(
        "graph iteration from G~ did not stabilize within {cap} rounds"
    )))
}

/// `L_j` on single boundary points: entry `x` is `L_j(P_x)`.
pub fn l_j_map(triple: &FractalTriple, hat: &BoundaryGraph, j: usize) -> Vec<BTreeSet<usize>> {
    let n = triple.n();
    let adj = lifted_graph(triple, hat).adjacency();
    let cell = triple.cell(j);
    (0..n)
        .map(|x| {
            let reach = interior_reach(&adj, n, x);
            (0..n).filter(|&h| h != j && reach[cell[h]]).collect()
        })
        .collect()
}

fn image(map: &[BTreeSet<usize>], b: &BTreeSet<usize>) -> BTreeSet<usize> {
    b.iter().flat_map(|&x| map[x].iter().copied()).collect()
}

fn image_pow(map: &[BTreeSet<usize>], b: &BTreeSet<usize>, power: usize) -> BTreeSet<usize> {
    (0..power).fold(b.clone(), |acc, _| image(map, &acc))
}

/// `L_j^power(B)` for the triple's own `G^`.
pub fn l_j_image(triple: &FractalTriple, j: usize, b: &BTreeSet<usize>, power: usize) -> Result<BTreeSet<usize>> {
    let hat = hat_graph(triple)?;
    Ok(image_pow(&l_j_map(triple, &hat, j), b, power))
}

/// The `j`-components of `G^` with the permutation they undergo under `L_j`.
///
/// Components are ordered by smallest vertex id and indexed from zero;
/// `beta[s]` is the index of `L_j(C_s)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentData {
    pub j: usize,
    pub components: Vec<Vec<usize>>,
    pub beta: Vec<usize>,
    pub periods: Vec<usize>,
    pub c_prime: Vec<Vec<usize>>,
    pub c_second: Vec<Vec<usize>>,
    /// `L_j(P_x)` for every boundary point `x`.
    pub l_map: Vec<Vec<usize>>,
}

impl ComponentData {
    pub fn m(&self) -> usize {
        self.components.len()
    }

    /// Index of the component containing `x` (`None` for `x = j`).
    pub fn component_of(&self, x: usize) -> Option<usize> {
        self.components.iter().position(|c| c.contains(&x))
    }

    pub fn l_image(&self, b: &BTreeSet<usize>, power: usize) -> BTreeSet<usize> {
        let map: Vec<BTreeSet<usize>> = self.l_map.iter().map(|v| v.iter().copied().collect()).collect();
        image_pow(&map, b, power)
    }
}

/// Component data for `j`, computed from a precomputed `G^`.
pub fn components_with(triple: &FractalTriple, hat: &BoundaryGraph, j: usize) -> Result<ComponentData> {
    let n = triple.n();
    if j >= n {
        return Err(Error::InvalidInput(format!("boundary index {j} out of range (N={n})")));
    }
    let mut allowed = vec![true; n];
    allowed[j] = false;
    let components = hat.components_within(&allowed);
    let sets: Vec<BTreeSet<usize>> = components.iter().map(|c| c.iter().copied().collect()).collect();
    let map = l_j_map(triple, hat, j);

    let mut beta = Vec::with_capacity(sets.len());
    for (s, c) in sets.iter().enumerate() {
        let img = image(&map, c);
        let t = sets.iter().position(|d| *d == img).ok_or_else(|| {
            Error::Consistency(format!("L_{j} maps component {s} = {c:?} to {img:?}, not a component"))
        })?;
        beta.push(t);
    }
    let distinct: BTreeSet<usize> = beta.iter().copied().collect();
    if distinct.len() != beta.len() {
        return Err(Error::Consistency(format!("component map for j={j} is not a bijection: {beta:?}")));
    }

    let mut periods = Vec::with_capacity(sets.len());
    let mut c_prime = Vec::with_capacity(sets.len());
    let mut c_second = Vec::with_capacity(sets.len());
    for (s, c) in sets.iter().enumerate() {
        let mut p = 1;
        let mut t = beta[s];
        while t != s {
            t = beta[t];
            p += 1;
        }
        let mut prime = Vec::new();
        let mut second = Vec::new();
        for &x in c {
            let img = image_pow(&map, &BTreeSet::from([x]), p);
            if img == *c {
                prime.push(x);
            } else if img.is_empty() {
                second.push(x);
            } else {
                return Err(Error::Consistency(format!(
                    "L_{j}^{p}(P_{x}) = {img:?} is neither empty nor the component {c:?}"
                )));
            }
        }
        if prime.is_empty() {
            return Err(Error::Consistency(format!("C'_{{{j},{s}}} is empty")));
        }
        periods.push(p);
        c_prime.push(prime);
        c_second.push(second);
    }

    Ok(ComponentData {
        j,
        components,
        beta,
        periods,
        c_prime,
        c_second,
        l_map: map.into_iter().map(|s| s.into_iter().collect()).collect(),
    })
}

pub fn components(triple: &FractalTriple, j: usize) -> Result<ComponentData> {
    components_with(triple, &hat_graph(triple)?, j)
}

/// Component data for every boundary index, in order.
pub fn all_components(triple: &FractalTriple, hat: &BoundaryGraph) -> Result<Vec<ComponentData>> {
    (0..triple.n())
        .into_par_iter()
        .map(|j| components_with(triple, hat, j))
        .collect()
}
