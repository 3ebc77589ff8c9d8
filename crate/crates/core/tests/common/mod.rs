#![allow(dead_code)]

//! Independent oracles shared by the integration suites.

use std::collections::{BTreeSet, HashMap, VecDeque};

use eigenform_lab::forms::pairs;
use eigenform_lab::uniqueness::{harmonicity_functional, EigenformData, NodeId, StabilityDigraph, TAU_PHI};
use eigenform_lab::{DirichletForm, FractalTriple, Weights};
use nalgebra::DMatrix;
use rand::Rng;

pub fn builtin(name: &str) -> FractalTriple {
    FractalTriple::builtin(name).unwrap()
}

pub fn form(n: usize, c: &[f64]) -> DirichletForm {
    DirichletForm::from_coefficients(n, c.to_vec()).unwrap()
}

/// Known eigenforms of the built-in triples with unit weights.
pub fn corpus_eigenforms() -> Vec<(&'static str, FractalTriple, Weights, DirichletForm)> {
    let mut out = Vec::new();
    let g = builtin("gasket");
    out.push(("gasket", g, Weights::uniform(3), DirichletForm::unit(3)));
    for (a, b) in [(1.0, 1.0), (2.0, 0.5), (5.0, 1.0)] {
        out.push(("tree_gasket", builtin("tree_gasket"), Weights::uniform(3), form(3, &[a, b, 0.0])));
    }
    out.push(("vicsek", builtin("vicsek"), Weights::uniform(5), DirichletForm::unit(4)));
    out
}

/// Random form with coefficients in `[0.1, 3)` on the edges of `support`, zero elsewhere.
pub fn random_form_on<R: Rng>(rng: &mut R, n: usize, support: &eigenform_lab::UndirectedGraph) -> DirichletForm {
    let coeffs = pairs(n)
        .map(|(a, b)| if support.has_edge(a, b) { rng.gen_range(0.1..3.0) } else { 0.0 })
        .collect();
    DirichletForm::from_coefficients(n, coeffs).unwrap()
}

pub fn random_weights<R: Rng>(rng: &mut R, k: usize) -> Weights {
    Weights::new((0..k).map(|_| rng.gen_range(0.3..3.0)).collect()).unwrap()
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Second-level vertex set: ids of the first level come first, then one fresh id
/// per non-boundary point of each first-level cell copy.
pub struct TwoLevel {
    pub num_v2: usize,
    /// `((i1, i2), vertex ids)`.
    pub cells: Vec<((usize, usize), Vec<usize>)>,
}

pub fn two_level(triple: &FractalTriple) -> TwoLevel {
    let n = triple.n();
    let mut next = triple.num_v1();
    let mut fresh: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells = Vec::new();
    for i1 in 0..triple.k() {
        for i2 in 0..triple.k() {
            let ids = triple
                .cell(i2)
                .iter()
                .map(|&x| {
                    if x < n {
                        triple.cell(i1)[x]
                    } else {
                        *fresh.entry((i1, x)).or_insert_with(|| {
                            next += 1;
                            next - 1
                        })
                    }
                })
                .collect();
            cells.push(((i1, i2), ids));
        }
    }
    TwoLevel { num_v2: next, cells }
}

fn two_level_laplacian(triple: &FractalTriple, w: &Weights, e: &DirichletForm, tl: &TwoLevel) -> DMatrix<f64> {
    let mut lap = DMatrix::zeros(tl.num_v2, tl.num_v2);
    for ((i1, i2), ids) in &tl.cells {
        let r = w.get(*i1) * w.get(*i2);
        for (a, b, c) in e.entries() {
            let (x, y) = (ids[a], ids[b]);
            let g = r * c;
            lap[(x, x)] += g;
            lap[(y, y)] += g;
            lap[(x, y)] -= g;
            lap[(y, x)] -= g;
        }
    }
    let _ = triple;
    lap
}

/// `num_v2 x N` harmonic extension matrix at level two, via Cholesky of the interior block.
pub fn two_level_extension(triple: &FractalTriple, w: &Weights, e: &DirichletForm) -> (TwoLevel, DMatrix<f64>) {
    let n = triple.n();
    let tl = two_level(triple);
    let lap = two_level_laplacian(triple, w, e, &tl);
    let m = tl.num_v2;
    let l_ii = lap.view((n, n), (m - n, m - n)).clone_owned();
    let l_ib = lap.view((n, 0), (m - n, n)).clone_owned();
    let chol = l_ii.cholesky().expect("interior block positive definite");
    let h_i = -chol.solve(&l_ib);
    let mut h = DMatrix::zeros(m, n);
    h.view_mut((0, 0), (n, n)).fill_with_identity();
    h.view_mut((n, 0), (m - n, n)).copy_from(&h_i);
    (tl, h)
}

/// Brute-force `Lambda_{r^2}(E)` from the second-level network.
pub fn two_level_lambda(triple: &FractalTriple, w: &Weights, e: &DirichletForm) -> DirichletForm {
    let n = triple.n();
    let (tl, h) = two_level_extension(triple, w, e);
    let lap = two_level_laplacian(triple, w, e, &tl);
    // energy form restricted to harmonic functions: H^T L H
    let s = h.transpose() * lap * h;
    let coeffs = pairs(n).map(|(a, b)| (-0.5 * (s[(a, b)] + s[(b, a)])).max(0.0)).collect();
    DirichletForm::from_coefficients(n, coeffs).unwrap()
}

/// Second-level cell operator of `(i1, i2)` read off the brute-force extension.
pub fn two_level_cell_operator(triple: &FractalTriple, w: &Weights, e: &DirichletForm, i1: usize, i2: usize) -> DMatrix<f64> {
    let n = triple.n();
    let (tl, h) = two_level_extension(triple, w, e);
    let ids = &tl.cells.iter().find(|(c, _)| *c == (i1, i2)).unwrap().1;
    DMatrix::from_fn(n, n, |p, q| h[(ids[p], q)])
}

/// All words of length `0..=max_len` over `k` letters.
pub fn words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for i in 0..k {
                let mut v = w.clone();
                v.push(i);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Stability edges by direct enumeration of word images of each seed.
pub fn word_enumeration_edges(data: &EigenformData<'_>) -> BTreeSet<(NodeId, NodeId)> {
    let form = data.form();
    let n = form.n();
    let maxc = form.max_coefficient();
    let all_words = words(data.renormalizer.triple().k(), n - 1);
    let mut edges = BTreeSet::new();
    for pd in &data.perron {
        let scale = pd.u_tilde.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for w in &all_words {
            let t = data.renormalizer.word_operator(w);
            let v: Vec<f64> = (0..n).map(|p| (0..n).map(|q| t[(p, q)] * pd.u_tilde[q]).sum()).collect();
            for comp in &data.components {
                for s in 0..comp.m() {
                    let phi = harmonicity_functional(form, comp, s, &v);
                    if phi.abs() > TAU_PHI * maxc * scale {
                        edges.insert(((pd.j, pd.s), (comp.j, s)));
                    }
                }
            }
        }
    }
    edges
}

/// Every nonempty node subset closed under out-edges, as bitmasks over `dg.nodes`.
pub fn closed_masks(dg: &StabilityDigraph) -> Vec<u32> {
    let m = dg.nodes.len();
    assert!(m <= 20);
    let idx = |v: &NodeId| dg.nodes.iter().position(|x| x == v).unwrap();
    let edges: Vec<(usize, usize)> = dg.edges.iter().map(|(a, b)| (idx(a), idx(b))).collect();
    (1u32..(1 << m))
        .filter(|&mask| edges.iter().all(|&(a, b)| mask & (1 << a) == 0 || mask & (1 << b) != 0))
        .collect()
}

pub fn has_disjoint_closed_pair(masks: &[u32]) -> bool {
    masks.iter().any(|a| masks.iter().any(|b| a & b == 0))
}

/// Boundary points joined to `q` by a path in the lift of the support graph whose
/// intermediate vertices are not boundary points.
pub fn boundary_reach(triple: &FractalTriple, e: &DirichletForm, q: usize) -> Vec<usize> {
    let n = triple.n();
    let mut adj = vec![Vec::new(); triple.num_v1()];
    for cell in triple.cells() {
        for (a, b, c) in e.entries() {
            if c > 0.0 {
                adj[cell[a]].push(cell[b]);
                adj[cell[b]].push(cell[a]);
            }
        }
    }
    let mut seen = vec![false; triple.num_v1()];
    seen[q] = true;
    let mut queue = VecDeque::from([q]);
    let mut found = BTreeSet::new();
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if seen[y] {
                continue;
            }
            seen[y] = true;
            if y < n {
                found.insert(y);
            } else {
                queue.push_back(y);
            }
        }
    }
    found.into_iter().collect()
}

/// Random connected set of cells, grown from a random seed cell.
pub fn random_connected_cells<R: Rng>(rng: &mut R, triple: &FractalTriple) -> BTreeSet<usize> {
    let adj = triple.cell_graph().adjacency();
    let k = triple.k();
    let target = rng.gen_range(1..=k);
    let mut set = BTreeSet::from([rng.gen_range(0..k)]);
    while set.len() < target {
        let frontier: Vec<usize> = set
            .iter()
            .flat_map(|&i| adj[i].iter().copied())
            .filter(|i| !set.contains(i))
            .collect();
        if frontier.is_empty() {
            break;
        }
        set.insert(frontier[rng.gen_range(0..frontier.len())]);
    }
    set
}
