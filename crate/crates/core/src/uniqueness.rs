//! The uniqueness decision for a known eigenform.
//!
//! Node `(j, s)` points to `(j', s')` when the harmonicity functional
//! `phi_{j',s'}` is nonzero on some word image `T_w(u~_{j,s})`, the empty word
//! included. By linearity it suffices to test an orthonormal basis of the
//! smallest `T`-invariant subspace containing `u~_{j,s}`. Stable sets are the
//! sets closed under out-edges, so the eigenform is unique exactly when the
//! condensation has a single sink.

use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{pair_index, pairs, DirichletForm, POSITIVITY_TOL};
use crate::fractal::{FractalTriple, Weights};
use crate::graphs::{all_components, hat_graph, BoundaryGraph, ComponentData};
use crate::linalg::sup_norm;
use crate::renorm::{apply, Renormalizer};
use crate::solver::{find_eigenform, verify_eigenform, EigenResult, SolverOptions};
use crate::spectral::{perron_all, perron_positive, project_g, PerronData};

pub const TAU_PHI: f64 = 1e-8;
pub const TAU_RANK: f64 = 1e-10;
/// Functional magnitudes in `(TAU_PHI, BORDERLINE_FACTOR * TAU_PHI]` are flagged.
pub const BORDERLINE_FACTOR: f64 = 1e3;
/// Two forms count as proportional when their normalized coefficients agree to this relative accuracy.
pub const PROPORTIONALITY_TOL: f64 = 1e-8;
const PENALTY_FIT_TOL: f64 = 1e-9;
const MAX_DELTA_HALVINGS: usize = 40;

/// `(j, s)`, both zero-based.
pub type NodeId = (usize, usize);

/// Orthonormal basis of the smallest subspace containing `seed` and invariant under every `T_i`.
pub fn orbit_span(rn: &Renormalizer<'_>, seed: &[f64]) -> Vec<Vec<f64>> {
    let ops: Vec<_> = rn.cell_operators().iter().map(|c| &c.matrix).collect();
    let dim = seed.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut frontier = Vec::new();
    let norm = dot(seed, seed).sqrt();
    if norm == 0.0 {
        return basis;
    }
    let seed: Vec<f64> = seed.iter().map(|x| x / norm).collect();
    if let Some(b) = adjoin(&basis, &seed) {
        basis.push(b.clone());
        frontier.push(b);
    }
    while !frontier.is_empty() && basis.len() < dim {
        let mut next = Vec::new();
        for b in &frontier {
            for t in &ops {
                if let Some(v) = adjoin(&basis, &apply(t, b)) {
                    basis.push(v.clone());
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    basis
}

/// Normalized component of `v` orthogonal to `basis`, if its norm exceeds the rank
/// tolerance. Basis vectors have unit length, so the tolerance is absolute.
fn adjoin(basis: &[Vec<f64>], v: &[f64]) -> Option<Vec<f64>> {
    let mut r = v.to_vec();
    // two Gram-Schmidt passes
    for _ in 0..2 {
        for b in basis {
            let c = dot(&r, b);
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let norm = dot(&r, &r).sqrt();
    if norm > TAU_RANK {
        Some(r.into_iter().map(|x| x / norm).collect())
    } else {
        None
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `phi_{j',s'}(u) = L_E(g_{j',s'}(u))(P_{j'})`.
pub fn harmonicity_functional(form: &DirichletForm, comp: &ComponentData, s: usize, u: &[f64]) -> f64 {
    form.laplacian_at(&project_g(u, comp, s), comp.j)
}

/// Largest `|phi(b)| / (max_coeff * sup|b|)` over a basis.
fn functional_magnitude(form: &DirichletForm, comp: &ComponentData, s: usize, basis: &[Vec<f64>]) -> f64 {
    let maxc = form.max_coefficient();
    basis
        .iter()
        .map(|b| harmonicity_functional(form, comp, s, b).abs() / (maxc * sup_norm(b)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDiagnostic {
    pub from: NodeId,
    pub to: NodeId,
    pub magnitude: f64,
    pub edge: bool,
    pub borderline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityDigraph {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<(NodeId, NodeId)>,
    #[serde(skip)]
    pub node_payload: Vec<PerronData>,
    /// Dimension of the invariant span of each node's seed.
    pub span_dims: Vec<usize>,
    #[serde(skip)]
    pub diagnostics: Vec<EdgeDiagnostic>,
}

impl StabilityDigraph {
    pub fn index_of(&self, node: NodeId) -> Option<usize> {
        self.nodes.iter().position(|&x| x == node)
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    /// A node set is closed when no edge leaves it.
    pub fn is_closed(&self, set: &BTreeSet<NodeId>) -> bool {
        self.edges.iter().all(|(a, b)| !set.contains(a) || set.contains(b))
    }

    /// Strongly connected components, each sorted, listed by smallest node.
    pub fn sccs(&self) -> Vec<Vec<NodeId>> {
        let mut g = DiGraph::<NodeId, ()>::new();
        let idx: Vec<_> = self.nodes.iter().map(|&v| g.add_node(v)).collect();
        for (a, b) in &self.edges {
            g.add_edge(idx[self.index_of(*a).unwrap()], idx[self.index_of(*b).unwrap()], ());
        }
        let mut out: Vec<Vec<NodeId>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<NodeId> = c.into_iter().map(|i| g[i]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        out.sort();
        out
    }

    /// SCCs with no edge leaving them.
    pub fn sink_sccs(&self) -> Vec<Vec<NodeId>> {
        self.sccs()
            .into_iter()
            .filter(|c| self.is_closed(&c.iter().copied().collect()))
            .collect()
    }
}

/// Everything the decision needs about a verified eigenform.
#[derive(Debug, Clone)]
pub struct EigenformData<'a> {
    pub renormalizer: Renormalizer<'a>,
    pub hat: BoundaryGraph,
    pub components: Vec<ComponentData>,
    pub perron: Vec<PerronData>,
    pub eigen: EigenResult,
}

impl<'a> EigenformData<'a> {
    /// Verifies `form` at `tol` and collects components and Perron data.
    pub fn new(triple: &'a FractalTriple, weights: &'a Weights, form: &DirichletForm, tol: f64) -> Result<Self> {
        let eigen = verify_eigenform(triple, weights, form, tol)?;
        if !eigen.verified {
            return Err(Error::NotEigenform(format!(
                "residual {:.3e}, ratio spread {:.3e}, checks {:?}",
                eigen.residual, eigen.ratio_spread, eigen.checks
            )));
        }
        let form = form.clamped();
        let renormalizer = Renormalizer::new(triple, weights, &form)?;
        let hat = hat_graph(triple)?;
        let components = all_components(triple, &hat)?;
        let perron = perron_all(&renormalizer, &components)?;
        Ok(Self {
            renormalizer,
            hat,
            components,
            perron,
            eigen,
        })
    }

    pub fn form(&self) -> &DirichletForm {
        self.renormalizer.form()
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.perron.iter().map(|p| (p.j, p.s)).collect()
    }

    pub fn perron_of(&self, node: NodeId) -> &PerronData {
        self.perron.iter().find(|p| (p.j, p.s) == node).expect("known node")
    }
}

/// Builds the reachability digraph on all `(j, s)`.
pub fn stability_digraph(data: &EigenformData<'_>) -> StabilityDigraph {
    let form = data.form();
    let nodes = data.nodes();
    let per_source: Vec<(usize, Vec<EdgeDiagnostic>)> = data
        .perron
        .par_iter()
        .map(|pd| {
            let basis = orbit_span(&data.renormalizer, &pd.u_tilde);
            let diags = nodes
                .iter()
                .map(|&(j2, s2)| {
                    let magnitude = functional_magnitude(form, &data.components[j2], s2, &basis);
                    EdgeDiagnostic {
                        from: (pd.j, pd.s),
                        to: (j2, s2),
                        magnitude,
                        edge: magnitude > TAU_PHI,
                        borderline: magnitude > TAU_PHI && magnitude <= BORDERLINE_FACTOR * TAU_PHI,
                    }
                })
                .collect();
            (basis.len(), diags)
        })
        .collect();

    let span_dims = per_source.iter().map(|(d, _)| *d).collect();
    let diagnostics: Vec<EdgeDiagnostic> = per_source.into_iter().flat_map(|(_, d)| d).collect();
    let edges = diagnostics.iter().filter(|d| d.edge).map(|d| (d.from, d.to)).collect();
    StabilityDigraph {
        nodes,
        edges,
        node_payload: data.perron.clone(),
        span_dims,
        diagnostics,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub unique: bool,
    pub rho: f64,
    pub sink_scc_count: usize,
    pub sink_sccs: Vec<Vec<NodeId>>,
    /// Two disjoint nonempty stable sets, present iff not unique.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<[Vec<NodeId>; 2]>,
    pub digraph: StabilityDigraph,
    /// Whether the positive-form path on single boundary indices was run and agreed.
    pub positive_case_checked: bool,
    pub warnings: Vec<String>,
}

/// Decides uniqueness of the eigenform in `data`.
pub fn decide(data: &EigenformData<'_>) -> Result<StabilityVerdict> {
    let digraph = stability_digraph(data);
    let sink_sccs = digraph.sink_sccs();
    let unique = sink_sccs.len() == 1;
    let witnesses = (!unique && sink_sccs.len() >= 2).then(|| [sink_sccs[0].clone(), sink_sccs[1].clone()]);

    let positive_case_checked = data.form().is_positive();
    if positive_case_checked {
        let direct = positive_case_edges(data)?;
        let general: BTreeSet<(usize, usize)> = digraph.edges.iter().map(|((j, _), (j2, _))| (*j, *j2)).collect();
        if direct != general {
            return Err(Error::Consistency(format!(
                "positive-case digraph {direct:?} disagrees with component digraph {general:?}"
            )));
        }
    }

    let warnings = digraph
        .diagnostics
        .iter()
        .filter(|d| d.borderline)
        .map(|d| {
            format!(
                "functional magnitude {:.3e} for {:?} -> {:?} is close to the zero tolerance",
                d.magnitude, d.from, d.to
            )
        })
        .collect();

    Ok(StabilityVerdict {
        unique,
        rho: data.eigen.rho,
        sink_scc_count: sink_sccs.len(),
        sink_sccs,
        witnesses,
        digraph,
        positive_case_checked,
        warnings,
    })
}

/// Edges `j -> j'` seeded by `u_bar_j`, testing `L_E(.)(P_{j'})` directly.
fn positive_case_edges(data: &EigenformData<'_>) -> Result<BTreeSet<(usize, usize)>> {
    let form = data.form();
    let n = form.n();
    let maxc = form.max_coefficient();
    let mut edges = BTreeSet::new();
    for j in 0..n {
        let (u_bar, _) = perron_positive(&data.renormalizer, j)?;
        let basis = orbit_span(&data.renormalizer, &u_bar);
        for j2 in 0..n {
            let mag = basis
                .iter()
                .map(|b| form.laplacian_at(b, j2).abs() / (maxc * sup_norm(b)))
                .fold(0.0, f64::max);
            if mag > TAU_PHI {
                edges.insert((j, j2));
            }
        }
    }
    Ok(edges)
}

/// Verifies `form` and decides uniqueness.
pub fn decide_uniqueness(
    triple: &FractalTriple,
    weights: &Weights,
    form: &DirichletForm,
    tol: f64,
) -> Result<StabilityVerdict> {
    decide(&EigenformData::new(triple, weights, form, tol)?)
}

/// The quadratic form `u -> (L_E(T_j^n g_{j,s}(u))(P_j))^2` written as
/// `sum d_ab (u_a - u_b)^2` with possibly negative `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyForm {
    pub j: usize,
    pub s: usize,
    pub n: usize,
    /// `d_ab` in pair order.
    pub coefficients: Vec<f64>,
    /// The linear functional inside the square, as a vector of weights.
    pub functional: Vec<f64>,
    pub fit_residual: f64,
}

impl PenaltyForm {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.coefficients[pair_index(self.n, a, b)]
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        pairs(self.n)
            .zip(&self.coefficients)
            .map(|((a, b), d)| d * (u[a] - u[b]).powi(2))
            .sum()
    }

    /// The defining square, evaluated directly.
    pub fn square(&self, u: &[f64]) -> f64 {
        dot(&self.functional, u).powi(2)
    }
}

pub fn penalty_form(data: &EigenformData<'_>, node: NodeId) -> Result<PenaltyForm> {
    let (j, s) = node;
    let form = data.form();
    let n = form.n();
    let comp = &data.components[j];
    let power = data.renormalizer.cell_power(j, comp.periods[s]);
    let psi = |u: &[f64]| form.laplacian_at(&apply(&power, &project_g(u, comp, s)), j);
    let q = |u: &[f64]| psi(u).powi(2);

    let indicator = |xs: &[usize]| {
        let mut u = vec![0.0; n];
        xs.iter().for_each(|&x| u[x] = 1.0);
        u
    };
    let functional: Vec<f64> = (0..n).map(|x| psi(&indicator(&[x]))).collect();
    let coefficients: Vec<f64> = pairs(n)
        .map(|(a, b)| 0.5 * (q(&indicator(&[a])) + q(&indicator(&[b])) - q(&indicator(&[a, b]))))
        .collect();
    let mut pf = PenaltyForm {
        j,
        s,
        n,
        coefficients,
        functional,
        fit_residual: 0.0,
    };

    // check the fit on indicator differences and on constants
    let scale = pf.functional.iter().map(|w| w * w).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut tests: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for (a, b) in pairs(n) {
        let mut u = vec![0.0; n];
        u[a] = 1.0;
        u[b] = -1.0;
        tests.push(u);
    }
    pf.fit_residual = tests
        .iter()
        .map(|u| (pf.energy(u) - q(u)).abs() / scale)
        .fold(0.0, f64::max);
    if pf.fit_residual > PENALTY_FIT_TOL {
        return Err(Error::Consistency(format!(
            "penalty form of {node:?} does not fit its defining square (residual {:.3e})",
            pf.fit_residual
        )));
    }
    let maxd = pf.coefficients.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if let Some((a, b)) = pairs(n).find(|&(a, b)| !data.hat.has_edge(a, b) && pf.get(a, b).abs() > POSITIVITY_TOL * maxd) {
        return Err(Error::Consistency(format!(
            "penalty form of {node:?} has coefficient on ({a},{b}) outside G^"
        )));
    }
    Ok(pf)
}

/// Outcome of a perturbed restart of the solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exploration {
    /// Nodes whose penalty forms were subtracted.
    pub penalized: Vec<NodeId>,
    pub delta_requested: f64,
    pub delta_used: f64,
    pub start: DirichletForm,
    pub result: EigenResult,
    pub proportional: bool,
    pub proportionality_gap: f64,
}

/// Restarts the solver from `E - delta E''`, where `E''` sums the penalty forms of
/// the second witness set (or of the only sink when the verdict is unique).
///
/// `delta` is relative: `E` is normalized to unit coefficient sum and `E''` to
/// the same largest coefficient. It is halved until every `G^` coefficient of the
/// start stays positive.
pub fn explore_nonuniqueness(
    data: &EigenformData<'_>,
    verdict: &StabilityVerdict,
    delta: f64,
    opts: SolverOptions,
) -> Result<Exploration> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidInput(format!("delta must be a nonnegative number, got {delta}")));
    }
    let penalized = match &verdict.witnesses {
        Some([_, b2]) => b2.clone(),
        None => verdict.sink_sccs.first().cloned().unwrap_or_default(),
    };
    let n = data.form().n();
    let base = data.form().normalized();
    let mut penalty = vec![0.0; n * (n - 1) / 2];
    for &node in &penalized {
        let pf = penalty_form(data, node)?;
        penalty.iter_mut().zip(&pf.coefficients).for_each(|(p, d)| *p += d);
    }
    let pmax = penalty.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if pmax > 0.0 {
        let s = base.max_coefficient() / pmax;
        penalty.iter_mut().for_each(|p| *p *= s);
    }

    let hat = &data.hat;
    let mut delta_used = delta;
    let mut start = None;
    for _ in 0..=MAX_DELTA_HALVINGS {
        let coeffs: Vec<f64> = base
            .coefficients()
            .iter()
            .zip(&penalty)
            .map(|(c, p)| c - delta_used * p)
            .collect();
        let cut = POSITIVITY_TOL * coeffs.iter().fold(0.0_f64, |m, c| m.max(*c));
        let inside = pairs(n)
            .zip(&coeffs)
            .all(|((a, b), &c)| if hat.has_edge(a, b) { c > cut } else { c >= 0.0 });
        if inside {
            start = Some(DirichletForm::from_coefficients(n, coeffs)?);
            break;
        }
        delta_used *= 0.5;
    }
    let start = start.ok_or(Error::NonConvergence {
        what: "perturbation size reduction",
        iterations: MAX_DELTA_HALVINGS,
    })?;

    let triple = data.renormalizer.triple();
    let weights = data.renormalizer.weights();
    let result = find_eigenform(triple, weights, Some(&start), opts)?;
    let gap = result.form.proportionality_gap(&base);
    Ok(Exploration {
        penalized,
        delta_requested: delta,
        delta_used,
        start,
        result,
        proportional: gap <= PROPORTIONALITY_TOL,
        proportionality_gap: gap,
    })
}
